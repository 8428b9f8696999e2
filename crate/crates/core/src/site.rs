//! The category of finite discrete G-sets together with the G-space `G`.
//!
//! Morphisms come in four shapes: equivariant maps between finite sets,
//! maps `G -> X` (fixed by the image of 1), right translations `G -> G`,
//! and the vacuous map `∅ -> G`. No other morphism lands in `G`: a
//! nonempty finite set cannot map equivariantly onto an infinite orbit.
//!
//! Hom-sets out of `G` are truncated to the top tower level, which is
//! exact as long as every finite object in play factors through that level.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gsets::{
    enumerate_equivariant_maps, pullback_finite, DiscreteGSet, EquivariantMap, GSetError,
};
use crate::profinite::{GroupElement, OpenSubgroup, Tower, TowerError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SiteError {
    #[error(transparent)]
    GSet(#[from] GSetError),
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error("cannot compose: codomain {codomain} of the inner map is not the domain {domain} of the outer map")]
    TypeMismatch { domain: String, codomain: String },
    #[error("family members do not share a codomain")]
    HeterogeneousCodomains,
    #[error("empty family")]
    EmptyFamily,
    #[error("family is not an epimorphic cover: {0}")]
    NotEpimorphic(String),
    #[error("morphism value {value} out of range for a G-set of size {size}")]
    OutOfRange { value: usize, size: usize },
    #[error("subcovers do not match the cover: {0}")]
    SubcoverMismatch(String),
    #[error("refinement certificate rejected: {0}")]
    Certificate(String),
    #[error("internal consistency: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RObject {
    Finite(DiscreteGSet),
    Group,
}

impl RObject {
    pub fn as_finite(&self) -> Option<&DiscreteGSet> {
        match self {
            RObject::Finite(x) => Some(x),
            RObject::Group => None,
        }
    }

    pub fn is_group(&self) -> bool {
        matches!(self, RObject::Group)
    }

    pub fn is_empty_set(&self) -> bool {
        matches!(self, RObject::Finite(x) if x.is_empty())
    }
}

impl fmt::Display for RObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RObject::Group => write!(f, "G"),
            RObject::Finite(x) => write!(f, "finite(size {}, level {})", x.size(), x.level()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SiteMorphism {
    FinToFin(EquivariantMap),
    /// `psi: G -> X` with `psi(1) = value`, so `psi(g) = g . value`.
    GToFin {
        codomain: DiscreteGSet,
        value: usize,
    },
    /// Right translation `h -> h * gamma`.
    GToG(GroupElement),
    /// The unique map `∅ -> G`.
    VacuousToG,
}

/// A point of an object: an index of a finite set, or a top-level group
/// element index standing in for a point of `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Elem(usize),
    Group(usize),
}

/// Surjectivity evidence for an epimorphic family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EpiWitness {
    /// For each point of the finite codomain: (member index, preimage).
    Finite(Vec<(usize, Point)>),
    /// Index of a right translation in a family over `G`.
    Group { member: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    codomain: RObject,
    members: Vec<SiteMorphism>,
    witness: EpiWitness,
}

impl Cover {
    pub fn codomain(&self) -> &RObject {
        &self.codomain
    }

    pub fn members(&self) -> &[SiteMorphism] {
        &self.members
    }

    pub fn witness(&self) -> &EpiWitness {
        &self.witness
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sieve {
    codomain: RObject,
    generators: Vec<SiteMorphism>,
}

impl Sieve {
    pub fn codomain(&self) -> &RObject {
        &self.codomain
    }

    pub fn generators(&self) -> &[SiteMorphism] {
        &self.generators
    }

    /// Sieve generated by the union of both generator lists.
    pub fn union(&self, other: &Sieve) -> Option<Sieve> {
        if self.codomain != other.codomain {
            return None;
        }
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        Some(Sieve {
            codomain: self.codomain.clone(),
            generators,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StabilityCase {
    /// `D` and every `C_i` finite: pull back along each `f_i`.
    One,
    /// `D = G`, every `C_i` finite.
    Two,
    /// `D = C = G`.
    Three,
    /// `D = G`, `C` finite, chosen preimage in a finite `C_l`.
    FourA,
    /// `D = G`, `C` finite, chosen preimage in `C_l = G`.
    FourB,
    /// `D` finite, some `C_i = G`.
    Five,
}

impl StabilityCase {
    pub const ALL: [StabilityCase; 6] = [
        StabilityCase::One,
        StabilityCase::Two,
        StabilityCase::Three,
        StabilityCase::FourA,
        StabilityCase::FourB,
        StabilityCase::Five,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StabilityCase::One => "1",
            StabilityCase::Two => "2",
            StabilityCase::Three => "3",
            StabilityCase::FourA => "4a",
            StabilityCase::FourB => "4b",
            StabilityCase::Five => "5",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.label() == s)
    }
}

impl fmt::Display for StabilityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `g . h_j = f_{cover_index} . connecting`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub cover_index: usize,
    pub connecting: SiteMorphism,
}

/// Output of the stability construction: a cover `{h_j}` of `D` such that
/// each `g . h_j` factors through a member of the input cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementCertificate {
    pub case: StabilityCase,
    pub input: Cover,
    pub morphism: SiteMorphism,
    pub output: Cover,
    pub factors: Vec<Factorization>,
}

/// Free-orbit count of a fibre product computed among all G-spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreeOrbits {
    Finite(usize),
    /// Orbits indexed by the coset `rep . stabilizer` of an open subgroup,
    /// an infinite set.
    Coset {
        rep: GroupElement,
        stabilizer: OpenSubgroup,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum FiberProduct {
    InSite {
        apex: RObject,
        left: SiteMorphism,
        right: SiteMorphism,
    },
    NotInSite {
        free_orbits: FreeOrbits,
        description: String,
    },
}

/// The category over a fixed tower.
#[derive(Debug, Clone)]
pub struct Site {
    tower: Arc<Tower>,
}

impl Site {
    pub fn new(tower: Arc<Tower>) -> Self {
        Site { tower }
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn finite(&self, x: DiscreteGSet) -> RObject {
        RObject::Finite(x)
    }

    pub fn empty(&self) -> DiscreteGSet {
        DiscreteGSet::empty(self.tower.clone())
    }

    pub fn point(&self) -> DiscreteGSet {
        DiscreteGSet::point(self.tower.clone())
    }

    pub fn g_to_fin(
        &self,
        codomain: &DiscreteGSet,
        value: usize,
    ) -> Result<SiteMorphism, SiteError> {
        if value >= codomain.size() {
            return Err(SiteError::OutOfRange {
                value,
                size: codomain.size(),
            });
        }
        Ok(SiteMorphism::GToFin {
            codomain: codomain.clone(),
            value,
        })
    }

    pub fn g_to_g(&self, gamma: GroupElement) -> Result<SiteMorphism, SiteError> {
        self.tower.check(&gamma)?;
        Ok(SiteMorphism::GToG(gamma))
    }

    pub fn domain(&self, f: &SiteMorphism) -> RObject {
        match f {
            SiteMorphism::FinToFin(m) => RObject::Finite(m.domain().clone()),
            SiteMorphism::GToFin { .. } | SiteMorphism::GToG(_) => RObject::Group,
            SiteMorphism::VacuousToG => RObject::Finite(self.empty()),
        }
    }

    pub fn codomain(&self, f: &SiteMorphism) -> RObject {
        match f {
            SiteMorphism::FinToFin(m) => RObject::Finite(m.codomain().clone()),
            SiteMorphism::GToFin { codomain, .. } => RObject::Finite(codomain.clone()),
            SiteMorphism::GToG(_) | SiteMorphism::VacuousToG => RObject::Group,
        }
    }

    pub fn identity(&self, c: &RObject) -> SiteMorphism {
        match c {
            RObject::Finite(x) => SiteMorphism::FinToFin(EquivariantMap::identity(x)),
            RObject::Group => SiteMorphism::GToG(self.tower.identity()),
        }
    }

    /// The unique morphism out of the empty set.
    pub fn from_empty(&self, target: &RObject) -> SiteMorphism {
        match target {
            RObject::Group => SiteMorphism::VacuousToG,
            RObject::Finite(x) => SiteMorphism::FinToFin(
                EquivariantMap::new(self.empty(), x.clone(), Vec::new())
                    .expect("empty map is equivariant"),
            ),
        }
    }

    /// Points of an object; `G` is represented by its top tower level.
    pub fn points(&self, c: &RObject) -> Vec<Point> {
        match c {
            RObject::Finite(x) => (0..x.size()).map(Point::Elem).collect(),
            RObject::Group => (0..self.tower.top_order()).map(Point::Group).collect(),
        }
    }

    /// Pointwise evaluation.
    pub fn eval(&self, f: &SiteMorphism, p: Point) -> Point {
        let d = self.tower.depth();
        match (f, p) {
            (SiteMorphism::FinToFin(m), Point::Elem(x)) => Point::Elem(m.apply(x)),
            (SiteMorphism::GToFin { codomain, value }, Point::Group(t)) => {
                Point::Elem(codomain.act_at(d, t, *value))
            }
            (SiteMorphism::GToG(gamma), Point::Group(t)) => {
                Point::Group(self.tower.level(d).mul(t, gamma.top()))
            }
            _ => panic!("point {p:?} is not in the domain of {f:?}"),
        }
    }

    /// `Hom(c, d)`, truncated at the top level when `c = G`.
    pub fn hom(&self, c: &RObject, d: &RObject) -> Vec<SiteMorphism> {
        match (c, d) {
            (RObject::Finite(x), RObject::Finite(y)) => enumerate_equivariant_maps(x, y)
                .into_iter()
                .map(SiteMorphism::FinToFin)
                .collect(),
            (RObject::Group, RObject::Finite(y)) => (0..y.size())
                .map(|value| SiteMorphism::GToFin {
                    codomain: y.clone(),
                    value,
                })
                .collect(),
            (RObject::Group, RObject::Group) => {
                self.tower.elements().map(SiteMorphism::GToG).collect()
            }
            (RObject::Finite(x), RObject::Group) if x.is_empty() => vec![SiteMorphism::VacuousToG],
            (RObject::Finite(_), RObject::Group) => Vec::new(),
        }
    }

    /// `f . g`: apply `g` first.
    pub fn compose(&self, f: &SiteMorphism, g: &SiteMorphism) -> Result<SiteMorphism, SiteError> {
        let (mid, dom_f) = (self.codomain(g), self.domain(f));
        if mid != dom_f {
            return Err(SiteError::TypeMismatch {
                domain: dom_f.to_string(),
                codomain: mid.to_string(),
            });
        }
        use SiteMorphism::*;
        Ok(match (f, g) {
            (FinToFin(a), FinToFin(b)) => FinToFin(a.after(b).expect("codomain checked")),
            (VacuousToG, FinToFin(_)) => VacuousToG,
            (FinToFin(a), GToFin { value, .. }) => GToFin {
                codomain: a.codomain().clone(),
                value: a.apply(*value),
            },
            // (h gamma) . x with h = 1
            (GToFin { codomain, value }, GToG(gamma)) => GToFin {
                codomain: codomain.clone(),
                value: codomain.act(gamma, *value)?,
            },
            // h -> (h gamma) a
            (GToG(a), GToG(gamma)) => GToG(self.tower.mul_unchecked(gamma, a)),
            (GToG(_), VacuousToG) => VacuousToG,
            (GToFin { codomain, .. }, VacuousToG) => {
                self.from_empty(&RObject::Finite(codomain.clone()))
            }
            _ => {
                return Err(SiteError::Internal(format!(
                    "unhandled composite {f:?} . {g:?}"
                )))
            }
        })
    }

    fn image_points(&self, f: &SiteMorphism) -> Vec<(usize, Point)> {
        // (codomain point, least preimage)
        match f {
            SiteMorphism::FinToFin(m) => {
                let mut out: Vec<(usize, Point)> = Vec::new();
                let mut seen = HashSet::new();
                for (x, &y) in m.table().iter().enumerate() {
                    if seen.insert(y) {
                        out.push((y, Point::Elem(x)));
                    }
                }
                out
            }
            SiteMorphism::GToFin { codomain, value } => {
                let d = self.tower.depth();
                let mut out = Vec::new();
                let mut seen = HashSet::new();
                for t in 0..self.tower.top_order() {
                    let y = codomain.act_at(d, t, *value);
                    if seen.insert(y) {
                        out.push((y, Point::Group(t)));
                    }
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Checks that the family's images jointly exhaust the common
    /// codomain. `Ok(None)` means "not epimorphic".
    pub fn is_epimorphic_cover(
        &self,
        family: &[SiteMorphism],
    ) -> Result<Option<EpiWitness>, SiteError> {
        let Some(first) = family.first() else {
            return Err(SiteError::EmptyFamily);
        };
        let codomain = self.codomain(first);
        if family.iter().any(|f| self.codomain(f) != codomain) {
            return Err(SiteError::HeterogeneousCodomains);
        }
        match codomain {
            RObject::Group => Ok(family
                .iter()
                .position(|f| matches!(f, SiteMorphism::GToG(_)))
                .map(|member| EpiWitness::Group { member })),
            RObject::Finite(c) => {
                let mut hit: Vec<Option<(usize, Point)>> = vec![None; c.size()];
                for (i, f) in family.iter().enumerate() {
                    for (y, p) in self.image_points(f) {
                        hit[y].get_or_insert((i, p));
                    }
                }
                Ok(hit
                    .into_iter()
                    .collect::<Option<Vec<_>>>()
                    .map(EpiWitness::Finite))
            }
        }
    }

    pub fn cover(&self, members: Vec<SiteMorphism>) -> Result<Cover, SiteError> {
        match self.is_epimorphic_cover(&members)? {
            Some(witness) => Ok(Cover {
                codomain: self.codomain(&members[0]),
                members,
                witness,
            }),
            None => Err(SiteError::NotEpimorphic(
                "images do not exhaust the codomain".into(),
            )),
        }
    }

    /// Least preimage of the finite point `c` under `f`, if any.
    fn least_preimage(&self, f: &SiteMorphism, c: usize) -> Option<Point> {
        self.image_points(f)
            .into_iter()
            .find(|&(y, _)| y == c)
            .map(|(_, p)| p)
    }

    /// Orbit representative of `x` (least index of its orbit) and the
    /// least element `delta` with `delta . rep = x`.
    fn orbit_coordinates(&self, c: &DiscreteGSet, x: usize) -> (usize, GroupElement) {
        let rep = c.orbit(x)[0];
        let d = self.tower.depth();
        let t = (0..self.tower.top_order())
            .find(|&t| c.act_at(d, t, rep) == x)
            .expect("x lies in the orbit of its representative");
        (rep, self.tower.element_from_top(t))
    }

    /// Which stability case applies to `(cover, g)`.
    pub fn classify(&self, cover: &Cover, g: &SiteMorphism) -> Result<StabilityCase, SiteError> {
        let d = self.domain(g);
        let all_finite = cover.members.iter().all(|f| !self.domain(f).is_group());
        Ok(match (d.is_group(), all_finite, &cover.codomain) {
            (false, true, _) => StabilityCase::One,
            (true, true, _) => StabilityCase::Two,
            (true, false, RObject::Group) => StabilityCase::Three,
            (true, false, RObject::Finite(c)) => {
                let SiteMorphism::GToFin { value, .. } = g else {
                    return Err(SiteError::Internal(
                        "morphism G -> finite is not of shape GToFin".into(),
                    ));
                };
                let (rep, _) = self.orbit_coordinates(c, *value);
                let (l, _) = self.first_preimage(cover, rep)?;
                if self.domain(&cover.members[l]).is_group() {
                    StabilityCase::FourB
                } else {
                    StabilityCase::FourA
                }
            }
            (false, false, _) => StabilityCase::Five,
        })
    }

    /// Lowest member index with a preimage of `c`, and the least preimage.
    fn first_preimage(&self, cover: &Cover, c: usize) -> Result<(usize, Point), SiteError> {
        cover
            .members
            .iter()
            .enumerate()
            .find_map(|(l, f)| self.least_preimage(f, c).map(|p| (l, p)))
            .ok_or_else(|| {
                SiteError::Internal(format!(
                    "point {c} of the codomain has no preimage in the cover"
                ))
            })
    }

    /// Constructs a cover of `dom g` whose composites with `g` factor
    /// through the given cover, following the case analysis on the shapes
    /// of `D`, `C` and the `C_i`. The certificate is re-verified before it
    /// is returned.
    pub fn stability_refine(
        &self,
        cover: &Cover,
        g: &SiteMorphism,
    ) -> Result<RefinementCertificate, SiteError> {
        if self.codomain(g) != cover.codomain {
            return Err(SiteError::TypeMismatch {
                domain: cover.codomain.to_string(),
                codomain: self.codomain(g).to_string(),
            });
        }
        if self.is_epimorphic_cover(&cover.members)?.is_none() {
            return Err(SiteError::NotEpimorphic("input cover".into()));
        }
        let case = self.classify(cover, g)?;
        let d_obj = self.domain(g);
        let tower = &self.tower;
        let mut outputs = Vec::new();
        let mut factors = Vec::new();

        if d_obj.is_empty_set() && case == StabilityCase::Five {
            // Nothing to cover point by point; the identity of ∅ still factors.
            let target = self.domain(&cover.members[0]);
            outputs.push(self.identity(&d_obj));
            factors.push(Factorization {
                cover_index: 0,
                connecting: self.from_empty(&target),
            });
        } else {
            match case {
                StabilityCase::One => {
                    let SiteMorphism::FinToFin(gm) = g else {
                        return Err(SiteError::Internal("finite domain without FinToFin".into()));
                    };
                    for (i, f) in cover.members.iter().enumerate() {
                        let SiteMorphism::FinToFin(fm) = f else {
                            return Err(SiteError::Internal(
                                "finite cover member without FinToFin".into(),
                            ));
                        };
                        let pb = pullback_finite(gm, fm)?;
                        outputs.push(SiteMorphism::FinToFin(pb.left));
                        factors.push(Factorization {
                            cover_index: i,
                            connecting: SiteMorphism::FinToFin(pb.right),
                        });
                    }
                }
                StabilityCase::Two | StabilityCase::FourA | StabilityCase::FourB => {
                    let (SiteMorphism::GToFin { value, .. }, RObject::Finite(c)) =
                        (g, &cover.codomain)
                    else {
                        return Err(SiteError::Internal("expected g: G -> finite C".into()));
                    };
                    let (rep, delta) = self.orbit_coordinates(c, *value);
                    let (l, pre) = self.first_preimage(cover, rep)?;
                    let lambda = SiteMorphism::GToG(tower.inv_unchecked(&delta));
                    let alpha = match (pre, &cover.members[l]) {
                        (Point::Elem(c_l), SiteMorphism::FinToFin(fm)) => {
                            self.g_to_fin(fm.domain(), c_l)?
                        }
                        (Point::Group(t), SiteMorphism::GToFin { .. }) => {
                            SiteMorphism::GToG(tower.element_from_top(t))
                        }
                        _ => return Err(SiteError::Internal("preimage shape mismatch".into())),
                    };
                    outputs.push(lambda);
                    factors.push(Factorization {
                        cover_index: l,
                        connecting: alpha,
                    });
                }
                StabilityCase::Three => {
                    let SiteMorphism::GToG(g1) = g else {
                        return Err(SiteError::Internal("expected g: G -> G".into()));
                    };
                    let (k, fk1) = cover
                        .members
                        .iter()
                        .enumerate()
                        .find_map(|(k, f)| match f {
                            SiteMorphism::GToG(a) => Some((k, a.clone())),
                            _ => None,
                        })
                        .ok_or_else(|| {
                            SiteError::Internal("cover of G without a translation".into())
                        })?;
                    let shift = tower.mul_unchecked(&fk1, &tower.inv_unchecked(g1));
                    outputs.push(SiteMorphism::GToG(shift));
                    factors.push(Factorization {
                        cover_index: k,
                        connecting: self.identity(&RObject::Group),
                    });
                }
                StabilityCase::Five => {
                    let (SiteMorphism::FinToFin(gm), RObject::Finite(c)) = (g, &cover.codomain)
                    else {
                        return Err(SiteError::Internal("expected g between finite sets".into()));
                    };
                    let dset = gm.domain();
                    for dpt in 0..dset.size() {
                        let (l, pre) = self.first_preimage(cover, gm.apply(dpt))?;
                        match (&cover.members[l], pre) {
                            (SiteMorphism::FinToFin(fm), Point::Elem(_)) => {
                                let pb = pullback_finite(gm, fm)?;
                                outputs.push(SiteMorphism::FinToFin(pb.left));
                                factors.push(Factorization {
                                    cover_index: l,
                                    connecting: SiteMorphism::FinToFin(pb.right),
                                });
                            }
                            (SiteMorphism::GToFin { value: fl1, .. }, Point::Group(t)) => {
                                let c_l = tower.element_from_top(t);
                                let (_, theta) = self.orbit_coordinates(c, *fl1);
                                let theta_inv = tower.inv_unchecked(&theta);
                                let shift =
                                    tower.mul_unchecked(&theta_inv, &tower.inv_unchecked(&c_l));
                                outputs.push(self.g_to_fin(dset, dset.act(&shift, dpt)?)?);
                                factors.push(Factorization {
                                    cover_index: l,
                                    connecting: SiteMorphism::GToG(theta_inv),
                                });
                            }
                            _ => return Err(SiteError::Internal("preimage shape mismatch".into())),
                        }
                    }
                }
            }
        }
        let output = self
            .cover(outputs)
            .map_err(|e| SiteError::Internal(format!("refined family: {e}")))?;
        let cert = RefinementCertificate {
            case,
            input: cover.clone(),
            morphism: g.clone(),
            output,
            factors,
        };
        self.verify_certificate(&cert)?;
        Ok(cert)
    }

    /// Re-checks every commutation `g . h_j = f_i . alpha_j`, both as
    /// morphisms and pointwise, and that `{h_j}` is epimorphic onto `D`.
    pub fn verify_certificate(&self, cert: &RefinementCertificate) -> Result<(), SiteError> {
        let d_obj = self.domain(&cert.morphism);
        if cert.output.members.len() != cert.factors.len() {
            return Err(SiteError::Certificate(
                "one factorization per output member required".into(),
            ));
        }
        for (j, (h, fac)) in cert.output.members.iter().zip(&cert.factors).enumerate() {
            if self.codomain(h) != d_obj {
                return Err(SiteError::Certificate(format!(
                    "member {j} does not land in D"
                )));
            }
            let f = cert.input.members.get(fac.cover_index).ok_or_else(|| {
                SiteError::Certificate(format!("member {j} names a missing cover index"))
            })?;
            let lhs = self.compose(&cert.morphism, h)?;
            let rhs = self
                .compose(f, &fac.connecting)
                .map_err(|e| SiteError::Certificate(format!("member {j}: {e}")))?;
            if lhs != rhs {
                return Err(SiteError::Certificate(format!(
                    "square {j} does not commute"
                )));
            }
            for p in self.points(&self.domain(h)) {
                let a = self.eval(&cert.morphism, self.eval(h, p));
                let b = self.eval(f, self.eval(&fac.connecting, p));
                if a != b {
                    return Err(SiteError::Certificate(format!(
                        "square {j} fails at point {p:?}"
                    )));
                }
            }
        }
        if self.is_epimorphic_cover(&cert.output.members)?.is_none() {
            return Err(SiteError::Certificate(
                "refined family is not epimorphic".into(),
            ));
        }
        Ok(())
    }

    /// `{f_i . g_ij}` for a cover `{f_i}` and one cover `{g_ij}` of each `C_i`.
    pub fn compose_covers(&self, cover: &Cover, subcovers: &[Cover]) -> Result<Cover, SiteError> {
        if subcovers.len() != cover.members.len() {
            return Err(SiteError::SubcoverMismatch(format!(
                "{} members but {} subcovers",
                cover.members.len(),
                subcovers.len()
            )));
        }
        let mut family = Vec::new();
        for (i, (f, sub)) in cover.members.iter().zip(subcovers).enumerate() {
            if sub.codomain != self.domain(f) {
                return Err(SiteError::SubcoverMismatch(format!(
                    "subcover {i} has the wrong codomain"
                )));
            }
            for g in &sub.members {
                family.push(self.compose(f, g)?);
            }
        }
        self.cover(family)
            .map_err(|e| SiteError::Internal(format!("composite of covers: {e}")))
    }

    pub fn sieve(
        &self,
        codomain: RObject,
        generators: Vec<SiteMorphism>,
    ) -> Result<Sieve, SiteError> {
        if generators.iter().any(|t| self.codomain(t) != codomain) {
            return Err(SiteError::HeterogeneousCodomains);
        }
        Ok(Sieve {
            codomain,
            generators,
        })
    }

    pub fn maximal_sieve(&self, c: &RObject) -> Sieve {
        Sieve {
            codomain: c.clone(),
            generators: vec![self.identity(c)],
        }
    }

    /// Whether `f` factors as `t . h` through some generator `t`.
    pub fn sieve_contains(&self, s: &Sieve, f: &SiteMorphism) -> bool {
        if self.codomain(f) != s.codomain {
            return false;
        }
        let dom = self.domain(f);
        s.generators.iter().any(|t| {
            self.hom(&dom, &self.domain(t))
                .iter()
                .any(|h| self.compose(t, h).as_ref() == Ok(f))
        })
    }

    /// Members of `s` with domain `a`, without repetition, in generator
    /// then hom-set order.
    pub fn sieve_members_from(&self, s: &Sieve, a: &RObject) -> Vec<SiteMorphism> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for t in &s.generators {
            for h in self.hom(a, &self.domain(t)) {
                let f = self
                    .compose(t, &h)
                    .expect("hom-set morphisms compose with t");
                if seen.insert(f.clone()) {
                    out.push(f);
                }
            }
        }
        out
    }

    /// A sieve covers iff its generators form an epimorphic family:
    /// precomposition never enlarges images.
    pub fn is_covering_sieve(&self, s: &Sieve) -> bool {
        !s.generators.is_empty() && matches!(self.is_epimorphic_cover(&s.generators), Ok(Some(_)))
    }

    /// Fibre product of `f: A -> C` and `g: B -> C`, computed among all
    /// G-spaces and tested for membership in the category.
    pub fn fiber_product_diagnostic(
        &self,
        f: &SiteMorphism,
        g: &SiteMorphism,
    ) -> Result<FiberProduct, SiteError> {
        let c = self.codomain(f);
        if self.codomain(g) != c {
            return Err(SiteError::HeterogeneousCodomains);
        }
        let (a, b) = (self.domain(f), self.domain(g));
        if a.is_empty_set() || b.is_empty_set() {
            let empty = RObject::Finite(self.empty());
            return Ok(FiberProduct::InSite {
                left: self.from_empty(&a),
                right: self.from_empty(&b),
                apex: empty,
            });
        }
        use SiteMorphism::*;
        match (f, g) {
            (FinToFin(fm), FinToFin(gm)) => {
                let pb = pullback_finite(fm, gm)?;
                Ok(FiberProduct::InSite {
                    apex: RObject::Finite(pb.object),
                    left: FinToFin(pb.left),
                    right: FinToFin(pb.right),
                })
            }
            (GToFin { value, .. }, FinToFin(gm)) => Ok(self.group_over_finite(*value, gm, false)),
            (FinToFin(fm), GToFin { value, .. }) => Ok(self.group_over_finite(*value, fm, true)),
            (
                GToFin {
                    codomain,
                    value: a1,
                },
                GToFin { value: b1, .. },
            ) => {
                let d = self.tower.depth();
                let Some(t) =
                    (0..self.tower.top_order()).find(|&t| codomain.act_at(d, t, *b1) == *a1)
                else {
                    let empty = RObject::Finite(self.empty());
                    return Ok(FiberProduct::InSite {
                        left: self.from_empty(&a),
                        right: self.from_empty(&b),
                        apex: empty,
                    });
                };
                let stabilizer = codomain.stabilizer(*b1);
                let index = stabilizer.index(&self.tower);
                let description = if index == 1 && *a1 == *b1 {
                    "free orbits indexed by G (infinitely many copies of G)".to_string()
                } else {
                    format!(
                        "free orbits indexed by a coset of an open subgroup of index {index} (infinitely many copies of G)"
                    )
                };
                Ok(FiberProduct::NotInSite {
                    free_orbits: FreeOrbits::Coset {
                        rep: self.tower.element_from_top(t),
                        stabilizer,
                    },
                    description,
                })
            }
            (GToG(a1), GToG(b1)) => {
                // (h, h a b^-1) is the unique point over h
                let shift = self.tower.mul_unchecked(a1, &self.tower.inv_unchecked(b1));
                Ok(FiberProduct::InSite {
                    apex: RObject::Group,
                    left: self.identity(&RObject::Group),
                    right: GToG(shift),
                })
            }
            _ => Err(SiteError::Internal(format!(
                "unsupported fibre product shape {f:?}, {g:?}"
            ))),
        }
    }

    /// `G x_C B` for `G -> C` given by `1 -> value` and `m: B -> C`:
    /// the points `(h, y)` with `h . value = m(y)` split into one free orbit
    /// per element of the fibre `m^-1(value)`.
    fn group_over_finite(&self, value: usize, m: &EquivariantMap, swapped: bool) -> FiberProduct {
        let fibre: Vec<usize> = (0..m.domain().size())
            .filter(|&y| m.apply(y) == value)
            .collect();
        match fibre.as_slice() {
            [] => {
                let empty = RObject::Finite(self.empty());
                let (l, r) = (
                    SiteMorphism::VacuousToG,
                    self.from_empty(&RObject::Finite(m.domain().clone())),
                );
                let (left, right) = if swapped { (r, l) } else { (l, r) };
                FiberProduct::InSite {
                    apex: empty,
                    left,
                    right,
                }
            }
            [y0] => {
                let l = self.identity(&RObject::Group);
                let r = SiteMorphism::GToFin {
                    codomain: m.domain().clone(),
                    value: *y0,
                };
                let (left, right) = if swapped { (r, l) } else { (l, r) };
                FiberProduct::InSite {
                    apex: RObject::Group,
                    left,
                    right,
                }
            }
            many => FiberProduct::NotInSite {
                free_orbits: FreeOrbits::Finite(many.len()),
                description: format!("{} free copies of G", many.len()),
            },
        }
    }
}
