//! Presheaves of sets on a finite registry of objects, matching families
//! and the equalizer form of the sheaf condition.
//!
//! Every hom-set between registry objects is enumerated once (hom-sets out
//! of `G` truncated at the top tower level) and a presheaf is stored as a
//! section count per object plus one restriction table per morphism.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::gsets::DiscreteGSet;
use crate::profinite::OpenSubgroup;
use crate::site::{Point, RObject, Sieve, Site, SiteError, SiteMorphism};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SheafError {
    #[error(transparent)]
    Site(#[from] SiteError),
    #[error("object {0} is not in the registry")]
    NotInRegistry(String),
    #[error("registry must contain the object G")]
    MissingGroup,
    #[error("sieve generator with domain {0} cannot be saturated inside the registry")]
    Unsaturable(String),
    #[error("sieve is not a covering sieve")]
    NotCovering,
    #[error("section {section} out of range: object has {count} sections")]
    SectionOutOfRange { section: usize, count: usize },
    #[error("presheaf is not functorial: {0}")]
    Functoriality(String),
    #[error("restriction table malformed: {0}")]
    Table(String),
}

/// Finite list of objects with all hom-sets between them.
#[derive(Debug, Clone)]
pub struct Registry {
    site: Site,
    objects: Vec<RObject>,
    homs: Vec<Vec<Vec<SiteMorphism>>>,
    hom_index: Vec<Vec<HashMap<SiteMorphism, usize>>>,
}

impl Registry {
    /// Duplicate objects are dropped; `G` must be present.
    pub fn new(site: Site, objects: Vec<RObject>) -> Result<Self, SheafError> {
        let mut uniq: Vec<RObject> = Vec::new();
        for o in objects {
            if !uniq.contains(&o) {
                uniq.push(o);
            }
        }
        if !uniq.contains(&RObject::Group) {
            return Err(SheafError::MissingGroup);
        }
        let homs: Vec<Vec<Vec<SiteMorphism>>> = uniq
            .iter()
            .map(|a| uniq.iter().map(|b| site.hom(a, b)).collect())
            .collect();
        let hom_index = homs
            .iter()
            .map(|row| {
                row.iter()
                    .map(|ms| {
                        ms.iter()
                            .cloned()
                            .enumerate()
                            .map(|(i, m)| (m, i))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Registry {
            site,
            objects: uniq,
            homs,
            hom_index,
        })
    }

    pub fn site(&self) -> &Site {
        &self.site
    }

    pub fn objects(&self) -> &[RObject] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn index_of(&self, c: &RObject) -> Option<usize> {
        self.objects.iter().position(|o| o == c)
    }

    fn require(&self, c: &RObject) -> Result<usize, SheafError> {
        self.index_of(c)
            .ok_or_else(|| SheafError::NotInRegistry(c.to_string()))
    }

    pub fn hom(&self, a: usize, b: usize) -> &[SiteMorphism] {
        &self.homs[a][b]
    }

    pub fn morphism_index(&self, a: usize, b: usize, f: &SiteMorphism) -> Option<usize> {
        self.hom_index[a][b].get(f).copied()
    }

    /// (domain, codomain, index in the hom-set) of a morphism between
    /// registry objects.
    pub fn locate(&self, f: &SiteMorphism) -> Result<(usize, usize, usize), SheafError> {
        let a = self.require(&self.site.domain(f))?;
        let b = self.require(&self.site.codomain(f))?;
        let m = self
            .morphism_index(a, b, f)
            .ok_or_else(|| SheafError::Table("morphism missing from its hom-set".into()))?;
        Ok((a, b, m))
    }

    fn identity_index(&self, a: usize) -> usize {
        let id = self.site.identity(&self.objects[a]);
        self.hom_index[a][a][&id]
    }
}

/// Presheaf of sets tabulated over a registry. Sections of object `a` are
/// `0..sizes[a]`; `restrictions[a][b][m]` is `P(m): P(b) -> P(a)` for the
/// `m`-th morphism `a -> b`.
#[derive(Debug, Clone)]
pub struct PresheafTable {
    registry: Arc<Registry>,
    sizes: Vec<usize>,
    restrictions: Vec<Vec<Vec<Vec<usize>>>>,
    labels: Option<Vec<Vec<SiteMorphism>>>,
}

impl PresheafTable {
    /// Tabulates `restrict(a, b, m, x)` and checks functoriality.
    pub fn new(
        registry: Arc<Registry>,
        sizes: Vec<usize>,
        restrict: impl FnMut(usize, usize, &SiteMorphism, usize) -> usize,
    ) -> Result<Self, SheafError> {
        let p = Self::tabulate(registry, sizes, restrict)?;
        p.check_functoriality()?;
        Ok(p)
    }

    /// Tabulates without the functoriality check, which is cubic in the
    /// hom-sets. Only for tables functorial by construction.
    fn tabulate(
        registry: Arc<Registry>,
        sizes: Vec<usize>,
        mut restrict: impl FnMut(usize, usize, &SiteMorphism, usize) -> usize,
    ) -> Result<Self, SheafError> {
        let n = registry.len();
        if sizes.len() != n {
            return Err(SheafError::Table(format!(
                "{} section counts for {n} objects",
                sizes.len()
            )));
        }
        let mut restrictions = vec![vec![Vec::new(); n]; n];
        for a in 0..n {
            for b in 0..n {
                for m in registry.hom(a, b) {
                    let row: Vec<usize> = (0..sizes[b]).map(|x| restrict(a, b, m, x)).collect();
                    if let Some(&bad) = row.iter().find(|&&y| y >= sizes[a]) {
                        return Err(SheafError::SectionOutOfRange {
                            section: bad,
                            count: sizes[a],
                        });
                    }
                    restrictions[a][b].push(row);
                }
            }
        }
        Ok(PresheafTable {
            registry,
            sizes,
            restrictions,
            labels: None,
        })
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    pub fn sections(&self, a: usize) -> usize {
        self.sizes[a]
    }

    /// Morphism labels of the sections, for representable presheaves.
    pub fn labels(&self, a: usize) -> Option<&[SiteMorphism]> {
        self.labels.as_ref().map(|l| l[a].as_slice())
    }

    pub fn table(&self, a: usize, b: usize, m: usize) -> &[usize] {
        &self.restrictions[a][b][m]
    }

    /// Identity acts trivially and `P(f . g) = P(g) . P(f)` for every
    /// composable pair in the registry.
    pub fn check_functoriality(&self) -> Result<(), SheafError> {
        let reg = &self.registry;
        let site = reg.site();
        let n = reg.len();
        for a in 0..n {
            let id = reg.identity_index(a);
            if self.restrictions[a][a][id]
                .iter()
                .enumerate()
                .any(|(x, &y)| x != y)
            {
                return Err(SheafError::Functoriality(format!(
                    "identity of object {a} acts nontrivially"
                )));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for (gi, g) in reg.hom(a, b).iter().enumerate() {
                    for c in 0..n {
                        for (fi, f) in reg.hom(b, c).iter().enumerate() {
                            let fg = site.compose(f, g)?;
                            let k = reg.morphism_index(a, c, &fg).ok_or_else(|| {
                                SheafError::Table("composite missing from hom-set".into())
                            })?;
                            let pf = &self.restrictions[b][c][fi];
                            let pg = &self.restrictions[a][b][gi];
                            let pfg = &self.restrictions[a][c][k];
                            if (0..self.sizes[c]).any(|x| pfg[x] != pg[pf[x]]) {
                                return Err(SheafError::Functoriality(format!(
                                    "composite of morphisms {a}->{b}->{c} restricts inconsistently"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `P(f)(section)`.
    pub fn restrict(&self, f: &SiteMorphism, section: usize) -> Result<usize, SheafError> {
        let (a, b, m) = self.registry.locate(f)?;
        if section >= self.sizes[b] {
            return Err(SheafError::SectionOutOfRange {
                section,
                count: self.sizes[b],
            });
        }
        Ok(self.restrictions[a][b][m][section])
    }
}

/// `Hom(-, x)` on the registry, sections labelled by morphisms and
/// restriction given by precomposition.
pub fn representable_presheaf(
    registry: Arc<Registry>,
    x: &RObject,
) -> Result<PresheafTable, SheafError> {
    let site = registry.site().clone();
    let labels: Vec<Vec<SiteMorphism>> =
        registry.objects().iter().map(|a| site.hom(a, x)).collect();
    let index: Vec<HashMap<SiteMorphism, usize>> = labels
        .iter()
        .map(|ms| {
            ms.iter()
                .cloned()
                .enumerate()
                .map(|(i, m)| (m, i))
                .collect()
        })
        .collect();
    let sizes = labels.iter().map(Vec::len).collect();
    // functorial because composition is associative
    let mut p = PresheafTable::tabulate(registry, sizes, |a, b, m, phi| {
        let composite = site
            .compose(&labels[b][phi], m)
            .expect("precomposition is defined");
        index[a][&composite]
    })?;
    p.labels = Some(labels);
    Ok(p)
}

/// Compatible assignments, enumerated exhaustively.
#[derive(Debug, Clone)]
pub struct MatchingFamilies {
    /// Members of the sieve's saturation inside the registry.
    pub members: Vec<SiteMorphism>,
    /// Registry index of each member's domain.
    pub domains: Vec<usize>,
    /// One section per member, per family.
    pub families: Vec<Vec<usize>>,
}

impl MatchingFamilies {
    pub fn count(&self) -> usize {
        self.families.len()
    }
}

/// Nodes carrying a section of a registry object, and functional
/// constraints `value[to] = table[value[from]]`.
struct ConstraintSystem<'a> {
    sizes: Vec<usize>,
    /// per node: (target node, restriction table)
    edges: Vec<Vec<(usize, &'a [usize])>>,
}

impl ConstraintSystem<'_> {
    /// All total assignments satisfying every constraint, by branching on
    /// the first unassigned node and propagating.
    fn solve(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let start = vec![None; self.sizes.len()];
        self.branch(start, &mut out);
        out
    }

    fn branch(&self, state: Vec<Option<usize>>, out: &mut Vec<Vec<usize>>) {
        let Some(i) = state.iter().position(Option::is_none) else {
            out.push(state.into_iter().map(Option::unwrap).collect());
            return;
        };
        for v in 0..self.sizes[i] {
            let mut next = state.clone();
            if self.assign(&mut next, i, v) {
                self.branch(next, out);
            }
        }
    }

    fn assign(&self, state: &mut [Option<usize>], i: usize, v: usize) -> bool {
        state[i] = Some(v);
        let mut stack = vec![i];
        while let Some(u) = stack.pop() {
            let val = state[u].unwrap();
            for &(j, table) in &self.edges[u] {
                let w = table[val];
                match state[j] {
                    None => {
                        state[j] = Some(w);
                        stack.push(j);
                    }
                    Some(existing) if existing != w => return false,
                    Some(_) => {}
                }
            }
        }
        true
    }
}

fn generator_domains(p: &PresheafTable, s: &Sieve) -> Result<Vec<usize>, SheafError> {
    let reg = &p.registry;
    s.generators()
        .iter()
        .map(|t| {
            let d = reg.site().domain(t);
            reg.index_of(&d)
                .ok_or_else(|| SheafError::Unsaturable(d.to_string()))
        })
        .collect()
}

/// Matching families of `p` over the sieve generated by `s`: one section
/// `h^f` of `P(dom f)` per member `f`, with `h^{f.g} = P(g)(h^f)` for every
/// `g` between registry objects. Members are morphisms, so `f . g` and
/// `f' . g'` name the same member whenever the composites agree.
pub fn matching_families(p: &PresheafTable, s: &Sieve) -> Result<MatchingFamilies, SheafError> {
    let reg = &p.registry;
    let site = reg.site();
    let gen_doms = generator_domains(p, s)?;
    let mut members: Vec<SiteMorphism> = Vec::new();
    let mut domains = Vec::new();
    let mut index: HashMap<SiteMorphism, usize> = HashMap::new();
    for a in 0..reg.len() {
        for (t, &k) in s.generators().iter().zip(&gen_doms) {
            for h in reg.hom(a, k) {
                let f = site.compose(t, h)?;
                if !index.contains_key(&f) {
                    index.insert(f.clone(), members.len());
                    members.push(f);
                    domains.push(a);
                }
            }
        }
    }
    let mut edges = vec![Vec::new(); members.len()];
    for (i, f) in members.iter().enumerate() {
        let a = domains[i];
        for a2 in 0..reg.len() {
            for (m, g) in reg.hom(a2, a).iter().enumerate() {
                let fg = site.compose(f, g)?;
                let j = *index.get(&fg).ok_or_else(|| {
                    SheafError::Unsaturable("saturation not closed under precomposition".into())
                })?;
                edges[i].push((j, p.table(a2, a, m)));
            }
        }
    }
    let system = ConstraintSystem {
        sizes: domains.iter().map(|&a| p.sizes[a]).collect(),
        edges,
    };
    let families = system.solve();
    Ok(MatchingFamilies {
        members,
        domains,
        families,
    })
}

/// Counts compatible assignments indexed by pairs `(t, h)` of a generator
/// and a morphism into its domain, without identifying pairs whose
/// composites `t . h` coincide. This is not the equalizer of the sheaf
/// condition; it is kept to show how the two indexings differ.
pub fn pair_indexed_family_count(p: &PresheafTable, s: &Sieve) -> Result<usize, SheafError> {
    let reg = &p.registry;
    let site = reg.site();
    let gen_doms = generator_domains(p, s)?;
    let mut nodes: Vec<(usize, usize, usize)> = Vec::new(); // (generator, domain object, h index)
    let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for (ti, &k) in gen_doms.iter().enumerate() {
        for a in 0..reg.len() {
            for hi in 0..reg.hom(a, k).len() {
                index.insert((ti, a, hi), nodes.len());
                nodes.push((ti, a, hi));
            }
        }
    }
    let mut edges = vec![Vec::new(); nodes.len()];
    for (n, &(ti, a, hi)) in nodes.iter().enumerate() {
        let k = gen_doms[ti];
        let h = &reg.hom(a, k)[hi];
        for a2 in 0..reg.len() {
            for (m, g) in reg.hom(a2, a).iter().enumerate() {
                let hg = site.compose(h, g)?;
                let hgi = reg
                    .morphism_index(a2, k, &hg)
                    .ok_or_else(|| SheafError::Table("composite missing from hom-set".into()))?;
                edges[n].push((index[&(ti, a2, hgi)], p.table(a2, a, m)));
            }
        }
    }
    let system = ConstraintSystem {
        sizes: nodes.iter().map(|&(_, a, _)| p.sizes[a]).collect(),
        edges,
    };
    Ok(system.solve().len())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SheafOutcome {
    Pass,
    /// Two sections with the same restrictions.
    NotInjective {
        first: usize,
        second: usize,
    },
    /// A matching family that is not the restriction of any section.
    Unhit {
        family: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheafCheck {
    pub sections: usize,
    pub families: usize,
    pub outcome: SheafOutcome,
}

impl SheafCheck {
    pub fn passed(&self) -> bool {
        self.outcome == SheafOutcome::Pass
    }
}

/// Whether `P(C) -> {matching families over S}`, `x -> (P(f)(x))_f`, is a
/// bijection.
pub fn sheaf_condition(
    p: &PresheafTable,
    c: &RObject,
    s: &Sieve,
) -> Result<SheafCheck, SheafError> {
    let reg = &p.registry;
    let ci = reg.require(c)?;
    if s.codomain() != c || !reg.site().is_covering_sieve(s) {
        return Err(SheafError::NotCovering);
    }
    let mf = matching_families(p, s)?;
    let locs: Vec<usize> = mf
        .members
        .iter()
        .zip(&mf.domains)
        .map(|(f, &a)| {
            reg.morphism_index(a, ci, f)
                .expect("members lie in the registry hom-sets")
        })
        .collect();
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    for x in 0..p.sizes[ci] {
        let image: Vec<usize> = locs
            .iter()
            .zip(&mf.domains)
            .map(|(&m, &a)| p.table(a, ci, m)[x])
            .collect();
        if let Some(&first) = seen.get(&image) {
            return Ok(SheafCheck {
                sections: p.sizes[ci],
                families: mf.count(),
                outcome: SheafOutcome::NotInjective { first, second: x },
            });
        }
        seen.insert(image, x);
    }
    let outcome = match mf.families.iter().find(|fam| !seen.contains_key(*fam)) {
        Some(family) => SheafOutcome::Unhit {
            family: family.clone(),
        },
        None => SheafOutcome::Pass,
    };
    Ok(SheafCheck {
        sections: p.sizes[ci],
        families: mf.count(),
        outcome,
    })
}

/// The test object `C = coprod G/U_i` with the cover `f_i: G -> C`,
/// `f_i(1) = U_i`, and the sieve it generates.
#[derive(Debug, Clone)]
pub struct CosetCover {
    pub object: DiscreteGSet,
    pub subgroups: Vec<OpenSubgroup>,
    pub sieve: Sieve,
}

pub fn coset_cover(site: &Site, subgroups: &[OpenSubgroup]) -> Result<CosetCover, SheafError> {
    let mut object = site.empty();
    let mut base_points = Vec::new();
    for u in subgroups {
        base_points.push(object.size());
        object = object.coproduct(&DiscreteGSet::coset(site.tower().clone(), u));
    }
    let generators = base_points
        .iter()
        .map(|&v| site.g_to_fin(&object, v))
        .collect::<Result<Vec<_>, _>>()?;
    let sieve = site.sieve(RObject::Finite(object.clone()), generators)?;
    Ok(CosetCover {
        object,
        subgroups: subgroups.to_vec(),
        sieve,
    })
}

#[derive(Debug, Clone)]
pub struct SubcanonicalityWitness {
    pub target: RObject,
    pub test_object: DiscreteGSet,
    pub sieve: Sieve,
    /// `|Hom(C, X)|`.
    pub lhs: usize,
    /// Number of matching families of `Hom(-, X)` over the sieve.
    pub rhs: usize,
    pub check: SheafCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NoWitness {
    #[error("target is a finite G-set with trivial action")]
    TrivialTarget,
    #[error(
        "sheaf condition holds on the test sieve: |Hom(C, X)| = {lhs} = {rhs} matching families"
    )]
    SheafConditionHolds {
        lhs: usize,
        rhs: usize,
        /// Families counted per (generator, precomposite) pair instead.
        pair_indexed: usize,
    },
    #[error(transparent)]
    Sheaf(#[from] SheafError),
}

/// Enumerates both sides of the sheaf condition for `Hom(-, X)` at the
/// test object `C = coprod G/U_i` (default `*`) and its sieve generated by
/// `f_i: G -> C`. Returns a witness when the two sides differ.
pub fn subcanonicality_witness(
    site: &Site,
    target: &RObject,
    subgroups: Option<&[OpenSubgroup]>,
) -> Result<SubcanonicalityWitness, NoWitness> {
    if let RObject::Finite(x) = target {
        if x.is_trivial() {
            return Err(NoWitness::TrivialTarget);
        }
    }
    let default = [site.tower().full_subgroup()];
    let cc = coset_cover(site, subgroups.unwrap_or(&default))?;
    let c = RObject::Finite(cc.object.clone());
    let registry = Arc::new(Registry::new(
        site.clone(),
        vec![RObject::Finite(site.empty()), c.clone(), RObject::Group],
    )?);
    let p = representable_presheaf(registry, target)?;
    let lhs = p.sections(p.registry().index_of(&c).unwrap());
    let rhs = matching_families(&p, &cc.sieve)?.count();
    let check = sheaf_condition(&p, &c, &cc.sieve)?;
    if lhs == rhs {
        return Err(NoWitness::SheafConditionHolds {
            lhs,
            rhs,
            pair_indexed: pair_indexed_family_count(&p, &cc.sieve)?,
        });
    }
    Ok(SubcanonicalityWitness {
        target: target.clone(),
        test_object: cc.object,
        sieve: cc.sieve,
        lhs,
        rhs,
        check,
    })
}

/// `Hom(-, X)` with its values at coset objects identified with fixed
/// points and its value at `G` identified with `X`.
#[derive(Debug, Clone)]
pub struct FixedPointPresheaf {
    pub presheaf: PresheafTable,
    /// (registry index of `G/U`, `U`, `f -> f(U)` as a list of points)
    pub coset_values: Vec<(usize, OpenSubgroup, Vec<usize>)>,
    /// `psi -> psi(1)`.
    pub group_values: Vec<usize>,
}

pub fn fixed_point_presheaf(
    registry: Arc<Registry>,
    x: &DiscreteGSet,
    subgroups: &[OpenSubgroup],
) -> Result<FixedPointPresheaf, SheafError> {
    let site = registry.site().clone();
    let target = RObject::Finite(x.clone());
    let p = representable_presheaf(registry.clone(), &target)?;
    let mut coset_values = Vec::new();
    for u in subgroups {
        let cos = RObject::Finite(DiscreteGSet::coset(site.tower().clone(), u));
        let a = registry.require(&cos)?;
        let values: Vec<usize> = p
            .labels(a)
            .unwrap()
            .iter()
            .map(|f| match site.eval(f, Point::Elem(0)) {
                Point::Elem(v) => v,
                Point::Group(_) => unreachable!("finite codomain"),
            })
            .collect();
        let mut sorted = values.clone();
        sorted.sort_unstable();
        if sorted != x.fixed_points(u) {
            return Err(SheafError::Table(format!(
                "Hom(G/U, X) -> X^U is not a bijection for U at level {}",
                u.level()
            )));
        }
        coset_values.push((a, u.clone(), values));
    }
    let g = registry.require(&RObject::Group)?;
    let group_values: Vec<usize> = p
        .labels(g)
        .unwrap()
        .iter()
        .map(|f| match f {
            SiteMorphism::GToFin { value, .. } => *value,
            _ => unreachable!("maps G -> X are GToFin"),
        })
        .collect();
    if group_values != (0..x.size()).collect::<Vec<_>>() {
        return Err(SheafError::Table(
            "Hom(G, X) -> X is not a bijection".into(),
        ));
    }
    Ok(FixedPointPresheaf {
        presheaf: p,
        coset_values,
        group_values,
    })
}

#[derive(Debug, Clone)]
pub struct EmptyPresheafReport {
    /// (registry index of C, number of generators, result)
    pub checks: Vec<(usize, usize, SheafCheck)>,
}

impl EmptyPresheafReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|(_, _, c)| c.passed())
    }
}

/// Runs the sheaf condition for `Hom(-, ∅)` on every covering sieve the
/// sampler yields for each registry object. The empty set must be in the
/// registry.
pub fn empty_presheaf_check(
    registry: Arc<Registry>,
    mut sampler: impl FnMut(&Registry, usize) -> Vec<Sieve>,
) -> Result<EmptyPresheafReport, SheafError> {
    let empty = RObject::Finite(registry.site().empty());
    registry.require(&empty)?;
    let p = representable_presheaf(registry.clone(), &empty)?;
    let mut checks = Vec::new();
    for c in 0..registry.len() {
        for s in sampler(&registry, c) {
            let n = s.generators().len();
            let check = sheaf_condition(&p, &registry.objects()[c], &s)?;
            checks.push((c, n, check));
        }
    }
    Ok(EmptyPresheafReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profinite::Tower;

    fn setup() -> (Site, Arc<Registry>, DiscreteGSet) {
        let t = Arc::new(Tower::cyclic_p(2, 3).unwrap());
        let site = Site::new(t.clone());
        let u1 = DiscreteGSet::coset(t.clone(), &t.kernel_subgroup(1).unwrap());
        let objs = vec![
            RObject::Finite(site.empty()),
            RObject::Finite(site.point()),
            RObject::Finite(u1.clone()),
            RObject::Group,
        ];
        let reg = Arc::new(Registry::new(site.clone(), objs).unwrap());
        (site, reg, u1)
    }

    #[test]
    fn registry_requires_group() {
        let (site, _, _) = setup();
        assert!(matches!(
            Registry::new(site.clone(), vec![RObject::Finite(site.point())]),
            Err(SheafError::MissingGroup)
        ));
    }

    #[test]
    fn representable_values() {
        let (site, reg, u1) = setup();
        let h_empty = representable_presheaf(reg.clone(), &RObject::Finite(site.empty())).unwrap();
        assert_eq!(h_empty.sections(0), 1);
        assert_eq!((1..4).map(|a| h_empty.sections(a)).sum::<usize>(), 0);
        let h_x = representable_presheaf(reg.clone(), &RObject::Finite(u1)).unwrap();
        assert_eq!(h_x.sections(3), 2);
        let h_g = representable_presheaf(reg.clone(), &RObject::Group).unwrap();
        assert_eq!(h_g.sections(1), 0);
        assert_eq!(h_g.sections(2), 0);
        assert_eq!(h_g.sections(3), 8);
        for h in [&h_empty, &h_x, &h_g] {
            h.check_functoriality().unwrap();
        }
    }

    #[test]
    fn restriction_is_precomposition() {
        let (site, reg, u1) = setup();
        let h_x = representable_presheaf(reg.clone(), &RObject::Finite(u1)).unwrap();
        let g = reg.index_of(&RObject::Group).unwrap();
        for m in reg.hom(g, g) {
            for phi in 0..h_x.sections(g) {
                let got = h_x.restrict(m, phi).unwrap();
                let want = site.compose(&h_x.labels(g).unwrap()[phi], m).unwrap();
                assert_eq!(h_x.labels(g).unwrap()[got], want);
            }
        }
        let id = site.identity(&RObject::Group);
        assert_eq!(h_x.restrict(&id, 1).unwrap(), 1);
        assert!(matches!(
            h_x.restrict(&id, 5),
            Err(SheafError::SectionOutOfRange { .. })
        ));
    }

    #[test]
    fn non_functorial_table_rejected() {
        let (_, reg, _) = setup();
        // two sections everywhere, every non-identity morphism swaps them
        let r = reg.clone();
        let res = PresheafTable::new(reg.clone(), vec![2; reg.len()], move |a, b, m, x| {
            if a == b && *m == r.site().identity(&r.objects()[a]) {
                x
            } else {
                1 - x
            }
        });
        assert!(matches!(res, Err(SheafError::Functoriality(_))));
    }

    #[test]
    fn maximal_sieve_matches_sections() {
        let (site, reg, u1) = setup();
        for x in [
            RObject::Finite(u1.clone()),
            RObject::Group,
            RObject::Finite(site.point()),
        ] {
            let p = representable_presheaf(reg.clone(), &x).unwrap();
            for (c, obj) in reg.objects().iter().enumerate() {
                let s = site.maximal_sieve(obj);
                if !site.is_covering_sieve(&s) {
                    continue;
                }
                let check = sheaf_condition(&p, obj, &s).unwrap();
                assert_eq!(check.families, p.sections(c));
                assert!(check.passed());
            }
        }
    }

    #[test]
    fn point_sieve_counts() {
        let (site, reg, u1) = setup();
        let point = RObject::Finite(site.point());
        let s = site
            .sieve(
                point.clone(),
                vec![site.g_to_fin(&site.point(), 0).unwrap()],
            )
            .unwrap();
        // Hom(-, G/U1): no G-fixed points, and f . r_g = f forces every
        // family value to be G-fixed as well.
        let p = representable_presheaf(reg.clone(), &RObject::Finite(u1)).unwrap();
        let mf = matching_families(&p, &s).unwrap();
        assert_eq!(mf.count(), 0);
        assert_eq!(pair_indexed_family_count(&p, &s).unwrap(), 2);
        assert!(sheaf_condition(&p, &point, &s).unwrap().passed());

        let triv2 = DiscreteGSet::trivial(site.tower().clone(), 2);
        let reg2 = Arc::new(
            Registry::new(
                site.clone(),
                reg.objects()
                    .iter()
                    .cloned()
                    .chain([RObject::Finite(triv2.clone())])
                    .collect(),
            )
            .unwrap(),
        );
        let p = representable_presheaf(reg2, &RObject::Finite(triv2)).unwrap();
        let check = sheaf_condition(&p, &point, &s).unwrap();
        assert_eq!((check.sections, check.families), (2, 2));
        assert!(check.passed());
    }

    #[test]
    fn empty_presheaf_is_sheaf() {
        let (site, reg, _) = setup();
        let report = empty_presheaf_check(reg.clone(), |r, c| {
            let obj = &r.objects()[c];
            let s = site.maximal_sieve(obj);
            if site.is_covering_sieve(&s) {
                vec![s]
            } else {
                Vec::new()
            }
        })
        .unwrap();
        assert_eq!(report.checks.len(), 4);
        assert!(report.all_pass());
        let (_, _, first) = &report.checks[0];
        assert_eq!((first.sections, first.families), (1, 1));
    }

    #[test]
    fn witness_search() {
        let (site, _, u1) = setup();
        assert!(matches!(
            subcanonicality_witness(&site, &RObject::Finite(site.point()), None),
            Err(NoWitness::TrivialTarget)
        ));
        match subcanonicality_witness(&site, &RObject::Finite(u1), None) {
            Err(NoWitness::SheafConditionHolds {
                lhs,
                rhs,
                pair_indexed,
            }) => {
                assert_eq!((lhs, rhs, pair_indexed), (0, 0, 2));
            }
            other => panic!("{other:?}"),
        }
        match subcanonicality_witness(&site, &RObject::Group, None) {
            Err(NoWitness::SheafConditionHolds {
                lhs,
                rhs,
                pair_indexed,
            }) => {
                assert_eq!((lhs, rhs, pair_indexed), (0, 0, 8));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fixed_point_values() {
        let (site, reg, u1) = setup();
        let t = site.tower().clone();
        let fp = fixed_point_presheaf(
            reg.clone(),
            &u1,
            &[t.full_subgroup(), t.kernel_subgroup(1).unwrap()],
        )
        .unwrap();
        assert!(fp.coset_values[0].2.is_empty());
        assert_eq!(fp.coset_values[1].2.len(), 2);
        assert_eq!(fp.group_values, vec![0, 1]);
    }
}
