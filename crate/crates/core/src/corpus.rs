//! Seeded generators for objects, covers, stability instances and sieves.
//! All output is a deterministic function of the site and the seed.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gsets::{enumerate_equivariant_maps, DiscreteGSet};
use crate::profinite::{FiniteGroup, OpenSubgroup, Tower};
use crate::site::{Cover, RObject, Sieve, Site, SiteMorphism, StabilityCase};

/// The three towers the check suites run over by default.
pub fn standard_towers() -> Vec<(&'static str, Arc<Tower>)> {
    let c2 = Tower::cyclic_p(2, 3).expect("2 is prime");
    let c3 = Tower::cyclic_p(3, 2).expect("3 is prime");
    let s3 = Tower::constant(FiniteGroup::symmetric(3), 2).expect("depth 2 is valid");
    let mixed =
        Tower::product(&[s3, Tower::cyclic_p(2, 2).expect("2 is prime")]).expect("equal depths");
    vec![
        ("cyclic-2 depth 3", Arc::new(c2)),
        ("cyclic-3 depth 2", Arc::new(c3)),
        ("S3 x cyclic-2 depth 2", Arc::new(mixed)),
    ]
}

pub struct Corpus {
    site: Site,
    rng: ChaCha8Rng,
    subgroups: Vec<OpenSubgroup>,
}

impl Corpus {
    pub fn new(site: Site, seed: u64) -> Self {
        let t = site.tower().clone();
        let mut subgroups: Vec<OpenSubgroup> = (1..=t.depth())
            .flat_map(|l| t.enumerate_open_subgroups(l).expect("level in range"))
            .collect();
        subgroups.sort();
        subgroups.dedup();
        Corpus {
            site,
            rng: ChaCha8Rng::seed_from_u64(seed),
            subgroups,
        }
    }

    pub fn site(&self) -> &Site {
        &self.site
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Open subgroups at every level, deduplicated by normal form.
    pub fn subgroups(&self) -> &[OpenSubgroup] {
        &self.subgroups
    }

    /// Subgroups of index at most `max_index`.
    pub fn subgroups_up_to(&self, max_index: usize) -> Vec<OpenSubgroup> {
        let t = self.site.tower();
        self.subgroups
            .iter()
            .filter(|u| u.index(t) <= max_index)
            .cloned()
            .collect()
    }

    /// Deterministic pool: `∅`, `*`, the trivial 2-point set, every coset
    /// set of size at most `max_size`, and sums of two of those that fit.
    pub fn object_pool(&self, max_size: usize) -> Vec<DiscreteGSet> {
        let t = self.site.tower().clone();
        let mut pool = vec![self.site.empty(), self.site.point()];
        if max_size >= 2 {
            pool.push(DiscreteGSet::trivial(t.clone(), 2));
        }
        let cosets: Vec<DiscreteGSet> = self
            .subgroups_up_to(max_size)
            .iter()
            .map(|u| DiscreteGSet::coset(t.clone(), u))
            .collect();
        for c in &cosets {
            if !pool.contains(c) {
                pool.push(c.clone());
            }
        }
        for (i, a) in cosets.iter().enumerate() {
            for b in &cosets[i..] {
                if a.size() + b.size() <= max_size && a.size() > 1 {
                    let s = a.coproduct(b);
                    if !pool.contains(&s) {
                        pool.push(s);
                    }
                }
            }
        }
        pool
    }

    /// Sum of randomly chosen coset sets, relabelled by a random
    /// permutation. Size between 1 and `max_size`.
    pub fn random_gset(&mut self, max_size: usize) -> DiscreteGSet {
        let t = self.site.tower().clone();
        let candidates = self.subgroups_up_to(max_size.max(1));
        let target = self.rng.gen_range(1..=max_size.max(1));
        let mut x = self.site.empty();
        loop {
            let fits: Vec<&OpenSubgroup> = candidates
                .iter()
                .filter(|u| x.size() + u.index(&t) <= target)
                .collect();
            let Some(u) = fits.choose(&mut self.rng) else {
                break;
            };
            x = x.coproduct(&DiscreteGSet::coset(t.clone(), u));
            if self.rng.gen_bool(0.3) {
                break;
            }
        }
        let mut perm: Vec<usize> = (0..x.size()).collect();
        perm.shuffle(&mut self.rng);
        x.relabel(&perm)
            .expect("shuffled indices form a permutation")
    }

    fn random_element(&mut self) -> crate::profinite::GroupElement {
        let t = self.site.tower();
        let i = self.rng.gen_range(0..t.top_order());
        t.element_from_top(i)
    }

    /// A random morphism `a -> c`, if the hom-set is nonempty.
    pub fn random_morphism(&mut self, a: &RObject, c: &RObject) -> Option<SiteMorphism> {
        match (a, c) {
            (RObject::Group, RObject::Group) => Some(SiteMorphism::GToG(self.random_element())),
            (RObject::Group, RObject::Finite(y)) if !y.is_empty() => {
                let v = self.rng.gen_range(0..y.size());
                Some(SiteMorphism::GToFin {
                    codomain: y.clone(),
                    value: v,
                })
            }
            _ => self.site.hom(a, c).choose(&mut self.rng).cloned(),
        }
    }

    /// Map `G/Stab(x) -> c` sending the identity coset to `x`.
    fn orbit_map(&self, c: &DiscreteGSet, x: usize) -> SiteMorphism {
        let u = c.stabilizer(x);
        let dom = DiscreteGSet::coset(self.site.tower().clone(), &u);
        let m = enumerate_equivariant_maps(&dom, c)
            .into_iter()
            .find(|m| m.apply(0) == x)
            .expect("identity coset maps to any point fixed by its stabilizer");
        SiteMorphism::FinToFin(m)
    }

    /// Adds members until the family is epimorphic: for each missed point
    /// either `G -> c` or `G/Stab(x) -> c` through it.
    fn complete(&mut self, c: &RObject, mut members: Vec<SiteMorphism>, use_group: bool) -> Cover {
        match c {
            RObject::Group => {
                if !members.iter().any(|f| matches!(f, SiteMorphism::GToG(_))) {
                    let g = SiteMorphism::GToG(self.random_element());
                    let at = self.rng.gen_range(0..=members.len());
                    members.insert(at, g);
                }
            }
            RObject::Finite(x) => {
                if members.is_empty() && x.is_empty() {
                    members.push(self.site.identity(c));
                }
                for p in 0..x.size() {
                    let family_hits = members.iter().any(|f| self.hits(f, p));
                    if !family_hits {
                        let m = if use_group {
                            SiteMorphism::GToFin {
                                codomain: x.clone(),
                                value: p,
                            }
                        } else {
                            self.orbit_map(x, p)
                        };
                        members.push(m);
                    }
                }
            }
        }
        self.site
            .cover(members)
            .expect("completed family is epimorphic")
    }

    fn hits(&self, f: &SiteMorphism, p: usize) -> bool {
        let dom = self.site.domain(f);
        self.site
            .points(&dom)
            .into_iter()
            .any(|q| self.site.eval(f, q) == crate::site::Point::Elem(p))
    }

    /// A random epimorphic cover of `c` with at most `max_members` random
    /// members before completion. `use_group` allows members out of `G`.
    pub fn random_cover(&mut self, c: &RObject, max_members: usize, use_group: bool) -> Cover {
        let n = self.rng.gen_range(0..=max_members);
        let mut members = Vec::new();
        for _ in 0..n {
            let from_group = c.is_group() || (use_group && self.rng.gen_bool(0.5));
            let a = if from_group {
                RObject::Group
            } else {
                RObject::Finite(self.random_gset(4))
            };
            if let Some(f) = self.random_morphism(&a, c) {
                members.push(f);
            }
        }
        if c.is_group() && self.rng.gen_bool(0.2) {
            members.push(SiteMorphism::VacuousToG);
        }
        self.complete(c, members, use_group)
    }

    /// A `(cover, g)` pair whose stability case is `case`. Finite objects
    /// are drawn with size at most `max_size`.
    pub fn stability_instance(
        &mut self,
        case: StabilityCase,
        max_size: usize,
    ) -> (Cover, SiteMorphism) {
        loop {
            if let Some(inst) = self.try_instance(case, max_size) {
                debug_assert_eq!(self.site.classify(&inst.0, &inst.1).ok(), Some(case));
                return inst;
            }
        }
    }

    fn try_instance(
        &mut self,
        case: StabilityCase,
        max_size: usize,
    ) -> Option<(Cover, SiteMorphism)> {
        let group = RObject::Group;
        let inst = match case {
            StabilityCase::One => {
                let c = RObject::Finite(self.random_gset(max_size));
                let d = if self.rng.gen_bool(0.1) {
                    RObject::Finite(self.site.empty())
                } else {
                    RObject::Finite(self.random_gset(max_size))
                };
                let g = self.random_morphism(&d, &c)?;
                (self.random_cover(&c, 3, false), g)
            }
            StabilityCase::Two => {
                let c = RObject::Finite(self.random_gset(max_size));
                let g = self.random_morphism(&group, &c)?;
                (self.random_cover(&c, 3, false), g)
            }
            StabilityCase::Three => {
                let g = self.random_morphism(&group, &group)?;
                (self.random_cover(&group, 3, true), g)
            }
            StabilityCase::FourA => {
                let c = RObject::Finite(self.random_gset(max_size));
                let g = self.random_morphism(&group, &c)?;
                let cover = self.random_cover(&c, 2, true);
                let mut members = vec![self.site.identity(&c)];
                members.append(&mut cover.members().to_vec());
                if !members.iter().any(|f| self.site.domain(f).is_group()) {
                    members.push(self.random_morphism(&group, &c)?);
                }
                (self.site.cover(members).ok()?, g)
            }
            StabilityCase::FourB => {
                let x = self.random_gset(max_size);
                let c = RObject::Finite(x.clone());
                let g = self.random_morphism(&group, &c)?;
                let SiteMorphism::GToFin { value, .. } = &g else {
                    return None;
                };
                let orbit = x.orbit(*value);
                let first = SiteMorphism::GToFin {
                    codomain: x.clone(),
                    value: *orbit.choose(&mut self.rng)?,
                };
                let use_group = self.rng.gen_bool(0.5);
                let rest = self.random_cover(&c, 2, use_group);
                let mut members = vec![first];
                members.extend(rest.members().iter().cloned());
                (self.site.cover(members).ok()?, g)
            }
            StabilityCase::Five => {
                if self.rng.gen_bool(0.15) {
                    let g = self.site.from_empty(&group);
                    (self.random_cover(&group, 3, true), g)
                } else {
                    let c = RObject::Finite(self.random_gset(max_size));
                    let d = RObject::Finite(self.random_gset(max_size));
                    let g = self.random_morphism(&d, &c)?;
                    let mut cover = self.random_cover(&c, 2, true);
                    if !cover
                        .members()
                        .iter()
                        .any(|f| self.site.domain(f).is_group())
                    {
                        let mut members = cover.members().to_vec();
                        members.push(self.random_morphism(&group, &c)?);
                        cover = self.site.cover(members).ok()?;
                    }
                    (cover, g)
                }
            }
        };
        (self.site.classify(&inst.0, &inst.1).ok()? == case).then_some(inst)
    }

    /// Covering sieves on `c` whose generators have domains in `domains`:
    /// the maximal sieve when it covers, then up to `extra` sieves generated
    /// by random epimorphic subfamilies of at most three morphisms.
    pub fn covering_sieves(
        &mut self,
        domains: &[RObject],
        c: &RObject,
        extra: usize,
    ) -> Vec<Sieve> {
        let mut out = Vec::new();
        let max = self.site.maximal_sieve(c);
        if self.site.is_covering_sieve(&max) {
            out.push(max);
        }
        let all: Vec<SiteMorphism> = domains.iter().flat_map(|d| self.site.hom(d, c)).collect();
        if all.is_empty() {
            return out;
        }
        let mut made = 0;
        for _ in 0..extra * 20 {
            if made == extra {
                break;
            }
            let k = self.rng.gen_range(1..=3.min(all.len()));
            let family: Vec<SiteMorphism> =
                all.choose_multiple(&mut self.rng, k).cloned().collect();
            if matches!(self.site.is_epimorphic_cover(&family), Ok(Some(_))) {
                out.push(
                    self.site
                        .sieve(c.clone(), family)
                        .expect("family shares the codomain"),
                );
                made += 1;
            }
        }
        out
    }
}
