//! Property tests for the structural invariants of towers, G-sets, the
//! site and presheaves on it.

use std::collections::HashSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;

use crate::corpus::{standard_towers, Corpus};
use crate::gsets::{enumerate_equivariant_maps, DiscreteGSet};
use crate::profinite::Tower;
use crate::sheaves::{
    coset_cover, matching_families, pair_indexed_family_count, representable_presheaf, Registry,
};
use crate::site::{Point, RObject, Site, SiteMorphism, StabilityCase};

fn tower_strategy() -> impl Strategy<Value = Arc<Tower>> {
    (0usize..3).prop_map(|i| standard_towers().swap_remove(i).1)
}

fn case_strategy() -> impl Strategy<Value = StabilityCase> {
    (0usize..6).prop_map(|i| StabilityCase::ALL[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transitions_are_surjective_homomorphisms(p in prop::sample::select(vec![2usize, 3, 5]), depth in 1usize..4) {
        let t = Tower::cyclic_p(p, depth).unwrap();
        for l in 1..depth {
            let (lo, hi) = (t.level(l), t.level(l + 1));
            let image: HashSet<usize> = (0..hi.order()).map(|x| t.project_index(l + 1, l, x)).collect();
            prop_assert_eq!(image.len(), lo.order());
            for a in 0..hi.order() {
                for b in 0..hi.order() {
                    prop_assert_eq!(
                        t.project_index(l + 1, l, hi.mul(a, b)),
                        lo.mul(t.project_index(l + 1, l, a), t.project_index(l + 1, l, b))
                    );
                }
            }
        }
    }

    #[test]
    fn group_axioms_on_elements(t in tower_strategy(), a in 0usize..24, b in 0usize..24, c in 0usize..24) {
        let n = t.top_order();
        let (a, b, c) = (t.element_from_top(a % n), t.element_from_top(b % n), t.element_from_top(c % n));
        let ab_c = t.mul(&t.mul(&a, &b).unwrap(), &c).unwrap();
        let a_bc = t.mul(&a, &t.mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!(t.mul(&a, &t.inv(&a).unwrap()).unwrap(), t.identity());
    }

    #[test]
    fn subgroups_are_closed_and_normal_forms_stable(t in tower_strategy()) {
        for l in 1..=t.depth() {
            let g = t.level(l);
            for u in t.enumerate_open_subgroups(l).unwrap() {
                let local = u.members();
                let set: HashSet<usize> = local.iter().copied().collect();
                prop_assert!(local.iter().all(|&a| local.iter().all(|&b| set.contains(&t.level(u.level()).mul(a, b)))));
                prop_assert!(set.contains(&t.level(u.level()).identity()));
                // lifting to level l and renormalizing is the identity
                let lifted = u.pullback(&t, l);
                prop_assert_eq!(&t.subgroup(l, &lifted).unwrap(), &u);
                prop_assert_eq!(g.order() % lifted.len(), 0);
            }
        }
    }

    #[test]
    fn gsets_are_actions_with_orbit_stabilizer(t in tower_strategy(), seed in any::<u64>()) {
        let mut c = Corpus::new(Site::new(t.clone()), seed);
        let x = c.random_gset(8);
        let d = t.depth();
        let g = t.level(d);
        for a in 0..g.order() {
            for b in 0..g.order() {
                for p in 0..x.size() {
                    prop_assert_eq!(x.act_at(d, g.mul(a, b), p), x.act_at(d, a, x.act_at(d, b, p)));
                }
            }
        }
        for p in 0..x.size() {
            prop_assert_eq!(x.orbit(p).len(), x.stabilizer(p).index(&t));
        }
        prop_assert!(x.orbits().is_bijective());
    }

    #[test]
    fn composition_is_associative_and_pointwise(t in tower_strategy(), seed in any::<u64>()) {
        let mut c = Corpus::new(Site::new(t), seed);
        let site = c.site().clone();
        let mut objects: Vec<RObject> = c.object_pool(4).into_iter().map(RObject::Finite).collect();
        objects.push(RObject::Group);
        for _ in 0..20 {
            let pick: Vec<RObject> = (0..4).map(|_| objects.choose(c.rng()).unwrap().clone()).collect();
            let (Some(h), Some(g), Some(f)) = (
                c.random_morphism(&pick[0], &pick[1]),
                c.random_morphism(&pick[1], &pick[2]),
                c.random_morphism(&pick[2], &pick[3]),
            ) else { continue };
            let fg = site.compose(&f, &g).unwrap();
            prop_assert_eq!(site.compose(&fg, &h).unwrap(), site.compose(&f, &site.compose(&g, &h).unwrap()).unwrap());
            for p in site.points(&pick[1]) {
                prop_assert_eq!(site.eval(&fg, p), site.eval(&f, site.eval(&g, p)));
            }
            prop_assert_eq!(&site.compose(&site.identity(&pick[2]), &g).unwrap(), &g);
            prop_assert_eq!(&site.compose(&g, &site.identity(&pick[1])).unwrap(), &g);
        }
    }

    #[test]
    fn sieves_are_closed_under_precomposition(t in tower_strategy(), seed in any::<u64>()) {
        let mut c = Corpus::new(Site::new(t), seed);
        let site = c.site().clone();
        let target = if seed % 4 == 0 { RObject::Group } else { RObject::Finite(c.random_gset(4)) };
        let cover = c.random_cover(&target, 2, seed % 2 == 0);
        let s = site.sieve(target.clone(), cover.members().to_vec()).unwrap();
        let mut objects: Vec<RObject> = c.object_pool(4).into_iter().map(RObject::Finite).collect();
        objects.push(RObject::Group);
        for a in &objects {
            for f in site.sieve_members_from(&s, a) {
                prop_assert!(site.sieve_contains(&s, &f));
                for b in &objects {
                    for g in site.hom(b, a).into_iter().take(6) {
                        prop_assert!(site.sieve_contains(&s, &site.compose(&f, &g).unwrap()));
                    }
                }
            }
        }
    }

    #[test]
    fn covers_plus_anything_generate_covering_sieves(t in tower_strategy(), seed in any::<u64>()) {
        let mut c = Corpus::new(Site::new(t), seed);
        let site = c.site().clone();
        let x = RObject::Finite(c.random_gset(5));
        let cover = c.random_cover(&x, 2, seed % 2 == 1);
        let mut gens = cover.members().to_vec();
        for _ in 0..2 {
            let a = RObject::Finite(c.random_gset(4));
            if let Some(f) = c.random_morphism(&a, &x) {
                gens.push(f);
            }
        }
        let s = site.sieve(x, gens).unwrap();
        prop_assert!(site.is_covering_sieve(&s));
    }

    #[test]
    fn stability_certificates_verify(t in tower_strategy(), case in case_strategy(), seed in any::<u64>()) {
        let mut c = Corpus::new(Site::new(t), seed);
        let (cover, g) = c.stability_instance(case, 6);
        let site = c.site().clone();
        let cert = site.stability_refine(&cover, &g).unwrap();
        prop_assert_eq!(cert.case, case);
        prop_assert!(site.verify_certificate(&cert).is_ok());
        prop_assert!(matches!(site.is_epimorphic_cover(cert.output.members()), Ok(Some(_))));
        for (h, fac) in cert.output.members().iter().zip(&cert.factors) {
            let lhs = site.compose(&g, h).unwrap();
            let rhs = site.compose(&cover.members()[fac.cover_index], &fac.connecting).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn groupoid_families_cover(t in tower_strategy(), mask in 1u32..(1 << 12)) {
        let site = Site::new(t);
        let homs = site.hom(&RObject::Group, &RObject::Group);
        let mut fam: Vec<SiteMorphism> = homs.iter().enumerate().filter(|(i, _)| mask >> (i % 12) & 1 == 1).map(|(_, f)| f.clone()).collect();
        fam.truncate(6);
        if fam.is_empty() {
            fam.push(homs[0].clone());
        }
        if mask & 1 == 1 {
            fam.push(SiteMorphism::VacuousToG);
        }
        prop_assert!(matches!(site.is_epimorphic_cover(&fam), Ok(Some(_))));
        prop_assert!(matches!(site.is_epimorphic_cover(&[SiteMorphism::VacuousToG]), Ok(None)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Matching families for `Hom(-, X)` over the sieve generated by
    /// `f_i: G -> coprod G/U_i` are the maps `C -> X`; counting them per
    /// generator/precomposite pair instead gives `|X|^n`.
    #[test]
    fn coset_cover_family_counts(seed in any::<u64>(), n in 1usize..4) {
        let t = standard_towers().swap_remove(0).1;
        let site = Site::new(t.clone());
        let mut c = Corpus::new(site.clone(), seed);
        let subs = c.subgroups_up_to(4);
        let chosen: Vec<_> = (0..n).map(|_| subs.choose(c.rng()).unwrap().clone()).collect();
        let cc = coset_cover(&site, &chosen).unwrap();
        let x = c.random_gset(4);
        let cobj = RObject::Finite(cc.object.clone());
        let registry = Arc::new(Registry::new(site.clone(), vec![RObject::Finite(site.empty()), cobj.clone(), RObject::Group]).unwrap());
        let p = representable_presheaf(registry, &RObject::Finite(x.clone())).unwrap();
        let families = matching_families(&p, &cc.sieve).unwrap().count();
        let homs = enumerate_equivariant_maps(&cc.object, &x).len();
        let fixed: usize = chosen.iter().map(|u| x.fixed_points(u).len()).product();
        prop_assert_eq!(families, homs);
        prop_assert_eq!(homs, fixed);
        prop_assert_eq!(pair_indexed_family_count(&p, &cc.sieve).unwrap(), x.size().pow(n as u32));
    }

    #[test]
    fn eval_of_g_to_fin_is_the_action(t in tower_strategy(), seed in any::<u64>()) {
        let mut c = Corpus::new(Site::new(t.clone()), seed);
        let x: DiscreteGSet = c.random_gset(6);
        let site = c.site().clone();
        for v in 0..x.size() {
            let f = site.g_to_fin(&x, v).unwrap();
            for i in 0..t.top_order() {
                let gamma = t.element_from_top(i);
                prop_assert_eq!(site.eval(&f, Point::Group(i)), Point::Elem(x.act(&gamma, v).unwrap()));
            }
        }
    }
}
