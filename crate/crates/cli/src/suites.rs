//! Check suites. Each suite draws its instances from a corpus seeded by
//! `seed` and a per-suite salt, so selecting one suite reproduces exactly
//! the records it contributes to a full run.

use std::sync::Arc;

use gsite_core::corpus::Corpus;
use gsite_core::sheaves::{
    empty_presheaf_check, representable_presheaf, sheaf_condition, subcanonicality_witness,
    NoWitness, Registry, SheafOutcome,
};
use gsite_core::site::FiberProduct;
use gsite_core::{
    enumerate_equivariant_maps, DiscreteGSet, RObject, Site, SiteMorphism, StabilityCase,
};
use serde_json::{json, Value};

use crate::records::{CertificateRecord, MorphismRecord};
use crate::report::{CheckRecord, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Pretopology,
    Stability,
    Sheaf,
    Witness,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Pretopology => "pretopology",
            Suite::Stability => "stability",
            Suite::Sheaf => "sheaf",
            Suite::Witness => "witness",
            Suite::All => "all",
        }
    }
}

pub struct SuiteContext {
    pub site: Site,
    pub seed: u64,
    pub objects: Vec<(String, RObject)>,
    pub self_test: bool,
    /// Stability instances per case.
    pub per_case: usize,
}

pub fn run(ctx: &SuiteContext, suite: Suite) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Pretopology | Suite::All) {
        out.extend(pretopology(ctx));
    }
    if matches!(suite, Suite::Stability | Suite::All) {
        out.extend(stability(ctx));
    }
    if matches!(suite, Suite::Sheaf | Suite::All) {
        out.extend(sheaf(ctx));
    }
    if matches!(suite, Suite::Witness | Suite::All) {
        out.extend(witness(ctx));
    }
    out
}

fn record(suite: &str, name: &str, anchor: &str, ok: bool, payload: Value) -> CheckRecord {
    CheckRecord {
        suite: suite.into(),
        name: name.into(),
        anchor: anchor.into(),
        status: Status::from_bool(ok),
        payload,
    }
}

fn corpus(ctx: &SuiteContext, salt: u64) -> Corpus {
    Corpus::new(
        ctx.site.clone(),
        ctx.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt,
    )
}

/// Pool objects of size at most `max_size`, plus `G`.
fn objects_with_group(c: &Corpus, max_size: usize) -> Vec<RObject> {
    let mut v: Vec<RObject> = c
        .object_pool(max_size)
        .into_iter()
        .map(RObject::Finite)
        .collect();
    v.push(RObject::Group);
    v
}

fn pretopology(ctx: &SuiteContext) -> Vec<CheckRecord> {
    const S: &str = "pretopology";
    let site = &ctx.site;
    let mut c = corpus(ctx, 1);
    let objects = objects_with_group(&c, 4);
    let mut out = Vec::new();

    // identity and associativity on random composable triples
    let mut checked = 0;
    let mut failures = Vec::new();
    for _ in 0..400 {
        let pick = |c: &mut Corpus| {
            use rand::seq::SliceRandom;
            objects.choose(c.rng()).expect("pool is nonempty").clone()
        };
        let (a, b, d, e) = (pick(&mut c), pick(&mut c), pick(&mut c), pick(&mut c));
        let (Some(h), Some(g), Some(f)) = (
            c.random_morphism(&a, &b),
            c.random_morphism(&b, &d),
            c.random_morphism(&d, &e),
        ) else {
            continue;
        };
        checked += 1;
        let left = site.compose(&site.compose(&f, &g).unwrap(), &h).unwrap();
        let right = site.compose(&f, &site.compose(&g, &h).unwrap()).unwrap();
        let unit = site.compose(&site.identity(&d), &g).unwrap() == g
            && site.compose(&g, &site.identity(&b)).unwrap() == g;
        if left != right || !unit {
            failures.push(json!({"f": MorphismRecord::from_morphism(&f), "g": MorphismRecord::from_morphism(&g)}));
        }
    }
    out.push(record(
        S,
        "category laws",
        "identity and associativity of composition",
        failures.is_empty() && checked > 0,
        json!({"triples": checked, "failures": failures.into_iter().take(3).collect::<Vec<_>>()}),
    ));

    // isomorphisms are covers
    let mut isos = 0;
    let mut bad = Vec::new();
    for o in &objects {
        let autos: Vec<SiteMorphism> = site
            .hom(o, o)
            .into_iter()
            .filter(|f| match f {
                SiteMorphism::FinToFin(m) => m.is_bijective(),
                _ => true,
            })
            .collect();
        for f in autos {
            isos += 1;
            if !matches!(
                site.is_epimorphic_cover(std::slice::from_ref(&f)),
                Ok(Some(_))
            ) {
                bad.push(MorphismRecord::from_morphism(&f));
            }
        }
    }
    out.push(record(
        S,
        "isomorphism axiom",
        "every isomorphism is a one-member cover",
        bad.is_empty(),
        json!({"isomorphisms": isos, "failures": bad.into_iter().take(3).collect::<Vec<_>>()}),
    ));

    // transitivity
    let mut composed = 0;
    let mut errors = Vec::new();
    for i in 0..60 {
        let target = if i % 5 == 0 {
            RObject::Group
        } else {
            RObject::Finite(c.random_gset(6))
        };
        let use_group = i % 2 == 0;
        let cover = c.random_cover(&target, 3, use_group);
        let subs: Vec<_> = cover
            .members()
            .iter()
            .map(|f| {
                let dom = site.domain(f);
                c.random_cover(&dom, 2, use_group)
            })
            .collect();
        composed += 1;
        if let Err(e) = site.compose_covers(&cover, &subs) {
            errors.push(e.to_string());
        }
    }
    out.push(record(
        S,
        "transitivity axiom",
        "covers of the members of a cover compose to a cover",
        errors.is_empty(),
        json!({"instances": composed, "errors": errors.into_iter().take(3).collect::<Vec<_>>()}),
    ));

    // groupoid restriction
    let hom_gg = site.hom(&RObject::Group, &RObject::Group);
    let n = hom_gg.len();
    let mut families = 0;
    let mut ok = true;
    for mask in 1u64..(1u64 << n.min(10)) {
        let fam: Vec<SiteMorphism> = (0..n.min(10))
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| hom_gg[i].clone())
            .collect();
        families += 1;
        ok &= matches!(site.is_epimorphic_cover(&fam), Ok(Some(_)));
    }
    let mut saturated = 0;
    for f in &hom_gg {
        let s = site.sieve(RObject::Group, vec![f.clone()]).unwrap();
        let members = site.sieve_members_from(&s, &RObject::Group);
        if members.len() == n {
            saturated += 1;
        }
    }
    out.push(record(
        S,
        "groupoid atomic topology",
        "on G alone every nonempty family of translations covers",
        ok && saturated == n,
        json!({"families": families, "translations": n, "saturating_singletons": saturated}),
    ));
    out
}

fn stability(ctx: &SuiteContext) -> Vec<CheckRecord> {
    const S: &str = "stability";
    let site = &ctx.site;
    let mut c = corpus(ctx, 2);
    let mut out = Vec::new();
    let mut sample_cert = None;
    for case in StabilityCase::ALL {
        let mut errors = Vec::new();
        for _ in 0..ctx.per_case {
            let (cover, g) = c.stability_instance(case, 6);
            let result = site.stability_refine(&cover, &g).and_then(|cert| {
                if cert.case != case {
                    return Err(gsite_core::SiteError::Certificate(format!(
                        "classified as {}",
                        cert.case
                    )));
                }
                site.verify_certificate(&cert)?;
                Ok(cert)
            });
            match result {
                Ok(cert) => {
                    if case == StabilityCase::Three && sample_cert.is_none() {
                        sample_cert = Some(cert);
                    }
                }
                Err(e) => errors.push(e.to_string()),
            }
        }
        out.push(record(
            S,
            &format!("case {}", case.label()),
            "stability axiom: pulled-back cover factors through the original",
            errors.is_empty(),
            json!({"instances": ctx.per_case, "errors": errors.into_iter().take(3).collect::<Vec<_>>()}),
        ));
    }
    if ctx.self_test {
        // negative control: perturb a connecting map so the square no longer commutes
        let cert = sample_cert.expect("case 3 instances were generated");
        let mut rec = CertificateRecord::from_certificate(&cert);
        let t = site.tower();
        if let MorphismRecord::GToG { gamma } = &mut rec.factors[0].connecting {
            let other = t
                .elements()
                .find(|e| e.coords() != gamma.as_slice())
                .expect("tower has two elements");
            *gamma = other.coords().to_vec();
        }
        let verdict = rec.verify(site);
        out.push(record(
            S,
            "self-test injected certificate",
            "stability axiom: pulled-back cover factors through the original",
            verdict.is_ok(),
            json!({"certificate": rec, "verifier": verdict.err()}),
        ));
    }
    out
}

fn sheaf(ctx: &SuiteContext) -> Vec<CheckRecord> {
    const S: &str = "sheaf";
    let site = &ctx.site;
    let t = site.tower().clone();
    let mut c = corpus(ctx, 3);
    let mut out = Vec::new();

    // orbit decomposition
    let mut failures = 0;
    let n_sets = 60;
    for _ in 0..n_sets {
        let x = c.random_gset(8);
        let dec = x.orbits();
        let reps_ok = dec
            .orbits
            .iter()
            .all(|o| x.stabilizer(o.representative) == o.stabilizer);
        if !(dec.is_bijective() && reps_ok) {
            failures += 1;
        }
    }
    out.push(record(
        S,
        "orbit decomposition",
        "a finite discrete G-set is the sum of coset sets of its stabilizers",
        failures == 0,
        json!({"gsets": n_sets, "failures": failures}),
    ));

    // fixed-point counting
    let pool = c.object_pool(6);
    let subgroups = c.subgroups_up_to(8);
    let mut pairs = 0;
    let mut mismatches = Vec::new();
    for x in &pool {
        for u in &subgroups {
            pairs += 1;
            let cos = DiscreteGSet::coset(t.clone(), u);
            let homs = enumerate_equivariant_maps(&cos, x).len();
            let fixed = x.fixed_points(u).len();
            if homs != fixed {
                mismatches.push(
                    json!({"size": x.size(), "index": u.index(&t), "homs": homs, "fixed": fixed}),
                );
            }
        }
    }
    out.push(record(
        S,
        "fixed-point counting",
        "maps out of G/U correspond to U-fixed points",
        mismatches.is_empty(),
        json!({"pairs": pairs, "mismatches": mismatches}),
    ));

    // homs into and out of G
    let mut into_g = 0;
    let mut out_of_g = 0;
    for x in &pool {
        let fx = RObject::Finite(x.clone());
        if !x.is_empty() && !site.hom(&fx, &RObject::Group).is_empty() {
            into_g += 1;
        }
        if site.hom(&RObject::Group, &fx).len() != x.size() {
            out_of_g += 1;
        }
    }
    out.push(record(
        S,
        "maps involving G",
        "no map from a nonempty finite set to G; maps G -> X are determined by the image of 1",
        into_g == 0 && out_of_g == 0,
        json!({"objects": pool.len(), "nonempty_hom_into_g": into_g, "hom_out_of_g_mismatch": out_of_g}),
    ));

    // empty presheaf
    let registry = sheaf_registry(site);
    let report = empty_presheaf_check(registry.clone(), |r, i| {
        c.covering_sieves(r.objects(), &r.objects()[i], 3)
    });
    let payload = match &report {
        Ok(rep) => json!({
            "sieves": rep.checks.len(),
            "failures": rep.checks.iter().filter(|(_, _, ch)| !ch.passed()).count(),
        }),
        Err(e) => json!({"error": e.to_string()}),
    };
    out.push(record(
        S,
        "empty presheaf",
        "Hom(-, empty) is a sheaf",
        report.map(|r| r.all_pass()).unwrap_or(false),
        payload,
    ));

    // representables against maximal sieves
    let mut targets: Vec<RObject> = registry.objects().to_vec();
    targets.extend(ctx.objects.iter().map(|(_, o)| o.clone()));
    let mut runs = 0;
    let mut errors = Vec::new();
    for x in &targets {
        let p = match representable_presheaf(registry.clone(), x) {
            Ok(p) => p,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        for (i, obj) in registry.objects().iter().enumerate() {
            let s = site.maximal_sieve(obj);
            if !site.is_covering_sieve(&s) {
                continue;
            }
            runs += 1;
            match sheaf_condition(&p, obj, &s) {
                Ok(ch) if ch.passed() && ch.families == p.sections(i) => {}
                Ok(ch) => errors.push(format!("{x} at {obj}: {:?}", ch.outcome)),
                Err(e) => errors.push(e.to_string()),
            }
        }
    }
    out.push(record(
        S,
        "representables on maximal sieves",
        "matching families on a maximal sieve are the sections",
        errors.is_empty(),
        json!({"checks": runs, "errors": errors.into_iter().take(3).collect::<Vec<_>>()}),
    ));

    // the two pullbacks that leave the category
    let to_point = site.g_to_fin(&site.point(), 0).unwrap();
    let e1 = site.fiber_product_diagnostic(&to_point, &to_point);
    // C trivial with two points, g: G -> C and the constant map C -> C at g(1)
    let triv2 = DiscreteGSet::trivial(t.clone(), 2);
    let g = site.g_to_fin(&triv2, 0).unwrap();
    let constant = SiteMorphism::FinToFin(
        gsite_core::EquivariantMap::new(triv2.clone(), triv2, vec![0, 0])
            .expect("maps between trivial sets are equivariant"),
    );
    let e2 = site.fiber_product_diagnostic(&g, &constant);
    let not_in_site = |r: &Result<FiberProduct, _>| matches!(r, Ok(FiberProduct::NotInSite { .. }));
    let describe = |r: &Result<FiberProduct, gsite_core::SiteError>| match r {
        Ok(FiberProduct::NotInSite { description, .. }) => description.clone(),
        Ok(FiberProduct::InSite { apex, .. }) => format!("in site: {apex}"),
        Err(e) => e.to_string(),
    };
    out.push(record(
        S,
        "pullbacks leaving the category",
        "G x_* G and G x_C C for trivial C are not objects",
        not_in_site(&e1) && not_in_site(&e2),
        json!({"g_over_point": describe(&e1), "g_over_trivial_set": describe(&e2)}),
    ));
    out
}

/// `∅`, four nonempty finite objects and `G`.
pub fn sheaf_registry(site: &Site) -> Arc<Registry> {
    let t = site.tower();
    let quot1 = DiscreteGSet::coset(t.clone(), &t.kernel_subgroup(1).expect("depth >= 1"));
    let objs = vec![
        RObject::Finite(site.empty()),
        RObject::Finite(site.point()),
        RObject::Finite(DiscreteGSet::trivial(t.clone(), 2)),
        RObject::Finite(quot1.clone()),
        RObject::Finite(quot1.coproduct(&site.point())),
        RObject::Group,
    ];
    Arc::new(Registry::new(site.clone(), objs).expect("G is present"))
}

/// Default targets of the non-sheaf check.
pub fn witness_targets(site: &Site) -> Vec<(String, RObject)> {
    let t = site.tower();
    let quot1 = DiscreteGSet::coset(t.clone(), &t.kernel_subgroup(1).expect("depth >= 1"));
    vec![
        ("quot(1)".into(), RObject::Finite(quot1.clone())),
        (
            "quot(1) + *".into(),
            RObject::Finite(quot1.coproduct(&site.point())),
        ),
        ("G".into(), RObject::Group),
    ]
}

pub fn witness_payload(
    target: &str,
    result: &Result<gsite_core::sheaves::SubcanonicalityWitness, NoWitness>,
) -> Value {
    match result {
        Ok(w) => {
            let outcome = match &w.check.outcome {
                SheafOutcome::Pass => json!("pass"),
                SheafOutcome::NotInjective { first, second } => {
                    json!({"not_injective": [first, second]})
                }
                SheafOutcome::Unhit { family } => json!({"unhit": family}),
            };
            json!({
                "target": target,
                "test_object": crate::records::ObjectRecord::from_object(&RObject::Finite(w.test_object.clone())),
                "generators": w.sieve.generators().iter().map(MorphismRecord::from_morphism).collect::<Vec<_>>(),
                "lhs": w.lhs,
                "rhs": w.rhs,
                "sheaf_condition": outcome,
            })
        }
        Err(NoWitness::SheafConditionHolds {
            lhs,
            rhs,
            pair_indexed,
        }) => json!({
            "target": target,
            "no_witness": "sheaf condition holds on the test sieve",
            "lhs": lhs,
            "rhs": rhs,
            "pair_indexed_families": pair_indexed,
        }),
        Err(e) => json!({"target": target, "no_witness": e.to_string()}),
    }
}

fn witness(ctx: &SuiteContext) -> Vec<CheckRecord> {
    let mut targets = witness_targets(&ctx.site);
    targets.extend(ctx.objects.iter().cloned());
    targets
        .into_iter()
        .map(|(name, x)| {
            let result = subcanonicality_witness(&ctx.site, &x, None);
            let status = match &result {
                Ok(_) => Status::Pass,
                Err(NoWitness::TrivialTarget) => Status::Skip,
                Err(_) => Status::Fail,
            };
            CheckRecord {
                suite: "witness".into(),
                name: format!("representable {name}"),
                anchor: "Hom(-, X) fails the sheaf condition for nontrivial X".into(),
                status,
                payload: witness_payload(&name, &result),
            }
        })
        .collect()
}
