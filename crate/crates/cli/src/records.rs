//! Serializable forms of objects, morphisms and refinement certificates.

use gsite_core::{
    DiscreteGSet, EquivariantMap, GSetSpec, RObject, RefinementCertificate, Site, SiteMorphism,
    StabilityCase,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectRecord {
    Group,
    Finite { gset: GSetSpec },
}

impl ObjectRecord {
    pub fn from_object(c: &RObject) -> Self {
        match c {
            RObject::Group => ObjectRecord::Group,
            RObject::Finite(x) => ObjectRecord::Finite { gset: x.to_spec() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorphismRecord {
    FinToFin {
        domain: GSetSpec,
        codomain: GSetSpec,
        table: Vec<usize>,
    },
    GToFin {
        codomain: GSetSpec,
        value: usize,
    },
    GToG {
        gamma: Vec<usize>,
    },
    VacuousToG,
}

impl MorphismRecord {
    pub fn from_morphism(f: &SiteMorphism) -> Self {
        match f {
            SiteMorphism::FinToFin(m) => MorphismRecord::FinToFin {
                domain: m.domain().to_spec(),
                codomain: m.codomain().to_spec(),
                table: m.table().to_vec(),
            },
            SiteMorphism::GToFin { codomain, value } => MorphismRecord::GToFin {
                codomain: codomain.to_spec(),
                value: *value,
            },
            SiteMorphism::GToG(g) => MorphismRecord::GToG {
                gamma: g.coords().to_vec(),
            },
            SiteMorphism::VacuousToG => MorphismRecord::VacuousToG,
        }
    }

    pub fn to_morphism(&self, site: &Site) -> Result<SiteMorphism, String> {
        let t = site.tower();
        let gset = |s: &GSetSpec| DiscreteGSet::from_spec(t.clone(), s).map_err(|e| e.to_string());
        match self {
            MorphismRecord::FinToFin {
                domain,
                codomain,
                table,
            } => EquivariantMap::new(gset(domain)?, gset(codomain)?, table.clone())
                .map(SiteMorphism::FinToFin)
                .map_err(|e| e.to_string()),
            MorphismRecord::GToFin { codomain, value } => site
                .g_to_fin(&gset(codomain)?, *value)
                .map_err(|e| e.to_string()),
            MorphismRecord::GToG { gamma } => {
                let g = t.element(gamma.clone()).map_err(|e| e.to_string())?;
                site.g_to_g(g).map_err(|e| e.to_string())
            }
            MorphismRecord::VacuousToG => Ok(SiteMorphism::VacuousToG),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorRecord {
    pub cover_index: usize,
    pub connecting: MorphismRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub case: String,
    pub input: Vec<MorphismRecord>,
    pub morphism: MorphismRecord,
    pub output: Vec<MorphismRecord>,
    pub factors: Vec<FactorRecord>,
}

impl CertificateRecord {
    pub fn from_certificate(c: &RefinementCertificate) -> Self {
        let ms = |fs: &[SiteMorphism]| fs.iter().map(MorphismRecord::from_morphism).collect();
        CertificateRecord {
            case: c.case.label().to_string(),
            input: ms(c.input.members()),
            morphism: MorphismRecord::from_morphism(&c.morphism),
            output: ms(c.output.members()),
            factors: c
                .factors
                .iter()
                .map(|f| FactorRecord {
                    cover_index: f.cover_index,
                    connecting: MorphismRecord::from_morphism(&f.connecting),
                })
                .collect(),
        }
    }

    /// Rebuilds the certificate and re-runs the verifier.
    pub fn verify(&self, site: &Site) -> Result<RefinementCertificate, String> {
        let case = StabilityCase::from_label(&self.case)
            .ok_or_else(|| format!("unknown case `{}`", self.case))?;
        let ms = |rs: &[MorphismRecord]| {
            rs.iter()
                .map(|r| r.to_morphism(site))
                .collect::<Result<Vec<_>, _>>()
        };
        let input = site.cover(ms(&self.input)?).map_err(|e| e.to_string())?;
        let output = site.cover(ms(&self.output)?).map_err(|e| e.to_string())?;
        let factors = self
            .factors
            .iter()
            .map(|f| {
                Ok(gsite_core::site::Factorization {
                    cover_index: f.cover_index,
                    connecting: f.connecting.to_morphism(site)?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let cert = RefinementCertificate {
            case,
            input,
            morphism: self.morphism.to_morphism(site)?,
            output,
            factors,
        };
        site.verify_certificate(&cert).map_err(|e| e.to_string())?;
        Ok(cert)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gsite_core::corpus::{standard_towers, Corpus};
    use gsite_core::Tower;
    use std::sync::Arc;

    #[test]
    fn certificates_round_trip() {
        for (_, t) in standard_towers() {
            let mut corpus = Corpus::new(Site::new(t.clone()), 3);
            for case in StabilityCase::ALL {
                let (cover, g) = corpus.stability_instance(case, 5);
                let site = corpus.site().clone();
                let cert = site.stability_refine(&cover, &g).unwrap();
                let rec = CertificateRecord::from_certificate(&cert);
                let json = serde_json::to_string(&rec).unwrap();
                let back: CertificateRecord = serde_json::from_str(&json).unwrap();
                assert_eq!(back.verify(&site).unwrap(), cert);
            }
        }
    }

    #[test]
    fn tampered_record_fails() {
        let t = standard_towers().remove(0).1;
        let mut corpus = Corpus::new(Site::new(t), 5);
        let (cover, g) = corpus.stability_instance(StabilityCase::Three, 5);
        let site = corpus.site().clone();
        let mut rec =
            CertificateRecord::from_certificate(&site.stability_refine(&cover, &g).unwrap());
        let MorphismRecord::GToG { gamma } = &mut rec.factors[0].connecting else {
            panic!("case 3 connects G to G");
        };
        let other = t_other(gamma);
        *gamma = other;
        assert!(rec.verify(&site).is_err());
    }

    fn t_other(gamma: &[usize]) -> Vec<usize> {
        let t = Tower::cyclic_p(2, 3).unwrap();
        let other = t
            .elements()
            .map(|e| e.coords().to_vec())
            .find(|c| c != gamma)
            .unwrap();
        other
    }

    #[test]
    fn object_round_trip() {
        let t = Arc::new(Tower::cyclic_p(2, 3).unwrap());
        let site = Site::new(t.clone());
        let x = RObject::Finite(site.point().coproduct(&DiscreteGSet::trivial(t.clone(), 2)));
        let rec = ObjectRecord::from_object(&x);
        let back: ObjectRecord =
            serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
        let ObjectRecord::Finite { gset } = back else {
            panic!("finite object")
        };
        assert_eq!(
            RObject::Finite(DiscreteGSet::from_spec(t, &gset).unwrap()),
            x
        );
        assert_eq!(
            ObjectRecord::from_object(&RObject::Group),
            ObjectRecord::Group
        );
    }
}
