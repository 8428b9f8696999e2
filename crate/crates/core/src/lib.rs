//! Executable model of the category of finite discrete G-sets extended by
//! a profinite group `G`, over a depth-truncated tower of finite quotients.

pub mod corpus;
pub mod gsets;
#[cfg(test)]
mod laws;
pub mod profinite;
pub mod sheaves;
pub mod site;

pub use gsets::{
    enumerate_equivariant_maps, pullback_finite, DiscreteGSet, EquivariantMap, GSetError, GSetSpec,
};
pub use profinite::{FiniteGroup, GroupElement, OpenSubgroup, Tower, TowerError, TowerSpec};
pub use site::{
    Cover, FiberProduct, Point, RObject, RefinementCertificate, Sieve, Site, SiteError,
    SiteMorphism, StabilityCase,
};
