//! ADM mass on coordinate spheres with tail extrapolation, and Sobolev
//! quotients for comparing a metric with its smoothing.

pub mod mass;
pub mod quadrature;
pub mod sobolev;

pub use mass::{adm_integrand, adm_mass, extrapolate, mass_at_radius, AsymptoticModel, MassEstimate};
pub use quadrature::SphereQuadrature;
pub use sobolev::{
    bump_battery, existence_condition, sobolev_quotient, sobolev_sandwich_check, ExistenceCheck, SandwichReport,
};
