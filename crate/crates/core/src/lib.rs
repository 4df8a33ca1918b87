//! Numerical toolkit for rough Riemannian metrics on Euclidean charts:
//! mollification, distributional scalar curvature, commutator estimates,
//! ADM mass and conformal deformation.

pub mod asymptotics;
pub mod conformal;
pub mod corpus;
pub mod curvature;
pub mod error;
pub mod fields;
pub mod friedrichs;
pub mod linalg;
pub mod mollify;
pub mod rates;
pub mod special;

pub use error::{Error, Result};
pub use fields::{GridSpec, MetricField, NormSpec, Region, Regularity, ScalarField};
pub use linalg::Mat;
pub use mollify::MollifierKernel;
pub use rates::RateFit;
