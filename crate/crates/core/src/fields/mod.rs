//! Grids, sampled fields and their norms.

pub mod grid;
pub mod io;
pub mod metric;
pub mod norms;
pub mod scalar;

pub use grid::{GridSpec, Region};
pub use metric::{
    metric_inverse, AnalyticMetric, ClosureMetric, MetricField, RadialConformalMetric, RadialProfile, Regularity,
    SymTensorField,
};
pub use norms::{lp_norm, w1p_norm, NormSpec};
pub use scalar::{finite_difference_gradient, ScalarField, ScalarFn};
