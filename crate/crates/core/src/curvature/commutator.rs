use std::sync::Arc;

use serde::Serialize;

use super::decomposition::{point_v_f, scalar_pointwise, scalar_v_f};
use crate::conformal::laplacian::LaplaceOperator;
use crate::error::{Error, Result};
use crate::fields::metric::AnalyticMetric;
use crate::fields::norms::{quadrature_weights, weighted_lp};
use crate::fields::{GridSpec, MetricField, Region, Regularity, ScalarField};
use crate::linalg::MAX_DIM;
use crate::mollify::convolve::{check_dim, kernel_sum, pad_many};
use crate::mollify::{mollify_metric, MollifierKernel};
use crate::rates::{fit_rate, strictly_decreasing, RateFit};
use crate::special::conformal_constant;

/// R[g]∗ρ_ε computed as V^k∗∂_kρ_ε + F∗ρ_ε, so the only derivatives of g
/// ever taken are first derivatives. Off-grid V and F come from the
/// closed-form metric derivatives.
pub fn mollified_scalar(g: &MetricField, kernel: &MollifierKernel, eps: f64) -> Result<ScalarField> {
    let grid = g.grid();
    check_dim(grid, kernel)?;
    let a = g
        .analytic()
        .filter(|a| a.has_gradient())
        .ok_or_else(|| Error::Domain("mollified curvature needs closed-form metric derivatives for padding".into()))?
        .clone();
    let dk = kernel.discrete(eps, grid.spacing())?;
    let dec = scalar_v_f(g)?;
    let n = grid.dim();
    let mut arrays: Vec<&[f64]> = dec.v.iter().map(|v| v.values()).collect();
    arrays.push(dec.f.values());
    let mut fail = None;
    let padded = pad_many(grid, &arrays, dk.reach(), |x, out| match point_v_f(a.as_ref(), x) {
        Ok((v, f)) => {
            out[..n].copy_from_slice(&v[..n]);
            out[n] = f;
        }
        Err(e) => {
            fail.get_or_insert(e);
            out.iter_mut().for_each(|o| *o = 0.0);
        }
    });
    if let Some(e) = fail {
        return Err(e);
    }
    let mut total = kernel_sum(grid, &padded[n], &dk, dk.weights(), None, true);
    for k in 0..n {
        let part = kernel_sum(grid, &padded[k], &dk, dk.derivative_weights(k), None, false);
        for (t, p) in total.iter_mut().zip(&part) {
            *t += p;
        }
    }
    ScalarField::from_values(grid.clone(), total)
}

/// Per-scale norms of R[g]∗ρ_ε − R[g∗ρ_ε].
#[derive(Clone, Debug, Serialize)]
pub struct CommutatorTable {
    pub eps: Vec<f64>,
    pub norms: Vec<f64>,
    /// Present with three or more scales.
    pub fit: Option<RateFit>,
    pub decreasing: bool,
}

impl CommutatorTable {
    fn from_norms(eps: Vec<f64>, norms: Vec<f64>) -> Result<Self> {
        let fit = if eps.len() >= 3 {
            Some(fit_rate(&eps, &norms)?)
        } else {
            None
        };
        let decreasing = strictly_decreasing(&norms);
        Ok(CommutatorTable {
            eps,
            norms,
            fit,
            decreasing,
        })
    }
}

fn commutator_norm_at(g: &MetricField, kernel: &MollifierKernel, eps: f64, p: f64, region: &Region) -> Result<f64> {
    let a = mollified_scalar(g, kernel, eps)?;
    let b = scalar_pointwise(&mollify_metric(g, kernel, eps)?)?;
    let w = quadrature_weights(g.grid(), region, None)?;
    weighted_lp(a.sub(&b)?.values(), &w, 0.5 * p)
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 2.0) {
        return Err(Error::Argument(format!("p = {p} must be at least 2")));
    }
    Ok(())
}

/// ‖R[g]∗ρ_ε − R[g∗ρ_ε]‖_{L^{p/2}(region)} for every ε on the grid of g.
pub fn scalar_commutator_norm(
    g: &MetricField,
    kernel: &MollifierKernel,
    eps_list: &[f64],
    p: f64,
    region: &Region,
) -> Result<CommutatorTable> {
    check_exponent(p)?;
    let norms = eps_list
        .iter()
        .map(|&e| commutator_norm_at(g, kernel, e, p, region))
        .collect::<Result<Vec<_>>>()?;
    CommutatorTable::from_norms(eps_list.to_vec(), norms)
}

/// As [`scalar_commutator_norm`] with a fresh grid per scale at fixed
/// h/ε, covering `region` plus ε + 3h.
pub fn scalar_commutator_study(
    metric: Arc<dyn AnalyticMetric>,
    regularity: Regularity,
    kernel: &MollifierKernel,
    eps_list: &[f64],
    h_over_eps: f64,
    p: f64,
    region: &Region,
) -> Result<CommutatorTable> {
    check_exponent(p)?;
    let mut norms = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let h = eps * h_over_eps;
        let grid = GridSpec::covering(region, eps + 3.0 * h, h)?;
        let g = MetricField::from_analytic(grid, metric.clone(), regularity)?;
        norms.push(commutator_norm_at(&g, kernel, eps, p, region)?);
    }
    CommutatorTable::from_norms(eps_list.to_vec(), norms)
}

/// Scalar curvature of u^{4/(n−2)}g: u^{−(n+2)/(n−2)}(−c_nΔ_g u + R[g]u),
/// with the divergence-form Laplacian (interior nodes; zero on the
/// outermost layer).
pub fn conformal_scalar(g: &MetricField, u: &ScalarField) -> Result<ScalarField> {
    let r = scalar_pointwise(g)?;
    conformal_scalar_with(g, &r, u)
}

/// As [`conformal_scalar`] with R[g] supplied.
pub fn conformal_scalar_with(g: &MetricField, r: &ScalarField, u: &ScalarField) -> Result<ScalarField> {
    let grid = g.grid();
    if u.grid() != grid || r.grid() != grid {
        return Err(Error::Data("fields live on different grids".into()));
    }
    let n = grid.dim();
    if let Some(i) = u.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Domain(format!(
            "conformal factor not positive at node {:?}",
            &grid.multi_index(i)[..n]
        )));
    }
    let cn = conformal_constant(n);
    let expo = -(n as f64 + 2.0) / (n as f64 - 2.0);
    let lap = LaplaceOperator::new(g)?.apply(u.values());
    let mut out = vec![0.0; grid.len()];
    let mut idx_buf = [0usize; MAX_DIM];
    for lin in 0..grid.len() {
        idx_buf[..n].copy_from_slice(&grid.multi_index(lin)[..n]);
        if grid.is_boundary(&idx_buf[..n]) {
            continue;
        }
        let uv = u.values()[lin];
        out[lin] = uv.powf(expo) * (-cn * lap[lin] + r.values()[lin] * uv);
    }
    ScalarField::from_values(grid.clone(), out)
}
