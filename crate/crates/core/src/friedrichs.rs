//! Friedrichs-type commutator measurements: ε-weighted derivative decay,
//! (a∗ρ_ε)(f∗ρ_ε) − (af)∗ρ_ε in L^r and W^{1,r}, and nets a_ε ≠ a∗ρ_ε.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::norms::{conjugate_exponent, product_exponent, quadrature_weights, weighted_lp};
use crate::fields::scalar::axis_derivative;
use crate::fields::{Region, ScalarField};
use crate::mollify::{convolve, convolve_derivative, MollifierKernel};
use crate::rates::{fit_rate, strictly_decreasing, RateFit};

/// a ∈ W^{1,p}, f ∈ L^q on a common grid, the scales and the evaluation box.
#[derive(Clone, Debug)]
pub struct CommutatorExperiment {
    pub a: ScalarField,
    pub f: ScalarField,
    pub p: f64,
    pub q: f64,
    pub eps: Vec<f64>,
    pub region: Region,
}

impl CommutatorExperiment {
    pub fn new(a: ScalarField, f: ScalarField, p: f64, q: f64, eps: Vec<f64>, region: Region) -> Result<Self> {
        let e = CommutatorExperiment {
            a,
            f,
            p,
            q,
            eps,
            region,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        self.a.check_same_grid(&self.f)?;
        if !(self.p >= 1.0) {
            return Err(Error::Argument(format!("p = {} must be at least 1", self.p)));
        }
        if !(self.q >= conjugate_exponent(self.p)) {
            return Err(Error::Argument(format!(
                "q = {} is below the conjugate exponent {}",
                self.q,
                conjugate_exponent(self.p)
            )));
        }
        check_scales(&self.eps, self.a.grid().max_spacing())?;
        self.region.check_inside(self.a.grid())
    }

    /// 1/r = 1/p + 1/q.
    pub fn r(&self) -> f64 {
        product_exponent(self.p, self.q)
    }
}

fn check_scales(eps: &[f64], h: f64) -> Result<()> {
    if eps.is_empty() || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Argument(
            "ε-list must be nonempty and strictly decreasing".into(),
        ));
    }
    let min = eps[eps.len() - 1];
    if min < 2.0 * h {
        return Err(Error::Resolution {
            eps: min,
            two_h: 2.0 * h,
        });
    }
    Ok(())
}

/// ε·Σ_j ‖∂_j(f∗ρ_ε)‖_{L^p(region)} per scale with a log-log fit.
pub fn eps_derivative_decay(
    f: &ScalarField,
    kernel: &MollifierKernel,
    p: f64,
    eps_list: &[f64],
    region: &Region,
) -> Result<RateFit> {
    check_scales(eps_list, f.grid().max_spacing())?;
    let w = quadrature_weights(f.grid(), region, None)?;
    let mut values = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut s = 0.0;
        for j in 0..f.grid().dim() {
            s += weighted_lp(convolve_derivative(f, kernel, eps, j)?.values(), &w, p)?;
        }
        values.push(eps * s);
    }
    fit_rate(eps_list, &values)
}

/// a·f with the product of the closed forms as evaluator when both exist.
fn product_field(a: &ScalarField, f: &ScalarField) -> Result<ScalarField> {
    let af = a.zip_map(f, |x, y| x * y)?;
    Ok(match (a.analytic(), f.analytic()) {
        (Some(fa), Some(ff)) => {
            let (fa, ff) = (fa.clone(), ff.clone());
            af.with_analytic(Arc::new(move |x: &[f64]| fa(x) * ff(x)))
        }
        _ => af,
    })
}

/// (a∗ρ_ε)(f∗ρ_ε) − (af)∗ρ_ε.
pub fn product_commutator(a: &ScalarField, f: &ScalarField, kernel: &MollifierKernel, eps: f64) -> Result<ScalarField> {
    a.check_same_grid(f)?;
    let ae = convolve(a, kernel, eps)?;
    let fe = convolve(f, kernel, eps)?;
    let afe = convolve(&product_field(a, f)?, kernel, eps)?;
    let vals = (0..ae.values().len())
        .map(|i| ae.values()[i] * fe.values()[i] - afe.values()[i])
        .collect();
    ScalarField::from_values(a.grid().clone(), vals)
}

/// ‖c‖_{L^r} + Σ_j ‖∂_j c‖_{L^r} on `region`, derivatives by central
/// differences.
pub fn w1r_norm(c: &ScalarField, r: f64, region: &Region) -> Result<f64> {
    let grid = c.grid();
    let w = quadrature_weights(grid, region, None)?;
    let mut total = weighted_lp(c.values(), &w, r)?;
    for j in 0..grid.dim() {
        total += weighted_lp(&axis_derivative(grid, c.values(), j), &w, r)?;
    }
    Ok(total)
}

/// L^r(region) norms of the product commutator per scale.
pub fn product_commutator_rate(exp: &CommutatorExperiment, kernel: &MollifierKernel) -> Result<RateFit> {
    exp.validate()?;
    let w = quadrature_weights(exp.a.grid(), &exp.region, None)?;
    let values = exp
        .eps
        .iter()
        .map(|&e| weighted_lp(product_commutator(&exp.a, &exp.f, kernel, e)?.values(), &w, exp.r()))
        .collect::<Result<Vec<_>>>()?;
    fit_rate(&exp.eps, &values)
}

/// W^{1,r}(region) norms of the product commutator per scale.
pub fn friedrichs_w1r(exp: &CommutatorExperiment, kernel: &MollifierKernel) -> Result<RateFit> {
    exp.validate()?;
    let values = exp
        .eps
        .iter()
        .map(|&e| w1r_norm(&product_commutator(&exp.a, &exp.f, kernel, e)?, exp.r(), &exp.region))
        .collect::<Result<Vec<_>>>()?;
    fit_rate(&exp.eps, &values)
}

/// Strictly decreasing with the last value below a quarter of the first,
/// or identically zero.
pub fn friedrichs_verdict(fit: &RateFit) -> bool {
    if fit.all_zero() {
        return true;
    }
    let v = &fit.values;
    strictly_decreasing(v) && v[v.len() - 1] < 0.25 * v[0]
}

/// Hypothesis check and commutator sequence for a caller-supplied net.
#[derive(Clone, Debug, Serialize)]
pub struct NetReport {
    /// ‖a − a_ε‖_{L^p(region)} per scale.
    pub hypothesis: RateFit,
    /// Constant c_K of the fitted bound ‖a − a_ε‖ ≈ c_K ε^slope.
    pub c_k: f64,
    /// W^{1,r}(region) norms of a_ε(f∗ρ_ε) − (af)∗ρ_ε.
    pub commutator: RateFit,
    pub warning: Option<String>,
}

/// a_ε(f∗ρ_ε) − (af)∗ρ_ε for a net a_ε converging to a at rate ε.
///
/// A hypothesis slope below 0.9 attaches a warning instead of failing.
#[allow(clippy::too_many_arguments)]
pub fn generalized_net_commutator(
    a_net: &[ScalarField],
    a: &ScalarField,
    f: &ScalarField,
    kernel: &MollifierKernel,
    p: f64,
    q: f64,
    eps_list: &[f64],
    region: &Region,
) -> Result<NetReport> {
    if a_net.len() != eps_list.len() {
        return Err(Error::Argument(format!(
            "{} net members for {} scales",
            a_net.len(),
            eps_list.len()
        )));
    }
    let exp = CommutatorExperiment::new(a.clone(), f.clone(), p, q, eps_list.to_vec(), region.clone())?;
    let w = quadrature_weights(a.grid(), region, None)?;
    let af = product_field(a, f)?;
    let mut hyp = Vec::with_capacity(eps_list.len());
    let mut comm = Vec::with_capacity(eps_list.len());
    for (ae, &eps) in a_net.iter().zip(eps_list) {
        ae.check_same_grid(a)?;
        hyp.push(weighted_lp(a.sub(ae)?.values(), &w, p)?);
        let fe = convolve(f, kernel, eps)?;
        let afe = convolve(&af, kernel, eps)?;
        let vals = (0..fe.values().len())
            .map(|i| ae.values()[i] * fe.values()[i] - afe.values()[i])
            .collect();
        comm.push(w1r_norm(
            &ScalarField::from_values(a.grid().clone(), vals)?,
            exp.r(),
            region,
        )?);
    }
    let hypothesis = fit_rate(eps_list, &hyp)?;
    let commutator = fit_rate(eps_list, &comm)?;
    let warning = (!hypothesis.all_zero() && hypothesis.slope < 0.9).then(|| {
        format!(
            "net hypothesis ‖a − a_ε‖ ≤ cε not supported: fitted slope {:.3}",
            hypothesis.slope
        )
    });
    Ok(NetReport {
        c_k: hypothesis.constant(),
        hypothesis,
        commutator,
        warning,
    })
}
