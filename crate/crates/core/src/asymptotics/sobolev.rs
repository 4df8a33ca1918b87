use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::norms::{quadrature_weights, sobolev_exponent, weighted_lp};
use crate::fields::scalar::finite_difference_gradient;
use crate::fields::{GridSpec, MetricField, Region, ScalarField};
use crate::mollify::EquivalenceFactor;
use crate::special::{halton, HALTON_BASES};

/// Q_g(φ) = ‖φ‖²_{L^{n*}(g)} / ‖∇_g φ‖²_{L²(g)}, n* = 2n/(n−2).
pub fn sobolev_quotient(phi: &ScalarField, g: &MetricField) -> Result<f64> {
    let grid = g.grid();
    if phi.grid() != grid {
        return Err(Error::Data("function and metric live on different grids".into()));
    }
    let n = grid.dim();
    if n < 3 {
        return Err(Error::Argument("the Sobolev quotient needs n ≥ 3".into()));
    }
    let mut touching = false;
    grid.for_each_node(|lin, idx, _| touching |= grid.is_boundary(idx) && phi.values()[lin] != 0.0);
    if touching {
        return Err(Error::Domain("test function support reaches the grid boundary".into()));
    }
    let w = quadrature_weights(grid, &Region::Whole, Some(g))?;
    let num = weighted_lp(phi.values(), &w, sobolev_exponent(n))?.powi(2);
    let grad = finite_difference_gradient(phi);
    let ginv = g.inverse()?;
    let mut den = 0.0;
    let mut d = [0.0; crate::linalg::MAX_DIM];
    for lin in 0..grid.len() {
        for (a, ga) in grad.iter().enumerate() {
            d[a] = ga.values()[lin];
        }
        if d[..n].iter().all(|&v| v == 0.0) {
            continue;
        }
        den += w[lin] * ginv.at(lin).quadratic_form(&d[..n]);
    }
    if !(den > 0.0) {
        return Err(Error::Degeneracy {
            node: vec![],
            detail: "test function has vanishing gradient; Sobolev quotient undefined".into(),
        });
    }
    Ok(num / den)
}

/// Smooth bumps exp(1 − 1/(1 − |x−c|²/r²)) with centers on a Halton
/// sequence inside `region` and radii cycling through a few sizes; every
/// support stays at least one node layer inside the grid.
pub fn bump_battery(grid: &GridSpec, region: &Region, count: usize) -> Result<Vec<ScalarField>> {
    let n = grid.dim();
    let (lo, hi) = match region {
        Region::Box { lo, hi } => (lo.clone(), hi.clone()),
        Region::Whole => (
            (0..n).map(|a| grid.lower(a)).collect(),
            (0..n).map(|a| grid.upper(a)).collect(),
        ),
    };
    let h = grid.max_spacing();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let frac = [0.5, 0.35, 0.25][k % 3];
        let mut c = vec![0.0; n];
        let mut rad = f64::INFINITY;
        for a in 0..n {
            let (gl, gu) = (grid.lower(a) + 2.0 * h, grid.upper(a) - 2.0 * h);
            // centers keep three nodes of room for the smallest bump
            let (l, u) = (lo[a].max(gl + 3.0 * h), hi[a].min(gu - 3.0 * h));
            if !(u > l) {
                return Err(Error::Domain("battery region leaves no room inside the grid".into()));
            }
            c[a] = l + (u - l) * halton(k as u32 + 1, HALTON_BASES[a]);
            rad = rad.min((frac * (u - l)).max(3.0 * h)).min(c[a] - gl).min(gu - c[a]);
        }
        let c2 = c.clone();
        let f = ScalarField::from_fn(grid.clone(), move |x| {
            let s: f64 = x.iter().zip(&c2).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / (rad * rad);
            if s >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - s)).exp()
            }
        })?;
        out.push(f);
    }
    Ok(out)
}

/// Outcome of the per-function comparison of Sobolev quotients.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub rho: f64,
    /// (Q_g(φ), Q_{g_ε}(φ)) per battery function.
    pub quotients: Vec<(f64, f64)>,
    /// Smallest of 1 − Q_ε/(ρⁿQ_g) and 1 − Q_g/(ρⁿQ_ε) over the battery.
    pub worst_margin: f64,
    pub violations: usize,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks Q_{g_ε}(φ) ≤ ρⁿQ_g(φ) and Q_g(φ) ≤ ρⁿQ_{g_ε}(φ) for every φ, with
/// 1e−10 relative slack.
pub fn sobolev_sandwich_check(
    g: &MetricField,
    g_eps: &MetricField,
    rho: &EquivalenceFactor,
    battery: &[ScalarField],
) -> Result<SandwichReport> {
    if battery.is_empty() {
        return Err(Error::Argument("test-function battery is empty".into()));
    }
    if g.grid() != g_eps.grid() {
        return Err(Error::Data("metrics live on different grids".into()));
    }
    let bound = rho.rho.powi(g.dim() as i32);
    let mut quotients = Vec::with_capacity(battery.len());
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for phi in battery {
        let (qg, qe) = (sobolev_quotient(phi, g)?, sobolev_quotient(phi, g_eps)?);
        for (a, b) in [(qe, qg), (qg, qe)] {
            let m = 1.0 - a / (bound * b);
            worst = worst.min(m);
            if a > bound * b * (1.0 + 1e-10) {
                violations += 1;
            }
        }
        quotients.push((qg, qe));
    }
    Ok(SandwichReport {
        rho: rho.rho,
        quotients,
        worst_margin: worst,
        violations,
    })
}

/// Left side of the solvability condition and its verdict.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExistenceCheck {
    pub sobolev_estimate: f64,
    pub negative_part: f64,
    /// C·(∫|R₋|^{n/2} dμ)^{2/n}.
    pub product: f64,
    pub pass: bool,
}

/// C·‖R[g_ε]₋‖_{L^{n/2}(g_ε)} ≤ 1 with C an empirical Sobolev constant
/// (a battery maximum, hence a lower bound for the true one).
pub fn existence_condition(g_eps: &MetricField, rneg: &ScalarField, c_estimate: f64) -> Result<ExistenceCheck> {
    if rneg.grid() != g_eps.grid() {
        return Err(Error::Data("R₋ and metric live on different grids".into()));
    }
    if !(c_estimate >= 0.0) {
        return Err(Error::Argument(format!(
            "Sobolev estimate {c_estimate} must be nonnegative"
        )));
    }
    let n = g_eps.dim();
    let w = quadrature_weights(g_eps.grid(), &Region::Whole, Some(g_eps))?;
    let neg: Vec<f64> = rneg.values().iter().map(|v| v.max(0.0)).collect();
    let norm = weighted_lp(&neg, &w, 0.5 * n as f64)?;
    let product = c_estimate * norm;
    Ok(ExistenceCheck {
        sobolev_estimate: c_estimate,
        negative_part: norm,
        product,
        pass: product <= 1.0,
    })
}
