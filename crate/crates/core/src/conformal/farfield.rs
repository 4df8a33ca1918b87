use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::laplacian::LaplaceOperator;
use super::solver::ConformalSolution;
use crate::error::{Error, Result};
use crate::special::unit_sphere_area;

/// Shell of nodes used to fit u − 1 ≈ A/|x|^{n−2} near the outer boundary.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FarFieldWindow {
    /// Inner radius as a fraction of the inscribed radius of the box. A
    /// thin outer shell leaves A, C and B nearly collinear.
    pub inner_fraction: f64,
    /// Node layers next to the boundary left out of the fit.
    pub excluded_layers: usize,
    /// Add the lowest cubic harmonic Σx_i⁴ − 3|x|⁴/(n+2) to the model; it
    /// absorbs the leading anisotropy from imposing u = 1 on a cube.
    pub cubic_harmonic: bool,
    /// Number of correction terms C_k/|x|^k after the leading A; they model
    /// the curved background, where u − 1 is not exactly A/|x|^{n−2}.
    pub inverse_terms: usize,
}

impl Default for FarFieldWindow {
    fn default() -> Self {
        FarFieldWindow {
            inner_fraction: 0.4,
            excluded_layers: 2,
            cubic_harmonic: true,
            inverse_terms: 2,
        }
    }
}

/// (A_farfield, A_integral).
///
/// A_farfield is the least-squares coefficient of
/// (u−1)|x|^{n−2} ≈ A + Σ_k C_k/|x|^k + B|x|^{n−2} (+ D·H₄(x)|x|^{n−2}) over the
/// window; B soaks up the finite-box offset. A_integral comes from
/// (2−n)ω_{n−1}A = ∫|∇u|²_g − c_n⁻¹R₋u² dμ_g evaluated with the discrete
/// Dirichlet form of the solver's operator.
pub fn extract_a(sol: &ConformalSolution, window: &FarFieldWindow) -> Result<(f64, f64)> {
    Ok((a_farfield(sol, window)?, a_integral(sol)?))
}

/// Far-field least-squares estimate alone.
pub fn a_farfield(sol: &ConformalSolution, window: &FarFieldWindow) -> Result<f64> {
    let grid = sol.u.grid();
    let n = grid.dim();
    let u = sol.u.values();

    let h = grid.max_spacing();
    let r_in = (0..n)
        .map(|a| (grid.upper(a)).min(-grid.lower(a)))
        .fold(f64::INFINITY, f64::min);
    let r_hi = r_in - window.excluded_layers as f64 * h;
    let r_lo = window.inner_fraction * r_in;
    if !(r_hi - r_lo >= 3.0 * h) {
        return Err(Error::Domain(format!(
            "far-field shell [{r_lo}, {r_hi}] is thinner than three nodes (h = {h})"
        )));
    }
    let ncols = 2 + window.inverse_terms + usize::from(window.cubic_harmonic);
    let mut rows: Vec<f64> = Vec::new();
    let mut rhs = Vec::new();
    let q = 3.0 / (n as f64 + 2.0);
    grid.for_each_node(|lin, _, x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let r = r2.sqrt();
        if r < r_lo || r > r_hi {
            return;
        }
        let w = r.powi(n as i32 - 2);
        let h4: f64 = x.iter().map(|v| v.powi(4)).sum::<f64>() - q * r2 * r2;
        rows.push(1.0);
        for k in 1..=window.inverse_terms {
            rows.push(r.powi(-(k as i32)));
        }
        rows.push(w);
        if window.cubic_harmonic {
            rows.push(h4 * w);
        }
        rhs.push((u[lin] - 1.0) * w);
    });
    if rhs.len() < 3 * ncols {
        return Err(Error::Domain("far-field shell holds too few nodes".into()));
    }
    let a = DMatrix::from_row_slice(rhs.len(), ncols, &rows);
    let b = DVector::from_vec(rhs);
    let svd = a.svd(true, true);
    let coef = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::Fit(format!("far-field least squares failed: {e}")))?;
    Ok(if u.iter().all(|&v| v == 1.0) { 0.0 } else { coef[0] })
}

/// Estimate from the energy identity alone.
pub fn a_integral(sol: &ConformalSolution) -> Result<f64> {
    let grid = sol.u.grid();
    let n = grid.dim();
    let u = sol.u.values();
    if u.iter().all(|&v| v == 1.0) {
        return Ok(0.0);
    }
    // discrete Dirichlet energy of w = u − 1, which vanishes on the boundary
    let op = LaplaceOperator::new(&sol.g)?;
    let w: Vec<f64> = u.iter().map(|v| v - 1.0).collect();
    let mut lw = vec![0.0; w.len()];
    op.apply_flux(&w, &mut lw);
    let dv = grid.cell_volume();
    let sg = op.volume_density();
    let mut energy = 0.0;
    let mut potential = 0.0;
    for i in 0..w.len() {
        energy -= w[i] * lw[i];
        potential += sg[i] * sol.rneg.values()[i] * u[i] * u[i];
    }
    let rhs = (energy - potential / sol.cn) * dv;
    Ok(rhs / ((2.0 - n as f64) * unit_sphere_area(n)))
}
