//! The full pipeline g → g_ε → R[g_ε]₋ → u_ε → g̃_ε with mass bookkeeping
//! per scale.

use std::sync::Arc;

use serde::Serialize;

use super::farfield::{a_farfield, FarFieldWindow};
use super::laplacian::LaplaceOperator;
use super::solver::{solve_conformal_factor, ConformalSolution, SolverOptions};
use crate::asymptotics::{
    adm_mass, bump_battery, existence_condition, sobolev_quotient, sobolev_sandwich_check, AsymptoticModel,
    ExistenceCheck, SandwichReport,
};
use crate::curvature::{negative_part, scalar_pointwise};
use crate::error::{Error, Result};
use crate::fields::metric::{radius, AnalyticMetric, ClosureMetric};
use crate::fields::norms::{quadrature_weights, sobolev_exponent, weighted_lp};
use crate::fields::{GridSpec, MetricField, Region, Regularity, ScalarField};
use crate::mollify::{build_g_eps, metric_equivalence_factor, MollifierKernel, SmoothingPlan};
use crate::rates::strictly_decreasing;

/// Resolution and solver settings of [`mass_chain`].
#[derive(Clone, Debug)]
pub struct ChainConfig {
    /// The non-smooth box K.
    pub region: Region,
    /// Fine-grid spacing h = ε·h_over_eps for mollification and curvature.
    pub h_over_eps: f64,
    /// Cube [−L, L]ⁿ and spacing of the conformal solve.
    pub solve_half_width: f64,
    pub solve_h: f64,
    pub solver: SolverOptions,
    pub window: FarFieldWindow,
    /// Asymptotic decay rate τ of g and the ADM radii.
    pub tau: f64,
    pub mass_radii: Vec<f64>,
    pub quadrature_order: usize,
    /// Tail-fit exponent s; None selects 2τ − (n−2).
    pub tail_exponent: Option<f64>,
    /// Bumps used for the empirical Sobolev constant of the existence check.
    pub existence_battery: usize,
    /// Bumps for the per-φ Sobolev sandwich on the fine grid; 0 skips it.
    pub sandwich_battery: usize,
}

impl ChainConfig {
    /// K = [−1.1, 1.1]ⁿ, h = ε/4, solve on [−6, 6]ⁿ with h = 0.15, radii {8, 16, 32}.
    pub fn new(n: usize, tau: f64) -> Self {
        ChainConfig {
            region: Region::centered(n, 1.1),
            h_over_eps: 0.25,
            solve_half_width: 6.0,
            solve_h: 0.15,
            solver: SolverOptions::default(),
            window: FarFieldWindow::default(),
            tau,
            mass_radii: vec![8.0, 16.0, 32.0],
            quadrature_order: 16,
            tail_exponent: None,
            existence_battery: 10,
            sandwich_battery: 10,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let Region::Box { lo, hi } = &self.region else {
            return Err(Error::Argument("the non-smooth set K must be a box".into()));
        };
        if lo.len() != n {
            return Err(Error::Argument(format!("K has dimension {}, metric {n}", lo.len())));
        }
        // the cutoff is built at scale ε/2, which must itself clear 2h
        if !(self.h_over_eps > 0.0 && self.h_over_eps <= 0.25) {
            return Err(Error::Argument(format!(
                "h/ε = {} must lie in (0, 1/4]",
                self.h_over_eps
            )));
        }
        let reach = lo.iter().chain(hi).fold(0.0f64, |a, v| a.max(v.abs()));
        if self.solve_half_width <= reach + 4.0 * self.solve_h {
            return Err(Error::Domain(format!(
                "solve box half-width {} does not clear K (reach {reach}) by four nodes",
                self.solve_half_width
            )));
        }
        Ok(())
    }
}

/// One ε of the chain.
#[derive(Clone, Debug, Serialize)]
pub struct ChainRow {
    pub eps: f64,
    pub fine_h: f64,
    /// Equivalence factor between g and g_ε on the fine grid.
    pub rho: f64,
    /// ‖R[g_ε]₋‖_{L^{n/2}(K_ε, g)} on the fine grid.
    pub rneg_norm: f64,
    pub sandwich: Option<SandwichReport>,
    pub existence: ExistenceCheck,
    pub m_geps: f64,
    pub a_farfield: f64,
    pub a_integral: f64,
    /// m(g_ε) + 2A with the energy-identity A.
    pub m_tilde_formula: f64,
    /// ADM mass of U^{4/(n−2)}g_ε with U = 1 + A_far|x|^{2−n}.
    pub m_tilde_direct: f64,
    pub residual: f64,
    pub iterations: usize,
    pub min_u: f64,
    pub max_u: f64,
    pub within_unit_bound: bool,
}

#[derive(Clone, Debug)]
pub struct MassChain {
    pub rows: Vec<ChainRow>,
    pub solutions: Vec<ConformalSolution>,
}

impl MassChain {
    /// |m(g̃_ε) − m| per scale with the formula path.
    pub fn mass_errors(&self, m: f64) -> Vec<f64> {
        self.rows.iter().map(|r| (r.m_tilde_formula - m).abs()).collect()
    }
}

/// Runs the chain for every ε on a fresh fine grid at fixed h/ε.
///
/// The conformal solve uses a separate cube sampled from the point
/// evaluator of g_ε, with R₋ carried over by cloud-in-cell deposition of
/// R₋ dμ so that ∫R₋ dμ is preserved. The solve is refused when the
/// empirical existence check fails.
pub fn mass_chain(
    metric: Arc<dyn AnalyticMetric>,
    regularity: Regularity,
    kernel: &MollifierKernel,
    eps_list: &[f64],
    cfg: &ChainConfig,
) -> Result<MassChain> {
    let n = metric.dim();
    cfg.validate(n)?;
    if eps_list.is_empty() {
        return Err(Error::Argument("ε-list is empty".into()));
    }
    let coarse = GridSpec::cube(n, cfg.solve_half_width, cfg.solve_h)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut solutions = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let (row, sol) = chain_step(&metric, regularity, kernel, eps, cfg, &coarse)?;
        rows.push(row);
        solutions.push(sol);
    }
    Ok(MassChain { rows, solutions })
}

fn chain_step(
    metric: &Arc<dyn AnalyticMetric>,
    regularity: Regularity,
    kernel: &MollifierKernel,
    eps: f64,
    cfg: &ChainConfig,
    coarse: &GridSpec,
) -> Result<(ChainRow, ConformalSolution)> {
    let n = metric.dim();
    let h = eps * cfg.h_over_eps;
    let fine = GridSpec::covering(&cfg.region, eps + 3.0 * h, h)?;
    let g = MetricField::from_analytic(fine.clone(), metric.clone(), regularity)?;
    let plan = SmoothingPlan::new(&fine, cfg.region.clone(), eps, kernel)?;
    let ge = build_g_eps(&g, &plan, kernel)?;
    let rho = metric_equivalence_factor(&g, &ge)?;
    let sandwich = if cfg.sandwich_battery > 0 {
        let battery = bump_battery(&fine, &cfg.region, cfg.sandwich_battery)?;
        Some(sobolev_sandwich_check(&g, &ge, &rho, &battery)?)
    } else {
        None
    };

    let mask = plan.fattened_mask();
    let rneg: Vec<f64> = negative_part(&scalar_pointwise(&ge)?)
        .into_values()
        .into_iter()
        .zip(&mask)
        .map(|(v, &inside)| if inside { v } else { 0.0 })
        .collect();
    let k_eps = cfg.region.grown(eps);
    let w = quadrature_weights(&fine, &k_eps, Some(&g))?;
    let rneg_norm = weighted_lp(&rneg, &w, 0.5 * n as f64)?;

    let smooth = ge.analytic().expect("build_g_eps attaches an evaluator").clone();
    drop(g);
    let gc = MetricField::from_analytic(coarse.clone(), smooth.clone(), Regularity::Smooth)?;
    let rneg_c = deposit(&ge, &rneg, &gc)?;
    drop(ge);

    let battery = bump_battery(
        coarse,
        &Region::centered(n, 0.5 * cfg.solve_half_width),
        cfg.existence_battery,
    )?;
    let c_est = battery
        .iter()
        .map(|phi| sobolev_quotient(phi, &gc))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let existence = existence_condition(&gc, &rneg_c, c_est)?;
    if !existence.pass {
        return Err(Error::Contract(format!(
            "existence condition fails at eps = {eps}: C·‖R₋‖ = {:.4e} > 1",
            existence.product
        )));
    }

    let sol = solve_conformal_factor(&gc, &rneg_c, cfg.solver)?;
    let a_far = a_farfield(&sol, &cfg.window)?;
    let a_int = sol.a_integral;

    let reach = outer_radius(&k_eps);
    let mut model = AsymptoticModel::new(n, cfg.tau, reach, cfg.mass_radii.clone())?.with_order(cfg.quadrature_order);
    if let Some(s) = cfg.tail_exponent {
        model = model.with_tail_exponent(s);
    }
    let m_geps = adm_mass(smooth.as_ref(), &model)?.m_inf;
    let tail = conformal_tail(smooth, a_far);
    let m_direct = adm_mass(&tail, &model)?.m_inf;

    let row = ChainRow {
        eps,
        fine_h: h,
        rho: rho.rho,
        rneg_norm,
        sandwich,
        existence,
        m_geps,
        a_farfield: a_far,
        a_integral: a_int,
        m_tilde_formula: m_geps + 2.0 * a_int,
        m_tilde_direct: m_direct,
        residual: sol.residual,
        iterations: sol.iterations,
        min_u: sol.min_u,
        max_u: sol.max_u,
        within_unit_bound: sol.within_unit_bound,
    };
    Ok((row, sol))
}

/// Largest |x| over a box.
fn outer_radius(r: &Region) -> f64 {
    match r {
        Region::Box { lo, hi } => lo
            .iter()
            .zip(hi)
            .map(|(a, b)| a.abs().max(b.abs()).powi(2))
            .sum::<f64>()
            .sqrt(),
        _ => f64::INFINITY,
    }
}

/// U^{4/(n−2)}g with U = 1 + A|x|^{2−n}, the far-field form of g̃_ε.
pub fn conformal_tail(g: Arc<dyn AnalyticMetric>, a: f64) -> ClosureMetric {
    let n = g.dim();
    let k = n as f64 - 2.0;
    ClosureMetric::new(n, move |x| {
        let u = 1.0 + a * radius(x).powf(-k);
        g.eval(x).scale(u.powf(4.0 / k))
    })
}

/// Cloud-in-cell transfer of the density R₋√det g dx from the grid of
/// `fine` to the grid of `coarse`, returned as a node value on `coarse`.
fn deposit(fine: &MetricField, values: &[f64], coarse: &MetricField) -> Result<ScalarField> {
    let fg = fine.grid();
    let cg = coarse.grid();
    let n = fg.dim();
    let sf = fine.volume_density();
    let sc = coarse.volume_density();
    let dvf = fg.cell_volume();
    let mut q = vec![0.0; cg.len()];
    let mut err = None;
    fg.for_each_node(|lin, _, x| {
        let v = values[lin];
        if v == 0.0 || err.is_some() {
            return;
        }
        let mass = v * sf[lin] * dvf;
        let mut base = [0usize; 8];
        let mut frac = [0.0; 8];
        for a in 0..n {
            let s = (x[a] - cg.coord(a, 0)) / cg.spacing()[a];
            let i0 = s.floor();
            if i0 < 0.0 || i0 as usize + 1 >= cg.dims()[a] {
                err = Some(Error::Domain(format!(
                    "R₋ support at {:?} leaves the solve box",
                    &x[..n]
                )));
                return;
            }
            base[a] = i0 as usize;
            frac[a] = s - i0;
        }
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut lc = 0;
            for a in 0..n {
                let up = (corner >> a) & 1;
                w *= if up == 1 { frac[a] } else { 1.0 - frac[a] };
                lc += (base[a] + up) * cg.strides()[a];
            }
            q[lc] += w * mass;
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let dvc = cg.cell_volume();
    let vals = q.iter().zip(&sc).map(|(m, s)| m / (s * dvc)).collect();
    ScalarField::from_values(cg.clone(), vals)
}

/// ‖u_ε − 1‖_{L^{n*}(g_ε)} and ‖∇u_ε‖_{L²(g_ε)} per solved scale.
#[derive(Clone, Debug, Serialize)]
pub struct UNormTable {
    pub lnstar: Vec<f64>,
    pub grad_l2: Vec<f64>,
    /// Both sequences strictly decreasing, or both identically zero.
    pub decreasing: bool,
}

pub fn u_convergence_norms(solutions: &[ConformalSolution]) -> Result<UNormTable> {
    if solutions.len() < 3 {
        return Err(Error::Argument(format!(
            "{} solved scales, need at least 3",
            solutions.len()
        )));
    }
    let mut lnstar = Vec::with_capacity(solutions.len());
    let mut grad = Vec::with_capacity(solutions.len());
    for sol in solutions {
        let grid = sol.u.grid();
        let n = grid.dim();
        let w = quadrature_weights(grid, &Region::Whole, Some(&sol.g))?;
        let dev: Vec<f64> = sol.u.values().iter().map(|v| v - 1.0).collect();
        lnstar.push(weighted_lp(&dev, &w, sobolev_exponent(n))?);
        // −Σ w·Lw is the discrete ∫|∇w|²_g dμ_g per cell volume
        let op = LaplaceOperator::new(&sol.g)?;
        let mut lw = vec![0.0; dev.len()];
        op.apply_flux(&dev, &mut lw);
        let e: f64 = dev.iter().zip(&lw).map(|(a, b)| -a * b).sum::<f64>() * grid.cell_volume();
        grad.push(e.max(0.0).sqrt());
    }
    let zero = lnstar.iter().chain(&grad).all(|&v| v == 0.0);
    let decreasing = zero || (strictly_decreasing(&lnstar) && strictly_decreasing(&grad));
    Ok(UNormTable {
        lnstar,
        grad_l2: grad,
        decreasing,
    })
}
