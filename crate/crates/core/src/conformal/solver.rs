use serde::Serialize;

use super::laplacian::LaplaceOperator;
use crate::error::{Error, Result};
use crate::fields::{MetricField, ScalarField};
use crate::special::conformal_constant;

/// Stopping rule for [`solve_conformal_factor`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolverOptions {
    /// Bound on ‖b − S u‖_∞ / ‖b‖_∞.
    pub tol: f64,
    /// Defaults to 10·N² with N the largest node count per axis.
    pub max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-9,
            max_iter: None,
        }
    }
}

/// Discrete solution of c_nΔ_g u + R₋u = 0 with u = 1 on the outer layer.
#[derive(Clone, Debug)]
pub struct ConformalSolution {
    pub u: ScalarField,
    pub g: MetricField,
    pub rneg: ScalarField,
    /// Relative residual of the symmetric system, max norm.
    pub residual: f64,
    /// max |c_nΔ_g u + R₋u| over interior nodes.
    pub pde_residual: f64,
    /// None when the box is too small for the default fit window.
    pub a_farfield: Option<f64>,
    pub a_integral: f64,
    pub cn: f64,
    pub iterations: usize,
    pub min_u: f64,
    pub max_u: f64,
    /// Whether 0 < u ≤ 1 + 1e−10 at every node.
    pub within_unit_bound: bool,
}

/// Solves c_nΔ_g u + R₋u = 0, u = 1 on the boundary layer, by Jacobi
/// preconditioned conjugate gradients on the symmetric form
/// (−c_n L − √det g·R₋) u = 0 with L = √det g·Δ_g.
///
/// Both estimates of the far-field coefficient are filled in with the
/// default window of [`super::farfield::FarFieldWindow`].
pub fn solve_conformal_factor(g: &MetricField, rneg: &ScalarField, opts: SolverOptions) -> Result<ConformalSolution> {
    solve_conformal_factor_with(g, rneg, None, opts)
}

/// As [`solve_conformal_factor`] with Dirichlet data taken from the outer
/// layer of `boundary` instead of 1. The integral estimate of A assumes
/// u = 1 there and is only meaningful in that case.
pub fn solve_conformal_factor_with(
    g: &MetricField,
    rneg: &ScalarField,
    boundary: Option<&ScalarField>,
    opts: SolverOptions,
) -> Result<ConformalSolution> {
    let grid = g.grid().clone();
    if boundary.is_some_and(|b| b.grid() != &grid) {
        return Err(Error::Data("boundary data and metric live on different grids".into()));
    }
    if rneg.grid() != &grid {
        return Err(Error::Data("R₋ and metric live on different grids".into()));
    }
    let n = grid.dim();
    if n < 3 {
        return Err(Error::Argument("the conformal factor equation needs n ≥ 3".into()));
    }
    if let Some(i) = rneg.values().iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::Data(format!(
            "R₋ must be nonnegative; node {:?} has {}",
            &grid.multi_index(i)[..n],
            rneg.values()[i]
        )));
    }
    let mut touching = false;
    grid.for_each_node(|lin, idx, _| touching |= grid.is_boundary(idx) && rneg.values()[lin] != 0.0);
    if touching {
        return Err(Error::Domain("R₋ support reaches the outer boundary".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Argument(format!("tol = {} must be positive", opts.tol)));
    }
    let cn = conformal_constant(n);
    let op = LaplaceOperator::new(g)?;
    let sg = op.volume_density().to_vec();
    let len = grid.len();
    let interior: Vec<bool> = {
        let mut m = vec![false; len];
        grid.for_each_node(|lin, idx, _| m[lin] = !grid.is_boundary(idx));
        m
    };
    let pot: Vec<f64> = (0..len).map(|i| sg[i] * rneg.values()[i]).collect();

    // S v = −c_n L v − √g R₋ v on interior nodes, 0 elsewhere
    let mut lbuf = vec![0.0; len];
    let mut apply_s = |v: &[f64], out: &mut [f64]| {
        op.apply_flux(v, &mut lbuf);
        for i in 0..len {
            out[i] = if interior[i] {
                -cn * lbuf[i] - pot[i] * v[i]
            } else {
                0.0
            };
        }
    };

    // unknowns are the interior values; u keeps the boundary data, so the
    // residual of S w = b with b = −S u_b is simply −S u
    let edge = |i: usize| boundary.map_or(1.0, |b| b.values()[i]);
    let mut u: Vec<f64> = (0..len).map(|i| if interior[i] { 1.0 } else { edge(i) }).collect();
    let mut b = vec![0.0; len];
    {
        let ub: Vec<f64> = (0..len).map(|i| if interior[i] { 0.0 } else { edge(i) }).collect();
        apply_s(&ub, &mut b);
    }
    let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut diag: Vec<f64> = op
        .negative_diagonal()
        .iter()
        .zip(&pot)
        .map(|(d, p)| cn * d - p)
        .collect();
    for i in 0..len {
        if interior[i] && !(diag[i] > 0.0) {
            return Err(Error::Degeneracy {
                node: grid.multi_index(i)[..n].to_vec(),
                detail: "conformal operator lost diagonal dominance; R₋ too large for this grid".into(),
            });
        }
        if !interior[i] {
            diag[i] = 1.0;
        }
    }
    let per_axis = *grid.dims().iter().max().unwrap_or(&1);
    let max_iter = opts.max_iter.unwrap_or(10 * per_axis * per_axis);

    let mut su = vec![0.0; len];
    let true_residual = |u: &[f64], su: &mut Vec<f64>, apply: &mut dyn FnMut(&[f64], &mut [f64])| -> (Vec<f64>, f64) {
        apply(u, su);
        let mut r = vec![0.0; len];
        let mut m: f64 = 0.0;
        for i in 0..len {
            if interior[i] {
                r[i] = -su[i];
                m = m.max(r[i].abs());
            }
        }
        (r, m)
    };
    let (mut r, mut rmax) = true_residual(&u, &mut su, &mut apply_s);
    let scale = if bnorm > 0.0 { bnorm } else { 1.0 };
    let mut iterations = 0;
    let mut z = vec![0.0; len];
    let mut p = vec![0.0; len];
    let mut q = vec![0.0; len];
    'outer: while rmax / scale > opts.tol {
        // (re)start from the true residual
        for i in 0..len {
            z[i] = r[i] / diag[i];
            p[i] = z[i];
        }
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        loop {
            if iterations >= max_iter {
                let (_, m) = true_residual(&u, &mut su, &mut apply_s);
                return Err(Error::Convergence {
                    iterations,
                    residual: m / scale,
                });
            }
            iterations += 1;
            apply_s(&p, &mut q);
            let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
            if !(pq > 0.0) {
                return Err(Error::Degeneracy {
                    node: vec![],
                    detail: "conformal operator is not positive definite (existence condition fails)".into(),
                });
            }
            let alpha = rz / pq;
            let mut m: f64 = 0.0;
            for i in 0..len {
                u[i] += alpha * p[i];
                r[i] -= alpha * q[i];
                m = m.max(r[i].abs());
            }
            if m / scale <= 0.5 * opts.tol || iterations % 500 == 0 {
                let (rt, mt) = true_residual(&u, &mut su, &mut apply_s);
                r = rt;
                rmax = mt;
                continue 'outer;
            }
            for i in 0..len {
                z[i] = r[i] / diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..len {
                p[i] = z[i] + beta * p[i];
            }
        }
    }

    if let Some(i) = u.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::MaximumPrinciple {
            node: grid.multi_index(i)[..n].to_vec(),
            value: u[i],
        });
    }
    let pde_residual = {
        let lap = op.apply(&u);
        (0..len)
            .filter(|&i| interior[i])
            .map(|i| (cn * lap[i] + rneg.values()[i] * u[i]).abs())
            .fold(0.0, f64::max)
    };
    let min_u = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_u = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sol = ConformalSolution {
        u: ScalarField::from_values(grid, u)?,
        g: g.clone(),
        rneg: rneg.clone(),
        residual: rmax / scale,
        pde_residual,
        a_farfield: None,
        a_integral: 0.0,
        cn,
        iterations,
        min_u,
        max_u,
        within_unit_bound: min_u > 0.0 && max_u <= 1.0 + 1e-10,
    };
    sol.a_integral = super::farfield::a_integral(&sol)?;
    sol.a_farfield = match super::farfield::a_farfield(&sol, &super::farfield::FarFieldWindow::default()) {
        Ok(a) => Some(a),
        Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(sol)
}

/// g̃ = u^{4/(n−2)}g node-wise, tagged smooth. The point evaluator is
/// composed when both u and g have closed forms.
pub fn conformal_metric(g: &MetricField, u: &ScalarField) -> Result<MetricField> {
    use crate::fields::metric::{ClosureMetric, SymTensorField};
    use std::sync::Arc;
    let grid = g.grid();
    if u.grid() != grid {
        return Err(Error::Data(
            "metric and conformal factor live on different grids".into(),
        ));
    }
    let n = grid.dim();
    if n < 3 {
        return Err(Error::Argument("conformal rescaling needs n ≥ 3".into()));
    }
    if let Some(i) = u.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Domain(format!(
            "conformal factor not positive at node {:?}",
            &grid.multi_index(i)[..n]
        )));
    }
    let expo = 4.0 / (n as f64 - 2.0);
    let comps = g
        .tensor()
        .packed()
        .iter()
        .map(|c| c.iter().zip(u.values()).map(|(gv, uv)| uv.powf(expo) * gv).collect())
        .collect();
    let out = MetricField::from_tensor(
        SymTensorField::new(grid.clone(), comps)?,
        crate::fields::Regularity::Smooth,
    )?;
    Ok(match (g.analytic(), u.analytic()) {
        (Some(ga), Some(ua)) => {
            let (ga, ua) = (ga.clone(), ua.clone());
            out.with_analytic(Arc::new(ClosureMetric::new(n, move |x| {
                ga.eval(x).scale(ua(x).powf(expo))
            })))
        }
        _ => out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::GridSpec;

    #[test]
    fn zero_potential_gives_one() {
        let grid = GridSpec::cube(3, 2.0, 0.1).unwrap();
        let g = MetricField::euclidean(grid.clone()).unwrap();
        let z = ScalarField::zeros(grid);
        let s = solve_conformal_factor(&g, &z, SolverOptions::default()).unwrap();
        assert!(s.u.values().iter().all(|&v| v == 1.0));
        assert_eq!(s.iterations, 0);
        assert_eq!(s.a_integral, 0.0);
        assert_eq!(s.a_farfield, Some(0.0));
        assert!(s.within_unit_bound);
    }

    #[test]
    fn rejects_bad_potential() {
        let grid = GridSpec::cube(3, 1.0, 0.1).unwrap();
        let g = MetricField::euclidean(grid.clone()).unwrap();
        let neg = ScalarField::constant(grid.clone(), -1.0).unwrap();
        assert!(matches!(
            solve_conformal_factor(&g, &neg, SolverOptions::default()),
            Err(Error::Data(_))
        ));
        let touching = ScalarField::constant(grid, 1.0).unwrap();
        assert!(matches!(
            solve_conformal_factor(&g, &touching, SolverOptions::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn positive_potential_raises_u() {
        let grid = GridSpec::cube(3, 1.5, 0.1).unwrap();
        let g = MetricField::euclidean(grid.clone()).unwrap();
        let r = ScalarField::from_fn(grid, |x| {
            let s: f64 = x.iter().map(|v| v * v).sum();
            if s < 0.25 {
                (1.0 - 4.0 * s).powi(2)
            } else {
                0.0
            }
        })
        .unwrap();
        let s = solve_conformal_factor(
            &g,
            &r,
            SolverOptions {
                tol: 1e-11,
                max_iter: None,
            },
        )
        .unwrap();
        assert!(s.residual <= 1e-11);
        assert!(s.min_u >= 1.0 - 1e-12 && s.max_u > 1.0);
        assert!(!s.within_unit_bound);
        assert!(s.a_integral > 0.0);
        let thin = crate::conformal::FarFieldWindow {
            inner_fraction: 0.95,
            ..Default::default()
        };
        assert!(crate::conformal::extract_a(&s, &thin).is_err());
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let grid = GridSpec::cube(3, 1.0, 0.1).unwrap();
        let g = MetricField::euclidean(grid.clone()).unwrap();
        let r = ScalarField::from_fn(grid, |x| if x.iter().all(|v| v.abs() < 0.3) { 1.0 } else { 0.0 }).unwrap();
        match solve_conformal_factor(
            &g,
            &r,
            SolverOptions {
                tol: 1e-12,
                max_iter: Some(2),
            },
        ) {
            Err(Error::Convergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conformal_metric_algebra() {
        let grid = GridSpec::cube(3, 1.0, 0.2).unwrap();
        let g = MetricField::from_analytic(
            grid.clone(),
            std::sync::Arc::new(crate::fields::metric::ClosureMetric::new(3, |x| {
                let mut m = crate::linalg::Mat::scalar(3, 1.2 + 0.1 * x[0]);
                m.set_sym(0, 2, 0.1 * x[1]);
                m
            })),
            crate::fields::Regularity::Smooth,
        )
        .unwrap();
        let one = ScalarField::constant(grid.clone(), 1.0).unwrap();
        let same = conformal_metric(&g, &one).unwrap();
        assert_eq!(same.tensor().packed(), g.tensor().packed());
        let u = ScalarField::from_fn(grid.clone(), |x| 1.0 + 0.3 * x[1] * x[1]).unwrap();
        let gt = conformal_metric(&g, &u).unwrap();
        for lin in 0..grid.len() {
            let uv = u.values()[lin];
            let want = uv.powi(12) * g.at(lin).det();
            assert!((gt.at(lin).det() - want).abs() <= 1e-12 * want);
        }
        let c = ScalarField::constant(grid, 1.5).unwrap();
        let gc = conformal_metric(&g, &c).unwrap();
        let rho = crate::mollify::metric_equivalence_factor(&gc, &g).unwrap().rho;
        assert!((rho - 1.5f64.powi(4)).abs() < 1e-12);
    }
}
