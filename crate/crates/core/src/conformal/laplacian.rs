use crate::error::{Error, Result};
use crate::fields::metric::{packed_index, packed_len};
use crate::fields::{GridSpec, MetricField, ScalarField};
use crate::linalg::MAX_DIM;

/// Divergence-form stencil for L u = ∂_i(√det g · g^{ij} ∂_j u).
///
/// Diagonal terms use face-averaged coefficients, mixed terms nested central
/// differences. Rows of the outermost node layer are zero (Dirichlet). L is
/// symmetric on functions vanishing on that layer, and Δ_g = L/√det g.
#[derive(Clone, Debug)]
pub struct LaplaceOperator {
    grid: GridSpec,
    coef: Vec<Vec<f64>>,
    sqrt_det: Vec<f64>,
    has_cross: bool,
}

impl LaplaceOperator {
    pub fn new(g: &MetricField) -> Result<Self> {
        let grid = g.grid().clone();
        let n = grid.dim();
        let mut coef = vec![vec![0.0; grid.len()]; packed_len(n)];
        let mut sqrt_det = vec![0.0; grid.len()];
        for lin in 0..grid.len() {
            let m = g.at(lin);
            let inv = m
                .cholesky()
                .and_then(|_| m.inverse())
                .ok_or_else(|| Error::Degeneracy {
                    node: grid.multi_index(lin)[..n].to_vec(),
                    detail: "metric not positive-definite".into(),
                })?;
            let s = m.det().sqrt();
            sqrt_det[lin] = s;
            for i in 0..n {
                for j in i..n {
                    coef[packed_index(n, i, j)][lin] = s * inv.get(i, j);
                }
            }
        }
        let has_cross = (0..n).any(|i| (i + 1..n).any(|j| coef[packed_index(n, i, j)].iter().any(|&v| v != 0.0)));
        Ok(LaplaceOperator {
            grid,
            coef,
            sqrt_det,
            has_cross,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// √det g per node.
    pub fn volume_density(&self) -> &[f64] {
        &self.sqrt_det
    }

    /// out = L u at interior nodes, 0 on the boundary layer.
    pub fn apply_flux(&self, u: &[f64], out: &mut [f64]) {
        let grid = &self.grid;
        let n = grid.dim();
        let dims = grid.dims();
        let strides = grid.strides();
        let h = grid.spacing();
        let mut inv_h2 = [0.0; MAX_DIM];
        for a in 0..n {
            inv_h2[a] = 1.0 / (h[a] * h[a]);
        }
        grid.for_each_node(|lin, idx, _| {
            if idx.iter().zip(dims).any(|(&i, &d)| i == 0 || i + 1 == d) {
                out[lin] = 0.0;
                return;
            }
            let u0 = u[lin];
            let mut s = 0.0;
            for i in 0..n {
                let st = strides[i];
                let a = &self.coef[packed_index(n, i, i)];
                let ap = 0.5 * (a[lin] + a[lin + st]);
                let am = 0.5 * (a[lin] + a[lin - st]);
                s += (ap * (u[lin + st] - u0) - am * (u0 - u[lin - st])) * inv_h2[i];
            }
            if self.has_cross {
                for i in 0..n {
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        let a = &self.coef[packed_index(n, i, j)];
                        let (si, sj) = (strides[i], strides[j]);
                        let p = lin + si;
                        let m = lin - si;
                        let flux_p = a[p] * (u[p + sj] - u[p - sj]);
                        let flux_m = a[m] * (u[m + sj] - u[m - sj]);
                        s += (flux_p - flux_m) / (4.0 * h[i] * h[j]);
                    }
                }
            }
            out[lin] = s;
        });
    }

    /// Diagonal of −L at every node (zero on the boundary layer).
    pub fn negative_diagonal(&self) -> Vec<f64> {
        let grid = &self.grid;
        let n = grid.dim();
        let mut d = vec![0.0; grid.len()];
        grid.for_each_node(|lin, idx, _| {
            if grid.is_boundary(idx) {
                return;
            }
            let mut s = 0.0;
            for i in 0..n {
                let st = grid.strides()[i];
                let a = &self.coef[packed_index(n, i, i)];
                s += (0.5 * (a[lin] + a[lin + st]) + 0.5 * (a[lin] + a[lin - st]))
                    / (grid.spacing()[i] * grid.spacing()[i]);
            }
            d[lin] = s;
        });
        d
    }

    /// Δ_g u = L u / √det g.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_flux(u, &mut out);
        for (o, s) in out.iter_mut().zip(&self.sqrt_det) {
            *o /= s;
        }
        out
    }
}

/// Δ_g u = (1/√det g)·∂_i(√det g·g^{ij}∂_j u) at interior nodes; zero on
/// the outermost layer.
pub fn laplace_beltrami_apply(g: &MetricField, u: &ScalarField) -> Result<ScalarField> {
    if g.grid() != u.grid() {
        return Err(Error::Data("metric and function live on different grids".into()));
    }
    let op = LaplaceOperator::new(g)?;
    ScalarField::from_values(u.grid().clone(), op.apply(u.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::metric::{ClosureMetric, RadialConformalMetric, Regularity};
    use crate::linalg::Mat;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    #[test]
    fn constants_and_quadratics() {
        let grid = GridSpec::cube(3, 1.0, 0.1).unwrap();
        let g = MetricField::euclidean(grid.clone()).unwrap();
        let c = ScalarField::constant(grid.clone(), 3.0).unwrap();
        assert!(laplace_beltrami_apply(&g, &c)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let q = ScalarField::from_fn(grid.clone(), |x| x[0] * x[0]).unwrap();
        let l = laplace_beltrami_apply(&g, &q).unwrap();
        grid.for_each_node(|lin, idx, _| {
            if !grid.is_boundary(idx) {
                assert!((l.values()[lin] - 2.0).abs() < 1e-10);
            }
        });
    }

    #[test]
    fn conformally_flat_second_order() {
        // g = φ⁴δ in 3D: Δ_g u = φ^{-6} ∂_i(φ² ∂_i u)
        let phi = |r: f64| 1.0 + 0.3 * (-r * r).exp();
        let dphi = |r: f64| -0.6 * r * (-r * r).exp();
        let err = |h: f64| {
            let grid = GridSpec::cube(3, 1.0, h).unwrap();
            let g = MetricField::from_analytic(
                grid.clone(),
                Arc::new(RadialConformalMetric::new(
                    3,
                    Arc::new(move |r| (phi(r).powi(4), 4.0 * phi(r).powi(3) * dphi(r))),
                )),
                Regularity::Smooth,
            )
            .unwrap();
            let u = ScalarField::from_fn(grid.clone(), |x| x[0] * x[1] + x[2].sin()).unwrap();
            let l = laplace_beltrami_apply(&g, &u).unwrap();
            let mut e: f64 = 0.0;
            grid.for_each_node(|lin, idx, x| {
                if grid.is_boundary(idx) {
                    return;
                }
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let (p, dp) = (phi(r), dphi(r));
                let grad_u = [x[1], x[0], x[2].cos()];
                let lap_u = -x[2].sin();
                // ∂_i(φ² ∂_i u) = φ²Δu + 2φ φ' (x_i/r) ∂_i u
                let radial: f64 = (0..3).map(|i| x[i] / r * grad_u[i]).sum();
                let exact = (p * p * lap_u + 2.0 * p * dp * radial) / p.powi(6);
                e = e.max((l.values()[lin] - exact).abs());
            });
            e
        };
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }

    #[test]
    fn symmetric_in_weighted_product() {
        let grid = GridSpec::cube(3, 1.0, 0.1).unwrap();
        let g = MetricField::from_analytic(
            grid.clone(),
            Arc::new(ClosureMetric::new(3, |x| {
                let mut m = Mat::scalar(3, 1.5 + 0.2 * x[0]);
                m.set_sym(0, 1, 0.3 * x[2]);
                m.set_sym(1, 2, 0.1);
                m
            })),
            Regularity::Smooth,
        )
        .unwrap();
        let op = LaplaceOperator::new(&g).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut v = vec![0.0; grid.len()];
        let mut w = vec![0.0; grid.len()];
        grid.for_each_node(|lin, idx, _| {
            if !grid.is_boundary(idx) {
                v[lin] = rng.gen_range(-1.0..1.0);
                w[lin] = rng.gen_range(-1.0..1.0);
            }
        });
        let (lv, lw) = (op.apply(&v), op.apply(&w));
        let sg = op.volume_density();
        let a: f64 = (0..grid.len()).map(|i| sg[i] * lv[i] * w[i]).sum();
        let b: f64 = (0..grid.len()).map(|i| sg[i] * v[i] * lw[i]).sum();
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }
}
