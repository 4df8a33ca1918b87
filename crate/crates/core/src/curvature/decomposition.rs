use crate::error::{Error, Result};
use crate::fields::metric::{metric_derivatives_at, AnalyticMetric};
use crate::fields::scalar::axis_derivative;
use crate::fields::{MetricField, ScalarField};
use crate::linalg::{Mat, MAX_DIM};

/// Where first derivatives of the metric come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Closed-form derivatives when the metric provides them, otherwise
    /// finite differences.
    #[default]
    Auto,
    FiniteDifference,
    /// Closed-form derivatives only; errors when unavailable.
    Analytic,
}

/// Christoffel symbols Γ^k_ij at one point, indexed `[k][i][j]`.
pub type Christoffel = [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM];

/// Γ, V and F at one point.
#[derive(Clone, Debug)]
pub struct PointCurvature {
    pub n: usize,
    pub gamma: Christoffel,
    pub v: [f64; MAX_DIM],
    pub f: f64,
}

/// ∂_m g^{ij} = −g^{ia} ∂_m g_ab g^{bj}.
fn inverse_derivatives(ginv: &Mat, dg: &[Mat], n: usize) -> [Mat; MAX_DIM] {
    let mut out = [Mat::zeros(n); MAX_DIM];
    for m in 0..n {
        out[m] = ginv.mul(&dg[m]).mul(ginv).scale(-1.0);
    }
    out
}

/// Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij).
pub fn christoffel_from(ginv: &Mat, dg: &[Mat], n: usize) -> Christoffel {
    let mut lower = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (dg[i].get(j, l) + dg[j].get(i, l) - dg[l].get(i, j));
                lower[l][i][j] = v;
                lower[l][j][i] = v;
            }
        }
    }
    let mut gamma = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv.get(k, l) * lower[l][i][j];
                }
                gamma[k][i][j] = s;
                gamma[k][j][i] = s;
            }
        }
    }
    gamma
}

/// V and F from g and its first derivatives:
///
/// V^k = g^{ij}Γ^k_ij − g^{ik}Γ^j_ij,
/// F = −(∂_m g^{ij})Γ^m_ij + (∂_j g^{ij})Γ^m_im + g^{ij}Γ^m_ij Γ^k_km − g^{ij}Γ^m_ik Γ^k_jm,
///
/// so that R = ∂_k V^k + F. Returns `None` when g is not invertible.
pub fn point_curvature(g: &Mat, dg: &[Mat]) -> Option<PointCurvature> {
    let n = g.dim();
    let ginv = g.inverse()?;
    let dginv = inverse_derivatives(&ginv, dg, n);
    let gamma = christoffel_from(&ginv, dg, n);
    // contracted symbols Γ^m_im
    let mut trace = [0.0; MAX_DIM];
    for (i, t) in trace.iter_mut().enumerate().take(n) {
        for m in 0..n {
            *t += gamma[m][i][m];
        }
    }
    let mut v = [0.0; MAX_DIM];
    for k in 0..n {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += ginv.get(i, j) * gamma[k][i][j];
            }
            s -= ginv.get(i, k) * trace[i];
        }
        v[k] = s;
    }
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let gij = ginv.get(i, j);
            for m in 0..n {
                f -= dginv[m].get(i, j) * gamma[m][i][j];
                f += gij * gamma[m][i][j] * trace[m];
                for k in 0..n {
                    f -= gij * gamma[m][i][k] * gamma[k][j][m];
                }
            }
            f += dginv[j].get(i, j) * trace[i];
        }
    }
    Some(PointCurvature { n, gamma, v, f })
}

/// F assembled a second way, through Γ^m_im = ½∂_i log det g and with the
/// dummy indices of every term relabeled; agrees with [`point_curvature`]
/// up to rounding.
pub fn quadratic_part_alternative(g: &Mat, dg: &[Mat]) -> Option<f64> {
    let n = g.dim();
    let ginv = g.inverse()?;
    let dginv = inverse_derivatives(&ginv, dg, n);
    let gamma = christoffel_from(&ginv, dg, n);
    let mut half_dlogdet = [0.0; MAX_DIM];
    for (a, t) in half_dlogdet.iter_mut().enumerate().take(n) {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                s += ginv.get(p, q) * dg[a].get(p, q);
            }
        }
        *t = 0.5 * s;
    }
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    let mut t3 = 0.0;
    let mut t4 = 0.0;
    for a in 0..n {
        for p in 0..n {
            for q in 0..n {
                t1 += dginv[a].get(p, q) * gamma[a][p][q];
                t3 += ginv.get(p, q) * gamma[a][p][q] * half_dlogdet[a];
            }
            t2 += dginv[p].get(a, p) * half_dlogdet[a];
        }
    }
    // g^{ij}Γ^m_ik Γ^k_jm = tr over (m,k) of (A^m)_k-weighted products
    for m in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                let mut inner = 0.0;
                for j in 0..n {
                    inner += ginv.get(i, j) * gamma[k][j][m];
                }
                s += gamma[m][i][k] * inner;
            }
            t4 += s;
        }
    }
    Some(-t1 + t2 + t3 - t4)
}

/// V, F and optionally Γ sampled on the metric's grid, plus the pointwise
/// scalar curvature when the metric is tagged smooth.
#[derive(Clone, Debug)]
pub struct CurvatureDecomposition {
    pub v: Vec<ScalarField>,
    pub f: ScalarField,
    /// Γ^k_ij per node, flattened as `[lin][k][i][j]` with n³ entries per node.
    pub christoffel: Option<Vec<f64>>,
    pub scalar: Option<ScalarField>,
}

impl CurvatureDecomposition {
    /// Γ^k_ij at node `lin`, if stored.
    pub fn christoffel_at(&self, lin: usize, k: usize, i: usize, j: usize) -> Option<f64> {
        let n = self.v.len();
        self.christoffel
            .as_ref()
            .map(|c| c[lin * n * n * n + (k * n + i) * n + j])
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CurvatureOptions {
    pub derivatives: DerivativeMode,
    pub keep_christoffel: bool,
}

fn derivatives_at(
    g: &MetricField,
    mode: DerivativeMode,
    lin: usize,
    idx: &[usize],
    x: &[f64],
    out: &mut [Mat; MAX_DIM],
) -> Result<()> {
    match mode {
        DerivativeMode::Auto => metric_derivatives_at(g, lin, idx, x, true, out),
        DerivativeMode::FiniteDifference => metric_derivatives_at(g, lin, idx, x, false, out),
        DerivativeMode::Analytic => {
            let a = g
                .analytic()
                .filter(|a| a.has_gradient())
                .ok_or_else(|| Error::Contract("metric has no closed-form derivatives".into()))?;
            a.gradient(x, &mut out[..]);
        }
    }
    Ok(())
}

/// Samples V and F (and Γ on request) at every node.
pub fn scalar_v_f_with(g: &MetricField, opts: CurvatureOptions) -> Result<CurvatureDecomposition> {
    let grid = g.grid();
    let n = grid.dim();
    let len = grid.len();
    let mut v = vec![vec![0.0; len]; n];
    let mut f = vec![0.0; len];
    let mut gamma_store = if opts.keep_christoffel {
        Some(vec![0.0; len * n * n * n])
    } else {
        None
    };
    let mut dg = [Mat::zeros(n); MAX_DIM];
    let mut err = None;
    grid.for_each_node(|lin, idx, x| {
        if err.is_some() {
            return;
        }
        if let Err(e) = derivatives_at(g, opts.derivatives, lin, idx, x, &mut dg) {
            err = Some(e);
            return;
        }
        let Some(pc) = point_curvature(&g.at(lin), &dg[..n]) else {
            err = Some(Error::Degeneracy {
                node: idx.to_vec(),
                detail: "metric not invertible".into(),
            });
            return;
        };
        for k in 0..n {
            v[k][lin] = pc.v[k];
        }
        f[lin] = pc.f;
        if let Some(store) = gamma_store.as_mut() {
            let base = lin * n * n * n;
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        store[base + (k * n + i) * n + j] = pc.gamma[k][i][j];
                    }
                }
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let scalar = if g.regularity().is_smooth() {
        Some(divergence_plus(grid, &v, &f))
    } else {
        None
    };
    Ok(CurvatureDecomposition {
        v: v.into_iter()
            .map(|c| ScalarField::from_values(grid.clone(), c))
            .collect::<Result<_>>()?,
        f: ScalarField::from_values(grid.clone(), f)?,
        christoffel: gamma_store,
        scalar: scalar.map(|s| ScalarField::from_values(grid.clone(), s)).transpose()?,
    })
}

/// ∂_k V^k + F with central differences on V.
fn divergence_plus(grid: &crate::fields::GridSpec, v: &[Vec<f64>], f: &[f64]) -> Vec<f64> {
    let mut out = f.to_vec();
    for (k, vk) in v.iter().enumerate() {
        let d = axis_derivative(grid, vk, k);
        for (o, dv) in out.iter_mut().zip(&d) {
            *o += dv;
        }
    }
    out
}

/// V and F with default options (closed-form derivatives when available,
/// Γ not stored).
pub fn scalar_v_f(g: &MetricField) -> Result<CurvatureDecomposition> {
    scalar_v_f_with(g, CurvatureOptions::default())
}

/// Γ^k_ij at every node.
pub fn christoffel(g: &MetricField) -> Result<Vec<f64>> {
    let d = scalar_v_f_with(
        g,
        CurvatureOptions {
            keep_christoffel: true,
            ..Default::default()
        },
    )?;
    Ok(d.christoffel.expect("requested"))
}

/// Pointwise scalar curvature R = ∂_k V^k + F of a smooth metric.
pub fn scalar_pointwise(g: &MetricField) -> Result<ScalarField> {
    scalar_pointwise_with(g, DerivativeMode::Auto)
}

pub fn scalar_pointwise_with(g: &MetricField, mode: DerivativeMode) -> Result<ScalarField> {
    if !g.regularity().is_smooth() {
        return Err(Error::Contract(
            "pointwise scalar curvature needs a smooth metric; pair rough metrics with test densities instead".into(),
        ));
    }
    let d = scalar_v_f_with(
        g,
        CurvatureOptions {
            derivatives: mode,
            keep_christoffel: false,
        },
    )?;
    Ok(d.scalar.expect("smooth metric"))
}

/// V and F at an arbitrary point from a closed-form metric with derivatives.
pub fn point_v_f(a: &dyn AnalyticMetric, x: &[f64]) -> Result<([f64; MAX_DIM], f64)> {
    let n = a.dim();
    let mut dg = [Mat::zeros(n); MAX_DIM];
    if !a.has_gradient() || !a.gradient(x, &mut dg[..]) {
        return Err(Error::Domain(
            "metric has no closed-form derivatives for off-grid values".into(),
        ));
    }
    let pc = point_curvature(&a.eval(x), &dg[..n])
        .ok_or_else(|| Error::Domain(format!("metric not invertible at {x:?}")))?;
    Ok((pc.v, pc.f))
}

/// max(−R, 0) node-wise.
pub fn negative_part(r: &ScalarField) -> ScalarField {
    r.map(|v| if v < 0.0 { -v } else { 0.0 }).expect("finite input")
}
