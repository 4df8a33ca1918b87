use super::decomposition::{negative_part, scalar_pointwise, scalar_v_f, CurvatureDecomposition};
use crate::error::{Error, Result};
use crate::fields::norms::{quadrature_weights, weighted_lp};
use crate::fields::scalar::finite_difference_gradient;
use crate::fields::{GridSpec, MetricField, Region, ScalarField, ScalarFn};
use crate::special::{halton, HALTON_BASES};

/// Test density μ = f dx¹∧…∧dxⁿ with f compactly supported inside the grid.
#[derive(Clone, Debug)]
pub struct DensityTest {
    f: ScalarField,
    gradient: Option<Vec<ScalarField>>,
    nonnegative: bool,
}

impl DensityTest {
    /// Wraps sampled values; the support must avoid the outermost node layer.
    pub fn new(f: ScalarField, nonnegative: bool) -> Result<Self> {
        Self::with_gradient(f, None, nonnegative)
    }

    /// As [`new`](Self::new) with exact ∂_k f supplied by the caller.
    pub fn with_gradient(f: ScalarField, gradient: Option<Vec<ScalarField>>, nonnegative: bool) -> Result<Self> {
        let grid = f.grid().clone();
        let mut touching = None;
        grid.for_each_node(|lin, idx, _| {
            if touching.is_none() && grid.is_boundary(idx) && f.values()[lin] != 0.0 {
                touching = Some(idx.to_vec());
            }
        });
        if let Some(node) = touching {
            return Err(Error::Domain(format!(
                "density support touches the grid boundary at {node:?}"
            )));
        }
        if nonnegative && f.min() < 0.0 {
            return Err(Error::Argument(
                "density flagged nonnegative has negative values".into(),
            ));
        }
        if let Some(gr) = &gradient {
            if gr.len() != grid.dim() || gr.iter().any(|c| c.grid() != &grid) {
                return Err(Error::Data("density gradient has the wrong shape".into()));
            }
        }
        Ok(DensityTest {
            f,
            gradient,
            nonnegative,
        })
    }

    /// amplitude·exp(1 − 1/(1 − |x−c|²/r²)) on the ball B(c, r), with its
    /// exact gradient; the ball must lie strictly inside the grid box.
    pub fn bump(grid: &GridSpec, center: &[f64], radius: f64, amplitude: f64) -> Result<Self> {
        let n = grid.dim();
        if center.len() != n || !(radius > 0.0) {
            return Err(Error::Argument("bad bump center or radius".into()));
        }
        let inner = Region::cube(center, radius);
        inner.check_inside(grid)?;
        for k in 0..n {
            let margin = grid.spacing()[k];
            if center[k] - radius < grid.lower(k) + margin || center[k] + radius > grid.upper(k) - margin {
                return Err(Error::Domain("bump support touches the grid boundary".into()));
            }
        }
        let c = center.to_vec();
        let c2 = c.clone();
        let value = move |x: &[f64]| {
            let s: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (radius * radius);
            if s >= 1.0 {
                0.0
            } else {
                amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
            }
        };
        let f = ScalarField::from_fn(grid.clone(), value)?;
        let mut grads = Vec::with_capacity(n);
        for k in 0..n {
            let c = c2.clone();
            grads.push(ScalarField::from_fn(grid.clone(), move |x: &[f64]| {
                let s: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (radius * radius);
                if s >= 1.0 {
                    0.0
                } else {
                    let e = amplitude * (1.0 - 1.0 / (1.0 - s)).exp();
                    e * (-2.0 * (x[k] - c[k]) / (radius * radius)) / ((1.0 - s) * (1.0 - s))
                }
            })?);
        }
        Self::with_gradient(f, Some(grads), amplitude >= 0.0)
    }

    /// `count` nonnegative bumps of the given radius centered at
    /// [`bump_centers`].
    pub fn battery(grid: &GridSpec, region: &Region, count: usize, radius: f64) -> Result<Vec<Self>> {
        bump_centers(grid, region, count, radius)?
            .iter()
            .map(|c| Self::bump(grid, c, radius, 1.0))
            .collect()
    }

    pub fn values(&self) -> &ScalarField {
        &self.f
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    /// ∂_k f: exact when supplied, finite differences otherwise.
    pub fn gradient(&self) -> Vec<ScalarField> {
        match &self.gradient {
            Some(g) => g.clone(),
            None => finite_difference_gradient(&self.f),
        }
    }

    pub fn analytic(&self) -> Option<&ScalarFn> {
        self.f.analytic()
    }
}

/// `count` centers on a Halton sequence in `region`, shrunk so a ball of
/// `radius` plus two cells stays inside the grid.
pub fn bump_centers(grid: &GridSpec, region: &Region, count: usize, radius: f64) -> Result<Vec<Vec<f64>>> {
    let n = grid.dim();
    let margin = radius + 2.0 * grid.max_spacing();
    let mut bounds = Vec::with_capacity(n);
    for a in 0..n {
        let (mut l, mut u) = (grid.lower(a) + margin, grid.upper(a) - margin);
        if let Region::Box { lo, hi } = region {
            l = l.max(lo[a]);
            u = u.min(hi[a]);
        }
        if !(u >= l) {
            return Err(Error::Domain(format!(
                "no room for bumps of radius {radius} on axis {a}"
            )));
        }
        bounds.push((l, u));
    }
    Ok((0..count)
        .map(|k| {
            bounds
                .iter()
                .enumerate()
                .map(|(a, (l, u))| l + (u - l) * halton(k as u32 + 1, HALTON_BASES[a]))
                .collect()
        })
        .collect())
}

/// ∫ −V^k ∂_k f + F f dx by midpoint quadrature, from a precomputed (V, F).
pub fn pair_with_decomposition(dec: &CurvatureDecomposition, mu: &DensityTest) -> Result<f64> {
    let grid = mu.f.grid();
    if dec.f.grid() != grid {
        return Err(Error::Data("density and metric live on different grids".into()));
    }
    let grad = mu.gradient();
    let fv = mu.f.values();
    let mut s = 0.0;
    for lin in 0..grid.len() {
        let mut t = dec.f.values()[lin] * fv[lin];
        for (k, gk) in grad.iter().enumerate() {
            let d = gk.values()[lin];
            if d != 0.0 {
                t -= dec.v[k].values()[lin] * d;
            }
        }
        s += t;
    }
    Ok(s * grid.cell_volume())
}

/// ⟨R, μ⟩ = ∫ −V^k ∂_k f + F f dx for a metric of any regularity.
pub fn pair_distributional_scalar(g: &MetricField, mu: &DensityTest) -> Result<f64> {
    if g.grid() != mu.f.grid() {
        return Err(Error::Data("density and metric live on different grids".into()));
    }
    pair_with_decomposition(&scalar_v_f(g)?, mu)
}

/// ‖R[g_ε]₋‖_{L^{p/2}(region)} with the volume measure of `reference`
/// (usually the unsmoothed metric g, or g_ε itself).
pub fn negative_part_norm(g_eps: &MetricField, p: f64, region: &Region, reference: &MetricField) -> Result<f64> {
    let r = scalar_pointwise(g_eps)?;
    negative_part_norm_of(&r, p, region, reference)
}

/// As [`negative_part_norm`] from an already computed scalar curvature.
pub fn negative_part_norm_of(r: &ScalarField, p: f64, region: &Region, reference: &MetricField) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::Argument(format!("p = {p} must be at least 2")));
    }
    let w = quadrature_weights(r.grid(), region, Some(reference))?;
    weighted_lp(negative_part(r).values(), &w, 0.5 * p)
}
