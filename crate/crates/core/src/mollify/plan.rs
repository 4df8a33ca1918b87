use std::sync::Arc;

use super::convolve::{check_dim, kernel_sum, pad_many};
use super::kernel::{DiscreteKernel, MollifierKernel};
use crate::error::{Error, Result};
use crate::fields::metric::{packed_index, packed_len, AnalyticMetric};
use crate::fields::{GridSpec, MetricField, Region, Regularity, ScalarField, ScalarFn, SymTensorField};
use crate::linalg::{Mat, MAX_DIM};

/// Convolves every packed component of `g` at the nodes selected by `mask`.
/// Off-grid values come from the analytic evaluator. Identical components
/// are convolved once and identically zero components are skipped.
fn convolve_components(g: &MetricField, dk: &DiscreteKernel, mask: Option<&[bool]>) -> Result<Vec<Vec<f64>>> {
    let grid = g.grid();
    let n = grid.dim();
    let a = g
        .analytic()
        .ok_or_else(|| Error::Domain("mollifying a metric needs an analytic evaluator for padding".into()))?
        .clone();
    let comps: Vec<&[f64]> = g.tensor().packed().iter().map(|c| c.as_slice()).collect();
    let padded = pad_many(grid, &comps, dk.reach(), |x, out| {
        let m = a.eval(x);
        for i in 0..n {
            for j in i..n {
                out[packed_index(n, i, j)] = m.get(i, j);
            }
        }
    });
    let mut results: Vec<Vec<f64>> = Vec::with_capacity(padded.len());
    for c in 0..padded.len() {
        if padded[c].data.iter().all(|&v| v == 0.0) {
            results.push(vec![0.0; grid.len()]);
            continue;
        }
        if let Some(prev) = (0..c).find(|&p| padded[p].data == padded[c].data) {
            let r = results[prev].clone();
            results.push(r);
            continue;
        }
        results.push(kernel_sum(grid, &padded[c], dk, dk.weights(), mask, true));
    }
    Ok(results)
}

fn degeneracy_with_eps(e: Error, eps: f64) -> Error {
    match e {
        Error::Degeneracy { node, detail } => Error::Degeneracy {
            node,
            detail: format!("{detail} after mollification at eps = {eps}"),
        },
        other => other,
    }
}

/// Componentwise g∗ρ_ε on the grid of `g`.
///
/// The result is tagged smooth and carries a point evaluator that applies
/// the same lattice kernel to the analytic form of `g`.
pub fn mollify_metric(g: &MetricField, kernel: &MollifierKernel, eps: f64) -> Result<MetricField> {
    check_dim(g.grid(), kernel)?;
    let dk = kernel.discrete(eps, g.grid().spacing())?;
    let comps = convolve_components(g, &dk, None)?;
    let tensor = SymTensorField::new(g.grid().clone(), comps)?;
    let out = MetricField::from_tensor(tensor, Regularity::Smooth).map_err(|e| degeneracy_with_eps(e, eps))?;
    let base = g.analytic().expect("checked above").clone();
    Ok(out.with_analytic(Arc::new(MollifiedMetric { base, kernel: dk })))
}

/// Point evaluator of g∗ρ_ε by lattice quadrature of the analytic metric.
pub struct MollifiedMetric {
    base: Arc<dyn AnalyticMetric>,
    kernel: Arc<DiscreteKernel>,
}

impl MollifiedMetric {
    pub fn new(base: Arc<dyn AnalyticMetric>, kernel: Arc<DiscreteKernel>) -> Self {
        MollifiedMetric { base, kernel }
    }
}

impl AnalyticMetric for MollifiedMetric {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, x: &[f64]) -> Mat {
        let n = self.dim();
        let g0 = self.base.eval(x);
        let mut acc = Mat::zeros(n);
        let mut y = [0.0; MAX_DIM];
        for (k, w) in self.kernel.weights().iter().enumerate() {
            for a in 0..n {
                y[a] = x[a] - self.kernel.position(k, a);
            }
            acc = acc.add(&self.base.eval(&y[..n]).sub(&g0).scale(*w));
        }
        g0.add(&acc)
    }
}

/// Localized smoothing data: the non-smooth box K, the scale ε, and a
/// cutoff χ equal to 1 on K and 0 outside the closed ε-neighbourhood K_ε.
///
/// χ is the indicator of the ε/2-neighbourhood of K mollified at scale ε/2
/// with the lattice kernel of the grid.
#[derive(Clone)]
pub struct SmoothingPlan {
    region: Region,
    eps: f64,
    chi: ScalarField,
    chi_fn: ScalarFn,
}

impl std::fmt::Debug for SmoothingPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothingPlan")
            .field("region", &self.region)
            .field("eps", &self.eps)
            .finish()
    }
}

impl SmoothingPlan {
    pub fn new(grid: &GridSpec, region: Region, eps: f64, kernel: &MollifierKernel) -> Result<Self> {
        check_dim(grid, kernel)?;
        if !matches!(region, Region::Box { .. }) {
            return Err(Error::Argument("the non-smooth set K must be a box".into()));
        }
        if !(eps > 0.0) {
            return Err(Error::Argument(format!("eps = {eps} must be positive")));
        }
        region.grown(eps).check_inside(grid)?;
        let dk = kernel.discrete_unchecked(0.5 * eps, grid.spacing())?;
        let k2 = region.clone();
        let chi_fn: ScalarFn = Arc::new(move |x: &[f64]| {
            let d = k2.distance(x);
            if d == 0.0 {
                return 1.0;
            }
            if d >= eps {
                return 0.0;
            }
            let half = 0.5 * eps;
            let v = dk.apply_at(x, |z| if k2.distance(z) <= half { 1.0 } else { 0.0 });
            v.clamp(0.0, 1.0)
        });
        let chi = ScalarField::from_analytic(grid.clone(), chi_fn.clone())?;
        Ok(SmoothingPlan {
            region,
            eps,
            chi,
            chi_fn,
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn cutoff(&self) -> &ScalarField {
        &self.chi
    }

    pub fn cutoff_fn(&self) -> &ScalarFn {
        &self.chi_fn
    }

    /// Membership in the closed ε-neighbourhood of K.
    pub fn in_fattened(&self, x: &[f64]) -> bool {
        self.region.distance(x) <= self.eps
    }

    /// Node mask of K_ε.
    pub fn fattened_mask(&self) -> Vec<bool> {
        let grid = self.chi.grid();
        let mut m = vec![false; grid.len()];
        grid.for_each_node(|lin, _, x| m[lin] = self.in_fattened(x));
        m
    }
}

/// g_ε = (1−χ)·g + χ·(g∗ρ_ε), with g_ε = g bit for bit wherever χ = 0.
pub fn build_g_eps(g: &MetricField, plan: &SmoothingPlan, kernel: &MollifierKernel) -> Result<MetricField> {
    let grid = g.grid();
    if grid != plan.cutoff().grid() {
        return Err(Error::Data("plan and metric live on different grids".into()));
    }
    let eps = plan.eps();
    let dk = kernel.discrete(eps, grid.spacing())?;
    let chi = plan.cutoff().values();
    let mask: Vec<bool> = chi.iter().map(|&c| c != 0.0).collect();
    let conv = convolve_components(g, &dk, Some(&mask))?;
    let n = grid.dim();
    let mut comps = vec![vec![0.0; grid.len()]; packed_len(n)];
    for (c, out) in comps.iter_mut().enumerate() {
        let orig = &g.tensor().packed()[c];
        for lin in 0..grid.len() {
            let x = chi[lin];
            out[lin] = if x == 0.0 {
                orig[lin]
            } else if x == 1.0 {
                conv[c][lin]
            } else {
                (1.0 - x) * orig[lin] + x * conv[c][lin]
            };
        }
    }
    let tensor = SymTensorField::new(grid.clone(), comps)?;
    let out = MetricField::from_tensor(tensor, Regularity::Smooth).map_err(|e| degeneracy_with_eps(e, eps))?;
    let base = g.analytic().expect("checked by convolution").clone();
    Ok(out.with_analytic(Arc::new(BlendedMetric {
        base: base.clone(),
        smooth: MollifiedMetric::new(base, dk),
        chi: plan.cutoff_fn().clone(),
    })))
}

/// Point evaluator of g_ε for sampling on other grids.
pub struct BlendedMetric {
    base: Arc<dyn AnalyticMetric>,
    smooth: MollifiedMetric,
    chi: ScalarFn,
}

impl AnalyticMetric for BlendedMetric {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, x: &[f64]) -> Mat {
        let c = (self.chi)(x);
        if c == 0.0 {
            self.base.eval(x)
        } else if c == 1.0 {
            self.smooth.eval(x)
        } else {
            self.base.eval(x).scale(1.0 - c).add(&self.smooth.eval(x).scale(c))
        }
    }
}

/// Smallest ρ ≥ 1 with ρ⁻¹g₂ ≤ g ≤ ρg₂ at every node, and where it is attained.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceFactor {
    pub rho: f64,
    pub argmax: Vec<usize>,
}

pub fn metric_equivalence_factor(g: &MetricField, g2: &MetricField) -> Result<EquivalenceFactor> {
    if g.grid() != g2.grid() {
        return Err(Error::Data("metrics live on different grids".into()));
    }
    let grid = g.grid();
    let n = grid.dim();
    let mut best = 1.0;
    let mut arg = 0;
    for lin in 0..grid.len() {
        let (a, b) = (g.at(lin), g2.at(lin));
        if a == b {
            continue;
        }
        let degenerate = || Error::Degeneracy {
            node: grid.multi_index(lin)[..n].to_vec(),
            detail: "generalized eigenvalue undefined".into(),
        };
        let l1 = a.max_generalized_eigenvalue(&b).ok_or_else(degenerate)?;
        let l2 = b.max_generalized_eigenvalue(&a).ok_or_else(degenerate)?;
        let r = l1.max(l2);
        if r > best {
            best = r;
            arg = lin;
        }
    }
    Ok(EquivalenceFactor {
        rho: best,
        argmax: grid.multi_index(arg)[..n].to_vec(),
    })
}
