use std::fmt;
use std::sync::Arc;

use super::grid::GridSpec;
use super::scalar::ScalarField;
use crate::error::{Error, Result};
use crate::linalg::{Mat, MAX_DIM};

/// Closed-form metric g_ij(x), optionally with exact first derivatives.
pub trait AnalyticMetric: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Mat;

    /// Writes ∂_l g_ij(x) into `out[l]`; returns false when no closed-form
    /// derivative is available.
    fn gradient(&self, _x: &[f64], _out: &mut [Mat]) -> bool {
        false
    }

    fn has_gradient(&self) -> bool {
        false
    }
}

/// Radial profile value and derivative, `r ↦ (ψ(r), ψ'(r))`.
pub type RadialProfile = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Conformally flat metric ψ(|x|)·δ with an exact radial derivative.
#[derive(Clone)]
pub struct RadialConformalMetric {
    n: usize,
    profile: RadialProfile,
}

impl RadialConformalMetric {
    pub fn new(n: usize, profile: RadialProfile) -> Self {
        RadialConformalMetric { n, profile }
    }

    pub fn profile(&self, r: f64) -> (f64, f64) {
        (self.profile)(r)
    }
}

impl AnalyticMetric for RadialConformalMetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> Mat {
        let r = radius(&x[..self.n]);
        Mat::scalar(self.n, (self.profile)(r).0)
    }

    fn gradient(&self, x: &[f64], out: &mut [Mat]) -> bool {
        let r = radius(&x[..self.n]);
        let dpsi = (self.profile)(r).1;
        for l in 0..self.n {
            let dl = if r > 0.0 { dpsi * x[l] / r } else { 0.0 };
            out[l] = Mat::scalar(self.n, dl);
        }
        true
    }

    fn has_gradient(&self) -> bool {
        true
    }
}

type MatFn = Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>;

/// Metric given by a closure, without derivatives.
#[derive(Clone)]
pub struct ClosureMetric {
    n: usize,
    f: MatFn,
}

impl ClosureMetric {
    pub fn new(n: usize, f: impl Fn(&[f64]) -> Mat + Send + Sync + 'static) -> Self {
        ClosureMetric { n, f: Arc::new(f) }
    }
}

impl AnalyticMetric for ClosureMetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> Mat {
        (self.f)(x)
    }
}

#[inline]
pub fn radius(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Regularity class of a metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularity {
    Smooth,
    /// C⁰ ∩ W^{1,p}.
    Rough {
        p: f64,
    },
}

impl Regularity {
    pub fn is_smooth(&self) -> bool {
        matches!(self, Regularity::Smooth)
    }
}

/// Number of stored components of a symmetric n×n tensor.
#[inline]
pub fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Packed index of (i, j) in the upper triangle.
#[inline]
pub fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows 0..i hold sum_{r<i} (n - r) entries
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

/// Symmetric two-tensor sampled on a grid; symmetry holds by storage.
#[derive(Clone, Debug)]
pub struct SymTensorField {
    grid: GridSpec,
    comps: Vec<Vec<f64>>,
}

impl SymTensorField {
    pub fn new(grid: GridSpec, comps: Vec<Vec<f64>>) -> Result<Self> {
        let n = grid.dim();
        if comps.len() != packed_len(n) || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Data("component count or length mismatch".into()));
        }
        for c in &comps {
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "non-finite tensor component at node {:?}",
                    &grid.multi_index(i)[..n]
                )));
            }
        }
        Ok(SymTensorField { grid, comps })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Mat) -> Result<Self> {
        let n = grid.dim();
        let mut comps = vec![vec![0.0; grid.len()]; packed_len(n)];
        grid.for_each_node(|lin, _, x| {
            let m = f(x);
            for i in 0..n {
                for j in i..n {
                    comps[packed_index(n, i, j)][lin] = m.get(i, j);
                }
            }
        });
        Self::new(grid, comps)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn component(&self, i: usize, j: usize) -> &[f64] {
        &self.comps[packed_index(self.dim(), i, j)]
    }

    pub fn component_field(&self, i: usize, j: usize) -> ScalarField {
        ScalarField::from_values(self.grid.clone(), self.component(i, j).to_vec())
            .expect("stored components are finite")
    }

    pub fn packed(&self) -> &[Vec<f64>] {
        &self.comps
    }

    #[inline]
    pub fn at(&self, lin: usize) -> Mat {
        let n = self.dim();
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set_sym(i, j, self.comps[packed_index(n, i, j)][lin]);
            }
        }
        m
    }

    pub fn sub(&self, other: &SymTensorField) -> Result<SymTensorField> {
        if self.grid != other.grid {
            return Err(Error::Data("tensors live on different grids".into()));
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        SymTensorField::new(self.grid.clone(), comps)
    }

    /// Euclidean (Frobenius) norm of the tensor at every node.
    pub fn frobenius(&self) -> ScalarField {
        let n = self.dim();
        let mut out = vec![0.0; self.grid.len()];
        for (lin, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let v = self.comps[packed_index(n, i, j)][lin];
                    s += v * v;
                }
            }
            *o = s.sqrt();
        }
        ScalarField::from_values(self.grid.clone(), out).expect("finite")
    }
}

/// Riemannian metric sampled on a grid.
#[derive(Clone)]
pub struct MetricField {
    tensor: SymTensorField,
    analytic: Option<Arc<dyn AnalyticMetric>>,
    regularity: Regularity,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("dims", &self.grid().dims())
            .field("regularity", &self.regularity)
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

impl MetricField {
    /// Wraps sampled components after checking positive-definiteness.
    pub fn from_tensor(tensor: SymTensorField, regularity: Regularity) -> Result<Self> {
        check_positive_definite(&tensor)?;
        Ok(MetricField {
            tensor,
            analytic: None,
            regularity,
        })
    }

    pub fn from_analytic(grid: GridSpec, analytic: Arc<dyn AnalyticMetric>, regularity: Regularity) -> Result<Self> {
        if analytic.dim() != grid.dim() {
            return Err(Error::Data("metric and grid dimensions differ".into()));
        }
        let tensor = SymTensorField::from_fn(grid, |x| analytic.eval(x))?;
        let mut g = Self::from_tensor(tensor, regularity)?;
        g.analytic = Some(analytic);
        Ok(g)
    }

    /// Euclidean metric δ on `grid`.
    pub fn euclidean(grid: GridSpec) -> Result<Self> {
        let n = grid.dim();
        Self::from_analytic(
            grid,
            Arc::new(ClosureMetric::new(n, move |_| Mat::identity(n))),
            Regularity::Smooth,
        )
    }

    pub fn with_analytic(mut self, analytic: Arc<dyn AnalyticMetric>) -> Self {
        self.analytic = Some(analytic);
        self
    }

    pub fn without_analytic(mut self) -> Self {
        self.analytic = None;
        self
    }

    pub fn with_regularity(mut self, regularity: Regularity) -> Self {
        self.regularity = regularity;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        self.tensor.grid()
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn tensor(&self) -> &SymTensorField {
        &self.tensor
    }

    pub fn analytic(&self) -> Option<&Arc<dyn AnalyticMetric>> {
        self.analytic.as_ref()
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    #[inline]
    pub fn at(&self, lin: usize) -> Mat {
        self.tensor.at(lin)
    }

    pub fn component(&self, i: usize, j: usize) -> &[f64] {
        self.tensor.component(i, j)
    }

    /// √det g at every node.
    pub fn volume_density(&self) -> Vec<f64> {
        (0..self.grid().len()).map(|lin| self.at(lin).det().sqrt()).collect()
    }

    /// Contravariant components g^{ij} (see [`metric_inverse`]).
    pub fn inverse(&self) -> Result<SymTensorField> {
        metric_inverse(self)
    }
}

fn check_positive_definite(t: &SymTensorField) -> Result<()> {
    let n = t.dim();
    for lin in 0..t.grid().len() {
        let m = t.at(lin);
        if m.cholesky().is_none() {
            return Err(Error::Degeneracy {
                node: t.grid().multi_index(lin)[..n].to_vec(),
                detail: "metric is not positive-definite".into(),
            });
        }
    }
    Ok(())
}

/// Node-wise inverse g^{ij} via the adjugate formula.
pub fn metric_inverse(g: &MetricField) -> Result<SymTensorField> {
    let n = g.dim();
    let grid = g.grid();
    let mut comps = vec![vec![0.0; grid.len()]; packed_len(n)];
    for lin in 0..grid.len() {
        let m = g.at(lin);
        let inv = m
            .cholesky()
            .and_then(|_| m.inverse())
            .ok_or_else(|| Error::Degeneracy {
                node: grid.multi_index(lin)[..n].to_vec(),
                detail: "cannot invert a non-positive-definite metric".into(),
            })?;
        for i in 0..n {
            for j in i..n {
                comps[packed_index(n, i, j)][lin] = inv.get(i, j);
            }
        }
    }
    SymTensorField::new(grid.clone(), comps)
}

/// First derivatives ∂_l g_ij at node `lin`, from the closed form when one
/// is attached and `prefer_analytic` is set, otherwise by finite differences
/// (central inside, second-order one-sided on the boundary layers).
pub fn metric_derivatives_at(
    g: &MetricField,
    lin: usize,
    idx: &[usize],
    x: &[f64],
    prefer_analytic: bool,
    out: &mut [Mat; MAX_DIM],
) {
    if prefer_analytic {
        if let Some(a) = g.analytic() {
            if a.has_gradient() && a.gradient(x, &mut out[..]) {
                return;
            }
        }
    }
    let n = g.dim();
    let grid = g.grid();
    for l in 0..n {
        let s = grid.strides()[l];
        let d = grid.dims()[l];
        let inv2h = 0.5 / grid.spacing()[l];
        let i = idx[l];
        let mut m = Mat::zeros(n);
        for a in 0..n {
            for b in a..n {
                let c = g.component(a, b);
                let v = if i == 0 {
                    (4.0 * (c[lin + s] - c[lin]) - (c[lin + 2 * s] - c[lin])) * inv2h
                } else if i + 1 == d {
                    (4.0 * (c[lin] - c[lin - s]) - (c[lin] - c[lin - 2 * s])) * inv2h
                } else {
                    (c[lin + s] - c[lin - s]) * inv2h
                };
                m.set_sym(a, b, v);
            }
        }
        out[l] = m;
    }
}
