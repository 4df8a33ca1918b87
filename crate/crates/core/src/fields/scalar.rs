use std::fmt;
use std::sync::Arc;

use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Closed-form evaluator usable at any point of ℝⁿ.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Real values sampled at every node of a grid, optionally backed by a
/// closed form that extends the field beyond the box.
#[derive(Clone)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
    analytic: Option<ScalarFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dims", &self.grid.dims())
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Data(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value at node {:?}",
                &grid.multi_index(i)[..grid.dim()]
            )));
        }
        Ok(ScalarField {
            grid,
            values,
            analytic: None,
        })
    }

    /// Samples `f` at every node and keeps it as the analytic extension.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::from_analytic(grid, Arc::new(f))
    }

    pub fn from_analytic(grid: GridSpec, f: ScalarFn) -> Result<Self> {
        let mut values = vec![0.0; grid.len()];
        grid.for_each_node(|lin, _, x| values[lin] = f(x));
        let mut s = Self::from_values(grid, values)?;
        s.analytic = Some(f);
        Ok(s)
    }

    pub fn constant(grid: GridSpec, c: f64) -> Result<Self> {
        Self::from_fn(grid, move |_| c)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let len = grid.len();
        ScalarField {
            grid,
            values: vec![0.0; len],
            analytic: None,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn analytic(&self) -> Option<&ScalarFn> {
        self.analytic.as_ref()
    }

    /// Attaches a closed form; values are left untouched.
    pub fn with_analytic(mut self, f: ScalarFn) -> Self {
        self.analytic = Some(f);
        self
    }

    pub fn without_analytic(mut self) -> Self {
        self.analytic = None;
        self
    }

    /// Value at an arbitrary point via the closed form.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        self.analytic.as_ref().map(|f| f(x))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Node-wise map; drops the closed form.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::from_values(
            self.grid.clone(),
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    /// `c·f`, keeping a scaled closed form.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut s = self.map(|v| c * v)?;
        if let Some(f) = &self.analytic {
            let f = f.clone();
            s.analytic = Some(Arc::new(move |x| c * f(x)));
        }
        Ok(s)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Data("fields live on different grids".into()));
        }
        Ok(())
    }
}

/// Derivative along `axis` of node values: central differences inside,
/// second-order one-sided stencils on the two boundary layers.
pub fn axis_derivative(grid: &GridSpec, values: &[f64], axis: usize) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let h = grid.spacing()[axis];
    let s = grid.strides()[axis];
    let d = grid.dims()[axis];
    let inv2h = 1.0 / (2.0 * h);
    grid.for_each_node(|lin, idx, _| {
        let i = idx[axis];
        out[lin] = if i == 0 {
            (4.0 * (values[lin + s] - values[lin]) - (values[lin + 2 * s] - values[lin])) * inv2h
        } else if i + 1 == d {
            (4.0 * (values[lin] - values[lin - s]) - (values[lin] - values[lin - 2 * s])) * inv2h
        } else {
            (values[lin + s] - values[lin - s]) * inv2h
        };
    });
    out
}

/// Component k approximates ∂_k f (second order in h).
pub fn finite_difference_gradient(f: &ScalarField) -> Vec<ScalarField> {
    let grid = f.grid();
    (0..grid.dim())
        .map(|k| ScalarField {
            grid: grid.clone(),
            values: axis_derivative(grid, f.values(), k),
            analytic: None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let g = GridSpec::cube(1, 1.0, 0.5).unwrap();
        assert!(ScalarField::from_values(g.clone(), vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(ScalarField::from_values(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn analytic_matches_samples() {
        let g = GridSpec::cube(2, 1.0, 0.25).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| x[0] * x[1]).unwrap();
        g.for_each_node(|lin, _, x| assert_eq!(f.values()[lin], f.eval(x).unwrap()));
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let g = GridSpec::cube(3, 1.0, 0.25).unwrap();
        let f = ScalarField::constant(g, 3.7).unwrap();
        for c in finite_difference_gradient(&f) {
            assert_eq!(c.max_abs(), 0.0);
        }
    }

    #[test]
    fn gradient_bilinear_exact() {
        let g = GridSpec::cube(3, 1.0, 0.125).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| x[0] * x[1]).unwrap();
        let grad = finite_difference_gradient(&f);
        g.for_each_node(|lin, idx, x| {
            if g.is_boundary(idx) {
                return;
            }
            assert!((grad[0].values()[lin] - x[1]).abs() < 1e-14);
            assert!((grad[1].values()[lin] - x[0]).abs() < 1e-14);
            assert!(grad[2].values()[lin].abs() < 1e-14);
        });
    }

    #[test]
    fn gradient_second_order() {
        let err = |h: f64| {
            let g = GridSpec::cube(1, 1.0, h).unwrap();
            let f = ScalarField::from_fn(g.clone(), |x| x[0].sin()).unwrap();
            let d = &finite_difference_gradient(&f)[0];
            let mut e: f64 = 0.0;
            g.for_each_node(|lin, idx, x| {
                if !g.is_boundary(idx) {
                    e = e.max((d.values()[lin] - x[0].cos()).abs());
                }
            });
            e
        };
        let (e1, e2) = (err(0.05), err(0.025));
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }
}
