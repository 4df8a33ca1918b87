use super::kernel::{DiscreteKernel, MollifierKernel};
use crate::error::{Error, Result};
use crate::fields::{GridSpec, ScalarField};
use crate::linalg::MAX_DIM;

/// How values beyond the grid box are supplied to a convolution.
#[derive(Clone, Copy)]
pub enum Padding<'a> {
    /// Use the field's own analytic evaluator.
    Analytic,
    /// Extend by a constant.
    Constant(f64),
    /// Evaluate an external closure.
    Function(&'a dyn Fn(&[f64]) -> f64),
}

/// Grid values surrounded by `reach` extra layers per axis.
pub(crate) struct Padded {
    pub strides: Vec<usize>,
    pub reach: Vec<usize>,
    pub data: Vec<f64>,
}

/// Coordinate of (possibly out-of-box) node index `i` along `axis`.
#[inline]
fn coord_ext(grid: &GridSpec, axis: usize, i: isize) -> f64 {
    let off = if grid.is_cell_centered() { 0.5 } else { 0.0 };
    grid.lower(axis) + (i as f64 + off) * grid.spacing()[axis]
}

/// Builds padded copies of several arrays at once; `fill(x, out)` writes
/// the off-grid values of every array at x.
pub(crate) fn pad_many(
    grid: &GridSpec,
    arrays: &[&[f64]],
    reach: &[usize],
    mut fill: impl FnMut(&[f64], &mut [f64]),
) -> Vec<Padded> {
    let n = grid.dim();
    let pdims: Vec<usize> = (0..n).map(|a| grid.dims()[a] + 2 * reach[a]).collect();
    let mut strides = vec![1; n];
    for a in (0..n - 1).rev() {
        strides[a] = strides[a + 1] * pdims[a + 1];
    }
    let total: usize = pdims.iter().product();
    let m = arrays.len();
    let mut data = vec![vec![0.0; total]; m];
    let mut idx = [0usize; MAX_DIM];
    let mut x = [0.0; MAX_DIM];
    let mut vals = vec![0.0; m];
    for lin in 0..total {
        let mut inside = true;
        let mut glin = 0;
        for a in 0..n {
            let i = idx[a] as isize - reach[a] as isize;
            if i < 0 || i >= grid.dims()[a] as isize {
                inside = false;
            } else {
                glin += i as usize * grid.strides()[a];
            }
        }
        if inside {
            for (d, arr) in data.iter_mut().zip(arrays) {
                d[lin] = arr[glin];
            }
        } else {
            for a in 0..n {
                x[a] = coord_ext(grid, a, idx[a] as isize - reach[a] as isize);
            }
            fill(&x[..n], &mut vals);
            for (d, v) in data.iter_mut().zip(&vals) {
                d[lin] = *v;
            }
        }
        let mut a = n;
        while a > 0 {
            a -= 1;
            idx[a] += 1;
            if idx[a] < pdims[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    data.into_iter()
        .map(|d| Padded {
            strides: strides.clone(),
            reach: reach.to_vec(),
            data: d,
        })
        .collect()
}

/// Σ_k w_k·(P(x − y_k) − P(x)), plus P(x) when `add_center`; nodes outside
/// `mask` keep P(x) (or 0 without the center term).
pub(crate) fn kernel_sum(
    grid: &GridSpec,
    padded: &Padded,
    kernel: &DiscreteKernel,
    weights: &[f64],
    mask: Option<&[bool]>,
    add_center: bool,
) -> Vec<f64> {
    let n = grid.dim();
    let offs: Vec<isize> = kernel
        .offsets()
        .iter()
        .map(|o| {
            -(0..n)
                .map(|a| o[a] as isize * padded.strides[a] as isize)
                .sum::<isize>()
        })
        .collect();
    let p = &padded.data;
    let mut out = vec![0.0; grid.len()];
    grid.for_each_node(|lin, idx, _| {
        let base: usize = (0..n).map(|a| (idx[a] + padded.reach[a]) * padded.strides[a]).sum();
        let c = p[base];
        if mask.is_none_or(|m| m[lin]) {
            let mut s = 0.0;
            for (w, &o) in weights.iter().zip(&offs) {
                s += w * (p[(base as isize + o) as usize] - c);
            }
            out[lin] = if add_center { c + s } else { s };
        } else {
            out[lin] = if add_center { c } else { 0.0 };
        }
    });
    out
}

fn padded_field(f: &ScalarField, kernel: &DiscreteKernel, padding: Padding) -> Result<Padded> {
    let grid = f.grid();
    let reach = kernel.reach();
    let mut out = match padding {
        Padding::Analytic => {
            let a = f
                .analytic()
                .ok_or_else(|| {
                    Error::Domain("convolution needs off-grid padding: field has no analytic evaluator".into())
                })?
                .clone();
            pad_many(grid, &[f.values()], reach, |x, v| v[0] = a(x))
        }
        Padding::Constant(c) => pad_many(grid, &[f.values()], reach, |_, v| v[0] = c),
        Padding::Function(g) => pad_many(grid, &[f.values()], reach, |x, v| v[0] = g(x)),
    };
    Ok(out.pop().expect("one array"))
}

/// (f∗ρ_ε) at every node, padding with the field's analytic evaluator.
pub fn convolve(f: &ScalarField, kernel: &MollifierKernel, eps: f64) -> Result<ScalarField> {
    convolve_padded(f, kernel, eps, Padding::Analytic)
}

pub fn convolve_padded(f: &ScalarField, kernel: &MollifierKernel, eps: f64, padding: Padding) -> Result<ScalarField> {
    check_dim(f.grid(), kernel)?;
    let dk = kernel.discrete(eps, f.grid().spacing())?;
    let p = padded_field(f, &dk, padding)?;
    ScalarField::from_values(
        f.grid().clone(),
        kernel_sum(f.grid(), &p, &dk, dk.weights(), None, true),
    )
}

/// ∂_j(f∗ρ_ε) = f∗∂_jρ_ε at every node; the derivative lands on the kernel.
pub fn convolve_derivative(f: &ScalarField, kernel: &MollifierKernel, eps: f64, j: usize) -> Result<ScalarField> {
    convolve_derivative_padded(f, kernel, eps, j, Padding::Analytic)
}

pub fn convolve_derivative_padded(
    f: &ScalarField,
    kernel: &MollifierKernel,
    eps: f64,
    j: usize,
    padding: Padding,
) -> Result<ScalarField> {
    check_dim(f.grid(), kernel)?;
    if j >= f.grid().dim() {
        return Err(Error::Argument(format!("axis {j} out of range")));
    }
    let dk = kernel.discrete(eps, f.grid().spacing())?;
    let p = padded_field(f, &dk, padding)?;
    ScalarField::from_values(
        f.grid().clone(),
        kernel_sum(f.grid(), &p, &dk, dk.derivative_weights(j), None, false),
    )
}

pub(crate) fn check_dim(grid: &GridSpec, kernel: &MollifierKernel) -> Result<()> {
    if grid.dim() != kernel.dim() {
        return Err(Error::Argument(format!(
            "kernel dimension {} differs from grid dimension {}",
            kernel.dim(),
            grid.dim()
        )));
    }
    Ok(())
}
