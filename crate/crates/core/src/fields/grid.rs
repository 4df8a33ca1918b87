use crate::error::{Error, Result};
use crate::linalg::MAX_DIM;

/// Uniform tensor-product grid on the box `origin ± half_width`.
///
/// Cell-centered grids (the default) place nodes at the centres of the
/// `2L/h` cells per axis, so a box symmetric about a point never has a node
/// on that point. Node storage is row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    origin: Vec<f64>,
    half_width: Vec<f64>,
    spacing: Vec<f64>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    cell_centered: bool,
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, half_width: Vec<f64>, spacing: Vec<f64>, cell_centered: bool) -> Result<Self> {
        let n = origin.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::Argument(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        if half_width.len() != n || spacing.len() != n {
            return Err(Error::Argument("origin, half_width and spacing lengths differ".into()));
        }
        let mut dims = Vec::with_capacity(n);
        for k in 0..n {
            let (l, h) = (half_width[k], spacing[k]);
            if !(h > 0.0) || !h.is_finite() || !(l > 0.0) || !l.is_finite() {
                return Err(Error::Argument(format!(
                    "axis {k}: need h > 0 and L > 0, got h = {h}, L = {l}"
                )));
            }
            let cells = (2.0 * l / h).round();
            if (cells * h - 2.0 * l).abs() > 1e-9 * l.max(1.0) {
                return Err(Error::Argument(format!(
                    "axis {k}: 2L = {} is not a multiple of h = {h}",
                    2.0 * l
                )));
            }
            let nodes = if cell_centered {
                cells as usize
            } else {
                cells as usize + 1
            };
            if nodes < 3 {
                return Err(Error::Argument(format!("axis {k}: {nodes} nodes, need at least 3")));
            }
            dims.push(nodes);
        }
        let mut strides = vec![1; n];
        for k in (0..n - 1).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Ok(GridSpec {
            origin,
            half_width,
            spacing,
            dims,
            strides,
            cell_centered,
        })
    }

    /// Cell-centered cube `[-L, L]^n` with spacing `h` on every axis.
    pub fn cube(n: usize, half_width: f64, h: f64) -> Result<Self> {
        Self::new(vec![0.0; n], vec![half_width; n], vec![h; n], true)
    }

    /// Cell-centered cube `center ± L`.
    pub fn cube_at(center: &[f64], half_width: f64, h: f64) -> Result<Self> {
        let n = center.len();
        Self::new(center.to_vec(), vec![half_width; n], vec![h; n], true)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn half_width(&self) -> &[f64] {
        &self.half_width
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn is_cell_centered(&self) -> bool {
        self.cell_centered
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Largest spacing over all axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.origin[axis] - self.half_width[axis]
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.origin[axis] + self.half_width[axis]
    }

    /// Coordinate of node index `i` along `axis`.
    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let off = if self.cell_centered { 0.5 } else { 0.0 };
        self.lower(axis) + (i as f64 + off) * self.spacing[axis]
    }

    #[inline]
    pub fn linear(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    #[inline]
    pub fn multi_index(&self, mut lin: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for k in 0..self.dim() {
            idx[k] = lin / self.strides[k];
            lin %= self.strides[k];
        }
        idx
    }

    pub fn point_of_index(&self, idx: &[usize], out: &mut [f64]) {
        for k in 0..self.dim() {
            out[k] = self.coord(k, idx[k]);
        }
    }

    pub fn point(&self, lin: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(lin);
        let mut x = [0.0; MAX_DIM];
        self.point_of_index(&idx[..self.dim()], &mut x);
        x
    }

    /// Visits every node in storage order with its multi-index and coordinates.
    pub fn for_each_node(&self, mut f: impl FnMut(usize, &[usize], &[f64])) {
        let n = self.dim();
        let mut idx = [0usize; MAX_DIM];
        let mut x = [0.0; MAX_DIM];
        self.point_of_index(&idx[..n], &mut x);
        for lin in 0..self.len() {
            f(lin, &idx[..n], &x[..n]);
            // increment multi-index, last axis fastest
            let mut k = n;
            while k > 0 {
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    x[k] = self.coord(k, idx[k]);
                    break;
                }
                idx[k] = 0;
                x[k] = self.coord(k, 0);
            }
        }
    }

    /// True when node `idx` is in the outermost layer.
    pub fn is_boundary(&self, idx: &[usize]) -> bool {
        idx.iter().zip(&self.dims).any(|(&i, &d)| i == 0 || i + 1 == d)
    }

    /// Closed box of the grid.
    pub fn bounding_region(&self) -> Region {
        Region::Box {
            lo: (0..self.dim()).map(|k| self.lower(k)).collect(),
            hi: (0..self.dim()).map(|k| self.upper(k)).collect(),
        }
    }

    /// Cell-centered cube with spacing `h` covering the box `region` plus
    /// `margin` on every side; the half-width is rounded up to a multiple of h/2.
    pub fn covering(region: &Region, margin: f64, h: f64) -> Result<Self> {
        let Region::Box { lo, hi } = region else {
            return Err(Error::Argument("covering grid needs a box region".into()));
        };
        let center: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let half = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).fold(0.0, f64::max) + margin;
        let cells = (2.0 * half / h - 1e-9).ceil();
        Self::cube_at(&center, 0.5 * cells * h, h)
    }

    /// Same spacing and staggering, different box.
    pub fn with_box(&self, origin: Vec<f64>, half_width: Vec<f64>) -> Result<Self> {
        Self::new(origin, half_width, self.spacing.clone(), self.cell_centered)
    }
}

/// Sub-box of a grid used for norms and localisation.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Whole,
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Region {
    /// `center ± half` on every axis.
    pub fn cube(center: &[f64], half: f64) -> Self {
        Region::Box {
            lo: center.iter().map(|c| c - half).collect(),
            hi: center.iter().map(|c| c + half).collect(),
        }
    }

    /// Cube `[-half, half]^n` about the origin.
    pub fn centered(n: usize, half: f64) -> Self {
        Self::cube(&vec![0.0; n], half)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Whole => true,
            Region::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(&v, (&a, &b))| v >= a && v <= b),
        }
    }

    /// Euclidean distance from `x` to the region (0 inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Region::Whole => 0.0,
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&a, &b))| {
                    let d = if v < a {
                        a - v
                    } else if v > b {
                        v - b
                    } else {
                        0.0
                    };
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Axis-aligned box grown by `d` on every side.
    pub fn grown(&self, d: f64) -> Self {
        match self {
            Region::Whole => Region::Whole,
            Region::Box { lo, hi } => Region::Box {
                lo: lo.iter().map(|v| v - d).collect(),
                hi: hi.iter().map(|v| v + d).collect(),
            },
        }
    }

    /// Errors unless the region lies inside the closed grid box.
    pub fn check_inside(&self, grid: &GridSpec) -> Result<()> {
        if let Region::Box { lo, hi } = self {
            if lo.len() != grid.dim() || hi.len() != grid.dim() {
                return Err(Error::Domain("region dimension differs from grid".into()));
            }
            for k in 0..grid.dim() {
                let tol = 1e-12 * grid.half_width()[k].max(1.0);
                if lo[k] > hi[k] || lo[k] < grid.lower(k) - tol || hi[k] > grid.upper(k) + tol {
                    return Err(Error::Domain(format!(
                        "region [{}, {}] on axis {k} leaves grid [{}, {}]",
                        lo[k],
                        hi[k],
                        grid.lower(k),
                        grid.upper(k)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Node mask for the region on `grid`.
    pub fn mask(&self, grid: &GridSpec) -> Result<Vec<bool>> {
        self.check_inside(grid)?;
        let mut m = vec![false; grid.len()];
        grid.for_each_node(|lin, _, x| m[lin] = self.contains(x));
        Ok(m)
    }
}
