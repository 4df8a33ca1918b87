use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::special::gamma_half;

/// Product rule on the unit sphere S^{n−1} ⊂ ℝⁿ: Gauss–Gegenbauer in the
/// first polar angle recursively, trapezoid in the last azimuth.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    n: usize,
    order: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    /// `order` Gauss nodes per polar angle and 2·order azimuthal nodes.
    pub fn new(n: usize, order: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument("sphere quadrature needs n ≥ 2".into()));
        }
        if order < 1 {
            return Err(Error::Argument("quadrature order must be positive".into()));
        }
        let (points, weights) = build(n, order);
        Ok(SphereQuadrature {
            n,
            order,
            points,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Unit vector of node k.
    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.n..(k + 1) * self.n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫_{S^{n−1}} f dA.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        (0..self.len()).map(|k| self.weights[k] * f(self.point(k))).sum()
    }
}

fn build(n: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 2 {
        let m = 2 * order;
        let w = 2.0 * std::f64::consts::PI / m as f64;
        let mut pts = Vec::with_capacity(2 * m);
        for k in 0..m {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
            pts.push(t.cos());
            pts.push(t.sin());
        }
        return (pts, vec![w; m]);
    }
    // x = (t, √(1−t²)·y), dA = (1−t²)^{(n−3)/2} dt dA_{n−2}(y)
    let (tn, tw) = gauss_gegenbauer(order, 0.5 * (n as f64 - 3.0), n);
    let (sub_pts, sub_w) = build(n - 1, order);
    let m = sub_w.len();
    let mut pts = Vec::with_capacity(n * tn.len() * m);
    let mut wts = Vec::with_capacity(tn.len() * m);
    for (t, wt) in tn.iter().zip(&tw) {
        let s = (1.0 - t * t).sqrt();
        for k in 0..m {
            pts.push(*t);
            pts.extend(sub_pts[k * (n - 1)..(k + 1) * (n - 1)].iter().map(|y| s * y));
            wts.push(wt * sub_w[k]);
        }
    }
    (pts, wts)
}

/// Nodes and weights for ∫_{−1}^{1} f(t)(1−t²)^α dt by Golub–Welsch;
/// `n` is only used for the closed-form total mass ω_{n−1}/ω_{n−2}.
fn gauss_gegenbauer(m: usize, alpha: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let k = k as f64;
        let b = (k * (k + 2.0 * alpha) / ((2.0 * k + 2.0 * alpha - 1.0) * (2.0 * k + 2.0 * alpha + 1.0))).sqrt();
        let i = k as usize;
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    // ∫(1−t²)^α dt = √π Γ((n−1)/2)/Γ(n/2) with α = (n−3)/2
    let mu0 = std::f64::consts::PI.sqrt() * gamma_half(n - 1) / gamma_half(n);
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
