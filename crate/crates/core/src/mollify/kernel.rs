use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::linalg::MAX_DIM;
use crate::special::unit_sphere_area;

/// Unnormalized bump exp(−1/(1−s)) for s = |x|² < 1.
#[inline]
fn bump(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s)).exp()
    }
}

/// Smooth radial mollifier ρ(x) ∝ exp(−1/(1−|x|²)) on the unit ball, with
/// discrete kernels cached per (ε, h).
#[derive(Debug)]
pub struct MollifierKernel {
    n: usize,
    norm: f64,
    cache: Mutex<HashMap<Vec<u64>, Arc<DiscreteKernel>>>,
}

impl Clone for MollifierKernel {
    fn clone(&self) -> Self {
        MollifierKernel::new(self.n)
    }
}

impl MollifierKernel {
    pub fn new(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension {n} unsupported");
        MollifierKernel {
            n,
            norm: radial_mass(n),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// ∫_{B₁} exp(−1/(1−|x|²)) dx.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// Normalized ρ(x).
    pub fn profile(&self, x: &[f64]) -> f64 {
        bump(x.iter().map(|v| v * v).sum()) / self.norm
    }

    /// ρ_ε(x) = ε^{−n}ρ(x/ε).
    pub fn scaled(&self, eps: f64, x: &[f64]) -> f64 {
        let s: f64 = x.iter().map(|v| (v / eps) * (v / eps)).sum();
        bump(s) / (self.norm * eps.powi(self.n as i32))
    }

    /// Discrete kernel for scale ε on a lattice of spacing `h`; errors when
    /// ε < 2·max h.
    pub fn discrete(&self, eps: f64, h: &[f64]) -> Result<Arc<DiscreteKernel>> {
        let hmax = h.iter().cloned().fold(0.0, f64::max);
        if !(eps >= 2.0 * hmax) {
            return Err(Error::Resolution { eps, two_h: 2.0 * hmax });
        }
        self.discrete_unchecked(eps, h)
    }

    /// As [`discrete`](Self::discrete) without the resolution floor; used for
    /// auxiliary smoothing such as cutoff construction.
    pub fn discrete_unchecked(&self, eps: f64, h: &[f64]) -> Result<Arc<DiscreteKernel>> {
        if h.len() != self.n || !(eps > 0.0) || h.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Argument(format!("bad kernel request eps = {eps}, h = {h:?}")));
        }
        let mut key = vec![eps.to_bits()];
        key.extend(h.iter().map(|v| v.to_bits()));
        let mut cache = self.cache.lock().expect("kernel cache poisoned");
        if let Some(k) = cache.get(&key) {
            return Ok(k.clone());
        }
        let k = Arc::new(DiscreteKernel::build(self.n, self.norm, eps, h)?);
        cache.insert(key, k.clone());
        Ok(k)
    }
}

/// ∫_{B₁} bump by composite Simpson in the radius; the integrand is flat to
/// all orders at r = 1.
fn radial_mass(n: usize) -> f64 {
    let m = 20_000;
    let dr = 1.0 / m as f64;
    let f = |r: f64| bump(r * r) * r.powi(n as i32 - 1);
    let mut s = f(0.0) + f(1.0);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * dr);
    }
    unit_sphere_area(n) * s * dr / 3.0
}

/// Lattice samples of ρ_ε and ∂_jρ_ε at offsets y = k·h with |y| < ε.
///
/// Weights are renormalized to sum to one; each derivative kernel is scaled
/// so that Σ_k y_j·d_j(k) = −1, which makes it exact on affine functions.
#[derive(Clone, Debug)]
pub struct DiscreteKernel {
    n: usize,
    eps: f64,
    h: Vec<f64>,
    reach: Vec<usize>,
    offsets: Vec<[i32; MAX_DIM]>,
    weights: Vec<f64>,
    deriv: Vec<Vec<f64>>,
    raw_mass: f64,
}

impl DiscreteKernel {
    fn build(n: usize, norm: f64, eps: f64, h: &[f64]) -> Result<Self> {
        let reach: Vec<usize> = h.iter().map(|&hk| (eps / hk).ceil() as usize).collect();
        let vol: f64 = h.iter().product();
        let scale = 1.0 / (norm * eps.powi(n as i32));
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let mut deriv = vec![Vec::new(); n];
        let mut idx = [0i32; MAX_DIM];
        for (k, i) in idx.iter_mut().enumerate().take(n) {
            *i = -(reach[k] as i32);
        }
        loop {
            let mut s = 0.0;
            for k in 0..n {
                let y = idx[k] as f64 * h[k] / eps;
                s += y * y;
            }
            if s < 1.0 {
                let b = bump(s);
                if b > 0.0 {
                    let w = b * scale * vol;
                    offsets.push(idx);
                    weights.push(w);
                    // ∂_j ρ_ε(y) = ρ_ε(y) · (−2 y_j / ε²) / (1 − |y/ε|²)²
                    let q = -2.0 / (eps * eps * (1.0 - s) * (1.0 - s));
                    for (j, d) in deriv.iter_mut().enumerate() {
                        d.push(w * q * idx[j] as f64 * h[j]);
                    }
                }
            }
            let mut k = n;
            let mut done = true;
            while k > 0 {
                k -= 1;
                idx[k] += 1;
                if idx[k] <= reach[k] as i32 {
                    done = false;
                    break;
                }
                idx[k] = -(reach[k] as i32);
            }
            if done {
                break;
            }
        }
        let raw_mass: f64 = weights.iter().sum();
        if offsets.is_empty() || !(raw_mass > 0.0) {
            return Err(Error::Resolution {
                eps,
                two_h: 2.0 * h.iter().cloned().fold(0.0, f64::max),
            });
        }
        for w in weights.iter_mut() {
            *w /= raw_mass;
        }
        for (j, d) in deriv.iter_mut().enumerate() {
            let moment: f64 = d.iter().zip(&offsets).map(|(v, o)| v * o[j] as f64 * h[j]).sum();
            if moment == 0.0 {
                return Err(Error::Resolution { eps, two_h: 2.0 * h[j] });
            }
            let c = -1.0 / moment;
            for v in d.iter_mut() {
                *v *= c;
            }
        }
        Ok(DiscreteKernel {
            n,
            eps,
            h: h.to_vec(),
            reach,
            offsets,
            weights,
            deriv,
            raw_mass,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h
    }

    /// Largest |k_j| per axis.
    pub fn reach(&self) -> &[usize] {
        &self.reach
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn offsets(&self) -> &[[i32; MAX_DIM]] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights of ∂_jρ_ε.
    pub fn derivative_weights(&self, j: usize) -> &[f64] {
        &self.deriv[j]
    }

    /// Lattice quadrature of ∫ρ_ε before renormalization.
    pub fn raw_mass(&self) -> f64 {
        self.raw_mass
    }

    /// Offset position y_k along axis j.
    #[inline]
    pub fn position(&self, k: usize, j: usize) -> f64 {
        self.offsets[k][j] as f64 * self.h[j]
    }

    /// Σ_k w_k f(x − y_k) for any function, in difference form around f(x)
    /// so that constants are reproduced exactly.
    pub fn apply_at(&self, x: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
        self.weighted_at(x, &self.weights, f)
    }

    /// Σ_k d_j(k) f(x − y_k), the lattice version of ∂_j(f∗ρ_ε)(x).
    pub fn apply_derivative_at(&self, x: &[f64], j: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
        let f0 = f(x);
        let mut y = [0.0; MAX_DIM];
        let mut s = 0.0;
        for (k, d) in self.deriv[j].iter().enumerate() {
            for a in 0..self.n {
                y[a] = x[a] - self.position(k, a);
            }
            s += d * (f(&y[..self.n]) - f0);
        }
        s
    }

    fn weighted_at(&self, x: &[f64], w: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
        let f0 = f(x);
        let mut y = [0.0; MAX_DIM];
        let mut s = 0.0;
        for (k, wk) in w.iter().enumerate() {
            for a in 0..self.n {
                y[a] = x[a] - self.position(k, a);
            }
            s += wk * (f(&y[..self.n]) - f0);
        }
        f0 + s
    }
}
