use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::quadrature::SphereQuadrature;
use crate::error::{Error, Result};
use crate::fields::metric::{radius, AnalyticMetric};
use crate::linalg::{Mat, MAX_DIM};
use crate::special::unit_sphere_area;

/// Chart data for the mass integral: decay rate, the radius beyond which
/// the metric is smooth, and the coordinate spheres to integrate over.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticModel {
    pub n: usize,
    pub tau: f64,
    pub inner_radius: f64,
    pub radii: Vec<f64>,
    pub order: usize,
    /// Exponent s of the tail model m(r) = m_∞ + Σ_k c_k r^{−ks};
    /// defaults to 2τ − (n − 2).
    pub tail_exponent: Option<f64>,
}

impl AsymptoticModel {
    pub fn new(n: usize, tau: f64, inner_radius: f64, radii: Vec<f64>) -> Result<Self> {
        let m = AsymptoticModel {
            n,
            tau,
            inner_radius,
            radii,
            order: 16,
            tail_exponent: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_tail_exponent(mut self, s: f64) -> Self {
        self.tail_exponent = Some(s);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.n > MAX_DIM {
            return Err(Error::Argument(format!("mass needs 3 ≤ n ≤ {MAX_DIM}, got {}", self.n)));
        }
        if !(self.tau > 0.5 * (self.n as f64 - 2.0)) {
            return Err(Error::Argument(format!(
                "decay rate τ = {} must exceed (n−2)/2 = {}",
                self.tau,
                0.5 * (self.n as f64 - 2.0)
            )));
        }
        if self.radii.is_empty() || self.radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("radii must be nonempty and strictly increasing".into()));
        }
        if !(self.radii[0] > self.inner_radius) {
            return Err(Error::Domain(format!(
                "radius {} is inside the non-smooth region r ≤ {}",
                self.radii[0], self.inner_radius
            )));
        }
        if self.order < 1 {
            return Err(Error::Argument("quadrature order must be positive".into()));
        }
        Ok(())
    }

    pub fn tail_exponent(&self) -> f64 {
        self.tail_exponent.unwrap_or(2.0 * self.tau - (self.n as f64 - 2.0))
    }
}

/// Per-radius mass values and their extrapolation.
#[derive(Clone, Debug, Serialize)]
pub struct MassEstimate {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub m_inf: f64,
    pub s: f64,
    /// Correction terms c_k r^{−ks} in the tail model.
    pub terms: usize,
    pub residual: f64,
    pub omega: f64,
    /// Set when |m(r) − m_∞| fails to shrink with r.
    pub nonmonotone_tail: bool,
}

/// Σ_{i,j}(∂_i g_ij − ∂_j g_ii)ν_j at x, ν = x/|x|.
///
/// Uses the closed-form gradient when present, otherwise central
/// differences with step 1e−4·|x|.
pub fn adm_integrand(metric: &dyn AnalyticMetric, x: &[f64], inner_radius: f64) -> Result<f64> {
    let n = metric.dim();
    if x.len() != n {
        return Err(Error::Argument("point dimension does not match the metric".into()));
    }
    let r = radius(x);
    if !(r > inner_radius) {
        return Err(Error::Domain(format!(
            "|x| = {r} is inside the non-smooth region r ≤ {inner_radius}"
        )));
    }
    let mut dg = [Mat::zeros(n); MAX_DIM];
    if !(metric.has_gradient() && metric.gradient(x, &mut dg[..n])) {
        let step = 1e-4 * r;
        let mut y = [0.0; MAX_DIM];
        y[..n].copy_from_slice(x);
        for l in 0..n {
            y[l] = x[l] + step;
            let gp = metric.eval(&y[..n]);
            y[l] = x[l] - step;
            let gm = metric.eval(&y[..n]);
            y[l] = x[l];
            dg[l] = gp.sub(&gm).scale(0.5 / step);
        }
    }
    let mut s = 0.0;
    for j in 0..n {
        let nu = x[j] / r;
        let mut t = 0.0;
        for i in 0..n {
            t += dg[i].get(i, j) - dg[j].get(i, i);
        }
        s += t * nu;
    }
    Ok(s)
}

/// m(r) = (2(n−1)ω_{n−1})⁻¹ ∫_{S_r}(g_ij,i − g_ii,j)ν_j dS for one radius.
pub fn mass_at_radius(metric: &dyn AnalyticMetric, r: f64, quad: &SphereQuadrature, inner_radius: f64) -> Result<f64> {
    let n = metric.dim();
    if quad.dim() != n {
        return Err(Error::Argument("quadrature dimension does not match the metric".into()));
    }
    let mut x = [0.0; MAX_DIM];
    let mut s = 0.0;
    for k in 0..quad.len() {
        for (a, v) in quad.point(k).iter().enumerate() {
            x[a] = r * v;
        }
        s += quad.weights()[k] * adm_integrand(metric, &x[..n], inner_radius)?;
    }
    Ok(s * r.powi(n as i32 - 1) / (2.0 * (n as f64 - 1.0) * unit_sphere_area(n)))
}

/// m(r) on every model radius and m_∞ by least squares in
/// m(r) = m_∞ + Σ_{k=1}^{K} c_k r^{−ks}, K = min(#radii − 1, 3).
pub fn adm_mass(metric: &dyn AnalyticMetric, model: &AsymptoticModel) -> Result<MassEstimate> {
    model.validate()?;
    if metric.dim() != model.n {
        return Err(Error::Argument("model dimension does not match the metric".into()));
    }
    let quad = SphereQuadrature::new(model.n, model.order)?;
    let values = model
        .radii
        .iter()
        .map(|&r| mass_at_radius(metric, r, &quad, model.inner_radius))
        .collect::<Result<Vec<_>>>()?;
    let s = model.tail_exponent();
    let (m_inf, terms, residual) = extrapolate(&model.radii, &values, s)?;
    let dev: Vec<f64> = values.iter().map(|v| (v - m_inf).abs()).collect();
    let scale = dev.iter().cloned().fold(0.0, f64::max).max(1e-14);
    let nonmonotone_tail = dev.windows(2).any(|w| w[1] > w[0] + 1e-12 * scale);
    Ok(MassEstimate {
        radii: model.radii.clone(),
        values,
        m_inf,
        s,
        terms,
        residual,
        omega: unit_sphere_area(model.n),
        nonmonotone_tail,
    })
}

/// Least-squares m_∞ with as many r^{−ks} terms as the data allow (at most
/// three); returns (m_∞, terms, rms residual).
pub fn extrapolate(radii: &[f64], values: &[f64], s: f64) -> Result<(f64, usize, f64)> {
    if radii.len() != values.len() || radii.is_empty() {
        return Err(Error::Argument("radii and values must match and be nonempty".into()));
    }
    if !(s > 0.0) {
        return Err(Error::Argument(format!("tail exponent s = {s} must be positive")));
    }
    if values.iter().all(|&v| v == 0.0) {
        return Ok((0.0, 0, 0.0));
    }
    let terms = (radii.len() - 1).min(3);
    let r0 = radii[0];
    let a = DMatrix::from_fn(radii.len(), terms + 1, |i, k| (radii[i] / r0).powf(-(k as f64) * s));
    let b = DVector::from_column_slice(values);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Fit(format!("tail fit failed: {e}")))?;
    let res = &a * &coef - &b;
    let rms = (res.norm_squared() / radii.len() as f64).sqrt();
    Ok((coef[0], terms, rms))
}
