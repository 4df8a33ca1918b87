//! Log-log rate fits for convergence studies.

use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares fit of log(value) = intercept + slope·log(scale).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub scales: Vec<f64>,
    pub values: Vec<f64>,
}

impl RateFit {
    /// Prefactor c in value ≈ c·scale^slope.
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }

    /// values[i+1]/values[i].
    pub fn ratios(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Every successive value strictly smaller than the previous one.
    pub fn strictly_decreasing(&self) -> bool {
        strictly_decreasing(&self.values)
    }

    pub fn all_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Fits over at least three scales. All-zero values give slope +∞ (the
/// quantity vanishes identically); a mix of zero and non-zero values cannot
/// be fitted in log space and is an error.
pub fn fit_rate(scales: &[f64], values: &[f64]) -> Result<RateFit> {
    if scales.len() != values.len() {
        return Err(Error::Fit(format!(
            "{} scales but {} values",
            scales.len(),
            values.len()
        )));
    }
    if scales.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 scales, got {}", scales.len())));
    }
    if scales.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::Fit("scales must be positive and finite".into()));
    }
    if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Fit("values must be non-negative and finite".into()));
    }
    if values.iter().all(|&v| v == 0.0) {
        return Ok(RateFit {
            slope: f64::INFINITY,
            intercept: f64::NEG_INFINITY,
            residual: 0.0,
            scales: scales.to_vec(),
            values: values.to_vec(),
        });
    }
    if values.contains(&0.0) {
        return Err(Error::Fit("values mix zeros and non-zeros".into()));
    }
    let xs: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("scales are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual,
        scales: scales.to_vec(),
        values: values.to_vec(),
    })
}

/// Observed order between two resolutions, log(e1/e2)/log(h1/h2).
pub fn observed_order(h1: f64, e1: f64, h2: f64, e2: f64) -> f64 {
    (e1 / e2).ln() / (h1 / h2).ln()
}
