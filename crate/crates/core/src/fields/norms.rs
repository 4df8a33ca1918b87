use super::grid::{GridSpec, Region};
use super::metric::{MetricField, SymTensorField};
use super::scalar::{axis_derivative, ScalarField};
use crate::error::{Error, Result};

/// Lebesgue/Sobolev norm request.
#[derive(Clone, Debug)]
pub struct NormSpec<'a> {
    pub p: f64,
    pub region: Region,
    /// 0 for L^p, 1 for W^{1,p}.
    pub order: u8,
    /// Metric whose volume density weights the quadrature.
    pub reference: Option<&'a MetricField>,
}

impl<'a> NormSpec<'a> {
    pub fn lp(p: f64, region: Region) -> Self {
        NormSpec {
            p,
            region,
            order: 0,
            reference: None,
        }
    }

    pub fn w1p(p: f64, region: Region) -> Self {
        NormSpec {
            p,
            region,
            order: 1,
            reference: None,
        }
    }

    pub fn with_reference(mut self, g: &'a MetricField) -> Self {
        self.reference = Some(g);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::Argument(format!(
                "norm exponent p = {} must lie in [1, ∞)",
                self.p
            )));
        }
        if self.order > 1 {
            return Err(Error::Argument(format!("norm order {} unsupported", self.order)));
        }
        Ok(())
    }

    /// p′ = p/(p−1), with p′ = ∞ for p = 1.
    pub fn conjugate(&self) -> f64 {
        conjugate_exponent(self.p)
    }

    /// r with 1/r = 1/p + 1/q.
    pub fn product_exponent(&self, q: f64) -> f64 {
        product_exponent(self.p, q)
    }
}

pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

pub fn product_exponent(p: f64, q: f64) -> f64 {
    1.0 / (1.0 / p + 1.0 / q)
}

/// n* = 2n/(n−2), the critical Sobolev exponent; infinite for n ≤ 2.
pub fn sobolev_exponent(n: usize) -> f64 {
    if n <= 2 {
        f64::INFINITY
    } else {
        2.0 * n as f64 / (n as f64 - 2.0)
    }
}

/// Per-node quadrature weights (cell volume times √det g) restricted to a
/// region; zero outside it.
pub fn quadrature_weights(grid: &GridSpec, region: &Region, reference: Option<&MetricField>) -> Result<Vec<f64>> {
    let mask = region.mask(grid)?;
    let dv = grid.cell_volume();
    let density = match reference {
        Some(g) => {
            if g.grid() != grid {
                return Err(Error::Data("reference metric lives on a different grid".into()));
            }
            Some(g.volume_density())
        }
        None => None,
    };
    Ok(mask
        .iter()
        .enumerate()
        .map(|(lin, &m)| {
            if !m {
                0.0
            } else {
                dv * density.as_ref().map_or(1.0, |d| d[lin])
            }
        })
        .collect())
}

/// (Σ |v|^p w)^{1/p} in storage order.
pub fn weighted_lp(values: &[f64], weights: &[f64], p: f64) -> Result<f64> {
    let mut s = 0.0;
    for (&v, &w) in values.iter().zip(weights) {
        if !v.is_finite() {
            return Err(Error::Data("non-finite value in norm".into()));
        }
        if w != 0.0 {
            s += v.abs().powf(p) * w;
        }
    }
    Ok(s.powf(1.0 / p))
}

/// Max |v| over nodes with non-zero weight.
pub fn weighted_sup(values: &[f64], weights: &[f64]) -> f64 {
    values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w != 0.0)
        .fold(0.0, |m, (v, _)| m.max(v.abs()))
}

pub fn lp_norm(f: &ScalarField, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    if spec.order != 0 {
        return Err(Error::Argument("lp_norm needs order 0".into()));
    }
    let w = quadrature_weights(f.grid(), &spec.region, spec.reference)?;
    weighted_lp(f.values(), &w, spec.p)
}

/// ‖f‖_{L^p} + Σ_j ‖∂_j f‖_{L^p}, derivatives by finite differences over the
/// whole grid.
pub fn w1p_norm(f: &ScalarField, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    if spec.order != 1 {
        return Err(Error::Argument("w1p_norm needs order 1".into()));
    }
    let grid = f.grid();
    let w = quadrature_weights(grid, &spec.region, spec.reference)?;
    let mut total = weighted_lp(f.values(), &w, spec.p)?;
    for k in 0..grid.dim() {
        total += weighted_lp(&axis_derivative(grid, f.values(), k), &w, spec.p)?;
    }
    Ok(total)
}

/// Norm of a symmetric tensor field with the pointwise Frobenius norm; order 1
/// adds the L^p norms of the Frobenius norms of each ∂_k.
pub fn tensor_norm(t: &SymTensorField, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    let grid = t.grid();
    let n = grid.dim();
    let w = quadrature_weights(grid, &spec.region, spec.reference)?;
    let mut total = weighted_lp(t.frobenius().values(), &w, spec.p)?;
    if spec.order == 1 {
        for k in 0..n {
            let mut sq = vec![0.0; grid.len()];
            for i in 0..n {
                for j in 0..n {
                    let d = axis_derivative(grid, t.component(i, j), k);
                    for (s, v) in sq.iter_mut().zip(&d) {
                        *s += v * v;
                    }
                }
            }
            let fro: Vec<f64> = sq.into_iter().map(f64::sqrt).collect();
            total += weighted_lp(&fro, &w, spec.p)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::metric::{ClosureMetric, Regularity};
    use crate::linalg::Mat;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn unit_box(n: usize, h: f64) -> GridSpec {
        GridSpec::new(vec![0.5; n], vec![0.5; n], vec![h; n], true).unwrap()
    }

    #[test]
    fn constant_and_zero() {
        let g = unit_box(2, 0.1);
        let two = ScalarField::constant(g.clone(), 2.0).unwrap();
        let spec = NormSpec::lp(2.0, Region::Whole);
        assert!((lp_norm(&two, &spec).unwrap() - 2.0).abs() < 1e-13);
        assert_eq!(lp_norm(&ScalarField::zeros(g), &spec).unwrap(), 0.0);
    }

    #[test]
    fn linear_l2() {
        let g = unit_box(1, 1e-3);
        let f = ScalarField::from_fn(g, |x| x[0]).unwrap();
        let v = lp_norm(&f, &NormSpec::lp(2.0, Region::Whole)).unwrap();
        assert!((v - (1.0f64 / 3.0).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn w1p_examples() {
        let g = unit_box(1, 1e-3);
        let f = ScalarField::from_fn(g.clone(), |x| x[0]).unwrap();
        let v = w1p_norm(&f, &NormSpec::w1p(1.0, Region::Whole)).unwrap();
        assert!((v - 1.5).abs() < 1e-9);
        let c = ScalarField::constant(unit_box(2, 0.1), 3.0).unwrap();
        let v = w1p_norm(&c, &NormSpec::w1p(3.0, Region::Whole)).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn w1n_of_root_singularity_stable() {
        let norm = |h: f64| {
            let g = GridSpec::cube(3, 1.0, h).unwrap();
            let f = ScalarField::from_fn(g, |x| x.iter().map(|v| v * v).sum::<f64>().powf(0.25)).unwrap();
            w1p_norm(&f, &NormSpec::w1p(3.0, Region::centered(3, 0.5))).unwrap()
        };
        let (a, b) = (norm(0.05), norm(0.025));
        assert!(a.is_finite() && b.is_finite());
        assert!((a - b).abs() / b < 0.05, "{a} vs {b}");
    }

    #[test]
    fn region_outside_is_domain_error() {
        let g = unit_box(2, 0.1);
        let f = ScalarField::constant(g, 1.0).unwrap();
        let spec = NormSpec::lp(2.0, Region::cube(&[0.5, 0.5], 2.0));
        assert!(matches!(lp_norm(&f, &spec), Err(Error::Domain(_))));
    }

    #[test]
    fn exponents() {
        assert_eq!(conjugate_exponent(1.0), f64::INFINITY);
        assert_eq!(conjugate_exponent(2.0), 2.0);
        assert_eq!(product_exponent(2.0, 2.0), 1.0);
        assert_eq!(sobolev_exponent(3), 6.0);
        assert!(NormSpec::lp(0.5, Region::Whole).validate().is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_homogeneous(c in -5.0f64..5.0, half in 0.1f64..0.45, p in 1.0f64..4.0) {
            let g = unit_box(2, 0.05);
            let f = ScalarField::from_fn(g.clone(), |x| (3.0 * x[0]).sin() + x[1] * x[1]).unwrap();
            let small = NormSpec::lp(p, Region::cube(&[0.5, 0.5], half));
            let big = NormSpec::lp(p, Region::cube(&[0.5, 0.5], half + 0.05));
            prop_assert!(lp_norm(&f, &small).unwrap() <= lp_norm(&f, &big).unwrap());
            let base = lp_norm(&f, &small).unwrap();
            let scaled = lp_norm(&f.scaled(c).unwrap(), &small).unwrap();
            prop_assert!((scaled - c.abs() * base).abs() <= 1e-13 * (1.0 + base * c.abs()));
        }

        #[test]
        fn measure_scaling(c in 0.5f64..3.0, p in 1.0f64..4.0) {
            let grid = unit_box(3, 0.1);
            let f = ScalarField::from_fn(grid.clone(), |x| x[0] + x[1] * x[2]).unwrap();
            let g = MetricField::from_analytic(
                grid.clone(),
                Arc::new(ClosureMetric::new(3, move |_| Mat::scalar(3, c * c))),
                Regularity::Smooth,
            ).unwrap();
            let flat = lp_norm(&f, &NormSpec::lp(p, Region::Whole)).unwrap();
            let weighted = lp_norm(&f, &NormSpec::lp(p, Region::Whole).with_reference(&g)).unwrap();
            prop_assert!((weighted - c.powf(3.0 / p) * flat).abs() < 1e-12 * weighted);
        }
    }
}
