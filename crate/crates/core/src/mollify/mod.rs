//! Mollification of scalar and metric fields.

pub mod convolve;
pub mod kernel;
pub mod plan;

pub use convolve::{convolve, convolve_derivative, convolve_derivative_padded, convolve_padded, Padding};
pub use kernel::{DiscreteKernel, MollifierKernel};
pub use plan::{
    build_g_eps, metric_equivalence_factor, mollify_metric, BlendedMetric, EquivalenceFactor, MollifiedMetric,
    SmoothingPlan,
};

use crate::error::Result;
use crate::fields::norms::tensor_norm;
use crate::fields::{metric_inverse, MetricField, NormSpec, Region};
use crate::rates::{fit_rate, RateFit};

/// ‖g⁻¹ − (g∗ρ_ε)⁻¹‖_{L^p(region)} for every ε (pointwise Frobenius norm),
/// with a log-log fit over the scales.
pub fn inverse_commutator_rate(
    g: &MetricField,
    kernel: &MollifierKernel,
    eps_list: &[f64],
    p: f64,
    region: &Region,
) -> Result<RateFit> {
    region.check_inside(g.grid())?;
    let inv = metric_inverse(g)?;
    let mut norms = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let ge = mollify_metric(g, kernel, eps)?;
        let diff = inv.sub(&metric_inverse(&ge)?)?;
        norms.push(tensor_norm(&diff, &NormSpec::lp(p, region.clone()))?);
    }
    fit_rate(eps_list, &norms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::metric::{ClosureMetric, RadialConformalMetric, Regularity};
    use crate::fields::GridSpec;
    use crate::linalg::Mat;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    fn bumpy_metric(grid: GridSpec) -> MetricField {
        MetricField::from_analytic(
            grid,
            Arc::new(ClosureMetric::new(2, |x| {
                let mut m = Mat::scalar(2, 1.0 + 0.3 * (-(x[0] * x[0] + x[1] * x[1]) * 4.0).exp());
                m.set_sym(0, 1, 0.1 * (x[0] * x[1]).sin());
                m
            })),
            Regularity::Smooth,
        )
        .unwrap()
    }

    #[test]
    fn euclidean_is_fixed() {
        let grid = GridSpec::cube(3, 0.5, 0.05).unwrap();
        let k = MollifierKernel::new(3);
        let d = MetricField::euclidean(grid.clone()).unwrap();
        let e = mollify_metric(&d, &k, 0.2).unwrap();
        for lin in 0..grid.len() {
            assert_eq!(e.at(lin), Mat::identity(3));
        }
        let plan = SmoothingPlan::new(&grid, Region::centered(3, 0.2), 0.2, &k).unwrap();
        let e = build_g_eps(&d, &plan, &k).unwrap();
        for lin in 0..grid.len() {
            assert_eq!(e.at(lin), Mat::identity(3));
        }
    }

    #[test]
    fn cutoff_properties() {
        let grid = GridSpec::cube(2, 1.0, 0.025).unwrap();
        let k = MollifierKernel::new(2);
        let plan = SmoothingPlan::new(&grid, Region::centered(2, 0.3), 0.2, &k).unwrap();
        let chi = plan.cutoff();
        let mut saw_mid = false;
        grid.for_each_node(|lin, _, x| {
            let c = chi.values()[lin];
            assert!((0.0..=1.0).contains(&c));
            if plan.region().contains(x) {
                assert_eq!(c, 1.0);
            }
            if !plan.in_fattened(x) {
                assert_eq!(c, 0.0);
            }
            saw_mid |= c > 0.0 && c < 1.0;
        });
        assert!(saw_mid);
        assert!(SmoothingPlan::new(&grid, Region::centered(2, 0.9), 0.2, &k).is_err());
    }

    #[test]
    fn g_eps_equals_g_outside_fattening() {
        let grid = GridSpec::cube(2, 1.0, 0.025).unwrap();
        let k = MollifierKernel::new(2);
        let g = bumpy_metric(grid.clone());
        let plan = SmoothingPlan::new(&grid, Region::centered(2, 0.3), 0.2, &k).unwrap();
        let ge = build_g_eps(&g, &plan, &k).unwrap();
        let mut changed = 0;
        grid.for_each_node(|lin, _, x| {
            if !plan.in_fattened(x) {
                assert_eq!(ge.at(lin), g.at(lin));
            } else if ge.at(lin) != g.at(lin) {
                changed += 1;
            }
        });
        assert!(changed > 0);
        // the point evaluator reproduces the grid values
        let a = ge.analytic().unwrap();
        for lin in (0..grid.len()).step_by(97) {
            let x = grid.point(lin);
            assert!(a.eval(&x[..2]).sub(&ge.at(lin)).max_abs() < 1e-13);
        }
    }

    #[test]
    fn equivalence_factor_scalings() {
        let grid = GridSpec::cube(2, 1.0, 0.1).unwrap();
        let g = bumpy_metric(grid.clone());
        assert_eq!(metric_equivalence_factor(&g, &g).unwrap().rho, 1.0);
        let g4 = MetricField::from_tensor(
            crate::fields::SymTensorField::from_fn(grid.clone(), |x| g.analytic().unwrap().eval(x).scale(4.0)).unwrap(),
            Regularity::Smooth,
        )
        .unwrap();
        let r = metric_equivalence_factor(&g, &g4).unwrap().rho;
        assert!((r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_rate_flat_and_smooth() {
        let grid = GridSpec::cube(2, 1.0, 0.0125).unwrap();
        let k = MollifierKernel::new(2);
        let region = Region::centered(2, 0.5);
        let d = MetricField::euclidean(grid.clone()).unwrap();
        let f = inverse_commutator_rate(&d, &k, &[0.2, 0.1, 0.05], 2.0, &region).unwrap();
        assert!(f.all_zero());
        let g = bumpy_metric(grid);
        let f = inverse_commutator_rate(&g, &k, &[0.2, 0.1, 0.05], 2.0, &region).unwrap();
        assert!(f.slope >= 0.9, "slope {}", f.slope);
    }

    #[test]
    fn continuous_metric_converges_uniformly() {
        // Lipschitz radial profile with a kink at r = 0.5
        let grid = GridSpec::cube(2, 1.0, 0.0125).unwrap();
        let k = MollifierKernel::new(2);
        let g = MetricField::from_analytic(
            grid.clone(),
            Arc::new(RadialConformalMetric::new(
                2,
                Arc::new(|r: f64| {
                    if r < 0.5 {
                        (1.5, 0.0)
                    } else {
                        (1.0 + 0.25 / r, -0.25 / (r * r))
                    }
                }),
            )),
            Regularity::Rough { p: 2.0 },
        )
        .unwrap();
        let region = Region::centered(2, 0.7);
        let mask = region.mask(&grid).unwrap();
        let mut last = f64::INFINITY;
        for eps in [0.2, 0.1, 0.05] {
            let ge = mollify_metric(&g, &k, eps).unwrap();
            let mut dev: f64 = 0.0;
            for lin in 0..grid.len() {
                if mask[lin] {
                    dev = dev.max(ge.at(lin).sub(&g.at(lin)).max_abs());
                }
            }
            assert!(dev < last);
            last = dev;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn sandwich_holds(seed in 0u64..1000, scale in 0.2f64..5.0) {
            let grid = GridSpec::cube(2, 1.0, 0.25).unwrap();
            let g = bumpy_metric(grid.clone());
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut comps = vec![vec![0.0; grid.len()]; 3];
            for lin in 0..grid.len() {
                let a = rng.gen_range(0.5..2.0) * scale;
                let b = rng.gen_range(0.5..2.0) * scale;
                let c = rng.gen_range(-0.4..0.4) * scale;
                comps[0][lin] = a;
                comps[1][lin] = c;
                comps[2][lin] = b;
            }
            let g2 = MetricField::from_tensor(crate::fields::SymTensorField::new(grid.clone(), comps).unwrap(), Regularity::Smooth).unwrap();
            let rho = metric_equivalence_factor(&g, &g2).unwrap().rho;
            prop_assert!(rho >= 1.0);
            for lin in 0..grid.len() {
                for _ in 0..20 {
                    let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                    let qg = g.at(lin).quadratic_form(&v);
                    let q2 = g2.at(lin).quadratic_form(&v);
                    prop_assert!(q2 / rho <= qg * (1.0 + 1e-12));
                    prop_assert!(qg <= rho * q2 * (1.0 + 1e-12));
                }
            }
        }
    }
}
