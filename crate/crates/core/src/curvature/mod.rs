//! Christoffel symbols, the flux/quadratic split R = ∂_k V^k + F of the
//! scalar curvature, and its distributional and mollified forms.

pub mod commutator;
pub mod decomposition;
pub mod pairing;

pub use commutator::{
    conformal_scalar, conformal_scalar_with, mollified_scalar, scalar_commutator_norm, scalar_commutator_study,
    CommutatorTable,
};
pub use decomposition::{
    christoffel, negative_part, point_curvature, point_v_f, quadratic_part_alternative, scalar_pointwise,
    scalar_pointwise_with, scalar_v_f, scalar_v_f_with, CurvatureDecomposition, CurvatureOptions, DerivativeMode,
    PointCurvature,
};
pub use pairing::{
    bump_centers, negative_part_norm, negative_part_norm_of, pair_distributional_scalar, pair_with_decomposition,
    DensityTest,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::fields::metric::{ClosureMetric, RadialConformalMetric, Regularity};
    use crate::fields::{GridSpec, MetricField, Region, ScalarField};
    use crate::linalg::{Mat, MAX_DIM};
    use crate::mollify::{convolve, MollifierKernel};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn exp_conformal(n: usize, phi: fn(&[f64]) -> f64) -> Arc<ClosureMetric> {
        Arc::new(ClosureMetric::new(n, move |x| Mat::scalar(n, (2.0 * phi(x)).exp())))
    }

    #[test]
    fn flat_everything_vanishes() {
        let grid = GridSpec::cube(3, 0.5, 0.1).unwrap();
        let g = MetricField::euclidean(grid.clone()).unwrap();
        let d = scalar_v_f_with(
            &g,
            CurvatureOptions {
                keep_christoffel: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(d.christoffel.as_ref().unwrap().iter().all(|&v| v == 0.0));
        assert!(d.v.iter().all(|v| v.max_abs() == 0.0));
        assert_eq!(d.f.max_abs(), 0.0);
        assert_eq!(scalar_pointwise(&g).unwrap().max_abs(), 0.0);
        let mu = DensityTest::bump(&grid, &[0.0, 0.1, 0.0], 0.3, 1.0).unwrap();
        assert_eq!(pair_distributional_scalar(&g, &mu).unwrap(), 0.0);
    }

    #[test]
    fn conformal_christoffels_second_order() {
        // g = e^{2φ}δ, φ = 0.1 x₁: Γ^k_ij = δ^k_i ∂_jφ + δ^k_j ∂_iφ − δ_ij ∂_kφ
        let err = |h: f64| {
            let grid = GridSpec::cube(3, 0.5, h).unwrap();
            let g = MetricField::from_analytic(
                grid.clone(),
                exp_conformal(3, |x| 0.1 * x[0] + 0.05 * x[1] * x[1]),
                Regularity::Smooth,
            )
            .unwrap();
            let gam = christoffel(&g).unwrap();
            let mut e: f64 = 0.0;
            grid.for_each_node(|lin, idx, x| {
                if grid.is_boundary(idx) {
                    return;
                }
                let dphi = [0.1, 0.1 * x[1], 0.0];
                for k in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                            let exact = d(k, i) * dphi[j] + d(k, j) * dphi[i] - d(i, j) * dphi[k];
                            let got = gam[lin * 27 + (k * 3 + i) * 3 + j];
                            assert_eq!(got, gam[lin * 27 + (k * 3 + j) * 3 + i]);
                            e = e.max((got - exact).abs());
                        }
                    }
                }
            });
            e
        };
        let (a, b, c) = (err(0.1), err(0.05), err(0.025));
        assert!(b / c > 3.5, "{a} {b} {c}");
    }

    #[test]
    fn sphere_like_metric_curvature() {
        // (1+|x|²)^{-2}δ in 3D has constant scalar curvature 24
        let err = |h: f64| {
            let grid = GridSpec::cube(3, 0.5, h).unwrap();
            let g = MetricField::from_analytic(
                grid.clone(),
                Arc::new(RadialConformalMetric::new(
                    3,
                    Arc::new(|r: f64| {
                        let q = 1.0 + r * r;
                        (q.powi(-2), -4.0 * r * q.powi(-3))
                    }),
                )),
                Regularity::Smooth,
            )
            .unwrap();
            let r = scalar_pointwise(&g).unwrap();
            let mut e: f64 = 0.0;
            grid.for_each_node(|lin, idx, _| {
                if !grid.is_boundary(idx) {
                    e = e.max((r.values()[lin] - 24.0).abs());
                }
            });
            e
        };
        let (a, b) = (err(0.1), err(0.05));
        assert!(b < 0.1 && a / b > 3.5, "{a} {b}");
        // the finite-difference route agrees too
        let grid = GridSpec::cube(3, 0.5, 0.05).unwrap();
        let g = MetricField::from_analytic(
            grid.clone(),
            Arc::new(ClosureMetric::new(3, |x| {
                let q = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
                Mat::scalar(3, q.powi(-2))
            })),
            Regularity::Smooth,
        )
        .unwrap();
        let r = scalar_pointwise_with(&g, DerivativeMode::FiniteDifference).unwrap();
        let c = grid.linear(&[10, 10, 10]);
        assert!((r.values()[c] - 24.0).abs() < 0.15, "{}", r.values()[c]);
    }

    #[test]
    fn rough_metric_refuses_pointwise() {
        let grid = GridSpec::cube(3, 0.5, 0.1).unwrap();
        let g = MetricField::euclidean(grid)
            .unwrap()
            .with_regularity(Regularity::Rough { p: 3.0 });
        assert!(matches!(scalar_pointwise(&g), Err(Error::Contract(_))));
        assert!(matches!(
            scalar_pointwise_with(
                &g.clone().without_analytic().with_regularity(Regularity::Smooth),
                DerivativeMode::Analytic
            ),
            Err(Error::Contract(_))
        ));
    }

    fn gaussian_bump_metric(grid: GridSpec) -> MetricField {
        // g = e^{2f}δ with f = 0.3 exp(−4|x|²): R = −e^{−2f}(4Δf + 2|∇f|²) in 3D
        MetricField::from_analytic(
            grid,
            exp_conformal(3, |x| 0.3 * (-4.0 * x.iter().map(|v| v * v).sum::<f64>()).exp()),
            Regularity::Smooth,
        )
        .unwrap()
    }

    fn gaussian_bump_scalar(x: &[f64]) -> f64 {
        let s: f64 = x.iter().map(|v| v * v).sum();
        let f = 0.3 * (-4.0 * s).exp();
        let lap = f * (64.0 * s - 24.0);
        let grad2 = 64.0 * f * f * s;
        -(-2.0 * f).exp() * (4.0 * lap + 2.0 * grad2)
    }

    #[test]
    fn pairing_matches_integral_of_curvature() {
        let err = |h: f64| {
            let grid = GridSpec::cube(3, 1.0, h).unwrap();
            let g = gaussian_bump_metric(grid.clone());
            let mu = DensityTest::bump(&grid, &[0.1, -0.05, 0.0], 0.7, 1.0).unwrap();
            let pair = pair_distributional_scalar(&g, &mu).unwrap();
            let mut exact = 0.0;
            grid.for_each_node(|lin, _, x| exact += gaussian_bump_scalar(x) * mu.values().values()[lin]);
            (pair - exact * grid.cell_volume()).abs()
        };
        let (a, b) = (err(0.1), err(0.05));
        assert!(a / b > 3.5, "{a} {b}");
    }

    #[test]
    fn pairing_translation_invariant() {
        let h = 0.05;
        let grid = GridSpec::cube(3, 1.0, h).unwrap();
        let pair_at = |shift: f64| {
            let g = MetricField::from_analytic(
                grid.clone(),
                Arc::new(ClosureMetric::new(3, move |x| {
                    let y = [x[0] - shift, x[1], x[2]];
                    let s: f64 = y.iter().map(|v| v * v).sum();
                    let mut m = Mat::scalar(3, 1.0 + 0.2 * (-3.0 * s).exp());
                    m.set_sym(0, 1, 0.05 * (-3.0 * s).exp() * y[2]);
                    m
                })),
                Regularity::Smooth,
            )
            .unwrap();
            let mu = DensityTest::bump(&grid, &[shift, 0.0, 0.0], 0.5, 1.0).unwrap();
            pair_distributional_scalar(&g, &mu).unwrap()
        };
        let (a, b) = (pair_at(0.0), pair_at(h));
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{a} {b}");
    }

    #[test]
    fn negative_part_of_known_bump() {
        let region = Region::centered(3, 0.8);
        let rel = |h: f64| {
            let grid = GridSpec::cube(3, 1.0, h).unwrap();
            let g = gaussian_bump_metric(grid.clone());
            let flat = MetricField::euclidean(grid.clone()).unwrap();
            let got = negative_part_norm(&g, 3.0, &region, &flat).unwrap();
            // direct quadrature of the analytic negative part
            let mut s = 0.0;
            grid.for_each_node(|_, _, x| {
                if region.contains(x) {
                    s += (-gaussian_bump_scalar(x)).max(0.0).powf(1.5);
                }
            });
            let oracle = (s * grid.cell_volume()).powf(1.0 / 1.5);
            assert!(got > 0.0);
            (got - oracle).abs() / oracle
        };
        let (a, b) = (rel(0.05), rel(0.025));
        assert!(b < 1e-2 && a / b > 3.0, "{a} {b}");
        let grid = GridSpec::cube(3, 1.0, 0.05).unwrap();
        let flat = MetricField::euclidean(grid.clone()).unwrap();
        // nonnegative curvature gives zero
        let sphere = MetricField::from_analytic(
            grid.clone(),
            Arc::new(ClosureMetric::new(3, |x| {
                Mat::scalar(3, (1.0 + x.iter().map(|v| v * v).sum::<f64>()).powi(-2))
            })),
            Regularity::Smooth,
        )
        .unwrap();
        assert_eq!(negative_part_norm(&sphere, 3.0, &region, &flat).unwrap(), 0.0);
    }

    #[test]
    fn mollified_scalar_two_routes() {
        let err = |h: f64| {
            let grid = GridSpec::cube(3, 0.6, h).unwrap();
            let k = MollifierKernel::new(3);
            let g = MetricField::from_analytic(
                grid.clone(),
                Arc::new(RadialConformalMetric::new(
                    3,
                    Arc::new(|r: f64| {
                        let e = (-2.0 * r * r).exp();
                        (1.0 + 0.3 * e, -1.2 * r * e)
                    }),
                )),
                Regularity::Smooth,
            )
            .unwrap();
            let a = mollified_scalar(&g, &k, 0.2).unwrap();
            let r = scalar_pointwise(&g).unwrap();
            let r = r.with_analytic(Arc::new(|_: &[f64]| 0.0));
            // padding is irrelevant at nodes more than ε inside the box
            let b = convolve(&r, &k, 0.2).unwrap();
            let inner = Region::centered(3, 0.6 - 0.2 - 2.0 * h);
            let mut e: f64 = 0.0;
            grid.for_each_node(|lin, _, x| {
                if inner.contains(x) {
                    e = e.max((a.values()[lin] - b.values()[lin]).abs());
                }
            });
            e
        };
        let (a, b) = (err(0.05), err(0.025));
        assert!(a / b > 3.0, "{a} {b}");
    }

    #[test]
    fn flat_commutator_vanishes() {
        let grid = GridSpec::cube(3, 0.6, 0.05).unwrap();
        let k = MollifierKernel::new(3);
        let g = MetricField::from_analytic(
            grid.clone(),
            Arc::new(RadialConformalMetric::new(3, Arc::new(|_| (1.0, 0.0)))),
            Regularity::Smooth,
        )
        .unwrap();
        let t = scalar_commutator_norm(&g, &k, &[0.2, 0.15, 0.1], 3.0, &Region::centered(3, 0.2)).unwrap();
        assert!(t.norms.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conformal_scalar_flat_oracle() {
        let err = |h: f64| {
            let grid = GridSpec::cube(3, 1.0, h).unwrap();
            let g = MetricField::euclidean(grid.clone()).unwrap();
            let ufn = |x: &[f64]| 1.0 + 0.2 * (-x.iter().map(|v| v * v).sum::<f64>() * 3.0).exp();
            let u = ScalarField::from_fn(grid.clone(), ufn).unwrap();
            let rt = conformal_scalar(&g, &u).unwrap();
            let one = ScalarField::constant(grid.clone(), 1.0).unwrap();
            assert_eq!(conformal_scalar(&g, &one).unwrap().max_abs(), 0.0);
            let mut e: f64 = 0.0;
            grid.for_each_node(|lin, idx, x| {
                if grid.is_boundary(idx) {
                    return;
                }
                let s: f64 = x.iter().map(|v| v * v).sum();
                let b = 0.2 * (-3.0 * s).exp();
                let lap = b * (36.0 * s - 18.0);
                let exact = -8.0 * ufn(x).powi(-5) * lap;
                e = e.max((rt.values()[lin] - exact).abs());
            });
            e
        };
        let (a, b) = (err(0.1), err(0.05));
        assert!(a / b > 3.5, "{a} {b}");
    }

    #[test]
    fn density_battery_fits_grid() {
        let grid = GridSpec::cube(3, 1.0, 0.05).unwrap();
        let bat = DensityTest::battery(&grid, &Region::Whole, 7, 0.3).unwrap();
        assert_eq!(bat.len(), 7);
        assert!(bat.iter().all(|d| d.is_nonnegative() && d.values().max() > 0.0));
        assert!(DensityTest::battery(&grid, &Region::Whole, 1, 0.95).is_err());
    }

    fn random_sym(vals: &[f64], n: usize, shift: f64) -> Mat {
        let mut m = Mat::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                m.set_sym(i, j, vals[k] + if i == j { shift } else { 0.0 });
                k += 1;
            }
        }
        m
    }

    proptest! {
        #[test]
        fn quadratic_part_two_assemblies(
            n in 2usize..5,
            base in prop::collection::vec(-0.3f64..0.3, 10),
            derivs in prop::collection::vec(-1.0f64..1.0, 40),
        ) {
            let g = random_sym(&base, n, 1.5);
            let mut dg = [Mat::zeros(n); MAX_DIM];
            for m in 0..n {
                dg[m] = random_sym(&derivs[m * 10..], n, 0.0);
            }
            let pc = point_curvature(&g, &dg[..n]).unwrap();
            let alt = quadratic_part_alternative(&g, &dg[..n]).unwrap();
            prop_assert!((pc.f - alt).abs() <= 1e-12 * (1.0 + pc.f.abs()));
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        prop_assert_eq!(pc.gamma[k][i][j], pc.gamma[k][j][i]);
                    }
                }
            }
        }
    }
}
