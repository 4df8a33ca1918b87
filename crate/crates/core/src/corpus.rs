//! Closed-form test metrics with known regularity, curvature and mass.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::metric::{AnalyticMetric, RadialConformalMetric};
use crate::fields::{GridSpec, MetricField, Regularity};
use crate::linalg::MAX_DIM;
use crate::special::unit_sphere_area;

/// A corpus metric plus what is known about it.
#[derive(Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub parameters: Vec<(&'static str, f64)>,
    pub regularity: Regularity,
    pub known_mass: Option<f64>,
    pub mass_oracle: &'static str,
    pub curvature_facts: Vec<&'static str>,
    pub nonsmooth_locus: &'static str,
    /// Radius beyond which the metric is smooth and decaying.
    pub smooth_beyond: f64,
    /// Decay rate τ of g − δ.
    pub tau: f64,
    pub metric: Arc<dyn AnalyticMetric>,
    profile: Option<RadialConformalMetric>,
}

impl std::fmt::Debug for CorpusEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CorpusEntry")
            .field("name", &self.name)
            .field("parameters", &self.parameters)
            .field("regularity", &self.regularity)
            .finish()
    }
}

impl CorpusEntry {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// Samples the metric on `grid`, keeping the closed form as evaluator.
    pub fn on_grid(&self, grid: &GridSpec) -> Result<MetricField> {
        if grid.dim() != self.dim() {
            return Err(Error::Argument(format!(
                "{} is {}-dimensional, grid is {}-dimensional",
                self.name,
                self.dim(),
                grid.dim()
            )));
        }
        MetricField::from_analytic(grid.clone(), self.metric.clone(), self.regularity)
    }

    /// Conformal profile ψ(r), ψ'(r) for entries of the form ψ(|x|)δ.
    pub fn radial_profile(&self, r: f64) -> Option<(f64, f64)> {
        self.profile.as_ref().map(|p| p.profile(r))
    }

    pub fn record(&self) -> CorpusRecord {
        CorpusRecord {
            name: self.name.to_string(),
            dimension: self.dim(),
            parameters: self.parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            regularity: match self.regularity {
                Regularity::Smooth => "smooth".into(),
                Regularity::Rough { p } => format!("C0 ∩ W1,{p}"),
            },
            known_mass: self.known_mass,
            mass_oracle: self.mass_oracle.to_string(),
            curvature_facts: self.curvature_facts.iter().map(|s| s.to_string()).collect(),
            nonsmooth_locus: self.nonsmooth_locus.to_string(),
            smooth_beyond: self.smooth_beyond,
            tau: self.tau,
        }
    }
}

/// Plain-data description of an entry for the manifest.
#[derive(Clone, Debug, Serialize)]
pub struct CorpusRecord {
    pub name: String,
    pub dimension: usize,
    pub parameters: Vec<(String, f64)>,
    pub regularity: String,
    pub known_mass: Option<f64>,
    pub mass_oracle: String,
    pub curvature_facts: Vec<String>,
    pub nonsmooth_locus: String,
    pub smooth_beyond: f64,
    pub tau: f64,
}

fn radial(n: usize, f: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> RadialConformalMetric {
    RadialConformalMetric::new(n, Arc::new(f))
}

fn check_dim(n: usize) -> Result<()> {
    if !(3..=MAX_DIM).contains(&n) {
        return Err(Error::Argument(format!(
            "corpus metrics need 3 ≤ n ≤ {MAX_DIM}, got {n}"
        )));
    }
    Ok(())
}

/// Flat δ.
pub fn make_euclidean(n: usize) -> Result<CorpusEntry> {
    check_dim(n)?;
    let p = radial(n, |_| (1.0, 0.0));
    Ok(CorpusEntry {
        name: "euclidean",
        parameters: vec![("n", n as f64)],
        regularity: Regularity::Smooth,
        known_mass: Some(0.0),
        mass_oracle: "mass integrand vanishes identically",
        curvature_facts: vec!["R ≡ 0"],
        nonsmooth_locus: "none",
        smooth_beyond: 0.0,
        tau: n as f64,
        metric: Arc::new(p.clone()),
        profile: Some(p),
    })
}

/// Radius of the polynomial cap inside the Schwarzschild entry.
pub const SCHWARZSCHILD_CAP: f64 = 0.5;

/// Coefficients (a, b, c) of a + br² + cr⁴ matching u = 1 + m/(2r^{n−2})
/// with its first two derivatives at r₀.
pub fn schwarzschild_cap_coefficients(n: usize, m: f64, r0: f64) -> (f64, f64, f64) {
    let k = n as f64 - 2.0;
    let u0 = 1.0 + m / (2.0 * r0.powf(k));
    let d1 = -m * k / (2.0 * r0.powf(k + 1.0));
    let d2 = m * k * (k + 1.0) / (2.0 * r0.powf(k + 2.0));
    let c = (d2 - d1 / r0) / (8.0 * r0 * r0);
    let b = d1 / (2.0 * r0) - 2.0 * c * r0 * r0;
    let a = u0 - b * r0 * r0 - c * r0.powi(4);
    (a, b, c)
}

/// (1 + m/(2|x|^{n−2}))^{4/(n−2)}δ for |x| ≥ 1/2, with u replaced inside by
/// the even quartic matching u, u′, u″ at 1/2 (C² junction, positive).
pub fn make_schwarzschild(n: usize, m: f64) -> Result<CorpusEntry> {
    check_dim(n)?;
    if !(m > 0.0) {
        return Err(Error::Argument(format!("mass m = {m} must be positive")));
    }
    let k = n as f64 - 2.0;
    let e = 4.0 / k;
    let r0 = SCHWARZSCHILD_CAP;
    let (a, b, c) = schwarzschild_cap_coefficients(n, m, r0);
    let p = radial(n, move |r| {
        let (u, du) = if r >= r0 {
            (1.0 + m / (2.0 * r.powf(k)), -m * k / (2.0 * r.powf(k + 1.0)))
        } else {
            (a + b * r * r + c * r.powi(4), 2.0 * b * r + 4.0 * c * r.powi(3))
        };
        (u.powf(e), e * u.powf(e - 1.0) * du)
    });
    Ok(CorpusEntry {
        name: "schwarzschild",
        parameters: vec![("n", n as f64), ("m", m)],
        regularity: Regularity::Smooth,
        known_mass: Some(m),
        mass_oracle: "m(r) = m(1 + m/2r)^3 on coordinate spheres (n = 3), limit m",
        curvature_facts: vec!["R = 0 for |x| > 1/2", "cap |x| < 1/2 excluded from curvature checks"],
        nonsmooth_locus: "C2 junction at |x| = 1/2",
        smooth_beyond: r0,
        tau: k,
        metric: Arc::new(p.clone()),
        profile: Some(p),
    })
}

/// u = 1 + m/2 for r ≤ 1 and 1 + m/(2r^{n−2}) beyond; g = u^{4/(n−2)}δ.
pub fn make_miao_corner(n: usize, m: f64) -> Result<CorpusEntry> {
    check_dim(n)?;
    if !(m > 0.0) {
        return Err(Error::Argument(format!("mass m = {m} must be positive")));
    }
    let k = n as f64 - 2.0;
    let e = 4.0 / k;
    let p = radial(n, move |r| {
        let (u, du) = if r <= 1.0 {
            (1.0 + 0.5 * m, 0.0)
        } else {
            (1.0 + m / (2.0 * r.powf(k)), -m * k / (2.0 * r.powf(k + 1.0)))
        };
        (u.powf(e), e * u.powf(e - 1.0) * du)
    });
    Ok(CorpusEntry {
        name: "miao_corner",
        parameters: vec![("n", n as f64), ("m", m)],
        regularity: Regularity::Rough { p: n as f64 },
        known_mass: Some(m),
        mass_oracle: "exterior is Schwarzschild with mass m",
        curvature_facts: vec![
            "R = 0 off the sphere |x| = 1",
            "distributional R ≥ 0: surface density 2(n−1)m(1+m/2)^{−(n+2)/(n−2)} dA against f dx",
        ],
        nonsmooth_locus: "sphere |x| = 1 (jump in the radial derivative)",
        smooth_beyond: 1.0,
        tau: k,
        metric: Arc::new(p.clone()),
        profile: Some(p),
    })
}

/// ⟨R, f dx⟩ for the corner entry: c_n times the jump (n−2)m/2 of −u′ at
/// r = 1, weighted by u^{−(n+2)/(n−2)}, i.e.
/// 2(n−1)m(1+m/2)^{−(n+2)/(n−2)}·∫_{|x|=1} f dA.
///
/// Equivalently 2(H₋ − H₊) dA_g against f dμ_g after converting f dx.
pub fn miao_corner_density(n: usize, m: f64) -> f64 {
    let u1 = 1.0 + 0.5 * m;
    2.0 * (n as f64 - 1.0) * m * u1.powf(-(n as f64 + 2.0) / (n as f64 - 2.0))
}

/// Corner pairing for a radial bump f(|x|): density × f(1) × ω_{n−1}.
pub fn miao_corner_pairing_radial(n: usize, m: f64, f_at_one: f64) -> f64 {
    miao_corner_density(n, m) * f_at_one * unit_sphere_area(n)
}

/// C^∞ cutoff equal to 1 for r ≤ 1/2 and 0 for r ≥ 1, with derivative.
pub fn smooth_cutoff(r: f64) -> (f64, f64) {
    let psi = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let dpsi = |t: f64| if t > 0.0 { (-1.0 / t).exp() / (t * t) } else { 0.0 };
    if r <= 0.5 {
        return (1.0, 0.0);
    }
    if r >= 1.0 {
        return (0.0, 0.0);
    }
    let (a, b) = (psi(1.0 - r), psi(r - 0.5));
    let (da, db) = (-dpsi(1.0 - r), dpsi(r - 0.5));
    let s = a + b;
    (a / s, (da * s - a * (da + db)) / (s * s))
}

/// (1 + a·η(|x|)|x|^β)δ with η the smooth cutoff; in C⁰∩W^{1,n} but not
/// Lipschitz at the origin, and exactly δ for |x| ≥ 1.
pub fn make_w1n_singular(n: usize, beta: f64, a: f64) -> Result<CorpusEntry> {
    check_dim(n)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Argument(format!("β = {beta} must lie in (0, 1)")));
    }
    // η r^β ≤ 1, so a > −1 keeps the factor positive
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::Argument(format!(
            "a = {a} breaks positive-definiteness (need a > −1)"
        )));
    }
    let p = radial(n, move |r| {
        let (eta, deta) = smooth_cutoff(r);
        if eta == 0.0 && deta == 0.0 {
            return (1.0, 0.0);
        }
        let rb = r.powf(beta);
        let d = if r > 0.0 {
            a * (deta * rb + eta * beta * rb / r)
        } else {
            0.0
        };
        (1.0 + a * eta * rb, d)
    });
    Ok(CorpusEntry {
        name: "w1n_singular",
        parameters: vec![("n", n as f64), ("beta", beta), ("a", a)],
        regularity: Regularity::Rough { p: n as f64 },
        known_mass: Some(0.0),
        mass_oracle: "metric is exactly δ for |x| ≥ 1",
        curvature_facts: vec!["R ~ |x|^{β−2} near the origin", "R = 0 for |x| ≥ 1"],
        nonsmooth_locus: "origin (gradient ~ |x|^{β−1})",
        smooth_beyond: 1.0,
        tau: n as f64,
        metric: Arc::new(p.clone()),
        profile: Some(p),
    })
}

/// Default parameterization of every entry, in a fixed order.
pub fn manifest() -> Result<Vec<CorpusRecord>> {
    Ok(vec![
        make_euclidean(3)?.record(),
        make_schwarzschild(3, 1.0)?.record(),
        make_miao_corner(3, 1.0)?.record(),
        make_w1n_singular(3, 0.5, 0.1)?.record(),
    ])
}

/// Looks up an entry by name with its parameters (missing ones default,
/// unknown ones are an error).
pub fn by_name(name: &str, n: usize, params: &[(&str, f64)]) -> Result<CorpusEntry> {
    let allowed: &[&str] = match name {
        "schwarzschild" | "miao_corner" => &["m"],
        "w1n_singular" => &["beta", "a"],
        _ => &[],
    };
    if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
        return Err(Error::Argument(format!("`{name}` has no parameter `{k}`")));
    }
    let get = |k: &str, d: f64| params.iter().find(|(p, _)| *p == k).map_or(d, |(_, v)| *v);
    match name {
        "euclidean" => make_euclidean(n),
        "schwarzschild" => make_schwarzschild(n, get("m", 1.0)),
        "miao_corner" => make_miao_corner(n, get("m", 1.0)),
        "w1n_singular" => make_w1n_singular(n, get("beta", 0.5), get("a", 0.1)),
        other => Err(Error::Argument(format!("unknown corpus entry `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{adm_mass, AsymptoticModel};
    use crate::curvature::{pair_distributional_scalar, scalar_pointwise, DensityTest};
    use crate::fields::metric::radius;

    #[test]
    fn cap_matches_to_second_order() {
        let (a, b, c) = schwarzschild_cap_coefficients(3, 1.0, 0.5);
        assert!((a - 2.875).abs() < 1e-14 && (b + 5.0).abs() < 1e-14 && (c - 6.0).abs() < 1e-13);
        let e = make_schwarzschild(3, 1.0).unwrap();
        let (lo, hi) = (e.radial_profile(0.5 - 1e-9).unwrap(), e.radial_profile(0.5).unwrap());
        assert!((lo.0 - hi.0).abs() < 1e-7 && (lo.1 - hi.1).abs() < 1e-6);
        // u stays above its junction value inside the cap
        for i in 0..50 {
            let r = 0.5 * i as f64 / 50.0;
            assert!(e.radial_profile(r).unwrap().0 >= 16.0);
        }
    }

    #[test]
    fn corner_is_continuous() {
        let e = make_miao_corner(3, 1.0).unwrap();
        let (a, b) = (
            e.radial_profile(1.0).unwrap().0,
            e.radial_profile(1.0 + 1e-12).unwrap().0,
        );
        assert!((a - 1.5f64.powi(4)).abs() < 1e-12 && (a - b).abs() < 1e-10);
    }

    #[test]
    fn corner_one_sided_derivatives_jump() {
        // u′(1⁻) − u′(1⁺) = m(n−2)/2, measured on shrinking stencils
        let e = make_miao_corner(3, 1.0).unwrap();
        let u = |r: f64| e.radial_profile(r).unwrap().0.powf(0.25);
        let mut prev = f64::INFINITY;
        for k in 2..6 {
            let d = 10f64.powi(-k);
            let jump = (u(1.0) - u(1.0 - d)) / d - (u(1.0 + d) - u(1.0)) / d;
            let err = (jump - 0.5).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn cutoff_properties() {
        assert_eq!(smooth_cutoff(0.3), (1.0, 0.0));
        assert_eq!(smooth_cutoff(1.0), (0.0, 0.0));
        let h = 1e-6;
        for r in [0.55, 0.7, 0.9] {
            let fd = (smooth_cutoff(r + h).0 - smooth_cutoff(r - h).0) / (2.0 * h);
            assert!((fd - smooth_cutoff(r).1).abs() < 1e-6);
        }
        let e = make_w1n_singular(3, 0.5, 0.1).unwrap();
        assert_eq!(e.metric.eval(&[0.6, 0.6, 0.6]).get(0, 0), 1.0);
        assert!(make_w1n_singular(3, 1.5, 0.1).is_err());
        assert!(make_w1n_singular(3, 0.5, -1.0).is_err());
    }

    #[test]
    fn known_masses() {
        let model = AsymptoticModel::new(3, 1.0, 1.0, vec![8.0, 16.0, 32.0]).unwrap();
        for e in [make_euclidean(3).unwrap(), make_w1n_singular(3, 0.5, 0.1).unwrap()] {
            assert!(adm_mass(e.metric.as_ref(), &model).unwrap().m_inf.abs() < 1e-8);
        }
        for e in [make_schwarzschild(3, 1.0).unwrap(), make_miao_corner(3, 1.0).unwrap()] {
            assert!((adm_mass(e.metric.as_ref(), &model).unwrap().m_inf - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn corner_interior_is_flat() {
        let e = make_miao_corner(3, 1.0).unwrap();
        let grid = GridSpec::cube(3, 0.9, 0.05).unwrap();
        // the sampled field is constant inside r < 1; treat it as smooth there
        let g = e.on_grid(&grid).unwrap().with_regularity(Regularity::Smooth);
        let r = scalar_pointwise(&g).unwrap();
        grid.for_each_node(|lin, _, x| {
            if radius(x) < 0.9 {
                assert_eq!(r.values()[lin], 0.0);
            }
        });
    }

    #[test]
    fn corner_pairing_matches_jump_formula() {
        let e = make_miao_corner(3, 1.0).unwrap();
        let grid = GridSpec::cube(3, 1.6, 0.025).unwrap();
        let g = e.on_grid(&grid).unwrap();
        let mu = DensityTest::bump(&grid, &[0.0, 0.0, 0.0], 1.5, 1.0).unwrap();
        let got = pair_distributional_scalar(&g, &mu).unwrap();
        let f1 = (1.0 - 1.0 / (1.0 - 1.0 / 2.25f64)).exp();
        let oracle = miao_corner_pairing_radial(3, 1.0, f1);
        assert!(got > 0.0);
        assert!((got - oracle).abs() / oracle < 0.05, "{got} vs {oracle}");
    }

    #[test]
    fn manifest_lists_entries() {
        let m = manifest().unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.iter().all(|r| r.known_mass.is_some() && !r.mass_oracle.is_empty()));
        assert!(by_name("nope", 3, &[]).is_err());
    }
}
