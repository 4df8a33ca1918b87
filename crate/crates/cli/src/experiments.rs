//! The seven named pipelines. Each reads its sections of the resolved
//! config, produces a table, and applies the `[thresholds]` it declares.

use std::sync::Arc;

use roughmass_core::asymptotics::{adm_mass, bump_battery, sobolev_sandwich_check, AsymptoticModel};
use roughmass_core::conformal::{mass_chain, u_convergence_norms, ChainConfig, FarFieldWindow, SolverOptions};
use roughmass_core::corpus::{by_name, CorpusEntry};
use roughmass_core::curvature::{
    bump_centers, negative_part_norm_of, pair_distributional_scalar, scalar_commutator_study, scalar_pointwise,
    DensityTest,
};
use roughmass_core::fields::norms::tensor_norm;
use roughmass_core::fields::ScalarFn;
use roughmass_core::friedrichs::{eps_derivative_decay, friedrichs_w1r, product_commutator_rate, CommutatorExperiment};
use roughmass_core::mollify::{build_g_eps, metric_equivalence_factor, SmoothingPlan};
use roughmass_core::rates::fit_rate;
use roughmass_core::{GridSpec, MetricField, MollifierKernel, NormSpec, Region, ScalarField};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Stage};
use crate::report::{increases, last_over_first, Check, Outcome, Relation, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    MollifyConvergence,
    FriedrichsRate,
    ScalarNegpart,
    ScalarCommutator,
    AdmMass,
    ConformalMass,
    SobolevSandwich,
}

pub const ALL: [Experiment; 7] = [
    Experiment::MollifyConvergence,
    Experiment::FriedrichsRate,
    Experiment::ScalarNegpart,
    Experiment::ScalarCommutator,
    Experiment::AdmMass,
    Experiment::ConformalMass,
    Experiment::SobolevSandwich,
];

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::MollifyConvergence => "mollify-convergence",
            Experiment::FriedrichsRate => "friedrichs-rate",
            Experiment::ScalarNegpart => "scalar-negpart",
            Experiment::ScalarCommutator => "scalar-commutator",
            Experiment::AdmMass => "adm-mass",
            Experiment::ConformalMass => "conformal-mass",
            Experiment::SobolevSandwich => "sobolev-sandwich",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, CliError> {
        ALL.into_iter().find(|e| e.name() == name).ok_or_else(|| {
            let known: Vec<&str> = ALL.iter().map(|e| e.name()).collect();
            CliError::Config(format!("unknown experiment `{name}`; known: {}", known.join(", ")))
        })
    }

    /// The mathematical statement the experiment probes.
    pub fn claim(self) -> &'static str {
        match self {
            Experiment::MollifyConvergence => {
                "localized smoothing: g_ε → g in W^{1,n}(K), g_ε = g outside K_ε, equivalence factor ρ(ε) → 1"
            }
            Experiment::FriedrichsRate => {
                "Friedrichs commutator (a∗ρ_ε)(f∗ρ_ε) − (af)∗ρ_ε → 0 in W^{1,r} with an O(ε) L^r rate; ε‖∂(f∗ρ_ε)‖_{L^q} → 0"
            }
            Experiment::ScalarNegpart => {
                "R[g] ≥ 0 in the distributional sense forces ‖R[g_ε]₋‖_{L^{n/2}} → 0"
            }
            Experiment::ScalarCommutator => "R[g]∗ρ_ε − R[g∗ρ_ε] → 0 in L^{p/2} for g ∈ W^{1,p}",
            Experiment::AdmMass => "ADM surface integral with tail extrapolation recovers the mass",
            Experiment::ConformalMass => {
                "conformal correction g̃_ε = u_ε^{4/(n−2)}g_ε has m(g̃_ε) = m(g_ε) + 2A_ε → m(g)"
            }
            Experiment::SobolevSandwich => {
                "Sobolev quotients of g and g_ε agree up to the factor ρ(ε)ⁿ for every test function"
            }
        }
    }

    /// Config keys the experiment reads besides `[thresholds]` and `[output]`.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::MollifyConvergence => &["corpus", "region", "scales"],
            Experiment::FriedrichsRate => &["functions", "grid", "region", "scales.eps", "exponents"],
            Experiment::ScalarNegpart => &[
                "corpus",
                "region",
                "scales",
                "exponents.p",
                "grid",
                "battery.densities",
                "battery.density_radius",
                "battery.density_h",
            ],
            Experiment::ScalarCommutator => &["corpus", "region", "scales", "exponents.p"],
            Experiment::AdmMass => &["corpus", "mass"],
            Experiment::ConformalMass => &["corpus", "region", "scales", "solver", "mass", "battery.bumps"],
            Experiment::SobolevSandwich => &["corpus", "region", "scales", "battery.bumps"],
        }
    }

    /// Experiment-specific defaults layered over the shared ones; the
    /// `[thresholds]` table here is also the list of accepted threshold keys.
    pub fn defaults(self) -> &'static str {
        match self {
            Experiment::MollifyConvergence => {
                r#"
[thresholds]
max_w1n_increases = 0.0
max_rho_increases = 0.0
max_outside_deviation = 0.0
"#
            }
            Experiment::FriedrichsRate => {
                r#"
[grid]
half_width = 1.0
h = 0.003125

[region]
half_width = 0.8

[scales]
eps = [0.1, 0.05, 0.025, 0.0125]

[exponents]
p = 2.0
q = 2.0

[thresholds]
min_lr_slope = 0.9
max_w1r_increases = 0.0
max_w1r_last_over_first = 0.25
min_derivative_slope = 0.4
max_derivative_slope = 0.6
"#
            }
            Experiment::ScalarNegpart => {
                r#"
[thresholds]
max_increases = 0.0
max_last_over_first = 0.5
min_pairing = -1e-8
"#
            }
            Experiment::ScalarCommutator => {
                r#"
[corpus]
name = "w1n_singular"
params = { beta = 0.5, a = 0.1 }

[region]
half_width = 0.5

[scales]
eps = [0.2, 0.1, 0.05, 0.025]

[thresholds]
max_increases = 0.0
"#
            }
            Experiment::AdmMass => {
                r#"
[corpus]
name = "schwarzschild"

[thresholds]
max_mass_error = 1e-3
"#
            }
            Experiment::ConformalMass => {
                r#"
[thresholds]
max_a_relative_gap = 0.05
max_mass_path_gap = 0.05
max_mass_error_increases = 0.0
max_residual = 1e-9
min_u = 0.0
max_u = 1.0000000001
max_u_norm_increases = 0.0
"#
            }
            Experiment::SobolevSandwich => {
                r#"
[thresholds]
max_violations = 0.0
max_rho_increases = 0.0
"#
            }
        }
    }

    fn min_scales(self) -> usize {
        match self {
            Experiment::AdmMass => 0,
            Experiment::SobolevSandwich => 1,
            Experiment::ScalarNegpart => 2,
            _ => 3,
        }
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
        if cfg.scales.eps.len() < self.min_scales() {
            return Err(CliError::Config(format!(
                "{} needs at least {} scales",
                self.name(),
                self.min_scales()
            )));
        }
        let ctx = Ctx { cfg };
        match self {
            Experiment::MollifyConvergence => ctx.mollify_convergence(),
            Experiment::FriedrichsRate => ctx.friedrichs_rate(),
            Experiment::ScalarNegpart => ctx.scalar_negpart(),
            Experiment::ScalarCommutator => ctx.scalar_commutator(),
            Experiment::AdmMass => ctx.adm_mass(),
            Experiment::ConformalMass => ctx.conformal_mass(),
            Experiment::SobolevSandwich => ctx.sobolev_sandwich(),
        }
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
}

/// Metric, its smoothing at one scale, and the plan used.
struct Smoothed {
    grid: GridSpec,
    g: MetricField,
    g_eps: MetricField,
    plan: SmoothingPlan,
}

impl Ctx<'_> {
    fn threshold(&self, key: &str) -> f64 {
        self.cfg.thresholds[key]
    }

    fn check(&self, out: &mut Outcome, name: &str, value: f64, relation: Relation, key: &str) {
        out.checks
            .push(Check::new(name, value, relation, key, self.threshold(key)));
    }

    fn entry(&self) -> Result<CorpusEntry, CliError> {
        let params: Vec<(&str, f64)> = self.cfg.corpus.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        by_name(&self.cfg.corpus.name, self.cfg.corpus.n, &params).stage("corpus")
    }

    fn region(&self, n: usize) -> Region {
        Region::centered(n, self.cfg.region.half_width)
    }

    fn fixed_grid(&self, n: usize) -> Result<GridSpec, CliError> {
        GridSpec::cube(n, self.cfg.grid.half_width, self.cfg.grid.h).stage("grid")
    }

    /// Fresh grid at h = ε·h_over_eps covering K_ε plus three nodes.
    fn smoothed(&self, e: &CorpusEntry, k: &MollifierKernel, eps: f64) -> Result<Smoothed, CliError> {
        let kr = self.region(e.dim());
        let h = eps * self.cfg.scales.h_over_eps;
        let grid = GridSpec::covering(&kr, eps + 3.0 * h, h).stage("grid")?;
        let g = e.on_grid(&grid).stage("corpus")?;
        let plan = SmoothingPlan::new(&grid, kr, eps, k).stage("smoothing plan")?;
        let g_eps = build_g_eps(&g, &plan, k).stage("build_g_eps")?;
        Ok(Smoothed { grid, g, g_eps, plan })
    }

    fn fit_summary(&self, out: &mut Outcome, prefix: &str, values: &[f64]) -> Result<(), CliError> {
        if self.cfg.scales.eps.len() >= 3 {
            let fit = fit_rate(&self.cfg.scales.eps, values).stage("rate fit")?;
            out.summary(&format!("{prefix}_slope"), fit.slope);
            out.summary(&format!("{prefix}_residual"), fit.residual);
        }
        Ok(())
    }

    fn mollify_convergence(&self) -> Result<Outcome, CliError> {
        let e = self.entry()?;
        let n = e.dim();
        let k = MollifierKernel::new(n);
        let mut t = Table::new(&["eps", "h", "sup_deviation", "w1n_deviation", "outside_deviation", "rho"]);
        for &eps in &self.cfg.scales.eps {
            let s = self.smoothed(&e, &k, eps)?;
            let diff = s.g_eps.tensor().sub(s.g.tensor()).stage("deviation")?;
            let fro = diff.frobenius();
            let mask = s.plan.fattened_mask();
            let outside = fro
                .values()
                .iter()
                .zip(&mask)
                .filter(|(_, &m)| !m)
                .fold(0.0f64, |a, (v, _)| a.max(v.abs()));
            let w1n = tensor_norm(&diff, &NormSpec::w1p(n as f64, self.region(n))).stage("norms")?;
            let rho = metric_equivalence_factor(&s.g, &s.g_eps)
                .stage("equivalence factor")?
                .rho;
            t.push(vec![eps, s.grid.max_spacing(), fro.max_abs(), w1n, outside, rho]);
        }
        let mut out = Outcome::new(t);
        let w1n = out.table.column("w1n_deviation");
        self.fit_summary(&mut out, "w1n", &w1n)?;
        let rho = out.table.column("rho");
        let outside = out.table.column("outside_deviation").into_iter().fold(0.0, f64::max);
        self.check(
            &mut out,
            "w1n_increases",
            increases(&w1n),
            Relation::AtMost,
            "max_w1n_increases",
        );
        self.check(
            &mut out,
            "rho_increases",
            increases(&rho),
            Relation::AtMost,
            "max_rho_increases",
        );
        self.check(
            &mut out,
            "outside_deviation",
            outside,
            Relation::AtMost,
            "max_outside_deviation",
        );
        Ok(out)
    }

    fn friedrichs_rate(&self) -> Result<Outcome, CliError> {
        let fs = &self.cfg.functions;
        let grid = self.fixed_grid(fs.dim)?;
        let a = named_function(&fs.a, &grid)?;
        let f = named_function(&fs.f, &grid)?;
        let k = MollifierKernel::new(fs.dim);
        let kr = self.region(fs.dim);
        let eps = self.cfg.scales.eps.clone();
        let (p, q) = (self.cfg.exponents.p, self.cfg.exponents.q);
        let exp = CommutatorExperiment::new(a, f, p, q, eps.clone(), kr.clone()).stage("commutator setup")?;
        let lr = product_commutator_rate(&exp, &k).stage("L^r commutator")?;
        let w1r = friedrichs_w1r(&exp, &k).stage("W^{1,r} commutator")?;
        let dd = eps_derivative_decay(&exp.f, &k, q, &eps, &kr).stage("derivative decay")?;
        let mut t = Table::new(&["eps", "lr_norm", "w1r_norm", "derivative_decay"]);
        for i in 0..eps.len() {
            t.push(vec![eps[i], lr.values[i], w1r.values[i], dd.values[i]]);
        }
        let mut out = Outcome::new(t);
        out.summary("r", exp.r());
        for (name, fit) in [("lr", &lr), ("w1r", &w1r), ("derivative", &dd)] {
            out.summary(&format!("{name}_slope"), fit.slope);
            out.summary(&format!("{name}_residual"), fit.residual);
        }
        self.check(&mut out, "lr_slope", lr.slope, Relation::AtLeast, "min_lr_slope");
        self.check(
            &mut out,
            "w1r_increases",
            increases(&w1r.values),
            Relation::AtMost,
            "max_w1r_increases",
        );
        self.check(
            &mut out,
            "w1r_last_over_first",
            last_over_first(&w1r.values),
            Relation::AtMost,
            "max_w1r_last_over_first",
        );
        self.check(
            &mut out,
            "derivative_slope_low",
            dd.slope,
            Relation::AtLeast,
            "min_derivative_slope",
        );
        self.check(
            &mut out,
            "derivative_slope_high",
            dd.slope,
            Relation::AtMost,
            "max_derivative_slope",
        );
        Ok(out)
    }

    fn scalar_negpart(&self) -> Result<Outcome, CliError> {
        let e = self.entry()?;
        let n = e.dim();
        let k = MollifierKernel::new(n);
        let p = self.cfg.exponents.p;
        let mut t = Table::new(&["eps", "h", "negpart_norm"]);
        for &eps in &self.cfg.scales.eps {
            let s = self.smoothed(&e, &k, eps)?;
            let r = scalar_pointwise(&s.g_eps).stage("scalar curvature")?;
            let norm = negative_part_norm_of(&r, p, &self.region(n).grown(eps), &s.g).stage("negative part")?;
            t.push(vec![eps, s.grid.max_spacing(), norm]);
        }
        let mut out = Outcome::new(t);
        let norms = out.table.column("negpart_norm");
        self.fit_summary(&mut out, "negpart", &norms)?;
        self.check(
            &mut out,
            "negpart_increases",
            increases(&norms),
            Relation::AtMost,
            "max_increases",
        );
        self.check(
            &mut out,
            "negpart_last_over_first",
            last_over_first(&norms),
            Relation::AtMost,
            "max_last_over_first",
        );

        // Each density is paired on its own grid around its support; the
        // node sum over a support that grazes the corner needs a fine h.
        let bat = &self.cfg.battery;
        if bat.densities > 0 {
            let span = self.fixed_grid(n)?;
            let centers =
                bump_centers(&span, &Region::Whole, bat.densities, bat.density_radius).stage("density battery")?;
            let h = bat.density_h;
            let mut lo = f64::INFINITY;
            for (i, c) in centers.iter().enumerate() {
                let grid = GridSpec::cube_at(c, bat.density_radius + 4.0 * h, h).stage("grid")?;
                let g = e.on_grid(&grid).stage("corpus")?;
                let mu = DensityTest::bump(&grid, c, bat.density_radius, 1.0).stage("density battery")?;
                let v = pair_distributional_scalar(&g, &mu).stage("pairing")?;
                out.summary(&format!("pairing_{i:02}"), v);
                lo = lo.min(v);
            }
            out.summary("pairing_min", lo);
            self.check(&mut out, "pairing_min", lo, Relation::AtLeast, "min_pairing");
        }
        Ok(out)
    }

    fn scalar_commutator(&self) -> Result<Outcome, CliError> {
        let e = self.entry()?;
        let n = e.dim();
        let k = MollifierKernel::new(n);
        let tab = scalar_commutator_study(
            e.metric.clone(),
            e.regularity,
            &k,
            &self.cfg.scales.eps,
            self.cfg.scales.h_over_eps,
            self.cfg.exponents.p,
            &self.region(n),
        )
        .stage("scalar commutator")?;
        let fit = tab.fit.clone().expect("three or more scales");
        let mut t = Table::new(&["eps", "norm", "fitted_slope", "residual"]);
        for (eps, norm) in tab.eps.iter().zip(&tab.norms) {
            t.push(vec![*eps, *norm, fit.slope, fit.residual]);
        }
        let mut out = Outcome::new(t);
        self.check(
            &mut out,
            "norm_increases",
            increases(&tab.norms),
            Relation::AtMost,
            "max_increases",
        );
        Ok(out)
    }

    fn adm_mass(&self) -> Result<Outcome, CliError> {
        let e = self.entry()?;
        let ms = &self.cfg.mass;
        let known = e
            .known_mass
            .ok_or_else(|| CliError::Config(format!("corpus `{}` has no known mass to compare with", e.name)))?;
        let mut model = AsymptoticModel::new(e.dim(), e.tau, e.smooth_beyond, ms.radii.clone())
            .stage("asymptotic model")?
            .with_order(ms.order);
        if ms.tail_exponent >= 0.0 {
            model = model.with_tail_exponent(ms.tail_exponent);
        }
        let est = adm_mass(e.metric.as_ref(), &model).stage("ADM mass")?;
        let mut t = Table::new(&["r", "m_of_r"]);
        for (r, m) in est.radii.iter().zip(&est.values) {
            t.push(vec![*r, *m]);
        }
        let mut out = Outcome::new(t);
        out.summary("m_inf", est.m_inf);
        out.summary("s", est.s);
        out.summary("residual", est.residual);
        out.summary("terms", est.terms as f64);
        out.summary("known_mass", known);
        let err = (est.m_inf - known).abs();
        out.summary("mass_error", err);
        self.check(&mut out, "mass_error", err, Relation::AtMost, "max_mass_error");
        if est.nonmonotone_tail {
            out.warnings.push("m(r) is not monotone over the radii".into());
        }
        Ok(out)
    }

    fn conformal_mass(&self) -> Result<Outcome, CliError> {
        let e = self.entry()?;
        let n = e.dim();
        let known = e
            .known_mass
            .ok_or_else(|| CliError::Config(format!("corpus `{}` has no known mass to compare with", e.name)))?;
        let c = self.cfg;
        let chain_cfg = ChainConfig {
            region: self.region(n),
            h_over_eps: c.scales.h_over_eps,
            solve_half_width: c.solver.half_width,
            solve_h: c.solver.h,
            solver: SolverOptions {
                tol: c.solver.tol,
                max_iter: (c.solver.max_iter > 0).then_some(c.solver.max_iter),
            },
            window: FarFieldWindow {
                inner_fraction: c.solver.window_inner_fraction,
                inverse_terms: c.solver.window_inverse_terms,
                ..FarFieldWindow::default()
            },
            tau: e.tau,
            mass_radii: c.mass.radii.clone(),
            quadrature_order: c.mass.order,
            tail_exponent: (c.mass.tail_exponent >= 0.0).then_some(c.mass.tail_exponent),
            existence_battery: c.battery.bumps,
            sandwich_battery: 0,
        };
        let k = MollifierKernel::new(n);
        let chain = mass_chain(e.metric.clone(), e.regularity, &k, &c.scales.eps, &chain_cfg).stage("mass chain")?;
        let norms = u_convergence_norms(&chain.solutions).stage("u norms")?;
        let mut t = Table::new(&[
            "eps",
            "m_geps",
            "A_farfield",
            "A_integral",
            "m_tilde_formula",
            "m_tilde_direct",
            "res",
            "iters",
            "rneg_norm",
            "rho",
            "existence_product",
            "min_u",
            "max_u",
            "u_lnstar",
            "u_grad_l2",
            "mass_error",
        ]);
        for (i, r) in chain.rows.iter().enumerate() {
            t.push(vec![
                r.eps,
                r.m_geps,
                r.a_farfield,
                r.a_integral,
                r.m_tilde_formula,
                r.m_tilde_direct,
                r.residual,
                r.iterations as f64,
                r.rneg_norm,
                r.rho,
                r.existence.product,
                r.min_u,
                r.max_u,
                norms.lnstar[i],
                norms.grad_l2[i],
                (r.m_tilde_formula - known).abs(),
            ]);
        }
        let mut out = Outcome::new(t);
        out.summary("known_mass", known);
        let rel = |a: f64, b: f64| {
            let s = a.abs().max(b.abs());
            if s < 1e-12 {
                0.0
            } else {
                (a - b).abs() / s
            }
        };
        let a_gap = chain
            .rows
            .iter()
            .map(|r| rel(r.a_farfield, r.a_integral))
            .fold(0.0, f64::max);
        let m_gap = chain
            .rows
            .iter()
            .map(|r| rel(r.m_tilde_formula, r.m_tilde_direct))
            .fold(0.0, f64::max);
        let errs = out.table.column("mass_error");
        let res = chain.rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        let umin = chain.rows.iter().map(|r| r.min_u).fold(f64::INFINITY, f64::min);
        let umax = chain.rows.iter().map(|r| r.max_u).fold(f64::NEG_INFINITY, f64::max);
        let u_inc = increases(&norms.lnstar) + increases(&norms.grad_l2);
        self.check(
            &mut out,
            "a_relative_gap",
            a_gap,
            Relation::AtMost,
            "max_a_relative_gap",
        );
        self.check(&mut out, "mass_path_gap", m_gap, Relation::AtMost, "max_mass_path_gap");
        self.check(
            &mut out,
            "mass_error_increases",
            increases(&errs),
            Relation::AtMost,
            "max_mass_error_increases",
        );
        self.check(&mut out, "residual", res, Relation::AtMost, "max_residual");
        self.check(&mut out, "u_min", umin, Relation::Above, "min_u");
        self.check(&mut out, "u_max", umax, Relation::AtMost, "max_u");
        self.check(
            &mut out,
            "u_norm_increases",
            u_inc,
            Relation::AtMost,
            "max_u_norm_increases",
        );
        Ok(out)
    }

    fn sobolev_sandwich(&self) -> Result<Outcome, CliError> {
        let e = self.entry()?;
        let n = e.dim();
        let k = MollifierKernel::new(n);
        let mut t = Table::new(&[
            "eps",
            "rho",
            "violations",
            "worst_margin",
            "max_quotient_g",
            "max_quotient_geps",
        ]);
        for &eps in &self.cfg.scales.eps {
            let s = self.smoothed(&e, &k, eps)?;
            let rho = metric_equivalence_factor(&s.g, &s.g_eps).stage("equivalence factor")?;
            let battery = bump_battery(&s.grid, &self.region(n), self.cfg.battery.bumps).stage("bump battery")?;
            let rep = sobolev_sandwich_check(&s.g, &s.g_eps, &rho, &battery).stage("Sobolev sandwich")?;
            let qg = rep.quotients.iter().map(|q| q.0).fold(0.0, f64::max);
            let qe = rep.quotients.iter().map(|q| q.1).fold(0.0, f64::max);
            t.push(vec![eps, rep.rho, rep.violations as f64, rep.worst_margin, qg, qe]);
        }
        let mut out = Outcome::new(t);
        let v: f64 = out.table.column("violations").iter().sum();
        let rho = out.table.column("rho");
        self.check(&mut out, "violations", v, Relation::AtMost, "max_violations");
        self.check(
            &mut out,
            "rho_increases",
            increases(&rho),
            Relation::AtMost,
            "max_rho_increases",
        );
        Ok(out)
    }
}

/// Catalog of coefficient and test functions of x₁.
pub const FUNCTIONS: [&str; 5] = ["one", "x1", "abs_x1", "sign_x1", "cos_x1"];

fn named_function(name: &str, grid: &GridSpec) -> Result<ScalarField, CliError> {
    let f: ScalarFn = match name {
        "one" => Arc::new(|_: &[f64]| 1.0),
        "x1" => Arc::new(|x: &[f64]| x[0]),
        "abs_x1" => Arc::new(|x: &[f64]| x[0].abs()),
        "sign_x1" => Arc::new(|x: &[f64]| {
            if x[0] > 0.0 {
                1.0
            } else if x[0] < 0.0 {
                -1.0
            } else {
                0.0
            }
        }),
        "cos_x1" => Arc::new(|x: &[f64]| x[0].cos()),
        other => {
            return Err(CliError::Config(format!(
                "unknown function `{other}`; known: {}",
                FUNCTIONS.join(", ")
            )))
        }
    };
    ScalarField::from_analytic(grid.clone(), f).stage("functions")
}
