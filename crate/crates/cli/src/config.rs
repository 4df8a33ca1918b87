//! Experiment configuration: TOML with sections, merged over per-experiment
//! defaults. The merged table is what gets echoed and hashed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::CliError;
use crate::experiments::Experiment;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub corpus: CorpusSection,
    pub grid: GridSection,
    pub region: RegionSection,
    pub scales: ScalesSection,
    pub exponents: ExponentSection,
    pub functions: FunctionSection,
    pub solver: SolverSection,
    pub mass: MassSection,
    pub battery: BatterySection,
    pub thresholds: BTreeMap<String, f64>,
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub name: String,
    pub n: usize,
    pub params: BTreeMap<String, f64>,
}

/// Fixed grid [−L, L]ⁿ for experiments that do not refine with ε.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_width: f64,
    pub h: f64,
}

/// The non-smooth box K = [−L, L]ⁿ.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    pub half_width: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScalesSection {
    pub eps: Vec<f64>,
    /// Spacing of the per-ε grids as a fraction of ε.
    pub h_over_eps: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSection {
    pub p: f64,
    pub q: f64,
}

/// Coefficient a and function f of the commutator experiments, by name.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSection {
    pub dim: usize,
    pub a: String,
    pub f: String,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    /// 0 selects 10·(nodes per axis)².
    pub max_iter: usize,
    pub half_width: f64,
    pub h: f64,
    pub window_inner_fraction: f64,
    pub window_inverse_terms: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MassSection {
    pub radii: Vec<f64>,
    pub order: usize,
    /// Exponent s of the tail model; negative selects 2τ − (n−2).
    pub tail_exponent: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BatterySection {
    /// Bump functions for Sobolev quotients.
    pub bumps: usize,
    /// Nonnegative test densities for distributional pairings.
    pub densities: usize,
    pub density_radius: f64,
    /// Spacing of the local grid each density is paired on.
    pub density_h: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

const BASE_DEFAULTS: &str = r#"
[corpus]
name = "miao_corner"
n = 3
params = {}

[grid]
half_width = 1.6
h = 0.025

[region]
half_width = 1.1

[scales]
eps = [0.2, 0.1, 0.05]
h_over_eps = 0.25

[exponents]
p = 3.0
q = 3.0

[functions]
dim = 1
a = "abs_x1"
f = "sign_x1"

[solver]
tol = 1e-9
max_iter = 0
half_width = 6.0
h = 0.15
window_inner_fraction = 0.4
window_inverse_terms = 2

[mass]
radii = [8.0, 16.0, 32.0]
order = 16
tail_exponent = -1.0

[battery]
bumps = 10
densities = 20
density_radius = 0.4
density_h = 0.00625

[output]
dir = "out"
"#;

/// Recursive merge; tables merge key by key, everything else is replaced.
fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_table(text: &str, what: &str) -> Result<Table, CliError> {
    text.parse::<Table>()
        .map_err(|e| CliError::Config(format!("{what}: {e}")))
}

/// Parses a user config, fills in defaults and validates it.
pub fn resolve(text: &str) -> Result<(Experiment, ExperimentConfig), CliError> {
    let user = parse_table(text, "config")?;
    let name = user
        .get("experiment")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Config("missing string key `experiment`".into()))?;
    let exp = Experiment::from_name(name)?;
    let mut table = parse_table(BASE_DEFAULTS, "built-in defaults")?;
    merge(&mut table, parse_table(exp.defaults(), "experiment defaults")?);
    let allowed: Vec<String> = table
        .get("thresholds")
        .and_then(Value::as_table)
        .map(|t| t.keys().cloned().collect())
        .unwrap_or_default();
    if let Some(Value::Table(t)) = user.get("thresholds") {
        if let Some(bad) = t.keys().find(|k| !allowed.contains(k)) {
            return Err(CliError::Config(format!(
                "unknown threshold `{bad}` for {name}; known: {}",
                allowed.join(", ")
            )));
        }
    }
    merge(&mut table, user);
    let cfg: ExperimentConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    validate(&cfg)?;
    Ok((exp, cfg))
}

fn validate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let bad = |m: String| Err(CliError::Config(m));
    if cfg.scales.eps.is_empty() || cfg.scales.eps.windows(2).any(|w| !(w[1] < w[0])) {
        return bad("scales.eps must be nonempty and strictly decreasing".into());
    }
    if cfg.scales.eps.iter().any(|&e| !(e > 0.0)) {
        return bad("scales.eps must be positive".into());
    }
    if !(cfg.scales.h_over_eps > 0.0 && cfg.scales.h_over_eps <= 0.25) {
        return bad(format!(
            "scales.h_over_eps = {} must lie in (0, 0.25]",
            cfg.scales.h_over_eps
        ));
    }
    for (k, v) in [
        ("grid.half_width", cfg.grid.half_width),
        ("grid.h", cfg.grid.h),
        ("region.half_width", cfg.region.half_width),
        ("solver.tol", cfg.solver.tol),
        ("solver.half_width", cfg.solver.half_width),
        ("solver.h", cfg.solver.h),
        ("battery.density_radius", cfg.battery.density_radius),
        ("battery.density_h", cfg.battery.density_h),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return bad(format!("{k} = {v} must be positive"));
        }
    }
    if !(cfg.exponents.p >= 1.0 && cfg.exponents.q >= 1.0) {
        return bad("exponents p and q must be at least 1".into());
    }
    if cfg.thresholds.values().any(|v| v.is_nan()) {
        return bad("thresholds must be numbers".into());
    }
    let allowed: &[&str] = match cfg.corpus.name.as_str() {
        "euclidean" => &[],
        "schwarzschild" | "miao_corner" => &["m"],
        "w1n_singular" => &["beta", "a"],
        other => return bad(format!("unknown corpus entry `{other}`")),
    };
    if let Some(k) = cfg.corpus.params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return bad(format!("corpus `{}` has no parameter `{k}`", cfg.corpus.name));
    }
    Ok(())
}

/// Canonical text of a resolved config; the hash is taken over these bytes.
pub fn render(cfg: &ExperimentConfig) -> Result<String, CliError> {
    toml::to_string(cfg).map_err(|e| CliError::Config(format!("cannot render config: {e}")))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_and_echo_round_trips() {
        let (exp, cfg) = resolve("experiment = \"adm-mass\"\n[corpus]\nname = \"euclidean\"").unwrap();
        assert_eq!(exp, Experiment::AdmMass);
        assert_eq!(cfg.mass.radii, vec![8.0, 16.0, 32.0]);
        assert!(cfg.thresholds.contains_key("max_mass_error"));
        let text = render(&cfg).unwrap();
        let (_, again) = resolve(&text).unwrap();
        assert_eq!(render(&again).unwrap(), text);
    }

    #[test]
    fn config_errors() {
        for bad in [
            "experiment = \"nope\"",
            "[grid]\nh = 0.1",
            "experiment = \"adm-mass\"\n[thresholds]\nbogus = 1.0",
            "experiment = \"adm-mass\"\n[grid]\nspacing = 0.1",
            "experiment = \"adm-mass\"\n[scales]\neps = [0.1, 0.2]",
            "experiment = \"adm-mass\"\n[corpus]\nname = \"miao_corner\"\nparams = { beta = 0.3 }",
            "experiment = \"adm-mass\"\n[corpus]\nname = \"torus\"",
            "experiment = ",
        ] {
            assert!(matches!(resolve(bad), Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
