//! Experiment runner: resolves a TOML config, runs one named pipeline,
//! writes tables and plot data, and reports threshold checks.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{resolve, ExperimentConfig};
pub use error::CliError;
pub use experiments::{Experiment, ALL};
pub use report::{Check, Outcome, Relation, Table, Verdict};

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub experiment: &'static str,
    pub verdict: Verdict,
    pub config_hash: String,
    pub out_dir: PathBuf,
    pub outcome: Outcome,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Pass | Verdict::Warn => 0,
            Verdict::Fail => 1,
        }
    }

    /// One line per check, then the verdict.
    pub fn human(&self) -> String {
        let mut s = format!("{} (config {})\n", self.experiment, &self.config_hash[..12]);
        for c in &self.outcome.checks {
            s.push_str(&format!(
                "  {:<24} {:>12.4e} {:<2} {:<10.3e} {}\n",
                c.name,
                c.value,
                c.relation.symbol(),
                c.threshold,
                if c.pass { "pass" } else { "FAIL" }
            ));
        }
        for w in &self.outcome.warnings {
            s.push_str(&format!("  warning: {w}\n"));
        }
        s.push_str(&format!(
            "verdict: {} -> {}\n",
            self.verdict.as_str(),
            self.out_dir.display()
        ));
        s
    }
}

/// Runs a config given as text; `out` overrides `[output] dir`.
pub fn run_text(text: &str, out: Option<&Path>) -> Result<RunReport, CliError> {
    let (exp, cfg) = resolve(text)?;
    let resolved = config::render(&cfg)?;
    let hash = config::sha256_hex(resolved.as_bytes());
    let outcome = exp.run(&cfg)?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    output::write_all(&dir, &resolved, &hash, &outcome)?;
    Ok(RunReport {
        experiment: exp.name(),
        verdict: outcome.verdict(),
        config_hash: hash,
        out_dir: dir,
        outcome,
    })
}

pub fn run_path(path: &Path, out: Option<&Path>) -> Result<RunReport, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    run_text(&text, out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub claim: &'static str,
    pub keys: Vec<&'static str>,
    pub thresholds: Vec<String>,
}

pub fn experiment_table() -> Vec<ExperimentInfo> {
    ALL.iter()
        .map(|e| ExperimentInfo {
            name: e.name(),
            claim: e.claim(),
            keys: e.keys().to_vec(),
            thresholds: e
                .defaults()
                .parse::<toml::Table>()
                .ok()
                .and_then(|t| {
                    t.get("thresholds")
                        .and_then(|v| v.as_table())
                        .map(|t| t.keys().cloned().collect())
                })
                .unwrap_or_default(),
        })
        .collect()
}

pub fn list_text() -> String {
    let mut s = String::new();
    for i in experiment_table() {
        s.push_str(&format!(
            "{}\n  tests:      {}\n  keys:       {}\n  thresholds: {}\n",
            i.name,
            i.claim,
            i.keys.join(", "),
            i.thresholds.join(", ")
        ));
    }
    s
}
