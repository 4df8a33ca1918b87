//! Result tables, threshold checks and verdicts.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Above,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
        }
    }

    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
            Relation::Above => value > threshold,
        }
    }
}

/// One configured threshold applied to one measured value.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    /// Key in the `[thresholds]` section.
    pub threshold_key: String,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, relation: Relation, threshold_key: &str, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            relation,
            threshold_key: threshold_key.to_string(),
            threshold,
            pass: relation.holds(value, threshold),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Warn => "warn",
            Verdict::Fail => "fail",
        }
    }
}

/// Rows of numbers under named columns; the first column is the abscissa
/// of every plot curve.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let i = self
            .columns
            .iter()
            .position(|c| c == name)
            .unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| fmt_num(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip scientific form, independent of locale.
pub fn fmt_num(v: f64) -> String {
    format!("{v:e}")
}

/// Everything an experiment produces besides files.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub table: Table,
    pub summary: Vec<(String, f64)>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn new(table: Table) -> Self {
        Outcome {
            table,
            summary: Vec::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn summary(&mut self, key: &str, value: f64) {
        self.summary.push((key.to_string(), value));
    }

    pub fn verdict(&self) -> Verdict {
        if self.checks.iter().any(|c| !c.pass) {
            Verdict::Fail
        } else if self.warnings.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Warn
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn checks_csv(&self) -> String {
        let mut s = String::from("name,value,relation,threshold_key,threshold,status\n");
        for c in &self.checks {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.name,
                fmt_num(c.value),
                c.relation.symbol(),
                c.threshold_key,
                fmt_num(c.threshold),
                if c.pass { "pass" } else { "fail" }
            ));
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        for (k, v) in &self.summary {
            s.push_str(&format!("{k},{}\n", fmt_num(*v)));
        }
        s
    }
}

/// Number of steps where a sequence fails to decrease strictly; steps
/// between two exact zeros count as decreasing.
pub fn increases(values: &[f64]) -> f64 {
    values
        .windows(2)
        .filter(|w| !(w[1] < w[0]) && !(w[0] == 0.0 && w[1] == 0.0))
        .count() as f64
}

/// last/first, 0 for an identically zero sequence.
pub fn last_over_first(values: &[f64]) -> f64 {
    match (values.first(), values.last()) {
        (Some(&f), Some(&l)) if f == 0.0 && l == 0.0 => 0.0,
        (Some(&f), Some(&l)) => l / f,
        _ => f64::NAN,
    }
}
