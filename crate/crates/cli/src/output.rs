//! Output files, each written to a temporary name and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::report::{fmt_num, Outcome};

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, contents).map_err(io(&tmp))?;
    fs::rename(&tmp, path).map_err(io(path))
}

/// `x y` pairs of the first column against every other column.
pub fn plot_files(outcome: &Outcome) -> Vec<(String, String)> {
    let t = &outcome.table;
    let Some(xname) = t.columns.first() else {
        return Vec::new();
    };
    t.columns
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, name)| {
            let mut s = format!("# {xname} {name}\n");
            for r in &t.rows {
                s.push_str(&format!("{} {}\n", fmt_num(r[0]), fmt_num(r[j])));
            }
            (format!("plot_{name}.dat"), s)
        })
        .collect()
}

/// Writes resolved_config.toml, results.csv, summary.csv, checks.csv and
/// the plot files into `dir`; returns the paths written.
pub fn write_all(dir: &Path, resolved: &str, hash: &str, outcome: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut files = vec![
        (
            "resolved_config.toml".to_string(),
            format!("# config_sha256 = \"{hash}\"\n{resolved}"),
        ),
        ("results.csv".to_string(), outcome.table.to_csv()),
        ("summary.csv".to_string(), outcome.summary_csv()),
        ("checks.csv".to_string(), outcome.checks_csv()),
    ];
    files.extend(plot_files(outcome));
    let mut written = Vec::with_capacity(files.len());
    for (name, text) in files {
        let p = dir.join(name);
        write_atomic(&p, &text)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Table;

    #[test]
    fn writes_and_leaves_no_partials() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["eps", "a", "b"]);
        t.push(vec![0.1, 1.0, 2.0]);
        let out = Outcome::new(t);
        let files = write_all(dir.path(), "x = 1\n", "00", &out).unwrap();
        assert_eq!(files.len(), 6);
        let plot = fs::read_to_string(dir.path().join("plot_b.dat")).unwrap();
        assert_eq!(plot, "# eps b\n1e-1 2e0\n");
        for entry in fs::read_dir(dir.path()).unwrap() {
            assert_ne!(entry.unwrap().path().extension().unwrap(), "partial");
        }
    }
}
