//! Plain-text grid field format.
//!
//! ```text
//! n L_1 .. L_n h_1 .. h_n cell|vertex [o_1 .. o_n]
//! i_1 .. i_n v_1 .. v_k
//! ```
//!
//! The header gives the dimension, half-widths, spacings, staggering and an
//! optional origin (zero when omitted). Each following line holds one node:
//! its multi-index then its values, in storage order (last axis fastest).
//! Scalar fields carry one value; metrics carry the n(n+1)/2 upper-triangle
//! entries g_11 g_12 .. g_1n g_22 .. g_nn. Floats are written in shortest
//! round-trip form, so a write/read cycle is lossless. Blank lines and lines
//! starting with `#` are ignored.

use std::io::{BufRead, Write};

use super::grid::GridSpec;
use super::metric::{packed_len, MetricField, Regularity, SymTensorField};
use super::scalar::ScalarField;
use crate::error::{Error, Result};

fn write_header(grid: &GridSpec, out: &mut impl Write) -> Result<()> {
    let mut line = format!("{}", grid.dim());
    for v in grid.half_width() {
        line.push_str(&format!(" {v}"));
    }
    for v in grid.spacing() {
        line.push_str(&format!(" {v}"));
    }
    line.push_str(if grid.is_cell_centered() { " cell" } else { " vertex" });
    if grid.origin().iter().any(|&o| o != 0.0) {
        for v in grid.origin() {
            line.push_str(&format!(" {v}"));
        }
    }
    writeln!(out, "{line}")?;
    Ok(())
}

fn write_rows(grid: &GridSpec, cols: &[&[f64]], out: &mut impl Write) -> Result<()> {
    let n = grid.dim();
    for lin in 0..grid.len() {
        let idx = grid.multi_index(lin);
        let mut line = String::new();
        for (k, i) in idx[..n].iter().enumerate() {
            if k > 0 {
                line.push(' ');
            }
            line.push_str(&i.to_string());
        }
        for c in cols {
            line.push_str(&format!(" {}", c[lin]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_scalar(f: &ScalarField, out: &mut impl Write) -> Result<()> {
    write_header(f.grid(), out)?;
    write_rows(f.grid(), &[f.values()], out)
}

pub fn write_metric(g: &MetricField, out: &mut impl Write) -> Result<()> {
    write_header(g.grid(), out)?;
    let cols: Vec<&[f64]> = g.tensor().packed().iter().map(|c| c.as_slice()).collect();
    write_rows(g.grid(), &cols, out)
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::Parse {
        line,
        detail: format!("expected a number, got `{tok}`"),
    })
}

fn read_table(input: impl BufRead, per_node: impl Fn(usize) -> usize) -> Result<(GridSpec, Vec<Vec<f64>>)> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| {
        l.as_ref()
            .map_or(true, |s| !s.trim().is_empty() && !s.trim_start().starts_with('#'))
    });
    let (hl, header) = match lines.next() {
        Some((i, l)) => (i, l?),
        None => {
            return Err(Error::Parse {
                line: 1,
                detail: "missing header".into(),
            })
        }
    };
    let toks: Vec<&str> = header.split_whitespace().collect();
    let n: usize = toks[0].parse().map_err(|_| Error::Parse {
        line: hl,
        detail: format!("bad dimension `{}`", toks[0]),
    })?;
    let base = 1 + 2 * n + 1;
    if toks.len() != base && toks.len() != base + n {
        return Err(Error::Parse {
            line: hl,
            detail: format!("header has {} tokens, expected {} or {}", toks.len(), base, base + n),
        });
    }
    let half: Vec<f64> = toks[1..=n].iter().map(|t| parse_f64(t, hl)).collect::<Result<_>>()?;
    let h: Vec<f64> = toks[n + 1..=2 * n]
        .iter()
        .map(|t| parse_f64(t, hl))
        .collect::<Result<_>>()?;
    let cell = match toks[2 * n + 1] {
        "cell" => true,
        "vertex" => false,
        other => {
            return Err(Error::Parse {
                line: hl,
                detail: format!("staggering must be cell or vertex, got `{other}`"),
            })
        }
    };
    let origin = if toks.len() == base + n {
        toks[base..].iter().map(|t| parse_f64(t, hl)).collect::<Result<_>>()?
    } else {
        vec![0.0; n]
    };
    let grid = GridSpec::new(origin, half, h, cell).map_err(|e| Error::Parse {
        line: hl,
        detail: e.to_string(),
    })?;
    let k = per_node(n);
    let mut cols = vec![vec![0.0; grid.len()]; k];
    let mut seen = vec![false; grid.len()];
    for (ln, l) in lines {
        let l = l?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != n + k {
            return Err(Error::Parse {
                line: ln,
                detail: format!("expected {} columns, got {}", n + k, toks.len()),
            });
        }
        let mut idx = [0usize; crate::linalg::MAX_DIM];
        for a in 0..n {
            idx[a] = toks[a].parse().map_err(|_| Error::Parse {
                line: ln,
                detail: format!("bad index `{}`", toks[a]),
            })?;
            if idx[a] >= grid.dims()[a] {
                return Err(Error::Parse {
                    line: ln,
                    detail: format!("index {} out of range on axis {a}", idx[a]),
                });
            }
        }
        let lin = grid.linear(&idx[..n]);
        if seen[lin] {
            return Err(Error::Parse {
                line: ln,
                detail: "duplicate node".into(),
            });
        }
        seen[lin] = true;
        for c in 0..k {
            cols[c][lin] = parse_f64(toks[n + c], ln)?;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Data(format!(
            "node {:?} missing from file",
            &grid.multi_index(missing)[..n]
        )));
    }
    Ok((grid, cols))
}

pub fn read_scalar(input: impl BufRead) -> Result<ScalarField> {
    let (grid, mut cols) = read_table(input, |_| 1)?;
    ScalarField::from_values(grid, cols.pop().expect("one column"))
}

pub fn read_metric(input: impl BufRead, regularity: Regularity) -> Result<MetricField> {
    let (grid, cols) = read_table(input, packed_len)?;
    MetricField::from_tensor(SymTensorField::new(grid, cols)?, regularity)
}
