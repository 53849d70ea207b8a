//! Output plumbing: tables rendered as aligned text or CSV, plot-data files sorted by
//! x, atomic file writes, and an optional gnuplot script per plot.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Rows of string cells under one header. Cells are pre-formatted so every output
/// format shows identical digits.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        assert_eq!(
            row.len(),
            self.headers.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Column-aligned text; numeric columns (`-` marks a missing value) are right-aligned.
    pub fn to_text(&self) -> String {
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].chars().count())
                    .chain([self.headers[c].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let numeric: Vec<bool> = (0..self.headers.len())
            .map(|c| {
                self.rows.iter().any(|r| looks_numeric(&r[c]))
                    && self
                        .rows
                        .iter()
                        .all(|r| looks_numeric(&r[c]) || r[c] == "-")
            })
            .collect();
        let line = |cells: &[String]| -> String {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    if numeric[c] {
                        format!("{v:>w$}", w = widths[c])
                    } else {
                        format!("{v:<w$}", w = widths[c])
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = line(&self.headers);
        out.push('\n');
        out.push_str(
            &widths
                .iter()
                .map(|w| "-".repeat(*w))
                .collect::<Vec<_>>()
                .join("  "),
        );
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }

    /// Stable sort by the numeric value of column `col`.
    pub fn sort_by_numeric(&mut self, col: usize) -> Result<()> {
        let mut keyed = Vec::with_capacity(self.rows.len());
        for r in self.rows.drain(..) {
            let k: f64 = r[col].trim().parse().map_err(|_| {
                Error::InvalidData(format!(
                    "column `{}` holds non-numeric `{}`",
                    self.headers[col], r[col]
                ))
            })?;
            keyed.push((k, r));
        }
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.rows = keyed.into_iter().map(|(_, r)| r).collect();
        Ok(())
    }
}

fn looks_numeric(s: &str) -> bool {
    let s = s.trim();
    let s = s.strip_suffix('%').unwrap_or(s);
    !s.is_empty() && s.parse::<f64>().is_ok()
}

/// Shortest round-trip rendering, used in data files.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Fixed-decimal rendering, used in text tables.
pub fn fixed(v: f64, decimals: usize) -> String {
    format!("{v:.decimals$}")
}

/// Write `bytes` to `path` through a temporary file in the same directory and a
/// rename, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("`{}` is not a file path", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Write a plot-data CSV: one header row, rows sorted by the first column.
pub fn emit_plot_data(table: &Table, path: &Path) -> Result<()> {
    if table.is_empty() {
        return Err(Error::InvalidData(format!(
            "refusing to write empty series to `{}`",
            path.display()
        )));
    }
    let mut sorted = table.clone();
    sorted.sort_by_numeric(0)?;
    write_atomic(path, sorted.to_csv()?.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Axes {
    pub log_x: bool,
    pub log_y: bool,
}

/// A gnuplot script plotting columns `y_cols` (1-based) against column 1 of `data`.
pub fn gnuplot_script(
    data_file: &str,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    y_cols: &[(usize, &str)],
    axes: Axes,
) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set title \"{title}\"\n"));
    s.push_str(&format!("set xlabel \"{xlabel}\"\n"));
    s.push_str(&format!("set ylabel \"{ylabel}\"\n"));
    if axes.log_x {
        s.push_str("set logscale x\n");
    }
    if axes.log_y {
        s.push_str("set logscale y\n");
    }
    let plots: Vec<String> = y_cols
        .iter()
        .map(|(c, t)| format!("'{data_file}' using 1:{c} with lines title \"{t}\""))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}
