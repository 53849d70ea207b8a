//! Where results go: aligned text on stdout, data files under the output directory,
//! and one metadata sidecar per invocation holding everything non-deterministic.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use perfchar_core::report::{self, Axes, Table};
use perfchar_core::Result;
use serde_json::json;

/// A closed pipe (`perfchar ... | head`) ends output quietly instead of panicking.
fn stdout(s: &str) {
    if let Err(e) = std::io::stdout().lock().write_all(s.as_bytes()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    All,
}

pub struct Plot<'a> {
    pub title: &'a str,
    pub xlabel: &'a str,
    pub ylabel: &'a str,
    pub y_cols: &'a [(usize, &'a str)],
    pub axes: Axes,
}

pub struct Output {
    text: bool,
    dir: Option<PathBuf>,
    gnuplot: bool,
    written: Vec<String>,
    inputs: Vec<String>,
}

impl Output {
    /// Text only by default; `--out` alone implies `all`.
    pub fn new(format: Option<Format>, dir: Option<PathBuf>, gnuplot: bool) -> Self {
        let format = format.unwrap_or(if dir.is_some() {
            Format::All
        } else {
            Format::Text
        });
        let dir = match format {
            Format::Text => None,
            _ => Some(dir.unwrap_or_else(|| PathBuf::from("."))),
        };
        Output {
            text: matches!(format, Format::Text | Format::All),
            dir,
            gnuplot,
            written: Vec::new(),
            inputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn section(&self, title: &str, table: &Table) {
        if self.text {
            stdout(&format!("{title}\n{}\n", table.to_text()));
        }
    }

    pub fn note(&self, line: &str) {
        if self.text {
            stdout(&format!("{line}\n"));
        }
    }

    fn target(&mut self, name: &str) -> Result<Option<PathBuf>> {
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        std::fs::create_dir_all(dir)?;
        self.written.push(name.to_string());
        Ok(Some(dir.join(name)))
    }

    /// A table written in its given row order.
    pub fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        if let Some(path) = self.target(name)? {
            report::write_atomic(&path, table.to_csv()?.as_bytes())?;
        }
        Ok(())
    }

    /// Plot data sorted by its first column, with an optional gnuplot script.
    pub fn plot(&mut self, name: &str, table: &Table, plot: &Plot<'_>) -> Result<()> {
        if let Some(path) = self.target(name)? {
            report::emit_plot_data(table, &path)?;
            if self.gnuplot {
                let script = report::gnuplot_script(
                    name,
                    plot.title,
                    plot.xlabel,
                    plot.ylabel,
                    plot.y_cols,
                    plot.axes,
                );
                let gp = format!("{}.gp", name.trim_end_matches(".csv"));
                if let Some(gp_path) = self.target(&gp)? {
                    report::write_atomic(&gp_path, script.as_bytes())?;
                }
            }
        }
        Ok(())
    }

    /// Write `<command>.meta.json` next to the data files and list what was written.
    pub fn finish(mut self, command: &str) -> Result<()> {
        let Some(dir) = self.dir.clone() else {
            return Ok(());
        };
        let slug = command.replace(' ', "-");
        let meta = json!({
            "tool": "perfchar",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "argv": std::env::args().collect::<Vec<_>>(),
            "generated_at": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            "inputs": self.inputs,
            "outputs": self.written,
        });
        let name = format!("{slug}.meta.json");
        let mut text = serde_json::to_string_pretty(&meta)?;
        text.push('\n');
        report::write_atomic(&dir.join(&name), text.as_bytes())?;
        self.written.push(name);
        if !self.text {
            let mut listing = String::new();
            for f in &self.written {
                let _ = writeln!(listing, "{}", dir.join(f).display());
            }
            stdout(&listing);
        }
        Ok(())
    }
}
