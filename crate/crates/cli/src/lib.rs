//! Experiment driver for the `lmeec` simulator: single runs, parameter
//! sweeps, CSV tables and SVG plots.

pub mod config;
pub mod csv;
pub mod error;
pub mod plot;
pub mod sweep;

use std::fs;
use std::path::Path;

use lmeec_core::{run_simulation, Protocol, RunUntil, SimConfig, SimResult, WeightVariant};

pub use config::FileConfig;
pub use error::CliError;
pub use sweep::{SummaryRow, SweepMode, SweepSpec};

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub protocol: Option<Protocol>,
    pub nodes: Option<usize>,
    pub seed: Option<u64>,
    pub until: Option<RunUntil>,
    pub weight_variant: Option<WeightVariant>,
}

impl Overrides {
    pub fn apply(&self, config: &mut SimConfig) {
        if let Some(p) = self.protocol {
            config.protocol = p;
        }
        if let Some(n) = self.nodes {
            config.n_nodes = n;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(u) = self.until {
            config.run_until = u;
        }
        if let Some(v) = self.weight_variant {
            config.weights.variant = v;
        }
    }

    /// Flag that set `key`, if any, for diagnostics.
    pub fn flag_for(&self, key: &str) -> Option<&'static str> {
        match key {
            "n_nodes" if self.nodes.is_some() => Some("--nodes"),
            _ => None,
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Runs one simulation and writes `rounds.csv` and `summary.csv` to `out`.
pub fn run_command(config: &SimConfig, out: &Path) -> Result<SimResult, CliError> {
    config.validate()?;
    ensure_dir(out)?;
    let result = run_simulation(config)?;
    write_file(out, "rounds.csv", &csv::rounds_csv(&result))?;
    write_file(out, "summary.csv", &csv::summary_csv(&[SummaryRow::from_result(&result)]))?;
    Ok(result)
}

fn fig_series(rows: &[sweep::FigRow]) -> Vec<plot::Series> {
    let mut protocols: Vec<Protocol> = Vec::new();
    for r in rows {
        if !protocols.contains(&r.protocol) {
            protocols.push(r.protocol);
        }
    }
    protocols
        .into_iter()
        .map(|p| plot::Series {
            name: p.name().to_uppercase(),
            points: rows
                .iter()
                .filter(|r| r.protocol == p)
                .filter_map(|r| r.mean.map(|m| (r.n as f64, m)))
                .collect(),
        })
        .collect()
}

/// Runs the whole matrix and writes `summary.csv`, `fig1.csv`, `fig2.csv`,
/// `fig1.svg` and `fig2.svg` to `out`. Files are written only after every
/// cell has finished.
pub fn sweep_command(base: &SimConfig, spec: &SweepSpec, out: &Path) -> Result<Vec<SummaryRow>, CliError> {
    spec.validate()?;
    base.validate()?;
    ensure_dir(out)?;
    let rows = sweep::run_sweep(base, spec)?;
    let fig1 = sweep::fig1(&rows);
    let fig2 = sweep::fig2(&rows);
    write_file(out, "summary.csv", &csv::summary_csv(&rows))?;
    write_file(out, "fig1.csv", &csv::fig_csv(csv::FIG1_HEADER, &fig1))?;
    write_file(out, "fig2.csv", &csv::fig_csv(csv::FIG2_HEADER, &fig2))?;
    write_file(
        out,
        "fig1.svg",
        &plot::line_chart(
            "Average dissipated energy",
            "Number of nodes",
            "Energy per node (J)",
            &fig_series(&fig1),
        ),
    )?;
    write_file(
        out,
        "fig2.svg",
        &plot::line_chart(
            "Network lifetime (first node death)",
            "Number of nodes",
            "Time (s)",
            &fig_series(&fig2),
        ),
    )?;
    Ok(rows)
}
