//! Experiment matrix over protocols, node counts and seeds.

use lmeec_core::{run_simulation, Protocol, RunUntil, SimConfig, SimResult};
use rayon::prelude::*;

use crate::error::CliError;

/// Which runs each sweep cell performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Energy from a time-capped run, lifetime from a run-until-all-dead run.
    Both,
    Only(RunUntil),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub node_counts: Vec<usize>,
    pub protocols: Vec<Protocol>,
    pub seed_count: usize,
    pub master_seed: u64,
    pub mode: SweepMode,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            node_counts: vec![50, 100, 150, 200, 250, 300, 350, 400],
            protocols: vec![Protocol::Lmeec, Protocol::Leach],
            seed_count: 5,
            master_seed: 2024,
            mode: SweepMode::Both,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.node_counts.is_empty() {
            return Err(CliError::config("sweep.node_counts", "must not be empty"));
        }
        if self.protocols.is_empty() {
            return Err(CliError::config("sweep.protocols", "must not be empty"));
        }
        if self.seed_count == 0 {
            return Err(CliError::config("sweep.seeds", "must be >= 1"));
        }
        Ok(())
    }

    /// Per-cell deployment seeds, derived from the master seed. The same
    /// seeds are used for every protocol and node count.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.seed_count as u64)
            .map(|i| splitmix64(self.master_seed.wrapping_add(i)))
            .collect()
    }

    /// Cells in output order: node count, then protocol, then seed.
    pub fn cells(&self) -> Vec<(Protocol, usize, u64)> {
        let seeds = self.seeds();
        let mut cells = Vec::new();
        for &n in &self.node_counts {
            for &p in &self.protocols {
                for &s in &seeds {
                    cells.push((p, n, s));
                }
            }
        }
        cells
    }
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub protocol: Protocol,
    pub n: usize,
    pub seed: u64,
    pub deployment_hash: u64,
    pub avg_dissipated_j: f64,
    pub fnd_s: Option<f64>,
    pub hnd_s: Option<f64>,
    pub lnd_s: Option<f64>,
    pub rounds_run: usize,
    /// |ledger - sum(initial - residual)| / ledger over the cell's runs (worst).
    pub conservation_error: f64,
}

pub fn conservation_error(result: &SimResult) -> f64 {
    let drained: f64 = result
        .final_nodes
        .iter()
        .map(|n| result.config.initial_energy - n.residual_energy)
        .sum();
    if result.total_dissipated == 0.0 {
        drained.abs()
    } else {
        (result.total_dissipated - drained).abs() / result.total_dissipated
    }
}

impl SummaryRow {
    pub fn from_result(result: &SimResult) -> Self {
        SummaryRow {
            protocol: result.config.protocol,
            n: result.config.n_nodes,
            seed: result.config.seed,
            deployment_hash: result.deployment_hash,
            avg_dissipated_j: result.avg_dissipated_energy,
            fnd_s: result.lifetime.fnd,
            hnd_s: result.lifetime.hnd,
            lnd_s: result.lifetime.lnd,
            rounds_run: result.rounds_run(),
            conservation_error: conservation_error(result),
        }
    }
}

fn run_cell(base: &SimConfig, mode: SweepMode, protocol: Protocol, n: usize, seed: u64) -> Result<SummaryRow, CliError> {
    let cfg = SimConfig {
        protocol,
        n_nodes: n,
        seed,
        ..base.clone()
    };
    match mode {
        SweepMode::Only(until) => {
            let result = run_simulation(&SimConfig { run_until: until, ..cfg })?;
            Ok(SummaryRow::from_result(&result))
        }
        SweepMode::Both => {
            let energy = run_simulation(&SimConfig {
                run_until: RunUntil::TimeCap,
                ..cfg.clone()
            })?;
            let lifetime = run_simulation(&SimConfig {
                run_until: RunUntil::AllDead,
                ..cfg
            })?;
            let mut row = SummaryRow::from_result(&lifetime);
            row.avg_dissipated_j = energy.avg_dissipated_energy;
            row.conservation_error = row.conservation_error.max(conservation_error(&energy));
            Ok(row)
        }
    }
}

/// Runs every cell, in parallel, and returns rows in [`SweepSpec::cells`] order.
pub fn run_sweep(base: &SimConfig, spec: &SweepSpec) -> Result<Vec<SummaryRow>, CliError> {
    spec.validate()?;
    base.validate()?;
    spec.cells()
        .into_par_iter()
        .map(|(p, n, s)| run_cell(base, spec.mode, p, n, s))
        .collect()
}

/// Mean and sample standard deviation of one metric for one (n, protocol).
#[derive(Debug, Clone, PartialEq)]
pub struct FigRow {
    pub n: usize,
    pub protocol: Protocol,
    pub mean: Option<f64>,
    pub stddev: Option<f64>,
}

pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)).sqrt()
    };
    (Some(mean), Some(std))
}

/// Groups rows by (n, protocol) in first-seen order and averages `metric`
/// over the rows where it is present.
pub fn aggregate(rows: &[SummaryRow], metric: impl Fn(&SummaryRow) -> Option<f64>) -> Vec<FigRow> {
    let mut keys: Vec<(usize, Protocol)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.n, r.protocol)) {
            keys.push((r.n, r.protocol));
        }
    }
    keys.into_iter()
        .map(|(n, protocol)| {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == n && r.protocol == protocol)
                .filter_map(&metric)
                .collect();
            let (mean, stddev) = mean_std(&values);
            FigRow {
                n,
                protocol,
                mean,
                stddev,
            }
        })
        .collect()
}

pub fn fig1(rows: &[SummaryRow]) -> Vec<FigRow> {
    aggregate(rows, |r| Some(r.avg_dissipated_j))
}

pub fn fig2(rows: &[SummaryRow]) -> Vec<FigRow> {
    aggregate(rows, |r| r.fnd_s)
}
