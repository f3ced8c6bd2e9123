//! Configuration files.
//!
//! A config file is TOML whose keys mirror the [`SimConfig`] fields:
//!
//! ```toml
//! n_nodes = 200
//! field_side = 100.0
//! bs_pos = [50.0, 50.0]
//! radio_range = 25.0
//! initial_energy = 2.0
//! sim_time = 500.0
//! packet_interval = 0.2
//! round_duration = 20.0
//! data_bits = 4000
//! ctrl_bits = 200
//! seed = 1
//! protocol = "lmeec"            # or "leach"
//! run_until = "time"            # or "all-dead"
//! reconfigure_every = 1
//! energy_normalization = "initial-node"   # or "total-network"
//! max_rounds = 100000
//!
//! [weights]
//! alpha = 0.9
//! beta = 1.0
//! gamma = 0.1
//! t0 = 1.2
//! variant = "magnitude"         # or "literal"
//!
//! [radio]
//! e_elec = 50e-9
//! eps_fs = 10e-12
//! eps_mp = 0.0013e-12
//! e_da = 5e-9
//!
//! [leach]
//! p = 0.05
//!
//! [sweep]
//! node_counts = [50, 100, 150, 200, 250, 300, 350, 400]
//! protocols = ["lmeec", "leach"]
//! seeds = 5
//! master_seed = 2024
//! ```
//!
//! Every key is optional. Unknown keys are rejected.

use std::path::Path;

use lmeec_core::{EnergyNormalization, Position, Protocol, RunUntil, SimConfig, WeightVariant};
use toml::{Table, Value};

use crate::error::CliError;
use crate::sweep::SweepSpec;

pub fn parse_protocol(s: &str) -> Option<Protocol> {
    match s {
        "lmeec" => Some(Protocol::Lmeec),
        "leach" => Some(Protocol::Leach),
        _ => None,
    }
}

pub fn parse_until(s: &str) -> Option<RunUntil> {
    match s {
        "time" => Some(RunUntil::TimeCap),
        "all-dead" => Some(RunUntil::AllDead),
        _ => None,
    }
}

pub fn parse_variant(s: &str) -> Option<WeightVariant> {
    match s {
        "literal" => Some(WeightVariant::Literal),
        "magnitude" => Some(WeightVariant::Magnitude),
        _ => None,
    }
}

/// Simulation settings plus optional sweep settings read from a file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub sim: SimConfig,
    pub sweep: SweepSpec,
    /// Whether the file set `run_until` explicitly.
    pub run_until_set: bool,
}

pub fn load(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<FileConfig, CliError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::config("<file>", e.message().to_string()))?;
    let mut out = FileConfig::default();
    for (key, value) in &table {
        apply_top(&mut out, key, value)?;
    }
    Ok(out)
}

fn float(key: &str, v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::config(key, "expected a number")),
    }
}

fn uint(key: &str, v: &Value) -> Result<u64, CliError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(CliError::config(key, "expected a non-negative integer")),
    }
}

fn string<'a>(key: &str, v: &'a Value) -> Result<&'a str, CliError> {
    v.as_str().ok_or_else(|| CliError::config(key, "expected a string"))
}

fn table<'a>(key: &str, v: &'a Value) -> Result<&'a Table, CliError> {
    v.as_table().ok_or_else(|| CliError::config(key, "expected a table"))
}

fn choice<T>(key: &str, v: &Value, parse: fn(&str) -> Option<T>, allowed: &str) -> Result<T, CliError> {
    let s = string(key, v)?;
    parse(s).ok_or_else(|| CliError::config(key, format!("unknown value {s:?}, expected one of {allowed}")))
}

fn apply_top(out: &mut FileConfig, key: &str, v: &Value) -> Result<(), CliError> {
    let sim = &mut out.sim;
    match key {
        "n_nodes" => sim.n_nodes = uint(key, v)? as usize,
        "field_side" => sim.field_side = float(key, v)?,
        "bs_pos" => {
            let arr = v
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| CliError::config(key, "expected [x, y]"))?;
            sim.bs_pos = Position::new(float(key, &arr[0])?, float(key, &arr[1])?);
        }
        "radio_range" => sim.radio_range = float(key, v)?,
        "initial_energy" => sim.initial_energy = float(key, v)?,
        "sim_time" => sim.sim_time = float(key, v)?,
        "packet_interval" => sim.packet_interval = float(key, v)?,
        "round_duration" => sim.round_duration = float(key, v)?,
        "data_bits" => sim.data_bits = uint(key, v)?,
        "ctrl_bits" => sim.ctrl_bits = uint(key, v)?,
        "seed" => sim.seed = uint(key, v)?,
        "protocol" => sim.protocol = choice(key, v, parse_protocol, "lmeec, leach")?,
        "run_until" => {
            sim.run_until = choice(key, v, parse_until, "time, all-dead")?;
            out.run_until_set = true;
        }
        "reconfigure_every" => {
            sim.reconfigure_every = u32::try_from(uint(key, v)?).map_err(|_| CliError::config(key, "too large"))?
        }
        "energy_normalization" => {
            sim.energy_normalization = choice(
                key,
                v,
                |s| match s {
                    "initial-node" => Some(EnergyNormalization::InitialNode),
                    "total-network" => Some(EnergyNormalization::TotalNetwork),
                    _ => None,
                },
                "initial-node, total-network",
            )?
        }
        "max_rounds" => sim.max_rounds = uint(key, v)?,
        "weights" => {
            for (k, v) in table(key, v)? {
                let full = format!("weights.{k}");
                let w = &mut sim.weights;
                match k.as_str() {
                    "alpha" => w.alpha = float(&full, v)?,
                    "beta" => w.beta = float(&full, v)?,
                    "gamma" => w.gamma = float(&full, v)?,
                    "t0" => w.t0 = float(&full, v)?,
                    "variant" => w.variant = choice(&full, v, parse_variant, "literal, magnitude")?,
                    _ => return Err(CliError::config(full, "unknown key")),
                }
            }
        }
        "radio" => {
            for (k, v) in table(key, v)? {
                let full = format!("radio.{k}");
                let r = &mut sim.radio;
                match k.as_str() {
                    "e_elec" => r.e_elec = float(&full, v)?,
                    "eps_fs" => r.eps_fs = float(&full, v)?,
                    "eps_mp" => r.eps_mp = float(&full, v)?,
                    "e_da" => r.e_da = float(&full, v)?,
                    _ => return Err(CliError::config(full, "unknown key")),
                }
            }
        }
        "leach" => {
            for (k, v) in table(key, v)? {
                match k.as_str() {
                    "p" => sim.leach.p = float("leach.p", v)?,
                    _ => return Err(CliError::config(format!("leach.{k}"), "unknown key")),
                }
            }
        }
        "sweep" => {
            for (k, v) in table(key, v)? {
                let full = format!("sweep.{k}");
                let spec = &mut out.sweep;
                match k.as_str() {
                    "node_counts" => {
                        let arr = v.as_array().ok_or_else(|| CliError::config(&full, "expected a list"))?;
                        spec.node_counts = arr
                            .iter()
                            .map(|x| uint(&full, x).map(|n| n as usize))
                            .collect::<Result<_, _>>()?;
                    }
                    "protocols" => {
                        let arr = v.as_array().ok_or_else(|| CliError::config(&full, "expected a list"))?;
                        spec.protocols = arr
                            .iter()
                            .map(|x| choice(&full, x, parse_protocol, "lmeec, leach"))
                            .collect::<Result<_, _>>()?;
                    }
                    "seeds" => spec.seed_count = uint(&full, v)? as usize,
                    "master_seed" => spec.master_seed = uint(&full, v)?,
                    _ => return Err(CliError::config(full, "unknown key")),
                }
            }
        }
        _ => return Err(CliError::config(key, "unknown key")),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_defaults() {
        assert_eq!(parse("").unwrap(), FileConfig::default());
    }

    #[test]
    fn documented_example_parses() {
        let text = r#"
n_nodes = 200
bs_pos = [50.0, 75]
protocol = "leach"
run_until = "all-dead"
[weights]
alpha = 0.25
variant = "literal"
[radio]
e_da = 6e-9
[leach]
p = 0.1
[sweep]
node_counts = [50, 60]
protocols = ["leach"]
seeds = 2
master_seed = 9
"#;
        let cfg = parse(text).unwrap();
        assert_eq!(cfg.sim.n_nodes, 200);
        assert_eq!(cfg.sim.bs_pos, Position::new(50.0, 75.0));
        assert_eq!(cfg.sim.protocol, Protocol::Leach);
        assert_eq!(cfg.sim.run_until, RunUntil::AllDead);
        assert!(cfg.run_until_set);
        assert_eq!(cfg.sim.weights.alpha, 0.25);
        assert_eq!(cfg.sim.weights.variant, WeightVariant::Literal);
        assert_eq!(cfg.sim.radio.e_da, 6e-9);
        assert_eq!(cfg.sim.leach.p, 0.1);
        assert_eq!(cfg.sweep.node_counts, vec![50, 60]);
        assert_eq!(cfg.sweep.protocols, vec![Protocol::Leach]);
        assert_eq!(cfg.sweep.seed_count, 2);
        assert_eq!(cfg.sweep.master_seed, 9);
    }

    fn key_of(text: &str) -> String {
        match parse(text).unwrap_err() {
            CliError::Config { key, .. } => key,
            other => panic!("{other}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of("n_nodez = 3"), "n_nodez");
        assert_eq!(key_of("n_nodes = -3"), "n_nodes");
        assert_eq!(key_of("radio_range = \"far\""), "radio_range");
        assert_eq!(key_of("[weights]\nvariant = \"odd\""), "weights.variant");
        assert_eq!(key_of("[radio]\nfoo = 1"), "radio.foo");
        assert_eq!(key_of("[sweep]\nprotocols = [\"aodv\"]"), "sweep.protocols");
        assert_eq!(key_of("bs_pos = [1]"), "bs_pos");
        assert_eq!(key_of("this is not toml"), "<file>");
    }
}
