use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lmeec_cli::{config, run_command, sweep_command, CliError, FileConfig, Overrides, SweepMode};
use lmeec_core::{Protocol, RunUntil, WeightVariant};

#[derive(Parser, Debug)]
#[command(name = "lmeec", version, about = "Layered cluster routing simulator for wireless sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and write rounds.csv and summary.csv.
    Run(CommonArgs),
    /// Run the protocol x node-count x seed matrix and write summary, figure tables and plots.
    Sweep(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProtocolArg {
    Lmeec,
    Leach,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum UntilArg {
    Time,
    AllDead,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    Literal,
    Magnitude,
}

#[derive(Args, Debug)]
struct CommonArgs {
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,
    /// Number of deployed sensors.
    #[arg(long)]
    nodes: Option<usize>,
    /// Deployment seed (run) or master seed (sweep).
    #[arg(long)]
    seed: Option<u64>,
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    until: Option<UntilArg>,
    #[arg(long = "weight-variant", value_enum)]
    weight_variant: Option<VariantArg>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Seeds per (protocol, node count) cell.
    #[arg(long)]
    seeds: Option<usize>,
    /// Comma-separated node counts, replacing the default list.
    #[arg(long = "node-counts", value_delimiter = ',')]
    node_counts: Option<Vec<usize>>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            protocol: self.protocol.map(|p| match p {
                ProtocolArg::Lmeec => Protocol::Lmeec,
                ProtocolArg::Leach => Protocol::Leach,
            }),
            nodes: self.nodes,
            seed: self.seed,
            until: self.until.map(|u| match u {
                UntilArg::Time => RunUntil::TimeCap,
                UntilArg::AllDead => RunUntil::AllDead,
            }),
            weight_variant: self.weight_variant.map(|v| match v {
                VariantArg::Literal => WeightVariant::Literal,
                VariantArg::Magnitude => WeightVariant::Magnitude,
            }),
        }
    }

    fn file_config(&self) -> Result<FileConfig, CliError> {
        match &self.config {
            Some(path) => config::load(path),
            None => Ok(FileConfig::default()),
        }
    }
}

fn with_flag(err: CliError, overrides: &Overrides) -> CliError {
    match err {
        CliError::Config { key, reason } => match overrides.flag_for(&key) {
            Some(flag) => CliError::Config {
                reason: format!("{reason} (set by {flag})"),
                key,
            },
            None => CliError::Config { key, reason },
        },
        other => other,
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let overrides = args.overrides();
            let mut file = args.file_config()?;
            overrides.apply(&mut file.sim);
            let result = run_command(&file.sim, &args.out).map_err(|e| with_flag(e, &overrides))?;
            println!(
                "{} n={} seed={}: {} rounds, avg dissipated {:.6} J, FND {}",
                file.sim.protocol.name(),
                file.sim.n_nodes,
                file.sim.seed,
                result.rounds_run(),
                result.avg_dissipated_energy,
                result.lifetime.fnd.map_or("-".to_string(), |t| format!("{t} s")),
            );
            Ok(())
        }
        Command::Sweep(args) => {
            let common = &args.common;
            let mut overrides = common.overrides();
            let mut file = common.file_config()?;
            let mut spec = file.sweep.clone();
            if let Some(seed) = overrides.seed.take() {
                spec.master_seed = seed;
            }
            if let Some(p) = overrides.protocol.take() {
                spec.protocols = vec![p];
            }
            if let Some(n) = overrides.nodes.take() {
                spec.node_counts = vec![n];
            }
            if let Some(counts) = &args.node_counts {
                spec.node_counts = counts.clone();
            }
            if let Some(k) = args.seeds {
                spec.seed_count = k;
            }
            if let Some(u) = overrides.until {
                spec.mode = SweepMode::Only(u);
            } else if file.run_until_set {
                spec.mode = SweepMode::Only(file.sim.run_until);
            }
            overrides.apply(&mut file.sim);
            let rows = sweep_command(&file.sim, &spec, &common.out)?;
            println!("{} cells written to {}", rows.len(), common.out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
