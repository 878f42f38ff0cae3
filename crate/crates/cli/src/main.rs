mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;

#[derive(Debug, Parser)]
#[command(name = "tfetsec", version, about = "TFET/CMOS side-channel and Trojan-footprint workbench")]
pub struct Cli {
    /// Experiment config (TOML); flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Top-level seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drain current versus gate voltage for one device model.
    IvSweep(IvSweepArgs),
    /// Area and power of the bundled inventories against the published tables.
    Estimate(EstimateArgs),
    /// Synthesize power traces for one key byte.
    Synth(SynthArgs),
    /// Correlation power analysis over technologies and logic styles.
    Cpa(CpaArgs),
    /// Healthy versus infected pipeline runs and Trojan footprints.
    Trojan(TrojanArgs),
    /// Dump the bundled reference tables and calibration check.
    Report,
}

#[derive(Debug, Args)]
pub struct IvSweepArgs {
    /// `tfet` or `mosfet`.
    #[arg(long)]
    pub tech: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, value_name = "FILE")]
    pub library: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub inventories: Option<PathBuf>,
    #[arg(long)]
    pub activity: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct LeakageArgs {
    /// Noise standard deviation.
    #[arg(long)]
    pub noise: Option<f64>,
    /// CML data-dependent fraction of the bias.
    #[arg(long)]
    pub ripple: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub leak_sample: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value = "tfet")]
    pub tech: String,
    #[arg(long, default_value = "sl")]
    pub style: String,
    #[arg(long)]
    pub traces: Option<usize>,
    /// Key byte index into the published keys.
    #[arg(long, default_value_t = 0)]
    pub key_byte: usize,
    /// Lead with the published plaintext bytes.
    #[arg(long)]
    pub table3: bool,
    /// Also write the binary trace container.
    #[arg(long)]
    pub binary: bool,
    #[command(flatten)]
    pub leakage: LeakageArgs,
}

#[derive(Debug, Args)]
pub struct CpaArgs {
    #[arg(long, value_delimiter = ',')]
    pub tech: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub style: Option<Vec<String>>,
    #[arg(long)]
    pub traces: Option<usize>,
    #[arg(long)]
    pub table3: bool,
    #[arg(long, value_delimiter = ',')]
    pub key_bytes: Option<Vec<usize>>,
    /// Correlation dumps: `none`, `first` or `all`.
    #[arg(long)]
    pub dump: Option<String>,
    #[command(flatten)]
    pub leakage: LeakageArgs,
}

#[derive(Debug, Args)]
pub struct TrojanArgs {
    /// Trace CSV (`pc,kind,taken,target`); synthetic traces when absent.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub kind: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub periods: Option<Vec<u64>>,
    /// Condition trigger `counter:threshold`, e.g. `loads:100`.
    #[arg(long)]
    pub condition: Option<String>,
    /// Number of synthetic traces.
    #[arg(long)]
    pub traces: Option<usize>,
    #[arg(long)]
    pub instructions: Option<usize>,
    #[arg(long)]
    pub branch_fraction: Option<f64>,
    #[arg(long)]
    pub taken_bias: Option<f64>,
    #[arg(long)]
    pub bht_entries: Option<usize>,
    #[arg(long)]
    pub fetch_width: Option<usize>,
    #[arg(long)]
    pub mispredict_penalty: Option<u64>,
    #[arg(long)]
    pub refetch_penalty: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::execute(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}\n\nRun `tfetsec <COMMAND> --help` for usage.");
            ExitCode::from(2)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
