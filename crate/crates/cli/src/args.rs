use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use vcache::caching::CachingPolicy;
use vcache::service::ServicePolicy;
use vcache::sim::VSetting;

#[derive(Debug, Parser)]
#[command(name = "vcache", version, about = "AoI-aware caching and delivery simulator for connected vehicles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario per seed and write its CSV files.
    Run(RunArgs),
    /// Run several stage-1 policies on identical traces.
    Compare(CompareArgs),
    /// Run identical traces under several values of V.
    SweepV(SweepArgs),
    /// Print the default scenario file.
    DefaultConfig,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario file (TOML). Defaults to the built-in highway.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Start from the one-RSU, five-region scenario instead.
    #[arg(long, conflicts_with = "config")]
    pub single_rsu: bool,
    /// Seed to run; repeatable. Defaults to the scenario's seed.
    #[arg(long = "seed", value_name = "N")]
    pub seeds: Vec<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "vcache-out")]
    pub out: PathBuf,
    /// Number of slots.
    #[arg(long, value_name = "N")]
    pub horizon: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "POLICY")]
    pub stage1: Option<CachingPolicy>,
    #[arg(long, value_name = "POLICY")]
    pub stage2: Option<ServicePolicy>,
    /// Weight of cost against backlog: a number or light, normal, heavy.
    #[arg(long, value_name = "V", allow_negative_numbers = true)]
    pub v: Option<VSetting>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Stage-1 policy to include; repeatable. Defaults to all three.
    #[arg(long = "stage1", value_name = "POLICY")]
    pub policies: Vec<CachingPolicy>,
    #[arg(long, value_name = "POLICY")]
    pub stage2: Option<ServicePolicy>,
    #[arg(long, value_name = "V", allow_negative_numbers = true)]
    pub v: Option<VSetting>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Value of V to run; repeatable. Defaults to light, normal, heavy.
    #[arg(long = "v", value_name = "V", allow_negative_numbers = true)]
    pub vs: Vec<VSetting>,
    #[arg(long, value_name = "POLICY")]
    pub stage1: Option<CachingPolicy>,
    #[arg(long, value_name = "POLICY")]
    pub stage2: Option<ServicePolicy>,
}
