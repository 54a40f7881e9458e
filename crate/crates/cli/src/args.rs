use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "misodof", version, about = "DoF region, scheme synthesis and finite-SNR checks for the MISO broadcast channel with partial CSIT")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the subset constraints of the DoF region, or a plot slice.
    Region(RegionArgs),
    /// Build a rate-splitting time-sharing plan reaching a DoF tuple.
    Synthesize(SynthesizeArgs),
    /// Enumerate region vertices, synthesize each, and audit random schemes.
    Verify(VerifyArgs),
    /// Monte Carlo rate sweep of a scheme with fitted DoF slopes.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct ProfileSource {
    /// CSIT exponents in user order, e.g. `0.6,0.3` or `3/5,3/10`.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// File holding the exponents, separated by commas, spaces or newlines.
    #[arg(long, value_name = "PATH")]
    pub alpha_file: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    #[command(flatten)]
    pub profile: ProfileSource,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Fix coordinates and print the cross-section as CSV, e.g. `d3=0.2`.
    /// Several assignments are separated by commas.
    #[arg(long, value_name = "ASSIGNMENTS")]
    pub plot_slice: Option<String>,
    /// Subdivide slice edges (2D) or grid the slice (other dimensions) with
    /// step `1/N`.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..=1000))]
    pub resolution: Option<u32>,
}

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub profile: ProfileSource,
    /// Target DoF tuple in user order.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub target: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub profile: ProfileSource,
    /// Random schemes drawn for the membership audit.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest K for which vertices are enumerated.
    #[arg(long, default_value_t = miso_dof::oracle::DEFAULT_GUARD)]
    pub max_k: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub profile: ProfileSource,
    /// Target DoF tuple; the synthesized plan is simulated.
    #[arg(long, value_name = "LIST", conflicts_with = "scheme", required_unless_present = "scheme")]
    pub target: Option<String>,
    /// JSON rate-splitting scheme in user order.
    #[arg(long, value_name = "PATH")]
    pub scheme: Option<PathBuf>,
    /// Transmit antennas.
    #[arg(long = "M", visible_alias = "antennas", value_name = "M")]
    pub antennas: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = miso_dof_sim::sweep::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Linear SNR values, e.g. `1e6,1e8,1e10`.
    #[arg(long, value_name = "LIST")]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Also write the per-point CSV here.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}
