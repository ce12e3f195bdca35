//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "stmdp",
    about = "Solve, verify, simulate, and serialize self-triggered policies for grid MDPs",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Solve the penalized lookahead equation for one or more update
    /// penalties.
    Solve(SolveArgs),
    /// Greedily maximise waiting times under a suboptimality bound and
    /// verify the result.
    Guarantee(GuaranteeArgs),
    /// Roll out a solved policy with seeded Monte Carlo and report costs,
    /// update counts, and savings.
    Simulate(SimulateArgs),
    /// Render a policy document as a waiting-time/action map.
    Render(RenderArgs),
    /// Write the map-derived model as a document.
    Export(ExportArgs),
    /// Read a model or policy document and validate it.
    Import(ImportArgs),
}

/// Flags shared by every command that reads a map.
#[derive(Args, Clone)]
pub struct MapArgs {
    /// Path to the map document.
    #[arg(long)]
    pub map: PathBuf,
    /// Use the windy variant (north and west drift of 0.1 each).
    #[arg(long)]
    pub windy: bool,
    /// Discount factor; overrides the map header.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Maximum waiting time; overrides the map header.
    #[arg(long)]
    pub tbar: Option<usize>,
    /// Sup-norm stopping tolerance for the solvers.
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Update penalty; repeat the flag to sweep several values.
    #[arg(long)]
    pub penalty: Vec<f64>,
    /// Directory for policy documents (printed to stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Render arrows with Unicode glyphs.
    #[arg(long)]
    pub unicode: bool,
    /// Number of solver threads for parameter sweeps.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args)]
pub struct GuaranteeArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Suboptimality factor (at least 1); repeat to sweep several values.
    #[arg(long, required = true)]
    pub alpha: Vec<f64>,
    /// Directory for policy documents (printed to stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Render arrows with Unicode glyphs.
    #[arg(long)]
    pub unicode: bool,
    /// Number of synthesis threads for parameter sweeps.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Policy document to roll out.
    #[arg(long)]
    pub policy: PathBuf,
    /// Number of independently seeded episodes.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// Base seed; episode i uses stream i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Steps per episode (default: long enough that the discounted tail is
    /// below 1e-4).
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Start state as a 1-based display index (default: the S cell).
    #[arg(long)]
    pub start: Option<usize>,
    /// Write the stream-0 trajectory as tab-separated records.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Policy document to render.
    #[arg(long)]
    pub policy: PathBuf,
    /// Render arrows with Unicode glyphs.
    #[arg(long)]
    pub unicode: bool,
}

#[derive(Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ImportArgs {
    /// Document to read (model or policy).
    #[arg(long)]
    pub file: PathBuf,
    /// Map to validate the fingerprint against.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Treat the map as windy during validation.
    #[arg(long)]
    pub windy: bool,
}
