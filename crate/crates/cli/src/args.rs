//! Argument structs shared by the parser, the runners, and the manifest
//! replay path. Every struct round-trips through serde so a recorded
//! manifest can be re-executed bit-identically.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemArg {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Hermite,
    Laguerre,
}

/// Model parameters common to the stochastic commands. `beta` stays a
/// string so the literal token `inf` survives the manifest round-trip.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Root system (a or b).
    #[arg(long, value_enum)]
    pub system: SystemArg,

    /// Number of particles N.
    #[arg(long = "n", visible_alias = "dim")]
    pub n: usize,

    /// Coupling beta: a positive number, or the token `inf`.
    #[arg(long)]
    pub beta: String,

    /// Wall parameter nu (type b only; defaults to 0).
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PathArgs {
    /// Start at the chamber corner (the origin).
    #[arg(long, conflicts_with = "x0")]
    pub corner: bool,

    /// Explicit start coordinates, comma separated and ordered
    /// decreasingly (e.g. `1.0,0.5,-0.2`).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub x0: Option<Vec<f64>>,

    /// Observation times, comma separated and strictly increasing.
    #[arg(long = "t-grid", value_delimiter = ',', num_args = 1..)]
    pub t_grid: Vec<f64>,

    /// Maximum integrator step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,

    /// Warm-start time for corner launches (default 1e-4 * final time).
    #[arg(long)]
    pub delta: Option<f64>,

    /// Number of Monte-Carlo paths.
    #[arg(long)]
    pub paths: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RunArgs {
    /// Master random seed; everything derives from it deterministically.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (0 = library default). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,

    /// Output file; the run manifest is written next to it as
    /// `<out>.manifest.json`. Without it, output goes to stdout.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ZerosArgs {
    /// Polynomial family.
    #[arg(long, value_enum)]
    pub family: FamilyArg,

    /// Degree N >= 1.
    #[arg(long)]
    pub degree: usize,

    /// Laguerre parameter alpha > -1 (laguerre only).
    #[arg(long)]
    pub alpha: Option<f64>,

    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub path: PathArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MartingaleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,

    /// Order of the symmetric-function martingale, 1 <= k <= N.
    #[arg(long = "k")]
    pub k: usize,

    #[command(flatten)]
    #[serde(flatten)]
    pub path: PathArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CharpolyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,

    /// Evaluation time t > 0.
    #[arg(long)]
    pub t: f64,

    /// Points y at which to compare, comma separated.
    #[arg(long = "y", value_delimiter = ',', num_args = 1..)]
    pub y_values: Vec<f64>,

    /// Monte-Carlo paths; 0 prints the closed-form curve alone.
    #[arg(long, default_value_t = 0)]
    pub paths: usize,

    /// Maximum integrator step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,

    /// Warm-start time for the corner launch.
    #[arg(long)]
    pub delta: Option<f64>,

    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,

    /// Evaluation time t > 0.
    #[arg(long)]
    pub t: f64,

    /// Orders k to check, comma separated (default 1..=N).
    #[arg(long = "k-list", value_delimiter = ',', num_args = 1..)]
    pub k_list: Option<Vec<usize>>,

    /// Importance-sampling draws.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,

    /// Proposal variance inflation (> 1); defaults to the bulk-matched
    /// scale max(1.5, 1 + 2*gamma/N).
    #[arg(long = "proposal-scale")]
    pub proposal_scale: Option<f64>,

    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct HarmonicArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,

    /// Order of the compensator, 1 <= k <= N.
    #[arg(long = "k")]
    pub k: usize,

    /// Number of random interior evaluation points.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,

    /// Acceptance tolerance on residual / local scale.
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,

    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Path to a `*.manifest.json` written by a previous run.
    #[arg(long)]
    pub manifest: String,

    /// Optional override for the output path.
    #[arg(long)]
    pub out: Option<String>,
}
