use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use duopoly_core::oligopoly::TieRule;

use crate::config::{parse_list, parse_weights, MarketSpec};
use crate::error::{CliError, CliResult};
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "duopoly",
    version,
    about = "Price equilibria for sellers with random availability"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub market: MarketArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symmetric equilibrium with its best-response certificate.
    SolveSym,
    /// Every certified equilibrium of a two-seller market.
    SolveAsym,
    /// Re-check a profile written by a solve command.
    Certify(ProfileArgs),
    /// Monte-Carlo check of expected sales under a profile.
    Simulate(SimulateArgs),
    /// Lowest support price versus top availability for binomial sellers.
    SweepAsymptotic(SweepArgs),
    /// Heuristic strategy for n identical sellers and its deviation gaps.
    Oligopoly(OligopolyArgs),
}

/// Market flags; each one overrides the same key from `--config`.
#[derive(Debug, Args)]
pub struct MarketArgs {
    /// Market file, flat `key = value` lines or JSON.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Deterministic demand.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Random demand as `demand:probability` pairs, e.g. `3:0.5,4:0.5`.
    #[arg(long, global = true, value_name = "PAIRS")]
    pub demand_weights: Option<String>,
    /// Price cap.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v: Option<f64>,
    /// Cost per unit.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Availability probabilities of seller 1, levels 0..=m.
    #[arg(long, global = true, value_name = "LIST")]
    pub q1: Option<String>,
    /// Availability probabilities of seller 2 (defaults to q1).
    #[arg(long, global = true, value_name = "LIST")]
    pub q2: Option<String>,
    /// Number of sellers (oligopoly).
    #[arg(long, global = true)]
    pub n: Option<usize>,
}

impl MarketArgs {
    /// File contents, if any, with flag values on top.
    pub fn resolve(&self) -> CliResult<MarketSpec> {
        let base = match &self.config {
            Some(p) => MarketSpec::load(p)?,
            None => MarketSpec::default(),
        };
        let flag = |name: &str, e: String| CliError::config(format!("flag --{name}: {e}"));
        let over = MarketSpec {
            d: self.d,
            demand_weights: self
                .demand_weights
                .as_deref()
                .map(parse_weights)
                .transpose()
                .map_err(|e| flag("demand-weights", e))?,
            v: self.v,
            c: self.c,
            q1: self
                .q1
                .as_deref()
                .map(parse_list)
                .transpose()
                .map_err(|e| flag("q1", e))?,
            q2: self
                .q2
                .as_deref()
                .map(parse_list)
                .transpose()
                .map_err(|e| flag("q2", e))?,
            n: self.n,
        };
        Ok(base.merge(over))
    }

    pub fn is_empty(&self) -> bool {
        self.config.is_none()
            && self.d.is_none()
            && self.demand_weights.is_none()
            && self.v.is_none()
            && self.c.is_none()
            && self.q1.is_none()
            && self.q2.is_none()
            && self.n.is_none()
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Output file; standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format (sweep-asymptotic defaults to csv, the rest to json).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Random seed for simulation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Best-response tolerance as a fraction of v - c.
    #[arg(
        long,
        global = true,
        default_value_t = 1e-6,
        allow_negative_numbers = true
    )]
    pub tol: f64,
    /// Price grid size for best-response checks.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub grid: usize,
    /// Simulated rounds.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub rounds: u64,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Add a generation time to JSON output.
    #[arg(long, global = true)]
    pub timestamp: bool,
}

impl RunArgs {
    pub fn validate(&self) -> CliResult<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::config(format!(
                "flag --tol: {} must be positive",
                self.tol
            )));
        }
        if self.grid < 1000 {
            return Err(CliError::config(format!(
                "flag --grid: {} is below 1000",
                self.grid
            )));
        }
        if self.rounds == 0 {
            return Err(CliError::config("flag --rounds: must be at least 1"));
        }
        if self.jobs == Some(0) {
            return Err(CliError::config("flag --jobs: must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// JSON written by solve-sym or solve-asym, or a bare profile.
    #[arg(long, value_name = "PATH")]
    pub profile: PathBuf,
    /// Which equilibrium of a solve-asym file to use.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ProfileArgs,
    /// Largest acceptable |z| at any probe.
    #[arg(long, default_value_t = 4.0)]
    pub z_max: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Binomial success probabilities.
    #[arg(long, default_value = "0.3,0.5,0.7", value_name = "LIST")]
    pub r: String,
    #[arg(long, default_value_t = 2)]
    pub m_min: usize,
    #[arg(long, default_value_t = 40)]
    pub m_max: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TieArg {
    Ignore,
    Proportional,
}

impl From<TieArg> for TieRule {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::Ignore => TieRule::Ignore,
            TieArg::Proportional => TieRule::Proportional,
        }
    }
}

#[derive(Debug, Args)]
pub struct OligopolyArgs {
    /// How a deviator shares buyers with rivals at the same price.
    #[arg(long, value_enum, default_value = "ignore")]
    pub tie_rule: TieArg,
    /// Tabulation points per mixed level.
    #[arg(long, default_value_t = 2048)]
    pub points: usize,
}
