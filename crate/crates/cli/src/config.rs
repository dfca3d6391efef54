use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hypercube_ising::dynamics::{PrecisionMode, DEFAULT_RESIDUAL_BOUND};
use hypercube_ising::dynamics::kmc::DEFAULT_EVENT_LIMIT;
use hypercube_ising::hypercube::MAX_DIM;
use hypercube_ising::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Analyze,
    Verify,
    Simulate,
    Solve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionArg {
    Auto,
    Double,
    Extended,
}

impl From<PrecisionArg> for PrecisionMode {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Auto => PrecisionMode::Auto,
            PrecisionArg::Double => PrecisionMode::Double,
            PrecisionArg::Extended => PrecisionMode::Extended,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every command.
#[derive(Args, Clone, Debug)]
pub struct CommonArgs {
    /// Cube dimension.
    #[arg(long)]
    pub n: u32,
    /// External field.
    #[arg(long)]
    pub h: f64,
    /// Accept fields whose energy levels may coincide (e.g. h = 1/2).
    #[arg(long)]
    pub allow_degenerate_h: bool,
    /// Distance from the integers below which b·h counts as degenerate.
    #[arg(long)]
    pub field_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

/// Flags for the dynamics commands.
#[derive(Args, Clone, Debug)]
pub struct DynamicsArgs {
    /// Inverse temperature.
    #[arg(long, conflicts_with = "beta_list")]
    pub beta: Option<f64>,
    /// Comma-separated inverse temperatures.
    #[arg(long, value_delimiter = ',')]
    pub beta_list: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "auto")]
    pub precision: PrecisionArg,
    /// Bound on the solver residual ‖b - Ax‖∞.
    #[arg(long, default_value_t = DEFAULT_RESIDUAL_BOUND)]
    pub residual_bound: f64,
}

#[derive(Args, Clone, Debug)]
pub struct SimulationArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: u64,
    /// Per-replica event cap; derived from the barrier when absent.
    #[arg(long)]
    pub max_events: Option<u64>,
    /// Refuse runs whose estimated event count exceeds this.
    #[arg(long, default_value_t = DEFAULT_EVENT_LIMIT)]
    pub event_limit: f64,
    /// Race ⊟ → C* against ⊟ → ⊞ and tally the entrance point into C*.
    #[arg(long)]
    pub first_hit: bool,
}

/// Fully resolved parameters of one run; embedded in every JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub n: u32,
    pub h: f64,
    pub beta: Option<f64>,
    pub beta_list: Option<Vec<f64>>,
    pub seed: u64,
    pub replicas: u64,
    pub precision: PrecisionArg,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub allow_degenerate_h: bool,
    pub field_tol: Option<f64>,
    pub residual_bound: f64,
    pub max_events: Option<u64>,
    pub event_limit: f64,
    pub first_hit: bool,
}

impl RunConfig {
    pub fn new(
        command: CommandKind,
        common: &CommonArgs,
        dynamics: Option<&DynamicsArgs>,
        sim: Option<&SimulationArgs>,
    ) -> Self {
        Self {
            command,
            n: common.n,
            h: common.h,
            beta: dynamics.and_then(|d| d.beta),
            beta_list: dynamics.and_then(|d| d.beta_list.clone()),
            seed: sim.map_or(0, |s| s.seed),
            replicas: sim.map_or(0, |s| s.replicas),
            precision: dynamics.map_or(PrecisionArg::Auto, |d| d.precision),
            out: common.out.clone(),
            format: common.format,
            allow_degenerate_h: common.allow_degenerate_h,
            field_tol: common.field_tol,
            residual_bound: dynamics.map_or(DEFAULT_RESIDUAL_BOUND, |d| d.residual_bound),
            max_events: sim.and_then(|s| s.max_events),
            event_limit: sim.map_or(DEFAULT_EVENT_LIMIT, |s| s.event_limit),
            first_hit: sim.is_some_and(|s| s.first_hit),
        }
    }

    /// Inverse temperatures in the order given.
    pub fn betas(&self) -> Vec<f64> {
        match (&self.beta_list, self.beta) {
            (Some(list), _) => list.clone(),
            (None, Some(b)) => vec![b],
            (None, None) => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.n > MAX_DIM {
            return Err(Error::Parameter(format!("n must lie in [1, {MAX_DIM}], got {}", self.n)));
        }
        if !self.h.is_finite() {
            return Err(Error::Parameter(format!("h must be finite, got {}", self.h)));
        }
        if let Some(t) = self.field_tol {
            if !(t > 0.0 && t < 0.5) {
                return Err(Error::Parameter(format!("field tolerance must lie in (0, 1/2), got {t}")));
            }
        }
        let dynamic = matches!(self.command, CommandKind::Simulate | CommandKind::Solve);
        if dynamic {
            let betas = self.betas();
            if betas.is_empty() {
                return Err(Error::Parameter("--beta or --beta-list is required".into()));
            }
            if let Some(b) = betas.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
                return Err(Error::Parameter(format!("beta must be finite and >= 0, got {b}")));
            }
            if !(self.residual_bound > 0.0) {
                return Err(Error::Parameter("residual bound must be positive".into()));
            }
        } else if self.format == Format::Csv {
            return Err(Error::Parameter(
                "csv output is available for solve and simulate only".into(),
            ));
        }
        if self.command == CommandKind::Simulate {
            if self.replicas == 0 {
                return Err(Error::Parameter("replicas must be positive".into()));
            }
            if self.max_events == Some(0) {
                return Err(Error::Parameter("max events must be positive".into()));
            }
        }
        Ok(())
    }
}
