use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Photon-number laboratory for phase-insensitive Gaussian channels.
///
/// Every option may also be given in a `--config` file as `key = value`,
/// with the long option name as key; flags take precedence.
#[derive(Debug, Parser)]
#[command(name = "moe", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shannon entropy of a state, and of its channel output if a channel is given.
    Entropy(StateCommand),
    /// Thermal distribution of a given mean or entropy.
    Thermal(ThermalCommand),
    /// Output photon-number distribution.
    Evolve(StateCommand),
    /// Entropy production rate at t = 0.
    Derivative(StateCommand),
    /// Critical points of the constrained entropy-rate minimization.
    Critical(CriticalCommand),
    /// Monte-Carlo and oracle checks.
    Verify(VerifyCommand),
    /// Finite-time check over a grid of one channel parameter.
    Sweep(SweepCommand),
    /// Phase-conjugating channel decomposition and minimum output entropy.
    Contravariant(ContravariantCommand),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `json` or `csv`.
    #[arg(long)]
    pub format: Option<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Photon-number cutoff.
    #[arg(long)]
    pub dim: Option<String>,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// `loss`, `amplifier`, `additive`, `lindblad` (raw rates) or `params` (τ, y).
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub kappa: Option<String>,
    /// Environment mean photon number (loss, amplifier) or added noise (additive).
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long = "gamma-plus", allow_hyphen_values = true)]
    pub gamma_plus: Option<String>,
    #[arg(long = "gamma-minus", allow_hyphen_values = true)]
    pub gamma_minus: Option<String>,
    /// Evolution time for `lindblad`.
    #[arg(long = "t")]
    pub t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Input entropy in nats.
    #[arg(long = "S0")]
    pub s0: Option<String>,
    /// Input entropy given as a thermal mean photon number, `S0 = g(n̄)`.
    #[arg(long = "S0-nbar")]
    pub s0_nbar: Option<String>,
}

#[derive(Debug, Args)]
pub struct StateCommand {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Thermal input of this mean photon number.
    #[arg(long)]
    pub thermal: Option<String>,
    /// `delta0`, `fock:N` or `uniform:N`.
    #[arg(long)]
    pub state: Option<String>,
    /// Comma-separated unnormalized weights.
    #[arg(long)]
    pub weights: Option<String>,
    /// Random passive input of the given entropy (needs --seed).
    #[command(flatten)]
    pub entropy: EntropyArgs,
    /// Restrict a random input to photon numbers below this.
    #[arg(long)]
    pub support: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// `rk` or `dense`.
    #[arg(long)]
    pub engine: Option<String>,
    /// Local error tolerance of the `rk` engine.
    #[arg(long)]
    pub tolerance: Option<String>,
}

#[derive(Debug, Args)]
pub struct ThermalCommand {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub nbar: Option<String>,
    #[command(flatten)]
    pub entropy: EntropyArgs,
}

#[derive(Debug, Args)]
pub struct CriticalCommand {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub entropy: EntropyArgs,
    #[arg(long = "mu-points")]
    pub mu_points: Option<String>,
    #[arg(long = "z0-points")]
    pub z0_points: Option<String>,
    #[arg(long = "n-max")]
    pub n_max: Option<String>,
    #[arg(long = "max-runs")]
    pub max_runs: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyCommand {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub entropy: EntropyArgs,
    /// `finite`, `infinitesimal`, `passive`, `divergence`, `discretization` or `search`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Sample states supported below this photon number.
    #[arg(long)]
    pub support: Option<String>,
    #[arg(long)]
    pub engine: Option<String>,
    #[arg(long)]
    pub tolerance: Option<String>,
    /// Highest occupied level of the divergence-check state.
    #[arg(long = "support-n")]
    pub support_n: Option<String>,
    /// Comma-separated time steps for the divergence check.
    #[arg(long = "dt-grid")]
    pub dt_grid: Option<String>,
    /// Number of pieces for the discretization check.
    #[arg(long)]
    pub steps: Option<String>,
    /// Descent iterations for the search mode.
    #[arg(long)]
    pub iterations: Option<String>,
    /// `fd` or `adjoint`.
    #[arg(long)]
    pub gradient: Option<String>,
    /// `random` or `thermal`.
    #[arg(long)]
    pub init: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepCommand {
    #[command(flatten)]
    pub common: Common,
    /// Exactly one numeric channel option is given as `start:stop:step`.
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub entropy: EntropyArgs,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Args)]
pub struct ContravariantCommand {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
    #[command(flatten)]
    pub entropy: EntropyArgs,
    /// Monte-Carlo trials against the thermal value (needs --seed).
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}
