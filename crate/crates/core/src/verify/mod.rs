//! Monte-Carlo and oracle checks of the thermal minimum-output-entropy
//! property.
//!
//! Every check draws its trials in parallel with per-trial seeds
//! `seed ^ index`, collects the outcomes in index order and reduces them
//! serially, so the report does not depend on the number of worker threads.

pub mod dense;
pub mod search;
pub mod tables;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    entropy_derivative_at_zero, evolve_with, fannes_bound, output_entropy_with,
    thermal_entropy_rate, Engine, EntropyRate, LindbladSpec,
};
use crate::contravariant::{
    contravariant_output_entropy_with, min_output_entropy_contravariant, ContravariantParams,
};
use crate::error::{MoeError, Result};
use crate::fock::{
    entropy_of, g, g_inverse, passive_rearrange, sample_passive_on_support, tail_entropy_budget,
    thermal_unchecked, EntropyValue, FockDistribution,
};

use dense::{random_dense_state, PASSIVE_REDUCTION_MAX_DIM};

pub use dense::{dense_evolve, DenseChannel, DenseEvolution, DenseState};

/// Floor of the per-trial budget in the passive-reduction check.
pub const PASSIVE_REDUCTION_TOLERANCE: f64 = 1e-9;

/// Rate trials whose boundary-flux budget exceeds this are excluded.
pub const RATE_BUDGET_LIMIT: f64 = 1e-6;

/// Verdict of a check: `Finding` means at least one violation beyond budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ReportStatus {
    Pass,
    Finding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Finite,
    Infinitesimal,
    PassiveReduction,
    Contravariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ChannelLabel {
    Covariant(LindbladSpec),
    Contravariant(ContravariantParams),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: CheckKind,
    pub channel: ChannelLabel,
    pub s0: Option<EntropyValue>,
    pub dim: usize,
    pub seed: u64,
    pub trials: usize,
    /// Trials that produced a finite comparison.
    pub evaluated: usize,
    /// Trials dropped because their truncation budget was exceeded.
    pub excluded: usize,
    /// Rate trials with a divergent derivative; these satisfy the inequality.
    pub divergent: usize,
    /// Thermal-input value from the closed form, when one exists.
    pub baseline: Option<f64>,
    /// Numerical thermal-input value minus `baseline`.
    pub thermal_self_gap: Option<f64>,
    /// Smallest trial-minus-baseline gap.
    pub min_gap: f64,
    pub argmin_seed: u64,
    /// Smallest trial value, the thermal self-trial included.
    pub min_value: Option<f64>,
    pub violations: usize,
    /// Largest per-trial budget used to declare violations.
    pub entropy_error_budget: f64,
    pub status: ReportStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub dim: usize,
    pub engine: Engine,
    /// Sample states supported on `0..support` instead of the whole window.
    pub support: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            dim: 256,
            engine: Engine::default(),
            support: None,
        }
    }
}

enum Outcome {
    Compared { value: f64, gap: f64, budget: f64 },
    Divergent,
    Excluded,
}

pub(crate) fn trial_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

struct Reduction {
    evaluated: usize,
    excluded: usize,
    divergent: usize,
    min_gap: f64,
    argmin_seed: u64,
    min_value: Option<f64>,
    violations: usize,
    budget: f64,
}

fn reduce(outcomes: &[Outcome], seed: u64) -> Result<Reduction> {
    let mut r = Reduction {
        evaluated: 0,
        excluded: 0,
        divergent: 0,
        min_gap: f64::INFINITY,
        argmin_seed: seed,
        min_value: None,
        violations: 0,
        budget: 0.0,
    };
    for (i, o) in outcomes.iter().enumerate() {
        match *o {
            Outcome::Compared { value, gap, budget } => {
                r.evaluated += 1;
                if gap < r.min_gap {
                    r.min_gap = gap;
                    r.argmin_seed = trial_seed(seed, i);
                }
                r.min_value = Some(r.min_value.map_or(value, |m: f64| m.min(value)));
                if gap < -budget {
                    r.violations += 1;
                }
                r.budget = r.budget.max(budget);
            }
            Outcome::Divergent => r.divergent += 1,
            Outcome::Excluded => r.excluded += 1,
        }
    }
    if r.evaluated == 0 && r.divergent == 0 {
        return Err(MoeError::Truncation {
            tail_bound: f64::INFINITY,
            limit: crate::fock::MAX_TAIL_BOUND,
            dim: 0,
        });
    }
    if r.evaluated == 0 {
        r.min_gap = 0.0;
    }
    Ok(r)
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(MoeError::param("trials", 0.0, "need at least one trial"));
    }
    Ok(())
}

fn check_s0(s0: EntropyValue) -> Result<()> {
    if s0.nats() <= 0.0 {
        return Err(MoeError::param("S0", s0.nats(), "must be positive"));
    }
    Ok(())
}

fn sample(s0: EntropyValue, options: &VerifyOptions, seed: u64) -> Result<FockDistribution> {
    let support = options.support.unwrap_or(options.dim);
    Ok(sample_passive_on_support(s0, options.dim, support, seed)?.into_fock())
}

fn tolerate_truncation<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_truncation() => Ok(None),
        Err(e) => Err(e),
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    check: CheckKind,
    channel: ChannelLabel,
    s0: Option<EntropyValue>,
    dim: usize,
    seed: u64,
    trials: usize,
    baseline: Option<f64>,
    thermal_self_gap: Option<f64>,
    r: Reduction,
) -> VerificationReport {
    VerificationReport {
        check,
        channel,
        s0,
        dim,
        seed,
        trials,
        evaluated: r.evaluated,
        excluded: r.excluded,
        divergent: r.divergent,
        baseline,
        thermal_self_gap,
        min_gap: r.min_gap,
        argmin_seed: r.argmin_seed,
        min_value: r.min_value,
        violations: r.violations,
        entropy_error_budget: r.budget,
        status: if r.violations == 0 {
            ReportStatus::Pass
        } else {
            ReportStatus::Finding
        },
    }
}

/// Compares `S(Φ(p))` for random passive `p` with `H(p) = S0` against the
/// thermal input of the same entropy.
pub fn verify_conjecture_finite(
    spec: &LindbladSpec,
    s0: EntropyValue,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    verify_conjecture_finite_with(spec, s0, trials, seed, &VerifyOptions::default())
}

pub fn verify_conjecture_finite_with(
    spec: &LindbladSpec,
    s0: EntropyValue,
    trials: usize,
    seed: u64,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    check_s0(s0)?;
    check_trials(trials)?;
    let nbar = g_inverse(s0);
    let baseline = g(spec.thermal_output_nbar(nbar)?)?.nats();
    let thermal = thermal_unchecked(nbar, options.dim)?;
    let self_trial = output_entropy_with(spec, &thermal, options.engine)?;
    let self_gap = self_trial.nats() - baseline;

    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Outcome> {
            let p = sample(s0, options, trial_seed(seed, i))?;
            Ok(match tolerate_truncation(output_entropy_with(spec, &p, options.engine))? {
                Some(out) => Outcome::Compared {
                    value: out.nats(),
                    gap: out.nats() - baseline,
                    budget: out.error_budget,
                },
                None => Outcome::Excluded,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = reduce(&outcomes, seed)?;
    r.min_value = Some(r.min_value.map_or(self_trial.nats(), |m| m.min(self_trial.nats())));
    Ok(assemble(
        CheckKind::Finite,
        ChannelLabel::Covariant(*spec),
        Some(s0),
        options.dim,
        seed,
        trials,
        Some(baseline),
        Some(self_gap),
        r,
    ))
}

/// Compares the entropy production rate at `t = 0` of random passive states
/// against the thermal rate at the same entropy. Divergent rates satisfy
/// the inequality.
pub fn verify_conjecture_infinitesimal(
    spec: &LindbladSpec,
    s0: EntropyValue,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    verify_conjecture_infinitesimal_with(spec, s0, trials, seed, &VerifyOptions::default())
}

pub fn verify_conjecture_infinitesimal_with(
    spec: &LindbladSpec,
    s0: EntropyValue,
    trials: usize,
    seed: u64,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    check_s0(s0)?;
    check_trials(trials)?;
    let nbar = g_inverse(s0);
    let baseline = thermal_entropy_rate(spec, nbar)
        .finite()
        .expect("thermal rate is finite for positive entropy");
    let thermal = thermal_unchecked(nbar, options.dim)?;
    let self_rate = entropy_derivative_at_zero(spec, &thermal);
    let self_gap = self_rate.finite().map(|r| r - baseline);

    let outcomes: Vec<Outcome> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Outcome> {
            let p = sample(s0, options, trial_seed(seed, i))?;
            Ok(match entropy_derivative_at_zero(spec, &p) {
                EntropyRate::Divergent => Outcome::Divergent,
                EntropyRate::Finite { error_budget, .. } if error_budget > RATE_BUDGET_LIMIT => {
                    Outcome::Excluded
                }
                EntropyRate::Finite { rate, error_budget } => Outcome::Compared {
                    value: rate,
                    gap: rate - baseline,
                    budget: error_budget,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = reduce(&outcomes, seed)?;
    if let Some(v) = self_rate.finite() {
        r.min_value = Some(r.min_value.map_or(v, |m| m.min(v)));
    }
    Ok(assemble(
        CheckKind::Infinitesimal,
        ChannelLabel::Covariant(*spec),
        Some(s0),
        options.dim,
        seed,
        trials,
        Some(baseline),
        self_gap,
        r,
    ))
}

/// Output von Neumann entropy of a random dense state minus the output
/// entropy of its passive rearrangement, both at the oracle's working cutoff.
pub fn passive_reduction_gap(
    channel: &DenseChannel,
    rho: &DenseState,
    spectrum: &[f64],
) -> Result<(f64, f64)> {
    let spec = channel.spec();
    let out = channel.apply(rho)?;
    let w = out.working_dim;
    let s_dense = out.state.von_neumann_entropy();
    let passive = passive_rearrange(&FockDistribution::new(spectrum.to_vec(), 0.0)?).into_fock();
    let evolved = evolve_with(spec, &passive.padded(w), Engine::DenseExponential)?;
    let s_passive = entropy_of(evolved.probs());
    let budget = tail_entropy_budget(out.leaked, w)
        + tail_entropy_budget(evolved.tail_bound(), w)
        + fannes_bound(Engine::DenseExponential.tv_error_estimate(), w)
        + fannes_bound(1e-11, w);
    Ok((s_dense - s_passive, budget.max(PASSIVE_REDUCTION_TOLERANCE)))
}

/// Random dense states `U diag(λ) U†` against their passive rearrangements.
pub fn check_passive_reduction(
    spec: &LindbladSpec,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if dim > PASSIVE_REDUCTION_MAX_DIM {
        return Err(MoeError::DimensionLimit {
            what: "passive-reduction check",
            dim,
            limit: PASSIVE_REDUCTION_MAX_DIM,
        });
    }
    check_trials(trials)?;
    let channel = DenseChannel::new(spec, dim)?;
    let (_, first_spectrum) = random_dense_state(dim, seed)?;
    let diag = passive_rearrange(&FockDistribution::new(first_spectrum.clone(), 0.0)?);
    let (self_gap, _) =
        passive_reduction_gap(&channel, &DenseState::from_diagonal(&diag)?, &first_spectrum)?;

    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Outcome> {
            let (rho, spectrum) = random_dense_state(dim, trial_seed(seed, i))?;
            Ok(match tolerate_truncation(passive_reduction_gap(&channel, &rho, &spectrum))? {
                Some((gap, budget)) => Outcome::Compared { value: gap, gap, budget },
                None => Outcome::Excluded,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = reduce(&outcomes, seed)?;
    r.min_value = None;
    Ok(assemble(
        CheckKind::PassiveReduction,
        ChannelLabel::Covariant(*spec),
        None,
        dim,
        seed,
        trials,
        None,
        Some(self_gap),
        r,
    ))
}

/// Largest total-variation distance between the diagonal of the dense
/// oracle's output and the birth–death evolution, over random diagonal
/// (generally unsorted) inputs.
pub fn check_diagonal_restriction(
    spec: &LindbladSpec,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let channel = DenseChannel::new(spec, dim)?;
    let worst = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let (_, spectrum) = random_dense_state(dim, trial_seed(seed, i))?;
            let p = FockDistribution::new(spectrum, 0.0)?;
            let out = channel.apply(&DenseState::from_diagonal(&p)?)?;
            let reference =
                evolve_with(spec, &p.padded(out.working_dim), Engine::DenseExponential)?;
            Ok(crate::fock::total_variation(&out.state.diagonal(), reference.probs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// Output entropy of random passive inputs through a contravariant channel
/// against the thermal-input value.
pub fn verify_contravariant(
    params: &ContravariantParams,
    s0: EntropyValue,
    trials: usize,
    seed: u64,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    check_s0(s0)?;
    check_trials(trials)?;
    let baseline = min_output_entropy_contravariant(params, s0)?.nats();
    let thermal = thermal_unchecked(g_inverse(s0), options.dim)?;
    let self_trial = contravariant_output_entropy_with(params, &thermal, options.engine)?;

    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Outcome> {
            let p = sample(s0, options, trial_seed(seed, i))?;
            let out = contravariant_output_entropy_with(params, &p, options.engine);
            Ok(match tolerate_truncation(out)? {
                Some(out) => Outcome::Compared {
                    value: out.nats(),
                    gap: out.nats() - baseline,
                    budget: out.error_budget,
                },
                None => Outcome::Excluded,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = reduce(&outcomes, seed)?;
    r.min_value = Some(r.min_value.map_or(self_trial.nats(), |m| m.min(self_trial.nats())));
    r.budget = r.budget.max(self_trial.error_budget);
    Ok(assemble(
        CheckKind::Contravariant,
        ChannelLabel::Contravariant(*params),
        Some(s0),
        options.dim,
        seed,
        trials,
        Some(baseline),
        Some(self_trial.nats() - baseline),
        r,
    ))
}
