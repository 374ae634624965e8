use serde::Serialize;

use super::engine::{evolve_with, Engine};
use super::generator::generator_apply;
use super::LindbladSpec;
use crate::error::Result;
use crate::fock::{entropy_of, g_prime, tail_entropy_budget, EntropyValue, FockDistribution};

/// Output entropy together with an error interval half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputEntropy {
    pub value: EntropyValue,
    /// Bound on `|S(true output) - value|` from truncation and engine error.
    pub error_budget: f64,
    pub tail_bound: f64,
}

impl OutputEntropy {
    pub fn nats(&self) -> f64 {
        self.value.nats()
    }
}

/// Entropy production rate at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EntropyRate {
    Finite { rate: f64, error_budget: f64 },
    /// `+∞`: mass flows into an empty level.
    Divergent,
}

impl EntropyRate {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            EntropyRate::Finite { rate, .. } => Some(rate),
            EntropyRate::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, EntropyRate::Divergent)
    }
}

/// Continuity bound `T ln(d-1) + h₂(T)` for two distributions on `d` points
/// at total-variation distance `T ≤ 1/2`.
pub fn fannes_bound(tv: f64, dim: usize) -> f64 {
    if tv <= 0.0 {
        return 0.0;
    }
    let t = tv.min(0.5);
    let h2 = -t * t.ln() - (1.0 - t) * (-t).ln_1p();
    t * ((dim.max(2) - 1) as f64).ln() + h2
}

/// `S(Φ(p))` with the default engine.
pub fn output_entropy(spec: &LindbladSpec, p: &FockDistribution) -> Result<OutputEntropy> {
    output_entropy_with(spec, p, Engine::default())
}

pub fn output_entropy_with(
    spec: &LindbladSpec,
    p: &FockDistribution,
    engine: Engine,
) -> Result<OutputEntropy> {
    let out = evolve_with(spec, p, engine)?;
    let engine_error = if spec.is_identity() {
        0.0
    } else {
        fannes_bound(engine.tv_error_estimate(), out.dim())
    };
    Ok(OutputEntropy {
        value: EntropyValue::new(entropy_of(out.probs()))?,
        error_budget: tail_entropy_budget(out.tail_bound(), out.dim()) + engine_error,
        tail_bound: out.tail_bound(),
    })
}

/// `S'(0) = -Σ (1 + ln p_n) p_n'(0)`.
///
/// Returns [`EntropyRate::Divergent`] when some empty level receives mass
/// from an occupied neighbour: `p_n = 0` with `p_{n-1} > 0` and `γ₊ > 0`, or
/// `p_n = 0` with `p_{n+1} > 0` and `γ₋ > 0`. For passive states this is
/// exactly a finite support strictly inside the window with `γ₊ > 0`. Exact
/// zeros only; no threshold.
///
/// The window is treated as the full support otherwise, so the flux out of
/// the top level enters only through `error_budget`.
pub fn entropy_derivative_at_zero(spec: &LindbladSpec, p: &FockDistribution) -> EntropyRate {
    let probs = p.probs();
    let d = probs.len();
    let (gp, gm) = (spec.gamma_plus, spec.gamma_minus);
    for n in 0..d {
        if probs[n] > 0.0 {
            continue;
        }
        let fed_from_below = gp > 0.0 && n > 0 && probs[n - 1] > 0.0;
        let fed_from_above = gm > 0.0 && n + 1 < d && probs[n + 1] > 0.0;
        if fed_from_below || fed_from_above {
            return EntropyRate::Divergent;
        }
    }
    let dp = generator_apply(spec, p);
    let rate = rate_terms(probs, &dp);

    // The level above the window would receive γ₊ d p_{d-1}; its
    // contribution -x ln x with x ≈ that flux per unit time is bounded by
    // flux·(1 + |ln flux|) on short horizons.
    let flux = gp * d as f64 * probs[d - 1];
    let boundary = if flux > 0.0 {
        flux * (1.0 + flux.ln().abs())
    } else {
        0.0
    };
    let magnitude: f64 = probs
        .iter()
        .zip(&dp)
        .filter(|(&x, _)| x > 0.0)
        .map(|(&x, &v)| ((1.0 + x.ln()) * v).abs())
        .sum();
    EntropyRate::Finite {
        rate,
        error_budget: boundary + 1e-14 * magnitude + p.tail_bound(),
    }
}

fn rate_terms(probs: &[f64], dp: &[f64]) -> f64 {
    -probs
        .iter()
        .zip(dp)
        .filter(|(&x, _)| x > 0.0)
        .map(|(&x, &v)| (1.0 + x.ln()) * v)
        .sum::<f64>()
}

/// `-Σ (1 + ln p_n) p_n'` over the positive entries, with no divergence
/// check.
pub(crate) fn rate_over_positive(spec: &LindbladSpec, probs: &[f64]) -> f64 {
    let mut dp = vec![0.0; probs.len()];
    super::generator::apply_rates(spec.gamma_plus, spec.gamma_minus, probs, &mut dp);
    rate_terms(probs, &dp)
}

/// Closed form `g'(n̄)·(γ₊(n̄+1) - γ₋ n̄)` of the rate for a thermal input.
pub fn thermal_entropy_rate(spec: &LindbladSpec, nbar: f64) -> EntropyRate {
    if nbar == 0.0 {
        return if spec.gamma_plus > 0.0 {
            EntropyRate::Divergent
        } else {
            EntropyRate::Finite {
                rate: 0.0,
                error_budget: 0.0,
            }
        };
    }
    let drift = spec.gamma_plus * (nbar + 1.0) - spec.gamma_minus * nbar;
    EntropyRate::Finite {
        rate: g_prime(nbar) * drift,
        error_budget: 0.0,
    }
}
