//! Phase-conjugating channels, `χ(ξ) ↦ χ(-√|τ| ξ*) e^{-y|ξ|²/2}` with τ < 0.
//!
//! Such a channel factors as a quantum-limited attenuator `η` followed by a
//! quantum-limited conjugator of gain `κ`. The conjugator's output has the
//! same spectrum as the output of the covariant channel `(κ-1, κ)`, so all
//! entropies below are computed through that partner and the conjugation
//! itself is never represented.

use serde::Serialize;

use crate::channel::{
    evolve_with, ChannelParams, Engine, LindbladSpec, OutputEntropy, PHYSICALITY_TOLERANCE,
};
use crate::error::{MoeError, Result};
use crate::fock::{
    entropy_of, g, g_inverse, tail_entropy_budget, EntropyValue, FockDistribution, MAX_TAIL_BOUND,
};

/// Partners with `κ - 1` below this are flagged as degenerate.
pub const DEGENERATE_GAIN_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContravariantParams {
    pub tau: f64,
    pub y: f64,
}

impl ContravariantParams {
    pub fn new(tau: f64, y: f64) -> Result<Self> {
        if !(tau.is_finite() && tau < 0.0) {
            return Err(MoeError::param("tau", tau, "contravariant channels need tau < 0"));
        }
        let bound = (tau - 1.0).abs();
        if !y.is_finite() || y < bound - PHYSICALITY_TOLERANCE {
            return Err(MoeError::param(
                "y",
                y,
                format!("not a physical channel: need y >= |tau - 1| = {bound}"),
            ));
        }
        Ok(ContravariantParams { tau, y })
    }

    /// `y = 1 + |τ|`.
    pub fn is_quantum_limited(&self) -> bool {
        (self.y - (1.0 - self.tau)).abs() <= PHYSICALITY_TOLERANCE
    }
}

/// Attenuator transmissivity and conjugator gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugatorDecomposition {
    pub eta: f64,
    pub kappa: f64,
}

/// Covariant channel whose outputs share their spectra with the
/// quantum-limited conjugator of gain `kappa`: `(τ, y) = (κ-1, κ)`.
pub fn covariant_partner(kappa: f64) -> Result<ChannelParams> {
    if !(kappa.is_finite() && kappa > 1.0) {
        return Err(MoeError::param("kappa", kappa, "conjugator gain must exceed 1"));
    }
    ChannelParams::new(kappa - 1.0, kappa)
}

/// `κ → 1⁺` sends the partner to a complete attenuation onto the vacuum.
pub fn partner_is_degenerate(kappa: f64) -> bool {
    kappa - 1.0 < DEGENERATE_GAIN_MARGIN
}

/// Solves `η(1-κ) = τ`, `(κ-1)(1-η) + κ = y`.
///
/// Eliminating `η = |τ|/(κ-1)` leaves `2κ - 1 - |τ| = y`, so
/// `κ = (y + |τ| + 1)/2` and `η = 2|τ|/(y + |τ| - 1)`.
pub fn decompose(params: &ContravariantParams) -> Result<ConjugatorDecomposition> {
    let params = ContravariantParams::new(params.tau, params.y)?;
    let abs_tau = -params.tau;
    let kappa = 0.5 * (params.y + abs_tau + 1.0);
    let eta = if params.is_quantum_limited() {
        1.0
    } else {
        (2.0 * abs_tau / (params.y + abs_tau - 1.0)).min(1.0)
    };
    if !(kappa > 1.0 && eta > 0.0 && eta <= 1.0) {
        return Err(MoeError::param(
            "y",
            params.y,
            format!("no decomposition with eta in (0, 1] and kappa > 1 (eta {eta}, kappa {kappa})"),
        ));
    }
    Ok(ConjugatorDecomposition { eta, kappa })
}

pub fn recompose(decomposition: &ConjugatorDecomposition) -> Result<ContravariantParams> {
    let ConjugatorDecomposition { eta, kappa } = *decomposition;
    ContravariantParams::new(eta * (1.0 - kappa), (kappa - 1.0) * (1.0 - eta) + kappa)
}

fn pure_loss(eta: f64) -> Result<LindbladSpec> {
    LindbladSpec::new(0.0, 1.0, -eta.ln())
}

fn partner_spec(kappa: f64) -> Result<LindbladSpec> {
    LindbladSpec::from_params(covariant_partner(kappa)?)
}

/// Entropy of the contravariant output: attenuator stage, then the
/// conjugator stage evaluated through its covariant partner.
pub fn contravariant_output_entropy(
    params: &ContravariantParams,
    p: &FockDistribution,
) -> Result<OutputEntropy> {
    contravariant_output_entropy_with(params, p, Engine::default())
}

pub fn contravariant_output_entropy_with(
    params: &ContravariantParams,
    p: &FockDistribution,
    engine: Engine,
) -> Result<OutputEntropy> {
    let dec = decompose(params)?;
    let attenuated = if dec.eta < 1.0 {
        evolve_with(&pure_loss(dec.eta)?, p, engine)?
    } else {
        p.clone()
    };
    let out = evolve_with(&partner_spec(dec.kappa)?, &attenuated, engine)?;
    finish(out, 2.0 * engine.tv_error_estimate())
}

/// Same quantity computed in one step through the partner alone; only
/// meaningful for quantum-limited parameters (`η = 1`).
pub fn partner_output_entropy(kappa: f64, p: &FockDistribution, engine: Engine) -> Result<OutputEntropy> {
    let out = evolve_with(&partner_spec(kappa)?, p, engine)?;
    finish(out, engine.tv_error_estimate())
}

fn finish(out: FockDistribution, tv_error: f64) -> Result<OutputEntropy> {
    out_tail_check(&out)?;
    Ok(OutputEntropy {
        value: EntropyValue::new(entropy_of(out.probs()))?,
        error_budget: tail_entropy_budget(out.tail_bound(), out.dim())
            + crate::channel::fannes_bound(tv_error, out.dim()),
        tail_bound: out.tail_bound(),
    })
}

fn out_tail_check(out: &FockDistribution) -> Result<()> {
    if out.tail_bound() > MAX_TAIL_BOUND {
        return Err(MoeError::Truncation {
            tail_bound: out.tail_bound(),
            limit: MAX_TAIL_BOUND,
            dim: out.dim(),
        });
    }
    Ok(())
}

/// Output entropy for the thermal input of entropy `S0`: the attenuator
/// maps it to entropy `g(η g⁻¹(S0))`, and the partner sends mean `n` to
/// `(κ-1)(n+1)`.
pub fn min_output_entropy_contravariant(
    params: &ContravariantParams,
    s0: EntropyValue,
) -> Result<EntropyValue> {
    let dec = decompose(params)?;
    let s1 = g(dec.eta * g_inverse(s0))?;
    let partner = covariant_partner(dec.kappa)?;
    g(partner.thermal_output_nbar(g_inverse(s1))?)
}

/// Photon-number distribution produced by heterodyning a diagonal state and
/// preparing the coherent state of amplitude `√gain_sq` times the outcome
/// (up to conjugation, which leaves photon statistics unchanged).
///
/// For Fock input `n` the output is negative binomial,
/// `P(m|n) = C(n+m, m) gᵐ/(1+g)^{n+m+1}` with `g = gain_sq`, so the output
/// mean is `gain_sq·(⟨n⟩ + 1)`.
pub fn measure_prepare_output(p: &FockDistribution, gain_sq: f64, dim: usize) -> Result<FockDistribution> {
    if !(gain_sq.is_finite() && gain_sq > 0.0) {
        return Err(MoeError::param("gain_sq", gain_sq, "must be positive"));
    }
    let log_g = gain_sq.ln();
    let log_1g = gain_sq.ln_1p();
    let mut out = vec![0.0; dim];
    // ln C(n+m, m) accumulated along m with ln((n+m)/m).
    for (n, &pn) in p.probs().iter().enumerate() {
        if pn == 0.0 {
            continue;
        }
        let mut log_binom = 0.0;
        for (m, slot) in out.iter_mut().enumerate() {
            if m > 0 {
                log_binom += ((n + m) as f64).ln() - (m as f64).ln();
            }
            let log_term = log_binom + m as f64 * log_g - (n + m + 1) as f64 * log_1g;
            *slot += pn * log_term.exp();
        }
    }
    let mass: f64 = out.iter().sum();
    let tail = (p.mass() - mass).max(0.0) + p.tail_bound();
    FockDistribution::new(out, tail.min(1.0 - f64::EPSILON))
}

/// `gain_sq·(n̄ + 1)`.
pub fn measure_prepare_mean(nbar: f64, gain_sq: f64) -> f64 {
    gain_sq * (nbar + 1.0)
}
