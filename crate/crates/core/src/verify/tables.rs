//! Short-time divergence and step-composition tables.

use serde::Serialize;

use crate::channel::{evolve_with, Engine, LindbladSpec, Propagator};
use crate::error::{MoeError, Result};
use crate::fock::{
    entropy_of, g, g_inverse, thermal_unchecked, total_variation, EntropyValue, FockDistribution,
};

/// `10⁻², 10⁻³, …, 10⁻⁸`.
pub fn default_dt_grid() -> Vec<f64> {
    (2..=8).map(|k| 10f64.powi(-k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub dt: f64,
    /// `S(Φ_dt(p)) - S(p)`.
    pub increment: f64,
    pub quotient: f64,
    /// `increment / (-γ₊(N+1) p_N dt ln dt)`; absent when `γ₊ = 0`.
    pub leading_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceTable {
    pub spec: LindbladSpec,
    pub support_n: usize,
    pub dim: usize,
    pub rows: Vec<DivergenceRow>,
    /// Quotient strictly increasing as `dt` decreases along the grid.
    pub strictly_increasing: bool,
}

/// Entropy difference quotients for the uniform state on `{0, …, N}`.
///
/// With `γ₊ > 0` the level `N+1` is fed at rate `γ₊(N+1)p_N`, so the
/// increment carries a `-dt ln dt` term and the quotient grows without
/// bound; with `γ₊ = 0` it tends to the finite rate.
pub fn check_finite_support_divergence(
    spec: &LindbladSpec,
    support_n: usize,
    dim: usize,
    dt_grid: &[f64],
) -> Result<DivergenceTable> {
    if support_n + 2 >= dim {
        return Err(MoeError::param(
            "support_n",
            support_n as f64,
            format!("must be below dim - 2 = {}", dim as f64 - 2.0),
        ));
    }
    if dt_grid.iter().any(|&dt| !(dt.is_finite() && dt > 0.0)) {
        return Err(MoeError::param("dt", f64::NAN, "grid entries must be positive"));
    }
    let mut probs = vec![0.0; dim];
    let p_n = 1.0 / (support_n + 1) as f64;
    probs[..=support_n].fill(p_n);
    let p = FockDistribution::new(probs, 0.0)?;
    let s_in = entropy_of(p.probs());
    let feed = spec.gamma_plus * (support_n + 1) as f64 * p_n;

    let mut rows = Vec::with_capacity(dt_grid.len());
    for &dt in dt_grid {
        let out = evolve_with(&spec.with_time(dt)?, &p, Engine::DenseExponential)?;
        let increment = entropy_of(out.probs()) - s_in;
        rows.push(DivergenceRow {
            dt,
            increment,
            quotient: increment / dt,
            leading_ratio: (feed > 0.0).then(|| increment / (-feed * dt * dt.ln())),
        });
    }
    let strictly_increasing = rows.windows(2).all(|w| w[1].quotient > w[0].quotient);
    Ok(DivergenceTable {
        spec: *spec,
        support_n,
        dim,
        rows,
        strictly_increasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretizationRow {
    pub step: usize,
    pub t: f64,
    pub nbar: f64,
    pub nbar_closed_form: f64,
    pub entropy: f64,
    pub entropy_closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretizationTable {
    pub spec: LindbladSpec,
    pub s0: EntropyValue,
    pub steps: usize,
    pub dim: usize,
    pub rows: Vec<DiscretizationRow>,
    /// TV between `steps` single-step evolutions and one evolution over `t`.
    pub composition_tv: f64,
    pub max_nbar_error: f64,
    pub max_entropy_error: f64,
}

/// Splits `[0, t]` into `steps` equal pieces and follows the thermal input of
/// entropy `S0` through the chain, against the closed-form thermal outputs.
pub fn check_discretization(
    spec: &LindbladSpec,
    s0: EntropyValue,
    steps: usize,
    dim: usize,
) -> Result<DiscretizationTable> {
    if steps == 0 {
        return Err(MoeError::param("steps", 0.0, "need at least one step"));
    }
    let nbar0 = g_inverse(s0);
    let dt = spec.t / steps as f64;
    let single = Propagator::new(&spec.with_time(dt)?, dim)?;
    let mut p = thermal_unchecked(nbar0, dim)?.into_fock();
    p.ensure_tail_within(crate::fock::MAX_TAIL_BOUND)?;
    let input = p.clone();

    let mut rows = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        if k > 0 {
            p = single.apply(&p)?;
        }
        let t = k as f64 * dt;
        let closed = spec.with_time(t)?.thermal_output_nbar(nbar0)?;
        rows.push(DiscretizationRow {
            step: k,
            t,
            nbar: p.mean_photon_number(),
            nbar_closed_form: closed,
            entropy: entropy_of(p.probs()),
            entropy_closed_form: g(closed)?.nats(),
        });
    }
    let direct = evolve_with(spec, &input, Engine::DenseExponential)?;
    let max_nbar_error = rows
        .iter()
        .map(|r| (r.nbar - r.nbar_closed_form).abs())
        .fold(0.0, f64::max);
    let max_entropy_error = rows
        .iter()
        .map(|r| (r.entropy - r.entropy_closed_form).abs())
        .fold(0.0, f64::max);
    Ok(DiscretizationTable {
        spec: *spec,
        s0,
        steps,
        dim,
        composition_tv: total_variation(p.probs(), direct.probs()),
        rows,
        max_nbar_error,
        max_entropy_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelKind;

    #[test]
    fn delta_zero_quotient_diverges() {
        let spec = LindbladSpec::new(1.0, 0.0, 1.0).unwrap();
        let table = check_finite_support_divergence(&spec, 0, 16, &default_dt_grid()).unwrap();
        assert!(table.strictly_increasing);
        let last = table.rows.last().unwrap();
        assert!((last.leading_ratio.unwrap() - 1.0).abs() < 0.1);
        // -dt ln dt + dt over -dt ln dt.
        let expected = 1.0 + 1.0 / -(1e-8f64).ln();
        assert!((last.leading_ratio.unwrap() - expected).abs() < 1e-4);
    }

    #[test]
    fn pure_loss_quotient_converges() {
        let spec = LindbladSpec::new(0.0, 1.0, 1.0).unwrap();
        let table = check_finite_support_divergence(&spec, 3, 16, &default_dt_grid()).unwrap();
        let q: Vec<f64> = table.rows.iter().map(|r| r.quotient).collect();
        let limit = crate::channel::rate_over_positive(&spec, &[0.25, 0.25, 0.25, 0.25]);
        assert!((q[q.len() - 1] - limit).abs() < 1e-6 * limit.abs().max(1.0));
        assert!(table.rows[0].leading_ratio.is_none());
    }

    #[test]
    fn rejects_support_too_close_to_cutoff() {
        let spec = LindbladSpec::new(1.0, 0.0, 1.0).unwrap();
        assert!(check_finite_support_divergence(&spec, 14, 16, &[1e-3]).is_err());
    }

    #[test]
    fn loss_chain_follows_exponential_decay() {
        let spec = ChannelKind::Loss { eta: 0.5, noise: 0.0 }.lindblad().unwrap();
        let table = check_discretization(&spec, g(1.0).unwrap(), 10, 128).unwrap();
        let dt = spec.t / 10.0;
        for row in &table.rows {
            let expected = (-(row.step as f64) * dt).exp();
            assert!((row.nbar - expected).abs() < 1e-9, "{row:?}");
        }
        assert!(table.composition_tv < 1e-9);
        assert!(table.max_entropy_error < 1e-8);
    }

    #[test]
    fn single_step_is_the_semigroup_identity() {
        let spec = ChannelKind::Amplifier { kappa: 2.0, noise: 0.5 }.lindblad().unwrap();
        let table = check_discretization(&spec, g(0.5).unwrap(), 1, 256).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.composition_tv < 1e-12);
    }

    #[test]
    fn twenty_step_composition() {
        let spec = ChannelKind::Additive { noise: 0.3 }.lindblad().unwrap();
        let table = check_discretization(&spec, g(1.0).unwrap(), 20, 256).unwrap();
        assert!(table.composition_tv < 1e-9);
        assert!(table.max_nbar_error < 1e-8);
    }
}
