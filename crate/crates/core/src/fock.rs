//! Photon-number distributions and the entropy toolkit.
//!
//! A [`FockDistribution`] is a truncated probability vector over photon
//! numbers `0..dim`. The mass that may live beyond the cutoff is carried
//! explicitly as `tail_bound`, so every entropy computed from a distribution
//! can be paired with an error budget.

use std::cmp::Ordering;
use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::Serialize;

use crate::error::{MoeError, Result};

/// Slack allowed on the normalization of a distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Largest tail bound accepted by evolution and entropy operations.
pub const MAX_TAIL_BOUND: f64 = 1e-9;

/// Entropy in nats.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct EntropyValue(f64);

impl EntropyValue {
    pub fn new(nats: f64) -> Result<Self> {
        if !nats.is_finite() || nats < 0.0 {
            return Err(MoeError::param("entropy", nats, "must be finite and non-negative"));
        }
        Ok(EntropyValue(nats))
    }

    pub fn nats(self) -> f64 {
        self.0
    }

    pub fn bits(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }
}

impl From<EntropyValue> for f64 {
    fn from(value: EntropyValue) -> f64 {
        value.0
    }
}

/// Truncated photon-number distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FockDistribution {
    probs: Vec<f64>,
    tail_bound: f64,
}

impl FockDistribution {
    /// Validates non-negativity and normalization against `tail_bound`.
    pub fn new(probs: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(MoeError::InvalidDistribution("empty probability vector".into()));
        }
        if !(tail_bound.is_finite() && (0.0..1.0).contains(&tail_bound)) {
            return Err(MoeError::InvalidDistribution(format!(
                "tail bound {tail_bound} outside [0, 1)"
            )));
        }
        for (n, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(MoeError::InvalidDistribution(format!(
                    "entry {n} = {p} is not a non-negative number"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if sum > 1.0 + NORMALIZATION_TOLERANCE || sum < 1.0 - tail_bound - NORMALIZATION_TOLERANCE {
            return Err(MoeError::InvalidDistribution(format!(
                "sum {sum} outside [{}, {}]",
                1.0 - tail_bound - NORMALIZATION_TOLERANCE,
                1.0 + NORMALIZATION_TOLERANCE
            )));
        }
        Ok(FockDistribution { probs, tail_bound })
    }

    /// Normalizes non-negative weights into a distribution with no tail.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(MoeError::InvalidDistribution(format!("weights sum to {sum}")));
        }
        FockDistribution::new(weights.iter().map(|w| w / sum).collect(), 0.0)
    }

    /// All mass on photon number `n`.
    pub fn fock_state(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(MoeError::InvalidDistribution(format!(
                "Fock level {n} outside cutoff {dim}"
            )));
        }
        let mut probs = vec![0.0; dim];
        probs[n] = 1.0;
        FockDistribution::new(probs, 0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// Copy embedded into a larger cutoff (zero padded).
    pub fn padded(&self, dim: usize) -> Self {
        let mut probs = self.probs.clone();
        if dim > probs.len() {
            probs.resize(dim, 0.0);
        }
        FockDistribution {
            probs,
            tail_bound: self.tail_bound,
        }
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub(crate) fn ensure_tail_within(&self, limit: f64) -> Result<()> {
        if self.tail_bound > limit {
            return Err(MoeError::Truncation {
                tail_bound: self.tail_bound,
                limit,
                dim: self.dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(probs: Vec<f64>, tail_bound: f64) -> Self {
        FockDistribution { probs, tail_bound }
    }
}

/// Support of a passive distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Support {
    /// Entries beyond `N` are exactly zero.
    Finite(usize),
    /// Every entry inside the cutoff is positive.
    InfiniteWithinTruncation,
}

/// Distribution with non-increasing entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassiveDistribution {
    #[serde(flatten)]
    inner: FockDistribution,
    support: Support,
}

impl PassiveDistribution {
    pub fn new(inner: FockDistribution) -> Result<Self> {
        let probs = inner.probs();
        if let Some(k) = probs.windows(2).position(|w| w[0] < w[1]) {
            return Err(MoeError::InvalidDistribution(format!(
                "not passive: p[{k}] = {} < p[{}] = {}",
                probs[k],
                k + 1,
                probs[k + 1]
            )));
        }
        let support = match probs.iter().rposition(|&p| p > 0.0) {
            Some(last) if last + 1 < probs.len() => Support::Finite(last),
            Some(_) => Support::InfiniteWithinTruncation,
            None => {
                return Err(MoeError::InvalidDistribution("no positive entry".into()));
            }
        };
        Ok(PassiveDistribution { inner, support })
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn as_fock(&self) -> &FockDistribution {
        &self.inner
    }

    pub fn into_fock(self) -> FockDistribution {
        self.inner
    }
}

impl Deref for PassiveDistribution {
    type Target = FockDistribution;

    fn deref(&self) -> &FockDistribution {
        &self.inner
    }
}

/// `-Σ p ln p` with `0 ln 0 = 0`, summed over the cutoff window.
pub fn shannon_entropy(p: &FockDistribution) -> Result<EntropyValue> {
    p.ensure_tail_within(MAX_TAIL_BOUND)?;
    EntropyValue::new(entropy_of(p.probs()))
}

/// Raw `-Σ x ln x` of a slice, no validation.
pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    let s: f64 = probs.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    s.max(0.0)
}

/// Entropy uncertainty caused by up to `tail` unit of mass beyond a cutoff of
/// `dim` levels, assuming the tail spreads over no more levels than the
/// window itself.
pub fn tail_entropy_budget(tail: f64, dim: usize) -> f64 {
    if tail <= 0.0 {
        return 0.0;
    }
    tail * (1.0 + (1.0 / tail).ln() + (dim.max(1) as f64).ln())
}

/// Half the ℓ¹ distance; the shorter vector is zero padded.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..n).map(|i| (at(p, i) - at(q, i)).abs()).sum::<f64>()
}

/// Thermal entropy `g(n) = (n+1) ln(n+1) - n ln n`.
pub fn g(nbar: f64) -> Result<EntropyValue> {
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(MoeError::param("nbar", nbar, "must be finite and non-negative"));
    }
    EntropyValue::new(g_raw(nbar))
}

pub(crate) fn g_raw(nbar: f64) -> f64 {
    if nbar == 0.0 {
        return 0.0;
    }
    // (n+1) ln(n+1) - n ln n = ln(1+n) + n ln(1 + 1/n)
    nbar.ln_1p() + nbar * (1.0 / nbar).ln_1p()
}

/// `g'(n) = ln(1 + 1/n)`.
pub(crate) fn g_prime(nbar: f64) -> f64 {
    (1.0 / nbar).ln_1p()
}

/// Mean photon number of the thermal state with entropy `s` (nats).
///
/// Safeguarded Newton iteration on the bracket `[0, max(1, e^s)]`, which
/// contains the root because `ln(n+1) <= g(n)`.
pub fn g_inverse(s: EntropyValue) -> f64 {
    let target = s.nats();
    if target == 0.0 {
        return 0.0;
    }
    let mut lo = 0.0_f64;
    let mut hi = target.exp().max(1.0).min(f64::MAX);
    let mut x = target.exp_m1().max(1e-300).min(hi);
    let tol = 1e-15 * target.max(1.0);
    for _ in 0..400 {
        let r = g_raw(x) - target;
        if r.abs() <= tol {
            return x;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - r / g_prime(x);
        x = if newton > lo && newton < hi {
            newton
        } else if lo > 0.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * hi
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    x
}

/// Geometric distribution `λ_n = n̄ⁿ/(1+n̄)ⁿ⁺¹` truncated at `dim`.
///
/// Fails with [`MoeError::Truncation`] when the discarded mass
/// `(n̄/(1+n̄))^dim` exceeds [`MAX_TAIL_BOUND`].
pub fn thermal_distribution(nbar: f64, dim: usize) -> Result<PassiveDistribution> {
    let dist = thermal_unchecked(nbar, dim)?;
    dist.ensure_tail_within(MAX_TAIL_BOUND)?;
    Ok(dist)
}

/// Same as [`thermal_distribution`] without the tail-budget check.
pub fn thermal_unchecked(nbar: f64, dim: usize) -> Result<PassiveDistribution> {
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(MoeError::param("nbar", nbar, "must be finite and non-negative"));
    }
    if dim == 0 {
        return Err(MoeError::param("dim", 0.0, "must be positive"));
    }
    let ratio = nbar / (1.0 + nbar);
    let p0 = 1.0 / (1.0 + nbar);
    let probs: Vec<f64> = (0..dim).map(|n| p0 * ratio.powi(n as i32)).collect();
    let tail = ratio.powi(dim as i32);
    PassiveDistribution::new(FockDistribution::new(probs, tail)?)
}

/// Smallest cutoff at which the thermal tail drops below `tail`.
pub fn thermal_cutoff(nbar: f64, tail: f64) -> usize {
    if nbar <= 0.0 {
        return 1;
    }
    let ratio = nbar / (1.0 + nbar);
    (tail.ln() / ratio.ln()).ceil().max(1.0) as usize
}

/// Sorts entries into non-increasing order; the spectrum is unchanged.
pub fn passive_rearrange(p: &FockDistribution) -> PassiveDistribution {
    let mut probs = p.probs().to_vec();
    probs.sort_by(|a, b| b.total_cmp(a));
    PassiveDistribution::new(FockDistribution::from_parts_unchecked(probs, p.tail_bound()))
        .expect("sorted valid distribution is passive")
}

/// Smallest admissible gap between `ln dim` and a requested sample entropy.
pub const SAMPLE_ENTROPY_MARGIN: f64 = 1e-6;

const SAMPLE_ENTROPY_TOLERANCE: f64 = 1e-11;

/// Random passive distribution with Shannon entropy `s0`.
///
/// A random strictly decreasing profile is drawn from one of several shape
/// families and then tempered as `p^β` (renormalized), with `β` found by
/// bisection. Every entry of the result is positive unless `s0 = 0`.
/// Identical arguments give identical output.
pub fn sample_passive_with_entropy(
    s0: EntropyValue,
    dim: usize,
    seed: u64,
) -> Result<PassiveDistribution> {
    sample_passive_on_support(s0, dim, dim, seed)
}

/// Like [`sample_passive_with_entropy`] with entries beyond `support` set to
/// zero, giving a state of finite support when `support < dim`.
pub fn sample_passive_on_support(
    s0: EntropyValue,
    dim: usize,
    support: usize,
    seed: u64,
) -> Result<PassiveDistribution> {
    if dim == 0 || support == 0 || support > dim {
        return Err(MoeError::param(
            "support",
            support as f64,
            format!("must lie in 1..={dim}"),
        ));
    }
    let target = s0.nats();
    if target == 0.0 {
        return PassiveDistribution::new(FockDistribution::fock_state(0, dim)?);
    }
    let max_entropy = (support as f64).ln();
    if target > max_entropy - SAMPLE_ENTROPY_MARGIN {
        return Err(MoeError::EntropyUnreachable {
            target,
            reason: format!("needs more than {support} levels (max {max_entropy})"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Retry on the same stream if underflow produced exact zeros.
    for _ in 0..16 {
        let log_weights = random_log_profile(&mut rng, support);
        let probs = temper_log_weights(&log_weights, target)?;
        if probs.iter().all(|&p| p > 0.0) {
            let mut full = probs;
            full.resize(dim, 0.0);
            return PassiveDistribution::new(FockDistribution::new(full, 0.0)?);
        }
    }
    Err(MoeError::EntropyUnreachable {
        target,
        reason: "tempered profile underflowed repeatedly".into(),
    })
}

/// Strictly decreasing log-weights with log-range at most 60 nats.
fn random_log_profile(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut logs: Vec<f64> = match rng.random_range(0..4u8) {
        // Sorted exponential variates.
        0 => (0..len).map(|_| Exp1.sample(rng)).map(|x: f64| x.ln()).collect(),
        // Sorted Gamma variates with random shape.
        1 => {
            let shape = 10f64.powf(rng.random_range(-1.0..0.5));
            let gamma = Gamma::new(shape, 1.0).expect("positive shape");
            (0..len)
                .map(|_| gamma.sample(rng).max(f64::MIN_POSITIVE).ln())
                .collect()
        }
        // Random walk of log-ratios.
        2 => {
            let scale = rng.random_range(0.05..1.0);
            let mut acc = 0.0;
            (0..len)
                .map(|_| {
                    let cur = acc;
                    acc -= scale * rng.random::<f64>();
                    cur
                })
                .collect()
        }
        // Near-flat plateau followed by geometric decay.
        _ => {
            let plateau = rng.random_range(1..=8usize);
            let decay = rng.random_range(0.05..3.0);
            (0..len)
                .map(|n| {
                    let jitter = 1e-3 * rng.random::<f64>();
                    if n < plateau {
                        -jitter
                    } else {
                        -decay * (n + 1 - plateau) as f64 - jitter
                    }
                })
                .collect()
        }
    };
    logs.sort_by(|a, b| b.total_cmp(a));
    // Break ties so the maximum is unique and the profile strictly decreasing.
    for n in 1..logs.len() {
        let cap = logs[n - 1] - 1e-9 * (1.0 + logs[n - 1].abs());
        if logs[n] > cap {
            logs[n] = cap;
        }
    }
    let range = logs[0] - logs[logs.len() - 1];
    if range > 60.0 {
        let shrink = 60.0 / range;
        let top = logs[0];
        for l in &mut logs {
            *l = top + (*l - top) * shrink;
        }
    }
    logs
}

fn tempered(log_weights: &[f64], beta: f64) -> Vec<f64> {
    let top = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|&l| (beta * (l - top)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Finds `β >= 0` with `H(normalize(exp(β·log_weights))) = target` by
/// bisection; entropy is non-increasing in `β`.
pub(crate) fn temper_log_weights(log_weights: &[f64], target: f64) -> Result<Vec<f64>> {
    let finite: Vec<f64> = log_weights.iter().copied().filter(|l| l.is_finite()).collect();
    let top = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let at_top = finite.iter().filter(|&&l| l == top).count();
    let h_max = (finite.len() as f64).ln();
    let h_min = (at_top as f64).ln();
    if !(target <= h_max + SAMPLE_ENTROPY_TOLERANCE && target >= h_min - SAMPLE_ENTROPY_TOLERANCE)
    {
        return Err(MoeError::EntropyUnreachable {
            target,
            reason: format!("tempering reaches only [{h_min}, {h_max}]"),
        });
    }
    let entropy_at = |beta: f64| entropy_of(&tempered(log_weights, beta));
    let mut lo = 0.0;
    let mut hi = 1.0;
    while entropy_at(hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(MoeError::EntropyUnreachable {
                target,
                reason: "tempering exponent diverged".into(),
            });
        }
    }
    let mut best = tempered(log_weights, hi);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let probs = tempered(log_weights, mid);
        let h = entropy_of(&probs);
        let done = (h - target).abs() <= SAMPLE_ENTROPY_TOLERANCE;
        match h.partial_cmp(&target) {
            Some(Ordering::Greater) => lo = mid,
            _ => hi = mid,
        }
        best = probs;
        if done || hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let h = entropy_of(&best);
    if (h - target).abs() > 1e-10 {
        return Err(MoeError::EntropyUnreachable {
            target,
            reason: format!("tempering converged to {h}"),
        });
    }
    Ok(best)
}

/// Re-projects positive weights onto the entropy surface `H = target` by
/// power tempering. Zero weights stay zero.
pub fn temper_to_entropy(weights: &[f64], target: EntropyValue) -> Result<Vec<f64>> {
    let logs: Vec<f64> = weights
        .iter()
        .map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY })
        .collect();
    temper_log_weights(&logs, target.nats())
}
