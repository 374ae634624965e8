//! Stationary points of the entropy production rate at fixed input entropy.
//!
//! For a passive state with ratios `z_n = p_{n+1}/p_n`, the Lagrange
//! conditions reduce to the recursion
//!
//! ```text
//! (n+2)[f(z_{n+1}) - f(z_n)] = n[g(z_n) - g(z_{n-1})] + Δ(z_n)     (n ≥ 1)
//!     2[f(z_1)     - f(z_0)] = Δ(z_0)
//! ```
//!
//! with `f(x) = γ₋x + γ₊ ln x`, `g(x) = γ₋ ln x - γ₊/x` and
//! `Δ(x) = γ₊ + γ₋ - γ₊/x - γ₋x + (γ₋ - γ₊ - μ) ln x`.
//!
//! Everything is iterated in `u = ln z`: decreasing solutions with `γ₊ > 0`
//! collapse doubly exponentially and leave the range of `z` within a handful
//! of steps, while `u` stays representable much longer.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::LindbladSpec;
use crate::error::{MoeError, Result};
use crate::fock::{
    entropy_of, g_inverse, g_raw, EntropyValue, FockDistribution, PassiveDistribution,
};

/// Seeds with `|h(z0) - (γ₋ - γ₊ - μ)|` below this are constant.
pub const CONSTANT_SEED_TOLERANCE: f64 = 1e-12;

/// `u = ln z` below this counts as collapsed to zero.
pub const COLLAPSE_LOG_RATIO: f64 = -700.0;

/// Target accuracy of the entropy constraint for scanned points.
pub const ENTROPY_MATCH_TOLERANCE: f64 = 1e-8;

/// Largest final ratio accepted for a surviving decreasing sequence.
pub const SURVIVOR_FINAL_RATIO: f64 = 1e-3;

/// The recursion's function family for fixed rates and multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionFunctions {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub mu: f64,
}

impl RecursionFunctions {
    pub fn new(gamma_plus: f64, gamma_minus: f64, mu: f64) -> Result<Self> {
        for (name, v) in [("gamma_plus", gamma_plus), ("gamma_minus", gamma_minus)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(MoeError::param(name, v, "must be finite and non-negative"));
            }
        }
        if !mu.is_finite() {
            return Err(MoeError::param("mu", mu, "must be finite"));
        }
        if gamma_plus == 0.0 && gamma_minus == 0.0 {
            return Err(MoeError::param("gamma_minus", 0.0, "both rates vanish"));
        }
        Ok(RecursionFunctions {
            gamma_plus,
            gamma_minus,
            mu,
        })
    }

    /// `γ₋ - γ₊ - μ`, the value of `h` at a constant solution.
    pub fn balance_target(&self) -> f64 {
        self.gamma_minus - self.gamma_plus - self.mu
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        Ok(self.f_log(checked_log(x)?))
    }

    pub fn g(&self, x: f64) -> Result<f64> {
        Ok(self.g_log(checked_log(x)?))
    }

    pub fn h(&self, x: f64) -> Result<f64> {
        Ok(self.h_log(checked_log(x)?))
    }

    pub fn delta(&self, x: f64) -> Result<f64> {
        Ok(self.delta_log(checked_log(x)?))
    }

    fn f_log(&self, u: f64) -> f64 {
        self.gamma_minus * u.exp() + self.gamma_plus * u
    }

    fn g_log(&self, u: f64) -> f64 {
        self.gamma_minus * u - self.gamma_plus * (-u).exp()
    }

    /// `(γ₋ expm1(u) + γ₊ expm1(-u))/u`, continuous through `u = 0`.
    fn h_log(&self, u: f64) -> f64 {
        if u == 0.0 {
            return self.gamma_minus - self.gamma_plus;
        }
        (self.gamma_minus * u.exp_m1() + self.gamma_plus * (-u).exp_m1()) / u
    }

    /// `u·(c - h(u))`, algebraically equal to `Δ`. Written this way the sign
    /// of `Δ` is exactly the sign that [`classify_seed`] reports.
    fn delta_log(&self, u: f64) -> f64 {
        u * (self.balance_target() - self.h_log(u))
    }

    /// `g(e^{u1}) - g(e^{u0})` without cancellation.
    fn g_difference(&self, u0: f64, u1: f64) -> f64 {
        let du = u1 - u0;
        self.gamma_minus * du - self.gamma_plus * (-u0).exp() * (-du).exp_m1()
    }

    /// `f(e^{u+d}) - f(e^u)`.
    fn f_difference(&self, u: f64, d: f64) -> f64 {
        self.gamma_minus * u.exp() * d.exp_m1() + self.gamma_plus * d
    }
}

fn checked_log(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(MoeError::param("x", x, "must be positive"));
    }
    Ok(x.ln())
}

pub fn f_func(x: f64, gamma_plus: f64, gamma_minus: f64) -> Result<f64> {
    RecursionFunctions::new(gamma_plus, gamma_minus, 0.0)?.f(x)
}

pub fn g_func(x: f64, gamma_plus: f64, gamma_minus: f64) -> Result<f64> {
    RecursionFunctions::new(gamma_plus, gamma_minus, 0.0)?.g(x)
}

pub fn h_func(x: f64, gamma_plus: f64, gamma_minus: f64) -> Result<f64> {
    RecursionFunctions::new(gamma_plus, gamma_minus, 0.0)?.h(x)
}

pub fn delta_func(x: f64, gamma_plus: f64, gamma_minus: f64, mu: f64) -> Result<f64> {
    RecursionFunctions::new(gamma_plus, gamma_minus, mu)?.delta(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeedClass {
    Increasing,
    Decreasing,
    Constant,
}

/// Direction of the sequence started at `z0`, read off `h(z0)` against
/// `γ₋ - γ₊ - μ`.
pub fn classify_seed(z0: f64, mu: f64, gamma_plus: f64, gamma_minus: f64) -> Result<SeedClass> {
    let fns = RecursionFunctions::new(gamma_plus, gamma_minus, mu)?;
    Ok(classify_log_seed(&fns, checked_log(z0)?))
}

fn classify_log_seed(fns: &RecursionFunctions, u0: f64) -> SeedClass {
    let gap = fns.h_log(u0) - fns.balance_target();
    if gap.abs() <= CONSTANT_SEED_TOLERANCE {
        SeedClass::Constant
    } else if gap > 0.0 {
        SeedClass::Increasing
    } else {
        SeedClass::Decreasing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InvalidReason {
    /// The next ratio would exceed 1.
    ExceedsOne,
    /// The next ratio would be zero or negative (only possible for `γ₊ = 0`).
    BelowZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// All `n_max` ratios computed.
    Completed,
    /// Ratio `step` could not be produced.
    Invalid { step: usize, reason: InvalidReason },
    /// Ratio `step` fell below `e^{-700}`; every later ratio is smaller
    /// still, so the distribution beyond is zero to double precision.
    Collapsed { step: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    Constant,
    StrictlyIncreasing,
    StrictlyDecreasing,
    /// Neither; never produced by the recursion itself.
    Mixed,
}

/// Classification in the combined form: any invalid step dominates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Constant,
    StrictlyIncreasing,
    StrictlyDecreasing,
    Invalid { step: usize, reason: InvalidReason },
}

/// Ratios `z_n = p_{n+1}/p_n` stored as `ln z_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSequence {
    log_z: Vec<f64>,
    mu: f64,
    n_max: usize,
    termination: Termination,
    monotonicity: Monotonicity,
}

impl RatioSequence {
    /// Wraps explicit ratios in `(0, 1]`.
    pub fn from_ratios(z: &[f64], mu: f64) -> Result<Self> {
        if z.is_empty() {
            return Err(MoeError::InvalidDistribution("empty ratio sequence".into()));
        }
        let log_z = z
            .iter()
            .map(|&x| {
                if x > 0.0 && x <= 1.0 {
                    Ok(x.ln())
                } else {
                    Err(MoeError::param("z", x, "ratios must lie in (0, 1]"))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let monotonicity = empirical_monotonicity(&log_z, None);
        Ok(RatioSequence {
            n_max: log_z.len(),
            log_z,
            mu,
            termination: Termination::Completed,
            monotonicity,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn log_z(&self) -> &[f64] {
        &self.log_z
    }

    /// Computed ratios; shorter than `n_max` after an invalid step or a
    /// collapse.
    pub fn z(&self) -> Vec<f64> {
        self.log_z.iter().map(|u| u.exp()).collect()
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn classification(&self) -> Classification {
        match (self.termination, self.monotonicity) {
            (Termination::Invalid { step, reason }, _) => Classification::Invalid { step, reason },
            (_, Monotonicity::Constant) => Classification::Constant,
            (_, Monotonicity::StrictlyIncreasing) => Classification::StrictlyIncreasing,
            (_, Monotonicity::StrictlyDecreasing) => Classification::StrictlyDecreasing,
            (_, Monotonicity::Mixed) => Classification::Invalid {
                step: 0,
                reason: InvalidReason::ExceedsOne,
            },
        }
    }

    /// Decreasing and either collapsed or ending below
    /// [`SURVIVOR_FINAL_RATIO`].
    pub fn survives(&self) -> bool {
        self.monotonicity == Monotonicity::StrictlyDecreasing
            && match self.termination {
                Termination::Collapsed { .. } => true,
                Termination::Completed => {
                    self.log_z.len() == self.n_max
                        && self.log_z.last().is_some_and(|&u| u < SURVIVOR_FINAL_RATIO.ln())
                }
                Termination::Invalid { .. } => false,
            }
    }
}

/// Pairwise comparison of consecutive log-ratios. `pending` is the direction
/// of a step that could not be taken, used when fewer than two ratios exist.
fn empirical_monotonicity(log_z: &[f64], pending: Option<InvalidReason>) -> Monotonicity {
    if log_z.len() < 2 {
        return match pending {
            Some(InvalidReason::ExceedsOne) => Monotonicity::StrictlyIncreasing,
            Some(InvalidReason::BelowZero) => Monotonicity::StrictlyDecreasing,
            None => Monotonicity::Constant,
        };
    }
    let (mut up, mut down, mut flat) = (true, true, true);
    for w in log_z.windows(2) {
        up &= w[1] > w[0];
        down &= w[1] < w[0];
        flat &= (w[1] - w[0]).abs() <= CONSTANT_SEED_TOLERANCE * (1.0 + w[0].abs());
    }
    match (up, down, flat) {
        (_, _, true) => Monotonicity::Constant,
        (true, _, _) => Monotonicity::StrictlyIncreasing,
        (_, true, _) => Monotonicity::StrictlyDecreasing,
        _ => Monotonicity::Mixed,
    }
}

/// Solves `f(e^{u+d}) - f(e^u) = target` for `d`, or reports which end of
/// `(0, 1]` the solution would leave.
fn invert_f_step(
    fns: &RecursionFunctions,
    u: f64,
    target: f64,
) -> std::result::Result<f64, InvalidReason> {
    let (gp, gm) = (fns.gamma_plus, fns.gamma_minus);
    let d_max = -u;
    if fns.f_difference(u, d_max) < target {
        return Err(InvalidReason::ExceedsOne);
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let a = gm * u.exp();
    if gp == 0.0 {
        let r = target / a;
        return if r <= -1.0 {
            Err(InvalidReason::BelowZero)
        } else {
            Ok(r.ln_1p())
        };
    }
    if a == 0.0 {
        return Ok(target / gp);
    }

    // φ(d) = a·expm1(d) + γ₊d is increasing and convex.
    let (mut lo, mut hi) = if target > 0.0 {
        (0.0, (target / gp).min((target / a).ln_1p()).min(d_max))
    } else {
        let mut lo = target / gp;
        if target > -a {
            lo = lo.max((target / a).ln_1p());
        }
        (lo, 0.0)
    };
    let phi = |d: f64| fns.f_difference(u, d) - target;
    let mut d = if target > 0.0 { hi } else { lo };
    for _ in 0..200 {
        let r = phi(d);
        if r == 0.0 {
            return Ok(d);
        }
        if r > 0.0 {
            hi = d;
        } else {
            lo = d;
        }
        let slope = a * d.exp() + gp;
        let newton = d - r / slope;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - d).abs() <= 4.0 * f64::EPSILON * d.abs().max(f64::MIN_POSITIVE)
            || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs())
        {
            return Ok(next);
        }
        d = next;
    }
    Ok(d)
}

/// Runs the recursion from `z0` for up to `n_max` ratios
/// (`z_0 … z_{n_max-1}`).
pub fn iterate_recursion(
    z0: f64,
    mu: f64,
    gamma_plus: f64,
    gamma_minus: f64,
    n_max: usize,
) -> Result<RatioSequence> {
    if !(z0 > 0.0 && z0 <= 1.0) {
        return Err(MoeError::param("z0", z0, "must lie in (0, 1]"));
    }
    if n_max < 2 {
        return Err(MoeError::param("n_max", n_max as f64, "must be at least 2"));
    }
    let fns = RecursionFunctions::new(gamma_plus, gamma_minus, mu)?;
    Ok(iterate_log(&fns, z0.ln(), n_max))
}

fn iterate_log(fns: &RecursionFunctions, u0: f64, n_max: usize) -> RatioSequence {
    if classify_log_seed(fns, u0) == SeedClass::Constant {
        return RatioSequence {
            log_z: vec![u0; n_max],
            mu: fns.mu,
            n_max,
            termination: Termination::Completed,
            monotonicity: Monotonicity::Constant,
        };
    }
    let mut log_z = Vec::with_capacity(n_max.min(4096));
    log_z.push(u0);
    let mut termination = Termination::Completed;
    let mut pending = None;
    for n in 0..n_max - 1 {
        let u = log_z[n];
        let rhs = if n == 0 {
            fns.delta_log(u)
        } else {
            n as f64 * fns.g_difference(log_z[n - 1], u) + fns.delta_log(u)
        };
        let target = rhs / (n + 2) as f64;
        match invert_f_step(fns, u, target) {
            Ok(d) => {
                let next = u + d;
                if !(next >= COLLAPSE_LOG_RATIO) {
                    termination = Termination::Collapsed { step: n + 1 };
                    break;
                }
                log_z.push(next.min(0.0));
            }
            Err(reason) => {
                termination = Termination::Invalid { step: n + 1, reason };
                pending = Some(reason);
                break;
            }
        }
    }
    let mut monotonicity = empirical_monotonicity(&log_z, pending);
    if let Termination::Collapsed { .. } = termination {
        if log_z.len() < 2 {
            monotonicity = Monotonicity::StrictlyDecreasing;
        }
    }
    RatioSequence {
        log_z,
        mu: fns.mu,
        n_max,
        termination,
        monotonicity,
    }
}

/// Rebuilds `p` from its ratios: `ln p_{n+1} = ln p_n + ln z_n`.
///
/// The mass beyond the window is estimated as the geometric continuation
/// `p_{dim-1}·z/(1-z)` with the last ratio `z`, an upper bound for
/// non-increasing ratios; it enters the normalization and the tail bound.
pub fn distribution_from_ratios(seq: &RatioSequence, dim: usize) -> Result<PassiveDistribution> {
    if let Termination::Invalid { step, reason } = seq.termination {
        return Err(MoeError::Unnormalizable(format!(
            "sequence invalid at step {step} ({reason:?})"
        )));
    }
    match seq.monotonicity {
        Monotonicity::StrictlyIncreasing | Monotonicity::Mixed => {
            return Err(MoeError::Unnormalizable(
                "ratios are not non-increasing; the sequence approaches 1".into(),
            ));
        }
        Monotonicity::Constant | Monotonicity::StrictlyDecreasing => {}
    }
    if dim == 0 || dim > seq.n_max + 1 {
        return Err(MoeError::param(
            "dim",
            dim as f64,
            format!("must lie in 1..={}", seq.n_max + 1),
        ));
    }
    let mut log_p = Vec::with_capacity(dim);
    log_p.push(0.0);
    for n in 1..dim {
        match seq.log_z.get(n - 1) {
            Some(&u) => log_p.push(log_p[n - 1] + u),
            None => log_p.push(f64::NEG_INFINITY),
        }
    }
    let computed = seq.log_z.len();
    let last_ratio = if computed >= dim {
        Some(seq.log_z[dim - 1])
    } else if seq.termination == Termination::Completed {
        seq.log_z.last().copied()
    } else {
        None
    };
    if let Some(u) = last_ratio {
        if u >= 0.0 {
            return Err(MoeError::Unnormalizable("final ratio is 1".into()));
        }
    }
    let weights: Vec<f64> = log_p.iter().map(|l| l.exp()).collect();
    let window: f64 = weights.iter().sum();
    let tail_weight = match last_ratio {
        Some(u) => weights[dim - 1] * u.exp() / -u.exp_m1(),
        None => 0.0,
    };
    let total = window + tail_weight;
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let tail = (tail_weight / total).min(0.5);
    PassiveDistribution::new(FockDistribution::new(probs, tail)?)
}

/// Per-step residual of the differenced recursion,
/// `(n+2)[f(z_{n+1}) - f(z_n)] - n[g(z_n) - g(z_{n-1})] - Δ(z_n)`.
pub fn master_residual(seq: &RatioSequence, gamma_plus: f64, gamma_minus: f64) -> Result<Vec<f64>> {
    let fns = RecursionFunctions::new(gamma_plus, gamma_minus, seq.mu)?;
    let u = &seq.log_z;
    Ok((0..u.len().saturating_sub(1))
        .map(|n| {
            let lhs = (n + 2) as f64 * fns.f_difference(u[n], u[n + 1] - u[n]);
            let memory = if n == 0 { 0.0 } else { n as f64 * fns.g_difference(u[n - 1], u[n]) };
            lhs - memory - fns.delta_log(u[n])
        })
        .collect())
}

/// Largest relative residual of the undifferenced stationarity conditions
/// `∂L/∂p_n = 0`, with the normalization multiplier `λ` fixed by `n = 0`.
///
/// Each residual is divided by `max(1, Σ|terms|)` because the individual
/// terms of a super-exponential solution grow like `1/z_n`. Only indices
/// with `p_{n-1}, p_n, p_{n+1} > 0` are checked.
pub fn stationarity_residual(
    p: &FockDistribution,
    gamma_plus: f64,
    gamma_minus: f64,
    mu: f64,
) -> Result<f64> {
    let probs = p.probs();
    if probs.len() < 2 || probs[0] <= 0.0 || probs[1] <= 0.0 {
        return Err(MoeError::InvalidDistribution(
            "stationarity needs p_0, p_1 > 0".into(),
        ));
    }
    let (gp, gm) = (gamma_plus, gamma_minus);
    let log_ratio = |n: usize| probs[n + 1].ln() - probs[n].ln();
    let terms = |n: usize| -> [f64; 8] {
        let nf = n as f64;
        let un = log_ratio(n);
        let (inv_prev, log_prev) = if n == 0 {
            (0.0, 0.0)
        } else {
            let up = log_ratio(n - 1);
            ((-up).exp(), up)
        };
        [
            -gp * nf * inv_prev,
            gp * (nf + 1.0),
            gm * nf,
            -gm * (nf + 1.0) * un.exp(),
            -gp * (nf + 1.0) * un,
            gm * nf * log_prev,
            -mu * (1.0 + probs[n].ln()),
            0.0,
        ]
    };
    let lambda = -terms(0).iter().sum::<f64>();
    let mut worst: f64 = 0.0;
    for n in 0..probs.len() - 1 {
        if probs[n] <= 0.0 || probs[n + 1] <= 0.0 || (n > 0 && probs[n - 1] <= 0.0) {
            continue;
        }
        let mut t = terms(n);
        t[7] = lambda;
        let sum: f64 = t.iter().sum();
        let scale: f64 = t.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        worst = worst.max(sum.abs() / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Geometric,
    SuperExponential,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub mu: f64,
    pub branch: Branch,
    pub entropy: EntropyValue,
    /// Leading ratios of the solution (at most 50).
    pub ratios: Vec<f64>,
    pub distribution: PassiveDistribution,
    pub stationarity_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanConfig {
    pub mu_points: usize,
    pub z0_points: usize,
    pub n_max: usize,
    /// Upper bound on recursion runs, refinement included.
    pub max_runs: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            mu_points: 400,
            z0_points: 400,
            n_max: 2000,
            max_runs: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStatus {
    /// Every grid cell was examined.
    Complete,
    /// The run budget ran out; missing points may exist.
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalScan {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub s0: EntropyValue,
    pub dim: usize,
    pub config: ScanConfig,
    pub status: ScanStatus,
    pub runs: usize,
    /// Grid cells whose decreasing sequence survived, over all `μ`.
    pub surviving_decreasing: usize,
    pub points: Vec<CriticalPoint>,
}

impl CriticalScan {
    pub fn geometric(&self) -> Option<&CriticalPoint> {
        self.points.iter().find(|p| p.branch == Branch::Geometric)
    }

    pub fn super_exponential(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().filter(|p| p.branch == Branch::SuperExponential)
    }
}

/// Thermal critical point: `z = n̄/(n̄+1)` with `n̄ = g⁻¹(S0)` and
/// `μ = γ₋ - γ₊ - h(z)`.
pub fn geometric_point(
    gamma_plus: f64,
    gamma_minus: f64,
    s0: EntropyValue,
    dim: usize,
) -> Result<CriticalPoint> {
    if s0.nats() <= 0.0 {
        return Err(MoeError::param("S0", s0.nats(), "must be positive"));
    }
    let nbar = g_inverse(s0);
    let u = -(1.0 / nbar).ln_1p();
    let probe = RecursionFunctions::new(gamma_plus, gamma_minus, 0.0)?;
    let mu = probe.balance_target() - probe.h_log(u);
    let seq = RatioSequence {
        log_z: vec![u; dim.max(2)],
        mu,
        n_max: dim.max(2),
        termination: Termination::Completed,
        monotonicity: Monotonicity::Constant,
    };
    build_point(&seq, Branch::Geometric, gamma_plus, gamma_minus, dim)
}

fn build_point(
    seq: &RatioSequence,
    branch: Branch,
    gamma_plus: f64,
    gamma_minus: f64,
    dim: usize,
) -> Result<CriticalPoint> {
    let distribution = distribution_from_ratios(seq, dim.min(seq.n_max + 1))?;
    let distribution = if distribution.dim() < dim {
        PassiveDistribution::new(distribution.padded(dim))?
    } else {
        distribution
    };
    let residual = stationarity_residual(&distribution, gamma_plus, gamma_minus, seq.mu)?;
    Ok(CriticalPoint {
        mu: seq.mu,
        branch,
        entropy: EntropyValue::new(entropy_of(distribution.probs()))?,
        ratios: seq.z().into_iter().take(50).collect(),
        distribution,
        stationarity_residual: residual,
    })
}

/// Grid of multipliers around `center`: log-spaced offsets `±10^k`,
/// `k ∈ [-4, 1]`, plus a uniform grid on `center ± 5`.
pub fn mu_grid(center: f64, points: usize) -> Vec<f64> {
    let linear = points / 4;
    let log_side = (points - linear) / 2;
    let mut grid = Vec::with_capacity(points);
    for i in 0..log_side {
        let k = -4.0 + 5.0 * i as f64 / (log_side.max(2) - 1) as f64;
        grid.push(center - 10f64.powf(k));
        grid.push(center + 10f64.powf(k));
    }
    for i in 0..linear {
        grid.push(center - 5.0 + 10.0 * i as f64 / (linear.max(2) - 1) as f64);
    }
    while grid.len() < points {
        grid.push(center);
    }
    grid.sort_by(|a, b| a.total_cmp(b));
    grid
}

/// Seeds in `(10⁻⁶, 1 - 10⁻⁶)`: half log-spaced up to 0.1, half linear.
pub fn z0_grid(points: usize) -> Vec<f64> {
    let log_part = points / 2;
    let lin_part = points - log_part;
    let mut grid = Vec::with_capacity(points);
    for i in 0..log_part {
        let k = -6.0 + 5.0 * i as f64 / log_part as f64;
        grid.push(10f64.powf(k));
    }
    for i in 0..lin_part {
        grid.push(0.1 + (1.0 - 1e-6 - 0.1) * i as f64 / (lin_part.max(2) - 1) as f64);
    }
    grid
}

/// Entropy of the distribution rebuilt from a surviving sequence, or `None`
/// when the sequence does not qualify.
fn survivor_entropy(seq: &RatioSequence, dim: usize) -> Option<f64> {
    if !seq.survives() {
        return None;
    }
    let p = distribution_from_ratios(seq, dim.min(seq.n_max + 1)).ok()?;
    let tail = p.tail_bound();
    if tail > 0.0 && crate::fock::tail_entropy_budget(tail, dim) > 1e-12 {
        return None;
    }
    Some(entropy_of(p.probs()))
}

/// Geometric point plus every surviving decreasing solution with entropy
/// `S0` found on the `(μ, z0)` grid.
///
/// For each `μ`, the entropy of decreasing survivors is tracked along the
/// `z0` grid and each crossing of `S0` is refined by bisection in `z0`.
/// Every crossing is reported; points are not merged.
pub fn find_critical_points(
    gamma_plus: f64,
    gamma_minus: f64,
    s0: EntropyValue,
    dim: usize,
    config: &ScanConfig,
) -> Result<CriticalScan> {
    let geometric = geometric_point(gamma_plus, gamma_minus, s0, dim)?;
    let mus = mu_grid(geometric.mu, config.mu_points);
    let seeds = z0_grid(config.z0_points);
    let target = s0.nats();
    let per_mu_budget = (config.max_runs / mus.len().max(1)).max(1);

    let results: Vec<(usize, usize, bool, Vec<CriticalPoint>)> = mus
        .par_iter()
        .map(|&mu| {
            let mut runs = 0usize;
            let mut survivors = 0usize;
            let mut exhausted = false;
            let mut found = Vec::new();
            let Ok(fns) = RecursionFunctions::new(gamma_plus, gamma_minus, mu) else {
                return (0, 0, false, found);
            };
            let entropy_at = |z0: f64, runs: &mut usize| -> (RatioSequence, Option<f64>) {
                *runs += 1;
                let seq = iterate_log(&fns, z0.ln(), config.n_max);
                let s = survivor_entropy(&seq, dim);
                (seq, s)
            };
            let mut prev: Option<(f64, f64)> = None;
            for &z0 in &seeds {
                if runs >= per_mu_budget {
                    exhausted = true;
                    break;
                }
                if classify_log_seed(&fns, z0.ln()) != SeedClass::Decreasing {
                    prev = None;
                    continue;
                }
                let (_, s) = entropy_at(z0, &mut runs);
                let Some(s) = s else {
                    prev = None;
                    continue;
                };
                survivors += 1;
                if let Some((z_prev, s_prev)) = prev {
                    if (s_prev - target) * (s - target) <= 0.0 {
                        let (mut lo, mut hi) = (z_prev, z0);
                        let (mut s_lo, _) = (s_prev, s);
                        let mut best = None;
                        for _ in 0..200 {
                            if runs >= per_mu_budget {
                                exhausted = true;
                                break;
                            }
                            let mid = 0.5 * (lo + hi);
                            let (seq, sm) = entropy_at(mid, &mut runs);
                            let Some(sm) = sm else { break };
                            if (sm - target).abs() <= ENTROPY_MATCH_TOLERANCE {
                                best = Some(seq);
                                break;
                            }
                            if (s_lo - target) * (sm - target) <= 0.0 {
                                hi = mid;
                            } else {
                                lo = mid;
                                s_lo = sm;
                            }
                            if hi - lo <= f64::EPSILON * hi {
                                break;
                            }
                        }
                        if let Some(seq) = best {
                            if let Ok(point) = build_point(
                                &seq,
                                Branch::SuperExponential,
                                gamma_plus,
                                gamma_minus,
                                dim,
                            ) {
                                found.push(point);
                            }
                        }
                    }
                }
                prev = Some((z0, s));
            }
            (runs, survivors, exhausted, found)
        })
        .collect();

    let mut points = vec![geometric];
    let mut runs = 0;
    let mut survivors = 0;
    let mut exhausted = false;
    for (r, s, e, found) in results {
        runs += r;
        survivors += s;
        exhausted |= e;
        points.extend(found);
    }
    Ok(CriticalScan {
        gamma_plus,
        gamma_minus,
        s0,
        dim,
        config: *config,
        status: if exhausted {
            ScanStatus::BudgetExhausted
        } else {
            ScanStatus::Complete
        },
        runs,
        surviving_decreasing: survivors,
        points,
    })
}

/// Entropy production rate `S'(0)` of a critical distribution, summed over
/// its positive entries. Entries that underflowed to zero after a collapse
/// carry weight below `e^{-700}` and are dropped.
pub fn critical_rate(spec: &LindbladSpec, p: &FockDistribution) -> f64 {
    crate::channel::rate_over_positive(spec, p.probs())
}

/// Thermal entropy `g(n̄)` of the geometric point, for reference.
pub fn geometric_entropy(z: f64) -> f64 {
    g_raw(z / (1.0 - z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{g, thermal_distribution};
    use proptest::prelude::*;

    #[test]
    fn function_values() {
        assert_eq!(f_func(1.0, 0.7, 1.3).unwrap(), 1.3);
        assert_eq!(delta_func(1.0, 0.7, 1.3, 0.4).unwrap(), 0.0);
        assert_eq!(h_func(1.0, 0.7, 1.3).unwrap(), 1.3 - 0.7);
        assert!(h_func(0.3, 1.5, 0.5).unwrap() < h_func(0.7, 1.5, 0.5).unwrap());
        assert!(f_func(0.0, 1.0, 1.0).is_err());
        // Direct formulas away from x = 1.
        let (gp, gm, mu, x) = (0.6, 1.1, 0.25, 0.37f64);
        let delta = gp + gm - gp / x - gm * x + (gm - gp - mu) * x.ln();
        assert!((delta_func(x, gp, gm, mu).unwrap() - delta).abs() < 1e-14);
        let h = (gm * x + gp / x - (gp + gm)) / x.ln();
        assert!((h_func(x, gp, gm).unwrap() - h).abs() < 1e-14);
        assert!((g_func(x, gp, gm).unwrap() - (gm * x.ln() - gp / x)).abs() < 1e-14);
    }

    #[test]
    fn h_is_continuous_at_one() {
        let at_one = h_func(1.0, 0.4, 1.7).unwrap();
        let near = h_func(1.0 - 1e-9, 0.4, 1.7).unwrap();
        assert!((at_one - near).abs() < 1e-8);
    }

    #[test]
    fn constant_seed_gives_constant_sequence() {
        let (gp, gm, mu) = (0.5, 1.5, 0.3);
        // Solve h(z0) = γ₋ - γ₊ - μ by bisection on the increasing h.
        let c = gm - gp - mu;
        let (mut lo, mut hi) = (1e-9, 1.0 - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h_func(mid, gp, gm).unwrap() < c {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let z0 = 0.5 * (lo + hi);
        assert_eq!(classify_seed(z0, mu, gp, gm).unwrap(), SeedClass::Constant);
        let seq = iterate_recursion(z0, mu, gp, gm, 100).unwrap();
        assert_eq!(seq.classification(), Classification::Constant);
        assert!(seq.z().iter().all(|z| (z - z0).abs() <= 1e-12));
    }

    #[test]
    fn pure_loss_matches_linear_recursion() {
        // γ₊ = 0: z_{n+1} = z_n + [n ln(z_n/z_{n-1}) + Δ(z_n)/γ₋]/(n+2).
        let (gm, mu) = (1.0, 0.1);
        let seq = iterate_recursion(0.4, mu, 0.0, gm, 30).unwrap();
        let mut z = vec![0.4f64];
        for n in 0..29 {
            let d = delta_func(z[n], 0.0, gm, mu).unwrap();
            let mem = if n == 0 { 0.0 } else { n as f64 * (z[n] / z[n - 1]).ln() };
            let next = z[n] + (mem + d) / (gm * (n + 2) as f64);
            if next <= 0.0 || next > 1.0 {
                break;
            }
            z.push(next);
        }
        let got = seq.z();
        assert_eq!(got.len(), z.len());
        for (a, b) in got.iter().zip(&z) {
            assert!((a - b).abs() < 1e-12 * b.max(1e-300) + 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn decreasing_seed_collapses_under_excitation() {
        let (gp, gm) = (1.5, 0.5);
        let mu = 0.0;
        let z0 = 0.2;
        assert_eq!(classify_seed(z0, mu, gp, gm).unwrap(), SeedClass::Decreasing);
        let seq = iterate_recursion(z0, mu, gp, gm, 2000).unwrap();
        assert_eq!(seq.monotonicity(), Monotonicity::StrictlyDecreasing);
        assert!(matches!(seq.termination(), Termination::Collapsed { .. }));
        assert!(seq.survives());
    }

    #[test]
    fn increasing_seed_is_rejected() {
        let seq = iterate_recursion(0.9, 3.0, 0.5, 1.0, 2000).unwrap();
        assert_eq!(classify_seed(0.9, 3.0, 0.5, 1.0).unwrap(), SeedClass::Increasing);
        assert_eq!(seq.monotonicity(), Monotonicity::StrictlyIncreasing);
        assert!(distribution_from_ratios(&seq, 10).is_err());
    }

    #[test]
    fn ratios_to_distribution() {
        let seq = RatioSequence::from_ratios(&[0.5; 300], 0.0).unwrap();
        let p = distribution_from_ratios(&seq, 200).unwrap();
        let th = thermal_distribution(1.0, 200).unwrap();
        for (a, b) in p.probs().iter().zip(th.probs()) {
            assert!((a - b).abs() <= 1e-15);
        }

        let seq = RatioSequence::from_ratios(&[0.5, 1.0 / 3.0, 0.25], 0.0).unwrap();
        let p = distribution_from_ratios(&seq, 3).unwrap();
        let q = p.probs();
        assert!((q[1] / q[0] - 0.5).abs() < 1e-15);
        assert!((q[2] / q[0] - 1.0 / 6.0).abs() < 1e-15);

        let flat = RatioSequence::from_ratios(&[1.0; 5], 0.0).unwrap();
        assert!(distribution_from_ratios(&flat, 4).is_err());
    }

    #[test]
    fn geometric_residual_is_tiny() {
        for (gp, gm) in [(0.0, 1.0), (1.0, 0.0), (0.7, 1.9)] {
            let point = geometric_point(gp, gm, g(1.0).unwrap(), 400).unwrap();
            let seq = RatioSequence::from_ratios(&vec![0.5; 2000], point.mu).unwrap();
            let res = master_residual(&seq, gp, gm).unwrap();
            assert!(res.iter().all(|r| r.abs() < 1e-10));
            assert!(point.stationarity_residual < 1e-10);
        }
    }

    #[test]
    fn geometric_multipliers() {
        let loss = geometric_point(0.0, 1.0, g(1.0).unwrap(), 200).unwrap();
        assert!((loss.mu - (1.0 - 0.5 / std::f64::consts::LN_2)).abs() < 1e-12);
        let amp = geometric_point(1.0, 0.0, g(1.0).unwrap(), 200).unwrap();
        assert!((amp.mu - (1.0 / std::f64::consts::LN_2 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn grids_have_requested_size() {
        assert_eq!(mu_grid(0.3, 400).len(), 400);
        let z = z0_grid(400);
        assert_eq!(z.len(), 400);
        assert!(z.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    proptest! {
        #[test]
        fn seed_class_matches_sequence(
            z0 in 0.01f64..0.99,
            mu in -3.0f64..3.0,
            gp in 0.0f64..2.0,
            gm in 0.05f64..2.0,
        ) {
            let seq = iterate_recursion(z0, mu, gp, gm, 200).unwrap();
            let expected = match classify_seed(z0, mu, gp, gm).unwrap() {
                SeedClass::Increasing => Monotonicity::StrictlyIncreasing,
                SeedClass::Decreasing => Monotonicity::StrictlyDecreasing,
                SeedClass::Constant => Monotonicity::Constant,
            };
            prop_assert_eq!(seq.monotonicity(), expected);
        }
    }
}
