//! Two interchangeable evolution engines for the diagonal semigroup.
//!
//! * Dense exponential: the tridiagonal generator `Q` is shifted to the
//!   non-negative matrix `P = I + Q/q` so that
//!   `exp(tQ) = e^{-qt} exp(qt P)` can be formed by scaling and squaring a
//!   Taylor series whose terms are all non-negative. No cancellation occurs,
//!   so small probabilities keep full relative accuracy.
//! * Adaptive Runge–Kutta: Dormand–Prince 5(4) on `dp/dt = Q p`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::generator::{apply_rates, generator_matrix};
use super::LindbladSpec;
use crate::error::{MoeError, Result};
use crate::fock::{FockDistribution, MAX_TAIL_BOUND};
use crate::ode::DormandPrince;

/// Largest cutoff accepted by the dense exponential.
pub const DENSE_MAX_DIM: usize = 512;

/// Default per-step ℓ¹ tolerance of the adaptive engine.
pub const DEFAULT_RK_TOLERANCE: f64 = 1e-12;

/// Pre-clamp negatives below this magnitude abort the evolution.
pub const NEGATIVE_ABORT: f64 = 1e-12;

const TAYLOR_ORDER: usize = 20;

const MASS_SURPLUS_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Engine {
    DenseExponential,
    AdaptiveRk { tolerance: f64 },
}

impl Default for Engine {
    fn default() -> Self {
        Engine::AdaptiveRk {
            tolerance: DEFAULT_RK_TOLERANCE,
        }
    }
}

impl Engine {
    /// Conservative total-variation error of one evolution, used for entropy
    /// error budgets.
    pub fn tv_error_estimate(&self) -> f64 {
        match *self {
            Engine::DenseExponential => 1e-12,
            Engine::AdaptiveRk { tolerance } => 100.0 * tolerance,
        }
    }
}

/// `Φ_t(p)` with the default engine.
pub fn evolve(spec: &LindbladSpec, p: &FockDistribution) -> Result<FockDistribution> {
    evolve_with(spec, p, Engine::default())
}

pub fn evolve_with(
    spec: &LindbladSpec,
    p: &FockDistribution,
    engine: Engine,
) -> Result<FockDistribution> {
    let raw = evolve_raw(spec, p, engine)?;
    finalize(raw, p)
}

/// Like [`evolve_with`] but returns the output even when its tail bound
/// exceeds the accepted budget.
pub fn evolve_unchecked(
    spec: &LindbladSpec,
    p: &FockDistribution,
    engine: Engine,
) -> Result<FockDistribution> {
    let raw = evolve_raw(spec, p, engine)?;
    finalize_with_limit(raw, p, f64::INFINITY)
}

fn evolve_raw(spec: &LindbladSpec, p: &FockDistribution, engine: Engine) -> Result<Vec<f64>> {
    p.ensure_tail_within(MAX_TAIL_BOUND)?;
    if spec.is_identity() {
        return Ok(p.probs().to_vec());
    }
    match engine {
        Engine::DenseExponential => {
            let m = transition_matrix(spec, p.dim())?;
            Ok((m * DVector::from_column_slice(p.probs())).data.into())
        }
        Engine::AdaptiveRk { tolerance } => {
            let (gp, gm) = (spec.gamma_plus, spec.gamma_minus);
            let (y, _) = DormandPrince::with_tolerance(tolerance).integrate(
                |x, dx| apply_rates(gp, gm, x, dx),
                p.probs(),
                spec.t,
                spec.max_rate(p.dim()),
            )?;
            Ok(y)
        }
    }
}

fn finalize(raw: Vec<f64>, input: &FockDistribution) -> Result<FockDistribution> {
    finalize_with_limit(raw, input, MAX_TAIL_BOUND)
}

/// Clamps integrator noise, then books the mass that left the window as
/// tail. The true output dominates the truncated one entrywise and the
/// difference carries exactly the input tail plus the leaked mass.
fn finalize_with_limit(
    mut raw: Vec<f64>,
    input: &FockDistribution,
    limit: f64,
) -> Result<FockDistribution> {
    for (index, v) in raw.iter_mut().enumerate() {
        if !v.is_finite() || *v < -NEGATIVE_ABORT {
            return Err(MoeError::NegativeProbability { index, value: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    // The semigroup never creates mass; a surplus is integrator error and is
    // scaled away when small.
    let sum: f64 = raw.iter().sum();
    let surplus = sum - input.mass();
    if surplus > MASS_SURPLUS_LIMIT {
        return Err(MoeError::Integrator(format!("output gained mass {surplus:e}")));
    }
    if surplus > 0.0 {
        let scale = input.mass() / sum;
        raw.iter_mut().for_each(|v| *v *= scale);
    }
    let leaked = (input.mass() - raw.iter().sum::<f64>()).max(0.0);
    let tail = input.tail_bound() + leaked;
    if tail > limit {
        return Err(MoeError::Truncation {
            tail_bound: tail,
            limit,
            dim: raw.len(),
        });
    }
    FockDistribution::new(raw, tail.min(1.0 - f64::EPSILON))
}

/// `exp(t Q)` for the truncated generator, column-substochastic.
pub fn transition_matrix(spec: &LindbladSpec, dim: usize) -> Result<DMatrix<f64>> {
    if dim > DENSE_MAX_DIM {
        return Err(MoeError::DimensionLimit {
            what: "dense exponential",
            dim,
            limit: DENSE_MAX_DIM,
        });
    }
    let q = spec.max_rate(dim);
    if spec.is_identity() || q == 0.0 {
        return Ok(DMatrix::identity(dim, dim));
    }
    let x = q * spec.t;
    let squarings = if x <= 1.0 { 0 } else { x.log2().ceil() as u32 };
    let h = x / 2f64.powi(squarings as i32);

    // h P with P = I + Q/q, stored as its three diagonals.
    let gen = generator_matrix(spec.gamma_plus, spec.gamma_minus, dim);
    let scale = h / q;
    let diag: Vec<f64> = (0..dim).map(|n| h + scale * gen[(n, n)]).collect();
    let sub: Vec<f64> = (0..dim.saturating_sub(1)).map(|n| scale * gen[(n + 1, n)]).collect();
    let sup: Vec<f64> = (0..dim.saturating_sub(1)).map(|n| scale * gen[(n, n + 1)]).collect();

    // Horner: T = I + (hP/k) T, k = K..1.
    let mut taylor = DMatrix::<f64>::identity(dim, dim);
    let mut next = DMatrix::<f64>::zeros(dim, dim);
    for k in (1..=TAYLOR_ORDER).rev() {
        let inv_k = 1.0 / k as f64;
        for col in 0..dim {
            for row in 0..dim {
                let mut acc = diag[row] * taylor[(row, col)];
                if row > 0 {
                    acc += sub[row - 1] * taylor[(row - 1, col)];
                }
                if row + 1 < dim {
                    acc += sup[row] * taylor[(row + 1, col)];
                }
                next[(row, col)] = acc * inv_k + if row == col { 1.0 } else { 0.0 };
            }
        }
        std::mem::swap(&mut taylor, &mut next);
    }
    let mut m = taylor * (-h).exp();
    for _ in 0..squarings {
        m = &m * &m;
    }
    Ok(m)
}

/// Cached transition matrix for repeated evolutions under one channel.
#[derive(Debug, Clone)]
pub struct Propagator {
    spec: LindbladSpec,
    matrix: DMatrix<f64>,
}

impl Propagator {
    pub fn new(spec: &LindbladSpec, dim: usize) -> Result<Self> {
        Ok(Propagator {
            spec: *spec,
            matrix: transition_matrix(spec, dim)?,
        })
    }

    pub fn spec(&self) -> &LindbladSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, p: &FockDistribution) -> Result<FockDistribution> {
        if p.dim() != self.dim() {
            return Err(MoeError::InvalidDistribution(format!(
                "propagator built for dim {}, got {}",
                self.dim(),
                p.dim()
            )));
        }
        p.ensure_tail_within(MAX_TAIL_BOUND)?;
        finalize(self.apply_raw(p.probs()), p)
    }

    /// `M x` on an arbitrary vector.
    pub fn apply_raw(&self, x: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(x)).data.into()
    }

    /// `Mᵀ x`, the adjoint action used for gradients.
    pub fn apply_adjoint(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.tr_mul(&DVector::from_column_slice(x)).data.into()
    }
}
