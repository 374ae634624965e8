//! Adversarial descent on output entropy over passive states of fixed
//! entropy.
//!
//! The objective is `F(p) = H(M p)` with `M` the cached transition matrix.
//! Its gradient is projected onto the tangent space of
//! `{Σp = 1, H(p) = S0}`, the state moves by a multiplicative step
//! `p ← p·exp(-α G)`, and the result is tempered back onto the entropy
//! surface and sorted into passive order. Steps that do not lower `F` are
//! halved.

use serde::Serialize;

use crate::channel::{LindbladSpec, Propagator};
use crate::error::{MoeError, Result};
use crate::fock::{
    entropy_of, g, g_inverse, passive_rearrange, sample_passive_on_support, temper_to_entropy,
    thermal_unchecked, EntropyValue, FockDistribution, PassiveDistribution, MAX_TAIL_BOUND,
};

pub const FD_STEP: f64 = 1e-7;

const MAX_HALVINGS: usize = 40;
const INITIAL_STEP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    FiniteDifference,
    Adjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchInit {
    Thermal,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchOptions {
    pub gradient: GradientMethod,
    pub init: SearchInit,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            gradient: GradientMethod::FiniteDifference,
            init: SearchInit::Random,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub state: PassiveDistribution,
    pub output_entropy: EntropyValue,
    /// `g(thermal output n̄)` for the thermal input of entropy `S0`.
    pub baseline: f64,
    pub iterations: usize,
    pub accepted_steps: usize,
}

impl SearchResult {
    pub fn gap(&self) -> f64 {
        self.output_entropy.nats() - self.baseline
    }
}

/// Random-start search with finite-difference gradients.
pub fn local_search_min_entropy(
    spec: &LindbladSpec,
    s0: EntropyValue,
    dim: usize,
    iterations: usize,
    seed: u64,
) -> Result<SearchResult> {
    local_search_with(spec, s0, dim, iterations, seed, &SearchOptions::default())
}

pub fn local_search_with(
    spec: &LindbladSpec,
    s0: EntropyValue,
    dim: usize,
    iterations: usize,
    seed: u64,
    options: &SearchOptions,
) -> Result<SearchResult> {
    if s0.nats() <= 0.0 {
        return Err(MoeError::param("S0", s0.nats(), "must be positive"));
    }
    let propagator = Propagator::new(spec, dim)?;
    let baseline = g(spec.thermal_output_nbar(g_inverse(s0))?)?.nats();
    let mut p: Vec<f64> = match options.init {
        SearchInit::Thermal => thermal_unchecked(g_inverse(s0), dim)?.probs().to_vec(),
        // Drawn on the lower quarter of the window so the start does not
        // already leak; the descent may spread it out again.
        SearchInit::Random => sample_passive_on_support(s0, dim, (dim / 4).max(2), seed)?
            .probs()
            .to_vec(),
    };
    let leak_limit = MAX_TAIL_BOUND;
    let initial_leak = leaked(&propagator, &p);
    if initial_leak > leak_limit {
        return Err(MoeError::Truncation {
            tail_bound: initial_leak,
            limit: leak_limit,
            dim,
        });
    }
    let mut value = objective(&propagator, &p);
    let mut step = INITIAL_STEP;
    let mut accepted = 0;
    let mut done = 0;
    for _ in 0..iterations {
        done += 1;
        let grad = match options.gradient {
            GradientMethod::FiniteDifference => fd_gradient(&propagator, &p),
            GradientMethod::Adjoint => adjoint_gradient(&propagator, &p),
        };
        let direction = project_tangent(&grad, &p);
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            break;
        }
        let mut improved = false;
        for _ in 0..MAX_HALVINGS {
            let trial = reproject(&p, &direction, step / norm, s0)?;
            let v = objective(&propagator, &trial);
            if v < value && leaked(&propagator, &trial) <= leak_limit {
                p = trial;
                value = v;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
        accepted += 1;
        step = (2.0 * step).min(INITIAL_STEP);
    }
    let state = PassiveDistribution::new(FockDistribution::new(p, 0.0)?)?;
    Ok(SearchResult {
        state,
        output_entropy: EntropyValue::new(value)?,
        baseline,
        iterations: done,
        accepted_steps: accepted,
    })
}

/// Mass pushed beyond the window, where the objective cannot see it.
fn leaked(propagator: &Propagator, p: &[f64]) -> f64 {
    (1.0 - propagator.apply_raw(p).iter().sum::<f64>()).max(0.0)
}

fn objective(propagator: &Propagator, p: &[f64]) -> f64 {
    entropy_of(&propagator.apply_raw(p))
}

/// `∂F/∂p_j = -Σ_i M_ij (1 + ln q_i)` with `q = M p`.
pub fn adjoint_gradient(propagator: &Propagator, p: &[f64]) -> Vec<f64> {
    let q = propagator.apply_raw(p);
    let weights: Vec<f64> = q
        .iter()
        .map(|&x| if x > 0.0 { -(1.0 + x.ln()) } else { 0.0 })
        .collect();
    propagator.apply_adjoint(&weights)
}

/// Central differences of `F` along each column of `M`.
pub fn fd_gradient(propagator: &Propagator, p: &[f64]) -> Vec<f64> {
    let q = propagator.apply_raw(p);
    let m = propagator.matrix();
    let mut shifted = q.clone();
    (0..p.len())
        .map(|j| {
            let col = m.column(j);
            for (s, (&x, &c)) in shifted.iter_mut().zip(q.iter().zip(col.iter())) {
                *s = x + FD_STEP * c;
            }
            let up = entropy_of(&shifted);
            for (s, (&x, &c)) in shifted.iter_mut().zip(q.iter().zip(col.iter())) {
                *s = x - FD_STEP * c;
            }
            let down = entropy_of(&shifted);
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Removes the components along `1` and `-(1 + ln p)` (Gram–Schmidt), on
/// the coordinates where `p > 0`.
fn project_tangent(grad: &[f64], p: &[f64]) -> Vec<f64> {
    let active: Vec<bool> = p.iter().map(|&x| x > 0.0).collect();
    let mut a: Vec<f64> = active.iter().map(|&on| if on { 1.0 } else { 0.0 }).collect();
    let mut b: Vec<f64> = p
        .iter()
        .map(|&x| if x > 0.0 { -(1.0 + x.ln()) } else { 0.0 })
        .collect();
    normalize(&mut a);
    let ab = dot(&a, &b);
    for (bi, ai) in b.iter_mut().zip(&a) {
        *bi -= ab * ai;
    }
    let b_ok = normalize(&mut b);
    let mut out: Vec<f64> = grad
        .iter()
        .zip(&active)
        .map(|(&v, &on)| if on { v } else { 0.0 })
        .collect();
    let ga = dot(&out, &a);
    for (o, ai) in out.iter_mut().zip(&a) {
        *o -= ga * ai;
    }
    if b_ok {
        let gb = dot(&out, &b);
        for (o, bi) in out.iter_mut().zip(&b) {
            *o -= gb * bi;
        }
    }
    out
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn normalize(x: &mut [f64]) -> bool {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
        true
    } else {
        false
    }
}

fn reproject(p: &[f64], direction: &[f64], alpha: f64, s0: EntropyValue) -> Result<Vec<f64>> {
    let moved: Vec<f64> = p
        .iter()
        .zip(direction)
        .map(|(&x, &d)| if x > 0.0 { x * (-alpha * d).exp() } else { 0.0 })
        .collect();
    let tempered = temper_to_entropy(&moved, s0)
        .map_err(|e| MoeError::Projection(format!("step {alpha:e}: {e}")))?;
    let sorted = passive_rearrange(&FockDistribution::new(tempered, 0.0)?);
    Ok(sorted.into_fock().into_probs())
}
