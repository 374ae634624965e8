//! Full density-matrix oracle for the Lindblad master equation.
//!
//! `dρ/dt = γ₊(a†ρa - ½{aa†, ρ}) + γ₋(aρa† - ½{a†a, ρ})`, entrywise
//!
//! ```text
//! dρ_mn = γ₊[√(mn) ρ_{m-1,n-1} - ½(m+n+2) ρ_mn]
//!       + γ₋[√((m+1)(n+1)) ρ_{m+1,n+1} - ½(m+n) ρ_mn]
//! ```
//!
//! integrated with the embedded Runge–Kutta pair on the real and imaginary
//! parts. The input is embedded in a larger working cutoff so the trace
//! leaked through the top level stays negligible.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

use crate::channel::LindbladSpec;
use crate::error::{MoeError, Result};
use crate::fock::FockDistribution;
use crate::ode::DormandPrince;

/// Largest input cutoff accepted by [`dense_evolve`].
pub const DENSE_INPUT_MAX_DIM: usize = 32;

/// Largest working cutoff after padding.
pub const DENSE_WORKING_MAX_DIM: usize = 128;

/// Largest cutoff accepted by the passive-reduction check.
pub const PASSIVE_REDUCTION_MAX_DIM: usize = 24;

/// Trace allowed to leak through the working cutoff.
pub const DENSE_LEAK_TARGET: f64 = 1e-13;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const TRACE_TOLERANCE: f64 = 1e-12;
const EIGEN_TOLERANCE: f64 = 1e-10;
const DENSE_RK_TOLERANCE: f64 = 1e-13;

/// Unit-trace Hermitian positive matrix, with trace deficit `tail_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    matrix: DMatrix<Complex64>,
    tail_bound: f64,
}

impl DenseState {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        DenseState::with_tail(matrix, 0.0)
    }

    fn with_tail(matrix: DMatrix<Complex64>, tail_bound: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(MoeError::InvalidDistribution("density matrix must be square".into()));
        }
        let dim = matrix.nrows();
        for m in 0..dim {
            for n in 0..=m {
                let skew = (matrix[(m, n)] - matrix[(n, m)].conj()).norm();
                if !(skew <= HERMITIAN_TOLERANCE) {
                    return Err(MoeError::InvalidDistribution(format!(
                        "not Hermitian at ({m}, {n}): {skew:e}"
                    )));
                }
            }
        }
        let trace: f64 = (0..dim).map(|i| matrix[(i, i)].re).sum();
        if (trace + tail_bound - 1.0).abs() > TRACE_TOLERANCE || trace > 1.0 + TRACE_TOLERANCE {
            return Err(MoeError::InvalidDistribution(format!(
                "trace {trace} with tail {tail_bound:e}"
            )));
        }
        let state = DenseState { matrix, tail_bound };
        let low = state.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if low < -EIGEN_TOLERANCE {
            return Err(MoeError::InvalidDistribution(format!("negative eigenvalue {low:e}")));
        }
        Ok(state)
    }

    pub fn from_diagonal(p: &FockDistribution) -> Result<Self> {
        let d = p.dim();
        let mut m = DMatrix::zeros(d, d);
        for (i, &x) in p.probs().iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        DenseState::with_tail(m, p.tail_bound())
    }

    /// `U diag(spectrum) U†`.
    pub fn from_spectrum(spectrum: &[f64], unitary: &DMatrix<Complex64>) -> Result<Self> {
        let d = spectrum.len();
        if unitary.nrows() != d || unitary.ncols() != d {
            return Err(MoeError::InvalidDistribution("unitary size mismatch".into()));
        }
        let mut scaled = unitary.clone();
        for (j, &l) in spectrum.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        let rho = &scaled * unitary.adjoint();
        DenseState::new(hermitian_part(&rho))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Largest modulus of an off-diagonal entry.
    pub fn off_diagonal_norm(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for m in 0..d {
            for n in 0..d {
                if m != n {
                    worst = worst.max(self.matrix[(m, n)].norm());
                }
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
    }

    /// `-tr ρ ln ρ`; eigenvalues at or below zero contribute nothing.
    pub fn von_neumann_entropy(&self) -> f64 {
        crate::fock::entropy_of(&self.eigenvalues())
    }

    /// `U ρ U†`.
    pub fn conjugated(&self, unitary: &DMatrix<Complex64>) -> Result<Self> {
        let rho = unitary * &self.matrix * unitary.adjoint();
        DenseState::with_tail(hermitian_part(&rho), self.tail_bound)
    }

    pub fn padded(&self, dim: usize) -> Self {
        let d = self.dim();
        if dim <= d {
            return self.clone();
        }
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (d, d)).copy_from(&self.matrix);
        DenseState {
            matrix: m,
            tail_bound: self.tail_bound,
        }
    }
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).scale(0.5)
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for x in q.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    q
}

/// Symmetric Dirichlet(1) spectrum, i.e. uniform on the simplex.
pub fn dirichlet_spectrum(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random state `U diag(λ) U†` with Dirichlet spectrum and Haar basis.
pub fn random_dense_state(dim: usize, seed: u64) -> Result<(DenseState, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectrum = dirichlet_spectrum(dim, &mut rng);
    let u = haar_unitary(dim, &mut rng);
    Ok((DenseState::from_spectrum(&spectrum, &u)?, spectrum))
}

/// Outcome of [`dense_evolve`].
#[derive(Debug, Clone, Serialize)]
pub struct DenseEvolution {
    #[serde(skip)]
    pub state: DenseState,
    pub working_dim: usize,
    /// Trace lost through the working cutoff.
    pub leaked: f64,
}

/// Evolves `rho` under the full master equation, doubling the working
/// cutoff from `2·dim` until the leaked trace is below
/// [`DENSE_LEAK_TARGET`].
pub fn dense_evolve(spec: &LindbladSpec, rho: &DenseState) -> Result<DenseEvolution> {
    if rho.dim() > DENSE_INPUT_MAX_DIM {
        return Err(MoeError::DimensionLimit {
            what: "dense oracle input",
            dim: rho.dim(),
            limit: DENSE_INPUT_MAX_DIM,
        });
    }
    let mut working = (2 * rho.dim()).max(8).min(DENSE_WORKING_MAX_DIM);
    loop {
        let out = dense_evolve_at(spec, &rho.padded(working))?;
        if out.leaked <= DENSE_LEAK_TARGET {
            return Ok(out);
        }
        if working >= DENSE_WORKING_MAX_DIM {
            return Err(MoeError::Truncation {
                tail_bound: out.leaked,
                limit: DENSE_LEAK_TARGET,
                dim: working,
            });
        }
        working = (2 * working).min(DENSE_WORKING_MAX_DIM);
    }
}

/// Evolution at the state's own cutoff; the top level leaks.
pub fn dense_evolve_at(spec: &LindbladSpec, rho: &DenseState) -> Result<DenseEvolution> {
    let d = rho.dim();
    if d > DENSE_WORKING_MAX_DIM {
        return Err(MoeError::DimensionLimit {
            what: "dense oracle",
            dim: d,
            limit: DENSE_WORKING_MAX_DIM,
        });
    }
    if spec.is_identity() {
        return Ok(DenseEvolution {
            state: rho.clone(),
            working_dim: d,
            leaked: 0.0,
        });
    }
    let (gp, gm) = (spec.gamma_plus, spec.gamma_minus);
    let sqrt: Vec<f64> = (0..=d).map(|k| (k as f64).sqrt()).collect();
    let idx = |m: usize, n: usize| 2 * (m * d + n);
    let mut y0 = vec![0.0; 2 * d * d];
    for m in 0..d {
        for n in 0..d {
            let z = rho.matrix[(m, n)];
            y0[idx(m, n)] = z.re;
            y0[idx(m, n) + 1] = z.im;
        }
    }
    let rhs = |y: &[f64], dy: &mut [f64]| {
        for m in 0..d {
            for n in 0..d {
                let k = idx(m, n);
                let decay = 0.5 * (gp * (m + n + 2) as f64 + gm * (m + n) as f64);
                let mut re = -decay * y[k];
                let mut im = -decay * y[k + 1];
                if m > 0 && n > 0 {
                    let c = gp * sqrt[m] * sqrt[n];
                    let j = idx(m - 1, n - 1);
                    re += c * y[j];
                    im += c * y[j + 1];
                }
                if m + 1 < d && n + 1 < d {
                    let c = gm * sqrt[m + 1] * sqrt[n + 1];
                    let j = idx(m + 1, n + 1);
                    re += c * y[j];
                    im += c * y[j + 1];
                }
                dy[k] = re;
                dy[k + 1] = im;
            }
        }
    };
    let (y, _) = DormandPrince::with_tolerance(DENSE_RK_TOLERANCE).integrate(
        rhs,
        &y0,
        spec.t,
        spec.max_rate(d) + gm,
    )?;
    let raw = DMatrix::from_fn(d, d, |m, n| Complex64::new(y[idx(m, n)], y[idx(m, n) + 1]));
    settle(hermitian_part(&raw), rho)
}

/// Trace bookkeeping shared by both dense propagators.
fn settle(mut matrix: DMatrix<Complex64>, rho: &DenseState) -> Result<DenseEvolution> {
    let d = matrix.nrows();
    let trace: f64 = (0..d).map(|i| matrix[(i, i)].re).sum();
    let input_trace = rho.trace();
    let leaked = (input_trace - trace).max(0.0);
    let tail = rho.tail_bound() + leaked;
    if trace > input_trace {
        // Integrator surplus; scale back to the input trace.
        matrix.scale_mut(input_trace / trace);
    }
    Ok(DenseEvolution {
        state: DenseState::with_tail(matrix, tail)?,
        working_dim: d,
        leaked,
    })
}

/// The master equation never mixes the diagonals `ρ_{n,n+k}` of different
/// `k`, so the channel is a family of real band propagators, one matrix
/// exponential each. Built once, it evolves any input of the given cutoff
/// at the cost of a few matrix-vector products.
#[derive(Debug, Clone)]
pub struct DenseChannel {
    spec: LindbladSpec,
    input_dim: usize,
    working_dim: usize,
    bands: Vec<DMatrix<f64>>,
}

impl DenseChannel {
    /// Picks the working cutoff, doubling from `2·input_dim`, at which the
    /// top input level leaks at most [`DENSE_LEAK_TARGET`]. The chain is
    /// stochastically monotone, so no input of this cutoff leaks more.
    pub fn new(spec: &LindbladSpec, input_dim: usize) -> Result<Self> {
        if input_dim == 0 || input_dim > DENSE_INPUT_MAX_DIM {
            return Err(MoeError::DimensionLimit {
                what: "dense oracle input",
                dim: input_dim,
                limit: DENSE_INPUT_MAX_DIM,
            });
        }
        let mut working = (2 * input_dim).max(8).min(DENSE_WORKING_MAX_DIM);
        loop {
            let band0 = band_propagator(spec, working, 0);
            let top = input_dim - 1;
            let leak = (1.0 - band0.column(top).sum()).max(0.0);
            if leak <= DENSE_LEAK_TARGET {
                let mut bands = vec![band0];
                bands.extend((1..input_dim).map(|k| band_propagator(spec, working, k)));
                return Ok(DenseChannel {
                    spec: *spec,
                    input_dim,
                    working_dim: working,
                    bands,
                });
            }
            if working >= DENSE_WORKING_MAX_DIM {
                return Err(MoeError::Truncation {
                    tail_bound: leak,
                    limit: DENSE_LEAK_TARGET,
                    dim: working,
                });
            }
            working = (2 * working).min(DENSE_WORKING_MAX_DIM);
        }
    }

    pub fn spec(&self) -> &LindbladSpec {
        &self.spec
    }

    pub fn working_dim(&self) -> usize {
        self.working_dim
    }

    pub fn apply(&self, rho: &DenseState) -> Result<DenseEvolution> {
        if rho.dim() != self.input_dim {
            return Err(MoeError::param(
                "dim",
                rho.dim() as f64,
                format!("channel was built for cutoff {}", self.input_dim),
            ));
        }
        let d = self.working_dim;
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for (k, band) in self.bands.iter().enumerate() {
            let len = self.input_dim - k;
            let input = band.columns(0, len);
            for row in 0..d - k {
                let mut acc = Complex64::new(0.0, 0.0);
                for n in 0..len {
                    acc += rho.matrix[(n, n + k)] * input[(row, n)];
                }
                out[(row, row + k)] = acc;
                out[(row + k, row)] = acc.conj();
            }
        }
        for i in 0..d {
            out[(i, i)].im = 0.0;
        }
        settle(out, rho)
    }
}

/// `exp(t A_k)` for the band `c_n = ρ_{n,n+k}`, `n < d - k`.
fn band_propagator(spec: &LindbladSpec, d: usize, k: usize) -> DMatrix<f64> {
    let (gp, gm) = (spec.gamma_plus, spec.gamma_minus);
    let len = d - k;
    let mut a = DMatrix::<f64>::zeros(len, len);
    for n in 0..len {
        let (nf, kf) = (n as f64, k as f64);
        a[(n, n)] = -0.5 * (gp * (2.0 * nf + kf + 2.0) + gm * (2.0 * nf + kf));
        if n > 0 {
            a[(n, n - 1)] = gp * (nf * (nf + kf)).sqrt();
        }
        if n + 1 < len {
            a[(n, n + 1)] = gm * ((nf + 1.0) * (nf + kf + 1.0)).sqrt();
        }
    }
    (a * spec.t).exp()
}
