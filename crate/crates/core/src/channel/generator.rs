use nalgebra::DMatrix;

use super::LindbladSpec;
use crate::fock::FockDistribution;

/// `dp/dt` of the birth–death process generated by the spec's rates.
///
/// Entry `n` is `γ₊[n p_{n-1} - (n+1) p_n] + γ₋[(n+1) p_{n+1} - n p_n]` with
/// `p_{-1} = p_dim = 0`. The upward flux out of the top level is dropped,
/// so the entries sum to `-γ₊ dim p_{dim-1}`.
pub fn generator_apply(spec: &LindbladSpec, p: &FockDistribution) -> Vec<f64> {
    let mut out = vec![0.0; p.dim()];
    apply_rates(spec.gamma_plus, spec.gamma_minus, p.probs(), &mut out);
    out
}

pub(crate) fn apply_rates(gamma_plus: f64, gamma_minus: f64, x: &[f64], out: &mut [f64]) {
    let d = x.len();
    for n in 0..d {
        let nf = n as f64;
        let below = if n > 0 { x[n - 1] } else { 0.0 };
        let above = if n + 1 < d { x[n + 1] } else { 0.0 };
        out[n] = gamma_plus * (nf * below - (nf + 1.0) * x[n])
            + gamma_minus * ((nf + 1.0) * above - nf * x[n]);
    }
}

/// Tridiagonal generator as a dense matrix (`dp/dt = Q p`).
pub(crate) fn generator_matrix(gamma_plus: f64, gamma_minus: f64, dim: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        let nf = n as f64;
        q[(n, n)] = -(gamma_plus * (nf + 1.0) + gamma_minus * nf);
        if n + 1 < dim {
            q[(n + 1, n)] = gamma_plus * (nf + 1.0);
        }
        if n > 0 {
            q[(n - 1, n)] = gamma_minus * nf;
        }
    }
    q
}
