//! Reference implementations written independently of the library code.

#![allow(dead_code)]

/// `(L p)_n` for the birth–death generator with rates `γ₊(n+1)` up and
/// `γ₋ n` down; the top level loses its upward flux.
pub fn generator(gp: f64, gm: f64, p: &[f64]) -> Vec<f64> {
    generator_from(gp, gm, p, 0)
}

/// [`generator`] on a slice whose first entry is photon number `offset`;
/// entries next to the slice ends miss their outside neighbours.
pub fn generator_from(gp: f64, gm: f64, p: &[f64], offset: usize) -> Vec<f64> {
    let d = p.len();
    let mut out = vec![0.0; d];
    for n in 0..d {
        let nf = (n + offset) as f64;
        let mut v = -(gp * (nf + 1.0) + gm * nf) * p[n];
        if n >= 1 {
            v += gp * nf * p[n - 1];
        }
        if n + 1 < d {
            v += gm * (nf + 1.0) * p[n + 1];
        }
        out[n] = v;
    }
    out
}

/// Central-difference step small enough that no entry above `1e-30` moves
/// by more than 1% of itself, so `-x ln x` is probed where it is smooth.
pub fn fd_step(gp: f64, gm: f64, p: &[f64]) -> f64 {
    let lp = generator(gp, gm, p);
    p.iter()
        .zip(&lp)
        .filter(|(&x, &d)| x > 1e-30 && d != 0.0)
        .map(|(&x, &d)| 1e-2 * x / d.abs())
        .fold(1e-5, f64::min)
        .max(1e-10)
}

/// `Σ_k (hL)^k p / k!`, truncated once terms stop mattering.
pub fn taylor_evolve(gp: f64, gm: f64, p: &[f64], h: f64) -> Vec<f64> {
    let mut sum = p.to_vec();
    let mut term = p.to_vec();
    for k in 1..60 {
        let next = generator(gp, gm, &term);
        term = next.into_iter().map(|x| x * h / k as f64).collect();
        let size: f64 = term.iter().map(|x| x.abs()).sum();
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
        if size < 1e-300 {
            break;
        }
    }
    sum
}

pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..n).map(|i| (at(p, i) - at(q, i)).abs()).sum::<f64>()
}

/// `n̄ⁿ / (n̄+1)^{n+1}` on `0..dim`, not renormalized.
pub fn thermal(nbar: f64, dim: usize) -> Vec<f64> {
    let r = nbar / (nbar + 1.0);
    (0..dim).map(|n| r.powi(n as i32) / (nbar + 1.0)).collect()
}

/// Binomial thinning `Σ_n p_n C(n,m) ηᵐ (1-η)^{n-m}`, in logs.
pub fn binomial_loss(p: &[f64], eta: f64) -> Vec<f64> {
    let d = p.len();
    let mut ln_fact = vec![0.0; d + 1];
    for k in 1..=d {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let (le, lr) = (eta.ln(), (1.0 - eta).ln());
    let mut out = vec![0.0; d];
    for (n, &pn) in p.iter().enumerate() {
        if pn == 0.0 {
            continue;
        }
        for (m, slot) in out.iter_mut().enumerate().take(n + 1) {
            let lc = ln_fact[n] - ln_fact[m] - ln_fact[n - m];
            let keep = if m == 0 { 0.0 } else { m as f64 * le };
            let lose = if n == m { 0.0 } else { (n - m) as f64 * lr };
            *slot += pn * (lc + keep + lose).exp();
        }
    }
    out
}

/// `(n̄+1) ln(n̄+1) - n̄ ln n̄`.
pub fn g_ref(nbar: f64) -> f64 {
    if nbar == 0.0 {
        return 0.0;
    }
    (nbar + 1.0) * (nbar + 1.0).ln() - nbar * nbar.ln()
}
