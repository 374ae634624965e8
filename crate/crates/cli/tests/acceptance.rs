//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Reference values come from the small oracles below,
//! written without the library.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use moe_core::contravariant::{
    decompose, min_output_entropy_contravariant, recompose, ContravariantParams,
};
use moe_core::critical::{
    classify_seed, find_critical_points, iterate_recursion, Branch, ScanConfig, SeedClass,
    Termination, InvalidReason,
};
use moe_core::fock::{sample_passive_on_support, sample_passive_with_entropy};
use moe_core::verify::tables::{check_finite_support_divergence, default_dt_grid};
use moe_core::verify::{
    check_diagonal_restriction, check_passive_reduction, verify_contravariant,
    verify_conjecture_finite_with, verify_conjecture_infinitesimal_with, ReportStatus,
    VerificationReport, VerifyOptions,
};
use moe_core::{
    entropy_derivative_at_zero, evolve, evolve_with, g, thermal_distribution, ChannelKind,
    Engine, EntropyRate, FockDistribution, LindbladSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:.1?}, limit {limit:?}"))
}

mod oracle {
    pub fn g(nbar: f64) -> f64 {
        if nbar == 0.0 {
            return 0.0;
        }
        (nbar + 1.0) * (nbar + 1.0).ln() - nbar * nbar.ln()
    }

    pub fn thermal(nbar: f64, dim: usize) -> Vec<f64> {
        let r = nbar / (nbar + 1.0);
        (0..dim).map(|n| r.powi(n as i32) / (nbar + 1.0)).collect()
    }

    pub fn entropy(p: &[f64]) -> f64 {
        -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
    }

    pub fn tv(p: &[f64], q: &[f64]) -> f64 {
        let n = p.len().max(q.len());
        let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        0.5 * (0..n).map(|i| (at(p, i) - at(q, i)).abs()).sum::<f64>()
    }

    fn generator(gp: f64, gm: f64, p: &[f64]) -> Vec<f64> {
        let d = p.len();
        (0..d)
            .map(|n| {
                let nf = n as f64;
                let mut v = -(gp * (nf + 1.0) + gm * nf) * p[n];
                if n >= 1 {
                    v += gp * nf * p[n - 1];
                }
                if n + 1 < d {
                    v += gm * (nf + 1.0) * p[n + 1];
                }
                v
            })
            .collect()
    }

    /// Central-difference step for `S(exp(hL) p)`: small enough that no
    /// entry above `1e-30` moves by more than 1% of itself.
    pub fn fd_step(gp: f64, gm: f64, p: &[f64]) -> f64 {
        let lp = generator(gp, gm, p);
        p.iter()
            .zip(&lp)
            .filter(|(&x, &d)| x > 1e-30 && d != 0.0)
            .map(|(&x, &d)| 1e-2 * x / d.abs())
            .fold(1e-5, f64::min)
            .max(1e-10)
    }

    /// Taylor series of `exp(hL) p`; only for small `|h|`.
    pub fn taylor(gp: f64, gm: f64, p: &[f64], h: f64) -> Vec<f64> {
        let mut sum = p.to_vec();
        let mut term = p.to_vec();
        for k in 1..40 {
            term = generator(gp, gm, &term)
                .into_iter()
                .map(|x| x * h / k as f64)
                .collect();
            for (s, t) in sum.iter_mut().zip(&term) {
                *s += t;
            }
            if term.iter().map(|x| x.abs()).sum::<f64>() < 1e-300 {
                break;
            }
        }
        sum
    }

    /// `Σ_n p_n C(n,m) ηᵐ (1-η)^{n-m}`.
    pub fn binomial_loss(p: &[f64], eta: f64) -> Vec<f64> {
        let d = p.len();
        let mut ln_fact = vec![0.0; d + 1];
        for k in 1..=d {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let mut out = vec![0.0; d];
        for (n, &pn) in p.iter().enumerate() {
            for (m, slot) in out.iter_mut().enumerate().take(n + 1) {
                let lc = ln_fact[n] - ln_fact[m] - ln_fact[n - m];
                let keep = if m == 0 { 0.0 } else { m as f64 * eta.ln() };
                let lose = if n == m { 0.0 } else { (n - m) as f64 * (1.0 - eta).ln() };
                *slot += pn * (lc + keep + lose).exp();
            }
        }
        out
    }

    /// Thermal output mean for each kind, from the Heisenberg picture.
    pub fn loss_mean(eta: f64, env: f64, nbar: f64) -> f64 {
        eta * nbar + (1.0 - eta) * env
    }

    pub fn amplifier_mean(kappa: f64, env: f64, nbar: f64) -> f64 {
        kappa * nbar + (kappa - 1.0) * (env + 1.0)
    }
}

fn reference_channels() -> [(&'static str, LindbladSpec); 3] {
    [
        ("Loss(0.7, 0)", ChannelKind::Loss { eta: 0.7, noise: 0.0 }.lindblad().unwrap()),
        ("Amplifier(1.5, 0)", ChannelKind::Amplifier { kappa: 1.5, noise: 0.0 }.lindblad().unwrap()),
        ("Additive(0.3)", ChannelKind::Additive { noise: 0.3 }.lindblad().unwrap()),
    ]
}

fn random_weights(rng: &mut ChaCha8Rng, support: usize, dim: usize) -> FockDistribution {
    let mut w: Vec<f64> = (0..support).map(|_| rng.random::<f64>()).collect();
    w.resize(dim, 0.0);
    FockDistribution::from_weights(&w).unwrap()
}

fn thermal_transport() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let nbar = rng.random_range(0.1..2.0);
        let env = rng.random_range(0.0..1.0);
        let (kind, mean) = match rng.random_range(0..3) {
            0 => {
                let eta = rng.random_range(0.05..0.95);
                (ChannelKind::Loss { eta, noise: env }, oracle::loss_mean(eta, env, nbar))
            }
            1 => {
                let kappa = rng.random_range(1.05..2.5);
                (ChannelKind::Amplifier { kappa, noise: env }, oracle::amplifier_mean(kappa, env, nbar))
            }
            _ => (ChannelKind::Additive { noise: env }, nbar + env),
        };
        let p = thermal_distribution(nbar, 256).map_err(|e| e.to_string())?;
        let out = evolve(&kind.lindblad().unwrap(), p.as_fock()).map_err(|e| e.to_string())?;
        let tv = oracle::tv(out.probs(), &oracle::thermal(mean, 256));
        worst = worst.max(tv);
        ensure(tv < 1e-6, || format!("{kind:?}, n̄ {nbar}: TV {tv:e}"))?;
    }
    within(Duration::from_secs(10), start, "20 cases")?;
    Ok(format!("20 cases, max TV {worst:.2e}, {:.2?}", start.elapsed()))
}

fn semigroup() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let spec = LindbladSpec::new(rng.random_range(0.0..1.0), rng.random_range(0.0..2.0), 1.0).unwrap();
        let (t1, t2) = (rng.random_range(0.0..0.8), rng.random_range(0.0..0.8));
        let p = random_weights(&mut rng, 24, 256);
        let run = |t: f64, q: &FockDistribution| evolve(&spec.with_time(t).unwrap(), q);
        let whole = run(t1 + t2, &p).map_err(|e| e.to_string())?;
        let split = run(t2, &run(t1, &p).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let tv = oracle::tv(whole.probs(), split.probs());
        worst = worst.max(tv);
        ensure(tv < 1e-9, || format!("{spec:?}, t {t1}+{t2}: TV {tv:e}"))?;
    }
    within(Duration::from_secs(30), start, "50 cases")?;
    Ok(format!("50 cases at dim 256, max TV {worst:.2e}, {:.2?}", start.elapsed()))
}

fn engine_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let spec = LindbladSpec::new(rng.random_range(0.0..1.0), rng.random_range(0.0..2.0), rng.random_range(0.05..0.6)).unwrap();
        let p = random_weights(&mut rng, 24, 128);
        let dense = evolve_with(&spec, &p, Engine::DenseExponential).map_err(|e| e.to_string())?;
        let rk = evolve_with(&spec, &p, Engine::default()).map_err(|e| e.to_string())?;
        let tv = oracle::tv(dense.probs(), rk.probs());
        worst = worst.max(tv);
        ensure(tv < 1e-9, || format!("dense vs rk {spec:?}: TV {tv:e}"))?;
    }
    let mut worst_binomial = 0.0f64;
    for _ in 0..20 {
        let eta = rng.random_range(0.05..0.95);
        let spec = ChannelKind::Loss { eta, noise: 0.0 }.lindblad().unwrap();
        let p = random_weights(&mut rng, 128, 128);
        let out = evolve(&spec, &p).map_err(|e| e.to_string())?;
        let tv = oracle::tv(out.probs(), &oracle::binomial_loss(p.probs(), eta));
        worst_binomial = worst_binomial.max(tv);
        ensure(tv < 1e-9, || format!("binomial η {eta}: TV {tv:e}"))?;
    }
    Ok(format!("dense vs rk max TV {worst:.2e}; binomial max TV {worst_binomial:.2e}"))
}

fn stationarity() -> Check {
    let mut worst = 0.0f64;
    for eta in [0.3, 0.7] {
        for env in [0.5, 2.0] {
            for t in [0.5, 2.0] {
                let spec = ChannelKind::Loss { eta, noise: env }.lindblad().unwrap().with_time(t).unwrap();
                let p = thermal_distribution(env, 256).map_err(|e| e.to_string())?;
                let out = evolve(&spec, p.as_fock()).map_err(|e| e.to_string())?;
                let tv = oracle::tv(out.probs(), &oracle::thermal(env, 256));
                worst = worst.max(tv);
                ensure(tv < 1e-9, || format!("η {eta}, N {env}, t {t}: TV {tv:e}"))?;
            }
        }
    }
    Ok(format!("8 cases, max TV {worst:.2e}"))
}

fn derivative() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut worst = 0.0f64;
    for i in 0..30 {
        let spec = LindbladSpec::new(rng.random_range(0.05..1.5), rng.random_range(0.0..1.5), 1.0).unwrap();
        let s0 = g(rng.random_range(0.2..1.5)).unwrap();
        let p = sample_passive_with_entropy(s0, 64, 500 + i).map_err(|e| e.to_string())?;
        let (gp, gm) = (spec.gamma_plus, spec.gamma_minus);
        let h = oracle::fd_step(gp, gm, p.probs());
        let ahead = oracle::entropy(&oracle::taylor(gp, gm, p.probs(), h));
        let behind = oracle::entropy(&oracle::taylor(gp, gm, p.probs(), -h));
        let fd = (ahead - behind) / (2.0 * h);
        let EntropyRate::Finite { rate, .. } = entropy_derivative_at_zero(&spec, p.as_fock()) else {
            return Err(format!("full-support state {i} reported divergent"));
        };
        let rel = (rate - fd).abs() / fd.abs().max(1e-3);
        worst = worst.max(rel);
        ensure(rel <= 1e-4, || format!("state {i}: {rate} vs FD {fd}"))?;
    }
    let mut divergent = 0;
    for i in 0..30 {
        let spec = LindbladSpec::new(rng.random_range(0.05..1.5), rng.random_range(0.0..1.5), 1.0).unwrap();
        let support = rng.random_range(4..40);
        let p = sample_passive_on_support(g(0.5).unwrap(), 64, support, 900 + i).map_err(|e| e.to_string())?;
        if entropy_derivative_at_zero(&spec, p.as_fock()).is_divergent() {
            divergent += 1;
        }
    }
    ensure(divergent == 30, || format!("{divergent}/30 finite-support states divergent"))?;
    let spec = LindbladSpec::new(1.0, 0.5, 1.0).unwrap();
    for n in [0, 3] {
        let table = check_finite_support_divergence(&spec, n, 32, &default_dt_grid()).map_err(|e| e.to_string())?;
        // Independent reading of the increments.
        let q: Vec<f64> = table.rows.iter().map(|r| r.increment / r.dt).collect();
        ensure(q.windows(2).all(|w| w[1] > w[0]), || format!("N = {n}: quotients {q:?}"))?;
    }
    Ok(format!("FD max rel err {worst:.2e}; 30/30 divergent; quotient increasing over 1e-2..1e-8"))
}

/// Direction of the ratios actually produced, or of the step that failed.
fn observed_direction(log_z: &[f64], termination: Termination) -> Option<SeedClass> {
    if log_z.len() >= 2 {
        let up = log_z.windows(2).all(|w| w[1] > w[0]);
        let down = log_z.windows(2).all(|w| w[1] < w[0]);
        let flat = log_z.windows(2).all(|w| (w[1] - w[0]).abs() <= 1e-12);
        return match (up, down, flat) {
            (true, _, _) => Some(SeedClass::Increasing),
            (_, true, _) => Some(SeedClass::Decreasing),
            (_, _, true) => Some(SeedClass::Constant),
            _ => None,
        };
    }
    match termination {
        Termination::Invalid { reason: InvalidReason::ExceedsOne, .. } => Some(SeedClass::Increasing),
        Termination::Invalid { reason: InvalidReason::BelowZero, .. } => Some(SeedClass::Decreasing),
        Termination::Collapsed { .. } => Some(SeedClass::Decreasing),
        Termination::Completed => None,
    }
}

fn trichotomy() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut mismatches = Vec::new();
    let mut counts = [0usize; 3];
    for i in 0..1000 {
        let gp = rng.random_range(0.0..2.0);
        let gm = rng.random_range(0.05..2.0);
        let mu = rng.random_range(-3.0..3.0);
        let z0 = rng.random_range(1e-4..1.0);
        let class = classify_seed(z0, mu, gp, gm).map_err(|e| e.to_string())?;
        let seq = iterate_recursion(z0, mu, gp, gm, 200).map_err(|e| e.to_string())?;
        let seen = observed_direction(seq.log_z(), seq.termination());
        counts[class as usize] += 1;
        if seen != Some(class) {
            mismatches.push(format!("#{i} (γ₊ {gp}, γ₋ {gm}, μ {mu}, z0 {z0}): {class:?} vs {seen:?}"));
        }
    }
    ensure(mismatches.is_empty(), || {
        format!("{} mismatches, first {}", mismatches.len(), mismatches[0])
    })?;
    Ok(format!(
        "1000 seeds, 0 mismatches ({} increasing, {} decreasing, {} constant)",
        counts[0], counts[1], counts[2]
    ))
}

fn critical_points() -> Check {
    let start = Instant::now();
    let s0 = g(1.0).unwrap();
    let config = ScanConfig { n_max: 2000, ..ScanConfig::default() };
    let loss = find_critical_points(0.0, 1.0, s0, 256, &config).map_err(|e| e.to_string())?;
    ensure(loss.points.len() == 1 && loss.points[0].branch == Branch::Geometric, || {
        format!("pure loss gave {:?}", loss.points.iter().map(|p| p.branch).collect::<Vec<_>>())
    })?;
    let ratio_err = loss.points[0].ratios.iter().map(|z| (z - 0.5).abs()).fold(0.0, f64::max);
    ensure(ratio_err < 1e-10, || format!("geometric ratio error {ratio_err:e}"))?;

    let amp = find_critical_points(1.0, 0.0, s0, 256, &config).map_err(|e| e.to_string())?;
    ensure(amp.geometric().is_some(), || "amplifier scan lost the geometric point".into())?;
    let se: Vec<_> = amp.super_exponential().collect();
    ensure(!se.is_empty(), || format!("no super-exponential point ({:?})", amp.status))?;
    let channel = LindbladSpec::new(1.0, 0.0, 1.5f64.ln()).unwrap();
    let thermal_out = oracle::g(oracle::amplifier_mean(1.5, 0.0, 1.0));
    let mut gaps = Vec::new();
    for p in &se {
        ensure(p.stationarity_residual < 1e-8, || format!("μ {}: residual {:e}", p.mu, p.stationarity_residual))?;
        let h = oracle::entropy(p.distribution.probs());
        ensure((h - s0.nats()).abs() < 1e-8, || format!("μ {}: entropy {h}", p.mu))?;
        let out = evolve(&channel, p.distribution.as_fock()).map_err(|e| e.to_string())?;
        gaps.push(oracle::entropy(out.probs()) - thermal_out);
    }
    within(Duration::from_secs(300), start, "both scans")?;
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "loss: geometric only, ratio err {ratio_err:.1e}; amplifier: geometric + {} super-exponential, \
         output-entropy gap to thermal at κ=1.5 from {lo:+.3e} to {hi:+.3e}; {:.1?}",
        se.len(),
        start.elapsed()
    ))
}

fn announce(name: &str, r: &VerificationReport) {
    if r.status == ReportStatus::Finding {
        println!(
            "FINDING {name}: {:?}, {} violation(s), min gap {:e} at seed {}",
            r.check, r.violations, r.min_gap, r.argmin_seed
        );
    }
}

fn finite_verify() -> Check {
    let start = Instant::now();
    let options = VerifyOptions { dim: 256, ..VerifyOptions::default() };
    let mut parts = Vec::new();
    for (name, spec) in reference_channels() {
        let r = verify_conjecture_finite_with(&spec, g(1.0).unwrap(), 1000, 8000, &options).map_err(|e| e.to_string())?;
        announce(name, &r);
        ensure(r.violations == 0, || format!("{name}: {} violations", r.violations))?;
        parts.push(format!("{name} min gap {:.2e} ({} excluded)", r.min_gap, r.excluded));
    }
    within(Duration::from_secs(600), start, "3000 trials")?;
    Ok(format!("{}; {:.1?}", parts.join(", "), start.elapsed()))
}

fn infinitesimal_verify() -> Check {
    let options = VerifyOptions::default();
    let mut parts = Vec::new();
    for (name, spec) in reference_channels() {
        let r = verify_conjecture_infinitesimal_with(&spec, g(1.0).unwrap(), 500, 9000, &options).map_err(|e| e.to_string())?;
        announce(name, &r);
        ensure(r.violations == 0, || format!("{name}: {} violations", r.violations))?;
        ensure(r.divergent == 0, || format!("{name}: {} full-support trials divergent", r.divergent))?;
        parts.push(format!("{name} min gap {:.2e} ({} excluded)", r.min_gap, r.excluded));
    }
    Ok(parts.join(", "))
}

fn passive_reduction() -> Check {
    let mut parts = Vec::new();
    for (name, spec) in reference_channels() {
        let r = check_passive_reduction(&spec, 16, 200, 10_000).map_err(|e| e.to_string())?;
        announce(name, &r);
        ensure(r.violations == 0, || format!("{name}: {} violations", r.violations))?;
        let tv = check_diagonal_restriction(&spec, 16, 200, 11_000).map_err(|e| e.to_string())?;
        ensure(tv <= 1e-9, || format!("{name}: diagonal restriction TV {tv:e}"))?;
        parts.push(format!("{name} min gap {:.3} diag TV {tv:.1e}", r.min_gap));
    }
    Ok(parts.join(", "))
}

fn contravariant() -> Check {
    let mut worst = 0.0f64;
    for i in 0..10 {
        let tau = -0.1 - 2.9 * i as f64 / 9.0;
        for j in 0..10 {
            let y = (1.0 - tau) + 3.0 * j as f64 / 9.0;
            let params = ContravariantParams::new(tau, y).map_err(|e| e.to_string())?;
            let d = decompose(&params).map_err(|e| e.to_string())?;
            let back = recompose(&d).map_err(|e| e.to_string())?;
            let res = (back.tau - tau).abs().max((back.y - y).abs());
            worst = worst.max(res);
            ensure(res < 1e-12, || format!("(τ {tau}, y {y}): residual {res:e}"))?;
            if j == 0 {
                ensure(d.eta == 1.0, || format!("quantum-limited τ {tau}: η {}", d.eta))?;
            }
        }
    }
    let params = ContravariantParams::new(-1.0, 2.0).unwrap();
    let s0 = g(1.0).unwrap();
    let min = min_output_entropy_contravariant(&params, s0).map_err(|e| e.to_string())?.nats();
    ensure((min - oracle::g(2.0)).abs() < 1e-6, || format!("minimum {min} vs g(2) {}", oracle::g(2.0)))?;
    let r = verify_contravariant(&params, s0, 300, 12_000, &VerifyOptions::default()).map_err(|e| e.to_string())?;
    announce("contravariant(-1, 2)", &r);
    let mc = r.min_value.ok_or("no Monte-Carlo minimum")?;
    ensure(r.violations == 0, || format!("{} violations", r.violations))?;
    ensure((mc - min).abs() <= r.entropy_error_budget, || {
        format!("MC minimum {mc} vs {min}, budget {:e}", r.entropy_error_budget)
    })?;
    Ok(format!(
        "round trip max {worst:.1e}; min {min:.9} vs g(2) {:.9}; MC min over 300 within {:.1e}",
        oracle::g(2.0),
        r.entropy_error_budget
    ))
}

fn reproducibility() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "mode = finite\nkind = amplifier\nkappa = 1.5\nS0-nbar = 1\ntrials = 64\nseed = 77\n")
        .map_err(|e| e.to_string())?;
    let run = |format: &str, threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_moe"))
            .args(["verify", "--config", cfg.to_str().unwrap(), "--format", format])
            .env("MOE_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())
    };
    for format in ["json", "csv"] {
        let a = run(format, "1")?;
        let b = run(format, "1")?;
        let c = run(format, "2")?;
        ensure(a.status.success(), || String::from_utf8_lossy(&a.stderr).into_owned())?;
        ensure(a.stdout == b.stdout, || format!("{format}: reruns differ"))?;
        ensure(a.stdout == c.stdout, || format!("{format}: worker count changed output"))?;
    }
    Ok("json and csv reruns byte-identical, also across worker counts".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("thermal transport", thermal_transport),
        ("semigroup law", semigroup),
        ("engine equivalence", engine_equivalence),
        ("stationarity", stationarity),
        ("entropy derivative", derivative),
        ("recursion trichotomy", trichotomy),
        ("critical points", critical_points),
        ("finite-time verification", finite_verify),
        ("infinitesimal verification", infinitesimal_verify),
        ("passive reduction", passive_reduction),
        ("contravariant chain", contravariant),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
