mod common;

use moe_core::channel::{evolve_with, Engine};
use moe_core::fock::{sample_passive_with_entropy, thermal_distribution};
use moe_core::{evolve, g, ChannelKind, FockDistribution, LindbladSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_kind(rng: &mut ChaCha8Rng) -> ChannelKind {
    let noise = rng.random_range(0.0..1.5);
    match rng.random_range(0..3u8) {
        0 => ChannelKind::Loss { eta: rng.random_range(0.1..0.95), noise },
        1 => ChannelKind::Amplifier { kappa: rng.random_range(1.05..3.0), noise },
        _ => ChannelKind::Additive { noise },
    }
}

fn random_weights(rng: &mut ChaCha8Rng, support: usize, dim: usize) -> FockDistribution {
    let mut w: Vec<f64> = (0..support).map(|_| rng.random::<f64>()).collect();
    w.resize(dim, 0.0);
    FockDistribution::from_weights(&w).unwrap()
}

#[test]
fn thermal_inputs_stay_thermal_with_closed_form_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let kind = random_kind(&mut rng);
        let nbar = rng.random_range(0.1..2.0);
        let spec = kind.lindblad().unwrap();
        let out = evolve(&spec, &thermal_distribution(nbar, 256).unwrap()).unwrap();
        let (tau, y) = (kind.params().unwrap().tau, kind.params().unwrap().y);
        // Mean transforms as τ n̄ + (y + τ - 1)/2.
        let expected = tau * nbar + (y + tau - 1.0) / 2.0;
        let reference = common::thermal(expected, 256);
        assert!(common::tv(out.probs(), &reference) < 1e-6, "{kind:?} n̄={nbar}");
        assert!((common::entropy(out.probs()) - common::g_ref(expected)).abs() < 1e-6);
    }
}

#[test]
fn semigroup_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let spec = LindbladSpec::new(rng.random_range(0.0..1.0), rng.random_range(0.0..2.0), 1.0)
            .unwrap();
        let (t1, t2) = (rng.random_range(0.0..0.8), rng.random_range(0.0..0.8));
        let p = random_weights(&mut rng, 20, 192);
        let whole = evolve(&spec.with_time(t1 + t2).unwrap(), &p).unwrap();
        let first = evolve(&spec.with_time(t1).unwrap(), &p).unwrap();
        let split = evolve(&spec.with_time(t2).unwrap(), &first).unwrap();
        assert!(common::tv(whole.probs(), split.probs()) < 1e-9);
    }
}

#[test]
fn engines_agree_and_match_binomial_thinning() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let spec = LindbladSpec::new(
            rng.random_range(0.0..0.8),
            rng.random_range(0.0..2.0),
            rng.random_range(0.05..1.0),
        )
        .unwrap();
        let p = random_weights(&mut rng, 30, 128);
        let dense = evolve_with(&spec, &p, Engine::DenseExponential).unwrap();
        let rk = evolve_with(&spec, &p, Engine::default()).unwrap();
        assert!(common::tv(dense.probs(), rk.probs()) < 1e-9);
    }
    for _ in 0..20 {
        let eta: f64 = rng.random_range(0.05..0.99);
        let spec = ChannelKind::Loss { eta, noise: 0.0 }.lindblad().unwrap();
        let p = sample_passive_with_entropy(g(1.0).unwrap(), 128, rng.random()).unwrap();
        let out = evolve(&spec, &p).unwrap();
        assert!(common::tv(out.probs(), &common::binomial_loss(p.probs(), eta)) < 1e-9);
    }
}

#[test]
fn loss_fixes_its_environment_state() {
    for eta in [0.3, 0.7] {
        for noise in [0.5, 2.0] {
            for t in [0.5, 2.0] {
                let base = ChannelKind::Loss { eta, noise }.lindblad().unwrap();
                let spec = base.with_time(t).unwrap();
                let th = thermal_distribution(noise, 256).unwrap();
                let out = evolve(&spec, &th).unwrap();
                assert!(common::tv(out.probs(), th.probs()) < 1e-9);
            }
        }
    }
}
