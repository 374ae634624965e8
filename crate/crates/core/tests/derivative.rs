mod common;

use moe_core::fock::{sample_passive_on_support, sample_passive_with_entropy};
use moe_core::verify::tables::{check_finite_support_divergence, default_dt_grid};
use moe_core::{entropy_derivative_at_zero, g, EntropyRate, LindbladSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_spec(rng: &mut ChaCha8Rng) -> LindbladSpec {
    LindbladSpec::new(rng.random_range(0.05..1.5), rng.random_range(0.0..1.5), 1.0).unwrap()
}

#[test]
fn rate_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..30 {
        let spec = random_spec(&mut rng);
        let s0 = g(rng.random_range(0.2..1.5)).unwrap();
        let p = sample_passive_with_entropy(s0, 64, 1000 + i).unwrap();
        let h = common::fd_step(spec.gamma_plus, spec.gamma_minus, p.probs());
        let ahead = common::taylor_evolve(spec.gamma_plus, spec.gamma_minus, p.probs(), h);
        let behind = common::taylor_evolve(spec.gamma_plus, spec.gamma_minus, p.probs(), -h);
        let fd = (common::entropy(&ahead) - common::entropy(&behind)) / (2.0 * h);
        let EntropyRate::Finite { rate, .. } = entropy_derivative_at_zero(&spec, &p) else {
            panic!("full-support state reported divergent");
        };
        assert!((rate - fd).abs() <= 1e-4 * fd.abs().max(1e-3), "{rate} vs {fd}");
    }
}

#[test]
fn finite_support_with_excitation_always_diverges() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for i in 0..30 {
        let spec = random_spec(&mut rng);
        let support = rng.random_range(4..40);
        let p = sample_passive_on_support(g(0.5).unwrap(), 64, support, i).unwrap();
        assert!(entropy_derivative_at_zero(&spec, &p).is_divergent());
    }
}

#[test]
fn divergence_quotient_grows_over_the_grid() {
    let spec = LindbladSpec::new(1.0, 0.0, 1.0).unwrap();
    for n in [0, 2, 5] {
        let table = check_finite_support_divergence(&spec, n, 32, &default_dt_grid()).unwrap();
        assert!(table.strictly_increasing, "N = {n}");
        let last = table.rows.last().unwrap().leading_ratio.unwrap();
        assert!((last - 1.0).abs() < 0.1, "N = {n}: {last}");
    }
}
