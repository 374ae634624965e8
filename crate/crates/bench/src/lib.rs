//! Shared fixtures for the benches.

use moe_core::{thermal_distribution, FockDistribution, LindbladSpec};

pub const DIMS: [usize; 3] = [64, 128, 256];

pub fn loss() -> LindbladSpec {
    LindbladSpec::new(0.0, 1.0, 0.7f64.recip().ln()).expect("valid loss")
}

pub fn amplifier() -> LindbladSpec {
    LindbladSpec::new(1.0, 0.0, 1.5f64.ln()).expect("valid amplifier")
}

pub fn thermal(nbar: f64, dim: usize) -> FockDistribution {
    thermal_distribution(nbar, dim).expect("thermal fits").into_fock()
}

