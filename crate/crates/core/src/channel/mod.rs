//! Gauge-covariant channels as Lindblad semigroups on diagonal states.

mod engine;
mod entropy;
mod generator;
mod params;

pub use engine::{
    evolve, evolve_unchecked, evolve_with, transition_matrix, Engine, Propagator,
    DEFAULT_RK_TOLERANCE, DENSE_MAX_DIM, NEGATIVE_ABORT,
};
pub use entropy::{
    entropy_derivative_at_zero, fannes_bound, output_entropy, output_entropy_with,
    thermal_entropy_rate, EntropyRate, OutputEntropy,
};
pub(crate) use entropy::rate_over_positive;
pub use generator::generator_apply;
pub use params::{ChannelKind, ChannelParams, LindbladSpec, PHYSICALITY_TOLERANCE};
