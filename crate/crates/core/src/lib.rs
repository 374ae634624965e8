//! Photon-number laboratory for single-mode phase-insensitive bosonic
//! Gaussian channels.
//!
//! Channels are represented as Lindblad semigroups acting on truncated
//! photon-number distributions. On top of that representation the crate
//! provides:
//!
//! * [`fock`]: distributions, thermal states, passive rearrangement and the
//!   thermal entropy function `g` with its inverse.
//! * [`channel`]: channel parameterizations, the birth–death generator,
//!   two cross-checked evolution engines, output entropies and the entropy
//!   production rate at `t = 0`.
//! * [`critical`]: the Lagrange stationarity recursion for the
//!   entropy-constrained minimization of the entropy production rate, with
//!   its geometric and super-exponential solution branches.
//! * [`verify`]: Monte-Carlo and adversarial evidence for the thermal
//!   minimum-output-entropy property, plus a dense density-matrix oracle.
//! * [`contravariant`]: phase-conjugating channels via their covariant
//!   partner.
//!
//! Entropies are in nats throughout.

pub mod channel;
pub mod contravariant;
pub mod critical;
pub mod error;
pub mod fock;
pub mod ode;
pub mod verify;

pub use channel::{
    entropy_derivative_at_zero, evolve, evolve_with, generator_apply, output_entropy, ChannelKind,
    ChannelParams, Engine, EntropyRate, LindbladSpec, OutputEntropy, Propagator,
};
pub use error::{MoeError, Result};
pub use fock::{
    g, g_inverse, passive_rearrange, sample_passive_with_entropy, shannon_entropy,
    thermal_distribution, total_variation, EntropyValue, FockDistribution, PassiveDistribution,
    Support,
};
