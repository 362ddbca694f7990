//! Radial ground states of the limit system in `R^N` and the integrability
//! exponent recursion.

pub mod banded;
pub mod decay;
mod exponents;
mod ground_state;
pub mod moments;
pub mod radial;

pub use decay::{fit_decay, DecayFit, DecayModel};
pub use exponents::{bootstrap_exponents, fixed_point_q0, regularity_tag, Bootstrap, BootstrapTag, ExponentPair};
pub use ground_state::{
    compare_initializations, solve_entire_ground_state, solve_entire_seeded, EntireParams, EtaSign,
    RadialGroundState, Seed, SeedOutcome, STATE_VERSION,
};
pub use moments::Moments;
