//! Dual variational framework on the discretized torus.

pub mod duality;
pub mod energy;
pub mod helmholtz;
pub mod newton;
pub mod ray;
pub mod transplant;

pub use duality::{duality_check, DualityReport};
pub use energy::{dual_energy, dual_gradient, primal_energy, primal_energy_gradient_form, DualPair};
pub use helmholtz::{helmholtz_inverse, Helmholtz};
pub use newton::{locate_maximum, minres, rescale_about, seed_transplant, solve_perturbed, NewtonOptions, PerturbedSolution};
pub use ray::{ray_coefficients, ray_profile, RayCoefficients, RayProfile};
pub use transplant::{core_nodes, cutoff, transplant};
