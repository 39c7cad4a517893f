//! Monge-Kantorovich metrics on the probability simplex of a weighted graph.
//!
//! Given a connected weighted graph `G` and a mobility function `g` (symmetric,
//! concave, 1-homogeneous), the squared distance between two probability vectors
//! is the minimal action
//!
//! ```text
//! W_g^2(r0, r1) = inf { ∫ ||v||^2_rho dt : drho/dt + div_rho(v) = 0, rho(0)=r0, rho(1)=r1 }
//! ```
//!
//! where `||v||^2_rho` weights each edge by `g(rho_i, rho_j)`. This crate provides
//!
//! * the discrete calculus on graphs (gradient, divergence, rho-weighted inner
//!   products) in [`graph`],
//! * builtin mobilities with their derived constants in [`mobility`],
//! * the Poincare function and g-connected components in [`simplex`],
//! * the action integrand, Hamiltonians and their gradients in [`energy`],
//! * a proximal primal-dual solver for geodesics with dual-certificate
//!   verification in [`solver`],
//! * closed-form and ODE reference geodesics in [`oracle`],
//! * file formats shared with the command line front end in [`io`].
//!
//! All numeric kernels are data-parallel via rayon when the default `parallel`
//! feature is enabled; building with `--no-default-features` selects a
//! sequential fallback with identical results.

pub mod energy;
pub mod error;
pub mod graph;
pub mod io;
pub mod mobility;
pub mod numerics;
pub mod oracle;
mod parallel;
pub mod simplex;
pub mod solver;

pub use error::Error;
pub use graph::{EdgeField, WeightedGraph};
pub use mobility::Mobility;
pub use simplex::ProbVector;

/// Positivity threshold separating exact boundary zeros of the mobility from
/// rounding noise. Used for g-connectivity, active-edge detection and the
/// support condition of the action.
pub const TAU_G: f64 = 1e-12;
