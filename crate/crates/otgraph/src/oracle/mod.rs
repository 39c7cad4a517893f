//! Reference geodesics with independently computable optima: the closed-form
//! two-vertex family, the three-vertex boundary geodesic, and the ODE-built
//! boundary-touching geodesic with interior endpoints.

mod boundary3;
mod ode;
mod two_vertex;

pub use boundary3::three_vertex_boundary;
pub use ode::{ode_boundary_geodesic, reduced_lagrangian_l0, OdeGeodesic};
pub use two_vertex::{two_vertex_geodesic, GFunction, TwoVertexGeodesic};
