//! Lower bounds for the first nonzero Neumann and first Dirichlet
//! eigenvalues of the p-Laplacian, computed from one-dimensional weighted
//! comparison problems.
//!
//! * [`compfun`]: comparison functions `T_κ`, `c_κ`, `C_{κ,Λ}`, `T_{κ,Λ}` and
//!   the generalized sine `sin_p`.
//! * [`model`]: geometry profiles, drift / weight and domain validation.
//! * [`shoot`]: flux-variable shooting with bisection (primary solver).
//! * [`oracle`]: discrete weighted Rayleigh-quotient minimization.
//! * [`flow`]: explicit 1-D nonlinear heat flow and its decay rate.
//! * [`cli`] / [`verify`]: command-line surface and the acceptance checks.

pub mod cli;
pub mod compfun;
pub mod error;
pub mod flow;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod shoot;
pub mod verify;

pub use error::{Error, Result};
pub use model::{quaternionic_profile, riemannian_profile, BoundaryKind, GeometryProfile, ModelProblem};
