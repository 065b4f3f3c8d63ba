//! Finite-element experiments for reaction-diffusion problems whose
//! diffusion becomes large on an interior subinterval, and measurement of
//! how fast solutions, spectra, equilibria, invariant manifolds and
//! attractors approach those of the limiting shadow problem.

pub mod attractor;
pub mod case;
pub mod elliptic;
pub mod equilibria;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod manifold;
pub mod model;
pub mod nonlinear;
pub mod ratefit;
pub mod semigroup;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
