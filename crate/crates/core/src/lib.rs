//! Linear and nonlinear analysis of one-dimensional viscous quantum
//! hydrodynamics around constant states.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convolution;
pub mod error;
pub mod linear;
pub mod matfun;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod symbol;

pub use error::{QhdError, Result};
pub use model::{classify_equilibrium, EquilibriumState, ModelParams, Regime};
