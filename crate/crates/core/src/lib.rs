//! Maximum hands-off (sparsest) control for single-input LTI systems.
//!
//! The continuous-time problem is transcribed onto a uniform grid of
//! piecewise-constant controls. The L1-optimal linear program is solved to a
//! vertex, which is then polished into a bang-off-bang control; Pontryagin
//! certificates, a closed-form double-integrator oracle and value-function
//! sampling check the result from independent directions.

pub mod cli;
pub mod di_oracle;
pub mod error;
pub mod lti;
pub mod lp;
pub mod matexp;
pub mod pmp;
pub mod solver;
pub mod value_map;

pub use error::{HandsoffError, Result};
pub use lti::{l0_kernel, ControlSignal, LtiSystem, NormReport};
