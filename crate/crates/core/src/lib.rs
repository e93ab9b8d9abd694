//! θ-parameterised quadrature rules with explicit Peano kernels and
//! certified error bounds.

pub mod bounds;
pub mod builtin;
pub mod error;
pub mod exec;
pub mod integrate;
pub mod kernel;
pub mod poly;
pub mod rules;
pub mod sum;
pub mod sweep;

pub use error::{QuadError, Result};
pub use exec::Execution;
pub use kernel::RuleSpec;
