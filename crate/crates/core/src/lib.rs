//! Top coefficients of the denumerant quasi-polynomial as step polynomials.

pub mod arith;
pub mod cone;
pub mod error;
pub mod factor;
pub mod lattice;
pub mod oracle;
pub mod pipeline;
pub mod poset;
pub mod series;
pub mod step_poly;

pub use error::{Error, Result};

/// Cooperative cancellation hook polled between units of work.
pub type Cancel<'a> = Option<&'a (dyn Fn() -> bool + Sync)>;
