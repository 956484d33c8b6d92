//! First-order convex optimization methods with per-iteration convergence
//! certificates, plus sampling-based checks of the convex-analysis facts the
//! rates rest on.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod certificates;
pub mod convex_analysis;
pub mod error;
pub mod io;
pub mod lasso;
pub mod numkernel;
pub mod objectives;
pub mod prox;

pub use error::{Error, Result};
pub use numkernel::{Matrix, Rng, Vector};
