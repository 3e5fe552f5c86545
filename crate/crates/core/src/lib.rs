//! Design and dispatch of multi-energy microgrids under weather and
//! carbon-policy uncertainty.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod devices;
pub mod environment;
pub mod error;
pub mod model;
mod par;
pub mod resource;
pub mod scenarios;
pub mod solver;

pub use error::{Error, Result};

pub use par::parallel_available;
