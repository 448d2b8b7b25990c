//! Simulation laboratory for pattern recognition on conditionally i.i.d. data.
//!
//! Objects are independent given their labels and the class conditionals do
//! not change over time, while the label sequence itself is arbitrary. The
//! crate generates such data, fits nearest-neighbour, histogram and
//! empirical-risk-minimising classifiers, evaluates their errors (exactly on
//! the line, by Monte Carlo elsewhere), measures how much a small change of
//! the training set can move the error, and evaluates the finite-sample
//! bounds that connect all of these.

pub mod bounds;
pub mod classifiers;
pub mod counterexamples;
pub mod data;
pub mod error;
pub mod error_eval;
pub mod harness;
pub mod rng;
pub mod tolerance;

pub use error::{Error, Result};
