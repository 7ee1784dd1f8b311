//! Random walks on the largest percolation cluster of a lattice box.
//!
//! The crate builds Bernoulli bond configurations on `{-n..n}^d`, extracts
//! the largest open cluster, and measures the continuous-time simple random
//! walk on it: total-variation mixing time, spectral gap, set conductances
//! and conductance profiles, and the geometric probes (dual first-passage
//! distances, renormalised block fields) that control them. The
//! [`experiments`] module runs these over sweeps of box sizes and fits
//! log-log scaling exponents.

// `!(x > 0.0)` style guards deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conductance;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod lattice;
pub mod percolation;
pub mod spectral;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
