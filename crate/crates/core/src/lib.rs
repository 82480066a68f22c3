//! Tailored centrality measures on multiplex networks.
//!
//! A centrality measure is described by a [`configurations::Configuration`]:
//! a cyclic sequence of layer matrices and transposes that says how each
//! score vector depends on the next. [`engine::solve`] computes the rankings
//! with a perturbed power iteration that converges even when the composed
//! matrix is reducible, periodic or identically zero.
//!
//! ```
//! use multirank::configurations::ShiftedConfiguration;
//! use multirank::engine::{solve, SolverSettings};
//! use multirank::multiplex::MultiplexNetwork;
//!
//! let m = MultiplexNetwork::parse("0 0 1 1\n0 1 2 1\n0 2 0 1\n1 0 2 1\n1 2 1 1\n1 1 0 1\n").unwrap();
//! let sc = ShiftedConfiguration::parse("A0T A0 A1T A1", m.layer_count()).unwrap();
//! let report = solve(&m, &sc, &SolverSettings::default()).unwrap();
//! assert_eq!(report.rankings.len(), 4);
//! ```

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod configurations;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod measures;
pub mod multiplex;

pub use error::{Error, Result};
