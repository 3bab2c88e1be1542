//! Kemeny-constant analysis for stochastic matrices and minimal-Kemeny
//! completion of partial stochastic matrices.
//!
//! The crate is organised around five layers:
//!
//! - [`markov`] — dense stochastic-matrix kernel: validation, essential-class
//!   structure, stationary vector, group inverse, Kemeny's constant by three
//!   independent routes, mean first passage times, and a rank-one update rule.
//! - [`partial`] — partial stochastic matrices: the `Specified`/`Free` grid,
//!   feasibility analysis, sparse-pattern enumeration, and the text/JSON file
//!   formats.
//! - [`diag`] / [`row`] — closed-form solutions of the Kemeny-minimizing
//!   completion problem when the specified entries lie on the diagonal or in a
//!   single row.
//! - [`oracle`] — independent verification by exhaustive enumeration and
//!   seeded random search.
//!
//! All state indices are 0-based throughout the API.

// index loops mirror the matrix formulas; iterator chains obscure them
#![allow(clippy::needless_range_loop)]

pub mod completion;
pub mod diag;
pub mod error;
pub mod markov;
pub mod oracle;
pub mod partial;
pub mod row;

pub use completion::{CompletionSolution, CompletionStructure, Method, Uniqueness};
pub use error::Error;
pub use markov::{ChainAnalysis, EssentialStructure, StochasticMatrix};
pub use oracle::{OracleMethod, OracleReport};
pub use partial::{Cell, PartialStochasticMatrix, SparsePattern};
pub use row::RowSpec;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
