//! Shared result types for the completion solvers.

use serde::Serialize;

use crate::markov::StochasticMatrix;

/// Which solver produced a completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed form for a fully/partially specified diagonal, cycle witness.
    DiagonalCycle,
    /// Closed form for a diagonal containing a 1, absorbing witness.
    DiagonalAbsorbing,
    /// Row case, path witness (all cycles through the specified state).
    RowPath,
    /// Row case, cycle witness on the remaining states.
    RowCycle,
    /// Row case with `r0 = 1`: the specified row is absorbing.
    RowAbsorbing,
    /// Exhaustive sparse-pattern enumeration.
    SparseEnumeration,
    /// Exhaustive search over row orderings.
    PermutationBruteForce,
    /// Seeded random search (upper bound only).
    RandomSearch,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::DiagonalCycle => "diagonal-cycle",
            Method::DiagonalAbsorbing => "diagonal-absorbing",
            Method::RowPath => "row-path",
            Method::RowCycle => "row-cycle",
            Method::RowAbsorbing => "row-absorbing",
            Method::SparseEnumeration => "sparse-enumeration",
            Method::PermutationBruteForce => "permutation-brute-force",
            Method::RandomSearch => "random-search",
        }
    }
}

/// Structural description of the witness completion.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompletionStructure {
    /// `D + (I-D)C` for the n-cycle visiting the listed states in order.
    NCycle { cycle: Vec<usize> },
    /// Every other row routes its residual mass into this absorbing column.
    AbsorbingColumn { column: usize },
    /// Path witness: `distance_values[d-1]` is the specified-row value placed
    /// at graph distance `d` from the specified state.
    PathOrdering { distance_values: Vec<f64> },
    /// Cycle of the given length on the non-specified states.
    RemainderCycle { cycle_len: usize },
    /// The specified row is absorbing (`r0 = 1`); a path feeds into it.
    AbsorbingRow { row: usize },
    /// Residual-mass column chosen for each row by an oracle.
    SparseAssignment { residual_columns: Vec<Option<usize>> },
}

/// What is known about the set of optimal completions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Uniqueness {
    /// The optimizers are exactly `D + (I-D)C` over all n-cycles `C`.
    AllNCycles,
    /// The reported ordering is the unique optimum of its candidate family.
    Unique,
    /// Optimal orderings form the exchange family of the canonical ordering
    /// with parameter `k`: swap positions `d` and `k-1-d` for any subset of
    /// the listed distances.
    ExchangeFamily { k: usize, swappable: Vec<usize> },
    /// No uniqueness characterization is claimed.
    Unknown,
}

/// Optimal value plus a witness completion and its description.
#[derive(Debug, Clone)]
pub struct CompletionSolution {
    /// Minimal Kemeny constant over single-essential-class completions.
    pub value: f64,
    /// A completion attaining `value`.
    pub witness: StochasticMatrix,
    pub method: Method,
    pub structure: CompletionStructure,
    pub uniqueness: Uniqueness,
}
