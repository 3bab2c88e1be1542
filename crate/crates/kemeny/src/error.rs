//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong while validating, analysing, or completing a
/// (partial) stochastic matrix.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // ------------------------------------------------------------------
    // parsing
    // ------------------------------------------------------------------
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    // ------------------------------------------------------------------
    // stochastic-matrix validation
    // ------------------------------------------------------------------
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix must have dimension at least 1")]
    EmptyMatrix,
    #[error("entry ({row},{col}) = {value} is not finite")]
    NonFiniteEntry { row: usize, col: usize, value: f64 },
    #[error("entry ({row},{col}) = {value} is negative beyond tolerance")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, which is not within {tol} of 1")]
    RowSumViolation { row: usize, sum: f64, tol: f64 },

    // ------------------------------------------------------------------
    // partial-matrix validation
    // ------------------------------------------------------------------
    #[error("specified entry ({row},{col}) = {value} is negative")]
    NegativeSpecified { row: usize, col: usize, value: f64 },
    #[error("row {row}: specified entries sum to {sum} > 1")]
    RowSumExceedsOne { row: usize, sum: f64 },
    #[error("row {row} is fully specified but sums to {sum} instead of 1")]
    FullySpecifiedSumNotOne { row: usize, sum: f64 },
    #[error("row {row} has exactly one free cell; its value is forced")]
    SingleFreeCellInRow { row: usize },
    #[error("row {row}: specified entries already sum to 1 but free cells remain")]
    RowSumOneWithFreeCells { row: usize },
    #[error("free cell ({row},{col}) has no assigned value")]
    MissingAssignment { row: usize, col: usize },
    #[error("assignment for cell ({row},{col}) = {value} is negative")]
    NegativeAssignment { row: usize, col: usize, value: f64 },

    // ------------------------------------------------------------------
    // chain structure
    // ------------------------------------------------------------------
    #[error("matrix has {count} essential classes; exactly one is required")]
    MultipleEssentialClasses { count: usize },
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("no completion has a single essential class")]
    Infeasible,

    // ------------------------------------------------------------------
    // numerics
    // ------------------------------------------------------------------
    #[error("linear system is singular or numerically broke down")]
    SingularSystem,
    #[error("a second eigenvalue lies within {window} of 1")]
    EigenvalueAtOne { window: f64 },
    #[error("no eigenvalue within {window} of 1 (nearest at distance {nearest})")]
    UnitEigenvalueMissing { window: f64, nearest: f64 },
    #[error("eigenvalue sum has imaginary residue {imag}, above 1e-8")]
    ResidualImaginaryPart { imag: f64 },
    #[error("I - S is singular or ill-conditioned (condition estimate {cond:e})")]
    SpectralRadiusNotLessThanOne { cond: f64 },
    #[error("perturbation denominator 1 - x d is {denom}, too close to 0")]
    DenominatorVanishes { denom: f64 },
    #[error("witness verification failed: reported {reported}, recomputed {recomputed}")]
    VerificationFailed { reported: f64, recomputed: f64 },

    // ------------------------------------------------------------------
    // solver input
    // ------------------------------------------------------------------
    #[error("perturbation size {x} outside [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("diagonal entry {value} at position {index} is at or too close to 1")]
    DiagonalAtOne { index: usize, value: f64 },
    #[error("two or more diagonal entries equal 1; every completion has several essential classes")]
    TwoDiagonalOnes,
    #[error("dimension {n} too small; at least {min} required")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("dimension {n} too large for exhaustive check (limit {max})")]
    DimensionTooLarge { n: usize, max: usize },
    #[error("entry {value} at position {index} is not strictly positive")]
    NonPositiveEntry { index: usize, value: f64 },
    #[error("diagonal entry {index} is {found}, expected the specified {expected}")]
    DiagonalMismatch { index: usize, expected: f64, found: f64 },
    #[error("cycle length {k} invalid for dimension {n}")]
    BadCycleLength { k: usize, n: usize },
    #[error("distance partition is empty")]
    EmptyPartition,
    #[error("values sum to {sum}, expected 1 within {tol}")]
    MassNotOne { sum: f64, tol: f64 },
    #[error("indices ({j1}, {j2}) invalid; need 1 <= j1 < j2 <= {max}")]
    BadIndices { j1: usize, j2: usize, max: usize },
    #[error("value {value} at position {index} is negative")]
    NegativeValue { index: usize, value: f64 },
    #[error("sequence is not sorted nondecreasing at position {index}")]
    NotSorted { index: usize },
    #[error("canonical-ordering parameter k = {k} outside 4..={max}")]
    BadK { k: usize, max: usize },
    #[error("computed r0 = {r0} lies outside (0,1); decrease epsilon")]
    R0OutOfRange { r0: f64 },
    #[error("weights do not follow the canonical ordering for k = {k}")]
    NotCanonicalOrder { k: usize },
    #[error("parameter {name} = {value} outside {expected}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    // ------------------------------------------------------------------
    // oracle
    // ------------------------------------------------------------------
    #[error("{count} patterns exceed the budget of {budget}")]
    BudgetExceeded { count: u128, budget: u64 },
}
