//! Minimal-Kemeny completion when the specified entries lie on the diagonal.
//!
//! With reciprocals `x_j = 1/(1 - d_j)` the optimum over all completions with
//! a single essential class is
//!
//! ```text
//! m(P) = ((sum x_j)^2 - sum x_j^2) / (2 sum x_j),
//! ```
//!
//! attained exactly by the lazy cycles `D + (I-D)C` over all n-cycle
//! permutation matrices `C`. When one diagonal entry equals 1 the optimum is
//! `sum_{j != j*} x_j`, attained by routing every row into the absorbing
//! column. A diagonal specified only in `k < n` positions reduces to the full
//! problem padded with zeros.

use crate::completion::{CompletionSolution, CompletionStructure, Method, Uniqueness};
use crate::error::Error;
use crate::markov::{compensated_sum, StochasticMatrix};
use crate::Result;

/// Diagonal values this close to 1 (but not exactly 1) make the closed form
/// blow up and are rejected.
pub const DIAGONAL_ONE_GUARD: f64 = 1e-12;

/// Witnesses reported by the solver agree with their reported value to this
/// tolerance, re-verified internally.
const WITNESS_TOL: f64 = 1e-9;

/// A diagonal specification: `d[j]` is pinned at position `(j, j)`,
/// `j = 0..k-1`, inside an `n x n` matrix whose other entries are free.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSpec {
    d: Vec<f64>,
    n: usize,
}

impl DiagonalSpec {
    pub fn new(d: Vec<f64>, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, min: 2 });
        }
        if d.len() > n {
            return Err(Error::DimensionTooSmall { n, min: d.len() });
        }
        let mut ones = 0usize;
        for (j, &v) in d.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeSpecified { row: j, col: j, value: v });
            }
            if v > 1.0 {
                return Err(Error::RowSumExceedsOne { row: j, sum: v });
            }
            if v == 1.0 {
                ones += 1;
            }
        }
        if ones > 1 {
            return Err(Error::TwoDiagonalOnes);
        }
        Ok(Self { d, n })
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self) -> Result<CompletionSolution> {
        if self.d.len() == self.n {
            solve_diagonal(&self.d)
        } else {
            solve_partial_diagonal(&self.d, self.n)
        }
    }
}

fn check_strictly_below_one(d: &[f64]) -> Result<()> {
    for (j, &v) in d.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::NegativeSpecified { row: j, col: j, value: v });
        }
        if v >= 1.0 - DIAGONAL_ONE_GUARD {
            return Err(Error::DiagonalAtOne { index: j, value: v });
        }
    }
    Ok(())
}

/// `((sum x)^2 - sum x^2) / (2 sum x)`, evaluated as
/// `sum_{i<j} x_i x_j / sum x`; the pairwise form has no cancellation even
/// when some `x_j` is orders of magnitude above the rest.
fn half_square_deficit_ratio(x: &[f64]) -> f64 {
    let s = compensated_sum(x.iter().copied());
    let mut prefix = 0.0;
    let pair = compensated_sum(x.iter().map(|&v| {
        let term = v * prefix;
        prefix += v;
        term
    }));
    pair / s
}

/// Kemeny's constant of `D + (I-D)C` for any n-cycle `C`:
/// `((sum x)^2 - sum x^2) / (2 sum x)` with `x_j = 1/(1-d_j)`.
pub fn diag_cycle_kemeny(d: &[f64]) -> Result<f64> {
    if d.len() < 2 {
        return Err(Error::DimensionTooSmall { n: d.len(), min: 2 });
    }
    check_strictly_below_one(d)?;
    let x: Vec<f64> = d.iter().map(|&v| 1.0 / (1.0 - v)).collect();
    Ok(half_square_deficit_ratio(&x))
}

/// The lazy cycle `D + (I-D)C` with `C` the canonical cycle
/// `0 -> 1 -> ... -> n-1 -> 0`.
pub fn cycle_completion(d: &[f64]) -> StochasticMatrix {
    let n = d.len();
    let mut rows = vec![vec![0.0; n]; n];
    for j in 0..n {
        rows[j][j] = d[j];
        rows[j][(j + 1) % n] = 1.0 - d[j];
    }
    StochasticMatrix::from_rows(&rows).expect("lazy cycle is stochastic")
}

/// Absorbing witness for a diagonal with `d[j_star] = 1`: row `j_star` is
/// `e_{j_star}` and every other row sends its residual mass to `j_star`.
fn absorbing_completion(d: &[f64], j_star: usize) -> StochasticMatrix {
    let n = d.len();
    let mut rows = vec![vec![0.0; n]; n];
    for j in 0..n {
        rows[j][j] = d[j];
        if j != j_star {
            rows[j][j_star] = 1.0 - d[j];
        }
    }
    StochasticMatrix::from_rows(&rows).expect("absorbing completion is stochastic")
}

fn verified(value: f64, witness: StochasticMatrix) -> Result<(f64, StochasticMatrix)> {
    let recomputed = witness.kemeny_trace()?;
    if (recomputed - value).abs() > WITNESS_TOL {
        return Err(Error::VerificationFailed { reported: value, recomputed });
    }
    Ok((value, witness))
}

/// Solves the completion problem for a fully specified diagonal `d`.
pub fn solve_diagonal(d: &[f64]) -> Result<CompletionSolution> {
    let n = d.len();
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    let ones: Vec<usize> = (0..n).filter(|&j| d[j] == 1.0).collect();
    if ones.len() > 1 {
        return Err(Error::TwoDiagonalOnes);
    }
    if let Some(&j_star) = ones.first() {
        let rest: Vec<f64> = (0..n).filter(|&j| j != j_star).map(|j| d[j]).collect();
        check_strictly_below_one(&rest)?;
        let value = compensated_sum(rest.iter().map(|&v| 1.0 / (1.0 - v)));
        let (value, witness) = verified(value, absorbing_completion(d, j_star))?;
        return Ok(CompletionSolution {
            value,
            witness,
            method: Method::DiagonalAbsorbing,
            structure: CompletionStructure::AbsorbingColumn { column: j_star },
            uniqueness: Uniqueness::Unknown,
        });
    }
    let value = diag_cycle_kemeny(d)?;
    let (value, witness) = verified(value, cycle_completion(d))?;
    Ok(CompletionSolution {
        value,
        witness,
        method: Method::DiagonalCycle,
        structure: CompletionStructure::NCycle { cycle: (0..n).collect() },
        uniqueness: Uniqueness::AllNCycles,
    })
}

/// Solves the completion problem when only `k = d.len() < n` diagonal
/// entries are specified; equivalent to [`solve_diagonal`] on `d` padded
/// with zeros.
pub fn solve_partial_diagonal(d: &[f64], n: usize) -> Result<CompletionSolution> {
    let k = d.len();
    if n < 2 || k >= n {
        return Err(Error::DimensionTooSmall { n, min: k + 1 });
    }
    check_strictly_below_one(d)?;
    // identical to the fully specified problem on d padded with zeros, whose
    // reciprocals pad x with ones
    let mut x: Vec<f64> = d.iter().map(|&v| 1.0 / (1.0 - v)).collect();
    x.resize(n, 1.0);
    let value = half_square_deficit_ratio(&x);
    let mut padded = d.to_vec();
    padded.resize(n, 0.0);
    let (value, witness) = verified(value, cycle_completion(&padded))?;
    Ok(CompletionSolution {
        value,
        witness,
        method: Method::DiagonalCycle,
        structure: CompletionStructure::NCycle { cycle: (0..n).collect() },
        uniqueness: Uniqueness::AllNCycles,
    })
}

/// The strictly decreasing sequence
/// `s_k = ((sum_{j<=k} x_j)^2 - sum_{j<=k} x_j^2) / (2 sum_{j<=k} x_j)
///        + sum_{j>k} x_j` for `k = 1..n`.
///
/// `s_k` is the Kemeny constant of a sparse diagonal completion whose unique
/// cycle covers the first `k` states; its strict decrease is why only the
/// full cycle is optimal.
pub fn s_sequence(x: &[f64]) -> Result<Vec<f64>> {
    for (j, &v) in x.iter().enumerate() {
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::NonPositiveEntry { index: j, value: v });
        }
    }
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let tail = compensated_sum(x[k..].iter().copied());
        out.push(half_square_deficit_ratio(&x[..k]) + tail);
    }
    debug_assert!(out.windows(2).all(|w| w[0] > w[1]));
    Ok(out)
}

/// True iff `t` is `D + (I-D)C` for some n-cycle permutation matrix `C`
/// (entrywise tolerance 1e-12); such matrices are exactly the minimizers for
/// the diagonal spec `d`.
pub fn is_diagonal_minimizer(t: &StochasticMatrix, d: &[f64]) -> Result<bool> {
    let n = t.n();
    if d.len() != n {
        return Err(Error::DimensionTooSmall { n: d.len(), min: n });
    }
    check_strictly_below_one(d)?;
    const TOL: f64 = 1e-12;
    for j in 0..n {
        let found = t.entry(j, j);
        if (found - d[j]).abs() > TOL {
            return Err(Error::DiagonalMismatch { index: j, expected: d[j], found });
        }
    }
    // each row must put exactly 1 - d_j on one off-diagonal cell
    let mut succ = vec![usize::MAX; n];
    for j in 0..n {
        let mut hit = None;
        for c in 0..n {
            if c == j {
                continue;
            }
            let v = t.entry(j, c);
            if v.abs() <= TOL {
                continue;
            }
            if (v - (1.0 - d[j])).abs() <= TOL && hit.is_none() {
                hit = Some(c);
            } else {
                return Ok(false);
            }
        }
        match hit {
            Some(c) => succ[j] = c,
            None => return Ok(false),
        }
    }
    // successor map must be one n-cycle
    let mut at = 0usize;
    for step in 1..=n {
        at = succ[at];
        if at == 0 {
            return Ok(step == n);
        }
    }
    Ok(false)
}
