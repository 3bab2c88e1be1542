//! Independent verification of the closed-form solvers.
//!
//! Sparse-pattern enumeration is exact: some minimizer places each row's
//! residual mass on a single free cell, so the minimum over that finite set
//! is the true optimum. Permutation brute force covers the row case without
//! the reduced candidate set. Random search walks the completion polytope
//! and provides an upper-bound sanity check only.

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::markov::StochasticMatrix;
use crate::partial::PartialStochasticMatrix;
use crate::row::{self, RowSpec};
use crate::Result;

/// Default cap on the number of sparse patterns an enumeration may visit.
pub const DEFAULT_PATTERN_BUDGET: u64 = 10_000_000;
/// Largest `n - 1` accepted by the permutation brute force.
pub const BRUTEFORCE_MAX_POSITIONS: usize = 10;

/// How the report was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    SparseEnum,
    PermBruteforce,
    RandomSearch,
}

/// Result of an oracle run.
#[derive(Debug, Clone)]
pub struct OracleReport {
    /// Best Kemeny constant found (exact minimum for the exhaustive methods).
    pub best_value: f64,
    /// A completion attaining `best_value`.
    pub best_completion: StochasticMatrix,
    /// Candidates examined.
    pub patterns_examined: u64,
    /// Candidates with a single essential class.
    pub patterns_feasible: u64,
    pub method: OracleMethod,
}

// ---------------------------------------------------------------------------
// exhaustive enumeration
// ---------------------------------------------------------------------------

/// Minimizes Kemeny's constant over every sparse pattern of `p` with a single
/// essential class. Ties keep the lexicographically first pattern.
pub fn sparse_enumeration_min(
    p: &PartialStochasticMatrix,
    budget: u64,
) -> Result<OracleReport> {
    if !p.feasible_single_class() {
        return Err(Error::Infeasible);
    }
    let count = p.sparse_pattern_count();
    if count > budget as u128 {
        return Err(Error::BudgetExceeded { count, budget });
    }
    let mut examined = 0u64;
    let mut feasible = 0u64;
    let mut best: Option<(f64, StochasticMatrix)> = None;
    for (_, t) in p.sparse_patterns() {
        examined += 1;
        if !t.single_essential() {
            continue;
        }
        feasible += 1;
        let k = t.kemeny_trace()?;
        if best.as_ref().is_none_or(|(b, _)| k < *b) {
            best = Some((k, t));
        }
    }
    let (best_value, best_completion) = best.ok_or(Error::Infeasible)?;
    Ok(OracleReport {
        best_value,
        best_completion,
        patterns_examined: examined,
        patterns_feasible: feasible,
        method: OracleMethod::SparseEnum,
    })
}

/// Minimizes the row-case value over all `(n-1)!` path orderings plus the
/// remainder-cycle branch.
pub fn perm_bruteforce_row(spec: &RowSpec) -> Result<OracleReport> {
    let m = spec.n() - 1;
    if m > BRUTEFORCE_MAX_POSITIONS {
        return Err(Error::DimensionTooLarge { n: spec.n(), max: BRUTEFORCE_MAX_POSITIONS + 1 });
    }
    let n = spec.n();
    let values = spec.values();
    let mut examined = 0u64;
    let mut best_ordering: Option<(f64, Vec<f64>)> = None;
    for perm in (0..m).permutations(m) {
        examined += 1;
        let ordering: Vec<f64> = perm.iter().map(|&i| values[i]).collect();
        let gamma = row::objective_gamma(spec.r0(), &ordering);
        let k = (n - 1) as f64 - gamma / 2.0;
        if best_ordering.as_ref().is_none_or(|(b, _)| k < *b) {
            best_ordering = Some((k, ordering));
        }
    }
    let (path_value, path_ordering) = best_ordering.expect("at least one ordering");
    let mut best_value = path_value;
    let mut best_completion = row::path_completion(&path_ordering, spec.r0());
    if spec.r0() < 1.0 {
        examined += 1;
        let cycle_value = (n - 2) as f64 / 2.0 + 1.0 / (1.0 - spec.r0());
        if cycle_value < best_value {
            best_value = cycle_value;
            best_completion = row::cycle_completion(spec);
        }
    }
    let feasible = examined;
    Ok(OracleReport {
        best_value,
        best_completion,
        patterns_examined: examined,
        patterns_feasible: feasible,
        method: OracleMethod::PermBruteforce,
    })
}

// ---------------------------------------------------------------------------
// random search
// ---------------------------------------------------------------------------

/// Options for [`random_search_min`].
#[derive(Debug, Clone, Copy)]
pub struct RandomSearchOptions {
    /// Candidate moves to evaluate.
    pub iterations: u64,
    /// Fraction of the feasible move interval sampled per candidate.
    pub step: f64,
    /// RNG seed; identical seeds give bit-identical reports.
    pub seed: u64,
}

impl Default for RandomSearchOptions {
    fn default() -> Self {
        Self { iterations: 10_000, step: 1.0, seed: 0 }
    }
}

/// Upper-bounds the optimum by seeded random restarts plus greedy coordinate
/// moves `x e_i (e_p - e_q)^T` within the free cells of each row, scored with
/// the rank-one update formula against a cached group inverse.
pub fn random_search_min(
    p: &PartialStochasticMatrix,
    opts: &RandomSearchOptions,
) -> Result<OracleReport> {
    if !p.feasible_single_class() {
        return Err(Error::Infeasible);
    }
    let n = p.n();
    let movable_rows: Vec<(usize, Vec<usize>)> = (0..n)
        .map(|i| (i, p.free_cols(i)))
        .filter(|(i, cols)| cols.len() >= 2 && !p.is_row_fully_specified(*i))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut current = spread_completion(p, |k| vec![1.0; k]);
    let mut current_value = current.kemeny_trace()?;
    let mut qg = current.group_inverse()?;
    let mut best = current.clone();
    let mut best_value = current_value;

    let restart_every = (opts.iterations / 8).max(200);
    let mut examined = 0u64;
    let mut accepted = 0u64;
    for iter in 0..opts.iterations {
        if movable_rows.is_empty() {
            break;
        }
        if iter > 0 && iter % restart_every == 0 {
            current = spread_completion(p, |k| {
                (0..k).map(|_| rng.gen_range(0.05..1.0)).collect()
            });
            current_value = current.kemeny_trace()?;
            qg = current.group_inverse()?;
            if current_value < best_value {
                best_value = current_value;
                best = current.clone();
            }
            continue;
        }
        examined += 1;
        let (i, cols) = &movable_rows[rng.gen_range(0..movable_rows.len())];
        let a = rng.gen_range(0..cols.len());
        let mut b = rng.gen_range(0..cols.len() - 1);
        if b >= a {
            b += 1;
        }
        let (pcol, qcol) = (cols[a], cols[b]);
        let lo = -current.entry(*i, pcol) * opts.step;
        let hi = current.entry(*i, qcol) * opts.step;
        if hi - lo <= 0.0 {
            continue;
        }
        let x = rng.gen_range(lo..=hi);
        let Some(candidate_value) = rank_one_value(&qg, *i, pcol, qcol, x) else {
            continue;
        };
        if candidate_value < current_value - 1e-12 {
            let Ok(moved) = current.perturbed_rank_one(*i, pcol, qcol, x) else {
                continue;
            };
            if !moved.single_essential() {
                continue;
            }
            // refresh exactly; the update formula only scores candidates
            let Ok(fresh_value) = moved.kemeny_trace() else {
                continue;
            };
            let Ok(fresh_qg) = moved.group_inverse() else {
                continue;
            };
            current = moved;
            current_value = fresh_value;
            qg = fresh_qg;
            accepted += 1;
            if current_value < best_value {
                best_value = current_value;
                best = current.clone();
            }
        }
    }
    Ok(OracleReport {
        best_value,
        best_completion: best,
        patterns_examined: examined,
        patterns_feasible: accepted,
        method: OracleMethod::RandomSearch,
    })
}

/// `K(T + x e_i (e_p - e_q)^T)` from a cached group inverse; `None` when the
/// denominator vanishes.
fn rank_one_value(qg: &DMatrix<f64>, i: usize, p: usize, q: usize, x: f64) -> Option<f64> {
    let d1 = qg[(p, i)] - qg[(q, i)];
    let denom = 1.0 - x * d1;
    if denom.abs() <= 1e-12 {
        return None;
    }
    let n = qg.nrows();
    let d2: f64 = (0..n).map(|k| (qg[(p, k)] - qg[(q, k)]) * qg[(k, i)]).sum();
    Some(qg.trace() + x / denom * d2)
}

/// Completion that splits each row's residual over its free cells with the
/// given positive weights (maximal support, hence feasible).
fn spread_completion<F>(p: &PartialStochasticMatrix, mut weights: F) -> StochasticMatrix
where
    F: FnMut(usize) -> Vec<f64>,
{
    let n = p.n();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        let free = p.free_cols(i);
        let residual = p.row_residual(i);
        let w = if free.is_empty() { Vec::new() } else { weights(free.len()) };
        let wsum: f64 = w.iter().sum();
        for j in 0..n {
            rows[i][j] = match p.cell(i, j) {
                crate::partial::Cell::Specified(v) => v,
                crate::partial::Cell::Free => 0.0,
            };
        }
        for (idx, &col) in free.iter().enumerate() {
            rows[i][col] = residual * w[idx] / wsum;
        }
    }
    StochasticMatrix::from_rows(&rows).expect("spread completion is stochastic")
}
