//! Partial stochastic matrices: data model, validation, feasibility,
//! completion application, sparse-pattern enumeration, and file formats.
//!
//! A partial matrix is a square grid of `Specified(v)` and `Free` cells
//! subject to:
//!
//! 1. squareness;
//! 2. nonnegative specified values;
//! 3. per-row specified sums at most 1, equal to 1 exactly for fully
//!    specified rows;
//! 4. no row whose specified sum is 1 while free cells remain;
//! 5. at least two free cells in every not-fully-specified row.
//!
//! The *support digraph* has an arc `j -> k` whenever cell `(j,k)` is free or
//! specified positive. A completion with a single essential class exists iff
//! that digraph has exactly one terminal strongly connected component.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::markov::{compensated_sum, EssentialStructure, StochasticMatrix};
use crate::Result;

/// Row-sum comparisons on partial matrices use this tolerance.
pub const PARTIAL_TOL: f64 = 1e-12;
/// Largest dimension accepted by the exhaustive subset feasibility check.
pub const SUBSET_CHECK_MAX_N: usize = 12;

/// One cell of a partial matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Specified(f64),
    Free,
}

impl Cell {
    pub fn is_free(&self) -> bool {
        matches!(self, Cell::Free)
    }
}

// ---------------------------------------------------------------------------
// PartialStochasticMatrix
// ---------------------------------------------------------------------------

/// A validated partial stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialStochasticMatrix {
    n: usize,
    cells: Vec<Cell>, // row-major
}

impl PartialStochasticMatrix {
    /// Validates a nested-vec grid against conditions 1-5.
    pub fn from_cells(grid: Vec<Vec<Cell>>) -> Result<Self> {
        let n = grid.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        for row in &grid {
            if row.len() != n {
                return Err(Error::NotSquare { rows: n, cols: row.len() });
            }
        }
        for (i, row) in grid.iter().enumerate() {
            let mut free = 0usize;
            for (j, cell) in row.iter().enumerate() {
                match cell {
                    Cell::Free => free += 1,
                    Cell::Specified(v) => {
                        if !v.is_finite() {
                            return Err(Error::NonFiniteEntry { row: i, col: j, value: *v });
                        }
                        if *v < 0.0 {
                            return Err(Error::NegativeSpecified { row: i, col: j, value: *v });
                        }
                    }
                }
            }
            let sum = compensated_sum(row.iter().filter_map(|c| match c {
                Cell::Specified(v) => Some(*v),
                Cell::Free => None,
            }));
            if sum > 1.0 + PARTIAL_TOL {
                return Err(Error::RowSumExceedsOne { row: i, sum });
            }
            if free == 0 {
                if (sum - 1.0).abs() > PARTIAL_TOL {
                    return Err(Error::FullySpecifiedSumNotOne { row: i, sum });
                }
            } else {
                if sum >= 1.0 - PARTIAL_TOL {
                    return Err(Error::RowSumOneWithFreeCells { row: i });
                }
                if free == 1 {
                    return Err(Error::SingleFreeCellInRow { row: i });
                }
            }
        }
        let cells = grid.into_iter().flatten().collect();
        Ok(Self { n, cells })
    }

    /// An n x n grid with every cell free.
    pub fn all_free(n: usize) -> Result<Self> {
        Self::from_cells(vec![vec![Cell::Free; n]; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Cell] {
        &self.cells[i * self.n..(i + 1) * self.n]
    }

    pub fn free_cols(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.cell(i, j).is_free()).collect()
    }

    pub fn is_row_fully_specified(&self, i: usize) -> bool {
        self.row(i).iter().all(|c| !c.is_free())
    }

    pub fn is_fully_specified(&self) -> bool {
        (0..self.n).all(|i| self.is_row_fully_specified(i))
    }

    /// Compensated sum of the specified entries of row `i`.
    pub fn row_specified_sum(&self, i: usize) -> f64 {
        compensated_sum(self.row(i).iter().filter_map(|c| match c {
            Cell::Specified(v) => Some(*v),
            Cell::Free => None,
        }))
    }

    /// Mass left for the free cells of row `i` (0 for fully specified rows).
    pub fn row_residual(&self, i: usize) -> f64 {
        if self.is_row_fully_specified(i) {
            0.0
        } else {
            (1.0 - self.row_specified_sum(i)).max(0.0)
        }
    }

    // -----------------------------------------------------------------
    // feasibility
    // -----------------------------------------------------------------

    /// Adjacency lists of the support digraph: arc `j -> k` iff cell `(j,k)`
    /// is free or specified positive.
    pub fn support_adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .filter(|&j| match self.cell(i, j) {
                        Cell::Free => true,
                        Cell::Specified(v) => v > 0.0,
                    })
                    .collect()
            })
            .collect()
    }

    /// True iff some completion has a single essential class, decided by the
    /// condensation of the support digraph.
    pub fn feasible_single_class(&self) -> bool {
        EssentialStructure::of_adjacency(&self.support_adjacency()).single_essential
    }

    /// Exhaustive oracle for [`Self::feasible_single_class`]: a completion
    /// with a single essential class exists iff no two disjoint nonempty
    /// subsets are both closed under the support digraph (a set `X` is closed
    /// when `P[X, X^c]` holds neither a positive nor an unspecified entry).
    pub fn feasible_subset_check(&self) -> Result<bool> {
        Ok(self.infeasibility_witness()?.is_none())
    }

    /// For infeasible instances, two disjoint closed subsets witnessing the
    /// failure; `None` when feasible. Subsets are reported sorted ascending.
    pub fn infeasibility_witness(&self) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
        let n = self.n;
        if n > SUBSET_CHECK_MAX_N {
            return Err(Error::DimensionTooLarge { n, max: SUBSET_CHECK_MAX_N });
        }
        let adj = self.support_adjacency();
        let mut out_mask = vec![0u32; n];
        for (j, outs) in adj.iter().enumerate() {
            for &k in outs {
                out_mask[j] |= 1 << k;
            }
        }
        let full: u32 = (1u32 << n) - 1;
        let closed: Vec<u32> = (1..=full)
            .filter(|&x| (0..n).all(|j| (x >> j) & 1 == 0 || (out_mask[j] & !x) == 0))
            .collect();
        for (a, &x) in closed.iter().enumerate() {
            for &y in &closed[a + 1..] {
                if x & y == 0 {
                    let to_set = |m: u32| (0..n).filter(|&j| (m >> j) & 1 == 1).collect();
                    return Ok(Some((to_set(x), to_set(y))));
                }
            }
        }
        Ok(None)
    }

    // -----------------------------------------------------------------
    // completions
    // -----------------------------------------------------------------

    /// Fills every free cell from `values` and validates the result.
    pub fn apply_completion(
        &self,
        values: &HashMap<(usize, usize), f64>,
    ) -> Result<StochasticMatrix> {
        let n = self.n;
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                rows[i][j] = match self.cell(i, j) {
                    Cell::Specified(v) => v,
                    Cell::Free => {
                        let v = *values
                            .get(&(i, j))
                            .ok_or(Error::MissingAssignment { row: i, col: j })?;
                        if v < 0.0 {
                            return Err(Error::NegativeAssignment { row: i, col: j, value: v });
                        }
                        v
                    }
                };
            }
        }
        StochasticMatrix::from_rows(&rows)
    }

    /// True iff `t` agrees with every specified cell. Validation may
    /// renormalize rows whose specified sum is off 1 by up to the partial
    /// tolerance, so cells are compared within [`PARTIAL_TOL`] rather than
    /// bit-for-bit.
    pub fn is_completion(&self, t: &StochasticMatrix) -> bool {
        if t.n() != self.n {
            return false;
        }
        (0..self.n).all(|i| {
            (0..self.n).all(|j| match self.cell(i, j) {
                Cell::Specified(v) => (t.entry(i, j) - v).abs() <= PARTIAL_TOL,
                Cell::Free => true,
            })
        })
    }

    /// Number of sparse patterns: product over not-fully-specified rows of
    /// their free-cell counts.
    pub fn sparse_pattern_count(&self) -> u128 {
        (0..self.n)
            .filter(|&i| !self.is_row_fully_specified(i))
            .map(|i| self.free_cols(i).len() as u128)
            .fold(1u128, |acc, c| acc.saturating_mul(c))
    }

    /// Iterator over every completion that places each row's whole residual
    /// mass on a single free cell, in row-major lexicographic order of the
    /// chosen columns.
    pub fn sparse_patterns(&self) -> SparsePatterns<'_> {
        let choice_rows: Vec<(usize, Vec<usize>, f64)> = (0..self.n)
            .filter(|&i| !self.is_row_fully_specified(i))
            .map(|i| (i, self.free_cols(i), self.row_residual(i)))
            .collect();
        let total = choice_rows
            .iter()
            .map(|(_, cols, _)| cols.len() as u128)
            .fold(1u128, |acc, c| acc.saturating_mul(c));
        SparsePatterns { parent: self, choice_rows, total, next: 0 }
    }
}

/// One sparse pattern: for each row, the free column taking the row's
/// residual mass (`None` for fully specified rows).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SparsePattern {
    pub residual_columns: Vec<Option<usize>>,
}

/// Restartable stream of sparse-pattern completions; see
/// [`PartialStochasticMatrix::sparse_patterns`].
pub struct SparsePatterns<'a> {
    parent: &'a PartialStochasticMatrix,
    /// (row index, free columns, residual mass) for rows with a choice.
    choice_rows: Vec<(usize, Vec<usize>, f64)>,
    total: u128,
    next: u128,
}

impl SparsePatterns<'_> {
    pub fn total(&self) -> u128 {
        self.total
    }

    /// Decodes pattern `index` (mixed radix, first row most significant).
    pub fn pattern_at(&self, index: u128) -> (SparsePattern, StochasticMatrix) {
        debug_assert!(index < self.total);
        let n = self.parent.n();
        let mut residual_columns = vec![None; n];
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match self.parent.cell(i, j) {
                        Cell::Specified(v) => v,
                        Cell::Free => 0.0,
                    })
                    .collect()
            })
            .collect();
        let mut rem = index;
        for (row, cols, residual) in self.choice_rows.iter().rev() {
            let radix = cols.len() as u128;
            let digit = (rem % radix) as usize;
            rem /= radix;
            let col = cols[digit];
            residual_columns[*row] = Some(col);
            rows[*row][col] = *residual;
        }
        let t = StochasticMatrix::from_rows(&rows)
            .expect("sparse pattern always yields a stochastic matrix");
        (SparsePattern { residual_columns }, t)
    }
}

impl Iterator for SparsePatterns<'_> {
    type Item = (SparsePattern, StochasticMatrix);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.total {
            return None;
        }
        let item = self.pattern_at(self.next);
        self.next += 1;
        Some(item)
    }
}

// ---------------------------------------------------------------------------
// file formats
// ---------------------------------------------------------------------------

/// JSON mirror of the text format: `{"n": 2, "rows": [[0.5, "?"], ...]}`.
#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    n: usize,
    rows: Vec<Vec<JsonCell>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonCell {
    Value(f64),
    Mark(String),
}

/// Parses the plain-text matrix format: first content line holds `n`, the
/// next `n` lines hold `n` whitespace-separated tokens each, where a token is
/// a decimal literal or `?` for a free cell. Lines starting with `#` and
/// blank lines are ignored.
pub fn parse_matrix_text(input: &str) -> Result<Vec<Vec<Cell>>> {
    let mut content = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line_no, first) = content
        .next()
        .ok_or_else(|| Error::Parse { line: 0, msg: "empty input".into() })?;
    let n: usize = first.parse().map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("expected dimension, found {first:?}"),
    })?;
    if n == 0 {
        return Err(Error::Parse { line: line_no, msg: "dimension must be at least 1".into() });
    }
    let mut grid = Vec::with_capacity(n);
    for _ in 0..n {
        let (line_no, line) = content.next().ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("expected {n} rows, input ended early"),
        })?;
        let row = parse_row_tokens(line, n, line_no)?;
        grid.push(row);
    }
    if let Some((line_no, extra)) = content.next() {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("unexpected trailing content: {extra:?}"),
        });
    }
    Ok(grid)
}

fn parse_row_tokens(line: &str, n: usize, line_no: usize) -> Result<Vec<Cell>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != n {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("expected {n} tokens, found {}", tokens.len()),
        });
    }
    tokens
        .iter()
        .map(|tok| {
            if *tok == "?" {
                Ok(Cell::Free)
            } else {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid number {tok:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("non-finite value {tok:?}"),
                    });
                }
                Ok(Cell::Specified(v))
            }
        })
        .collect()
}

/// Parses the JSON mirror format.
pub fn parse_matrix_json(input: &str) -> Result<Vec<Vec<Cell>>> {
    let file: MatrixFile = serde_json::from_str(input)
        .map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    if file.rows.len() != file.n {
        return Err(Error::Parse {
            line: 0,
            msg: format!("declared n = {} but found {} rows", file.n, file.rows.len()),
        });
    }
    file.rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|c| match c {
                    JsonCell::Value(v) if v.is_finite() => Ok(Cell::Specified(v)),
                    JsonCell::Value(v) => {
                        Err(Error::Parse { line: 0, msg: format!("non-finite value {v}") })
                    }
                    JsonCell::Mark(s) if s == "?" => Ok(Cell::Free),
                    JsonCell::Mark(s) => Err(Error::Parse {
                        line: 0,
                        msg: format!("invalid cell {s:?}; only \"?\" marks a free cell"),
                    }),
                })
                .collect()
        })
        .collect()
}

/// Converts a fully specified grid into a validated stochastic matrix.
pub fn cells_to_stochastic(grid: &[Vec<Cell>], tol: f64) -> Result<StochasticMatrix> {
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, c)| match c {
                    Cell::Specified(v) => Ok(*v),
                    Cell::Free => Err(Error::MissingAssignment { row: i, col: j }),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    StochasticMatrix::from_rows_tol(&rows, tol)
}

impl PartialStochasticMatrix {
    pub fn from_text(input: &str) -> Result<Self> {
        Self::from_cells(parse_matrix_text(input)?)
    }

    pub fn from_json(input: &str) -> Result<Self> {
        Self::from_cells(parse_matrix_json(input)?)
    }

    /// Text serialization; values print as shortest round-trip decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| match self.cell(i, j) {
                    Cell::Specified(v) => format!("{v}"),
                    Cell::Free => "?".to_string(),
                })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    /// JSON serialization mirroring [`Self::to_text`].
    pub fn to_json(&self) -> String {
        let rows = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| match self.cell(i, j) {
                        Cell::Specified(v) => JsonCell::Value(v),
                        Cell::Free => JsonCell::Mark("?".to_string()),
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string(&MatrixFile { n: self.n, rows }).expect("serialize matrix")
    }
}

/// Text serialization of a stochastic matrix in the same format the parsers
/// accept.
pub fn matrix_to_text(t: &StochasticMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", t.n());
    for i in 0..t.n() {
        let row: Vec<String> = (0..t.n()).map(|j| format!("{}", t.entry(i, j))).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
