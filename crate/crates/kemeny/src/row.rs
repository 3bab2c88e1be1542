//! Minimal-Kemeny completion when the specified entries fill a single row.
//!
//! Conventions follow the specified row sitting last (index `n-1`): the
//! diagonal entry is `r0` and the value `r_d` sits in the column at graph
//! distance `d` from the specified state, i.e. `t[n-1][n-1-d] = r_d`.
//!
//! Two shapes of sparse completion compete:
//!
//! - a cycle among the other `n-1` states, worth `(n-2)/2 + 1/(1-r0)`;
//! - a path feeding the specified state, worth `n-1 - gamma/2` where
//!   `gamma = sum d(d+1) r_{sigma(d)} / (1 + sum d r_{sigma(d)})` is
//!   maximized over placements `sigma`.
//!
//! The gamma maximum is found on a candidate set of at most `n-3` orderings:
//! the sorted one plus one interleaved "canonical" ordering per integer
//! parameter `k = 4..n-2`.

use crate::completion::{CompletionSolution, CompletionStructure, Method, Uniqueness};
use crate::error::Error;
use crate::markov::{compensated_sum, StochasticMatrix};
use crate::Result;

/// Mass-balance tolerance for row specifications.
pub const ROW_MASS_TOL: f64 = 1e-12;
/// Window inside which a gamma maximum counts as an integer (exchange-family
/// case).
pub const GAMMA_INTEGER_WINDOW: f64 = 1e-9;
/// Witness re-verification tolerance.
const WITNESS_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// RowSpec
// ---------------------------------------------------------------------------

/// A fully specified row: diagonal entry `r0` plus the off-diagonal values
/// `r[0..n-2]`, where `r[d-1]` denotes the value currently assigned to
/// distance `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSpec {
    r0: f64,
    r: Vec<f64>,
}

impl RowSpec {
    pub fn new(r0: f64, r: Vec<f64>) -> Result<Self> {
        if r.is_empty() {
            return Err(Error::DimensionTooSmall { n: 1, min: 2 });
        }
        if !r0.is_finite() || r0 < 0.0 {
            return Err(Error::NegativeValue { index: 0, value: r0 });
        }
        for (i, &v) in r.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeValue { index: i + 1, value: v });
            }
        }
        let sum = r0 + compensated_sum(r.iter().copied());
        if (sum - 1.0).abs() > ROW_MASS_TOL {
            return Err(Error::MassNotOne { sum, tol: ROW_MASS_TOL });
        }
        Ok(Self { r0, r })
    }

    /// Dimension of the full matrix.
    pub fn n(&self) -> usize {
        self.r.len() + 1
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Off-diagonal values; `values()[d-1]` sits at distance `d`.
    pub fn values(&self) -> &[f64] {
        &self.r
    }

    /// The values sorted nondecreasing.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut rho = self.r.clone();
        rho.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rho
    }

    /// The full last row under the distance convention:
    /// `row[n-1-d] = r_d`, `row[n-1] = r0`.
    pub fn last_row(&self) -> Vec<f64> {
        let n = self.n();
        let mut row = vec![0.0; n];
        for (idx, &v) in self.r.iter().enumerate() {
            row[n - 1 - (idx + 1)] = v;
        }
        row[n - 1] = self.r0;
        row
    }

    /// Builds a spec from a full last row (inverse of [`Self::last_row`]).
    pub fn from_last_row(row: &[f64]) -> Result<Self> {
        let n = row.len();
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, min: 2 });
        }
        let r0 = row[n - 1];
        let r = (1..n).map(|d| row[n - 1 - d]).collect();
        Self::new(r0, r)
    }
}

// ---------------------------------------------------------------------------
// closed-form values
// ---------------------------------------------------------------------------

/// Kemeny's constant of a completion whose first `n-1` rows are 0/1 with a
/// cycle on `k` of them: `(2n - k - 3)/2 + 1/(1 - r0)`.
pub fn row_cycle_value(n: usize, k: usize, r0: f64) -> Result<f64> {
    if !(2..=n.saturating_sub(1)).contains(&k) {
        return Err(Error::BadCycleLength { k, n });
    }
    if !(0.0..1.0).contains(&r0) {
        return Err(Error::DiagonalAtOne { index: n - 1, value: r0 });
    }
    Ok((2 * n - k - 3) as f64 / 2.0 + 1.0 / (1.0 - r0))
}

/// Kemeny's constant of a completion in which every cycle passes through the
/// specified state, from the distance-class aggregates
/// `rtilde[j] = sum of row values at distance j` (with `rtilde[0] = r0`):
/// `n - 1 - sum j(j+1) rt_j / (2 sum (j+1) rt_j)`.
pub fn row_path_value(rtilde: &[f64], n: usize) -> Result<f64> {
    let d = rtilde.len();
    if d == 0 {
        return Err(Error::EmptyPartition);
    }
    if d > n {
        return Err(Error::DimensionTooSmall { n, min: d });
    }
    for (j, &v) in rtilde.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::NegativeValue { index: j, value: v });
        }
    }
    let sum = compensated_sum(rtilde.iter().copied());
    if (sum - 1.0).abs() > ROW_MASS_TOL {
        return Err(Error::MassNotOne { sum, tol: ROW_MASS_TOL });
    }
    let num: f64 = rtilde
        .iter()
        .enumerate()
        .map(|(j, &v)| (j * (j + 1)) as f64 * v)
        .sum();
    let den: f64 = rtilde
        .iter()
        .enumerate()
        .map(|(j, &v)| (j + 1) as f64 * v)
        .sum();
    Ok((n - 1) as f64 - num / (2.0 * den))
}

/// The placement objective
/// `gamma = sum_d d(d+1) v_d / (r0 + sum_d (d+1) v_d)` for the ordered values
/// `v_d = ordered[d-1]`; the path-case Kemeny value is `n-1 - gamma/2`.
pub fn objective_gamma(r0: f64, ordered: &[f64]) -> f64 {
    let num: f64 = ordered
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) * (i + 2)) as f64 * v)
        .sum();
    let den: f64 = r0
        + ordered
            .iter()
            .enumerate()
            .map(|(i, &v)| (i + 2) as f64 * v)
            .sum::<f64>();
    num / den
}

/// Sign of the gamma change caused by exchanging the values at distances
/// `d1 < d2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapSign {
    Positive,
    Zero,
    Negative,
}

/// The gamma change under the exchange of positions `d1 < d2` has the sign of
/// `(v_{d1} - v_{d2}) (d1 + d2 + 1 - gamma)`.
pub fn swap_sign(r0: f64, ordered: &[f64], d1: usize, d2: usize) -> Result<SwapSign> {
    let m = ordered.len();
    if d1 < 1 || d1 >= d2 || d2 > m {
        return Err(Error::BadIndices { j1: d1, j2: d2, max: m });
    }
    let gamma = objective_gamma(r0, ordered);
    let product = (ordered[d1 - 1] - ordered[d2 - 1]) * ((d1 + d2 + 1) as f64 - gamma);
    Ok(if product.abs() <= 1e-12 {
        SwapSign::Zero
    } else if product > 0.0 {
        SwapSign::Positive
    } else {
        SwapSign::Negative
    })
}

// ---------------------------------------------------------------------------
// canonical orderings and the gamma maximum
// ---------------------------------------------------------------------------

/// The canonical index permutation for parameter `k` on `m = n-1` positions:
/// position `d` (1-based) receives sorted index
/// `k-2d` for `d <= floor((k-1)/2)`, `2d-k+1` for `ceil(k/2) <= d <= k-2`,
/// and `d` beyond (returned 0-based).
pub fn canonical_permutation(m: usize, k: usize) -> Result<Vec<usize>> {
    // positions live in 1..=m, so valid k range is 4..=m-1 (i.e. 4..=n-2)
    if k < 4 || k + 1 > m {
        return Err(Error::BadK { k, max: m.saturating_sub(1) });
    }
    let mut perm = vec![0usize; m];
    for d in 1..=m {
        let rho_index = if d <= (k - 1) / 2 {
            k - 2 * d
        } else if d >= k.div_ceil(2) && d <= k - 2 {
            2 * d - k + 1
        } else {
            d
        };
        perm[d - 1] = rho_index - 1;
    }
    Ok(perm)
}

/// Applies [`canonical_permutation`] to a sorted-nondecreasing value slice.
pub fn canonical_ordering(rho: &[f64], k: usize) -> Result<Vec<f64>> {
    for i in 1..rho.len() {
        if rho[i] < rho[i - 1] {
            return Err(Error::NotSorted { index: i });
        }
    }
    let perm = canonical_permutation(rho.len(), k)?;
    Ok(perm.into_iter().map(|i| rho[i]).collect())
}

/// An evaluated placement of the row values.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCandidate {
    /// `sigma[d-1]` is the 0-based index into the sorted values placed at
    /// distance `d`.
    pub sigma: Vec<usize>,
    /// The placed values themselves (`values[d-1]` at distance `d`).
    pub values: Vec<f64>,
    /// The placement objective.
    pub gamma: f64,
    /// `n - 1 - gamma/2`.
    pub kemeny: f64,
}

/// Which case of the ordering analysis produced the maximum.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderingCase {
    /// All mass at the far end (`r_{n-1} = 1`): `gamma = n-1`.
    Degenerate,
    /// `gamma < 4`: the sorted nondecreasing placement is optimal.
    Sorted,
    /// `gamma > 4`, non-integer: the canonical ordering for `k = floor(gamma)`
    /// is the unique optimum.
    CanonicalUnique { k: usize },
    /// `gamma = k` integer: the canonical ordering is optimal together with
    /// its exchange family.
    CanonicalFamily { k: usize },
}

/// The gamma maximum over the reduced candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMax {
    pub gamma: f64,
    pub ordering: OrderingCandidate,
    pub case: OrderingCase,
}

fn candidate(spec: &RowSpec, sigma: Vec<usize>, rho: &[f64]) -> OrderingCandidate {
    let values: Vec<f64> = sigma.iter().map(|&i| rho[i]).collect();
    let gamma = objective_gamma(spec.r0(), &values);
    let kemeny = (spec.n() - 1) as f64 - gamma / 2.0;
    OrderingCandidate { sigma, values, gamma, kemeny }
}

/// Maximizes gamma over the candidate set {sorted} union
/// {canonical ordering for k = 4..n-2} and classifies the maximum.
pub fn maximize_gamma(spec: &RowSpec) -> GammaMax {
    let n = spec.n();
    let m = n - 1;
    let rho = spec.sorted_values();
    // all mass on one off-diagonal value: gamma = n-1 at the far end
    if rho[m - 1] == 1.0 {
        let ordering = candidate(spec, (0..m).collect(), &rho);
        return GammaMax { gamma: (n - 1) as f64, ordering, case: OrderingCase::Degenerate };
    }
    let mut cands = vec![candidate(spec, (0..m).collect(), &rho)];
    for k in 4..=n.saturating_sub(2) {
        let perm = canonical_permutation(m, k).expect("k in range");
        cands.push(candidate(spec, perm, &rho));
    }
    let gamma_max = cands.iter().map(|c| c.gamma).fold(f64::NEG_INFINITY, f64::max);
    // ties resolved toward the lexicographically smallest value vector
    let best = cands
        .iter()
        .filter(|c| c.gamma >= gamma_max - 1e-12)
        .min_by(|a, b| a.values.partial_cmp(&b.values).unwrap())
        .expect("candidate set nonempty")
        .clone();
    let rounded = gamma_max.round();
    let case = if (gamma_max - rounded).abs() <= GAMMA_INTEGER_WINDOW
        && rounded >= 4.0
        && rounded <= (n - 2) as f64
    {
        OrderingCase::CanonicalFamily { k: rounded as usize }
    } else if gamma_max > 4.0 {
        OrderingCase::CanonicalUnique { k: gamma_max.floor() as usize }
    } else {
        OrderingCase::Sorted
    };
    GammaMax { gamma: gamma_max, ordering: best, case }
}

// ---------------------------------------------------------------------------
// witnesses and the solver
// ---------------------------------------------------------------------------

/// The path witness for an ordering: superdiagonal ones, last row carrying
/// `ordering[d-1]` at column `n-1-d` and `r0` on the diagonal.
pub fn path_completion(ordering: &[f64], r0: f64) -> StochasticMatrix {
    let n = ordering.len() + 1;
    let mut rows = vec![vec![0.0; n]; n];
    for j in 0..n - 1 {
        rows[j][j + 1] = 1.0;
    }
    for (idx, &v) in ordering.iter().enumerate() {
        rows[n - 1][n - 1 - (idx + 1)] = v;
    }
    rows[n - 1][n - 1] = r0;
    StochasticMatrix::from_rows(&rows).expect("path witness is stochastic")
}

/// The cycle witness: states `0..n-2` form a cycle and the last row is the
/// specified row itself.
pub fn cycle_completion(spec: &RowSpec) -> StochasticMatrix {
    let n = spec.n();
    let mut rows = vec![vec![0.0; n]; n];
    for j in 0..n - 1 {
        let succ = if j < n - 2 { j + 1 } else { 0 };
        rows[j][succ] = 1.0;
    }
    rows[n - 1] = spec.last_row();
    StochasticMatrix::from_rows(&rows).expect("cycle witness is stochastic")
}

/// Solves the completion problem for a fully specified row.
pub fn solve_row(spec: &RowSpec) -> Result<CompletionSolution> {
    let n = spec.n();
    let r0 = spec.r0();
    if r0 == 1.0 {
        // absorbing specified state; a path feeding it attains K = n-1
        let ordering = spec.sorted_values();
        let witness = path_completion(&ordering, r0);
        let value = (n - 1) as f64;
        let recomputed = witness.kemeny_trace()?;
        if (recomputed - value).abs() > WITNESS_TOL {
            return Err(Error::VerificationFailed { reported: value, recomputed });
        }
        return Ok(CompletionSolution {
            value,
            witness,
            method: Method::RowAbsorbing,
            structure: CompletionStructure::AbsorbingRow { row: n - 1 },
            uniqueness: Uniqueness::Unknown,
        });
    }
    let gm = maximize_gamma(spec);
    let path_value = (n - 1) as f64 - gm.gamma / 2.0;
    let cycle_value = (n - 2) as f64 / 2.0 + 1.0 / (1.0 - r0);
    let (value, witness, method, structure, uniqueness) = if cycle_value < path_value {
        (
            cycle_value,
            cycle_completion(spec),
            Method::RowCycle,
            CompletionStructure::RemainderCycle { cycle_len: n - 1 },
            Uniqueness::Unknown,
        )
    } else {
        let uniqueness = match gm.case {
            OrderingCase::CanonicalFamily { k } => Uniqueness::ExchangeFamily {
                k,
                swappable: (1..k / 2).collect(),
            },
            _ => Uniqueness::Unique,
        };
        (
            path_value,
            path_completion(&gm.ordering.values, r0),
            Method::RowPath,
            CompletionStructure::PathOrdering { distance_values: gm.ordering.values.clone() },
            uniqueness,
        )
    };
    let recomputed = witness.kemeny_trace()?;
    if (recomputed - value).abs() > WITNESS_TOL {
        return Err(Error::VerificationFailed { reported: value, recomputed });
    }
    Ok(CompletionSolution { value, witness, method, structure, uniqueness })
}

// ---------------------------------------------------------------------------
// regime instances
// ---------------------------------------------------------------------------

/// Builds a row spec whose gamma-maximizing placement is the canonical
/// ordering with parameter `k`, unique when `gamma > k`.
///
/// The construction puts `eps * c[d-1]` at distances `d = 1..n-2` and
/// `1 - eps` at distance `n-1`, then scales by `1 - r0` where
/// `1 - r0 = gamma / ((1-eps)(n-1)(n-gamma) + eps sum d c_d (d+1-gamma))`.
/// The weight layout `(eps*c, 1-eps)` must already follow the canonical
/// ordering for `k`.
pub fn regime_instance(n: usize, k: usize, gamma: f64, eps: f64, c: &[f64]) -> Result<RowSpec> {
    if k < 4 || k + 2 > n {
        return Err(Error::BadK { k, max: n.saturating_sub(2) });
    }
    if !(gamma >= k as f64 && gamma < (k + 1) as f64) {
        return Err(Error::ParameterOutOfRange {
            name: "gamma",
            value: gamma,
            expected: "[k, k+1)",
        });
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::ParameterOutOfRange { name: "eps", value: eps, expected: "(0, 1/2)" });
    }
    if c.len() != n - 2 {
        return Err(Error::DimensionTooSmall { n: c.len(), min: n - 2 });
    }
    for (i, &v) in c.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::NegativeValue { index: i, value: v });
        }
    }
    let csum = compensated_sum(c.iter().copied());
    if (csum - 1.0).abs() > ROW_MASS_TOL {
        return Err(Error::MassNotOne { sum: csum, tol: ROW_MASS_TOL });
    }
    let mut rhat: Vec<f64> = c.iter().map(|&v| eps * v).collect();
    rhat.push(1.0 - eps);
    let mut sorted = rhat.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if canonical_ordering(&sorted, k)? != rhat {
        return Err(Error::NotCanonicalOrder { k });
    }
    let tail = (1.0 - eps) * ((n - 1) as f64) * (n as f64 - gamma);
    let head: f64 = eps
        * c.iter()
            .enumerate()
            .map(|(i, &v)| {
                let d = (i + 1) as f64;
                d * v * (d + 1.0 - gamma)
            })
            .sum::<f64>();
    let one_minus_r0 = gamma / (tail + head);
    let r0 = 1.0 - one_minus_r0;
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::R0OutOfRange { r0 });
    }
    let r: Vec<f64> = rhat.iter().map(|&v| one_minus_r0 * v).collect();
    let spec = RowSpec::new(r0, r)?;
    let achieved = objective_gamma(spec.r0(), spec.values());
    if (achieved - gamma).abs() > 1e-9 {
        return Err(Error::VerificationFailed { reported: gamma, recomputed: achieved });
    }
    Ok(spec)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
