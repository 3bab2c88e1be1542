//! Dense stochastic-matrix kernel.
//!
//! Provides the validated [`StochasticMatrix`] type together with its
//! structural analysis (essential classes via strongly connected components),
//! the stationary vector, the group inverse of `Q = I - T`, Kemeny's constant
//! by three independent routes (trace of the group inverse, eigenvalue sum,
//! grounded full-rank factorization), mean first passage times, accessibility
//! indices, return-time variances, and the rank-one perturbation update.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::Error;
use crate::Result;

/// Default entrywise/row-sum validation tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Tolerance for internal identity checks (stationarity, group inverse).
pub const IDENTITY_TOL: f64 = 1e-8;
/// Acceptance window around 1 for the unit eigenvalue of a stochastic matrix.
pub const UNIT_EIGENVALUE_WINDOW: f64 = 1e-6;
/// Condition-number estimate above which grounded solves are rejected.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Compensated (Neumaier) summation; keeps per-row residuals bit-stable.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

// ---------------------------------------------------------------------------
// StochasticMatrix
// ---------------------------------------------------------------------------

/// A validated row-stochastic matrix.
///
/// Entries are clamped to `[0,1]` and each row is renormalized to unit sum
/// during construction; rows whose sum deviates from 1 by more than the
/// validation tolerance are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    m: DMatrix<f64>,
    tol: f64,
}

impl StochasticMatrix {
    /// Validates `raw` as a stochastic matrix with tolerance `tol`.
    pub fn new(raw: DMatrix<f64>, tol: f64) -> Result<Self> {
        if raw.nrows() != raw.ncols() {
            return Err(Error::NotSquare {
                rows: raw.nrows(),
                cols: raw.ncols(),
            });
        }
        let n = raw.nrows();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut m = raw;
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                if v < -tol {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = m[(i, j)].clamp(0.0, 1.0);
            }
            let sum = compensated_sum((0..n).map(|j| m[(i, j)]));
            if (sum - 1.0).abs() > tol {
                return Err(Error::RowSumViolation { row: i, sum, tol });
            }
            if sum != 1.0 {
                for j in 0..n {
                    m[(i, j)] /= sum;
                }
            }
        }
        Ok(Self { m, tol })
    }

    /// Validates a row-major nested-vec matrix with the default tolerance.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows_tol(rows, DEFAULT_TOL)
    }

    /// Validates a row-major nested-vec matrix.
    pub fn from_rows_tol(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat), tol)
    }

    /// The adjacency matrix of the directed n-cycle `0 -> 1 -> ... -> 0`.
    pub fn n_cycle(n: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, (i + 1) % n)] = 1.0;
        }
        Self { m, tol: DEFAULT_TOL }
    }

    /// The rank-one matrix with every entry `1/n`.
    pub fn uniform(n: usize) -> Self {
        Self {
            m: DMatrix::from_element(n, n, 1.0 / n as f64),
            tol: DEFAULT_TOL,
        }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Rows as nested vecs (handy for serialization).
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.m[(i, j)]).collect())
            .collect()
    }

    /// Relabels states: entry `(a, b)` of the result is `self[(perm[a], perm[b])]`.
    ///
    /// `perm` maps new indices to old indices and must be a permutation.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n();
        assert_eq!(perm.len(), n, "permutation length mismatch");
        let mut out = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                out[(a, b)] = self.m[(perm[a], perm[b])];
            }
        }
        Self { m: out, tol: self.tol }
    }

    /// The perturbed matrix `T + x e_i (e_p - e_q)^T`, revalidated.
    pub fn perturbed_rank_one(&self, i: usize, p: usize, q: usize, x: f64) -> Result<Self> {
        let n = self.n();
        if i >= n || p >= n || q >= n {
            return Err(Error::BadIndices { j1: i.min(p), j2: q, max: n - 1 });
        }
        let mut m = self.m.clone();
        m[(i, p)] += x;
        m[(i, q)] -= x;
        Self::new(m, self.tol)
    }

    // -----------------------------------------------------------------
    // structure
    // -----------------------------------------------------------------

    /// Adjacency lists of the digraph with an arc `j -> k` iff `t_{j,k} > 0`.
    pub fn support_adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).filter(|&j| self.m[(i, j)] > 0.0).collect())
            .collect()
    }

    pub fn essential_structure(&self) -> EssentialStructure {
        EssentialStructure::of_adjacency(&self.support_adjacency())
    }

    /// True iff the whole state space is one communicating class.
    pub fn is_irreducible(&self) -> bool {
        self.essential_structure().scc_partition.len() == 1
    }

    /// True iff exactly one essential class exists (eigenvalue 1 is simple).
    pub fn single_essential(&self) -> bool {
        self.essential_structure().single_essential
    }

    fn require_single_essential(&self) -> Result<EssentialStructure> {
        let es = self.essential_structure();
        if !es.single_essential {
            return Err(Error::MultipleEssentialClasses {
                count: es.terminal_sccs.len(),
            });
        }
        Ok(es)
    }

    // -----------------------------------------------------------------
    // stationary vector and group inverse
    // -----------------------------------------------------------------

    /// The stationary vector `w` with `w^T T = w^T`, `w >= 0`, `sum w = 1`.
    ///
    /// Solves `(I - T^T) w = 0` restricted to the unique essential class, with
    /// the normalization row replacing one equation; transient states get 0.
    pub fn stationary_vector(&self) -> Result<DVector<f64>> {
        let es = self.require_single_essential()?;
        let class = &es.scc_partition[es.terminal_sccs[0]];
        let k = class.len();
        // On the essential class the restriction of T is stochastic and
        // irreducible, so replacing any one equation by the normalization
        // yields a nonsingular system.
        let mut a = DMatrix::zeros(k, k);
        for c in 0..k {
            a[(0, c)] = 1.0;
        }
        for r in 1..k {
            for c in 0..k {
                let delta = if r == c { 1.0 } else { 0.0 };
                a[(r, c)] = delta - self.m[(class[c], class[r])];
            }
        }
        let mut rhs = DVector::zeros(k);
        rhs[0] = 1.0;
        let sol = nalgebra::linalg::LU::new(a)
            .solve(&rhs)
            .ok_or(Error::SingularSystem)?;
        let mut w = DVector::zeros(self.n());
        for (b, &s) in class.iter().enumerate() {
            let v = sol[b];
            if v < -1e-10 {
                return Err(Error::SingularSystem);
            }
            w[s] = v.max(0.0);
        }
        let total = compensated_sum(w.iter().copied());
        w /= total;
        // stationarity residual check
        let resid = (0..self.n())
            .map(|j| {
                let col: f64 = (0..self.n()).map(|i| w[i] * self.m[(i, j)]).sum();
                (col - w[j]).abs()
            })
            .fold(0.0_f64, f64::max);
        if resid > IDENTITY_TOL {
            return Err(Error::SingularSystem);
        }
        Ok(w)
    }

    /// The group inverse `Q#` of `Q = I - T`, via `(Q + 1 w^T)^{-1} - 1 w^T`.
    pub fn group_inverse(&self) -> Result<DMatrix<f64>> {
        let w = self.stationary_vector()?;
        let n = self.n();
        let mut a = DMatrix::identity(n, n) - &self.m;
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] += w[j];
            }
        }
        let inv = nalgebra::linalg::LU::new(a)
            .try_inverse()
            .ok_or(Error::SingularSystem)?;
        let mut q = inv;
        for i in 0..n {
            for j in 0..n {
                q[(i, j)] -= w[j];
            }
        }
        Ok(q)
    }

    // -----------------------------------------------------------------
    // Kemeny's constant, three ways
    // -----------------------------------------------------------------

    /// Kemeny's constant as `trace(Q#)`.
    pub fn kemeny_trace(&self) -> Result<f64> {
        Ok(self.group_inverse()?.trace())
    }

    /// Kemeny's constant as `sum_{lambda != 1} 1/(1 - lambda)` over the
    /// complex spectrum, removing exactly one eigenvalue nearest to 1.
    pub fn kemeny_eigen(&self) -> Result<f64> {
        self.require_single_essential()?;
        let eig = self.m.complex_eigenvalues();
        let one = Complex::new(1.0, 0.0);
        let mut nearest = 0usize;
        let mut best = f64::INFINITY;
        for (idx, lam) in eig.iter().enumerate() {
            let d = (lam - one).norm();
            if d < best {
                best = d;
                nearest = idx;
            }
        }
        if best > UNIT_EIGENVALUE_WINDOW {
            return Err(Error::UnitEigenvalueMissing {
                window: UNIT_EIGENVALUE_WINDOW,
                nearest: best,
            });
        }
        let mut sum = Complex::new(0.0, 0.0);
        for (idx, lam) in eig.iter().enumerate() {
            if idx == nearest {
                continue;
            }
            if (lam - one).norm() <= UNIT_EIGENVALUE_WINDOW {
                return Err(Error::EigenvalueAtOne {
                    window: UNIT_EIGENVALUE_WINDOW,
                });
            }
            sum += (one - lam).inv();
        }
        if sum.im.abs() > 1e-8 {
            return Err(Error::ResidualImaginaryPart { imag: sum.im });
        }
        Ok(sum.re)
    }

    /// The complex spectrum of `T` (all `n` eigenvalues with multiplicity).
    pub fn spectrum(&self) -> Vec<Complex<f64>> {
        self.m.complex_eigenvalues().iter().copied().collect()
    }

    /// Smallest state index inside the unique essential class; the default
    /// grounding state for [`Self::kemeny_grounded`].
    pub fn default_grounding_state(&self) -> Result<usize> {
        let es = self.require_single_essential()?;
        Ok(es.scc_partition[es.terminal_sccs[0]][0])
    }

    /// Kemeny's constant through the full-rank factorization grounded at
    /// state `g`: with `S` the principal submatrix deleting row/column `g`
    /// and `u` the `g`-th row without its diagonal entry,
    /// `K = trace((I-S)^{-1}) - u^T (I-S)^{-2} 1 / (1 + u^T (I-S)^{-1} 1)`.
    ///
    /// Requires the spectral radius of `S` to be < 1, which holds whenever
    /// `g` lies in the unique essential class.
    pub fn kemeny_grounded(&self, g: usize) -> Result<f64> {
        let n = self.n();
        if g >= n {
            return Err(Error::BadIndices { j1: g, j2: g, max: n - 1 });
        }
        self.require_single_essential()?;
        if n == 1 {
            return Ok(0.0);
        }
        let keep: Vec<usize> = (0..n).filter(|&j| j != g).collect();
        let k = n - 1;
        let mut i_minus_s = DMatrix::zeros(k, k);
        for (a, &ia) in keep.iter().enumerate() {
            for (b, &jb) in keep.iter().enumerate() {
                let delta = if a == b { 1.0 } else { 0.0 };
                i_minus_s[(a, b)] = delta - self.m[(ia, jb)];
            }
        }
        let u = DVector::from_iterator(k, keep.iter().map(|&j| self.m[(g, j)]));
        let norm_a = one_norm(&i_minus_s);
        let inv = nalgebra::linalg::LU::new(i_minus_s)
            .try_inverse()
            .ok_or(Error::SpectralRadiusNotLessThanOne { cond: f64::INFINITY })?;
        let cond = norm_a * one_norm(&inv);
        if !cond.is_finite() || cond > CONDITION_LIMIT {
            return Err(Error::SpectralRadiusNotLessThanOne { cond });
        }
        let ones = DVector::from_element(k, 1.0);
        let y = &inv * &ones; // (I-S)^{-1} 1
        let z = &inv * &y; // (I-S)^{-2} 1
        let denom = 1.0 + u.dot(&y);
        Ok(inv.trace() - u.dot(&z) / denom)
    }

    // -----------------------------------------------------------------
    // passage times and related indices (irreducible chains only)
    // -----------------------------------------------------------------

    fn require_irreducible(&self) -> Result<()> {
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        Ok(())
    }

    /// Mean first passage times `m_{j,k}`, with `m_{j,j} = 1/w_j` and
    /// `m_{j,k} = (q#_{k,k} - q#_{j,k}) / w_k` for `j != k`.
    pub fn mean_first_passage(&self) -> Result<DMatrix<f64>> {
        self.require_irreducible()?;
        let w = self.stationary_vector()?;
        let q = self.group_inverse()?;
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                m[(j, k)] = if j == k {
                    1.0 / w[k]
                } else {
                    (q[(k, k)] - q[(j, k)]) / w[k]
                };
            }
        }
        Ok(m)
    }

    /// Accessibility indices `alpha_k = w^T M e_k - 1`.
    pub fn accessibility_indices(&self) -> Result<DVector<f64>> {
        let w = self.stationary_vector()?;
        let m = self.mean_first_passage()?;
        let n = self.n();
        Ok(DVector::from_iterator(
            n,
            (0..n).map(|k| (0..n).map(|j| w[j] * m[(j, k)]).sum::<f64>() - 1.0),
        ))
    }

    /// Variances of the first return times,
    /// `Var(R_k) = (2 w_k alpha_k - 1 + w_k) / w_k^2`.
    pub fn return_time_variances(&self) -> Result<DVector<f64>> {
        let w = self.stationary_vector()?;
        let alpha = self.accessibility_indices()?;
        let n = self.n();
        Ok(DVector::from_iterator(
            n,
            (0..n).map(|k| (2.0 * w[k] * alpha[k] - 1.0 + w[k]) / (w[k] * w[k])),
        ))
    }

    // -----------------------------------------------------------------
    // rank-one perturbation
    // -----------------------------------------------------------------

    /// Kemeny's constant of `T + x e_i (e_p - e_q)^T` without refactoring:
    /// `K(S_x) = K(T) + x (e_p - e_q)^T (Q#)^2 e_i / (1 - x (e_p - e_q)^T Q# e_i)`.
    ///
    /// `x` must lie in `[-t_{i,p}, t_{i,q}]` so the perturbed matrix stays
    /// stochastic.
    pub fn kemeny_rank_one_update(&self, i: usize, p: usize, q: usize, x: f64) -> Result<f64> {
        let n = self.n();
        if i >= n || p >= n || q >= n {
            return Err(Error::BadIndices { j1: i.min(p), j2: q, max: n - 1 });
        }
        let lo = -self.m[(i, p)];
        let hi = self.m[(i, q)];
        if x < lo - 1e-15 || x > hi + 1e-15 {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        let qg = self.group_inverse()?;
        let d1 = qg[(p, i)] - qg[(q, i)];
        let denom = 1.0 - x * d1;
        if denom.abs() <= 1e-12 {
            return Err(Error::DenominatorVanishes { denom });
        }
        let d2: f64 = (0..n).map(|k| (qg[(p, k)] - qg[(q, k)]) * qg[(k, i)]).sum();
        Ok(qg.trace() + x / denom * d2)
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].abs()).sum())
        .fold(0.0_f64, f64::max)
}

// ---------------------------------------------------------------------------
// EssentialStructure
// ---------------------------------------------------------------------------

/// Strongly-connected-component decomposition of a digraph together with its
/// terminal components (no out-arcs in the condensation).
///
/// The essential classes of a stochastic matrix are exactly the terminal
/// SCCs of its support digraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EssentialStructure {
    /// SCCs, each sorted ascending; together they partition `{0..n-1}`.
    pub scc_partition: Vec<Vec<usize>>,
    /// Indices into `scc_partition` of the terminal components, ascending.
    pub terminal_sccs: Vec<usize>,
    /// True iff there is exactly one terminal component.
    pub single_essential: bool,
}

impl EssentialStructure {
    /// Tarjan SCC plus terminal detection on an adjacency-list digraph.
    pub fn of_adjacency(adj: &[Vec<usize>]) -> Self {
        let sccs = tarjan_scc(adj);
        let n = adj.len();
        let mut comp_of = vec![usize::MAX; n];
        for (cid, comp) in sccs.iter().enumerate() {
            for &v in comp {
                comp_of[v] = cid;
            }
        }
        let mut has_out = vec![false; sccs.len()];
        for u in 0..n {
            for &v in &adj[u] {
                if comp_of[u] != comp_of[v] {
                    has_out[comp_of[u]] = true;
                }
            }
        }
        let terminal_sccs: Vec<usize> =
            (0..sccs.len()).filter(|&c| !has_out[c]).collect();
        let single_essential = terminal_sccs.len() == 1;
        EssentialStructure {
            scc_partition: sccs,
            terminal_sccs,
            single_essential,
        }
    }
}

/// Tarjan SCC; components are returned with members sorted ascending and the
/// component list itself sorted by smallest member.
fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        adj: &'a [Vec<usize>],
        index: usize,
        stack: Vec<usize>,
        on_stack: Vec<bool>,
        idx: Vec<Option<usize>>,
        low: Vec<usize>,
        comps: Vec<Vec<usize>>,
    }
    fn strongconnect(v: usize, st: &mut State) {
        st.idx[v] = Some(st.index);
        st.low[v] = st.index;
        st.index += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        for &w in &st.adj[v] {
            if st.idx[w].is_none() {
                strongconnect(w, st);
                st.low[v] = st.low[v].min(st.low[w]);
            } else if st.on_stack[w] {
                st.low[v] = st.low[v].min(st.idx[w].unwrap());
            }
        }
        if st.low[v] == st.idx[v].unwrap() {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().expect("stack underflow");
                st.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            st.comps.push(comp);
        }
    }
    let n = adj.len();
    let mut st = State {
        adj,
        index: 0,
        stack: Vec::new(),
        on_stack: vec![false; n],
        idx: vec![None; n],
        low: vec![0; n],
        comps: Vec::new(),
    };
    for v in 0..n {
        if st.idx[v].is_none() {
            strongconnect(v, &mut st);
        }
    }
    st.comps.sort_by_key(|c| c[0]);
    st.comps
}

// ---------------------------------------------------------------------------
// ChainAnalysis
// ---------------------------------------------------------------------------

/// Bundled analysis of a chain with a single essential class.
///
/// Passage-time quantities are only defined for irreducible chains and are
/// `None` otherwise.
#[derive(Debug, Clone)]
pub struct ChainAnalysis {
    /// Stationary vector.
    pub w: DVector<f64>,
    /// Group inverse of `I - T`.
    pub q_group_inverse: DMatrix<f64>,
    /// Kemeny's constant (trace route).
    pub kemeny: f64,
    /// Mean first passage times, irreducible chains only.
    pub mfpt: Option<DMatrix<f64>>,
    /// Accessibility indices, irreducible chains only.
    pub alpha: Option<DVector<f64>>,
    /// Return-time variances, irreducible chains only.
    pub ret_var: Option<DVector<f64>>,
}

impl ChainAnalysis {
    pub fn of(t: &StochasticMatrix) -> Result<Self> {
        let w = t.stationary_vector()?;
        let q = t.group_inverse()?;
        let kemeny = q.trace();
        let (mfpt, alpha, ret_var) = if t.is_irreducible() {
            (
                Some(t.mean_first_passage()?),
                Some(t.accessibility_indices()?),
                Some(t.return_time_variances()?),
            )
        } else {
            (None, None, None)
        };
        Ok(ChainAnalysis {
            w,
            q_group_inverse: q,
            kemeny,
            mfpt,
            alpha,
            ret_var,
        })
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
