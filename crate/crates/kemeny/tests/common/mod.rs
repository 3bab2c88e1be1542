//! Shared random-instance generators for the integration suites.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use kemeny::partial::Cell;
use kemeny::{PartialStochasticMatrix, RowSpec, StochasticMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive random rows, hence irreducible.
pub fn random_dense_irreducible(rng: &mut ChaCha8Rng, n: usize) -> StochasticMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.02..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / sum).collect()
        })
        .collect();
    StochasticMatrix::from_rows(&rows).unwrap()
}

/// Sparser irreducible matrices: random support plus a guaranteed cycle.
pub fn random_irreducible(rng: &mut ChaCha8Rng, n: usize) -> StochasticMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut raw: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.05..1.0) } else { 0.0 })
                .collect();
            raw[(i + 1) % n] += rng.gen_range(0.05..0.5);
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / sum).collect()
        })
        .collect();
    StochasticMatrix::from_rows(&rows).unwrap()
}

/// Entrywise nonnegative with row sums in (0, 0.98]: spectral radius < 1.
pub fn random_substochastic(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let target = rng.gen_range(0.2..0.98);
            raw.into_iter().map(|v| v * target / sum).collect()
        })
        .collect()
}

/// Random point of the probability simplex with `len` coordinates.
pub fn random_simplex(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| -rng.gen_range(1e-6_f64..1.0).ln()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Random diagonal values in `[0, hi]`.
pub fn random_diagonal(rng: &mut ChaCha8Rng, n: usize, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..=hi)).collect()
}

/// Random row spec; occasionally quantized to produce ties and zeros.
pub fn random_row_spec(rng: &mut ChaCha8Rng, n: usize) -> RowSpec {
    let m = n - 1;
    let mut vals = random_simplex(rng, m + 1);
    if rng.gen_bool(0.4) {
        // quantize the off-diagonal part onto a 1/12 grid
        for v in vals.iter_mut().take(m) {
            *v = (*v * 12.0).floor() / 12.0;
        }
    }
    let r: Vec<f64> = vals[..m].to_vec();
    let used: f64 = r.iter().sum();
    let r0 = (1.0 - used).max(0.0);
    RowSpec::new(r0, r).unwrap()
}

/// Partial matrix with only the diagonal specified.
pub fn diagonal_partial(d: &[f64]) -> PartialStochasticMatrix {
    let n = d.len();
    let mut grid = vec![vec![Cell::Free; n]; n];
    for (j, &v) in d.iter().enumerate() {
        grid[j][j] = Cell::Specified(v);
    }
    PartialStochasticMatrix::from_cells(grid).unwrap()
}

/// Partial matrix with only the last row specified, carrying `spec`.
pub fn row_partial(spec: &RowSpec) -> PartialStochasticMatrix {
    let n = spec.n();
    let mut grid = vec![vec![Cell::Free; n]; n];
    grid[n - 1] = spec.last_row().into_iter().map(Cell::Specified).collect();
    PartialStochasticMatrix::from_cells(grid).unwrap()
}

/// Random valid partial matrix: each row is either fully specified or leaves
/// at least two free cells with slack mass.
pub fn random_partial(rng: &mut ChaCha8Rng, n: usize) -> PartialStochasticMatrix {
    loop {
        let mut grid = vec![vec![Cell::Free; n]; n];
        for row in grid.iter_mut() {
            if n >= 2 && rng.gen_bool(0.25) {
                let vals = random_simplex(rng, n);
                let used: f64 = vals[1..].iter().sum();
                for (j, cell) in row.iter_mut().enumerate() {
                    let v = if j == 0 { (1.0 - used).max(0.0) } else { vals[j] };
                    *cell = Cell::Specified(v);
                }
            } else {
                let free_count = rng.gen_range(2..=n);
                let mut cols: Vec<usize> = (0..n).collect();
                for k in 0..free_count {
                    let pick = rng.gen_range(k..n);
                    cols.swap(k, pick);
                }
                let specified = &cols[free_count..];
                if !specified.is_empty() {
                    let budget = rng.gen_range(0.0..0.9);
                    let weights = random_simplex(rng, specified.len());
                    for (idx, &col) in specified.iter().enumerate() {
                        row[col] = Cell::Specified(budget * weights[idx]);
                    }
                }
            }
        }
        if let Ok(p) = PartialStochasticMatrix::from_cells(grid) {
            return p;
        }
    }
}

/// A uniformly random cyclic visiting order of `0..n-1`.
pub fn random_n_cycle(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let pick = rng.gen_range(k..n);
        order.swap(k, pick);
    }
    order
}

/// `D + (I-D)C` where `C` follows the cyclic visiting order.
pub fn lazy_cycle_for_order(d: &[f64], order: &[usize]) -> StochasticMatrix {
    let n = d.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        let from = order[i];
        let to = order[(i + 1) % n];
        rows[from][from] = d[from];
        rows[from][to] = 1.0 - d[from];
    }
    StochasticMatrix::from_rows(&rows).unwrap()
}

/// Dense completion of a diagonal spec: correct diagonal, residual spread
/// over all off-diagonal cells with random positive weights.
pub fn dense_diagonal_completion(
    rng: &mut ChaCha8Rng,
    d: &[f64],
) -> StochasticMatrix {
    let n = d.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        let weights = random_simplex(rng, n - 1);
        rows[i][i] = d[i];
        let mut idx = 0;
        for j in 0..n {
            if j != i {
                rows[i][j] = (1.0 - d[i]) * weights[idx].max(1e-3);
                idx += 1;
            }
        }
        let sum: f64 = rows[i].iter().sum();
        for v in rows[i].iter_mut() {
            *v /= sum;
        }
    }
    // renormalization perturbs the diagonal; fix it back exactly
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| rows[i][j]).sum();
        rows[i][i] = d[i];
        let scale = (1.0 - d[i]) / off;
        for j in 0..n {
            if j != i {
                rows[i][j] *= scale;
            }
        }
    }
    StochasticMatrix::from_rows(&rows).unwrap()
}
