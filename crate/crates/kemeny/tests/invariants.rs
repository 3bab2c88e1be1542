//! Module-level invariants exercised on seeded random corpora.

mod common;

use common::*;
use kemeny::diag;
use kemeny::oracle;
use kemeny::partial::{Cell, PartialStochasticMatrix};
use kemeny::row;
use nalgebra::DMatrix;
use rand::Rng;

// ---------------------------------------------------------------------------
// markov kernel
// ---------------------------------------------------------------------------

#[test]
fn three_kemeny_routes_agree_for_every_grounding() {
    let mut rng = rng(101);
    for trial in 0..200 {
        let n = rng.gen_range(2..=8);
        let t = if trial % 2 == 0 {
            random_dense_irreducible(&mut rng, n)
        } else {
            random_irreducible(&mut rng, n)
        };
        let k_trace = t.kemeny_trace().unwrap();
        let k_eigen = t.kemeny_eigen().unwrap();
        assert!(
            (k_trace - k_eigen).abs() <= 1e-7,
            "trace {k_trace} vs eigen {k_eigen} at n={n} trial={trial}"
        );
        for g in 0..n {
            let k_g = t.kemeny_grounded(g).unwrap();
            assert!(
                (k_trace - k_g).abs() <= 1e-7,
                "trace {k_trace} vs grounded({g}) {k_g} at n={n} trial={trial}"
            );
        }
    }
}

#[test]
fn kemeny_lower_bound_holds() {
    let mut rng = rng(102);
    for _ in 0..200 {
        let n = rng.gen_range(2..=8);
        let t = random_irreducible(&mut rng, n);
        let k = t.kemeny_trace().unwrap();
        assert!(k >= (n as f64 - 1.0) / 2.0 - 1e-9, "K = {k} below bound at n = {n}");
    }
}

// The cosine-form gap bound fails below n = 4 (the 2-cycle has gap 2 against
// a claimed bound of 4), so it is asserted on n >= 4 only; the bound
// sin(pi/n)/K holds for every n and is asserted throughout.
#[test]
fn eigenvalue_gap_bound_holds() {
    let mut rng = rng(103);
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let t = random_irreducible(&mut rng, n);
        let k = t.kemeny_trace().unwrap();
        let theta = std::f64::consts::PI / n as f64;
        let cos_bound = (1.0 - (2.0 * theta).cos()) / k;
        let sin_bound = theta.sin() / k;
        let eig = t.spectrum();
        let nearest = eig
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let da = (*a - nalgebra::Complex::new(1.0, 0.0)).norm();
                let db = (*b - nalgebra::Complex::new(1.0, 0.0)).norm();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()
            .0;
        for (idx, lam) in eig.iter().enumerate() {
            if idx == nearest {
                continue;
            }
            let dist = (nalgebra::Complex::new(1.0, 0.0) - lam).norm();
            assert!(dist >= sin_bound - 1e-9, "gap {dist} below {sin_bound} at n = {n}");
            if n >= 4 {
                assert!(dist >= cos_bound - 1e-9, "gap {dist} below {cos_bound} at n = {n}");
            }
        }
    }
}

#[test]
fn variance_identity_holds() {
    let mut rng = rng(104);
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let t = random_dense_irreducible(&mut rng, n);
        let w = t.stationary_vector().unwrap();
        let var = t.return_time_variances().unwrap();
        for k in 0..n {
            assert!(var[k] >= -1e-8, "negative variance {}", var[k]);
        }
        let lhs: f64 =
            0.5 * (0..n).map(|k| w[k] * w[k] * var[k]).sum::<f64>() + (n as f64 - 1.0) / 2.0;
        let k = t.kemeny_trace().unwrap();
        assert!((lhs - k).abs() <= 1e-8, "identity off: {lhs} vs {k}");
    }
}

#[test]
fn group_inverse_axioms_on_random_chains() {
    let mut rng = rng(105);
    for _ in 0..100 {
        let n = rng.gen_range(2..=7);
        let t = random_irreducible(&mut rng, n);
        let q = DMatrix::identity(n, n) - t.matrix();
        let qg = t.group_inverse().unwrap();
        assert!(((&q * &qg * &q) - &q).abs().max() < 1e-8);
        assert!(((&qg * &q * &qg) - &qg).abs().max() < 1e-8);
        assert!(((&q * &qg) - (&qg * &q)).abs().max() < 1e-8);
    }
}

#[test]
fn substochastic_trace_bound_holds() {
    let mut rng = rng(106);
    for _ in 0..200 {
        let n = rng.gen_range(1..=8);
        let s = random_substochastic(&mut rng, n);
        let mut i_minus_s = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            for j in 0..n {
                i_minus_s[(i, j)] -= s[i][j];
            }
        }
        let inv = i_minus_s.try_inverse().unwrap();
        let rhs: f64 = (0..n).map(|k| 1.0 / (1.0 - s[k][k])).sum();
        assert!(inv.trace() >= rhs - 1e-9, "trace bound violated at n = {n}");
    }
}

#[test]
fn rank_one_update_matches_direct_on_random_moves() {
    let mut rng = rng(107);
    let mut done = 0;
    while done < 200 {
        let n = rng.gen_range(2..=6);
        let t = random_dense_irreducible(&mut rng, n);
        let i = rng.gen_range(0..n);
        let p = rng.gen_range(0..n);
        let q = rng.gen_range(0..n);
        if p == q {
            continue;
        }
        let x = rng.gen_range(-t.entry(i, p)..=t.entry(i, q));
        let perturbed = t.perturbed_rank_one(i, p, q, x).unwrap();
        if !perturbed.single_essential() {
            continue;
        }
        let fast = t.kemeny_rank_one_update(i, p, q, x).unwrap();
        let direct = perturbed.kemeny_trace().unwrap();
        assert!((fast - direct).abs() <= 1e-8, "{fast} vs {direct}");
        done += 1;
    }
}

// ---------------------------------------------------------------------------
// partial matrices
// ---------------------------------------------------------------------------

/// All grids over {Specified(0), Specified(0.5), Specified(1), Free}.
fn alphabet_grids(n: usize) -> impl Iterator<Item = Vec<Vec<Cell>>> {
    let letters = [Cell::Specified(0.0), Cell::Specified(0.5), Cell::Specified(1.0), Cell::Free];
    let cells = n * n;
    (0..4usize.pow(cells as u32)).map(move |code| {
        let mut rem = code;
        (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let c = letters[rem % 4];
                        rem /= 4;
                        c
                    })
                    .collect()
            })
            .collect()
    })
}

#[test]
fn feasibility_shortcut_equals_subset_oracle_exhaustive() {
    for n in [2usize, 3] {
        let mut valid = 0usize;
        for grid in alphabet_grids(n) {
            if let Ok(p) = PartialStochasticMatrix::from_cells(grid) {
                valid += 1;
                assert_eq!(
                    p.feasible_single_class(),
                    p.feasible_subset_check().unwrap(),
                    "mismatch on {}",
                    p.to_text()
                );
            }
        }
        assert!(valid > 0);
    }
}

#[test]
fn feasibility_shortcut_equals_subset_oracle_random_n4() {
    let mut rng = rng(108);
    let letters = [Cell::Specified(0.0), Cell::Specified(0.5), Cell::Specified(1.0), Cell::Free];
    // rejection-sample rows so every grid is a valid partial matrix
    let mut row_pool: Vec<Vec<Cell>> = Vec::new();
    for code in 0..4usize.pow(4) {
        let mut rem = code;
        let row: Vec<Cell> = (0..4)
            .map(|_| {
                let c = letters[rem % 4];
                rem /= 4;
                c
            })
            .collect();
        let mut grid = vec![row.clone()];
        grid.extend((0..3).map(|_| vec![Cell::Free; 4]));
        if PartialStochasticMatrix::from_cells(grid).is_ok() {
            row_pool.push(row);
        }
    }
    for _ in 0..10_000 {
        let grid: Vec<Vec<Cell>> =
            (0..4).map(|_| row_pool[rng.gen_range(0..row_pool.len())].clone()).collect();
        let p = PartialStochasticMatrix::from_cells(grid).unwrap();
        assert_eq!(p.feasible_single_class(), p.feasible_subset_check().unwrap());
    }
}

#[test]
fn sparse_patterns_stay_stochastic_and_cover_feasibility() {
    let mut rng = rng(109);
    for _ in 0..60 {
        let n = rng.gen_range(2..=6);
        let p = random_partial(&mut rng, n);
        let mut any_single = false;
        for (pattern, t) in p.sparse_patterns() {
            for i in 0..n {
                let sum: f64 = (0..n).map(|j| t.entry(i, j)).sum();
                assert!((sum - 1.0).abs() <= 1e-12);
                if let Some(c) = pattern.residual_columns[i] {
                    assert!(p.cell(i, c).is_free());
                }
            }
            any_single |= t.single_essential();
        }
        if p.feasible_single_class() {
            assert!(any_single, "feasible P without feasible sparse pattern:\n{}", p.to_text());
        }
    }
}

// ---------------------------------------------------------------------------
// diagonal completion
// ---------------------------------------------------------------------------

#[test]
fn diagonal_sparse_patterns_follow_the_s_sequence() {
    let mut rng = rng(110);
    for _ in 0..25 {
        let n = rng.gen_range(3..=5);
        let d = random_diagonal(&mut rng, n, 0.9);
        let x: Vec<f64> = d.iter().map(|&v| 1.0 / (1.0 - v)).collect();
        let p = diagonal_partial(&d);
        let m_p = diag::solve_diagonal(&d).unwrap().value;
        for (pattern, t) in p.sparse_patterns() {
            if !t.single_essential() {
                continue;
            }
            // functional digraph: follow successors to find the unique cycle
            let succ: Vec<usize> = pattern
                .residual_columns
                .iter()
                .map(|c| c.expect("diagonal specs leave every row free"))
                .collect();
            let mut seen = vec![false; n];
            let mut at = 0usize;
            while !seen[at] {
                seen[at] = true;
                at = succ[at];
            }
            let mut cycle = vec![at];
            let mut walk = succ[at];
            while walk != at {
                cycle.push(walk);
                walk = succ[walk];
            }
            let cyc_x: Vec<f64> = cycle.iter().map(|&j| x[j]).collect();
            let s: f64 = cyc_x.iter().sum();
            let s2: f64 = cyc_x.iter().map(|v| v * v).sum();
            let tail: f64 = (0..n).filter(|j| !cycle.contains(j)).map(|j| x[j]).sum();
            let expected = (s * s - s2) / (2.0 * s) + tail;
            let k = t.kemeny_trace().unwrap();
            assert!((k - expected).abs() <= 1e-9, "pattern K {k} vs s-formula {expected}");
            if cycle.len() < n {
                assert!(k > m_p + 1e-12, "short cycle not worse: {k} vs {m_p}");
            }
        }
    }
}

#[test]
fn diagonal_value_increases_in_each_entry() {
    let mut rng = rng(111);
    for _ in 0..300 {
        let n = rng.gen_range(2..=7);
        let d = random_diagonal(&mut rng, n, 0.8);
        let j = rng.gen_range(0..n);
        let mut bumped = d.clone();
        bumped[j] += 0.1;
        let base = diag::solve_diagonal(&d).unwrap().value;
        let more = diag::solve_diagonal(&bumped).unwrap().value;
        assert!(more > base + 1e-12, "not increasing: {base} -> {more}");
    }
}

#[test]
fn cycle_perturbation_strictly_increases_kemeny() {
    let mut rng = rng(112);
    for _ in 0..100 {
        let n = rng.gen_range(3..=7);
        let d = random_diagonal(&mut rng, n, 0.9);
        let t = diag::cycle_completion(&d);
        let base = t.kemeny_trace().unwrap();
        let k_state = rng.gen_range(2..=n - 1); // paper's k in 2..n-1, 1-based
        for x in [0.1 * (1.0 - d[n - 1]), 1.0 - d[n - 1]] {
            let perturbed = t.perturbed_rank_one(n - 1, k_state - 1, 0, x).unwrap();
            let k = perturbed.kemeny_trace().unwrap();
            assert!(k > base + 1e-12, "perturbed {k} not above {base}");
        }
    }
}

#[test]
fn non_cycle_completions_are_strictly_worse() {
    let mut rng = rng(113);
    for _ in 0..50 {
        let n = rng.gen_range(3..=6);
        let d = random_diagonal(&mut rng, n, 0.9);
        let m_p = diag::solve_diagonal(&d).unwrap().value;
        let t = dense_diagonal_completion(&mut rng, &d);
        assert!(t.single_essential());
        assert!(!diag::is_diagonal_minimizer(&t, &d).unwrap());
        let k = t.kemeny_trace().unwrap();
        assert!(k > m_p + 1e-12, "dense completion too good: {k} vs {m_p}");
    }
}

#[test]
fn padding_consistency() {
    let mut rng = rng(114);
    for _ in 0..100 {
        let n = rng.gen_range(3..=8);
        let k = rng.gen_range(0..n);
        let d = random_diagonal(&mut rng, k, 0.9);
        let partial = diag::solve_partial_diagonal(&d, n).unwrap().value;
        let mut padded = d.clone();
        padded.resize(n, 0.0);
        let full = diag::solve_diagonal(&padded).unwrap().value;
        assert!((partial - full).abs() <= 1e-12);
    }
}

// ---------------------------------------------------------------------------
// row completion
// ---------------------------------------------------------------------------

#[test]
fn row_witnesses_verify_and_match_oracles() {
    let mut rng = rng(115);
    for trial in 0..60 {
        let n = rng.gen_range(3..=7);
        let spec = random_row_spec(&mut rng, n);
        let sol = row::solve_row(&spec).unwrap();
        assert!(sol.witness.single_essential());
        assert!((sol.witness.kemeny_trace().unwrap() - sol.value).abs() <= 1e-9);
        let brute = oracle::perm_bruteforce_row(&spec).unwrap();
        assert!(
            (sol.value - brute.best_value).abs() <= 1e-10,
            "solve {} vs brute {} (trial {trial})",
            sol.value,
            brute.best_value
        );
        if n <= 5 {
            let p = row_partial(&spec);
            let enumerated = oracle::sparse_enumeration_min(&p, 1_000_000).unwrap();
            assert!(
                (sol.value - enumerated.best_value).abs() <= 1e-9,
                "solve {} vs sparse enum {}",
                sol.value,
                enumerated.best_value
            );
        }
    }
}

#[test]
fn distance_class_split_never_decreases_gamma() {
    let mut rng = rng(116);
    for _ in 0..1000 {
        let d = rng.gen_range(2..=8);
        let rtilde = random_simplex(&mut rng, d);
        let j0 = rng.gen_range(1..d);
        let fraction = rng.gen_range(0.0..1.0);
        let moved = rtilde[j0] * fraction;
        let mut split = rtilde.clone();
        split[j0] -= moved;
        split.push(moved);
        let ratio = |v: &[f64]| {
            let num: f64 =
                v.iter().enumerate().map(|(j, &x)| (j * (j + 1)) as f64 * x).sum();
            let den: f64 = v.iter().enumerate().map(|(j, &x)| (j + 1) as f64 * x).sum();
            num / den
        };
        let g = ratio(&rtilde);
        let h = ratio(&split);
        assert!(h >= g - 1e-12, "split decreased the ratio: {g} -> {h}");
    }
}

#[test]
fn sorted_ordering_attains_small_gamma_maxima() {
    let mut rng = rng(117);
    let mut checked = 0;
    while checked < 60 {
        let n = rng.gen_range(3..=6);
        let spec = random_row_spec(&mut rng, n);
        let brute = brute_force_gamma(&spec);
        if brute.0 >= 4.0 {
            continue;
        }
        let sorted = spec.sorted_values();
        let got = row::objective_gamma(spec.r0(), &sorted);
        assert!(
            (got - brute.0).abs() <= 1e-12,
            "sorted gamma {got} misses brute max {}",
            brute.0
        );
        checked += 1;
    }
}

#[test]
fn corollary_for_small_n_uses_two_branch_minimum() {
    let mut rng = rng(118);
    for _ in 0..200 {
        let n = rng.gen_range(3..=5);
        let spec = random_row_spec(&mut rng, n);
        if spec.r0() == 1.0 {
            continue;
        }
        let sol = row::solve_row(&spec).unwrap();
        let cycle = (n as f64 - 2.0) / 2.0 + 1.0 / (1.0 - spec.r0());
        let sorted_gamma = row::objective_gamma(spec.r0(), &spec.sorted_values());
        let path = (n as f64 - 1.0) - sorted_gamma / 2.0;
        assert!((sol.value - cycle.min(path)).abs() <= 1e-12);
    }
}

#[test]
fn kemeny_path_identity_matches_gamma() {
    let mut rng = rng(119);
    for _ in 0..200 {
        let n = rng.gen_range(2..=8);
        let spec = random_row_spec(&mut rng, n);
        let gamma = row::objective_gamma(spec.r0(), spec.values());
        let mut rtilde = vec![spec.r0()];
        rtilde.extend_from_slice(spec.values());
        let k = row::row_path_value(&rtilde, n).unwrap();
        assert!((k - ((n as f64 - 1.0) - gamma / 2.0)).abs() <= 1e-12);
    }
}

/// Brute-force gamma maximum over all orderings; returns (max, argmax values).
fn brute_force_gamma(spec: &kemeny::RowSpec) -> (f64, Vec<Vec<f64>>) {
    use itertools::Itertools;
    let m = spec.n() - 1;
    let vals = spec.values();
    let mut best = f64::NEG_INFINITY;
    let mut argmax: Vec<Vec<f64>> = Vec::new();
    for perm in (0..m).permutations(m) {
        let ordering: Vec<f64> = perm.iter().map(|&i| vals[i]).collect();
        let g = row::objective_gamma(spec.r0(), &ordering);
        if g > best + 1e-12 {
            best = g;
            argmax = vec![ordering];
        } else if (g - best).abs() <= 1e-12 && !argmax.contains(&ordering) {
            argmax.push(ordering);
        }
    }
    (best, argmax)
}
