//! Command-line front end: validate matrix files, compute Kemeny's constant,
//! solve minimal-Kemeny completions, and test feasibility.
//!
//! Exit codes: 0 success, 2 parse error, 3 validation error, 4 infeasible or
//! multiple essential classes, 5 budget exceeded, 6 numerical breakdown.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use kemeny::partial::{self, Cell, PartialStochasticMatrix};
use kemeny::row::RowSpec;
use kemeny::{diag, oracle, row, CompletionSolution, Error, Uniqueness};

const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;
const EXIT_BUDGET: u8 = 5;
const EXIT_NUMERIC: u8 = 6;

#[derive(Parser)]
#[command(
    name = "kemeny",
    version,
    about = "Kemeny's constant and minimal-Kemeny completion of partial stochastic matrices",
    after_help = "Matrix files hold the dimension on the first content line, then one line per \
                  row with whitespace-separated entries; `?` marks a free cell and `#` starts a \
                  comment. A JSON mirror {\"n\": .., \"rows\": [[..]]} is accepted when the file \
                  ends in .json. States are reported 1-based.\n\nExit codes: 0 success, 2 parse, \
                  3 validation, 4 infeasible, 5 budget, 6 numeric."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Row-sum validation tolerance for stochastic matrices.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Emit a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a matrix file; exits 0 iff valid.
    Validate {
        path: PathBuf,
    },
    /// Kemeny's constant of a fully specified stochastic matrix.
    Kemeny {
        path: PathBuf,
        /// Which formula to evaluate.
        #[arg(long, value_enum, default_value_t = MethodFlag::Trace)]
        method: MethodFlag,
    },
    /// Minimize Kemeny's constant over completions of a partial matrix.
    Complete {
        path: PathBuf,
        /// Solver selection; `auto` detects diagonal-only and single-row shapes.
        #[arg(long, value_enum, default_value_t = Strategy::Auto)]
        strategy: Strategy,
        /// Cross-check the result against the exhaustive and random oracles.
        #[arg(long)]
        verify: bool,
        /// Sparse-pattern budget for oracle runs.
        #[arg(long, default_value_t = oracle::DEFAULT_PATTERN_BUDGET)]
        budget: u64,
        /// Seed for the random-search sanity bound used by --verify.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Can some completion have a single essential class?
    Feasible {
        path: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodFlag {
    Trace,
    Eigen,
    Grounded,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Auto,
    Diag,
    Row,
    Oracle,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    use Error::*;
    match e {
        Parse { .. } => EXIT_PARSE,
        MultipleEssentialClasses { .. } | NotIrreducible | Infeasible | TwoDiagonalOnes => {
            EXIT_INFEASIBLE
        }
        BudgetExceeded { .. } => EXIT_BUDGET,
        SingularSystem
        | EigenvalueAtOne { .. }
        | UnitEigenvalueMissing { .. }
        | ResidualImaginaryPart { .. }
        | SpectralRadiusNotLessThanOne { .. }
        | DenominatorVanishes { .. }
        | VerificationFailed { .. } => EXIT_NUMERIC,
        _ => EXIT_VALIDATION,
    }
}

fn run(cli: &Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::Validate { path } => cmd_validate(cli, path).map(|()| 0),
        Command::Kemeny { path, method } => cmd_kemeny(cli, path, *method).map(|()| 0),
        Command::Complete { path, strategy, verify, budget, seed } => {
            cmd_complete(cli, path, *strategy, *verify, *budget, *seed).map(|()| 0)
        }
        Command::Feasible { path } => cmd_feasible(cli, path),
    }
}

// ---------------------------------------------------------------------------
// file loading
// ---------------------------------------------------------------------------

fn read_cells(path: &Path) -> Result<Vec<Vec<Cell>>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    if path.extension().is_some_and(|ext| ext == "json") {
        partial::parse_matrix_json(&text)
    } else {
        partial::parse_matrix_text(&text)
    }
}

fn grid_counts(grid: &[Vec<Cell>]) -> (usize, usize) {
    let free = grid.iter().flatten().filter(|c| c.is_free()).count();
    let total: usize = grid.iter().map(|r| r.len()).sum();
    (total - free, free)
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(cli: &Cli, path: &Path) -> Result<(), Error> {
    let start = Instant::now();
    let grid = read_cells(path)?;
    let (specified, free) = grid_counts(&grid);
    let kind = if free == 0 {
        partial::cells_to_stochastic(&grid, cli.tol)?;
        "stochastic"
    } else {
        PartialStochasticMatrix::from_cells(grid.clone())?;
        "partial"
    };
    let n = grid.len();
    if cli.json {
        print_json(json!({
            "command": "validate",
            "input": { "path": path.display().to_string(), "n": n,
                       "specified_cells": specified, "free_cells": free },
            "output": { "valid": true, "kind": kind },
            "diagnostics": { "elapsed_ms": ms(start) },
        }));
    } else {
        println!("ok: valid {kind} matrix (n = {n}, {specified} specified, {free} free)");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// kemeny
// ---------------------------------------------------------------------------

fn cmd_kemeny(cli: &Cli, path: &Path, method: MethodFlag) -> Result<(), Error> {
    let start = Instant::now();
    let grid = read_cells(path)?;
    let t = partial::cells_to_stochastic(&grid, cli.tol)?;
    let mut values = serde_json::Map::new();
    let mut human = Vec::new();
    let mut computed = Vec::new();
    if matches!(method, MethodFlag::Trace | MethodFlag::All) {
        let v = t.kemeny_trace()?;
        values.insert("trace".into(), json!(v));
        human.push(format!("trace: {v}"));
        computed.push(v);
    }
    if matches!(method, MethodFlag::Eigen | MethodFlag::All) {
        let v = t.kemeny_eigen()?;
        values.insert("eigen".into(), json!(v));
        human.push(format!("eigen: {v}"));
        computed.push(v);
    }
    if matches!(method, MethodFlag::Grounded | MethodFlag::All) {
        let g = t.default_grounding_state()?;
        let v = t.kemeny_grounded(g)?;
        values.insert("grounded".into(), json!(v));
        human.push(format!("grounded (state {}): {v}", g + 1));
        computed.push(v);
    }
    let max_discrepancy = computed
        .iter()
        .flat_map(|a| computed.iter().map(move |b| (a - b).abs()))
        .fold(0.0_f64, f64::max);
    if cli.json {
        print_json(json!({
            "command": "kemeny",
            "input": { "path": path.display().to_string(), "n": t.n() },
            "output": { "values": values, "max_discrepancy": max_discrepancy },
            "diagnostics": { "elapsed_ms": ms(start) },
        }));
    } else {
        println!("n: {}", t.n());
        for line in human {
            println!("{line}");
        }
        if method == MethodFlag::All {
            println!("max discrepancy: {max_discrepancy:e}");
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// complete
// ---------------------------------------------------------------------------

/// Where the specified cells of a partial matrix sit.
#[derive(Debug, PartialEq)]
enum SpecifiedShape {
    /// Every specified cell is on the diagonal (includes the empty spec).
    DiagonalOnly { diag: Vec<Option<f64>> },
    /// All specified cells form one fully specified row.
    SingleRow { row: usize },
    Other,
}

fn detect_shape(p: &PartialStochasticMatrix) -> SpecifiedShape {
    let n = p.n();
    let mut diag_only = true;
    let mut rows_with_spec = Vec::new();
    for i in 0..n {
        let mut any = false;
        for j in 0..n {
            if let Cell::Specified(_) = p.cell(i, j) {
                any = true;
                if i != j {
                    diag_only = false;
                }
            }
        }
        if any {
            rows_with_spec.push(i);
        }
    }
    if diag_only {
        let diag = (0..n)
            .map(|j| match p.cell(j, j) {
                Cell::Specified(v) => Some(v),
                Cell::Free => None,
            })
            .collect();
        return SpecifiedShape::DiagonalOnly { diag };
    }
    if let [row] = rows_with_spec[..] {
        if p.is_row_fully_specified(row) {
            return SpecifiedShape::SingleRow { row };
        }
    }
    SpecifiedShape::Other
}

fn cmd_complete(
    cli: &Cli,
    path: &Path,
    strategy: Strategy,
    verify: bool,
    budget: u64,
    seed: u64,
) -> Result<(), Error> {
    let start = Instant::now();
    let grid = read_cells(path)?;
    let p = PartialStochasticMatrix::from_cells(grid)?;
    if !p.feasible_single_class() {
        return Err(Error::Infeasible);
    }
    let shape = detect_shape(&p);
    let (sol, strategy_used, patterns) = match strategy {
        Strategy::Diag => (solve_diagonal_shape(&shape)?, "diag".to_string(), None),
        Strategy::Row => (solve_row_shape(&p, &shape)?, "row".to_string(), None),
        Strategy::Oracle => {
            let (sol, count) = solve_by_oracle(&p, budget)?;
            (sol, "oracle".to_string(), Some(count))
        }
        Strategy::Auto if p.is_fully_specified() => {
            // exactly one completion: the matrix itself
            let (sol, count) = solve_by_oracle(&p, budget)?;
            (sol, "oracle (auto: fully specified)".to_string(), Some(count))
        }
        Strategy::Auto => match &shape {
            SpecifiedShape::DiagonalOnly { .. } => {
                (solve_diagonal_shape(&shape)?, "diag (auto)".to_string(), None)
            }
            SpecifiedShape::SingleRow { .. } => {
                (solve_row_shape(&p, &shape)?, "row (auto)".to_string(), None)
            }
            SpecifiedShape::Other => {
                let (sol, count) = solve_by_oracle(&p, budget)?;
                (sol, "oracle (auto: no closed form for this shape)".to_string(), Some(count))
            }
        },
    };
    if !p.is_completion(&sol.witness) {
        return Err(Error::VerificationFailed { reported: sol.value, recomputed: f64::NAN });
    }
    let mut verification = None;
    if verify {
        verification = Some(verify_solution(&p, &sol, budget, seed)?);
    }
    let elapsed = ms(start);
    if cli.json {
        print_json(json!({
            "command": "complete",
            "input": {
                "path": path.display().to_string(),
                "n": p.n(),
                "matrix": serde_json::from_str::<serde_json::Value>(&p.to_json())
                    .expect("matrix json"),
            },
            "output": {
                "value": sol.value,
                "method": sol.method.as_str(),
                "structure": sol.structure,
                "uniqueness": sol.uniqueness,
                "witness": { "n": sol.witness.n(), "rows": sol.witness.to_rows() },
            },
            "diagnostics": {
                "strategy": strategy_used,
                "patterns_examined": patterns,
                "verify": verification,
                "elapsed_ms": elapsed,
            },
        }));
    } else {
        println!("n: {}", p.n());
        println!("strategy: {strategy_used}");
        println!("m(P): {}", sol.value);
        println!("method: {}", sol.method.as_str());
        println!("uniqueness: {}", uniqueness_label(&sol.uniqueness));
        if let Some(count) = patterns {
            println!("patterns examined: {count}");
        }
        if let Some(v) = &verification {
            println!(
                "verify: witness |Δ| = {:.2e}, oracle |Δ| = {}, random-search bound ok",
                v["witness_gap"].as_f64().unwrap(),
                v["oracle_gap"]
                    .as_f64()
                    .map(|g| format!("{g:.2e}"))
                    .unwrap_or_else(|| "skipped".to_string()),
            );
        }
        println!("witness:");
        print!("{}", partial::matrix_to_text(&sol.witness));
    }
    Ok(())
}

fn solve_diagonal_shape(shape: &SpecifiedShape) -> Result<CompletionSolution, Error> {
    let SpecifiedShape::DiagonalOnly { diag } = shape else {
        return Err(Error::Parse {
            line: 0,
            msg: "matrix is not diagonal-only; use --strategy row or oracle".into(),
        });
    };
    // unspecified diagonal cells are free; pinning them at 0 is optimal
    let d: Vec<f64> = diag.iter().map(|v| v.unwrap_or(0.0)).collect();
    diag::solve_diagonal(&d)
}

fn solve_row_shape(
    p: &PartialStochasticMatrix,
    shape: &SpecifiedShape,
) -> Result<CompletionSolution, Error> {
    let SpecifiedShape::SingleRow { row } = shape else {
        return Err(Error::Parse {
            line: 0,
            msg: "matrix is not single-row; use --strategy diag or oracle".into(),
        });
    };
    let n = p.n();
    let i = *row;
    let values: Vec<f64> = (0..n)
        .map(|j| match p.cell(i, j) {
            Cell::Specified(v) => v,
            Cell::Free => unreachable!("row is fully specified"),
        })
        .collect();
    let r0 = values[i];
    let off: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| values[j]).collect();
    let spec = RowSpec::new(r0, off)?;
    let sol = row::solve_row(&spec)?;
    // relabel the canonical witness (specified state last) onto the original
    // columns, matching values left to right; the witness row may carry
    // renormalization noise of at most the partial tolerance, so the match is
    // nearest-value with exact matches winning
    let canon_last: Vec<f64> = (0..n - 1).map(|j| sol.witness.entry(n - 1, j)).collect();
    let mut canon_of = vec![usize::MAX; n];
    canon_of[i] = n - 1;
    let mut used = vec![false; n];
    used[i] = true;
    for (j, &needed) in canon_last.iter().enumerate() {
        let c = (0..n)
            .filter(|&c| !used[c])
            .min_by(|&a, &b| {
                (values[a] - needed)
                    .abs()
                    .partial_cmp(&(values[b] - needed).abs())
                    .unwrap()
            })
            .expect("one unused column per canonical column");
        if (values[c] - needed).abs() > 1e-9 {
            return Err(Error::VerificationFailed { reported: needed, recomputed: values[c] });
        }
        used[c] = true;
        canon_of[c] = j;
    }
    let witness = sol.witness.permuted(&canon_of);
    let recomputed = witness.kemeny_trace()?;
    if (recomputed - sol.value).abs() > 1e-9 {
        return Err(Error::VerificationFailed { reported: sol.value, recomputed });
    }
    Ok(CompletionSolution { witness, ..sol })
}

fn solve_by_oracle(
    p: &PartialStochasticMatrix,
    budget: u64,
) -> Result<(CompletionSolution, u64), Error> {
    let report = oracle::sparse_enumeration_min(p, budget)?;
    let sol = CompletionSolution {
        value: report.best_value,
        witness: report.best_completion,
        method: kemeny::Method::SparseEnumeration,
        structure: kemeny::CompletionStructure::SparseAssignment {
            residual_columns: vec![],
        },
        uniqueness: Uniqueness::Unknown,
    };
    Ok((sol, report.patterns_examined))
}

fn verify_solution(
    p: &PartialStochasticMatrix,
    sol: &CompletionSolution,
    budget: u64,
    seed: u64,
) -> Result<serde_json::Value, Error> {
    let witness_gap = (sol.witness.kemeny_trace()? - sol.value).abs();
    if witness_gap > 1e-9 {
        return Err(Error::VerificationFailed {
            reported: sol.value,
            recomputed: sol.witness.kemeny_trace()?,
        });
    }
    // exhaustive cross-check on small instances
    let oracle_gap = if p.n() <= 6 && p.sparse_pattern_count() <= budget as u128 {
        let report = oracle::sparse_enumeration_min(p, budget)?;
        let gap = (report.best_value - sol.value).abs();
        if gap > 1e-9 {
            return Err(Error::VerificationFailed {
                reported: sol.value,
                recomputed: report.best_value,
            });
        }
        Some(gap)
    } else {
        None
    };
    // the random upper bound must never undercut the reported optimum
    let opts = oracle::RandomSearchOptions { iterations: 2000, step: 1.0, seed };
    let search = oracle::random_search_min(p, &opts)?;
    if search.best_value < sol.value - 1e-8 {
        return Err(Error::VerificationFailed {
            reported: sol.value,
            recomputed: search.best_value,
        });
    }
    Ok(json!({
        "witness_gap": witness_gap,
        "oracle_gap": oracle_gap,
        "random_search_bound": search.best_value,
    }))
}

fn uniqueness_label(u: &Uniqueness) -> String {
    match u {
        Uniqueness::AllNCycles => "any n-cycle".to_string(),
        Uniqueness::Unique => "unique ordering".to_string(),
        Uniqueness::ExchangeFamily { k, swappable } => {
            format!("exchange family (k = {k}, swappable distances {swappable:?})")
        }
        Uniqueness::Unknown => "unknown".to_string(),
    }
}

// ---------------------------------------------------------------------------
// feasible
// ---------------------------------------------------------------------------

fn cmd_feasible(cli: &Cli, path: &Path) -> Result<u8, Error> {
    let start = Instant::now();
    let grid = read_cells(path)?;
    let p = PartialStochasticMatrix::from_cells(grid)?;
    let feasible = p.feasible_single_class();
    let witness = if !feasible && p.n() <= partial::SUBSET_CHECK_MAX_N {
        p.infeasibility_witness()?
    } else {
        None
    };
    let one_based =
        |s: &[usize]| s.iter().map(|&v| v + 1).collect::<Vec<_>>();
    if cli.json {
        print_json(json!({
            "command": "feasible",
            "input": { "path": path.display().to_string(), "n": p.n() },
            "output": {
                "feasible": feasible,
                "closed_witness_sets": witness
                    .as_ref()
                    .map(|(x, y)| json!([one_based(x), one_based(y)])),
            },
            "diagnostics": { "elapsed_ms": ms(start) },
        }));
    } else if feasible {
        println!("feasible: a completion with a single essential class exists");
    } else {
        println!("infeasible: every completion has at least two essential classes");
        if let Some((x, y)) = witness {
            println!(
                "witness: X = {:?} and Y = {:?} are disjoint closed sets (1-based)",
                one_based(&x),
                one_based(&y)
            );
        }
    }
    Ok(if feasible { 0 } else { EXIT_INFEASIBLE })
}

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn print_json(v: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&v).expect("serialize report"));
}
