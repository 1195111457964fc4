//! Parallel grid scans. Every scan returns its rows in grid order, whatever order the worker
//! threads finish in.

use jpk_core::cz::{self, CzEvaluator, KernelId};
use jpk_core::sharp::{self, Which};
use jpk_core::{EstimateReport, EstimateRow, Kernel, KernelQuery, Method};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "JPK_THREADS";

/// Reads [`THREADS_ENV`]; unset or empty means "let rayon decide".
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) if !s.trim().is_empty() => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::usage(format!("{THREADS_ENV} must be a positive integer (got '{s}')"))),
        },
        _ => Ok(None),
    }
}

pub fn thread_pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::usage(format!("cannot start worker threads: {e}")))
}

/// Order-preserving parallel map.
pub fn par_map<T, R, F>(pool: &rayon::ThreadPool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    pool.install(|| items.par_iter().map(&f).collect())
}

fn first_error<R>(results: Vec<jpk_core::Result<R>>) -> CliResult<Vec<R>> {
    results.into_iter().collect::<jpk_core::Result<Vec<R>>>().map_err(CliError::from)
}

/// Methods compared by [`compare_grid`], in column order.
pub const COMPARE_METHODS: [Method; 4] = [Method::Series, Method::F4, Method::Integral, Method::General];

/// Relaxed tolerance applies when `t <= NEAR_T` and `|theta - phi| < NEAR_GAP`.
pub const NEAR_T: f64 = 0.1;
pub const NEAR_GAP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub t: f64,
    pub theta: f64,
    pub phi: f64,
    /// One entry per [`COMPARE_METHODS`]; `Err` holds the failure message.
    pub values: Vec<Result<f64, String>>,
    /// Largest pairwise `|a - b| / max(|a|, |b|)` among the methods that succeeded.
    pub max_rel_diff: f64,
    /// Tolerance in force at this point.
    pub tol: f64,
}

impl CompareRow {
    pub fn failed(&self) -> bool {
        self.values.iter().any(|v| v.is_err())
    }

    pub fn pass(&self) -> bool {
        !self.failed() && self.max_rel_diff <= self.tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub tol: f64,
    pub near_tol: f64,
}

impl CompareReport {
    pub fn max_rel_diff(&self) -> f64 {
        self.rows.iter().map(|r| r.max_rel_diff).fold(0.0, f64::max)
    }

    pub fn min_rel_diff(&self) -> f64 {
        self.rows.iter().map(|r| r.max_rel_diff).fold(f64::INFINITY, f64::min)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failed()).count()
    }

    pub fn pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(CompareRow::pass)
    }
}

pub fn max_pairwise_rel_diff(values: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, &a) in values.iter().enumerate() {
        for &b in &values[i + 1..] {
            let scale = a.abs().max(b.abs());
            if scale > 0.0 {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    worst
}

/// Evaluates every method at each `(t, theta, phi)` of the product grid. A failing method is
/// recorded in its row and the scan continues.
pub fn compare_grid(
    pool: &rayon::ThreadPool,
    kernel: &Kernel,
    t_grid: &[f64],
    theta_grid: &[f64],
    phi_grid: &[f64],
    tol: f64,
    near_tol: f64,
) -> CompareReport {
    let points = product(t_grid, theta_grid, phi_grid);
    let rows = par_map(pool, &points, |&(t, theta, phi)| {
        let values: Vec<Result<f64, String>> = COMPARE_METHODS
            .iter()
            .map(|&m| kernel.eval(&KernelQuery::new(t, theta, phi).with_method(m)).map_err(|e| format!("{}: {e}", m.name())))
            .collect();
        let ok: Vec<f64> = values.iter().filter_map(|v| v.as_ref().ok().copied()).collect();
        let near = t <= NEAR_T && (theta - phi).abs() < NEAR_GAP;
        CompareRow { t, theta, phi, max_rel_diff: max_pairwise_rel_diff(&ok), values, tol: if near { near_tol } else { tol } }
    });
    CompareReport { rows, tol, near_tol }
}

/// `t`-major product of the three grids.
pub fn product(t_grid: &[f64], theta_grid: &[f64], phi_grid: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::with_capacity(t_grid.len() * theta_grid.len() * phi_grid.len());
    for &t in t_grid {
        for &th in theta_grid {
            for &ph in phi_grid {
                out.push((t, th, ph));
            }
        }
    }
    out
}

/// Parallel version of the sharp ratio scan.
pub fn sharp_scan(
    pool: &rayon::ThreadPool,
    kernel: &Kernel,
    t_grid: &[f64],
    theta_grid: &[f64],
    phi_grid: &[f64],
    which: Which,
    cap: f64,
) -> CliResult<EstimateReport> {
    let points = product(t_grid, theta_grid, phi_grid);
    let evaluated = first_error(par_map(pool, &points, |&(t, th, ph)| sharp::ratio_point(kernel, t, th, ph, which)))?;
    Ok(sharp::ratio_report(evaluated, which, cap))
}

/// Off-diagonal pairs of the product grid `theta_grid x phi_grid`.
pub fn off_diagonal_pairs(theta_grid: &[f64], phi_grid: &[f64]) -> Vec<(f64, f64)> {
    theta_grid.iter().flat_map(|&a| phi_grid.iter().filter(move |&&b| b != a).map(move |&b| (a, b))).collect()
}

/// Growth and gradient reports, `(growth, gradient)` per kernel, sharing one `t`-profile per point.
pub fn growth_gradient_scan(
    pool: &rayon::ThreadPool,
    ev: &CzEvaluator,
    ids: &[KernelId],
    grid: &[(f64, f64)],
    cap: f64,
) -> CliResult<Vec<(EstimateReport, EstimateReport)>> {
    let per_point = first_error(par_map(pool, grid, |&(th, ph)| ev.estimate_rows(ids, th, ph)))?;
    Ok(ids
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let growth: Vec<EstimateRow> = per_point.iter().map(|r| r[k].0).collect();
            let gradient: Vec<EstimateRow> = per_point.iter().map(|r| r[k].1).collect();
            (cz::growth_report(id, growth, cap), cz::gradient_report(id, gradient, cap))
        })
        .collect())
}

/// Smoothness reports per kernel over the given admissible triples.
pub fn smoothness_scan(
    pool: &rayon::ThreadPool,
    ev: &CzEvaluator,
    ids: &[KernelId],
    triples: &[(f64, f64, f64)],
    cap: f64,
) -> CliResult<Vec<EstimateReport>> {
    let per_triple = first_error(par_map(pool, triples, |&(a, b, c)| ev.smoothness_rows(ids, a, b, c)))?;
    Ok(ids
        .iter()
        .enumerate()
        .map(|(k, id)| cz::smoothness_report(id, per_triple.iter().map(|r| r[k]).collect(), cap))
        .collect())
}

/// Smallest `|theta - phi|` of a sampled triple.
pub const MIN_TRIPLE_GAP: f64 = 1e-3;

/// `count` triples `(theta, theta2, phi)` with `|theta - phi| > 2 |theta - theta2|`, reproducible
/// from `seed`. `theta` and `phi` are uniform on `[0, pi]` and `|theta - theta2|` is uniform on
/// `(0, |theta - phi| / 2)`.
pub fn random_triples(count: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    use std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let theta = rng.gen_range(0.0..=PI);
        let phi = rng.gen_range(0.0..=PI);
        let gap = (theta - phi).abs();
        if gap < MIN_TRIPLE_GAP {
            continue;
        }
        let h = 0.5 * gap * rng.gen_range(0.01..0.99);
        let theta2 = if rng.gen::<bool>() { theta + h } else { theta - h };
        if cz::admissible_triple(theta, theta2, phi) {
            out.push((theta, theta2, phi));
        }
    }
    out
}
