//! Benchmark sweeps over datasets, algorithms, metrics, cluster counts and
//! seeds.
//!
//! Every sweep expands into a list of cells, runs them (in parallel, except
//! timing sweeps which run one cell at a time) and sorts the resulting
//! [`BenchRecord`]s before building the report. A failing cell stops the
//! sweep: records of the cells before it are kept and the report is flagged
//! `partial`.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{
    run, RunConfig, WeightStrategy, DEFAULT_MAX_ITER, DEFAULT_STATIC_WEIGHT, DEFAULT_TOL,
};
use crate::dataset::{Dataset, NormalizeMode};
use crate::distance::Metric;
use crate::error::{Error, Result};
use crate::initseed::InitStrategy;
use crate::report::{BenchRecord, BenchReport, ReportKind, ReportParams};
use crate::validity::{davies_bouldin, DbVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Random init, unit weights.
    KMeans,
    /// Random init, static weights.
    SwKMeans,
    /// Random init, dynamic weights.
    DwKMeans,
    /// Deterministic minimum-score init, unit weights.
    Renovated,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::KMeans,
        Algorithm::SwKMeans,
        Algorithm::DwKMeans,
        Algorithm::Renovated,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::SwKMeans => "swkmeans",
            Algorithm::DwKMeans => "dwkmeans",
            Algorithm::Renovated => "renovated",
        }
    }

    /// True when the seed has no influence on the outcome.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, Algorithm::Renovated)
    }

    /// Engine configuration for this algorithm. The renovated init scores
    /// objects with the same metric used for clustering.
    pub fn run_config(&self, k: usize, seed: u64, metric: Metric, cfg: &BenchConfig) -> RunConfig {
        let (init, weights) = match self {
            Algorithm::KMeans => (InitStrategy::Random { seed }, WeightStrategy::Unit),
            Algorithm::SwKMeans => (
                InitStrategy::Random { seed },
                WeightStrategy::Static(cfg.static_weight),
            ),
            Algorithm::DwKMeans => (InitStrategy::Random { seed }, WeightStrategy::Dynamic),
            Algorithm::Renovated => (InitStrategy::Renovated { metric }, WeightStrategy::Unit),
        };
        RunConfig::new(k)
            .init(init)
            .metric(metric)
            .weights(weights)
            .tol(cfg.tol)
            .max_iter(cfg.max_iter)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(Algorithm::KMeans),
            "swkmeans" => Ok(Algorithm::SwKMeans),
            "dwkmeans" => Ok(Algorithm::DwKMeans),
            "renovated" => Ok(Algorithm::Renovated),
            _ => Err(Error::InvalidParameter(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// Settings shared by every cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub static_weight: f64,
    pub db_variant: DbVariant,
    /// Recorded only; datasets are expected to be normalized already.
    pub normalize: NormalizeMode,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            static_weight: DEFAULT_STATIC_WEIGHT,
            db_variant: DbVariant::Paper,
            normalize: NormalizeMode::None,
        }
    }
}

/// `count` consecutive seeds starting at `base`.
pub fn seed_list(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| base.wrapping_add(i)).collect()
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    dataset: usize,
    algorithm: Algorithm,
    metric: Metric,
    k: usize,
    seed: u64,
}

fn run_cell(d: &Dataset, cell: &Cell, cfg: &BenchConfig) -> Result<BenchRecord> {
    let rc = cell
        .algorithm
        .run_config(cell.k, cell.seed, cell.metric, cfg);
    let result = run(d, &rc)?;
    let db = davies_bouldin(d, &result.assignments, &result.centroids, cfg.db_variant)?;
    Ok(BenchRecord {
        dataset: d.name().to_string(),
        algorithm: cell.algorithm,
        metric: cell.metric,
        k: cell.k,
        seed: cell.seed,
        db_index: db.index,
        db_variant: cfg.db_variant,
        iterations: result.iterations,
        elapsed_ms: result.elapsed.as_secs_f64() * 1e3,
        converged: result.converged,
        normalize: cfg.normalize,
    })
}

fn execute(
    kind: ReportKind,
    datasets: &[Dataset],
    cells: Vec<Cell>,
    params: ReportParams,
    cfg: &BenchConfig,
) -> BenchReport {
    let eval = |cell: &Cell| {
        let d = &datasets[cell.dataset];
        run_cell(d, cell, cfg).map_err(|e| {
            format!(
                "{} {} {} k={} seed={}: {e}",
                d.name(),
                cell.algorithm,
                cell.metric,
                cell.k,
                cell.seed
            )
        })
    };
    // timings must not compete with sibling cells
    let outcomes: Vec<std::result::Result<BenchRecord, String>> = if kind == ReportKind::Time {
        cells.iter().map(eval).collect()
    } else {
        cells.par_iter().map(eval).collect()
    };

    let mut records = Vec::with_capacity(outcomes.len());
    let mut error = None;
    for outcome in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => {
                log::error!("sweep aborted: {e}");
                error = Some(e);
                break;
            }
        }
    }
    BenchReport::new(kind, params, records, error)
}

fn check_seeds(seeds: &[u64]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one seed is required".into(),
        ));
    }
    Ok(())
}

fn check_ks(ks: &[usize], n: usize, name: &str) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::InvalidParameter("empty cluster-count list".into()));
    }
    match ks.iter().find(|&&k| k < 2 || k > n) {
        Some(&k) => Err(Error::InvalidParameter(format!(
            "k={k} outside [2, {n}] for {name}"
        ))),
        None => Ok(()),
    }
}

fn params(
    datasets: &[Dataset],
    ks: &[usize],
    seeds: &[u64],
    metrics: &[Metric],
    algorithms: &[Algorithm],
    cfg: &BenchConfig,
) -> ReportParams {
    ReportParams {
        datasets: datasets.iter().map(|d| d.name().to_string()).collect(),
        ks: ks.to_vec(),
        seeds: seeds.to_vec(),
        metrics: metrics.to_vec(),
        algorithms: algorithms.to_vec(),
        config: *cfg,
    }
}

/// Plain K-Means under every metric for each `k` and seed.
pub fn bench_distance_sweep(
    d: &Dataset,
    ks: RangeInclusive<usize>,
    seeds: &[u64],
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    let ks: Vec<usize> = ks.collect();
    check_ks(&ks, d.n(), d.name())?;
    check_seeds(seeds)?;
    let mut cells = Vec::new();
    for &metric in &Metric::ALL {
        for &k in &ks {
            for &seed in seeds {
                cells.push(Cell {
                    dataset: 0,
                    algorithm: Algorithm::KMeans,
                    metric,
                    k,
                    seed,
                });
            }
        }
    }
    let p = params(
        std::slice::from_ref(d),
        &ks,
        seeds,
        &Metric::ALL,
        &[Algorithm::KMeans],
        cfg,
    );
    Ok(execute(
        ReportKind::DistanceSweep,
        std::slice::from_ref(d),
        cells,
        p,
        cfg,
    ))
}

/// All four algorithms on every dataset at one `k`. The renovated algorithm
/// runs once per dataset, under the first seed.
pub fn bench_algorithms(
    datasets: &[Dataset],
    k: usize,
    seeds: &[u64],
    metric: Metric,
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    if datasets.is_empty() {
        return Err(Error::InvalidParameter("no datasets given".into()));
    }
    check_seeds(seeds)?;
    for d in datasets {
        check_ks(&[k], d.n(), d.name())?;
    }
    let mut cells = Vec::new();
    for (di, _) in datasets.iter().enumerate() {
        for algorithm in Algorithm::ALL {
            let used: &[u64] = if algorithm.is_deterministic() {
                &seeds[..1]
            } else {
                seeds
            };
            for &seed in used {
                cells.push(Cell {
                    dataset: di,
                    algorithm,
                    metric,
                    k,
                    seed,
                });
            }
        }
    }
    let p = params(datasets, &[k], seeds, &[metric], &Algorithm::ALL, cfg);
    Ok(execute(ReportKind::Algorithms, datasets, cells, p, cfg))
}

fn per_algorithm_cells(ks: &[usize], seeds: &[u64], metric: Metric) -> Vec<Cell> {
    let mut cells = Vec::new();
    for algorithm in Algorithm::ALL {
        for &k in ks {
            for &seed in seeds {
                cells.push(Cell {
                    dataset: 0,
                    algorithm,
                    metric,
                    k,
                    seed,
                });
            }
        }
    }
    cells
}

/// Wall-clock time of each algorithm per `k`; cells run sequentially.
pub fn bench_time(
    d: &Dataset,
    k_list: &[usize],
    seeds: &[u64],
    metric: Metric,
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    check_ks(k_list, d.n(), d.name())?;
    check_seeds(seeds)?;
    let cells = per_algorithm_cells(k_list, seeds, metric);
    let p = params(
        std::slice::from_ref(d),
        k_list,
        seeds,
        &[metric],
        &Algorithm::ALL,
        cfg,
    );
    Ok(execute(
        ReportKind::Time,
        std::slice::from_ref(d),
        cells,
        p,
        cfg,
    ))
}

/// Iterations to convergence of each algorithm per `k`.
pub fn bench_iterations(
    d: &Dataset,
    ks: RangeInclusive<usize>,
    seeds: &[u64],
    metric: Metric,
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    let ks: Vec<usize> = ks.collect();
    check_ks(&ks, d.n(), d.name())?;
    check_seeds(seeds)?;
    let cells = per_algorithm_cells(&ks, seeds, metric);
    let p = params(
        std::slice::from_ref(d),
        &ks,
        seeds,
        &[metric],
        &Algorithm::ALL,
        cfg,
    );
    Ok(execute(
        ReportKind::Iterations,
        std::slice::from_ref(d),
        cells,
        p,
        cfg,
    ))
}
