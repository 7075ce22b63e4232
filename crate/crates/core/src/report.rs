//! Benchmark records, aggregates, table views and their CSV / JSON /
//! plot-data encodings.
//!
//! The JSON document carries `"schema": 1`. Loading a report recomputes the
//! aggregates from the records and rejects the file when they disagree.
//!
//! CSV layout: a header and one line per record, then a `# aggregates`
//! marker line, a second header and one line per aggregate group.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::NormalizeMode;
use crate::distance::Metric;
use crate::error::{Error, Result};
use crate::harness::{Algorithm, BenchConfig};
use crate::validity::DbVariant;

pub const SCHEMA_VERSION: u32 = 1;
const AGGREGATE_MARKER: &str = "# aggregates";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    DistanceSweep,
    Algorithms,
    Time,
    Iterations,
}

impl ReportKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReportKind::DistanceSweep => "distance-sweep",
            ReportKind::Algorithms => "algorithms",
            ReportKind::Time => "time",
            ReportKind::Iterations => "iterations",
        }
    }
}

/// One clustering run inside a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub metric: Metric,
    pub k: usize,
    pub seed: u64,
    pub db_index: f64,
    pub db_variant: DbVariant,
    pub iterations: usize,
    pub elapsed_ms: f64,
    pub converged: bool,
    pub normalize: NormalizeMode,
}

impl BenchRecord {
    fn group(&self) -> GroupKey {
        (self.dataset.clone(), self.algorithm, self.metric, self.k)
    }

    fn sort_key(&self) -> (&str, Algorithm, Metric, usize, u64) {
        (
            &self.dataset,
            self.algorithm,
            self.metric,
            self.k,
            self.seed,
        )
    }
}

type GroupKey = (String, Algorithm, Metric, usize);

/// Statistics over the seeds of one (dataset, algorithm, metric, k) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub metric: Metric,
    pub k: usize,
    pub runs: usize,
    pub converged: usize,
    pub db_mean: f64,
    pub db_min: f64,
    pub db_max: f64,
    pub iter_mean: f64,
    pub iter_min: usize,
    pub iter_max: usize,
    pub ms_mean: f64,
    pub ms_median: f64,
    pub ms_min: f64,
    pub ms_max: f64,
    /// Median time divided by the plain K-Means median of the same
    /// dataset, metric and k.
    pub ms_rel_kmeans: Option<f64>,
}

impl Aggregate {
    fn approx_eq(&self, other: &Aggregate) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        self.dataset == other.dataset
            && self.algorithm == other.algorithm
            && self.metric == other.metric
            && self.k == other.k
            && self.runs == other.runs
            && self.converged == other.converged
            && self.iter_min == other.iter_min
            && self.iter_max == other.iter_max
            && [
                (self.db_mean, other.db_mean),
                (self.db_min, other.db_min),
                (self.db_max, other.db_max),
                (self.iter_mean, other.iter_mean),
                (self.ms_mean, other.ms_mean),
                (self.ms_median, other.ms_median),
                (self.ms_min, other.ms_min),
                (self.ms_max, other.ms_max),
            ]
            .iter()
            .all(|&(a, b)| close(a, b))
            && match (self.ms_rel_kmeans, other.ms_rel_kmeans) {
                (Some(a), Some(b)) => close(a, b),
                (None, None) => true,
                _ => false,
            }
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Groups records and computes [`Aggregate`]s, ordered by group key.
pub fn aggregate(records: &[BenchRecord]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<GroupKey, Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.group()).or_default().push(r);
    }
    let mut out: Vec<Aggregate> = groups
        .into_iter()
        .map(|((dataset, algorithm, metric, k), rs)| {
            let runs = rs.len();
            let db: Vec<f64> = rs.iter().map(|r| r.db_index).collect();
            let its: Vec<usize> = rs.iter().map(|r| r.iterations).collect();
            let mut ms: Vec<f64> = rs.iter().map(|r| r.elapsed_ms).collect();
            ms.sort_by(f64::total_cmp);
            Aggregate {
                dataset,
                algorithm,
                metric,
                k,
                runs,
                converged: rs.iter().filter(|r| r.converged).count(),
                db_mean: db.iter().sum::<f64>() / runs as f64,
                db_min: db.iter().copied().fold(f64::INFINITY, f64::min),
                db_max: db.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                iter_mean: its.iter().sum::<usize>() as f64 / runs as f64,
                iter_min: its.iter().copied().min().unwrap_or(0),
                iter_max: its.iter().copied().max().unwrap_or(0),
                ms_mean: ms.iter().sum::<f64>() / runs as f64,
                ms_median: median(&ms),
                ms_min: ms[0],
                ms_max: ms[runs - 1],
                ms_rel_kmeans: None,
            }
        })
        .collect();

    let baselines: BTreeMap<(String, Metric, usize), f64> = out
        .iter()
        .filter(|a| a.algorithm == Algorithm::KMeans)
        .map(|a| ((a.dataset.clone(), a.metric, a.k), a.ms_median))
        .collect();
    for a in &mut out {
        a.ms_rel_kmeans = baselines
            .get(&(a.dataset.clone(), a.metric, a.k))
            .filter(|&&base| base > 0.0)
            .map(|base| a.ms_median / base);
    }
    out
}

/// What was swept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub datasets: Vec<String>,
    pub ks: Vec<usize>,
    pub seeds: Vec<u64>,
    pub metrics: Vec<Metric>,
    pub algorithms: Vec<Algorithm>,
    pub config: BenchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub host: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
    pub timestamp: String,
    pub version: String,
}

impl Environment {
    pub fn capture() -> Self {
        let host = std::env::var("HOSTNAME")
            .ok()
            .filter(|h| !h.is_empty())
            .or_else(|| {
                std::fs::read_to_string("/etc/hostname")
                    .ok()
                    .map(|s| s.trim().to_string())
            })
            .unwrap_or_else(|| "unknown".to_string());
        Environment {
            host,
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            threads: rayon::current_num_threads(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: u32,
    pub kind: ReportKind,
    pub params: ReportParams,
    pub environment: Environment,
    /// Set when a cell failed and the sweep stopped early.
    pub partial: bool,
    pub error: Option<String>,
    pub records: Vec<BenchRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl BenchReport {
    /// Sorts the records and derives the aggregates.
    pub fn new(
        kind: ReportKind,
        params: ReportParams,
        mut records: Vec<BenchRecord>,
        error: Option<String>,
    ) -> Self {
        records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let aggregates = aggregate(&records);
        BenchReport {
            schema: SCHEMA_VERSION,
            kind,
            params,
            environment: Environment::capture(),
            partial: error.is_some(),
            error,
            records,
            aggregates,
        }
    }

    pub fn aggregate_for(
        &self,
        dataset: &str,
        algorithm: Algorithm,
        metric: Metric,
        k: usize,
    ) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| {
            a.dataset == dataset && a.algorithm == algorithm && a.metric == metric && a.k == k
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::InvalidReport(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if let Some(r) = self.records.iter().find(|r| {
            r.iterations < 1
                || r.elapsed_ms.is_nan()
                || r.elapsed_ms < 0.0
                || !r.db_index.is_finite()
        }) {
            return Err(Error::InvalidReport(format!(
                "record {} {} k={} seed={} violates record invariants",
                r.dataset, r.algorithm, r.k, r.seed
            )));
        }
        let expected = aggregate(&self.records);
        let consistent = expected.len() == self.aggregates.len()
            && expected
                .iter()
                .zip(&self.aggregates)
                .all(|(a, b)| a.approx_eq(b));
        if !consistent {
            return Err(Error::InvalidReport(
                "aggregates do not match the records".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates a JSON report.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("schema").and_then(serde_json::Value::as_u64) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            other => {
                return Err(Error::InvalidReport(format!(
                    "unsupported or missing schema field: {other:?}"
                )))
            }
        }
        let report: BenchReport = serde_json::from_value(value)?;
        report.validate()?;
        Ok(report)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            if self.records.is_empty() {
                w.write_record(RECORD_HEADER)?;
            }
            for r in &self.records {
                w.serialize(r)?;
            }
            w.flush().map_err(csv::Error::from)?;
        }
        writeln!(out, "{AGGREGATE_MARKER}").map_err(csv::Error::from)?;
        {
            let mut w = csv::Writer::from_writer(&mut out);
            if self.aggregates.is_empty() {
                w.write_record(AGGREGATE_HEADER)?;
            }
            for a in &self.aggregates {
                w.serialize(a)?;
            }
            w.flush().map_err(csv::Error::from)?;
        }
        String::from_utf8(out).map_err(|e| Error::InvalidReport(e.to_string()))
    }

    /// Tabular view matching the report kind; see [`Table`].
    pub fn table(&self) -> Table {
        let p = &self.params;
        let single = p.datasets.len() == 1;
        let k_rows = || -> Vec<(String, String, usize)> {
            p.datasets
                .iter()
                .flat_map(|d| p.ks.iter().map(move |&k| (d.clone(), k)))
                .map(|(d, k)| {
                    let label = if single {
                        k.to_string()
                    } else {
                        format!("{d}:{k}")
                    };
                    (label, d, k)
                })
                .collect()
        };
        match self.kind {
            ReportKind::DistanceSweep => {
                let rows = k_rows();
                let cells = rows
                    .iter()
                    .map(|(_, d, k)| {
                        p.metrics
                            .iter()
                            .map(|&m| {
                                self.aggregate_for(d, Algorithm::KMeans, m, *k)
                                    .map(|a| a.db_mean)
                            })
                            .collect()
                    })
                    .collect();
                Table {
                    title: "mean Davies-Bouldin index by metric".into(),
                    row_header: "k".into(),
                    statistic: "db_mean".into(),
                    rows: rows.into_iter().map(|r| r.0).collect(),
                    columns: p.metrics.iter().map(|m| m.to_string()).collect(),
                    cells,
                }
            }
            ReportKind::Algorithms => {
                let metric = p.metrics.first().copied().unwrap_or(Metric::Euclidean);
                let k = p.ks.first().copied().unwrap_or_default();
                let cells = p
                    .datasets
                    .iter()
                    .map(|d| {
                        p.algorithms
                            .iter()
                            .map(|&a| self.aggregate_for(d, a, metric, k).map(|g| g.db_mean))
                            .collect()
                    })
                    .collect();
                Table {
                    title: format!("mean Davies-Bouldin index at k={k}"),
                    row_header: "dataset".into(),
                    statistic: "db_mean".into(),
                    rows: p.datasets.clone(),
                    columns: p.algorithms.iter().map(|a| a.to_string()).collect(),
                    cells,
                }
            }
            ReportKind::Time | ReportKind::Iterations => {
                let metric = p.metrics.first().copied().unwrap_or(Metric::Euclidean);
                let timing = self.kind == ReportKind::Time;
                let rows = k_rows();
                let cells = rows
                    .iter()
                    .map(|(_, d, k)| {
                        p.algorithms
                            .iter()
                            .map(|&a| {
                                self.aggregate_for(d, a, metric, *k).map(|g| {
                                    if timing {
                                        g.ms_median
                                    } else {
                                        g.iter_mean
                                    }
                                })
                            })
                            .collect()
                    })
                    .collect();
                Table {
                    title: if timing {
                        "median clustering time (ms)".into()
                    } else {
                        "mean iterations to convergence".into()
                    },
                    row_header: "k".into(),
                    statistic: if timing { "ms_median" } else { "iter_mean" }.into(),
                    rows: rows.into_iter().map(|r| r.0).collect(),
                    columns: p.algorithms.iter().map(|a| a.to_string()).collect(),
                    cells,
                }
            }
        }
    }

    /// Writes one whitespace-separated `x y` series file per table column and
    /// returns the paths.
    pub fn write_plotdata(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let table = self.table();
        let mut paths = Vec::with_capacity(table.columns.len());
        for (j, column) in table.columns.iter().enumerate() {
            let path = dir.join(format!("{}-{}.dat", self.kind.as_str(), column));
            let mut body = format!("# {} {}\n", table.row_header, table.statistic);
            for (row, cells) in table.rows.iter().zip(&table.cells) {
                if let Some(v) = cells[j] {
                    body.push_str(&format!("{row} {v}\n"));
                }
            }
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

const RECORD_HEADER: [&str; 11] = [
    "dataset",
    "algorithm",
    "metric",
    "k",
    "seed",
    "db_index",
    "db_variant",
    "iterations",
    "elapsed_ms",
    "converged",
    "normalize",
];

const AGGREGATE_HEADER: [&str; 17] = [
    "dataset",
    "algorithm",
    "metric",
    "k",
    "runs",
    "converged",
    "db_mean",
    "db_min",
    "db_max",
    "iter_mean",
    "iter_min",
    "iter_max",
    "ms_mean",
    "ms_median",
    "ms_min",
    "ms_max",
    "ms_rel_kmeans",
];

/// Reads the record block of a CSV report.
pub fn records_from_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let block = match text.find(AGGREGATE_MARKER) {
        Some(pos) => &text[..pos],
        None => text,
    };
    let mut rdr = csv::Reader::from_reader(block.as_bytes());
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Grid of one statistic: rows are `k` values or datasets, columns are
/// metrics or algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub row_header: String,
    pub statistic: String,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.columns.len())
    }

    pub fn get(&self, row: &str, column: &str) -> Option<f64> {
        let i = self.rows.iter().position(|r| r == row)?;
        let j = self.columns.iter().position(|c| c == column)?;
        self.cells[i][j]
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .columns
            .iter()
            .map(String::len)
            .chain(std::iter::once(10))
            .max()
            .unwrap_or(10);
        let first = self
            .rows
            .iter()
            .map(String::len)
            .chain(std::iter::once(self.row_header.len()))
            .max()
            .unwrap_or(1);
        writeln!(f, "{}", self.title)?;
        write!(f, "{:<first$}", self.row_header)?;
        for c in &self.columns {
            write!(f, "  {c:>width$}")?;
        }
        writeln!(f)?;
        for (row, cells) in self.rows.iter().zip(&self.cells) {
            write!(f, "{row:<first$}")?;
            for cell in cells {
                match cell {
                    Some(v) => write!(f, "  {v:>width$.4}")?,
                    None => write!(f, "  {:>width$}", "-")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(
        algorithm: Algorithm,
        k: usize,
        seed: u64,
        db: f64,
        its: usize,
        ms: f64,
    ) -> BenchRecord {
        BenchRecord {
            dataset: "toy".into(),
            algorithm,
            metric: Metric::Euclidean,
            k,
            seed,
            db_index: db,
            db_variant: DbVariant::Paper,
            iterations: its,
            elapsed_ms: ms,
            converged: true,
            normalize: NormalizeMode::None,
        }
    }

    fn toy_report() -> BenchReport {
        let records = vec![
            record(Algorithm::Renovated, 2, 0, 0.4, 3, 2.0),
            record(Algorithm::KMeans, 2, 1, 0.5, 4, 3.0),
            record(Algorithm::KMeans, 2, 0, 0.7, 6, 1.0),
            record(Algorithm::KMeans, 2, 2, 0.6, 5, 2.0),
        ];
        let params = ReportParams {
            datasets: vec!["toy".into()],
            ks: vec![2],
            seeds: vec![0, 1, 2],
            metrics: vec![Metric::Euclidean],
            algorithms: vec![Algorithm::KMeans, Algorithm::Renovated],
            config: BenchConfig::default(),
        };
        BenchReport::new(ReportKind::Iterations, params, records, None)
    }

    #[test]
    fn aggregates_by_hand() {
        let r = toy_report();
        assert_eq!(r.records[0].seed, 0);
        assert_eq!(r.records[0].algorithm, Algorithm::KMeans);
        let km = r
            .aggregate_for("toy", Algorithm::KMeans, Metric::Euclidean, 2)
            .unwrap();
        assert_eq!(km.runs, 3);
        assert!((km.db_mean - 0.6).abs() < 1e-12);
        assert_eq!((km.db_min, km.db_max), (0.5, 0.7));
        assert_eq!((km.iter_mean, km.iter_min, km.iter_max), (5.0, 4, 6));
        assert_eq!(km.ms_median, 2.0);
        assert_eq!(km.ms_rel_kmeans, Some(1.0));
        let rn = r
            .aggregate_for("toy", Algorithm::Renovated, Metric::Euclidean, 2)
            .unwrap();
        assert_eq!(rn.ms_rel_kmeans, Some(1.0));
        assert_eq!(median(&[1.0, 2.0, 3.0, 10.0]), 2.5);
    }

    #[test]
    fn json_round_trip_and_tamper_detection() {
        let r = toy_report();
        let back = BenchReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);

        let mut bad = r.clone();
        bad.aggregates[0].db_mean += 1.0;
        assert!(matches!(
            BenchReport::from_json(&bad.to_json().unwrap()),
            Err(Error::InvalidReport(_))
        ));
        let mut v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        v["schema"] = 2.into();
        assert!(BenchReport::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn csv_layout() {
        let r = toy_report();
        let csv = r.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), r.records.len() + 1 + 2 + r.aggregates.len());
        assert_eq!(lines[0], RECORD_HEADER.join(","));
        assert_eq!(lines[r.records.len() + 1], AGGREGATE_MARKER);
        assert_eq!(lines[r.records.len() + 2], AGGREGATE_HEADER.join(","));
        assert_eq!(records_from_csv(&csv).unwrap(), r.records);
    }

    #[test]
    fn table_and_plotdata() {
        let r = toy_report();
        let t = r.table();
        assert_eq!(t.shape(), (1, 2));
        assert_eq!(t.get("2", "kmeans"), Some(5.0));
        assert_eq!(t.get("2", "renovated"), Some(3.0));
        let dir = tempfile::tempdir().unwrap();
        let files = r.write_plotdata(dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let body = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(body, "# k iter_mean\n2 5\n");
        assert!(t.to_string().contains("renovated"));
    }
}
