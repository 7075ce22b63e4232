//! Numeric datasets: delimited-text loading, normalization and synthetic blobs.
//!
//! Loaders never assume a row count. The UCI mirrors of Ecoli, Yeast and Wine
//! hold 336, 1484 and 178 objects; whatever the file contains is what the
//! [`Dataset`] reports.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n x p` matrix of finite reals with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Option<Vec<String>>,
    name: String,
    provenance: String,
}

impl Dataset {
    /// Validates the invariants: `n >= 1`, `p >= 1`, all values finite and
    /// `labels.len() == n` when labels are given.
    pub fn new(
        features: Array2<f64>,
        labels: Option<Vec<String>>,
        name: impl Into<String>,
    ) -> Result<Self> {
        let (n, p) = features.dim();
        if n == 0 || p == 0 {
            return Err(Error::InvalidDataset(format!(
                "need at least one object and one attribute, got {n}x{p}"
            )));
        }
        if let Some(((row, column), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: row + 1,
                column: column + 1,
            });
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "{} labels for {n} objects",
                    labels.len()
                )));
            }
        }
        // row slices are handed out everywhere, keep the layout contiguous
        let features = if features.is_standard_layout() {
            features
        } else {
            features.as_standard_layout().into_owned()
        };
        let name = name.into();
        let provenance = format!("{name}; n={n} p={p}");
        Ok(Dataset {
            features,
            labels,
            name,
            provenance,
        })
    }

    /// Builds a dataset from row vectors.
    pub fn from_rows(rows: &[Vec<f64>], name: impl Into<String>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: p,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let features = Array2::from_shape_vec((rows.len(), p), flat)
            .map_err(|e| Error::InvalidDataset(e.to_string()))?;
        Dataset::new(features, None, name)
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn p(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Short identifier, e.g. `iris`.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Where the data came from and its actual shape, e.g. `data/ecoli.data; n=336 p=7`.
    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features
            .row(i)
            .to_slice()
            .expect("dataset features are stored in standard layout")
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n()).map(move |i| self.row(i))
    }
}

/// How a line is split into cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Comma,
    /// Any run of spaces or tabs.
    Whitespace,
    Char(char),
}

impl Delimiter {
    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            Delimiter::Whitespace => line.split_whitespace().collect(),
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Char(c) => line.split(*c).map(str::trim).collect(),
        }
    }
}

impl FromStr for Delimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "," | "comma" => Ok(Delimiter::Comma),
            "whitespace" | "ws" | "space" => Ok(Delimiter::Whitespace),
            "tab" | "\\t" => Ok(Delimiter::Char('\t')),
            _ => {
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) if c.is_whitespace() => Ok(Delimiter::Whitespace),
                    (Some(c), None) => Ok(Delimiter::Char(c)),
                    _ => Err(Error::InvalidPreset(format!("unknown delimiter {s:?}"))),
                }
            }
        }
    }
}

/// Column layout of a delimited file. Column indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPreset {
    name: String,
    delimiter: Delimiter,
    label_col: Option<usize>,
    drop_cols: BTreeSet<usize>,
}

impl DatasetPreset {
    pub const NAMES: [&'static str; 4] = ["iris", "ecoli", "yeast", "wine"];

    pub fn new(
        name: impl Into<String>,
        delimiter: Delimiter,
        label_col: Option<usize>,
        drop_cols: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let drop_cols: BTreeSet<usize> = drop_cols.into_iter().collect();
        if let Some(label) = label_col {
            if drop_cols.contains(&label) {
                return Err(Error::InvalidPreset(format!(
                    "column {label} is both the label column and dropped"
                )));
            }
        }
        Ok(DatasetPreset {
            name: name.into(),
            delimiter,
            label_col,
            drop_cols,
        })
    }

    /// `sepal length, sepal width, petal length, petal width, class`.
    pub fn iris() -> Self {
        Self::new("iris", Delimiter::Comma, Some(4), []).expect("valid preset")
    }

    /// Sequence name, 7 features, class; whitespace separated.
    pub fn ecoli() -> Self {
        Self::new("ecoli", Delimiter::Whitespace, Some(8), [0]).expect("valid preset")
    }

    /// Sequence name, 8 features, class; whitespace separated.
    pub fn yeast() -> Self {
        Self::new("yeast", Delimiter::Whitespace, Some(9), [0]).expect("valid preset")
    }

    /// Class first, then 13 features.
    pub fn wine() -> Self {
        Self::new("wine", Delimiter::Comma, Some(0), []).expect("valid preset")
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "iris" => Some(Self::iris()),
            "ecoli" => Some(Self::ecoli()),
            "yeast" => Some(Self::yeast()),
            "wine" => Some(Self::wine()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn delimiter(&self) -> Delimiter {
        self.delimiter
    }

    pub fn label_col(&self) -> Option<usize> {
        self.label_col
    }

    pub fn drop_cols(&self) -> &BTreeSet<usize> {
        &self.drop_cols
    }
}

/// Reads a delimited text file. Blank lines are skipped; row numbers in
/// errors are one-based line numbers.
pub fn load_csv(path: impl AsRef<Path>, preset: &DatasetPreset) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match parse_delimited(&text, preset) {
        Err(Error::EmptyFile { .. }) => Err(Error::EmptyFile {
            path: path.to_path_buf(),
        }),
        Ok(d) => {
            let provenance = format!("{}; n={} p={}", path.display(), d.n(), d.p());
            Ok(d.with_provenance(provenance))
        }
        other => other,
    }
}

/// Parses already-loaded text with the given column layout.
pub fn parse_delimited(text: &str, preset: &DatasetPreset) -> Result<Dataset> {
    let mut width = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    let mut p = 0usize;

    for (lineno, line) in text.lines().enumerate() {
        let row = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells = preset.delimiter.split(line);
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(Error::RaggedRow {
                row,
                expected,
                found: cells.len(),
            });
        }
        if rows == 0 {
            if let Some(label) = preset.label_col {
                if label >= expected {
                    return Err(Error::InvalidPreset(format!(
                        "label column {label} out of range for {expected} columns"
                    )));
                }
            }
        }
        for (column, cell) in cells.iter().enumerate() {
            if preset.label_col == Some(column) {
                labels.push((*cell).to_string());
            } else if !preset.drop_cols.contains(&column) {
                let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                    row,
                    column: column + 1,
                    value: (*cell).to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        row,
                        column: column + 1,
                    });
                }
                values.push(v);
            }
        }
        if rows == 0 {
            p = values.len();
        }
        rows += 1;
    }

    if rows == 0 {
        return Err(Error::EmptyFile {
            path: Default::default(),
        });
    }
    if p == 0 {
        return Err(Error::InvalidDataset(
            "no numeric feature columns remain".into(),
        ));
    }
    let features = Array2::from_shape_vec((rows, p), values)
        .map_err(|e| Error::InvalidDataset(e.to_string()))?;
    let labels = preset.label_col.map(|_| labels);
    Dataset::new(features, labels, preset.name.clone())
}

/// Column-wise feature scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeMode {
    #[default]
    None,
    /// Affine map of each column onto `[0, 1]`; constant columns become 0.
    MinMax,
    /// `(x - mean) / sd` with the population sd; constant columns become 0.
    ZScore,
}

impl NormalizeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormalizeMode::None => "none",
            NormalizeMode::MinMax => "minmax",
            NormalizeMode::ZScore => "zscore",
        }
    }
}

impl fmt::Display for NormalizeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormalizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NormalizeMode::None),
            "minmax" => Ok(NormalizeMode::MinMax),
            "zscore" => Ok(NormalizeMode::ZScore),
            _ => Err(Error::InvalidParameter(format!(
                "unknown normalization {s:?}"
            ))),
        }
    }
}

pub fn normalize(d: &Dataset, mode: NormalizeMode) -> Dataset {
    let mut features = d.features.clone();
    match mode {
        NormalizeMode::None => return d.clone(),
        NormalizeMode::MinMax => {
            for mut col in features.columns_mut() {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let range = hi - lo;
                col.mapv_inplace(|v| if range > 0.0 { (v - lo) / range } else { 0.0 });
            }
        }
        NormalizeMode::ZScore => {
            for (j, mut col) in features.columns_mut().into_iter().enumerate() {
                let (mean, sd) = population_mean_sd(col.view());
                if sd > 0.0 {
                    col.mapv_inplace(|v| (v - mean) / sd);
                } else {
                    log::warn!(
                        "{}: column {} is constant, z-score maps it to 0",
                        d.name,
                        j + 1
                    );
                    col.fill(0.0);
                }
            }
        }
    }
    Dataset {
        features,
        labels: d.labels.clone(),
        name: d.name.clone(),
        provenance: format!("{}; normalize={mode}", d.provenance),
    }
}

fn population_mean_sd(col: ArrayView1<'_, f64>) -> (f64, f64) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Parameters for [`make_blobs`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub k: usize,
    pub per_cluster: usize,
    pub dims: usize,
    /// Minimum Euclidean distance between any two blob centers.
    pub separation: f64,
    /// Standard deviation of the isotropic Gaussian noise.
    pub spread: f64,
    pub seed: u64,
}

const CENTER_ATTEMPTS: usize = 10_000;

/// Gaussian blobs with well separated centers; labels are the blob index.
///
/// Centers are drawn uniformly from a cube of half-width `separation * k`
/// and rejected until every pair is at least `separation` apart. All
/// randomness comes from a `ChaCha8Rng` seeded with `spec.seed`.
pub fn make_blobs(spec: &BlobSpec) -> Result<Dataset> {
    let BlobSpec {
        k,
        per_cluster,
        dims,
        separation,
        spread,
        seed,
    } = *spec;
    if k == 0 || per_cluster == 0 || dims == 0 {
        return Err(Error::InvalidParameter(
            "blobs need k, per_cluster and dims >= 1".into(),
        ));
    }
    if !(separation > 0.0 && separation.is_finite()) || !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::InvalidParameter(
            "blobs need separation > 0 and spread >= 0".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = separation * k as f64;
    let coord =
        Uniform::new_inclusive(-half, half).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut attempts = 0;
    while centers.len() < k {
        if attempts == CENTER_ATTEMPTS {
            return Err(Error::BlobPlacement {
                k,
                separation,
                attempts,
            });
        }
        attempts += 1;
        let candidate: Vec<f64> = (0..dims).map(|_| coord.sample(&mut rng)).collect();
        let far_enough = centers.iter().all(|c| {
            let d2: f64 = c
                .iter()
                .zip(&candidate)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d2.sqrt() >= separation
        });
        if far_enough {
            centers.push(candidate);
        }
    }

    let n = k * per_cluster;
    let mut values = Vec::with_capacity(n * dims);
    let mut labels = Vec::with_capacity(n);
    for (blob, center) in centers.iter().enumerate() {
        for _ in 0..per_cluster {
            for &c in center {
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(c + spread * z);
            }
            labels.push(blob.to_string());
        }
    }
    let features = Array2::from_shape_vec((n, dims), values)
        .map_err(|e| Error::InvalidDataset(e.to_string()))?;
    let mut d = Dataset::new(features, Some(labels), "blobs")?;
    d.provenance = format!(
        "blobs(k={k}, per_cluster={per_cluster}, dims={dims}, separation={separation}, spread={spread}, seed={seed})"
    );
    Ok(d)
}

/// Mean of each column.
#[cfg(test)]
pub(crate) fn column_means(d: &Dataset) -> Vec<f64> {
    d.features
        .mean_axis(ndarray::Axis(0))
        .expect("dataset has at least one row")
        .to_vec()
}
