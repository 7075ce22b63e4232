//! Cluster validity: Davies-Bouldin index, within-cluster SSE and the
//! adjusted Rand index.
//!
//! For clusters `P_i` with centroids `v_i`:
//!
//! ```text
//! dp_i  = sqrt(mean_{x in P_i} |x - v_i|^2)        dispersion (RMS radius)
//! dv_ij = |v_i - v_j|^2   (paper variant)          separation
//!       = |v_i - v_j|     (standard variant)
//! FR_ij = (dp_i + dp_j) / dv_ij
//! FR_i  = max_{j != i} FR_ij
//! DB    = mean_i FR_i
//! ```
//!
//! All norms are Euclidean regardless of the metric used for clustering.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DbVariant {
    /// Squared centroid distance as separation.
    #[default]
    Paper,
    /// Plain centroid distance as separation (Davies & Bouldin 1979).
    Standard,
}

impl DbVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            DbVariant::Paper => "paper",
            DbVariant::Standard => "standard",
        }
    }

    fn separation(self, a: &[f64], b: &[f64]) -> f64 {
        let sq = squared_euclidean(a, b);
        match self {
            DbVariant::Paper => sq,
            DbVariant::Standard => sq.sqrt(),
        }
    }
}

impl fmt::Display for DbVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DbVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(DbVariant::Paper),
            "standard" => Ok(DbVariant::Standard),
            _ => Err(Error::InvalidParameter(format!("unknown DB variant {s:?}"))),
        }
    }
}

/// Intermediate quantities of a Davies-Bouldin evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct DbBreakdown {
    pub variant: DbVariant,
    /// `dp_i`.
    pub dispersions: Vec<f64>,
    /// `dv_ij`; diagonal is zero.
    pub separations: Array2<f64>,
    /// `FR_ij`; diagonal is zero and unused.
    pub similarity: Array2<f64>,
    /// `FR_i = max_{j != i} FR_ij`.
    pub per_cluster_max: Vec<f64>,
    pub index: f64,
}

#[inline]
fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (x, y)| acc + (x - y) * (x - y))
}

/// Root-mean-square Euclidean distance of `points` to `centroid`.
pub fn dispersion<'a, I>(points: I, centroid: &[f64]) -> Result<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut total = 0.0;
    let mut m = 0usize;
    for x in points {
        if x.len() != centroid.len() {
            return Err(Error::DimensionMismatch {
                expected: centroid.len(),
                found: x.len(),
            });
        }
        total += squared_euclidean(x, centroid);
        m += 1;
    }
    if m == 0 {
        return Err(Error::EmptyCluster { cluster: 0 });
    }
    Ok((total / m as f64).sqrt())
}

pub fn davies_bouldin(
    d: &Dataset,
    assignments: &[usize],
    centroids: &Array2<f64>,
    variant: DbVariant,
) -> Result<DbBreakdown> {
    let k = centroids.nrows();
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "Davies-Bouldin needs at least 2 clusters, got {k}"
        )));
    }
    if assignments.len() != d.n() {
        return Err(Error::LengthMismatch {
            left: assignments.len(),
            right: d.n(),
        });
    }
    if centroids.ncols() != d.p() {
        return Err(Error::DimensionMismatch {
            expected: d.p(),
            found: centroids.ncols(),
        });
    }
    if let Some(&bad) = assignments.iter().find(|&&a| a >= k) {
        return Err(Error::InvalidParameter(format!(
            "cluster index {bad} out of range for k={k}"
        )));
    }

    let centroid = |i: usize| centroids.row(i).to_slice().expect("contiguous centroids");
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (x, &a) in d.rows().zip(assignments) {
        sums[a] += squared_euclidean(x, centroid(a));
        counts[a] += 1;
    }
    if let Some(cluster) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyCluster { cluster });
    }
    let dispersions: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| (s / c as f64).sqrt())
        .collect();

    let mut separations = Array2::zeros((k, k));
    let mut similarity = Array2::zeros((k, k));
    for i in 0..k {
        for j in (i + 1)..k {
            let dv = variant.separation(centroid(i), centroid(j));
            if dv == 0.0 {
                return Err(Error::CoincidentCentroids { i, j });
            }
            let fr = (dispersions[i] + dispersions[j]) / dv;
            separations[[i, j]] = dv;
            separations[[j, i]] = dv;
            similarity[[i, j]] = fr;
            similarity[[j, i]] = fr;
        }
    }
    let per_cluster_max: Vec<f64> = (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| similarity[[i, j]])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let index = per_cluster_max.iter().sum::<f64>() / k as f64;

    Ok(DbBreakdown {
        variant,
        dispersions,
        separations,
        similarity,
        per_cluster_max,
        index,
    })
}

/// Sum of squared Euclidean distances of objects to their assigned centroid.
///
/// # Panics
///
/// If an assignment is out of range for `centroids`.
pub fn within_cluster_sse(d: &Dataset, assignments: &[usize], centroids: &Array2<f64>) -> f64 {
    d.rows().zip(assignments).fold(0.0, |acc, (x, &a)| {
        acc + squared_euclidean(
            x,
            centroids.row(a).to_slice().expect("contiguous centroids"),
        )
    })
}

/// Adjusted Rand index of two labelings of the same objects.
///
/// Returns 1.0 for identical partitions (up to relabeling), about 0 for
/// independent ones. Fewer than two objects, or two partitions that are both
/// a single cluster or both all singletons, score 1.0.
pub fn partition_agreement<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: Hash + Eq,
    B: Hash + Eq,
{
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Ok(1.0);
    }
    let mut left: HashMap<&A, u64> = HashMap::new();
    let mut right: HashMap<&B, u64> = HashMap::new();
    let mut joint: HashMap<(&A, &B), u64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *left.entry(x).or_default() += 1;
        *right.entry(y).or_default() += 1;
        *joint.entry((x, y)).or_default() += 1;
    }
    let pairs = |c: u64| (c * c.saturating_sub(1)) as f64 / 2.0;
    let index: f64 = joint.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = left.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = right.values().map(|&c| pairs(c)).sum();
    let expected = sum_a * sum_b / pairs(n as u64);
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
