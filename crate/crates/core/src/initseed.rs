//! Initial centroid selection.
//!
//! Two strategies: uniform random objects, and the deterministic "renovated"
//! scheme. The renovated scheme scores every object `j` by how evenly its
//! distances to the rest of the data are spread:
//!
//! ```text
//! d_ij   = distance(x_i, x_j)
//! M_ij   = d_ij / sum_i d_ij          (each column sums to 1)
//! score_j = sum_i M_ij^2
//! ```
//!
//! and picks the `k` objects with the smallest scores, lower index first on
//! ties. Scores are computed once; selected objects are not removed and
//! re-scored.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::distance::{pairwise, Metric};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum InitStrategy {
    /// `k` distinct objects drawn uniformly without replacement.
    Random { seed: u64 },
    /// Deterministic minimum-score selection; no seed involved.
    Renovated { metric: Metric },
    /// Caller supplied `k x p` centroids.
    Explicit(Array2<f64>),
}

impl InitStrategy {
    pub fn initial_centroids(&self, d: &Dataset, k: usize) -> Result<Array2<f64>> {
        match self {
            InitStrategy::Random { seed } => random_init(d, k, *seed),
            InitStrategy::Renovated { metric } => renovated_init(d, k, *metric).map(|(c, _)| c),
            InitStrategy::Explicit(c) => {
                check_k(k, d.n())?;
                if c.nrows() != k {
                    return Err(Error::DimensionMismatch {
                        expected: k,
                        found: c.nrows(),
                    });
                }
                if c.ncols() != d.p() {
                    return Err(Error::DimensionMismatch {
                        expected: d.p(),
                        found: c.ncols(),
                    });
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "initial centroids must be finite".into(),
                    ));
                }
                Ok(c.clone())
            }
        }
    }
}

/// Per-object scores of the renovated scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct InitScore {
    /// `score_j = sum_i M_ij^2`, one per object.
    pub scores: Vec<f64>,
    /// Column-normalized distance matrix `M`.
    pub normalized: Array2<f64>,
    /// Indices of the chosen objects in ascending score order.
    pub selected: Vec<usize>,
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::InvalidK { k, n })
    } else {
        Ok(())
    }
}

/// `k` distinct object indices sampled uniformly from `0..n`.
pub fn random_indices(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    check_k(k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, n, k).into_vec())
}

pub fn random_init(d: &Dataset, k: usize, seed: u64) -> Result<Array2<f64>> {
    let idx = random_indices(d.n(), k, seed)?;
    Ok(gather_rows(d, &idx))
}

pub fn renovated_init(d: &Dataset, k: usize, m: Metric) -> Result<(Array2<f64>, InitScore)> {
    let n = d.n();
    check_k(k, n)?;
    if n < 2 {
        return Err(Error::TooFewObjects { n, required: 2 });
    }

    let mut normalized = pairwise(m, d).into_entries();
    let mut scores = Vec::with_capacity(n);
    for mut col in normalized.columns_mut() {
        let total = col.iter().fold(0.0, |acc, v| acc + v);
        // a zero column means every object sits on x_j
        if total <= 0.0 {
            return Err(Error::IdenticalObjects);
        }
        col.mapv_inplace(|v| v / total);
        scores.push(col.iter().fold(0.0, |acc, v| acc + v * v));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    order.truncate(k);

    let centroids = gather_rows(d, &order);
    Ok((
        centroids,
        InitScore {
            scores,
            normalized,
            selected: order,
        },
    ))
}

fn gather_rows(d: &Dataset, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((idx.len(), d.p()));
    for (mut row, &i) in out.rows_mut().into_iter().zip(idx) {
        row.assign(&d.features().row(i));
    }
    out
}
