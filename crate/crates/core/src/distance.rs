//! Manhattan, Euclidean and Chebyshev distances.
//!
//! Sums are accumulated left to right over features so results are
//! reproducible bit for bit on a given platform.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// L1, city block.
    Manhattan,
    /// L2.
    Euclidean,
    /// L-infinity.
    Chebyshev,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Manhattan, Metric::Euclidean, Metric::Chebyshev];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Manhattan => "manhattan",
            Metric::Euclidean => "euclidean",
            Metric::Chebyshev => "chebyshev",
        }
    }

    /// Distance between equal-length slices. Lengths are not checked in
    /// release builds; use [`distance`] for untrusted input.
    #[inline]
    pub fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        self.reduce(x.iter().zip(y).map(|(a, b)| (a - b).abs()))
    }

    /// `eval` applied to the elementwise product `w * (x - c)`.
    #[inline]
    pub fn eval_weighted(self, x: &[f64], c: &[f64], w: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), c.len());
        debug_assert_eq!(x.len(), w.len());
        self.reduce(
            x.iter()
                .zip(c)
                .zip(w)
                .map(|((a, b), wi)| (wi * (a - b)).abs()),
        )
    }

    #[inline]
    fn reduce(self, abs_diffs: impl Iterator<Item = f64>) -> f64 {
        match self {
            Metric::Manhattan => abs_diffs.fold(0.0, |acc, d| acc + d),
            Metric::Euclidean => abs_diffs.fold(0.0, |acc, d| acc + d * d).sqrt(),
            Metric::Chebyshev => abs_diffs.fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "manhattan" => Ok(Metric::Manhattan),
            "euclidean" => Ok(Metric::Euclidean),
            "chebyshev" => Ok(Metric::Chebyshev),
            _ => Err(Error::InvalidParameter(format!("unknown metric {s:?}"))),
        }
    }
}

/// Checked distance between two vectors of the same dimension.
pub fn distance(m: Metric, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidParameter("vectors must have p >= 1".into()));
    }
    Ok(m.eval(x, y))
}

/// All-pairs distances of a dataset. Symmetric with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    entries: Array2<f64>,
    metric: Metric,
}

impl DistanceMatrix {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[[i, j]]
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }
}

/// Rows are filled in parallel; every entry is computed on its own, so the
/// result does not depend on the schedule.
pub fn pairwise(m: Metric, d: &Dataset) -> DistanceMatrix {
    let n = d.n();
    let mut entries = Array2::zeros((n, n));
    entries
        .axis_iter_mut(ndarray::Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let xi = d.row(i);
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = m.eval(xi, d.row(j));
            }
        });
    DistanceMatrix { entries, metric: m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn three_four_five() {
        let (x, y) = ([0.0, 0.0], [3.0, 4.0]);
        assert_eq!(distance(Metric::Manhattan, &x, &y).unwrap(), 7.0);
        assert_eq!(distance(Metric::Euclidean, &x, &y).unwrap(), 5.0);
        assert_eq!(distance(Metric::Chebyshev, &x, &y).unwrap(), 4.0);
    }

    #[test]
    fn identical_vectors_are_at_zero() {
        let x = [1.5, -2.0, 9.25];
        for m in Metric::ALL {
            assert_eq!(m.eval(&x, &x), 0.0);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            distance(Metric::Euclidean, &[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn unit_weights_match_plain_distance() {
        let (x, c) = ([1.0, 5.0, -2.0], [0.5, 2.0, 2.0]);
        for m in Metric::ALL {
            assert_eq!(m.eval_weighted(&x, &c, &[1.0; 3]), m.eval(&x, &c));
        }
    }

    #[test]
    fn pairwise_on_a_line() {
        let d = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![10.0]], "line").unwrap();
        let dm = pairwise(Metric::Euclidean, &d);
        assert_eq!(dm.entries().row(0).to_vec(), vec![0.0, 1.0, 2.0, 10.0]);
        for i in 0..4 {
            assert_eq!(dm.get(i, i), 0.0);
        }
    }

    #[test]
    fn pairwise_matches_double_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..4).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        let d = Dataset::from_rows(&rows, "r").unwrap();
        for m in Metric::ALL {
            let dm = pairwise(m, &d);
            for i in 0..50 {
                for j in 0..50 {
                    let diffs = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).abs());
                    let oracle = match m {
                        Metric::Manhattan => diffs.sum::<f64>(),
                        Metric::Euclidean => diffs.map(|v| v * v).sum::<f64>().sqrt(),
                        Metric::Chebyshev => diffs.fold(0.0, f64::max),
                    };
                    assert!((dm.get(i, j) - oracle).abs() <= 1e-12);
                    assert_eq!(dm.get(i, j), dm.get(j, i));
                }
            }
        }
    }

    fn vec_pair(p: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-1e3..1e3f64, p),
            prop::collection::vec(-1e3..1e3f64, p),
        )
    }

    proptest! {
        #[test]
        fn norm_ordering((x, y) in (1usize..10).prop_flat_map(vec_pair)) {
            let p = x.len() as f64;
            let cheb = Metric::Chebyshev.eval(&x, &y);
            let eucl = Metric::Euclidean.eval(&x, &y);
            let manh = Metric::Manhattan.eval(&x, &y);
            prop_assert!(cheb <= eucl * (1.0 + 1e-12));
            prop_assert!(eucl <= manh * (1.0 + 1e-12));
            prop_assert!(manh <= p * cheb * (1.0 + 1e-12));
        }

        #[test]
        fn translation_invariance(
            (x, y) in (1usize..8).prop_flat_map(vec_pair),
            shift in -100.0..100.0f64,
        ) {
            let xt: Vec<f64> = x.iter().map(|v| v + shift).collect();
            let yt: Vec<f64> = y.iter().map(|v| v + shift).collect();
            for m in Metric::ALL {
                prop_assert!((m.eval(&x, &y) - m.eval(&xt, &yt)).abs() <= 1e-9);
            }
        }
    }
}
