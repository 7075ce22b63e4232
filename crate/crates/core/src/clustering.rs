//! The Lloyd-style engine shared by all four algorithms.
//!
//! Each iteration assigns every object to the centroid minimizing
//! `metric(w_i * (x - c_i))`, where `w_i` is the weight row of candidate
//! centroid `i`, then moves every centroid to the unweighted mean of its
//! members. The loop stops when the largest centroid displacement is at most
//! `tol`, when an assignment pass changes nothing, or after `max_iter`
//! passes.

use std::time::{Duration, Instant};

use ndarray::Array2;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::distance::Metric;
use crate::error::{Error, Result};
use crate::initseed::{check_k, InitStrategy};
use crate::validity::within_cluster_sse;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_STATIC_WEIGHT: f64 = 1.5;

/// How per-feature weights are attached to centroids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightStrategy {
    /// Every weight is 1.
    Unit,
    /// Every weight is the given constant, fixed for the whole run.
    Static(f64),
    /// `w_ij = (s_i - c_ij) / s_i` with `s_i = sum_j c_ij`, recomputed from
    /// the current centroids on every iteration.
    Dynamic,
}

impl WeightStrategy {
    pub fn weights_for(&self, centroids: &Array2<f64>) -> WeightMatrix {
        match *self {
            WeightStrategy::Unit => WeightMatrix(Array2::ones(centroids.dim())),
            WeightStrategy::Static(w) => WeightMatrix(Array2::from_elem(centroids.dim(), w)),
            WeightStrategy::Dynamic => dynamic_weights(centroids),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            WeightStrategy::Static(w) if !(w > 0.0 && w.is_finite()) => Err(
                Error::InvalidParameter(format!("static weight must be positive, got {w}")),
            ),
            _ => Ok(()),
        }
    }
}

/// One weight row per centroid, `k x p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(pub Array2<f64>);

impl WeightMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i).to_slice().expect("weights are contiguous")
    }
}

/// Dynamic weights of each centroid row. A row whose coordinates sum to zero
/// falls back to unit weights. Negative weights and weights above 1 are
/// legal; only their magnitude matters to the distance.
pub fn dynamic_weights(centroids: &Array2<f64>) -> WeightMatrix {
    let mut w = centroids.to_owned();
    for mut row in w.rows_mut() {
        let s = row.iter().fold(0.0, |acc, v| acc + v);
        if s == 0.0 {
            row.fill(1.0);
        } else {
            row.mapv_inplace(|c| (s - c) / s);
        }
    }
    WeightMatrix(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub centroids: Array2<f64>,
    pub weights: WeightMatrix,
    pub metric: Metric,
}

impl ClusterModel {
    pub fn new(centroids: Array2<f64>, metric: Metric, strategy: &WeightStrategy) -> Self {
        let weights = strategy.weights_for(&centroids);
        ClusterModel {
            centroids,
            weights,
            metric,
        }
    }

    pub fn k(&self) -> usize {
        self.centroids.nrows()
    }

    fn centroid(&self, i: usize) -> &[f64] {
        self.centroids
            .row(i)
            .to_slice()
            .expect("centroids are contiguous")
    }

    /// Index of the closest centroid; the lowest index wins ties.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for i in 0..self.k() {
            let d = self
                .metric
                .eval_weighted(x, self.centroid(i), self.weights.row(i));
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

/// Nearest-centroid labels for every object.
pub fn assign(d: &Dataset, model: &ClusterModel) -> Vec<usize> {
    debug_assert_eq!(model.centroids.ncols(), d.p());
    (0..d.n())
        .into_par_iter()
        .with_min_len(256)
        .map(|i| model.nearest(d.row(i)))
        .collect()
}

/// Cluster means of `assignments`.
///
/// An empty cluster is re-seeded with the object farthest (Euclidean) from
/// its own cluster's mean, taken from a cluster that still has more than one
/// member. The object is moved in `assignments`, so on return every cluster
/// is nonempty and every centroid is the mean of its members.
pub fn update_centroids(d: &Dataset, assignments: &mut [usize], k: usize) -> Array2<f64> {
    debug_assert!(assignments.iter().all(|&a| a < k));
    let (mut centroids, mut counts) = means(d, assignments, k);

    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let donor = (0..d.n())
            .filter(|&i| counts[assignments[i]] > 1)
            .map(|i| {
                let c = centroids.row(assignments[i]);
                let dist: f64 = d.row(i).iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                (i, dist)
            })
            .fold(None::<(usize, f64)>, |best, (i, dist)| match best {
                Some((_, bd)) if bd >= dist => best,
                _ => Some((i, dist)),
            })
            .map(|(i, _)| i)
            .expect("k <= n leaves a cluster with two or more members");
        log::debug!("re-seeding empty cluster {empty} with object {donor}");
        assignments[donor] = empty;
        (centroids, counts) = means(d, assignments, k);
    }
    centroids
}

fn means(d: &Dataset, assignments: &[usize], k: usize) -> (Array2<f64>, Vec<usize>) {
    let mut sums = Array2::<f64>::zeros((k, d.p()));
    let mut counts = vec![0usize; k];
    for (row, &a) in d.rows().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums.row_mut(a).iter_mut().zip(row) {
            *s += v;
        }
    }
    for (mut row, &c) in sums.rows_mut().into_iter().zip(&counts) {
        if c > 0 {
            row.mapv_inplace(|s| s / c as f64);
        }
    }
    (sums, counts)
}

/// Everything that parameterizes a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    pub init: InitStrategy,
    pub metric: Metric,
    pub weights: WeightStrategy,
    pub tol: f64,
    pub max_iter: usize,
    /// Keep the assignment vector of every iteration in the result.
    pub trace_assignments: bool,
}

impl RunConfig {
    /// Plain K-Means defaults: random init with seed 0, Euclidean, unit weights.
    pub fn new(k: usize) -> Self {
        RunConfig {
            k,
            init: InitStrategy::Random { seed: 0 },
            metric: Metric::Euclidean,
            weights: WeightStrategy::Unit,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            trace_assignments: false,
        }
    }

    pub fn init(mut self, init: InitStrategy) -> Self {
        self.init = init;
        self
    }

    pub fn metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn weights(mut self, weights: WeightStrategy) -> Self {
        self.weights = weights;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn trace_assignments(mut self, on: bool) -> Self {
        self.trace_assignments = on;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub assignments: Vec<usize>,
    pub centroids: Array2<f64>,
    /// Number of assignment passes performed.
    pub iterations: usize,
    /// False only when `max_iter` was reached.
    pub converged: bool,
    /// Unweighted Euclidean SSE after each centroid update.
    pub inertia_history: Vec<f64>,
    /// Initialization plus iterations; no I/O.
    pub elapsed: Duration,
    /// Per-iteration assignments (before any empty-cluster re-seeding), when
    /// requested.
    pub assignment_trace: Vec<Vec<usize>>,
}

pub fn run(d: &Dataset, cfg: &RunConfig) -> Result<ClusteringResult> {
    check_k(cfg.k, d.n())?;
    if cfg.tol.is_nan() || cfg.tol < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tol must be >= 0, got {}",
            cfg.tol
        )));
    }
    if cfg.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
    }
    cfg.weights.validate()?;

    let start = Instant::now();
    let mut centroids = cfg.init.initial_centroids(d, cfg.k)?;
    let static_weights = match cfg.weights {
        WeightStrategy::Dynamic => None,
        w => Some(w.weights_for(&centroids)),
    };

    let mut assignments: Vec<usize> = Vec::new();
    let mut inertia_history = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let weights = match &static_weights {
            Some(w) => w.clone(),
            None => dynamic_weights(&centroids),
        };
        let model = ClusterModel {
            centroids,
            weights,
            metric: cfg.metric,
        };
        let next = assign(d, &model);
        centroids = model.centroids;
        if cfg.trace_assignments {
            trace.push(next.clone());
        }
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;

        let updated = update_centroids(d, &mut assignments, cfg.k);
        let shift = centroids
            .rows()
            .into_iter()
            .zip(updated.rows())
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        centroids = updated;
        inertia_history.push(within_cluster_sse(d, &assignments, &centroids));
        if shift <= cfg.tol {
            converged = true;
            break;
        }
    }

    Ok(ClusteringResult {
        assignments,
        centroids,
        iterations,
        converged,
        inertia_history,
        elapsed: start.elapsed(),
        assignment_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::column_means;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ds(rows: &[&[f64]]) -> Dataset {
        Dataset::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), "t").unwrap()
    }

    fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        Dataset::from_rows(&rows, "r").unwrap()
    }

    #[test]
    fn dynamic_weight_examples() {
        let w = dynamic_weights(&array![[1.0, 2.0, 3.0, 4.0]]);
        for (got, want) in w.0.iter().zip([0.9, 0.8, 0.7, 0.6]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(
            dynamic_weights(&array![[0.0, 0.0, 0.0]]).0,
            array![[1.0, 1.0, 1.0]]
        );
        assert_eq!(dynamic_weights(&array![[-1.0, 2.0]]).0, array![[2.0, -1.0]]);
    }

    #[test]
    fn dynamic_weights_recompute_from_sums() {
        let c = array![[0.3, 0.7, 0.2], [5.0, -1.0, 2.0]];
        let w = dynamic_weights(&c);
        for (crow, wrow) in c.rows().into_iter().zip(w.0.rows()) {
            let s: f64 = crow.sum();
            for (cij, wij) in crow.iter().zip(wrow) {
                assert!((wij - (s - cij) / s).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn run_terminates_with_negative_dynamic_weights() {
        let d = ds(&[
            &[-1.0, 2.0],
            &[-1.2, 2.1],
            &[3.0, 3.0],
            &[3.1, 2.9],
            &[0.0, 0.5],
        ]);
        let cfg = RunConfig::new(2)
            .init(InitStrategy::Explicit(array![[-1.0, 2.0], [3.0, 3.0]]))
            .weights(WeightStrategy::Dynamic)
            .max_iter(50);
        let r = run(&d, &cfg).unwrap();
        assert!(r.iterations <= 50);
        assert!(r.converged);
        let mut seen = r.assignments.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen, vec![0, 1]);
    }

    #[test]
    fn assign_nearest_and_ties() {
        let d = ds(&[&[0.0], &[10.0]]);
        let model = ClusterModel::new(
            array![[1.0], [9.0]],
            Metric::Euclidean,
            &WeightStrategy::Unit,
        );
        assert_eq!(assign(&d, &model), vec![0, 1]);

        let d = ds(&[&[5.0]]);
        let model = ClusterModel::new(
            array![[4.0], [100.0], [6.0]],
            Metric::Euclidean,
            &WeightStrategy::Unit,
        );
        assert_eq!(assign(&d, &model), vec![0]);
    }

    #[test]
    fn static_weights_do_not_change_assignments() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for _ in 0..100 {
            let n = rng.random_range(5..60);
            let p = rng.random_range(1..6);
            let k = rng.random_range(1..=n.min(6));
            let d = random_dataset(&mut rng, n, p);
            let c = crate::initseed::random_init(&d, k, rng.random()).unwrap();
            for metric in Metric::ALL {
                let unit = ClusterModel::new(c.clone(), metric, &WeightStrategy::Unit);
                let stat = ClusterModel::new(c.clone(), metric, &WeightStrategy::Static(1.5));
                assert_eq!(assign(&d, &unit), assign(&d, &stat));
            }
        }
    }

    #[test]
    fn update_midpoint_and_global_mean() {
        let d = ds(&[&[0.0, 0.0], &[0.0, 2.0]]);
        assert_eq!(update_centroids(&d, &mut [0, 0], 1), array![[0.0, 1.0]]);

        let d = ds(&[&[1.0, 2.0], &[3.0, 5.0], &[8.0, -1.0]]);
        let c = update_centroids(&d, &mut [0, 0, 0], 1);
        assert_eq!(c.row(0).to_vec(), column_means(&d));
    }

    #[test]
    fn singleton_clusters_have_zero_sse() {
        let d = ds(&[&[1.0], &[4.0], &[9.0]]);
        let mut a = [0, 1, 2];
        let c = update_centroids(&d, &mut a, 3);
        assert_eq!(c, array![[1.0], [4.0], [9.0]]);
        assert_eq!(within_cluster_sse(&d, &a, &c), 0.0);
    }

    #[test]
    fn empty_cluster_takes_the_farthest_object() {
        let d = ds(&[&[0.0], &[1.0], &[2.0], &[10.0]]);
        let mut a = [0, 0, 0, 0];
        let c = update_centroids(&d, &mut a, 2);
        assert_eq!(a, [0, 0, 0, 1]);
        assert_eq!(c, array![[1.0], [10.0]]);
    }

    #[test]
    fn k_one_converges_to_the_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..10 {
            let d = random_dataset(&mut rng, 40, 3);
            let r = run(&d, &RunConfig::new(1).init(InitStrategy::Random { seed })).unwrap();
            assert!(r.converged);
            assert!(r.iterations <= 2);
            for (got, want) in r.centroids.row(0).iter().zip(column_means(&d)) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lloyd_descent_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let n = rng.random_range(10..200);
            let p = rng.random_range(1..=8);
            let k = rng.random_range(1..=6);
            let d = random_dataset(&mut rng, n, p);
            let r = run(
                &d,
                &RunConfig::new(k).init(InitStrategy::Random { seed: rng.random() }),
            )
            .unwrap();
            for w in r.inertia_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{:?}", r.inertia_history);
            }
        }
    }

    #[test]
    fn every_cluster_nonempty_on_duplicated_points() {
        let mut rows = vec![vec![1.0, 1.0]; 9];
        rows.push(vec![5.0, 5.0]);
        let d = Dataset::from_rows(&rows, "dup").unwrap();
        for k in 1..=3 {
            for seed in 0..20 {
                let cfg = RunConfig::new(k).init(InitStrategy::Random { seed });
                let r = run(&d, &cfg).unwrap();
                let mut counts = vec![0; k];
                for &a in &r.assignments {
                    counts[a] += 1;
                }
                assert!(
                    counts.iter().all(|&c| c > 0),
                    "k={k} seed={seed} {counts:?}"
                );
            }
        }
    }

    #[test]
    fn run_rejects_bad_parameters() {
        let d = ds(&[&[0.0], &[1.0]]);
        assert!(matches!(
            run(&d, &RunConfig::new(3)),
            Err(Error::InvalidK { k: 3, n: 2 })
        ));
        assert!(matches!(
            run(&d, &RunConfig::new(0)),
            Err(Error::InvalidK { .. })
        ));
        assert!(run(&d, &RunConfig::new(1).max_iter(0)).is_err());
        assert!(run(&d, &RunConfig::new(1).tol(-1.0)).is_err());
        assert!(run(&d, &RunConfig::new(1).weights(WeightStrategy::Static(0.0))).is_err());
    }

    #[test]
    fn iteration_cap_is_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = random_dataset(&mut rng, 150, 4);
        for weights in [WeightStrategy::Unit, WeightStrategy::Dynamic] {
            let r = run(&d, &RunConfig::new(6).weights(weights).max_iter(2).tol(0.0)).unwrap();
            assert!(r.iterations <= 2);
        }
    }
}
