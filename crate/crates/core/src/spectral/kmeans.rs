//! Seeded deterministic k-means for the spectral embedding rows.
//!
//! Farthest-point initialization from a seeded starting point, Lloyd
//! iterations capped at 300, empty clusters repaired by splitting the
//! largest cluster at its farthest member. The best of 10 restarts wins,
//! ties resolved toward the earlier restart.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RESTARTS: u64 = 10;
const MAX_ITERATIONS: usize = 300;

/// Clusters the rows of `points` into exactly `k` non-empty clusters.
/// Deterministic for a fixed seed. Panics if `k` is zero or exceeds the
/// number of rows.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> Vec<usize> {
    let n = points.nrows();
    assert!(k >= 1, "kmeans requires at least one cluster");
    assert!(k <= n, "kmeans requires k <= n ({k} > {n})");

    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart));
        let (labels, objective) = lloyd(points, k, &mut rng);
        let improved = match &best {
            None => true,
            Some((best_objective, _)) => objective < *best_objective,
        };
        if improved {
            best = Some((objective, labels));
        }
    }
    best.expect("at least one restart ran").1
}

fn squared_distance(points: &DMatrix<f64>, row: usize, centroid: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (j, c) in centroid.iter().enumerate() {
        let d = points[(row, j)] - c;
        sum += d * d;
    }
    sum
}

fn farthest_point_init(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.nrows();
    let row_of = |i: usize| points.row(i).iter().copied().collect::<Vec<f64>>();

    let first = rng.random_range(0..n);
    let mut chosen = vec![false; n];
    chosen[first] = true;
    let mut centroids = vec![row_of(first)];
    let mut nearest = (0..n)
        .map(|i| squared_distance(points, i, &centroids[0]))
        .collect::<Vec<f64>>();

    while centroids.len() < k {
        let mut next = None;
        let mut best = -1.0;
        for (i, (&taken, &dist)) in chosen.iter().zip(&nearest).enumerate() {
            if !taken && dist > best {
                best = dist;
                next = Some(i);
            }
        }
        let next = next.expect("k <= n leaves an unchosen point");
        chosen[next] = true;
        let centroid = row_of(next);
        for (i, slot) in nearest.iter_mut().enumerate() {
            *slot = slot.min(squared_distance(points, i, &centroid));
        }
        centroids.push(centroid);
    }
    centroids
}

fn assign(points: &DMatrix<f64>, centroids: &[Vec<f64>]) -> Vec<usize> {
    (0..points.nrows())
        .map(|i| {
            let mut label = 0;
            let mut best = squared_distance(points, i, &centroids[0]);
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let dist = squared_distance(points, i, centroid);
                if dist < best {
                    best = dist;
                    label = c;
                }
            }
            label
        })
        .collect()
}

fn centroid_means(points: &DMatrix<f64>, labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let d = points.ncols();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (i, &label) in labels.iter().enumerate() {
        counts[label] += 1;
        for j in 0..d {
            sums[label][j] += points[(i, j)];
        }
    }
    for (c, sum) in sums.iter_mut().enumerate() {
        if counts[c] > 0 {
            for v in sum.iter_mut() {
                *v /= counts[c] as f64;
            }
        }
    }
    sums
}

/// Reassigns one point per empty cluster: the farthest member of the
/// largest cluster becomes the empty cluster's sole member.
fn repair_empty_clusters(points: &DMatrix<f64>, labels: &mut [usize], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &label in labels.iter() {
            counts[label] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let donor = counts
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
            .map(|(i, _)| i)
            .expect("k >= 1");
        let centroids = centroid_means(points, labels, k);
        let mut farthest = None;
        let mut best = -1.0;
        for (i, &label) in labels.iter().enumerate() {
            if label == donor {
                let dist = squared_distance(points, i, &centroids[donor]);
                if dist > best {
                    best = dist;
                    farthest = Some(i);
                }
            }
        }
        labels[farthest.expect("donor cluster is non-empty")] = empty;
    }
}

fn objective(points: &DMatrix<f64>, labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &label)| squared_distance(points, i, &centroids[label]))
        .sum()
}

fn lloyd(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let mut centroids = farthest_point_init(points, k, rng);
    let mut labels: Vec<usize> = Vec::new();
    let mut score = f64::INFINITY;

    for _ in 0..MAX_ITERATIONS {
        let mut next = assign(points, &centroids);
        repair_empty_clusters(points, &mut next, k);
        centroids = centroid_means(points, &next, k);
        let next_score = objective(points, &next, &centroids);
        debug_assert!(
            next_score <= score + 1e-9 * (1.0 + score.abs().min(1e300)),
            "k-means objective increased: {score} -> {next_score}"
        );
        score = next_score;
        if next == labels {
            break;
        }
        labels = next;
    }
    (labels, score)
}
