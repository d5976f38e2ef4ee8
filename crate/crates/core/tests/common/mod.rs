//! Shared oracles for the integration suites. Everything here is
//! independent of the implementation paths it checks: union-find for
//! connected components, exhaustive permutation averaging for expected
//! mutual information, and plain-index contingency arithmetic.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Connected components of a thresholded weight matrix via union-find,
/// as canonical labels (first appearance order, starting at 1).
pub fn union_find_components(weights: &DMatrix<f64>, threshold: f64) -> Vec<usize> {
    let n = weights.nrows();
    let mut parent: Vec<usize> = (0..n).collect();

    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }

    for i in 0..n {
        for j in (i + 1)..n {
            if weights[(i, j)] >= threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut mapping = BTreeMap::new();
    let mut next = 0usize;
    (0..n)
        .map(|i| {
            let root = find(&mut parent, i);
            *mapping.entry(root).or_insert_with(|| {
                next += 1;
                next
            })
        })
        .collect()
}

/// Canonical form of an arbitrary labeling: relabeled by first appearance.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut mapping = BTreeMap::new();
    let mut next = 0usize;
    labels
        .iter()
        .map(|l| {
            *mapping.entry(*l).or_insert_with(|| {
                next += 1;
                next
            })
        })
        .collect()
}

/// A near-block-diagonal similarity matrix: unit diagonal, intra-block
/// weights in `[0.8, 1.0)`, inter-block weights in `[0.0005, 0.01)`.
/// Returns the matrix and the generating block label per node.
pub fn random_block_graph(
    rng: &mut ChaCha8Rng,
    blocks: usize,
    n: usize,
    inter_zero: bool,
) -> (DMatrix<f64>, Vec<usize>) {
    assert!(n >= blocks);
    let mut sizes = vec![1usize; blocks];
    for _ in 0..(n - blocks) {
        let b = rng.random_range(0..blocks);
        sizes[b] += 1;
    }
    let mut block_of = Vec::with_capacity(n);
    for (b, &size) in sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b + 1, size));
    }
    let mut weights = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = if block_of[i] == block_of[j] {
                rng.random_range(0.8..1.0)
            } else if inter_zero {
                0.0
            } else {
                rng.random_range(0.0005..0.01)
            };
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
    }
    (weights, block_of)
}

/// Mutual information of two labelings in nats, from scratch.
pub fn mutual_information(u: &[i64], v: &[i64]) -> f64 {
    let n = u.len() as f64;
    let mut joint: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    let mut left: BTreeMap<i64, f64> = BTreeMap::new();
    let mut right: BTreeMap<i64, f64> = BTreeMap::new();
    for (&a, &b) in u.iter().zip(v) {
        *joint.entry((a, b)).or_default() += 1.0;
        *left.entry(a).or_default() += 1.0;
        *right.entry(b).or_default() += 1.0;
    }
    joint
        .iter()
        .map(|(&(a, b), &nij)| nij / n * (n * nij / (left[&a] * right[&b])).ln())
        .sum()
}

fn entropy(labels: &[i64]) -> f64 {
    let n = labels.len() as f64;
    let mut counts: BTreeMap<i64, f64> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1.0;
    }
    counts
        .values()
        .map(|&c| {
            let p = c / n;
            -p * p.ln()
        })
        .sum()
}

fn canonical_i64(labels: &[i64]) -> Vec<usize> {
    let mut mapping = BTreeMap::new();
    let mut next = 0usize;
    labels
        .iter()
        .map(|l| {
            *mapping.entry(*l).or_insert_with(|| {
                next += 1;
                next
            })
        })
        .collect()
}

/// AMI with the expected mutual information estimated exactly by
/// averaging MI over all `n!` item permutations of `v`. Feasible for
/// `n <= 8`; mirrors the degenerate conventions of the implementation.
pub fn ami_by_exhaustive_permutations(u: &[i64], v: &[i64]) -> f64 {
    assert_eq!(u.len(), v.len());
    if canonical_i64(u) == canonical_i64(v) {
        return 1.0;
    }
    let n = u.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    let mut count = 0usize;

    fn heap_permute(
        order: &mut Vec<usize>,
        k: usize,
        u: &[i64],
        v: &[i64],
        total: &mut f64,
        count: &mut usize,
    ) {
        if k == 1 {
            let permuted: Vec<i64> = order.iter().map(|&i| v[i]).collect();
            *total += mutual_information(u, &permuted);
            *count += 1;
            return;
        }
        for i in 0..k {
            heap_permute(order, k - 1, u, v, total, count);
            if k.is_multiple_of(2) {
                order.swap(i, k - 1);
            } else {
                order.swap(0, k - 1);
            }
        }
    }
    heap_permute(&mut order, n, u, v, &mut total, &mut count);

    let expected_mi = total / count as f64;
    let h_max = entropy(u).max(entropy(v));
    let denom = h_max - expected_mi;
    if denom.abs() < 1e-12 {
        return 0.0;
    }
    (mutual_information(u, v) - expected_mi) / denom
}
