//! Clustering agreement scoring with Adjusted Mutual Information.
//!
//! AMI corrects mutual information for chance agreement under the
//! hypergeometric permutation model and normalizes by the larger of the
//! two partition entropies: `(MI - E[MI]) / (max(H(u), H(v)) - E[MI])`.
//! The expectation is the exact finite sum over feasible contingency
//! cells, not an approximation. Identical partitions score exactly 1;
//! anti-correlated ones may dip slightly below 0 and are not clipped.

use serde::{Deserialize, Serialize};

use crate::spectral::FrameClustering;

/// A labeling of `n` items into clusters. Label values are arbitrary;
/// only the induced partition matters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<i64>,
}

impl Partition {
    /// Panics on an empty labeling.
    pub fn new(labels: Vec<i64>) -> Self {
        assert!(!labels.is_empty(), "a partition needs at least one item");
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false: the constructor rejects empty labelings.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    /// Labels renumbered by first appearance; two partitions are equal
    /// as partitions iff their canonical forms are equal.
    pub fn canonical(&self) -> Vec<usize> {
        let mut mapping = std::collections::HashMap::new();
        let mut next = 0usize;
        self.labels
            .iter()
            .map(|l| {
                *mapping.entry(*l).or_insert_with(|| {
                    next += 1;
                    next
                })
            })
            .collect()
    }

    /// Size of the largest cluster.
    pub fn max_cluster_size(&self) -> usize {
        let canon = self.canonical();
        let k = *canon.iter().max().expect("non-empty");
        let mut counts = vec![0usize; k];
        for c in canon {
            counts[c - 1] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }
}

impl From<&FrameClustering> for Partition {
    fn from(clustering: &FrameClustering) -> Self {
        Partition::new(clustering.labels.iter().map(|&l| l as i64).collect())
    }
}

/// Co-occurrence table of two partitions over the same items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contingency {
    pub counts: Vec<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    pub n: usize,
}

/// Builds the contingency table. Panics if the partitions cover
/// different item counts.
pub fn contingency(u: &Partition, v: &Partition) -> Contingency {
    assert_eq!(u.len(), v.len(), "partitions must cover the same items");
    let cu = u.canonical();
    let cv = v.canonical();
    let rows = *cu.iter().max().expect("non-empty");
    let cols = *cv.iter().max().expect("non-empty");
    let mut counts = vec![vec![0usize; cols]; rows];
    for (&a, &b) in cu.iter().zip(&cv) {
        counts[a - 1][b - 1] += 1;
    }
    let row_sums: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..cols).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
    Contingency { counts, row_sums, col_sums, n: u.len() }
}

fn entropy(sizes: &[usize], n: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn mutual_information(table: &Contingency) -> f64 {
    let n = table.n as f64;
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                let ai = table.row_sums[i] as f64;
                let bj = table.col_sums[j] as f64;
                mi += nij / n * (n * nij / (ai * bj)).ln();
            }
        }
    }
    mi
}

/// Exact expected mutual information under the permutation model: the
/// hypergeometric sum over feasible cell counts for every marginal pair.
fn expected_mutual_information(table: &Contingency) -> f64 {
    let n = table.n;
    let nf = n as f64;
    let mut ln_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let mut emi = 0.0;
    for &ai in &table.row_sums {
        for &bj in &table.col_sums {
            let lo = 1.max((ai + bj).saturating_sub(n));
            let hi = ai.min(bj);
            for nij in lo..=hi {
                let ln_weight = ln_fact[ai] + ln_fact[bj] + ln_fact[n - ai] + ln_fact[n - bj]
                    - ln_fact[n]
                    - ln_fact[nij]
                    - ln_fact[ai - nij]
                    - ln_fact[bj - nij]
                    - ln_fact[n + nij - ai - bj];
                let term = nij as f64 / nf * (nf * nij as f64 / (ai as f64 * bj as f64)).ln();
                emi += term * ln_weight.exp();
            }
        }
    }
    emi
}

/// Adjusted Mutual Information between two same-length partitions.
///
/// Symmetric, invariant to relabeling, 1.0 exactly for identical
/// partitions, and 0 in the degenerate case where the normalizer
/// collapses (both partitions trivial but unequal).
pub fn ami(u: &Partition, v: &Partition) -> f64 {
    assert_eq!(u.len(), v.len(), "partitions must cover the same items");
    if u.canonical() == v.canonical() {
        return 1.0;
    }
    let table = contingency(u, v);
    let n = table.n as f64;
    let h_u = entropy(&table.row_sums, n);
    let h_v = entropy(&table.col_sums, n);
    let mi = mutual_information(&table);
    let emi = expected_mutual_information(&table);
    let denom = h_u.max(h_v) - emi;
    if denom.abs() < 1e-12 {
        return 0.0;
    }
    (mi - emi) / denom
}

/// Arithmetic mean of per-frame AMI values. Panics on an empty list.
pub fn sequence_score(frames: &[(Partition, Partition)]) -> f64 {
    assert!(!frames.is_empty(), "sequence_score requires at least one frame");
    frames.iter().map(|(z, g)| ami(z, g)).sum::<f64>() / frames.len() as f64
}

/// One ground-truth record: the annotated group of a track at a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub frame: i64,
    pub id: u64,
    pub group: i64,
}
