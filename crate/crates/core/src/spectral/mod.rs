//! Spectral clustering of the motion similarity graph.
//!
//! The unnormalized graph Laplacian `L = D - W` is diagonalized, the
//! cluster count is chosen by the eigengap rule, and the rows of the
//! matrix of leading eigenvectors are grouped by k-means. Cluster labels
//! are renumbered canonically: the cluster of the lowest track id is 1,
//! the next previously-unseen cluster is 2, and so on.

mod jacobi;
mod kmeans;

use nalgebra::DMatrix;

pub use jacobi::{eig_sym, Spectrum};
pub use kmeans::kmeans;

use crate::error::Result;
use crate::similarity::SimilarityGraph;

/// Knobs for the spectral stage: the eigengap threshold coefficient and
/// the k-means seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub eigengap_coeff: f64,
    pub kmeans_seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { eigengap_coeff: 0.8, kmeans_seed: 0 }
    }
}

/// Per-frame cluster assignment: `labels[i]` in `1..=m` pairs with
/// `ids[i]`; the Laplacian eigenvalues are retained for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameClustering {
    pub ids: Vec<u64>,
    pub labels: Vec<usize>,
    pub m: usize,
    pub eigenvalues: Vec<f64>,
}

/// Unnormalized graph Laplacian `L = D - W`, with node degrees summed
/// over all columns including the unit self-loop. The self-loop cancels
/// in `D - W`, so the diagonal holds the off-diagonal degree.
pub fn laplacian(graph: &SimilarityGraph) -> DMatrix<f64> {
    let n = graph.n();
    let w = &graph.weights;
    let mut l = -w.clone();
    for i in 0..n {
        let degree: f64 = w.row(i).iter().sum();
        l[(i, i)] = degree - w[(i, i)];
    }
    l
}

/// Eigengap cluster-count selection: the smallest index `i` whose gap
/// `gap[i] = eig[i+1] - eig[i]` reaches `coeff / n` times the total gap
/// mass. Falls back to `n` if no gap qualifies (degenerate spectra).
pub fn eigengap_select(eigenvalues: &[f64], coeff: f64) -> usize {
    let n = eigenvalues.len();
    assert!(n >= 1, "eigengap_select requires at least one eigenvalue");
    if n == 1 {
        return 1;
    }
    let gaps: Vec<f64> = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    let total: f64 = gaps.iter().sum();
    let threshold = coeff / n as f64 * total;
    gaps.iter()
        .position(|&gap| gap >= threshold)
        .map(|i| i + 1)
        .unwrap_or(n)
}

/// Full spectral clustering of one frame's similarity graph.
pub fn spectral_cluster(graph: &SimilarityGraph, opts: &SpectralOptions) -> Result<FrameClustering> {
    let spectrum = eig_sym(&laplacian(graph))?;
    let m = eigengap_select(&spectrum.eigenvalues, opts.eigengap_coeff);
    let embedding = spectrum.eigenvectors.columns(0, m).into_owned();
    let raw = kmeans(&embedding, m, opts.kmeans_seed);

    // Canonical renumbering by first appearance in ascending-id order.
    let mut mapping = vec![0usize; m];
    let mut next = 0usize;
    let labels = raw
        .iter()
        .map(|&r| {
            if mapping[r] == 0 {
                next += 1;
                mapping[r] = next;
            }
            mapping[r]
        })
        .collect::<Vec<usize>>();
    debug_assert_eq!(next, m, "every cluster label must appear");

    Ok(FrameClustering {
        ids: graph.ids.clone(),
        labels,
        m,
        eigenvalues: spectrum.eigenvalues,
    })
}
