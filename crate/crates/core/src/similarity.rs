//! Pairwise motion-pattern similarity and the per-frame similarity graph.
//!
//! The dissimilarity between two tracks is the symmetrized KL divergence
//! of their filtered state posteriors, mapped to `(0, 1]` through
//! `exp(-d / k)`. The scaling factor `k` grows linearly with the mean
//! square-root box area of the pair, so that the same relative motion
//! scores alike for near and far objects.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::tracking::{TrackState, STATE_DIM};

/// Slope and offset of the similarity scaling factor. Both must be
/// strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityParams {
    pub a: f64,
    pub b: f64,
}

impl Default for SimilarityParams {
    fn default() -> Self {
        Self { a: 8.0, b: 10.0 }
    }
}

impl SimilarityParams {
    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || self.a <= 0.0 {
            return Err(Error::Config(format!("a must be positive, got {}", self.a)));
        }
        if !self.b.is_finite() || self.b <= 0.0 {
            return Err(Error::Config(format!("b must be positive, got {}", self.b)));
        }
        Ok(())
    }
}

/// Symmetric weighted adjacency over the tracks of one frame.
///
/// `ids` is sorted ascending and indexes the rows/columns of `weights`;
/// the diagonal is 1 by the self-similarity convention and all entries
/// lie in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    pub ids: Vec<u64>,
    pub weights: DMatrix<f64>,
}

impl SimilarityGraph {
    pub fn n(&self) -> usize {
        self.ids.len()
    }
}

fn cholesky_of(state: &TrackState) -> Result<Cholesky<f64, nalgebra::Const<STATE_DIM>>> {
    Cholesky::new(state.cov).ok_or_else(|| Error::Numeric {
        id: state.id,
        msg: "covariance is not positive-definite".to_string(),
    })
}

/// Closed-form KL divergence `D(p || q)` between the Gaussian posteriors
/// of two tracks. Solved through Cholesky factors; never forms an
/// explicit inverse.
pub fn gaussian_kl(p: &TrackState, q: &TrackState) -> Result<f64> {
    let chol_p = cholesky_of(p)?;
    let chol_q = cholesky_of(q)?;
    let ln_det_p: f64 = 2.0 * chol_p.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let ln_det_q: f64 = 2.0 * chol_q.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let trace = chol_q.solve(&p.cov).trace();
    let delta = q.mean - p.mean;
    let quad = delta.dot(&chol_q.solve(&delta));
    let kl = 0.5 * (trace + quad - STATE_DIM as f64 + ln_det_q - ln_det_p);
    // Round-off can push the identical-Gaussian case a hair below zero.
    Ok(kl.max(0.0))
}

/// Symmetrized KL divergence: the mean of both directed divergences.
pub fn symmetric_kl(p: &TrackState, q: &TrackState) -> Result<f64> {
    Ok((gaussian_kl(p, q)? + gaussian_kl(q, p)?) / 2.0)
}

/// Similarity scaling factor: linear in the mean square-root box area of
/// the pair, evaluated on the filtered width/height means.
pub fn scale_factor(p: &TrackState, q: &TrackState, params: &SimilarityParams) -> Result<f64> {
    let mut roots = [0.0f64; 2];
    for (slot, state) in roots.iter_mut().zip([p, q]) {
        let (w, h) = (state.width(), state.height());
        if !(w.is_finite() && h.is_finite()) || w <= 0.0 || h <= 0.0 {
            return Err(Error::Numeric {
                id: state.id,
                msg: format!("filtered box dimensions are not positive (w={w}, h={h})"),
            });
        }
        *slot = (w * h).sqrt();
    }
    Ok(params.a * (roots[0] + roots[1]) / 2.0 + params.b)
}

/// Normalized motion similarity `exp(-d / k)` in `(0, 1]`.
pub fn similarity(p: &TrackState, q: &TrackState, params: &SimilarityParams) -> Result<f64> {
    let d = symmetric_kl(p, q)?;
    let k = scale_factor(p, q, params)?;
    let s = (-d / k).exp();
    // Clamp away underflow so weights stay strictly positive.
    Ok(s.max(f64::MIN_POSITIVE))
}

/// Assembles the similarity graph for one frame, rows/columns in
/// ascending id order.
pub fn build_graph(tracks: &[TrackState], params: &SimilarityParams) -> Result<SimilarityGraph> {
    assert!(!tracks.is_empty(), "build_graph requires at least one track");
    let mut ordered: Vec<&TrackState> = tracks.iter().collect();
    ordered.sort_by_key(|t| t.id);
    for pair in ordered.windows(2) {
        assert!(pair[0].id != pair[1].id, "build_graph requires distinct track ids");
    }

    let n = ordered.len();
    let mut weights = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let s = similarity(ordered[i], ordered[j], params)?;
            weights[(i, j)] = s;
            weights[(j, i)] = s;
        }
    }
    Ok(SimilarityGraph {
        ids: ordered.iter().map(|t| t.id).collect(),
        weights,
    })
}
