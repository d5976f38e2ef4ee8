//! Per-object Kalman filtering of bounding-box tracks.
//!
//! Every tracked object carries a Gaussian posterior over the 8-dimensional
//! state `[x, y, w, h, x', y', w', h']`: box position, box size and their
//! per-frame flows. Prediction follows a constant-velocity model with
//! dt = 1 frame; the measurement observes the first four components.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Cholesky, SMatrix, SVector};

use crate::error::{Error, Result};

/// Dimension of the filtered state.
pub const STATE_DIM: usize = 8;
/// Dimension of a bounding-box observation.
pub const OBS_DIM: usize = 4;

pub type StateVector = SVector<f64, STATE_DIM>;
pub type StateMatrix = SMatrix<f64, STATE_DIM, STATE_DIM>;
type ObsVector = SVector<f64, OBS_DIM>;
type ObsMatrix = SMatrix<f64, OBS_DIM, OBS_DIM>;
type ObsModel = SMatrix<f64, OBS_DIM, STATE_DIM>;

/// One observed bounding box: the pipeline's input record.
///
/// `(x, y)` is the top-left corner in image-plane pixels; `w` and `h`
/// must be strictly positive. Ids are opaque and stable across frames,
/// and unique within one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub frame: i64,
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Detection {
    /// Checks the per-record invariants, returning a description of the
    /// first violation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err(format!(
                "id {}: box dimensions must be positive (w={}, h={})",
                self.id, self.w, self.h
            ));
        }
        if !self.x.is_finite() || !self.y.is_finite() || !self.w.is_finite() || !self.h.is_finite()
        {
            return Err(format!("id {}: non-finite box coordinates", self.id));
        }
        Ok(())
    }

    fn observation(&self) -> ObsVector {
        ObsVector::new(self.x, self.y, self.w, self.h)
    }
}

/// Noise and initialization scalars for the per-track Kalman filters.
///
/// Defaults: measurement noise 10 (applied as `10*I4`), process noise
/// `diag(10*I4, 2*I4)`, and a wide diagonal prior for new tracks so the
/// first few updates dominate the zero-flow initialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanConfig {
    /// Measurement noise variance, applied to all four observed components.
    pub meas_noise: f64,
    /// Per-frame process noise variance on the four position/size components.
    pub proc_noise_pos: f64,
    /// Per-frame process noise variance on the four flow components.
    pub proc_noise_vel: f64,
    /// Initial covariance for position/size components of a new track.
    pub init_cov_pos: f64,
    /// Initial covariance for flow components of a new track.
    pub init_cov_vel: f64,
}

impl Default for KalmanConfig {
    fn default() -> Self {
        Self {
            meas_noise: 10.0,
            proc_noise_pos: 10.0,
            proc_noise_vel: 2.0,
            init_cov_pos: 100.0,
            init_cov_vel: 25.0,
        }
    }
}

impl KalmanConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("meas_noise", self.meas_noise),
            ("proc_noise_pos", self.proc_noise_pos),
            ("proc_noise_vel", self.proc_noise_vel),
            ("init_cov_pos", self.init_cov_pos),
            ("init_cov_vel", self.init_cov_vel),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be a positive finite number, got {value}"
                )));
            }
        }
        Ok(())
    }

    fn process_noise(&self) -> StateMatrix {
        let mut q = StateMatrix::zeros();
        for i in 0..OBS_DIM {
            q[(i, i)] = self.proc_noise_pos;
            q[(i + OBS_DIM, i + OBS_DIM)] = self.proc_noise_vel;
        }
        q
    }
}

/// Gaussian posterior over the 8-D state of one tracked object.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub id: u64,
    pub mean: StateVector,
    pub cov: StateMatrix,
    pub last_frame: i64,
}

impl TrackState {
    /// Filtered box width (third mean component).
    pub fn width(&self) -> f64 {
        self.mean[2]
    }

    /// Filtered box height (fourth mean component).
    pub fn height(&self) -> f64 {
        self.mean[3]
    }
}

fn transition(dt: f64) -> StateMatrix {
    let mut f = StateMatrix::identity();
    for i in 0..OBS_DIM {
        f[(i, i + OBS_DIM)] = dt;
    }
    f
}

fn measurement_model() -> ObsModel {
    let mut h = ObsModel::zeros();
    for i in 0..OBS_DIM {
        h[(i, i)] = 1.0;
    }
    h
}

fn symmetrize(m: StateMatrix) -> StateMatrix {
    (m + m.transpose()) * 0.5
}

/// Starts a track from its first detection: zero initial flows and a wide
/// diagonal covariance.
pub fn init_track(det: &Detection, cfg: &KalmanConfig) -> TrackState {
    let mut mean = StateVector::zeros();
    mean[0] = det.x;
    mean[1] = det.y;
    mean[2] = det.w;
    mean[3] = det.h;
    let mut cov = StateMatrix::zeros();
    for i in 0..OBS_DIM {
        cov[(i, i)] = cfg.init_cov_pos;
        cov[(i + OBS_DIM, i + OBS_DIM)] = cfg.init_cov_vel;
    }
    TrackState {
        id: det.id,
        mean,
        cov,
        last_frame: det.frame,
    }
}

/// Advances a track by `frames_elapsed` frames under the constant-velocity
/// model. Process noise is applied once per elapsed frame, so a missed
/// frame behaves exactly like a frame with no measurement.
pub fn predict(state: &TrackState, frames_elapsed: u32, cfg: &KalmanConfig) -> TrackState {
    assert!(frames_elapsed >= 1, "predict requires at least one elapsed frame");
    let f = transition(1.0);
    let q = cfg.process_noise();
    let mut mean = state.mean;
    let mut cov = state.cov;
    for _ in 0..frames_elapsed {
        mean = f * mean;
        cov = symmetrize(f * cov * f.transpose() + q);
    }
    TrackState {
        id: state.id,
        mean,
        cov,
        last_frame: state.last_frame,
    }
}

/// Folds one detection into a predicted track state.
///
/// Uses the Joseph-form covariance update, which keeps the posterior
/// symmetric positive-definite under floating point.
pub fn update(state: &TrackState, det: &Detection, cfg: &KalmanConfig) -> Result<TrackState> {
    debug_assert_eq!(state.id, det.id, "update requires matching track and detection ids");
    let h = measurement_model();
    let r = ObsMatrix::identity() * cfg.meas_noise;
    let innovation_cov = h * state.cov * h.transpose() + r;
    let chol = Cholesky::new(innovation_cov).ok_or_else(|| Error::Numeric {
        id: state.id,
        msg: "singular innovation covariance in Kalman update".to_string(),
    })?;
    let gain = state.cov * h.transpose() * chol.inverse();
    let innovation = det.observation() - h * state.mean;
    let mean = state.mean + gain * innovation;
    let ikh = StateMatrix::identity() - gain * h;
    let cov = symmetrize(ikh * state.cov * ikh.transpose() + gain * r * gain.transpose());
    Ok(TrackState {
        id: state.id,
        mean,
        cov,
        last_frame: det.frame,
    })
}

/// The set of live tracks, advanced frame by frame.
///
/// Tracks unseen for more than `max_gap` frames are dropped at the start
/// of a step; a detection with a dropped id starts a fresh track.
#[derive(Debug, Clone, Default)]
pub struct TrackStore {
    tracks: BTreeMap<u64, TrackState>,
}

impl TrackStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&TrackState> {
        self.tracks.get(&id)
    }

    /// Processes the detections of one frame: known ids are
    /// predicted-then-updated, unknown ids spawn new tracks, and tracks
    /// whose gap to `frame` exceeds `max_gap` are dropped.
    ///
    /// Returns all live tracks in ascending id order.
    pub fn step_frame(
        &mut self,
        frame: i64,
        dets: &[Detection],
        cfg: &KalmanConfig,
        max_gap: u32,
    ) -> Result<Vec<TrackState>> {
        let mut seen = BTreeSet::new();
        for det in dets {
            if det.frame != frame {
                return Err(Error::FrameFormat {
                    frame,
                    msg: format!("detection for id {} carries frame {}", det.id, det.frame),
                });
            }
            det.validate().map_err(|msg| Error::FrameFormat { frame, msg })?;
            if !seen.insert(det.id) {
                return Err(Error::FrameFormat {
                    frame,
                    msg: format!("duplicate id {} within the frame", det.id),
                });
            }
        }

        self.tracks
            .retain(|_, track| frame - track.last_frame <= i64::from(max_gap));

        for det in dets {
            let next = match self.tracks.get(&det.id) {
                Some(track) => {
                    let elapsed = det.frame - track.last_frame;
                    if elapsed < 1 {
                        return Err(Error::FrameFormat {
                            frame,
                            msg: format!(
                                "detection for id {} does not advance its track (last frame {})",
                                det.id, track.last_frame
                            ),
                        });
                    }
                    let predicted = predict(track, elapsed as u32, cfg);
                    update(&predicted, det, cfg)?
                }
                None => init_track(det, cfg),
            };
            self.tracks.insert(det.id, next);
        }

        Ok(self.tracks.values().cloned().collect())
    }
}
