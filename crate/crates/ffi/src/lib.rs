//! C ABI over the groupwalk engine.
//!
//! The engine is exposed as an opaque handle created from a plain-old-data
//! config struct; every fallible call returns a [`GwStatus`] code and
//! leaves a human-readable message retrievable through
//! [`gw_last_error_message`]. The generated header lives at
//! `include/groupwalk.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use groupwalk::pipeline::{Engine, RunConfig};
use groupwalk::similarity::SimilarityParams;
use groupwalk::tracking::{Detection, KalmanConfig};
use groupwalk::{ami, Error, Partition};

/// Result code of a groupwalk call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Malformed per-frame input: duplicate ids, non-monotonic frames,
    /// non-positive boxes.
    FormatError = 3,
    /// Numeric failure inside the pipeline (singular covariance,
    /// eigensolver breakdown).
    NumericError = 4,
    InternalError = 5,
}

/// One detected bounding box handed to the engine.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GwDetection {
    pub frame: i64,
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

/// Engine configuration; obtain defaults from [`gw_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GwConfig {
    /// Similarity scaling slope.
    pub a: f64,
    /// Similarity scaling offset.
    pub b: f64,
    /// Measurement noise variance.
    pub meas_noise: f64,
    /// Process noise variance on position/size components.
    pub proc_noise_pos: f64,
    /// Process noise variance on flow components.
    pub proc_noise_vel: f64,
    /// Initial covariance of position/size components for new tracks.
    pub init_cov_pos: f64,
    /// Initial covariance of flow components for new tracks.
    pub init_cov_vel: f64,
    /// Eigengap threshold coefficient.
    pub eigengap_coeff: f64,
    /// Seed for the k-means stage.
    pub kmeans_seed: u64,
    /// Drop tracks unseen for more than this many frames.
    pub max_gap: u32,
}

/// Opaque engine handle.
pub struct GwEngine {
    inner: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::default();
    });
}

fn status_of(err: &Error) -> GwStatus {
    match err {
        Error::Format { .. } | Error::FrameFormat { .. } | Error::Alignment { .. } => {
            GwStatus::FormatError
        }
        Error::Numeric { .. } | Error::Eigensolver(_) => GwStatus::NumericError,
        Error::Config(_) | Error::InvalidInput(_) => GwStatus::InvalidArgument,
        Error::Io(_) => GwStatus::InternalError,
    }
}

fn run_config(config: &GwConfig) -> RunConfig {
    RunConfig {
        params: SimilarityParams { a: config.a, b: config.b },
        kalman: KalmanConfig {
            meas_noise: config.meas_noise,
            proc_noise_pos: config.proc_noise_pos,
            proc_noise_vel: config.proc_noise_vel,
            init_cov_pos: config.init_cov_pos,
            init_cov_vel: config.init_cov_vel,
        },
        eigengap_coeff: config.eigengap_coeff,
        kmeans_seed: config.kmeans_seed,
        max_gap: config.max_gap,
        burn_in: 0,
    }
}

/// Default engine configuration.
#[no_mangle]
pub extern "C" fn gw_config_default() -> GwConfig {
    let defaults = RunConfig::default();
    GwConfig {
        a: defaults.params.a,
        b: defaults.params.b,
        meas_noise: defaults.kalman.meas_noise,
        proc_noise_pos: defaults.kalman.proc_noise_pos,
        proc_noise_vel: defaults.kalman.proc_noise_vel,
        init_cov_pos: defaults.kalman.init_cov_pos,
        init_cov_vel: defaults.kalman.init_cov_vel,
        eigengap_coeff: defaults.eigengap_coeff,
        kmeans_seed: defaults.kmeans_seed,
        max_gap: defaults.max_gap,
    }
}

/// Creates an engine. Returns NULL on invalid configuration; the reason
/// is available through [`gw_last_error_message`].
///
/// # Safety
/// `config` must be NULL or point to a valid [`GwConfig`].
#[no_mangle]
pub unsafe extern "C" fn gw_engine_new(config: *const GwConfig) -> *mut GwEngine {
    clear_last_error();
    if config.is_null() {
        set_last_error("config pointer is NULL");
        return ptr::null_mut();
    }
    let config = run_config(&*config);
    match Engine::new(config) {
        Ok(inner) => Box::into_raw(Box::new(GwEngine { inner })),
        Err(err) => {
            set_last_error(&err.to_string());
            ptr::null_mut()
        }
    }
}

/// Destroys an engine created by [`gw_engine_new`]. NULL is a no-op.
///
/// # Safety
/// `engine` must be NULL or a pointer returned by [`gw_engine_new`] that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn gw_engine_free(engine: *mut GwEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Feeds one frame of detections through the engine.
///
/// Frames must strictly ascend across calls. On success writes the
/// cluster label of `detections[i]` (1-based, `1..=*out_cluster_count`)
/// into `out_labels[i]`, the selected cluster count into
/// `out_cluster_count`, and whether any cluster holds three or more
/// tracks into `out_event_active`.
///
/// # Safety
/// `engine` must be a live engine handle; `detections` must point to
/// `n_detections` elements (NULL is allowed when `n_detections` is 0);
/// `out_labels` must have room for `n_detections` elements (NULL allowed
/// when `n_detections` is 0); `out_cluster_count` and `out_event_active`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gw_engine_step(
    engine: *mut GwEngine,
    frame: i64,
    detections: *const GwDetection,
    n_detections: usize,
    out_labels: *mut u32,
    out_cluster_count: *mut usize,
    out_event_active: *mut bool,
) -> GwStatus {
    clear_last_error();
    if engine.is_null() || out_cluster_count.is_null() || out_event_active.is_null() {
        set_last_error("engine or output pointer is NULL");
        return GwStatus::NullPointer;
    }
    if n_detections > 0 && (detections.is_null() || out_labels.is_null()) {
        set_last_error("detections/out_labels are NULL for a non-empty frame");
        return GwStatus::NullPointer;
    }

    let engine = &mut (*engine).inner;
    let dets: Vec<Detection> = if n_detections == 0 {
        Vec::new()
    } else {
        std::slice::from_raw_parts(detections, n_detections)
            .iter()
            .map(|d| Detection { frame: d.frame, id: d.id, x: d.x, y: d.y, w: d.w, h: d.h })
            .collect()
    };

    let result = catch_unwind(AssertUnwindSafe(|| engine.step(frame, &dets)));
    match result {
        Ok(Ok(output)) => {
            let label_of: std::collections::BTreeMap<u64, usize> =
                output.ids.iter().copied().zip(output.labels.iter().copied()).collect();
            for (i, det) in dets.iter().enumerate() {
                // Every input id is present: step either succeeded with
                // exactly these ids or errored out above.
                *out_labels.add(i) = label_of[&det.id] as u32;
            }
            *out_cluster_count = output.m;
            *out_event_active = output.event;
            GwStatus::Ok
        }
        Ok(Err(err)) => {
            set_last_error(&err.to_string());
            status_of(&err)
        }
        Err(_) => {
            set_last_error("internal panic in gw_engine_step");
            GwStatus::InternalError
        }
    }
}

/// Adjusted Mutual Information between two labelings of the same `len`
/// items. Labels are arbitrary integers; `len` must be at least 1.
///
/// # Safety
/// `labels_a` and `labels_b` must point to `len` elements each and
/// `out_score` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gw_ami(
    labels_a: *const i64,
    labels_b: *const i64,
    len: usize,
    out_score: *mut f64,
) -> GwStatus {
    clear_last_error();
    if labels_a.is_null() || labels_b.is_null() || out_score.is_null() {
        set_last_error("label or output pointer is NULL");
        return GwStatus::NullPointer;
    }
    if len == 0 {
        set_last_error("partitions need at least one item");
        return GwStatus::InvalidArgument;
    }
    let a = std::slice::from_raw_parts(labels_a, len).to_vec();
    let b = std::slice::from_raw_parts(labels_b, len).to_vec();
    match catch_unwind(|| ami(&Partition::new(a), &Partition::new(b))) {
        Ok(score) => {
            *out_score = score;
            GwStatus::Ok
        }
        Err(_) => {
            set_last_error("internal panic in gw_ami");
            GwStatus::InternalError
        }
    }
}

/// Message describing the most recent failure on this thread, or an
/// empty string. The pointer stays valid until the next groupwalk call
/// on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn gw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}
