//! Exercises the C ABI from Rust: handle lifecycle, per-frame stepping,
//! error codes and the generated header artifact.

use std::ffi::CStr;
use std::path::Path;

use groupwalk_ffi::{
    gw_ami, gw_config_default, gw_engine_free, gw_engine_new, gw_engine_step,
    gw_last_error_message, GwDetection, GwStatus,
};

fn det(frame: i64, id: u64, x: f64, y: f64) -> GwDetection {
    GwDetection { frame, id, x, y, w: 10.0, h: 20.0 }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gw_last_error_message()).to_string_lossy().into_owned() }
}

#[test]
fn engine_lifecycle_and_stepping() {
    let config = gw_config_default();
    let engine = unsafe { gw_engine_new(&config) };
    assert!(!engine.is_null(), "engine creation failed: {}", last_error());

    // Two walkers moving together, one moving away: after a few frames
    // the pair and the loner separate, nobody reaches group size.
    let mut labels = [0u32; 3];
    let mut m = 0usize;
    let mut event = false;
    for frame in 0..30i64 {
        let t = frame as f64;
        let dets = [
            det(frame, 1, 2.0 * t, 0.0),
            det(frame, 2, 2.0 * t + 12.0, 0.0),
            det(frame, 3, 300.0 - 2.0 * t, 200.0),
        ];
        let status = unsafe {
            gw_engine_step(engine, frame, dets.as_ptr(), dets.len(), labels.as_mut_ptr(), &mut m,
                &mut event)
        };
        assert_eq!(status, GwStatus::Ok, "step failed: {}", last_error());
    }
    assert_eq!(m, 2, "pair and loner should form two clusters");
    assert_eq!(labels[0], labels[1]);
    assert_ne!(labels[0], labels[2]);
    assert!(!event, "no cluster of three is present");

    // A third walker joining the pair activates the event.
    for frame in 30..60i64 {
        let t = frame as f64;
        let dets = [
            det(frame, 1, 2.0 * t, 0.0),
            det(frame, 2, 2.0 * t + 12.0, 0.0),
            det(frame, 3, 2.0 * t + 24.0, 0.0),
        ];
        let status = unsafe {
            gw_engine_step(engine, frame, dets.as_ptr(), dets.len(), labels.as_mut_ptr(), &mut m,
                &mut event)
        };
        assert_eq!(status, GwStatus::Ok);
    }
    assert_eq!(m, 1);
    assert!(event, "three co-moving walkers must raise the event");

    unsafe { gw_engine_free(engine) };
}

#[test]
fn empty_frames_are_accepted() {
    let config = gw_config_default();
    let engine = unsafe { gw_engine_new(&config) };
    let mut m = 7usize;
    let mut event = true;
    let status = unsafe {
        gw_engine_step(engine, 0, std::ptr::null(), 0, std::ptr::null_mut(), &mut m, &mut event)
    };
    assert_eq!(status, GwStatus::Ok);
    assert_eq!(m, 0);
    assert!(!event);
    unsafe { gw_engine_free(engine) };
}

#[test]
fn invalid_configuration_is_rejected() {
    let mut config = gw_config_default();
    config.a = -1.0;
    let engine = unsafe { gw_engine_new(&config) };
    assert!(engine.is_null());
    assert!(last_error().contains("a must be positive"), "got: {}", last_error());
}

#[test]
fn null_pointers_are_reported() {
    let engine = unsafe { gw_engine_new(std::ptr::null()) };
    assert!(engine.is_null());

    let mut out = 0.0f64;
    let status = unsafe { gw_ami(std::ptr::null(), std::ptr::null(), 3, &mut out) };
    assert_eq!(status, GwStatus::NullPointer);
}

#[test]
fn duplicate_ids_and_frame_regressions_are_format_errors() {
    let config = gw_config_default();
    let engine = unsafe { gw_engine_new(&config) };
    let mut labels = [0u32; 2];
    let mut m = 0usize;
    let mut event = false;

    let dup = [det(0, 1, 0.0, 0.0), det(0, 1, 5.0, 0.0)];
    let status = unsafe {
        gw_engine_step(engine, 0, dup.as_ptr(), 2, labels.as_mut_ptr(), &mut m, &mut event)
    };
    assert_eq!(status, GwStatus::FormatError);
    assert!(last_error().contains("duplicate id"), "got: {}", last_error());

    let ok = [det(5, 1, 0.0, 0.0)];
    let status = unsafe {
        gw_engine_step(engine, 5, ok.as_ptr(), 1, labels.as_mut_ptr(), &mut m, &mut event)
    };
    assert_eq!(status, GwStatus::Ok);
    let stale = [det(4, 1, 0.0, 0.0)];
    let status = unsafe {
        gw_engine_step(engine, 4, stale.as_ptr(), 1, labels.as_mut_ptr(), &mut m, &mut event)
    };
    assert_eq!(status, GwStatus::FormatError);
    assert!(last_error().contains("non-monotonic"), "got: {}", last_error());

    unsafe { gw_engine_free(engine) };
}

#[test]
fn ami_matches_library_semantics() {
    let a = [1i64, 1, 2, 2];
    let b = [5i64, 5, -1, -1];
    let mut score = 0.0f64;
    let status = unsafe { gw_ami(a.as_ptr(), b.as_ptr(), 4, &mut score) };
    assert_eq!(status, GwStatus::Ok);
    assert_eq!(score, 1.0);

    let crossing = [1i64, 2, 1, 2];
    let status = unsafe { gw_ami(a.as_ptr(), crossing.as_ptr(), 4, &mut score) };
    assert_eq!(status, GwStatus::Ok);
    assert!(score <= 1e-9, "crossing partitions scored {score}");

    let status = unsafe { gw_ami(a.as_ptr(), b.as_ptr(), 0, &mut score) };
    assert_eq!(status, GwStatus::InvalidArgument);
}

#[test]
fn header_is_generated_with_the_exported_surface() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/groupwalk.h");
    let text = std::fs::read_to_string(&header)
        .unwrap_or_else(|e| panic!("missing generated header {}: {e}", header.display()));
    for symbol in [
        "gw_config_default",
        "gw_engine_new",
        "gw_engine_free",
        "gw_engine_step",
        "gw_ami",
        "gw_last_error_message",
        "GwDetection",
        "GwConfig",
        "GwStatus",
    ] {
        assert!(text.contains(symbol), "header must declare {symbol}");
    }
}
