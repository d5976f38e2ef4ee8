//! The online engine and the end-user operations built on it.
//!
//! [`Engine::step`] consumes one frame of detections and emits that
//! frame's clustering and event state; output at frame `t` depends only
//! on frames up to `t`. [`run`] streams a whole detection file through
//! the engine as JSON Lines, [`evaluate`] scores the output against
//! ground truth, and [`sweep`] repeats the evaluation over a grid of
//! similarity parameters.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{ami, Partition, TruthRecord};
use crate::events::{detect_group_event, Group, GROUP_EVENT_MIN_SIZE};
use crate::similarity::{build_graph, SimilarityParams};
use crate::spectral::{spectral_cluster, SpectralOptions};
use crate::tracking::{Detection, KalmanConfig, TrackStore};

/// Everything the pipeline needs: similarity parameters, Kalman noise
/// scalars, the eigengap coefficient, the k-means seed, track lifetime
/// and the scoring burn-in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub params: SimilarityParams,
    pub kalman: KalmanConfig,
    pub eigengap_coeff: f64,
    pub kmeans_seed: u64,
    /// Tracks unseen for more than this many frames are dropped.
    pub max_gap: u32,
    /// Initial frames excluded from scoring while flow estimates converge.
    pub burn_in: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: SimilarityParams::default(),
            kalman: KalmanConfig::default(),
            eigengap_coeff: 0.8,
            kmeans_seed: 0,
            max_gap: 10,
            burn_in: 15,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.kalman.validate()?;
        if !self.eigengap_coeff.is_finite() || self.eigengap_coeff <= 0.0 {
            return Err(Error::Config(format!(
                "eigengap coefficient must be positive, got {}",
                self.eigengap_coeff
            )));
        }
        Ok(())
    }

    fn spectral_options(&self) -> SpectralOptions {
        SpectralOptions { eigengap_coeff: self.eigengap_coeff, kmeans_seed: self.kmeans_seed }
    }
}

/// One output record: the frame's track ids in ascending order, their
/// cluster labels, the selected cluster count, the event flag and the
/// qualifying groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameOutput {
    pub frame: i64,
    pub ids: Vec<u64>,
    pub labels: Vec<usize>,
    pub m: usize,
    pub event: bool,
    pub groups: Vec<Group>,
}

/// Online pipeline state: one Kalman track store plus the frame cursor.
#[derive(Debug, Clone)]
pub struct Engine {
    config: RunConfig,
    store: TrackStore,
    last_frame: Option<i64>,
}

impl Engine {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, store: TrackStore::new(), last_frame: None })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Processes one frame. Frames must strictly ascend across calls;
    /// gaps are fine and behave like empty frames in between.
    pub fn step(&mut self, frame: i64, detections: &[Detection]) -> Result<FrameOutput> {
        if let Some(last) = self.last_frame {
            if frame <= last {
                return Err(Error::FrameFormat {
                    frame,
                    msg: format!("non-monotonic frame order: already processed frame {last}"),
                });
            }
        }
        self.last_frame = Some(frame);

        let live =
            self.store
                .step_frame(frame, detections, &self.config.kalman, self.config.max_gap)?;
        let current: Vec<_> = live.into_iter().filter(|t| t.last_frame == frame).collect();
        if current.is_empty() {
            return Ok(FrameOutput {
                frame,
                ids: Vec::new(),
                labels: Vec::new(),
                m: 0,
                event: false,
                groups: Vec::new(),
            });
        }

        let graph = build_graph(&current, &self.config.params)?;
        let clustering = spectral_cluster(&graph, &self.config.spectral_options())?;
        let event = detect_group_event(frame, &clustering);
        Ok(FrameOutput {
            frame,
            ids: clustering.ids,
            labels: clustering.labels,
            m: clustering.m,
            event: event.active,
            groups: event.groups,
        })
    }
}

/// Splits a frame-grouped detection slice into per-frame slices over the
/// dense frame range `first..=last`; frames without detections appear as
/// empty slices.
fn frame_slices(detections: &[Detection]) -> Result<Vec<(i64, &[Detection])>> {
    if detections.is_empty() {
        return Ok(Vec::new());
    }
    for pair in detections.windows(2) {
        if pair[1].frame < pair[0].frame {
            return Err(Error::FrameFormat {
                frame: pair[1].frame,
                msg: format!("detections not grouped by ascending frame (after {})", pair[0].frame),
            });
        }
    }
    let first = detections[0].frame;
    let last = detections[detections.len() - 1].frame;
    let mut slices = Vec::with_capacity((last - first + 1) as usize);
    let mut cursor = 0usize;
    for frame in first..=last {
        let start = cursor;
        while cursor < detections.len() && detections[cursor].frame == frame {
            cursor += 1;
        }
        slices.push((frame, &detections[start..cursor]));
    }
    Ok(slices)
}

/// Runs the engine over every frame of the stream, collecting outputs.
pub fn collect_outputs(detections: &[Detection], config: &RunConfig) -> Result<Vec<FrameOutput>> {
    let mut engine = Engine::new(*config)?;
    frame_slices(detections)?
        .into_iter()
        .map(|(frame, dets)| engine.step(frame, dets))
        .collect()
}

/// Streams the per-frame outputs as JSON Lines. Output for frame `t`
/// is written before frame `t + 1` is read, so truncating the input at
/// any frame reproduces the corresponding output prefix byte for byte.
pub fn run<W: Write>(detections: &[Detection], config: &RunConfig, mut writer: W) -> Result<()> {
    let mut engine = Engine::new(*config)?;
    for (frame, dets) in frame_slices(detections)? {
        let output = engine.step(frame, dets)?;
        serde_json::to_writer(&mut writer, &output).map_err(std::io::Error::from)?;
        writeln!(writer)?;
    }
    Ok(())
}

/// Per-frame scoring detail within an evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub frame: i64,
    pub ami: f64,
    pub predicted_event: bool,
    pub truth_event: bool,
}

/// Sequence-level evaluation: mean AMI over scored frames plus event
/// precision/recall against the ground-truth-derived event stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mean_ami: f64,
    pub event_precision: f64,
    pub event_recall: f64,
    pub scored_frames: usize,
    pub frames: Vec<FrameScore>,
}

fn truth_by_frame(truth: &[TruthRecord]) -> Result<BTreeMap<i64, BTreeMap<u64, i64>>> {
    let mut by_frame: BTreeMap<i64, BTreeMap<u64, i64>> = BTreeMap::new();
    for record in truth {
        if by_frame
            .entry(record.frame)
            .or_default()
            .insert(record.id, record.group)
            .is_some()
        {
            return Err(Error::FrameFormat {
                frame: record.frame,
                msg: format!("duplicate ground-truth id {}", record.id),
            });
        }
    }
    Ok(by_frame)
}

/// Scores pipeline output against ground truth, frame by frame.
///
/// Burn-in frames (relative to the first detection frame) are excluded.
/// Every scored frame must carry the same id set in both streams.
pub fn evaluate(
    detections: &[Detection],
    truth: &[TruthRecord],
    config: &RunConfig,
) -> Result<EvalReport> {
    let outputs = collect_outputs(detections, config)?;
    let truth_frames = truth_by_frame(truth)?;
    if outputs.is_empty() {
        return Err(Error::InvalidInput("no frames to evaluate".into()));
    }
    let first = outputs[0].frame;
    let scoring_start = first + i64::from(config.burn_in);
    let last = outputs[outputs.len() - 1].frame;
    if let Some((&frame, _)) = truth_frames
        .iter()
        .find(|(&frame, ids)| (frame < first || frame > last) && !ids.is_empty())
    {
        return Err(Error::Alignment {
            frame,
            msg: "ground truth names a frame outside the detection range".into(),
        });
    }

    let mut frames = Vec::new();
    for output in &outputs {
        if output.frame < scoring_start {
            continue;
        }
        let truth_ids = truth_frames.get(&output.frame);
        match (output.ids.is_empty(), truth_ids) {
            (true, None) => continue,
            (true, Some(ids)) if ids.is_empty() => continue,
            (true, Some(_)) => {
                return Err(Error::Alignment {
                    frame: output.frame,
                    msg: "ground truth names ids but no detections were seen".into(),
                });
            }
            (false, None) => {
                return Err(Error::Alignment {
                    frame: output.frame,
                    msg: "no ground truth for a frame with detections".into(),
                });
            }
            (false, Some(truth_ids)) => {
                let expected: Vec<u64> = truth_ids.keys().copied().collect();
                if expected != output.ids {
                    return Err(Error::Alignment {
                        frame: output.frame,
                        msg: format!(
                            "id mismatch between output ({:?}) and ground truth ({:?})",
                            output.ids, expected
                        ),
                    });
                }
                let z = Partition::new(output.labels.iter().map(|&l| l as i64).collect());
                let g = Partition::new(output.ids.iter().map(|id| truth_ids[id]).collect());
                frames.push(FrameScore {
                    frame: output.frame,
                    ami: ami(&z, &g),
                    predicted_event: output.event,
                    truth_event: g.max_cluster_size() >= GROUP_EVENT_MIN_SIZE,
                });
            }
        }
    }

    if frames.is_empty() {
        return Err(Error::InvalidInput("no frames to score after burn-in".into()));
    }
    let mean_ami = frames.iter().map(|f| f.ami).sum::<f64>() / frames.len() as f64;
    let tp = frames.iter().filter(|f| f.predicted_event && f.truth_event).count() as f64;
    let fp = frames.iter().filter(|f| f.predicted_event && !f.truth_event).count() as f64;
    let fn_ = frames.iter().filter(|f| !f.predicted_event && f.truth_event).count() as f64;
    let event_precision = if tp + fp == 0.0 { 1.0 } else { tp / (tp + fp) };
    let event_recall = if tp + fn_ == 0.0 { 1.0 } else { tp / (tp + fn_) };
    Ok(EvalReport {
        mean_ami,
        event_precision,
        event_recall,
        scored_frames: frames.len(),
        frames,
    })
}

/// One cell of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub a: f64,
    pub b: f64,
    pub mean_ami: f64,
}

/// Evaluates every `(a, b)` combination of the grids with otherwise
/// identical configuration. Cells are independent.
pub fn sweep(
    detections: &[Detection],
    truth: &[TruthRecord],
    a_grid: &[f64],
    b_grid: &[f64],
    config: &RunConfig,
) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::with_capacity(a_grid.len() * b_grid.len());
    for &a in a_grid {
        for &b in b_grid {
            let mut cell_config = *config;
            cell_config.params = SimilarityParams { a, b };
            let report = evaluate(detections, truth, &cell_config)?;
            cells.push(SweepCell { a, b, mean_ami: report.mean_ami });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, ScenarioSpec};

    fn det(frame: i64, id: u64, x: f64, y: f64) -> Detection {
        Detection { frame, id, x, y, w: 10.0, h: 20.0 }
    }

    #[test]
    fn empty_frame_yields_inactive_output() {
        let mut engine = Engine::new(RunConfig::default()).unwrap();
        let out = engine.step(0, &[]).unwrap();
        assert_eq!(out, FrameOutput {
            frame: 0,
            ids: vec![],
            labels: vec![],
            m: 0,
            event: false,
            groups: vec![],
        });
    }

    #[test]
    fn single_track_is_one_inactive_cluster() {
        let mut engine = Engine::new(RunConfig::default()).unwrap();
        let out = engine.step(0, &[det(0, 1, 5.0, 5.0)]).unwrap();
        assert_eq!(out.ids, vec![1]);
        assert_eq!(out.labels, vec![1]);
        assert_eq!(out.m, 1);
        assert!(!out.event);
    }

    #[test]
    fn engine_rejects_non_monotonic_frames() {
        let mut engine = Engine::new(RunConfig::default()).unwrap();
        engine.step(5, &[]).unwrap();
        let err = engine.step(5, &[]).unwrap_err();
        assert!(err.to_string().contains("non-monotonic"), "got: {err}");
        let err = engine.step(3, &[]).unwrap_err();
        assert!(err.to_string().contains("frame 3"), "got: {err}");
    }

    #[test]
    fn gaps_between_detection_frames_become_empty_outputs() {
        let dets = vec![det(0, 1, 0.0, 0.0), det(3, 1, 3.0, 0.0)];
        let outputs = collect_outputs(&dets, &RunConfig::default()).unwrap();
        assert_eq!(outputs.len(), 4);
        assert_eq!(outputs[1].ids, Vec::<u64>::new());
        assert_eq!(outputs[2].ids, Vec::<u64>::new());
        assert_eq!(outputs[3].ids, vec![1]);
    }

    #[test]
    fn run_emits_one_json_line_per_frame() {
        let dets = vec![det(0, 1, 0.0, 0.0), det(0, 2, 1.0, 0.0), det(1, 1, 1.0, 0.0)];
        let mut buf = Vec::new();
        run(&dets, &RunConfig::default(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let parsed: FrameOutput = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(parsed.frame, 0);
        assert_eq!(parsed.ids, vec![1, 2]);
    }

    #[test]
    fn replay_is_byte_identical_and_causal() {
        let seq = generate(&ScenarioSpec::three_groups(40, 1.0, 9)).unwrap();
        let config = RunConfig::default();
        let mut first = Vec::new();
        run(&seq.detections, &config, &mut first).unwrap();
        let mut second = Vec::new();
        run(&seq.detections, &config, &mut second).unwrap();
        assert_eq!(first, second);

        let truncated: Vec<Detection> =
            seq.detections.iter().copied().filter(|d| d.frame <= 20).collect();
        let mut prefix = Vec::new();
        run(&truncated, &config, &mut prefix).unwrap();
        assert_eq!(&first[..prefix.len()], prefix.as_slice());
    }

    #[test]
    fn evaluate_perfect_match_scores_one() {
        // Two far-apart stationary pairs plus a crowd of three moving
        // together: after burn-in the clustering matches the truth.
        let seq = generate(&ScenarioSpec::three_groups(40, 0.0, 0)).unwrap();
        let report = evaluate(&seq.detections, &seq.truth, &RunConfig::default()).unwrap();
        assert_eq!(report.mean_ami, 1.0);
        assert_eq!(report.event_precision, 1.0);
        assert_eq!(report.event_recall, 1.0);
        assert_eq!(report.scored_frames, 25);
    }

    #[test]
    fn evaluate_half_match_scores_half() {
        // Three co-located tracks cluster together on both frames. The
        // truth agrees at frame 0 (AMI exactly 1) and splits everyone
        // at frame 1 (single-cluster vs singletons: AMI exactly 0).
        let mut dets = Vec::new();
        for frame in 0..2i64 {
            for id in 1..=3u64 {
                dets.push(det(frame, id, id as f64 * 11.0, 0.0));
            }
        }
        let truth = vec![
            TruthRecord { frame: 0, id: 1, group: 1 },
            TruthRecord { frame: 0, id: 2, group: 1 },
            TruthRecord { frame: 0, id: 3, group: 1 },
            TruthRecord { frame: 1, id: 1, group: 1 },
            TruthRecord { frame: 1, id: 2, group: 2 },
            TruthRecord { frame: 1, id: 3, group: 3 },
        ];
        let config = RunConfig { burn_in: 0, ..RunConfig::default() };
        let report = evaluate(&dets, &truth, &config).unwrap();
        assert_eq!(report.scored_frames, 2);
        assert_eq!(report.frames[0].ami, 1.0);
        assert_eq!(report.frames[1].ami, 0.0);
        assert_eq!(report.mean_ami, 0.5);
    }

    #[test]
    fn evaluate_rejects_misaligned_truth() {
        let seq = generate(&ScenarioSpec::three_groups(20, 0.0, 0)).unwrap();
        let mut truth = seq.truth.clone();
        truth.retain(|t| t.frame != 18);
        let err = evaluate(&seq.detections, &truth, &RunConfig::default()).unwrap_err();
        assert!(err.to_string().contains("frame 18"), "got: {err}");

        let mut truth = seq.truth.clone();
        for t in truth.iter_mut() {
            if t.frame == 19 && t.id == 1 {
                t.id = 99;
            }
        }
        let err = evaluate(&seq.detections, &truth, &RunConfig::default()).unwrap_err();
        assert!(err.to_string().contains("frame 19"), "got: {err}");
    }

    #[test]
    fn evaluate_needs_scoreable_frames() {
        let dets = vec![det(0, 1, 0.0, 0.0)];
        let err = evaluate(&dets, &[TruthRecord { frame: 0, id: 1, group: 1 }],
            &RunConfig::default()).unwrap_err();
        assert!(err.to_string().contains("no frames to score"), "got: {err}");
    }

    #[test]
    fn single_cell_sweep_equals_evaluate() {
        let seq = generate(&ScenarioSpec::three_groups(30, 0.5, 4)).unwrap();
        let config = RunConfig::default();
        let report = evaluate(&seq.detections, &seq.truth, &config).unwrap();
        let cells = sweep(&seq.detections, &seq.truth, &[8.0], &[10.0], &config).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].mean_ami, report.mean_ami);
        assert_eq!((cells[0].a, cells[0].b), (8.0, 10.0));
    }

    #[test]
    fn sweep_covers_the_full_grid_and_varies() {
        // Two groups with close spawns and mildly different velocities:
        // large scaling factors blur the distinction, so the score moves
        // across the grid.
        let spec = ScenarioSpec {
            groups: vec![
                crate::synth::GroupSpec {
                    members: 3,
                    spawn: (100.0, 100.0),
                    velocity: (1.2, 0.0),
                    spacing: 10.0,
                },
                crate::synth::GroupSpec {
                    members: 3,
                    spawn: (140.0, 100.0),
                    velocity: (-1.2, 0.4),
                    spacing: 10.0,
                },
            ],
            singletons: vec![],
            frames: 45,
            obs_noise: 0.5,
            size_base: 10.0,
            depth_scale: None,
            split_at: None,
            seed: 12,
        };
        let seq = generate(&spec).unwrap();
        let cells = sweep(
            &seq.detections,
            &seq.truth,
            &[2.0, 4.0, 6.0, 8.0, 10.0],
            &[10.0, 100.0, 1000.0],
            &RunConfig::default(),
        )
        .unwrap();
        assert_eq!(cells.len(), 15);
        let first = cells[0].mean_ami;
        assert!(
            cells.iter().any(|c| (c.mean_ami - first).abs() > 1e-9),
            "sweep table should not be constant: {cells:?}"
        );
    }
}
