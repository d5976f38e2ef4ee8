//! Newline-delimited record formats.
//!
//! Detections: `frame,id,x,y,w,h` one box per line, grouped by ascending
//! frame. Ground truth: `frame,id,group`. Both are plain UTF-8 CSV with
//! a fixed field order and no header; blank lines are ignored. Pipeline
//! output is JSON Lines, one frame per line (see [`crate::pipeline`]).

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::eval::TruthRecord;
use crate::tracking::Detection;

fn split_fields(line: &str, line_no: usize, expected: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != expected {
        return Err(Error::Format {
            line: line_no,
            msg: format!("expected {expected} comma-separated fields, got {}", fields.len()),
        });
    }
    Ok(fields)
}

fn parse_field<T: std::str::FromStr>(field: &str, line_no: usize, name: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Format {
        line: line_no,
        msg: format!("cannot parse {name} from {field:?}"),
    })
}

/// Reads a detection stream, enforcing the per-record invariants and the
/// grouped-by-ascending-frame ordering. Errors name the offending line.
pub fn read_detections<R: BufRead>(reader: R) -> Result<Vec<Detection>> {
    let mut detections = Vec::new();
    let mut last_frame: Option<i64> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(&line, line_no, 6)?;
        let det = Detection {
            frame: parse_field(fields[0], line_no, "frame")?,
            id: parse_field(fields[1], line_no, "id")?,
            x: parse_field(fields[2], line_no, "x")?,
            y: parse_field(fields[3], line_no, "y")?,
            w: parse_field(fields[4], line_no, "w")?,
            h: parse_field(fields[5], line_no, "h")?,
        };
        det.validate().map_err(|msg| Error::Format { line: line_no, msg })?;
        if let Some(last) = last_frame {
            if det.frame < last {
                return Err(Error::Format {
                    line: line_no,
                    msg: format!("non-monotonic frame order: {} after {last}", det.frame),
                });
            }
        }
        last_frame = Some(det.frame);
        detections.push(det);
    }
    Ok(detections)
}

pub fn write_detections<W: Write>(mut writer: W, detections: &[Detection]) -> Result<()> {
    for d in detections {
        writeln!(writer, "{},{},{},{},{},{}", d.frame, d.id, d.x, d.y, d.w, d.h)?;
    }
    Ok(())
}

/// Reads ground-truth records (`frame,id,group`). Order is not
/// significant; consumers index them by frame.
pub fn read_truth<R: BufRead>(reader: R) -> Result<Vec<TruthRecord>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(&line, line_no, 3)?;
        records.push(TruthRecord {
            frame: parse_field(fields[0], line_no, "frame")?,
            id: parse_field(fields[1], line_no, "id")?,
            group: parse_field(fields[2], line_no, "group")?,
        });
    }
    Ok(records)
}

pub fn write_truth<W: Write>(mut writer: W, records: &[TruthRecord]) -> Result<()> {
    for r in records {
        writeln!(writer, "{},{},{}", r.frame, r.id, r.group)?;
    }
    Ok(())
}
