//! KITTI label text: one object per line, 15 space-separated values.

use std::f64::consts::PI;
use std::io::{self, Write};

use thiserror::Error;

use super::{Dimensions, KittiLabel};
use crate::frame::Category;
use crate::{Rect2, Vec3};

const FIELD_COUNT: usize = 15;

/// `line` is 1-based; `field` is the 1-based token position, or 0 when the
/// line has the wrong number of tokens.
#[derive(Debug, Error, PartialEq)]
#[error("line {line}, field {field}: {message}")]
pub struct KittiParseError {
    pub line: usize,
    pub field: usize,
    pub message: String,
}

fn fmt2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

fn label_line(l: &KittiLabel) -> String {
    let floats = [
        l.bbox.left,
        l.bbox.top,
        l.bbox.right,
        l.bbox.bottom,
        l.dimensions.height,
        l.dimensions.width,
        l.dimensions.length,
        l.location.x,
        l.location.y,
        l.location.z,
        l.rotation_y,
    ];
    let mut line = format!("{} {} {} {}", l.object_type, fmt2(l.truncated), l.occluded, fmt2(l.alpha));
    for v in floats {
        line.push(' ');
        line.push_str(&fmt2(v));
    }
    line
}

pub fn write_kitti<W: Write>(labels: &[KittiLabel], mut sink: W) -> io::Result<()> {
    for l in labels {
        writeln!(sink, "{}", label_line(l))?;
    }
    Ok(())
}

pub fn to_kitti_string(labels: &[KittiLabel]) -> String {
    let mut out = String::new();
    for l in labels {
        out.push_str(&label_line(l));
        out.push('\n');
    }
    out
}

/// Parses label text. Blank lines are skipped. Range checks apply to every
/// row except `DontCare`, whose fields carry KITTI's sentinel values.
pub fn parse_kitti(text: &str) -> Result<Vec<KittiLabel>, KittiParseError> {
    let mut labels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        labels.push(parse_line(raw, idx + 1)?);
    }
    Ok(labels)
}

fn parse_line(raw: &str, line: usize) -> Result<KittiLabel, KittiParseError> {
    let err = |field: usize, message: String| KittiParseError { line, field, message };
    let tokens: Vec<&str> = raw.split_whitespace().collect();
    if tokens.len() != FIELD_COUNT {
        return Err(err(0, format!("expected {FIELD_COUNT} values, found {}", tokens.len())));
    }
    let object_type: Category = tokens[0].parse().map_err(|e| err(1, format!("{e}")))?;
    let float = |i: usize| -> Result<f64, KittiParseError> {
        let v: f64 = tokens[i].parse().map_err(|_| err(i + 1, format!("{:?} is not a number", tokens[i])))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(err(i + 1, format!("{v} is not finite")))
        }
    };
    let truncated = float(1)?;
    let occluded: i64 = tokens[2]
        .parse()
        .map_err(|_| err(3, format!("{:?} is not an integer", tokens[2])))?;
    let alpha = float(3)?;
    let f: Vec<f64> = (4..FIELD_COUNT).map(float).collect::<Result<_, _>>()?;

    let checked = object_type != Category::DontCare;
    if checked {
        if !(0.0..=1.0).contains(&truncated) {
            return Err(err(2, format!("truncated {truncated} outside [0, 1]")));
        }
        if !(0..=3).contains(&occluded) {
            return Err(err(3, format!("occluded {occluded} not in 0..=3")));
        }
        if !(-PI..=PI).contains(&alpha) {
            return Err(err(4, format!("alpha {alpha} outside [-pi, pi]")));
        }
        if f[0] > f[2] {
            return Err(err(7, format!("bbox right {} is left of {}", f[2], f[0])));
        }
        if f[1] > f[3] {
            return Err(err(8, format!("bbox bottom {} is above {}", f[3], f[1])));
        }
        for (i, v) in f[4..7].iter().enumerate() {
            if *v <= 0.0 {
                return Err(err(9 + i, format!("dimension {v} must be positive")));
            }
        }
        if !(-PI..=PI).contains(&f[10]) {
            return Err(err(15, format!("rotation_y {} outside [-pi, pi]", f[10])));
        }
    }
    Ok(KittiLabel {
        object_type,
        truncated,
        occluded: occluded.clamp(0, u8::MAX as i64) as u8,
        alpha,
        bbox: Rect2 { left: f[0], top: f[1], right: f[2], bottom: f[3] },
        dimensions: Dimensions { height: f[4], width: f[5], length: f[6] },
        location: Vec3::new(f[7], f[8], f[9]),
        rotation_y: f[10],
    })
}
