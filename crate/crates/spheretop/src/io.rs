//! CSV and JSON export formats.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! emitted file reparses to bit-identical values and re-serializing a parsed
//! file reproduces it byte for byte. Files are written atomically
//! (write-then-rename).

use crate::charts::{GlobalState, Hemisphere, PoleChartState, SphericalState, State};
use crate::dynamics::section::SeedSection;
use crate::dynamics::Trajectory;
use serde::Deserialize;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed csv at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
    #[error("malformed state json: {0}")]
    MalformedState(String),
}

/// Writes `contents` to `path` atomically: a temp file in the same
/// directory, flushed, then renamed over the target.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_else(|| "out".to_string()),
        std::process::id()
    ));
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(contents.as_bytes())?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("{v}"));
    }
    out.push('\n');
}

/// A parsed numeric CSV with optional `# key,value` footer lines.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericCsv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub footer: Vec<(String, f64)>,
}

impl NumericCsv {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            push_row(&mut out, row);
        }
        for (key, value) in &self.footer {
            out.push_str(&format!("# {key},{value}\n"));
        }
        out
    }
}

/// Parses a numeric CSV produced by this module.
pub fn parse_numeric_csv(text: &str) -> Result<NumericCsv, IoError> {
    let mut lines = text.lines().enumerate();
    let header = match lines.next() {
        Some((_, h)) => h.split(',').map(str::to_string).collect(),
        None => {
            return Err(IoError::MalformedCsv {
                line: 0,
                reason: "empty file".into(),
            })
        }
    };
    let mut rows = Vec::new();
    let mut footer = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# ") {
            let (key, value) = rest.split_once(',').ok_or(IoError::MalformedCsv {
                line: idx + 1,
                reason: "footer line without key,value".into(),
            })?;
            let value = value.parse::<f64>().map_err(|e| IoError::MalformedCsv {
                line: idx + 1,
                reason: e.to_string(),
            })?;
            footer.push((key.to_string(), value));
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| tok.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| IoError::MalformedCsv {
                line: idx + 1,
                reason: e.to_string(),
            })?;
        rows.push(row);
    }
    Ok(NumericCsv {
        header,
        rows,
        footer,
    })
}

/// Trajectory CSV: one row per sample, drift summary as footer lines.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,y,z,l_x,l_y,l_z,h,f,projection_residual\n");
    for s in &traj.samples {
        push_row(
            &mut out,
            &[
                s.t,
                s.state.x,
                s.state.y,
                s.state.z,
                s.state.l_x,
                s.state.l_y,
                s.state.l_z,
                s.h,
                s.f,
                s.projection_residual,
            ],
        );
    }
    let d = &traj.drift;
    for (key, value) in [
        ("max_rel_h_drift", d.max_rel_h_drift),
        ("max_rel_f_drift", d.max_rel_f_drift),
        ("h_slope", d.h_slope),
        ("h_slope_stderr", d.h_slope_stderr),
        ("f_slope", d.f_slope),
        ("f_slope_stderr", d.f_slope_stderr),
    ] {
        out.push_str(&format!("# {key},{value}\n"));
    }
    out
}

/// Section CSV: `seed_id,crossing_index,t,theta,p_theta,energy_residual`.
pub fn section_to_csv(section: &SeedSection) -> String {
    let mut out = String::from("seed_id,crossing_index,t,theta,p_theta,energy_residual\n");
    for p in &section.points {
        push_row(
            &mut out,
            &[
                section.seed_index as f64,
                p.index as f64,
                p.t,
                p.theta,
                p.p_theta,
                p.energy_residual,
            ],
        );
    }
    out
}

/// Arbitrary table CSV (curvature and positivity exports).
pub fn table_to_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        push_row(&mut out, row);
    }
    out
}

// ---------------------------------------------------------------------------
// Chart-tagged state JSON
// ---------------------------------------------------------------------------

/// Serializes a state with its chart tag; floats are shortest-round-trip.
pub fn state_to_json(state: &State<f64>) -> String {
    serde_json::to_string(state).expect("state serialization is infallible")
}

#[derive(Deserialize)]
#[serde(tag = "chart", rename_all = "lowercase", deny_unknown_fields)]
enum StateDto {
    Spherical {
        theta: f64,
        phi: f64,
        p_theta: f64,
        p_phi: f64,
    },
    Pole {
        hemisphere: HemisphereDto,
        x: f64,
        y: f64,
        p_x: f64,
        p_y: f64,
    },
    Global {
        x: f64,
        y: f64,
        z: f64,
        l_x: f64,
        l_y: f64,
        l_z: f64,
    },
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum HemisphereDto {
    North,
    South,
}

/// Parses and validates a chart-tagged state.
pub fn state_from_json(text: &str) -> Result<State<f64>, IoError> {
    let dto: StateDto =
        serde_json::from_str(text).map_err(|e| IoError::MalformedState(e.to_string()))?;
    let state = match dto {
        StateDto::Spherical {
            theta,
            phi,
            p_theta,
            p_phi,
        } => State::Spherical(
            SphericalState::new(theta, phi, p_theta, p_phi)
                .map_err(|e| IoError::MalformedState(e.to_string()))?,
        ),
        StateDto::Pole {
            hemisphere,
            x,
            y,
            p_x,
            p_y,
        } => {
            let hemisphere = match hemisphere {
                HemisphereDto::North => Hemisphere::North,
                HemisphereDto::South => Hemisphere::South,
            };
            State::Pole(
                PoleChartState::new(hemisphere, x, y, p_x, p_y)
                    .map_err(|e| IoError::MalformedState(e.to_string()))?,
            )
        }
        StateDto::Global {
            x,
            y,
            z,
            l_x,
            l_y,
            l_z,
        } => State::Global(
            GlobalState::new(x, y, z, l_x, l_y, l_z)
                .map_err(|e| IoError::MalformedState(e.to_string()))?,
        ),
    };
    Ok(state)
}
