//! JSON channel/candidate files and CSV bounds traces.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use zecap_core::bellman::BellmanCandidate;
use zecap_core::channel::{Channel, ChannelSpec, TransitionSpec};
use zecap_core::value_iter::{BoundsTrace, TraceRow};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid channel:\n{}", .0.join("\n"))]
    InvalidChannel(Vec<String>),
    #[error("candidate names unknown state {0:?}")]
    UnknownState(String),
    #[error("candidate missing state {0:?}")]
    MissingState(String),
    #[error("bad csv line {line}: {reason}")]
    BadCsv { line: usize, reason: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionFile {
    pub state: String,
    pub input: String,
    pub output: String,
    pub next_state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob: Option<f64>,
}

/// On-disk channel description; field names match the in-memory spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub transitions: Vec<TransitionFile>,
}

impl ChannelFile {
    pub fn from_spec(spec: &ChannelSpec) -> Self {
        ChannelFile {
            states: spec.states.clone(),
            inputs: spec.inputs.clone(),
            outputs: spec.outputs.clone(),
            transitions: spec
                .transitions
                .iter()
                .map(|t| TransitionFile {
                    state: t.state.clone(),
                    input: t.input.clone(),
                    output: t.output.clone(),
                    next_state: t.next_state.clone(),
                    prob: t.prob,
                })
                .collect(),
        }
    }

    pub fn to_spec(&self) -> ChannelSpec {
        ChannelSpec {
            states: self.states.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionSpec {
                    state: t.state.clone(),
                    input: t.input.clone(),
                    output: t.output.clone(),
                    next_state: t.next_state.clone(),
                    prob: t.prob,
                })
                .collect(),
        }
    }
}

/// Read and validate a channel file.
pub fn read_channel(path: &Path) -> Result<Channel, FormatError> {
    let text = std::fs::read_to_string(path)?;
    let file: ChannelFile = serde_json::from_str(&text)?;
    file.to_spec()
        .validate()
        .map_err(|errs| FormatError::InvalidChannel(errs.iter().map(|e| e.to_string()).collect()))
}

pub fn write_channel(path: &Path, ch: &Channel) -> Result<(), FormatError> {
    let file = ChannelFile::from_spec(&ch.to_spec());
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Candidate fixed point keyed by state name.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateFile {
    pub g: BTreeMap<String, f64>,
    pub rho: f64,
}

pub fn read_candidate(path: &Path, ch: &Channel) -> Result<BellmanCandidate, FormatError> {
    let text = std::fs::read_to_string(path)?;
    let file: CandidateFile = serde_json::from_str(&text)?;
    for name in file.g.keys() {
        if ch.state_index(name).is_none() {
            return Err(FormatError::UnknownState(name.clone()));
        }
    }
    let g = ch
        .state_names()
        .iter()
        .map(|name| {
            file.g
                .get(name)
                .copied()
                .ok_or_else(|| FormatError::MissingState(name.clone()))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(BellmanCandidate { g, rho: file.rho })
}

/// Format with 12 significant digits; round-trips through `parse::<f64>()`
/// at that precision.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_trace_csv<W: Write>(mut w: W, trace: &BoundsTrace) -> io::Result<()> {
    writeln!(w, "n,lower,upper,gain_lo,gain_hi")?;
    for row in &trace.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            row.n,
            fmt12(row.lower),
            fmt12(row.upper),
            fmt12(row.gain_lo),
            fmt12(row.gain_hi)
        )?;
    }
    Ok(())
}

pub fn read_trace_csv<R: BufRead>(r: R) -> Result<BoundsTrace, FormatError> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line != "n,lower,upper,gain_lo,gain_hi" {
                return Err(FormatError::BadCsv { line: 1, reason: "bad header".into() });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(FormatError::BadCsv { line: i + 1, reason: "expected 5 fields".into() });
        }
        let bad = |reason: &str| FormatError::BadCsv { line: i + 1, reason: reason.into() };
        rows.push(TraceRow {
            n: fields[0].parse().map_err(|_| bad("bad n"))?,
            lower: fields[1].parse().map_err(|_| bad("bad lower"))?,
            upper: fields[2].parse().map_err(|_| bad("bad upper"))?,
            gain_lo: fields[3].parse().map_err(|_| bad("bad gain_lo"))?,
            gain_hi: fields[4].parse().map_err(|_| bad("bad gain_hi"))?,
        });
    }
    Ok(BoundsTrace { rows })
}
