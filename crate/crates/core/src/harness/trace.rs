//! JSON-lines trace. Each line is one [`TraceRecord`] with fields in
//! declaration order: `tick`, `time`, `robot`, `robot_estimate`, `user`,
//! `user_estimate`, `cmd`, `footprint`, `events`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{HarnessError, RunStatus};
use crate::geometry::{ConvexPolygon, Pose2D, Twist2D};
use crate::perception::UserEstimate;
use crate::world::SemanticEntity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Intent { destination: String, score: usize },
    Confirmation { text: String },
    Clarify { message: String },
    Description {
        text: String,
        entities: Vec<SemanticEntity>,
        camera: Pose2D,
    },
    Warning { message: String },
    Collision { robot: bool, user: bool },
    End { status: RunStatus },
}

/// State at the start of a tick and the command executed during it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub time: f64,
    pub robot: Pose2D,
    pub robot_estimate: Pose2D,
    /// True torso pose.
    pub user: Pose2D,
    pub user_estimate: Option<UserEstimate>,
    /// `None` on the final record, where the run stops before acting.
    pub cmd: Option<Twist2D>,
    /// Unpadded robot body first, then the user region if one was planned with; robot frame.
    pub footprint: Vec<ConvexPolygon>,
    pub events: Vec<Event>,
}

impl TraceRecord {
    pub fn status(&self) -> Option<RunStatus> {
        self.events.iter().find_map(|e| match e {
            Event::End { status } => Some(*status),
            _ => None,
        })
    }
}

pub fn write_trace<W: Write>(trace: &[TraceRecord], mut out: W) -> Result<(), HarnessError> {
    for r in trace {
        let line = serde_json::to_string(r).map_err(|e| HarnessError::Trace(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| HarnessError::Trace(e.to_string()))?;
    }
    out.flush().map_err(|e| HarnessError::Trace(e.to_string()))
}

pub fn trace_to_string(trace: &[TraceRecord]) -> String {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceRecord>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| HarnessError::Trace(e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let r: TraceRecord =
            serde_json::from_str(&line).map_err(|e| HarnessError::Trace(format!("line {}: {e}", i + 1)))?;
        out.push(r);
    }
    Ok(out)
}
