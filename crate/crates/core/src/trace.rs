//! Line-delimited run traces: a versioned header line followed by one JSON
//! event per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const TRACE_FORMAT: &str = "adctl-trace";
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("trace header: {0}")]
    Header(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Measure,
    Actuate,
    Select,
    Transfer,
    Violation,
    PostReached,
    /// A write to a mode's digital state; the payload names its cause.
    StateUpdate,
    /// Orders-program milestones (loop exits, waits finished).
    Orders,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub step: usize,
    pub t: f64,
    pub agent: String,
    pub kind: EventKind,
    pub payload: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub version: u32,
    pub run_id: String,
    pub scenario: String,
    pub seed: u64,
    pub state_fields: Vec<String>,
}

impl TraceHeader {
    pub fn new(scenario: &str, seed: u64, state_fields: Vec<String>) -> Self {
        let run_id = format!("{scenario}-{:016x}", crate::seeding::derive_seed(seed, scenario, 0));
        Self {
            format: TRACE_FORMAT.into(),
            version: TRACE_VERSION,
            run_id,
            scenario: scenario.into(),
            seed,
            state_fields,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new(header: TraceHeader) -> Self {
        Self {
            header,
            events: Vec::new(),
        }
    }

    pub fn push(&mut self, step: usize, t: f64, agent: &str, kind: EventKind, payload: Value) {
        let seq = self.events.len() as u64;
        self.events.push(TraceEvent {
            seq,
            step,
            t,
            agent: agent.to_string(),
            kind,
            payload,
        });
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), TraceError> {
        let header = serde_json::to_string(&self.header).map_err(|source| TraceError::Json { line: 1, source })?;
        writeln!(w, "{header}")?;
        for (i, e) in self.events.iter().enumerate() {
            let line = serde_json::to_string(e).map_err(|source| TraceError::Json { line: i + 2, source })?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, TraceError> {
        let mut lines = r.lines().enumerate();
        let header: TraceHeader = match lines.next() {
            Some((_, line)) => serde_json::from_str(&line?).map_err(|source| TraceError::Json { line: 1, source })?,
            None => return Err(TraceError::Header("empty trace".into())),
        };
        if header.format != TRACE_FORMAT {
            return Err(TraceError::Header(format!("unknown format {:?}", header.format)));
        }
        if header.version != TRACE_VERSION {
            return Err(TraceError::Header(format!("unsupported version {}", header.version)));
        }
        let mut events = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str(&line).map_err(|source| TraceError::Json { line: i + 1, source })?);
        }
        Ok(Self { header, events })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trip() {
        let mut t = Trace::new(TraceHeader::new("toy", 9, vec!["x".into()]));
        t.push(0, 0.0, "car1", EventKind::Measure, json!({"value": [1.5]}));
        t.push(0, 0.0, "car1", EventKind::PostReached, json!({"triple": "(Str,2)"}));
        t.push(1, 0.1, "car2", EventKind::StateUpdate, json!({"cause": "measure"}));
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.contains("\"post-reached\""));
        let back = Trace::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_foreign_header() {
        let err = Trace::read_jsonl(&b"{\"format\":\"x\",\"version\":1,\"run_id\":\"r\",\"scenario\":\"s\",\"seed\":0,\"state_fields\":[]}\n"[..]);
        assert!(matches!(err, Err(TraceError::Header(_))));
        assert!(matches!(Trace::read_jsonl(&b""[..]), Err(TraceError::Header(_))));
    }
}
