//! Event logs: traces of activity labels with a provenance marker.
//!
//! The on-disk format is line-delimited JSON, one trace per line. An optional
//! XES export (trace and event `concept:name` attributes only) is provided
//! for interoperability with other process mining tools.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Produced by simulating the model.
    Fitting,
    /// Perturbed until it no longer fits the model.
    Noised,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: String,
    pub provenance: Provenance,
    pub events: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog {
    pub traces: Vec<Trace>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
}

impl EventLog {
    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    /// Distinct event sequences with their occurrence counts.
    pub fn variants(&self) -> BTreeMap<Vec<String>, usize> {
        let mut out = BTreeMap::new();
        for t in &self.traces {
            *out.entry(t.events.clone()).or_insert(0) += 1;
        }
        out
    }

    /// Distinct labels occurring in the log, sorted.
    pub fn alphabet(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in &self.traces {
            for e in &t.events {
                out.insert(e.clone());
            }
        }
        out
    }

    /// Sub-log containing the traces at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> EventLog {
        EventLog {
            traces: indices.iter().map(|&i| self.traces[i].clone()).collect(),
        }
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.traces {
            out.push_str(&serde_json::to_string(t).expect("trace serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(input: &str) -> Result<EventLog, LogError> {
        let mut traces = Vec::new();
        for (i, line) in input.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let t: Trace =
                serde_json::from_str(line).map_err(|e| LogError::Malformed(i + 1, e.to_string()))?;
            traces.push(t);
        }
        Ok(EventLog { traces })
    }

    /// XES export carrying only `concept:name` on traces and events.
    pub fn to_xes(&self) -> String {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str("<log xes.version=\"1.0\" xes.features=\"\">\n");
        out.push_str(
            "  <extension name=\"Concept\" prefix=\"concept\" uri=\"http://www.xes-standard.org/concept.xesext\"/>\n",
        );
        for t in &self.traces {
            out.push_str("  <trace>\n");
            let _ = writeln!(
                out,
                "    <string key=\"concept:name\" value=\"{}\"/>",
                xes_escape(&t.case_id)
            );
            for e in &t.events {
                let _ = writeln!(
                    out,
                    "    <event><string key=\"concept:name\" value=\"{}\"/></event>",
                    xes_escape(e)
                );
            }
            out.push_str("  </trace>\n");
        }
        out.push_str("</log>\n");
        out
    }
}

fn xes_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
