//! Labeled Petri nets with initial and final markings.
//!
//! Transitions are either visible (carrying an activity label) or silent.
//! Arcs have multiplicity 1 and are stored as per-transition input/output
//! place lists. A label index maps each distinct label to the transitions
//! carrying it, which keeps replay independent of total transition count.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Interned label: index into [`PetriNet::labels`].
pub type LabelId = u32;

/// Multiset of tokens, one count per place.
pub type Marking = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    /// Visible label, or `None` for a silent transition.
    pub label: Option<LabelId>,
    /// Input places (distinct).
    pub inputs: Vec<usize>,
    /// Output places (distinct).
    pub outputs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetriNet {
    pub place_count: usize,
    pub transitions: Vec<Transition>,
    /// Distinct visible labels; transition labels index into this table.
    pub labels: Vec<String>,
    pub initial: Marking,
    pub final_marking: Marking,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetError {
    #[error("invalid net: {0}")]
    InvalidNet(String),
}

impl PetriNet {
    pub fn label_id(&self, label: &str) -> Option<LabelId> {
        self.labels.iter().position(|l| l == label).map(|i| i as LabelId)
    }

    pub fn label_of(&self, t: &Transition) -> Option<&str> {
        t.label.map(|id| self.labels[id as usize].as_str())
    }

    /// Transitions grouped by label id, plus the silent transitions,
    /// in index order. Used by replay to expand only relevant transitions.
    pub fn transition_index(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let mut by_label = vec![Vec::new(); self.labels.len()];
        let mut silent = Vec::new();
        for (i, t) in self.transitions.iter().enumerate() {
            match t.label {
                Some(l) => by_label[l as usize].push(i),
                None => silent.push(i),
            }
        }
        (by_label, silent)
    }

    /// Structural validity: nonempty initial and final markings, every
    /// transition with at least one input and one output place. Discovered
    /// nets may violate this and are rejected before replay.
    pub fn validate(&self) -> Result<(), NetError> {
        if self.initial.len() != self.place_count || self.final_marking.len() != self.place_count {
            return Err(NetError::InvalidNet("marking length mismatch".into()));
        }
        if self.initial.iter().all(|&c| c == 0) {
            return Err(NetError::InvalidNet("empty initial marking".into()));
        }
        if self.final_marking.iter().all(|&c| c == 0) {
            return Err(NetError::InvalidNet("empty final marking".into()));
        }
        for (i, t) in self.transitions.iter().enumerate() {
            if t.inputs.is_empty() {
                return Err(NetError::InvalidNet(format!("transition {i} has no input place")));
            }
            if t.outputs.is_empty() {
                return Err(NetError::InvalidNet(format!("transition {i} has no output place")));
            }
            for &p in t.inputs.iter().chain(t.outputs.iter()) {
                if p >= self.place_count {
                    return Err(NetError::InvalidNet(format!("transition {i} references place {p}")));
                }
            }
        }
        Ok(())
    }

    /// Serializes the net as a PNML document. Silent transitions carry no
    /// name element; the final marking is written as a `finalmarkings`
    /// extension section.
    pub fn to_pnml(&self, net_id: &str) -> String {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str("<pnml>\n");
        let _ = writeln!(
            out,
            "  <net id=\"{}\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">",
            xml_escape(net_id)
        );
        out.push_str("    <page id=\"page0\">\n");
        for p in 0..self.place_count {
            let _ = write!(out, "      <place id=\"p{p}\">");
            if self.initial[p] > 0 {
                let _ = write!(
                    out,
                    "<initialMarking><text>{}</text></initialMarking>",
                    self.initial[p]
                );
            }
            out.push_str("</place>\n");
        }
        for (i, t) in self.transitions.iter().enumerate() {
            let _ = write!(out, "      <transition id=\"t{i}\">");
            if let Some(label) = self.label_of(t) {
                let _ = write!(out, "<name><text>{}</text></name>", xml_escape(label));
            }
            out.push_str("</transition>\n");
        }
        let mut arc = 0;
        for (i, t) in self.transitions.iter().enumerate() {
            for &p in &t.inputs {
                let _ = writeln!(out, "      <arc id=\"a{arc}\" source=\"p{p}\" target=\"t{i}\"/>");
                arc += 1;
            }
            for &p in &t.outputs {
                let _ = writeln!(out, "      <arc id=\"a{arc}\" source=\"t{i}\" target=\"p{p}\"/>");
                arc += 1;
            }
        }
        out.push_str("    </page>\n");
        out.push_str("    <finalmarkings>\n      <marking>\n");
        for p in 0..self.place_count {
            if self.final_marking[p] > 0 {
                let _ = writeln!(
                    out,
                    "        <place idref=\"p{p}\"><text>{}</text></place>",
                    self.final_marking[p]
                );
            }
        }
        out.push_str("      </marking>\n    </finalmarkings>\n");
        out.push_str("  </net>\n</pnml>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Incremental net construction. Deduplicates labels and arc endpoints.
#[derive(Debug, Default)]
pub struct NetBuilder {
    place_count: usize,
    transitions: Vec<Transition>,
    labels: Vec<String>,
    label_ids: BTreeMap<String, LabelId>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_place(&mut self) -> usize {
        self.place_count += 1;
        self.place_count - 1
    }

    pub fn intern(&mut self, label: &str) -> LabelId {
        if let Some(&id) = self.label_ids.get(label) {
            return id;
        }
        let id = self.labels.len() as LabelId;
        self.labels.push(label.to_string());
        self.label_ids.insert(label.to_string(), id);
        id
    }

    pub fn add_transition(
        &mut self,
        label: Option<&str>,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
    ) -> usize {
        let label = label.map(|l| self.intern(l));
        let mut inputs = inputs;
        let mut outputs = outputs;
        inputs.sort_unstable();
        inputs.dedup();
        outputs.sort_unstable();
        outputs.dedup();
        self.transitions.push(Transition {
            label,
            inputs,
            outputs,
        });
        self.transitions.len() - 1
    }

    /// Adds an extra input place to an existing transition.
    pub fn add_input(&mut self, transition: usize, place: usize) {
        let ins = &mut self.transitions[transition].inputs;
        if !ins.contains(&place) {
            ins.push(place);
            ins.sort_unstable();
        }
    }

    /// Adds an extra output place to an existing transition.
    pub fn add_output(&mut self, transition: usize, place: usize) {
        let outs = &mut self.transitions[transition].outputs;
        if !outs.contains(&place) {
            outs.push(place);
            outs.sort_unstable();
        }
    }

    pub fn build(self, initial_places: &[usize], final_places: &[usize]) -> PetriNet {
        let mut initial = vec![0u8; self.place_count];
        for &p in initial_places {
            initial[p] += 1;
        }
        let mut final_marking = vec![0u8; self.place_count];
        for &p in final_places {
            final_marking[p] += 1;
        }
        PetriNet {
            place_count: self.place_count,
            transitions: self.transitions,
            labels: self.labels,
            initial,
            final_marking,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_net() -> PetriNet {
        let mut b = NetBuilder::new();
        let p0 = b.add_place();
        let p1 = b.add_place();
        b.add_transition(Some("a"), vec![p0], vec![p1]);
        b.build(&[p0], &[p1])
    }

    #[test]
    fn builder_produces_valid_net() {
        let net = tiny_net();
        assert_eq!(net.place_count, 2);
        assert_eq!(net.initial, vec![1, 0]);
        assert_eq!(net.final_marking, vec![0, 1]);
        assert!(net.validate().is_ok());
    }

    #[test]
    fn dangling_transition_rejected() {
        let mut b = NetBuilder::new();
        let p0 = b.add_place();
        b.add_transition(Some("a"), vec![p0], vec![]);
        let net = b.build(&[p0], &[p0]);
        assert!(matches!(net.validate(), Err(NetError::InvalidNet(_))));
    }

    #[test]
    fn empty_markings_rejected() {
        let mut b = NetBuilder::new();
        let p0 = b.add_place();
        let p1 = b.add_place();
        b.add_transition(Some("a"), vec![p0], vec![p1]);
        let net = b.build(&[], &[p1]);
        assert!(matches!(net.validate(), Err(NetError::InvalidNet(_))));
    }

    #[test]
    fn labels_are_deduplicated() {
        let mut b = NetBuilder::new();
        let p0 = b.add_place();
        let p1 = b.add_place();
        b.add_transition(Some("a"), vec![p0], vec![p1]);
        b.add_transition(Some("a"), vec![p1], vec![p0]);
        let net = b.build(&[p0], &[p1]);
        assert_eq!(net.labels, vec!["a".to_string()]);
        let (by_label, silent) = net.transition_index();
        assert_eq!(by_label[0], vec![0, 1]);
        assert!(silent.is_empty());
    }

    #[test]
    fn pnml_contains_places_transitions_arcs_and_markings() {
        let net = tiny_net();
        let xml = net.to_pnml("n1");
        assert!(xml.contains("<place id=\"p0\"><initialMarking><text>1</text></initialMarking></place>"));
        assert!(xml.contains("<transition id=\"t0\"><name><text>a</text></name></transition>"));
        assert!(xml.contains("<arc id=\"a0\" source=\"p0\" target=\"t0\"/>"));
        assert!(xml.contains("<place idref=\"p1\"><text>1</text></place>"));
    }

    #[test]
    fn silent_transitions_have_no_name_element() {
        let mut b = NetBuilder::new();
        let p0 = b.add_place();
        let p1 = b.add_place();
        b.add_transition(None, vec![p0], vec![p1]);
        let net = b.build(&[p0], &[p1]);
        let xml = net.to_pnml("n");
        assert!(xml.contains("<transition id=\"t0\"></transition>"));
    }
}
