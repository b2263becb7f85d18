//! Directly-follows graphs and the footprint relations derived from them.
//!
//! Activities are indexed in sorted label order so every algorithm built on
//! top of the graph is deterministic regardless of trace order.

use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfg {
    /// Distinct activity labels, sorted.
    pub activities: Vec<String>,
    /// Directly-follows pairs by activity index.
    pub follows: BTreeSet<(usize, usize)>,
    /// Activities opening a trace.
    pub starts: BTreeSet<usize>,
    /// Activities closing a trace.
    pub ends: BTreeSet<usize>,
    /// Number of empty traces seen.
    pub empty_traces: usize,
}

impl Dfg {
    pub fn from_traces<T: AsRef<[String]>>(traces: &[T]) -> Dfg {
        let mut labels: BTreeSet<&String> = BTreeSet::new();
        for t in traces {
            labels.extend(t.as_ref());
        }
        let activities: Vec<String> = labels.into_iter().cloned().collect();
        let index: BTreeMap<String, usize> = activities
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let mut dfg = Dfg {
            activities,
            follows: BTreeSet::new(),
            starts: BTreeSet::new(),
            ends: BTreeSet::new(),
            empty_traces: 0,
        };
        for t in traces {
            let t = t.as_ref();
            if t.is_empty() {
                dfg.empty_traces += 1;
                continue;
            }
            dfg.starts.insert(index[&t[0]]);
            dfg.ends.insert(index[&t[t.len() - 1]]);
            for w in t.windows(2) {
                dfg.follows.insert((index[&w[0]], index[&w[1]]));
            }
        }
        dfg
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.activities.binary_search_by(|a| a.as_str().cmp(label)).ok()
    }

    pub fn directly_follows(&self, a: usize, b: usize) -> bool {
        self.follows.contains(&(a, b))
    }

    /// a causes b: a is followed by b but never the reverse.
    pub fn causal(&self, a: usize, b: usize) -> bool {
        self.directly_follows(a, b) && !self.directly_follows(b, a)
    }

    /// a and b interleave in both orders.
    pub fn parallel(&self, a: usize, b: usize) -> bool {
        self.directly_follows(a, b) && self.directly_follows(b, a)
    }

    /// a and b never follow each other.
    pub fn unrelated(&self, a: usize, b: usize) -> bool {
        !self.directly_follows(a, b) && !self.directly_follows(b, a)
    }
}
