//! Discovery algorithm registry.
//!
//! Every miner consumes a list of traces and produces a labeled Petri net
//! with initial and final markings. Failures are first-class: a miner that
//! cannot handle its input reports why instead of producing a broken net,
//! and the caller decides how to score that.

pub mod alpha;
pub mod baselines;
pub mod inductive;

use crate::petri::PetriNet;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MinerError {
    #[error("unknown miner {0:?}")]
    Unknown(String),
    #[error("miner {0:?} is registered but not implemented")]
    NotImplemented(&'static str),
    #[error("discovery failed: {0}")]
    Failure(String),
}

/// A named miner plus free-form parameters, as referenced from experiment
/// configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl MinerSpec {
    pub fn named(name: &str) -> MinerSpec {
        MinerSpec { name: name.to_string(), params: BTreeMap::new() }
    }
}

/// Names accepted by [`discover`], in canonical order.
pub const MINER_NAMES: [&str; 6] =
    ["alpha", "inductive", "flower", "tracelog", "heuristics", "ilp"];

/// Runs the named miner over the traces.
pub fn discover(name: &str, traces: &[Vec<String>]) -> Result<PetriNet, MinerError> {
    match name {
        "alpha" => alpha::alpha_plus_net(traces),
        "inductive" => inductive::inductive_net(traces),
        "flower" => baselines::flower_net(traces),
        "tracelog" => baselines::tracelog_net(traces),
        "heuristics" => Err(MinerError::NotImplemented("heuristics")),
        "ilp" => Err(MinerError::NotImplemented("ilp")),
        other => Err(MinerError::Unknown(other.to_string())),
    }
}
