//! Experiment configuration.
//!
//! A configuration names ordered population cells, miners to compare, and
//! the sampling parameters shared by all of them. The cell order is
//! meaningful: trend tests read it as the hypothesized direction.

use crate::metrics::UndefinedPolicy;
use crate::miners::MinerSpec;
use crate::population::PopulationSpec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    pub id: String,
    pub population: PopulationSpec,
    /// Optional ordinal position on the studied axis, for reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
}

/// How runs whose discovery or noise generation failed enter aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FailurePolicy {
    /// Skip failed folds when averaging.
    #[default]
    Exclude,
    /// Score failed folds as zero on every metric.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub cells: Vec<CellConfig>,
    pub miners: Vec<MinerSpec>,
    pub models_per_cell: usize,
    #[serde(default = "default_k_folds")]
    pub k_folds: usize,
    #[serde(default = "default_log_sizes")]
    pub log_sizes: Vec<usize>,
    #[serde(default = "default_noise_prob")]
    pub noise_prob: f64,
    #[serde(default = "default_replay_budget")]
    pub replay_budget: usize,
    #[serde(default = "default_token_bound")]
    pub token_bound: u8,
    #[serde(default)]
    pub on_failure: FailurePolicy,
    #[serde(default = "default_undefined")]
    pub on_undefined: UndefinedPolicy,
    #[serde(default = "default_true")]
    pub persist_artifacts: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_k_folds() -> usize {
    10
}
fn default_log_sizes() -> Vec<usize> {
    vec![200, 1000]
}
fn default_noise_prob() -> f64 {
    1.0 / 3.0
}
fn default_replay_budget() -> usize {
    200_000
}
fn default_token_bound() -> u8 {
    8
}
fn default_undefined() -> UndefinedPolicy {
    UndefinedPolicy::Exclude
}
fn default_true() -> bool {
    true
}
fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("no cells configured")]
    NoCells,
    #[error("no miners configured")]
    NoMiners,
    #[error("cell id {0:?} appears twice")]
    DuplicateCell(String),
    #[error("models_per_cell must be positive")]
    NoModels,
    #[error("log size {0} cannot fill {1} folds with 2 traces each")]
    LogTooSmall(usize, usize),
    #[error("noise probability {0} outside [0, 1]")]
    BadNoiseProb(f64),
    #[error("alpha {0} outside (0, 1)")]
    BadAlpha(f64),
    #[error("cell {0:?}: {1}")]
    BadPopulation(String, crate::population::PopulationError),
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.cells.is_empty() {
            return Err(ConfigError::NoCells);
        }
        if self.miners.is_empty() {
            return Err(ConfigError::NoMiners);
        }
        for (i, c) in self.cells.iter().enumerate() {
            if self.cells[..i].iter().any(|o| o.id == c.id) {
                return Err(ConfigError::DuplicateCell(c.id.clone()));
            }
            c.population
                .validate()
                .map_err(|e| ConfigError::BadPopulation(c.id.clone(), e))?;
        }
        if self.models_per_cell == 0 {
            return Err(ConfigError::NoModels);
        }
        for &s in &self.log_sizes {
            if s < 2 * self.k_folds || self.k_folds < 2 {
                return Err(ConfigError::LogTooSmall(s, self.k_folds));
            }
        }
        if !(0.0..=1.0).contains(&self.noise_prob) {
            return Err(ConfigError::BadNoiseProb(self.noise_prob));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::BadAlpha(self.alpha));
        }
        Ok(())
    }

    /// Work units in canonical order: cell, model index, log size. Miners
    /// all evaluate the same unit.
    pub fn plan_units(&self) -> Vec<WorkUnit> {
        let mut units = Vec::new();
        for cell in &self.cells {
            for model in 0..self.models_per_cell {
                for &log_size in &self.log_sizes {
                    units.push(WorkUnit {
                        cell_id: cell.id.clone(),
                        model_index: model,
                        log_size,
                    });
                }
            }
        }
        units
    }

    /// Total run count: units times miners.
    pub fn plan_len(&self) -> usize {
        self.plan_units().len() * self.miners.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkUnit {
    pub cell_id: String,
    pub model_index: usize,
    pub log_size: usize,
}

impl WorkUnit {
    pub fn model_id(&self) -> String {
        format!("{}/m{:03}", self.cell_id, self.model_index)
    }

    pub fn log_id(&self) -> String {
        format!("{}/s{}", self.model_id(), self.log_size)
    }
}
