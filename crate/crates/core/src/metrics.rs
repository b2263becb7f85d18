//! Binary classification scores for discovered models.
//!
//! A discovered net acts as a classifier over traces: accepted or rejected
//! by exact replay. Test traces carry ground truth from their construction,
//! fitting or deliberately broken, which yields a confusion matrix per fold
//! and precision, recall and F1 on top. Metrics are undefined (not zero)
//! when their denominator vanishes; fold averaging either excludes such
//! folds per metric or scores them as zero, and reports how many folds had
//! any undefined metric.

use crate::petri::{NetError, PetriNet};
use crate::replay::{replay_fits, ReplayConfig, ReplayVerdict};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl ConfusionMatrix {
    pub fn precision(&self) -> Option<f64> {
        let denom = self.true_pos + self.false_pos;
        (denom > 0).then(|| self.true_pos as f64 / denom as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        let denom = self.true_pos + self.false_neg;
        (denom > 0).then(|| self.true_pos as f64 / denom as f64)
    }

    pub fn f1(&self) -> Option<f64> {
        let p = self.precision()?;
        let r = self.recall()?;
        if p + r == 0.0 {
            return None;
        }
        Some(2.0 * p * r / (p + r))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldEval {
    pub matrix: ConfusionMatrix,
    /// Replays that ran out of budget; counted as rejections.
    pub budget_exceeded: usize,
}

/// Replays each test trace and tallies it against its ground truth. A
/// budget-exceeded replay counts as a rejection and is reported.
pub fn classify_fold(
    net: &PetriNet,
    fitting: &[Vec<String>],
    noised: &[Vec<String>],
    cfg: &ReplayConfig,
) -> Result<FoldEval, NetError> {
    let mut eval = FoldEval { matrix: ConfusionMatrix::default(), budget_exceeded: 0 };
    for t in fitting {
        match replay_fits(net, t, cfg)? {
            ReplayVerdict::Fits => eval.matrix.true_pos += 1,
            ReplayVerdict::NotFits => eval.matrix.false_neg += 1,
            ReplayVerdict::BudgetExceeded => {
                eval.matrix.false_neg += 1;
                eval.budget_exceeded += 1;
            }
        }
    }
    for t in noised {
        match replay_fits(net, t, cfg)? {
            ReplayVerdict::Fits => eval.matrix.false_pos += 1,
            ReplayVerdict::NotFits => eval.matrix.true_neg += 1,
            ReplayVerdict::BudgetExceeded => {
                eval.matrix.true_neg += 1;
                eval.budget_exceeded += 1;
            }
        }
    }
    Ok(eval)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedPolicy {
    /// Average each metric over the folds where it is defined.
    Exclude,
    /// Score undefined metrics as zero.
    Zero,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no folds to average")]
    NoFolds,
    #[error("metric {0} is undefined on every fold")]
    AllUndefined(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Folds where at least one metric was undefined.
    pub undefined_folds: usize,
}

pub fn average_folds(
    folds: &[ConfusionMatrix],
    policy: UndefinedPolicy,
) -> Result<AveragedScores, MetricsError> {
    if folds.is_empty() {
        return Err(MetricsError::NoFolds);
    }
    let avg = |name: &'static str, vals: Vec<Option<f64>>| -> Result<f64, MetricsError> {
        match policy {
            UndefinedPolicy::Exclude => {
                let defined: Vec<f64> = vals.into_iter().flatten().collect();
                if defined.is_empty() {
                    return Err(MetricsError::AllUndefined(name));
                }
                Ok(defined.iter().sum::<f64>() / defined.len() as f64)
            }
            UndefinedPolicy::Zero => {
                Ok(vals.iter().map(|v| v.unwrap_or(0.0)).sum::<f64>() / vals.len() as f64)
            }
        }
    };
    let undefined_folds = folds
        .iter()
        .filter(|m| m.precision().is_none() || m.recall().is_none() || m.f1().is_none())
        .count();
    Ok(AveragedScores {
        precision: avg("precision", folds.iter().map(|m| m.precision()).collect())?,
        recall: avg("recall", folds.iter().map(|m| m.recall()).collect())?,
        f1: avg("f1", folds.iter().map(|m| m.f1()).collect())?,
        undefined_folds,
    })
}
