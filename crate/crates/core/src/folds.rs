//! K-fold cross-validation splits over an event log.
//!
//! Trace indices are shuffled once and dealt round-robin into k folds. For
//! each fold the test set is split in half: one half stays as-is (fitting
//! by construction), the other is handed to noise injection. Odd test folds
//! give the extra trace to the fitting half.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FoldError {
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("log of {n} traces cannot fill {k} folds with 2 traces each")]
    LogTooSmall { n: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    /// Training trace indices: everything outside this fold.
    pub train: Vec<usize>,
    /// Test traces kept fitting.
    pub test_fitting: Vec<usize>,
    /// Test traces designated for noise injection.
    pub test_noise: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub folds: Vec<Fold>,
}

/// Splits trace indices `0..n` into `k` folds. Requires `n >= 2 * k` so
/// every test fold has both a fitting and a noise half.
pub fn split_kfold(n: usize, k: usize, rng: &mut impl Rng) -> Result<FoldPlan, FoldError> {
    if k < 2 {
        return Err(FoldError::TooFewFolds(k));
    }
    if n < 2 * k {
        return Err(FoldError::LogTooSmall { n, k });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &idx) in perm.iter().enumerate() {
        members[i % k].push(idx);
    }
    let folds = (0..k)
        .map(|f| {
            let test = &members[f];
            let half = test.len().div_ceil(2);
            let mut train: Vec<usize> = (0..k)
                .filter(|&g| g != f)
                .flat_map(|g| members[g].iter().copied())
                .collect();
            train.sort_unstable();
            let mut test_fitting = test[..half].to_vec();
            let mut test_noise = test[half..].to_vec();
            test_fitting.sort_unstable();
            test_noise.sort_unstable();
            Fold { train, test_fitting, test_noise }
        })
        .collect();
    Ok(FoldPlan { k, folds })
}
