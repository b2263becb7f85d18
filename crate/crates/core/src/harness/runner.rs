//! Experiment execution.
//!
//! A work unit is one generated model evaluated at one log size; every
//! configured miner sees the same log, the same folds and the same noised
//! test traces, so differences in scores come from discovery alone. Units
//! run in parallel and append finished records to a journal, which makes
//! an interrupted run resumable. All randomness is derived from the master
//! seed and the unit's coordinates, so results do not depend on worker
//! count or completion order.

use crate::compile::compile_tree_to_net;
use crate::folds::split_kfold;
use crate::harness::config::{CellConfig, ConfigError, ExperimentConfig, FailurePolicy, WorkUnit};
use crate::log::EventLog;
use crate::metrics::{
    average_folds, classify_fold, AveragedScores, ConfusionMatrix, MetricsError, UndefinedPolicy,
};
use crate::miners::discover;
use crate::noise::make_nonfitting;
use crate::population::generate_tree;
use crate::replay::ReplayConfig;
use crate::seeds::rng_for;
use crate::simulate::simulate_log;
use crate::text::write_tree;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    MinerFailed,
    PoolExhausted,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RunStatus::Ok => "ok",
            RunStatus::MinerFailed => "miner-failed",
            RunStatus::PoolExhausted => "pool-exhausted",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<ConfusionMatrix>,
    pub budget_exceeded: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One miner evaluated on one work unit. The journal holds one JSON line
/// per record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub cell_id: String,
    pub miner: String,
    pub model_index: usize,
    pub log_size: usize,
    pub model_id: String,
    pub log_id: String,
    pub status: RunStatus,
    pub folds: Vec<FoldRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<AveragedScores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn key(&self) -> (String, String) {
        (self.log_id.clone(), self.miner.clone())
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("journal line {0}: {1}")]
    Journal(usize, serde_json::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Relative artifact path plus its full content, produced by a worker and
/// written by the caller.
type Artifact = (PathBuf, String);

struct UnitOutput {
    records: Vec<RunRecord>,
    artifacts: Vec<Artifact>,
}

fn fold_traces(log: &EventLog, indices: &[usize]) -> Vec<Vec<String>> {
    indices.iter().map(|&i| log.traces[i].events.clone()).collect()
}

// Average ok-fold metrics, padding `zeros` failed folds as hard zeros.
fn blend(vals: &[Option<f64>], zeros: usize, policy: UndefinedPolicy) -> Option<f64> {
    let defined: Vec<f64> = vals.iter().flatten().copied().collect();
    match policy {
        UndefinedPolicy::Exclude => {
            let n = defined.len() + zeros;
            (n > 0 && !(defined.is_empty() && zeros == 0))
                .then(|| defined.iter().sum::<f64>() / n as f64)
        }
        UndefinedPolicy::Zero => {
            let n = vals.len() + zeros;
            (n > 0).then(|| defined.iter().sum::<f64>() / n as f64)
        }
    }
}

fn summarize(
    folds: &[FoldRecord],
    on_failure: FailurePolicy,
    on_undefined: UndefinedPolicy,
) -> (RunStatus, Option<AveragedScores>, Option<String>) {
    let status = if folds.iter().any(|f| f.status == RunStatus::PoolExhausted) {
        RunStatus::PoolExhausted
    } else if folds.iter().any(|f| f.status == RunStatus::MinerFailed) {
        RunStatus::MinerFailed
    } else {
        RunStatus::Ok
    };
    let ok: Vec<ConfusionMatrix> = folds.iter().filter_map(|f| f.matrix).collect();
    let failed = folds.len() - ok.len();
    let scores = match on_failure {
        FailurePolicy::Exclude => average_folds(&ok, on_undefined),
        FailurePolicy::Zero => {
            let undefined_folds = ok
                .iter()
                .filter(|m| m.precision().is_none() || m.recall().is_none() || m.f1().is_none())
                .count();
            let metric = |vals: Vec<Option<f64>>, name: &'static str| {
                blend(&vals, failed, on_undefined).ok_or(MetricsError::AllUndefined(name))
            };
            (|| {
                Ok(AveragedScores {
                    precision: metric(ok.iter().map(|m| m.precision()).collect(), "precision")?,
                    recall: metric(ok.iter().map(|m| m.recall()).collect(), "recall")?,
                    f1: metric(ok.iter().map(|m| m.f1()).collect(), "f1")?,
                    undefined_folds,
                })
            })()
        }
    };
    match scores {
        Ok(s) => (status, Some(s), None),
        Err(e) => (status, None, Some(e.to_string())),
    }
}

fn evaluate_unit(cfg: &ExperimentConfig, cell: &CellConfig, unit: &WorkUnit) -> UnitOutput {
    let mi = unit.model_index.to_string();
    let sz = unit.log_size.to_string();
    let model_path = ["cell", cell.id.as_str(), "model", mi.as_str()];
    let log_path = ["cell", cell.id.as_str(), "model", mi.as_str(), "log", sz.as_str()];

    let tree = generate_tree(&cell.population, &mut rng_for(cfg.seed, &model_path));
    let truth = compile_tree_to_net(&tree).expect("generated trees compile");
    let log = simulate_log(&tree, unit.log_size, &mut rng_for(cfg.seed, &log_path));
    let mut split_path = log_path.to_vec();
    split_path.push("split");
    let plan = split_kfold(unit.log_size, cfg.k_folds, &mut rng_for(cfg.seed, &split_path))
        .expect("config validated against log sizes");
    let alphabet: Vec<String> = tree.alphabet().into_iter().collect();
    let replay_cfg =
        ReplayConfig { state_budget: cfg.replay_budget, token_bound: cfg.token_bound };

    // Noised test traces per fold, shared by every miner.
    let mut noise_sets: Vec<Result<Vec<Vec<String>>, String>> = Vec::new();
    for (f, fold) in plan.folds.iter().enumerate() {
        let fi = f.to_string();
        let mut noise_path = log_path.to_vec();
        noise_path.push("noise");
        noise_path.push(fi.as_str());
        let mut rng = rng_for(cfg.seed, &noise_path);
        let mut pool = fold_traces(&log, &fold.train);
        pool.shuffle(&mut rng);
        let mut noised = Vec::with_capacity(fold.test_noise.len());
        let mut failure = None;
        for &idx in &fold.test_noise {
            let first = log.traces[idx].events.clone();
            match make_nonfitting(
                &truth,
                &alphabet,
                first,
                &mut pool,
                cfg.noise_prob,
                &replay_cfg,
                &mut rng,
            ) {
                Ok(out) => noised.push(out.events),
                Err(e) => {
                    failure = Some(e.to_string());
                    break;
                }
            }
        }
        noise_sets.push(match failure {
            None => Ok(noised),
            Some(e) => Err(e),
        });
    }

    let mut artifacts = Vec::new();
    if cfg.persist_artifacts {
        let base = PathBuf::from("models").join(&unit.cell_id);
        let text = write_tree(&tree).expect("generated trees print");
        artifacts.push((base.join(format!("m{:03}.tree", unit.model_index)), text));
        let pnml = truth.to_pnml(&unit.model_id());
        artifacts.push((base.join(format!("m{:03}.pnml", unit.model_index)), pnml));
        let log_base = PathBuf::from("logs").join(unit.model_id());
        artifacts.push((log_base.join(format!("s{}.jsonl", unit.log_size)), log.to_jsonl()));
        let plan_json = serde_json::to_string_pretty(&plan).expect("plain data");
        artifacts.push((log_base.join(format!("s{}.folds.json", unit.log_size)), plan_json));
    }

    let mut records = Vec::new();
    for miner in &cfg.miners {
        let mut folds = Vec::with_capacity(plan.folds.len());
        for (f, fold) in plan.folds.iter().enumerate() {
            let record = match &noise_sets[f] {
                Err(e) => FoldRecord {
                    fold: f,
                    status: RunStatus::PoolExhausted,
                    matrix: None,
                    budget_exceeded: 0,
                    error: Some(e.clone()),
                },
                Ok(noised) => {
                    let training = fold_traces(&log, &fold.train);
                    match discover(&miner.name, &training) {
                        Err(e) => FoldRecord {
                            fold: f,
                            status: RunStatus::MinerFailed,
                            matrix: None,
                            budget_exceeded: 0,
                            error: Some(e.to_string()),
                        },
                        Ok(net) => {
                            if cfg.persist_artifacts {
                                let path = PathBuf::from("nets")
                                    .join(unit.log_id())
                                    .join(&miner.name)
                                    .join(format!("fold{f}.pnml"));
                                let id = format!("{}/{}/fold{f}", unit.log_id(), miner.name);
                                artifacts.push((path, net.to_pnml(&id)));
                            }
                            let fitting = fold_traces(&log, &fold.test_fitting);
                            match classify_fold(&net, &fitting, noised, &replay_cfg) {
                                Ok(eval) => FoldRecord {
                                    fold: f,
                                    status: RunStatus::Ok,
                                    matrix: Some(eval.matrix),
                                    budget_exceeded: eval.budget_exceeded,
                                    error: None,
                                },
                                Err(e) => FoldRecord {
                                    fold: f,
                                    status: RunStatus::MinerFailed,
                                    matrix: None,
                                    budget_exceeded: 0,
                                    error: Some(e.to_string()),
                                },
                            }
                        }
                    }
                }
            };
            folds.push(record);
        }
        let (status, scores, error) = summarize(&folds, cfg.on_failure, cfg.on_undefined);
        records.push(RunRecord {
            cell_id: unit.cell_id.clone(),
            miner: miner.name.clone(),
            model_index: unit.model_index,
            log_size: unit.log_size,
            model_id: unit.model_id(),
            log_id: unit.log_id(),
            status,
            folds,
            scores,
            error,
        });
    }
    UnitOutput { records, artifacts }
}

/// Reads a journal, keeping the last record per (log, miner) key in file
/// order.
pub fn load_records(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let content = fs::read_to_string(path)?;
    let mut by_key: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut records: Vec<RunRecord> = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: RunRecord =
            serde_json::from_str(line).map_err(|e| HarnessError::Journal(i + 1, e))?;
        match by_key.get(&rec.key()) {
            Some(&at) => records[at] = rec,
            None => {
                by_key.insert(rec.key(), records.len());
                records.push(rec);
            }
        }
    }
    Ok(records)
}

/// Orders records by configured cell, model index, log size and miner, the
/// order plans expand in. Records not named by the config sort last.
pub fn sort_records(cfg: &ExperimentConfig, records: &mut [RunRecord]) {
    let cell_pos: BTreeMap<&str, usize> =
        cfg.cells.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
    let size_pos: BTreeMap<usize, usize> =
        cfg.log_sizes.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let miner_pos: BTreeMap<&str, usize> =
        cfg.miners.iter().enumerate().map(|(i, m)| (m.name.as_str(), i)).collect();
    records.sort_by(|a, b| {
        let ka = (
            cell_pos.get(a.cell_id.as_str()).copied().unwrap_or(usize::MAX),
            a.model_index,
            size_pos.get(&a.log_size).copied().unwrap_or(usize::MAX),
            miner_pos.get(a.miner.as_str()).copied().unwrap_or(usize::MAX),
        );
        let kb = (
            cell_pos.get(b.cell_id.as_str()).copied().unwrap_or(usize::MAX),
            b.model_index,
            size_pos.get(&b.log_size).copied().unwrap_or(usize::MAX),
            miner_pos.get(b.miner.as_str()).copied().unwrap_or(usize::MAX),
        );
        ka.cmp(&kb).then_with(|| a.log_id.cmp(&b.log_id)).then_with(|| a.miner.cmp(&b.miner))
    });
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    /// Planned runs: units times miners.
    pub planned: usize,
    /// Runs taken from the journal instead of recomputed.
    pub reused: usize,
    /// Runs executed this invocation.
    pub executed: usize,
    pub records: Vec<RunRecord>,
}

/// Runs the full experiment into `out_dir`: journal, per-fold and aggregate
/// tables, and artifacts when configured. With `resume`, units whose
/// records are already journaled are skipped. `workers` bounds the thread
/// pool; zero picks the machine default.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    workers: usize,
    resume: bool,
) -> Result<RunSummary, HarnessError> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let journal_path = out_dir.join("records.jsonl");

    let mut kept: Vec<RunRecord> = Vec::new();
    if resume && journal_path.exists() {
        kept = load_records(&journal_path)?;
    } else if journal_path.exists() {
        fs::remove_file(&journal_path)?;
    }
    let done: BTreeSet<(String, String)> = kept.iter().map(|r| r.key()).collect();

    let units: Vec<WorkUnit> = cfg
        .plan_units()
        .into_iter()
        .filter(|u| !cfg.miners.iter().all(|m| done.contains(&(u.log_id(), m.name.clone()))))
        .collect();
    // Keep only journal records the current plan still names.
    let planned_keys: BTreeSet<(String, String)> = cfg
        .plan_units()
        .iter()
        .flat_map(|u| cfg.miners.iter().map(move |m| (u.log_id(), m.name.clone())))
        .collect();
    kept.retain(|r| planned_keys.contains(&r.key()));
    let executed = units.len() * cfg.miners.len();

    let journal = Mutex::new(
        fs::OpenOptions::new().create(true).append(true).open(&journal_path)?,
    );
    let fresh: Mutex<Vec<RunRecord>> = Mutex::new(Vec::new());
    let cells: BTreeMap<&str, &CellConfig> =
        cfg.cells.iter().map(|c| (c.id.as_str(), c)).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool construction");
    let failure: Mutex<Option<HarnessError>> = Mutex::new(None);
    pool.install(|| {
        use rayon::prelude::*;
        units.par_iter().for_each(|unit| {
            let cell = cells[unit.cell_id.as_str()];
            let out = evaluate_unit(cfg, cell, unit);
            let write = (|| -> Result<(), HarnessError> {
                for (rel, content) in &out.artifacts {
                    let path = out_dir.join(rel);
                    if let Some(dir) = path.parent() {
                        fs::create_dir_all(dir)?;
                    }
                    fs::write(path, content)?;
                }
                let mut lines = String::new();
                for rec in &out.records {
                    lines.push_str(&serde_json::to_string(rec)?);
                    lines.push('\n');
                }
                let mut journal = journal.lock().expect("journal lock");
                journal.write_all(lines.as_bytes())?;
                journal.flush()?;
                Ok(())
            })();
            if let Err(e) = write {
                failure.lock().expect("failure lock").get_or_insert(e);
            }
            fresh.lock().expect("results lock").extend(out.records);
        });
    });
    if let Some(e) = failure.into_inner().expect("failure lock") {
        return Err(e);
    }

    let mut records = kept;
    let reused = records.len();
    records.extend(fresh.into_inner().expect("results lock"));
    sort_records(cfg, &mut records);

    crate::harness::report::write_runs_csv(&records, &out_dir.join("runs.csv"))?;
    crate::harness::report::write_aggregate_csv(&records, &out_dir.join("aggregate.csv"))?;
    Ok(RunSummary { planned: cfg.plan_len(), reused, executed, records })
}
