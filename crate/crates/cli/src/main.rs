//! Command line front end for the experiment harness.
//!
//! `generate` materializes models and logs without evaluating anything,
//! `run` executes the full pipeline into an output directory, `stats`
//! recomputes statistics from a journal, and `report` renders summary
//! tables and a figure. All subcommands read the same JSON configuration.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use minebench::compile::compile_tree_to_net;
use minebench::harness::{
    compute_stats, load_records, run_experiment, sort_records, ExperimentConfig,
};
use minebench::population::generate_tree;
use minebench::seeds::rng_for;
use minebench::simulate::simulate_log;
use minebench::text::write_tree;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "minebench", version, about = "Process discovery evaluation workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Override the configured master seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the configured models and simulate their logs.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Also write logs in XES format.
        #[arg(long)]
        xes: bool,
    },
    /// Run the full experiment: evaluate every miner on every unit.
    Run {
        #[command(flatten)]
        common: Common,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 1, value_name = "N")]
        workers: usize,
        /// Reuse journaled runs instead of recomputing them.
        #[arg(long)]
        resume: bool,
    },
    /// Compute rank statistics from a finished run's journal.
    Stats {
        #[command(flatten)]
        common: Common,
    },
    /// Render summary tables and a figure from a finished run's journal.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let raw = fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&raw)
        .with_context(|| format!("parsing {}", common.config.display()))?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn generate(cfg: &ExperimentConfig, out: &Path, xes: bool) -> Result<()> {
    for cell in &cfg.cells {
        let model_dir = out.join("models").join(&cell.id);
        fs::create_dir_all(&model_dir)?;
        for m in 0..cfg.models_per_cell {
            let mi = m.to_string();
            let path = ["cell", cell.id.as_str(), "model", mi.as_str()];
            let tree = generate_tree(&cell.population, &mut rng_for(cfg.seed, &path));
            let net = compile_tree_to_net(&tree).context("generated tree compiles")?;
            fs::write(model_dir.join(format!("m{m:03}.tree")), write_tree(&tree)?)?;
            let model_id = format!("{}/m{m:03}", cell.id);
            fs::write(model_dir.join(format!("m{m:03}.pnml")), net.to_pnml(&model_id))?;
            let log_dir = out.join("logs").join(&model_id);
            fs::create_dir_all(&log_dir)?;
            for &size in &cfg.log_sizes {
                let sz = size.to_string();
                let path =
                    ["cell", cell.id.as_str(), "model", mi.as_str(), "log", sz.as_str()];
                let log = simulate_log(&tree, size, &mut rng_for(cfg.seed, &path));
                fs::write(log_dir.join(format!("s{size}.jsonl")), log.to_jsonl())?;
                if xes {
                    fs::write(log_dir.join(format!("s{size}.xes")), log.to_xes())?;
                }
            }
        }
    }
    println!(
        "generated {} models across {} cells into {}",
        cfg.models_per_cell * cfg.cells.len(),
        cfg.cells.len(),
        out.display()
    );
    Ok(())
}

fn journal_records(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<minebench::harness::RunRecord>> {
    let journal = out.join("records.jsonl");
    if !journal.exists() {
        bail!("no journal at {}; run the experiment first", journal.display());
    }
    let mut records = load_records(&journal)?;
    sort_records(cfg, &mut records);
    Ok(records)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { common, xes } => {
            let cfg = load_config(&common)?;
            generate(&cfg, &common.out, xes)?;
        }
        Command::Run { common, workers, resume } => {
            let cfg = load_config(&common)?;
            let summary = run_experiment(&cfg, &common.out, workers, resume)?;
            let ok = summary.records.iter().filter(|r| r.scores.is_some()).count();
            println!(
                "{} runs planned, {} reused, {} executed; {} scored",
                summary.planned, summary.reused, summary.executed, ok
            );
            println!("tables written to {}", common.out.display());
        }
        Command::Stats { common } => {
            let cfg = load_config(&common)?;
            let records = journal_records(&cfg, &common.out)?;
            let report = compute_stats(&cfg, &records);
            minebench::harness::write_stats(&report, &common.out)?;
            print!("{}", fs::read_to_string(common.out.join("stats.txt"))?);
        }
        Command::Report { common } => {
            let cfg = load_config(&common)?;
            let records = journal_records(&cfg, &common.out)?;
            minebench::harness::write_report(&cfg, &records, &common.out)?;
            println!("summary written to {}", common.out.display());
        }
    }
    Ok(())
}
