//! Tables, statistics and figures over finished run records.
//!
//! `runs.csv` holds one row per fold, `aggregate.csv` one row per run.
//! Statistics compare miners on their per-run averages with a rank test
//! plus pairwise follow-up, and probe each miner for a trend across the
//! configured cell order. Runs without scores are left out of statistics
//! and counted, so a thin result never silently becomes a strong one.

use crate::harness::config::ExperimentConfig;
use crate::harness::runner::{HarnessError, RunRecord, RunStatus};
use crate::stats::{jonckheere, kruskal_wallis, posthoc_pairwise, Jonckheere, KruskalWallis, Posthoc};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const RUNS_HEADER: &str =
    "cell_id,miner,model_id,log_id,fold,tp,fp,fn,tn,precision,recall,f1,budget_exceeded,status";
pub const AGGREGATE_HEADER: &str =
    "cell_id,miner,model_id,log_id,avg_precision,avg_recall,avg_f1,undefined_folds,status";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// One row per (run, fold). Folds without a confusion matrix leave the
/// count and score columns empty.
pub fn write_runs_csv(records: &[RunRecord], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RUNS_HEADER.split(','))?;
    for rec in records {
        for fold in &rec.folds {
            let (tp, fp, fne, tn) = match fold.matrix {
                Some(m) => (
                    m.true_pos.to_string(),
                    m.false_pos.to_string(),
                    m.false_neg.to_string(),
                    m.true_neg.to_string(),
                ),
                None => Default::default(),
            };
            let (p, r, f1) = match fold.matrix {
                Some(m) => (opt(m.precision()), opt(m.recall()), opt(m.f1())),
                None => Default::default(),
            };
            w.write_record([
                rec.cell_id.as_str(),
                rec.miner.as_str(),
                rec.model_id.as_str(),
                rec.log_id.as_str(),
                &fold.fold.to_string(),
                &tp,
                &fp,
                &fne,
                &tn,
                &p,
                &r,
                &f1,
                &fold.budget_exceeded.to_string(),
                &fold.status.to_string(),
            ])?;
        }
    }
    w.flush().map_err(HarnessError::Io)?;
    Ok(())
}

/// One row per run with fold-averaged scores. Runs without scores leave
/// the score columns empty.
pub fn write_aggregate_csv(records: &[RunRecord], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_HEADER.split(','))?;
    for rec in records {
        let (p, r, f1, undef) = match &rec.scores {
            Some(s) => (
                format!("{:.6}", s.precision),
                format!("{:.6}", s.recall),
                format!("{:.6}", s.f1),
                s.undefined_folds.to_string(),
            ),
            None => Default::default(),
        };
        w.write_record([
            rec.cell_id.as_str(),
            rec.miner.as_str(),
            rec.model_id.as_str(),
            rec.log_id.as_str(),
            &p,
            &r,
            &f1,
            &undef,
            &rec.status.to_string(),
        ])?;
    }
    w.flush().map_err(HarnessError::Io)?;
    Ok(())
}

pub const METRICS: [&str; 3] = ["precision", "recall", "f1"];

fn score_of(rec: &RunRecord, metric: &str) -> Option<f64> {
    rec.scores.as_ref().map(|s| match metric {
        "precision" => s.precision,
        "recall" => s.recall,
        _ => s.f1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinerComparison {
    pub metric: String,
    /// Miner names in group order.
    pub groups: Vec<String>,
    pub group_sizes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kruskal_wallis: Option<KruskalWallis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posthoc: Option<Posthoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendTest {
    pub miner: String,
    pub metric: String,
    /// Cell ids in hypothesized order.
    pub groups: Vec<String>,
    pub group_sizes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jonckheere: Option<Jonckheere>,
    pub trend: Trend,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub alpha: f64,
    /// Runs that produced no scores and were left out.
    pub dropped_runs: usize,
    pub comparisons: Vec<MinerComparison>,
    pub trends: Vec<TrendTest>,
}

/// Rank statistics over per-run averaged scores: miners compared against
/// each other per metric, and each miner probed for a trend across cells.
pub fn compute_stats(cfg: &ExperimentConfig, records: &[RunRecord]) -> StatsReport {
    let scored: Vec<&RunRecord> = records.iter().filter(|r| r.scores.is_some()).collect();
    let dropped_runs = records.len() - scored.len();

    let mut comparisons = Vec::new();
    for metric in METRICS {
        let groups: Vec<String> = cfg.miners.iter().map(|m| m.name.clone()).collect();
        let samples: Vec<Vec<f64>> = groups
            .iter()
            .map(|name| {
                scored
                    .iter()
                    .filter(|r| &r.miner == name)
                    .filter_map(|r| score_of(r, metric))
                    .collect()
            })
            .collect();
        let group_sizes: Vec<usize> = samples.iter().map(Vec::len).collect();
        let mut cmp = MinerComparison {
            metric: metric.to_string(),
            groups,
            group_sizes,
            kruskal_wallis: None,
            posthoc: None,
            error: None,
        };
        match kruskal_wallis(&samples) {
            Ok(kw) => {
                cmp.posthoc = posthoc_pairwise(&samples, cfg.alpha).ok();
                cmp.kruskal_wallis = Some(kw);
            }
            Err(e) => cmp.error = Some(e.to_string()),
        }
        comparisons.push(cmp);
    }

    let mut trends = Vec::new();
    for miner in &cfg.miners {
        for metric in METRICS {
            let groups: Vec<String> = cfg.cells.iter().map(|c| c.id.clone()).collect();
            let samples: Vec<Vec<f64>> = groups
                .iter()
                .map(|cell| {
                    scored
                        .iter()
                        .filter(|r| r.miner == miner.name && &r.cell_id == cell)
                        .filter_map(|r| score_of(r, metric))
                        .collect()
                })
                .collect();
            let group_sizes: Vec<usize> = samples.iter().map(Vec::len).collect();
            let mut test = TrendTest {
                miner: miner.name.clone(),
                metric: metric.to_string(),
                groups,
                group_sizes,
                jonckheere: None,
                trend: Trend::None,
                error: None,
            };
            match jonckheere(&samples) {
                Ok(j) => {
                    test.trend = if j.p_increasing <= cfg.alpha {
                        Trend::Increasing
                    } else if j.p_decreasing <= cfg.alpha {
                        Trend::Decreasing
                    } else {
                        Trend::None
                    };
                    test.jonckheere = Some(j);
                }
                Err(e) => test.error = Some(e.to_string()),
            }
            trends.push(test);
        }
    }
    StatsReport { alpha: cfg.alpha, dropped_runs, comparisons, trends }
}

fn render_stats_text(report: &StatsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "alpha: {}", report.alpha);
    let _ = writeln!(out, "runs without scores (dropped): {}", report.dropped_runs);
    let _ = writeln!(out);
    let _ = writeln!(out, "miner comparison (rank test over per-run averages)");
    for cmp in &report.comparisons {
        match (&cmp.kruskal_wallis, &cmp.error) {
            (Some(kw), _) => {
                let _ = writeln!(
                    out,
                    "  {}: H = {:.4}, df = {}, p = {:.6}{}",
                    cmp.metric,
                    kw.statistic,
                    kw.df,
                    kw.p_value,
                    if kw.p_value <= report.alpha { "  *" } else { "" }
                );
                if let Some(ph) = &cmp.posthoc {
                    for pair in &ph.pairs {
                        let _ = writeln!(
                            out,
                            "    {} vs {}: |mean rank diff| = {:.3}, critical = {:.3}{}",
                            cmp.groups[pair.i],
                            cmp.groups[pair.j],
                            pair.mean_rank_diff.abs(),
                            pair.critical,
                            if pair.significant { "  *" } else { "" }
                        );
                    }
                }
            }
            (None, Some(e)) => {
                let _ = writeln!(out, "  {}: not computed ({e})", cmp.metric);
            }
            (None, None) => {}
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "trends across cells (ordered rank test)");
    for t in &report.trends {
        match (&t.jonckheere, &t.error) {
            (Some(j), _) => {
                let _ = writeln!(
                    out,
                    "  {} / {}: J = {:.1}, z = {:.3}, p(inc) = {:.6}, p(dec) = {:.6} -> {}",
                    t.miner,
                    t.metric,
                    j.statistic,
                    j.z,
                    j.p_increasing,
                    j.p_decreasing,
                    match t.trend {
                        Trend::Increasing => "increasing",
                        Trend::Decreasing => "decreasing",
                        Trend::None => "no trend",
                    }
                );
            }
            (None, Some(e)) => {
                let _ = writeln!(out, "  {} / {}: not computed ({e})", t.miner, t.metric);
            }
            (None, None) => {}
        }
    }
    out
}

/// Writes `stats.json` and `stats.txt` into `out_dir`.
pub fn write_stats(report: &StatsReport, out_dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(out_dir)?;
    let json = serde_json::to_string_pretty(report)?;
    fs::write(out_dir.join("stats.json"), json)?;
    fs::write(out_dir.join("stats.txt"), render_stats_text(report))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub cell_id: String,
    pub miner: String,
    pub runs: usize,
    pub failed_runs: usize,
    pub mean_precision: Option<f64>,
    pub mean_recall: Option<f64>,
    pub mean_f1: Option<f64>,
}

/// Per (cell, miner) means over scored runs, in config order.
pub fn summarize_cells(cfg: &ExperimentConfig, records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for cell in &cfg.cells {
        for miner in &cfg.miners {
            let runs: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.cell_id == cell.id && r.miner == miner.name)
                .collect();
            let failed_runs = runs.iter().filter(|r| r.status != RunStatus::Ok).count();
            let mean = |metric: &str| {
                let vals: Vec<f64> =
                    runs.iter().filter_map(|r| score_of(r, metric)).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            };
            rows.push(SummaryRow {
                cell_id: cell.id.clone(),
                miner: miner.name.clone(),
                runs: runs.len(),
                failed_runs,
                mean_precision: mean("precision"),
                mean_recall: mean("recall"),
                mean_f1: mean("f1"),
            });
        }
    }
    rows
}

pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "cell_id",
        "miner",
        "runs",
        "failed_runs",
        "mean_precision",
        "mean_recall",
        "mean_f1",
    ])?;
    for row in rows {
        w.write_record([
            row.cell_id.as_str(),
            row.miner.as_str(),
            &row.runs.to_string(),
            &row.failed_runs.to_string(),
            &opt(row.mean_precision),
            &opt(row.mean_recall),
            &opt(row.mean_f1),
        ])?;
    }
    w.flush().map_err(HarnessError::Io)?;
    Ok(())
}

const BAR_COLORS: [&str; 6] = ["#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4", "#8c613c"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A grouped bar chart of mean F1 per cell and miner, as a standalone SVG
/// document.
pub fn render_summary_svg(rows: &[SummaryRow]) -> String {
    let mut cells: Vec<&str> = Vec::new();
    let mut miners: Vec<&str> = Vec::new();
    for row in rows {
        if !cells.contains(&row.cell_id.as_str()) {
            cells.push(&row.cell_id);
        }
        if !miners.contains(&row.miner.as_str()) {
            miners.push(&row.miner);
        }
    }
    let mut f1: BTreeMap<(&str, &str), Option<f64>> = BTreeMap::new();
    for row in rows {
        f1.insert((row.cell_id.as_str(), row.miner.as_str()), row.mean_f1);
    }

    let bar_w = 26.0;
    let gap = 8.0;
    let group_w = miners.len() as f64 * bar_w + gap;
    let left = 60.0;
    let plot_h = 240.0;
    let top = 30.0;
    let legend_h = 22.0 * miners.len() as f64;
    let width = left + cells.len() as f64 * (group_w + gap) + 160.0;
    let height = top + plot_h + 50.0 + legend_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{left}" y="18" font-family="sans-serif" font-size="14">mean F1 by cell and miner</text>"#
    );
    // Axis, gridlines and tick labels.
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = top + plot_h * (1.0 - v);
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##,
            width - 150.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.1}</text>"#,
            left - 6.0,
            y + 4.0
        );
    }
    for (ci, cell) in cells.iter().enumerate() {
        let x0 = left + ci as f64 * (group_w + gap) + gap / 2.0;
        for (mi, miner) in miners.iter().enumerate() {
            let x = x0 + mi as f64 * bar_w;
            if let Some(Some(v)) = f1.get(&(*cell, *miner)) {
                let h = plot_h * v.clamp(0.0, 1.0);
                let y = top + plot_h - h;
                let color = BAR_COLORS[mi % BAR_COLORS.len()];
                let _ = writeln!(
                    svg,
                    r#"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{h:.1}" fill="{color}"><title>{}: {v:.4}</title></rect>"#,
                    bar_w - 3.0,
                    esc(miner)
                );
            } else {
                let y = top + plot_h - 2.0;
                let _ = writeln!(
                    svg,
                    r##"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="2" fill="#bbb"/>"##,
                    bar_w - 3.0
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            x0 + group_w / 2.0 - gap / 2.0,
            top + plot_h + 18.0,
            esc(cell)
        );
    }
    for (mi, miner) in miners.iter().enumerate() {
        let y = top + plot_h + 40.0 + mi as f64 * 22.0;
        let color = BAR_COLORS[mi % BAR_COLORS.len()];
        let _ = writeln!(svg, r#"<rect x="{left}" y="{y:.1}" width="14" height="14" fill="{color}"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            left + 20.0,
            y + 11.0,
            esc(miner)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `summary.csv` and `summary.svg` into `out_dir`.
pub fn write_report(
    cfg: &ExperimentConfig,
    records: &[RunRecord],
    out_dir: &Path,
) -> Result<(), HarnessError> {
    fs::create_dir_all(out_dir)?;
    let rows = summarize_cells(cfg, records);
    write_summary_csv(&rows, &out_dir.join("summary.csv"))?;
    fs::write(out_dir.join("summary.svg"), render_summary_svg(&rows))?;
    Ok(())
}
