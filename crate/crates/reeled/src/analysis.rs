//! Group comparisons over an exported study dataset.
//!
//! The long-form condition is the first group ("No-LLM"), the reels
//! condition the second ("LLM"). Every metric column with at least three
//! values per group is compared with [`compare_groups`]; the rest are listed
//! as skipped.

use std::fmt::Write as _;

use reeled_core::analytics::catalog::{column_name, ITEMS};
use reeled_core::analytics::{score_ueq_short, Instrument, LikertResponse, UEQ_S_ITEMS};
use reeled_core::stats::{compare_groups, GroupSample, TestResult};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SIGNIFICANCE: f64 = 0.05;
const MIN_GROUP: usize = 3;

pub const CONTROL_LABEL: &str = "No-LLM";
pub const TREATMENT_LABEL: &str = "LLM";

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupInfo {
    pub label: String,
    pub condition: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dimension: String,
    pub metric: String,
    pub question: String,
    pub significant: bool,
    pub result: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub metric: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub groups: [GroupInfo; 2],
    pub rows: Vec<ReportRow>,
    pub skipped: Vec<Skipped>,
}

struct Metric {
    dimension: &'static str,
    name: String,
    question: String,
}

fn metrics() -> Vec<Metric> {
    let quiz = |name: &str, question: &str| Metric { dimension: "Learning Outcome", name: name.into(), question: question.into() };
    let mut all = vec![
        quiz("quiz_score_pct", "Quiz score (%)"),
        quiz("quiz_duration_s", "Quiz completion time (s)"),
        quiz("revisits", "Video revisits"),
    ];
    all.extend(ITEMS.iter().map(|c| Metric { dimension: c.dimension, name: column_name(c), question: c.question.into() }));
    for scale in ["pragmatic", "hedonic", "overall"] {
        all.push(Metric {
            dimension: "User Experience",
            name: format!("ueq_s.{scale}"),
            question: format!("UEQ-S {scale} quality"),
        });
    }
    all
}

fn parse_cell(row: usize, col: &str, cell: &str) -> Result<Option<f64>, AnalysisError> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(AnalysisError::BadRow { row, message: format!("`{col}` holds `{cell}`") }),
    }
}

/// Reads a dataset in the service's export layout and compares the two
/// conditions on every metric.
pub fn analyze(csv_text: &str) -> Result<Report, AnalysisError> {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let cond_col = col("condition").ok_or(AnalysisError::MissingColumn("condition"))?;
    let metrics = metrics();
    let ueq_cols: Option<Vec<usize>> = UEQ_S_ITEMS.iter().map(|id| col(&format!("ueq_s.{id}"))).collect();

    // values[group][metric]
    let mut values = vec![vec![Vec::new(); metrics.len()]; 2];
    let mut rows = [0usize; 2];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let g = match rec.get(cond_col).map(str::trim) {
            Some("long_form") => 0,
            Some("reels") => 1,
            other => {
                return Err(AnalysisError::BadRow { row, message: format!("unknown condition {:?}", other.unwrap_or("")) })
            }
        };
        rows[g] += 1;
        for (m, metric) in metrics.iter().enumerate() {
            if let Some(c) = col(&metric.name) {
                if let Some(v) = parse_cell(row, &metric.name, rec.get(c).unwrap_or(""))? {
                    values[g][m].push(v);
                }
            }
        }
        // UEQ-S scales need all eight answers
        let Some(cols) = &ueq_cols else { continue };
        let answers: Option<Vec<LikertResponse>> = cols
            .iter()
            .zip(UEQ_S_ITEMS)
            .map(|(c, id)| {
                let v: u8 = rec.get(*c)?.trim().parse().ok()?;
                Some(LikertResponse::new(Instrument::UeqS, id, v))
            })
            .collect();
        if let Some(answers) = answers {
            let s = score_ueq_short(&answers).map_err(|e| AnalysisError::BadRow { row, message: e.to_string() })?;
            let base = metrics.len() - 3;
            values[g][base].push(s.pragmatic);
            values[g][base + 1].push(s.hedonic);
            values[g][base + 2].push(s.overall);
        }
    }

    let mut report = Report {
        groups: [
            GroupInfo { label: CONTROL_LABEL.into(), condition: "long_form".into(), rows: rows[0] },
            GroupInfo { label: TREATMENT_LABEL.into(), condition: "reels".into(), rows: rows[1] },
        ],
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for (m, metric) in metrics.iter().enumerate() {
        let (a, b) = (&values[0][m], &values[1][m]);
        if a.len() < MIN_GROUP || b.len() < MIN_GROUP {
            if col(&metric.name).is_some() || metric.name.starts_with("ueq_s.") && ueq_cols.is_some() {
                report.skipped.push(Skipped {
                    metric: metric.name.clone(),
                    reason: format!("needs {MIN_GROUP} values per group, has {} and {}", a.len(), b.len()),
                });
            }
            continue;
        }
        let g1 = GroupSample::new(CONTROL_LABEL, a.clone());
        let g2 = GroupSample::new(TREATMENT_LABEL, b.clone());
        match compare_groups(&g1, &g2) {
            Ok(result) => report.rows.push(ReportRow {
                dimension: metric.dimension.into(),
                metric: metric.name.clone(),
                question: metric.question.clone(),
                significant: result.p_value < SIGNIFICANCE,
                result,
            }),
            Err(e) => report.skipped.push(Skipped { metric: metric.name.clone(), reason: e.to_string() }),
        }
    }
    Ok(report)
}

/// Plain-text table: dimension, metric, M ± SD per group, method,
/// statistic, p and a `*` for p < 0.05.
pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<34} {:<44} {:>16} {:>16} {:<12} {:>10} {:>8} sig",
        "dimension",
        "metric",
        format!("{} M±SD", r.groups[0].label),
        format!("{} M±SD", r.groups[1].label),
        "method",
        "statistic",
        "p"
    );
    for row in &r.rows {
        let [a, b] = &row.result.group_summaries;
        let _ = writeln!(
            out,
            "{:<34} {:<44} {:>16} {:>16} {:<12} {:>10.2} {:>8.4} {}",
            row.dimension,
            row.metric,
            format!("{:.2} ± {:.2}", a.mean, a.sd),
            format!("{:.2} ± {:.2}", b.mean, b.sd),
            row.result.method.as_str(),
            row.result.statistic,
            row.result.p_value,
            if row.significant { "*" } else { "" }
        );
    }
    for s in &r.skipped {
        let _ = writeln!(out, "skipped {}: {}", s.metric, s.reason);
    }
    out
}
