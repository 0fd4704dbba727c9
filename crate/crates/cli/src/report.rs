//! Report rendering. The JSON form is stable: fixed key order, entities
//! sorted by id, no timestamps, so identical inputs produce byte-identical
//! output.

use std::collections::BTreeMap;

use serde::Serialize;

use oospect_core::metrics::MetricTable;
use oospect_core::strategy::{LintWarning, SuspectReport};

#[derive(Debug, Serialize)]
pub struct JsonReport {
    pub strategy: String,
    pub suspects: Vec<JsonSuspect>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct JsonSuspect {
    pub id: String,
    pub evidence: BTreeMap<String, f64>,
}

pub fn json_reports(reports: &[(SuspectReport, Vec<LintWarning>)]) -> String {
    let rendered: Vec<JsonReport> = reports
        .iter()
        .map(|(report, warnings)| JsonReport {
            strategy: report.strategy.clone(),
            suspects: report
                .suspects
                .iter()
                .map(|id| JsonSuspect {
                    id: id.to_string(),
                    evidence: report
                        .evidence
                        .get(id)
                        .map(|values| {
                            values.iter().map(|(m, v)| (m.name().to_string(), *v)).collect()
                        })
                        .unwrap_or_default(),
                })
                .collect(),
            warnings: warnings.iter().map(|w| w.to_string()).collect(),
        })
        .collect();
    let mut out =
        serde_json::to_string_pretty(&rendered).expect("report serialization cannot fail");
    out.push('\n');
    out
}

pub fn text_reports(reports: &[(SuspectReport, Vec<LintWarning>)]) -> String {
    let mut out = String::new();
    for (report, warnings) in reports {
        out.push_str(&format!("== {} ==\n", report.strategy));
        for warning in warnings {
            out.push_str(&format!("warning: {warning}\n"));
        }
        out.push_str(&format!("suspects ({}):\n", report.suspects.len()));
        for id in &report.suspects {
            let evidence = report
                .evidence
                .get(id)
                .map(|values| {
                    values
                        .iter()
                        .map(|(metric, value)| format!("{metric}={}", format_value(*value)))
                        .collect::<Vec<_>>()
                        .join(", ")
                })
                .unwrap_or_default();
            out.push_str(&format!("  {id}  [{evidence}]\n"));
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct JsonMetrics {
    pub metrics: BTreeMap<String, BTreeMap<String, f64>>,
}

pub fn json_metrics(tables: &[MetricTable]) -> String {
    let metrics = tables
        .iter()
        .map(|table| {
            (
                table.metric().name().to_string(),
                table.iter().map(|(id, v)| (id.to_string(), v)).collect(),
            )
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&JsonMetrics { metrics })
        .expect("metric serialization cannot fail");
    out.push('\n');
    out
}

pub fn text_metrics(tables: &[MetricTable]) -> String {
    let mut out = String::new();
    for table in tables {
        out.push_str(&format!("== {} ==\n", table.metric().name()));
        for (id, value) in table.iter() {
            out.push_str(&format!("  {id}  {}\n", format_value(value)));
        }
    }
    out
}

/// Integers print bare, fractions with four decimals.
fn format_value(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value:.4}")
    }
}
