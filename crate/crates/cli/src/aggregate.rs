//! Cross-run summary: mean and standard deviation per (site, condition) cell.

use std::collections::BTreeMap;

use fedabc::evaluation::{Condition, MetricsReport, MetricsRow};
use serde::{Deserialize, Serialize};

pub const FIELDS: [&str; 7] = [
    "Accuracy",
    "Sensitivity",
    "Specificity",
    "Precision",
    "Recall",
    "F1",
    "Cut-off",
];

fn field_values(r: &MetricsRow) -> [f64; 7] {
    let m = &r.metrics;
    [
        m.accuracy,
        m.sensitivity,
        m.specificity,
        m.precision,
        m.recall,
        m.f1,
        r.cutoff,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub site_id: u32,
    pub condition: Condition,
    pub runs: usize,
    pub mean: [f64; 7],
    /// Sample standard deviation; 0 for a single run.
    pub sd: [f64; 7],
}

impl Cell {
    pub fn f1(&self) -> f64 {
        self.mean[5]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub cells: Vec<Cell>,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn get(&self, site_id: u32, condition: Condition) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.site_id == site_id && c.condition == condition)
    }

    pub fn render_text(&self) -> String {
        let headers: Vec<String> = self.cells.iter().map(|c| c.condition.column_label(c.site_id)).collect();
        let cells: Vec<Vec<String>> = self
            .cells
            .iter()
            .map(|c| {
                (0..FIELDS.len())
                    .map(|k| {
                        if c.runs > 1 {
                            format!("{:.4}±{:.4}", c.mean[k], c.sd[k])
                        } else {
                            format!("{:.4}", c.mean[k])
                        }
                    })
                    .collect()
            })
            .collect();
        let width = headers
            .iter()
            .map(|h| h.chars().count())
            .chain(cells.iter().flatten().map(|s| s.chars().count()))
            .max()
            .unwrap_or(8);
        let mut out = format!("{} run(s)\n{:<12}", self.runs, "");
        for h in &headers {
            out.push_str(&format!(" {h:>width$}"));
        }
        out.push('\n');
        for (k, name) in FIELDS.iter().enumerate() {
            out.push_str(&format!("{name:<12}"));
            for c in &cells {
                out.push_str(&format!(" {:>width$}", c[k]));
            }
            out.push('\n');
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

/// Aggregates reports; differing configuration hashes produce a warning.
pub fn summarize(reports: &[MetricsReport]) -> Summary {
    let mut warnings = Vec::new();
    if let Some(first) = reports.first() {
        if reports.iter().any(|r| r.config_hash != first.config_hash) {
            warnings.push("reports come from different configurations".into());
        }
    }
    let mut groups: BTreeMap<(u32, Condition), Vec<[f64; 7]>> = BTreeMap::new();
    for report in reports {
        for row in &report.rows {
            groups
                .entry((row.site_id, row.condition))
                .or_default()
                .push(field_values(row));
        }
    }
    let cells = groups
        .into_iter()
        .map(|((site_id, condition), vals)| {
            let n = vals.len() as f64;
            let mut mean = [0.0; 7];
            let mut sd = [0.0; 7];
            for k in 0..7 {
                mean[k] = vals.iter().map(|v| v[k]).sum::<f64>() / n;
                if vals.len() > 1 {
                    let ss: f64 = vals.iter().map(|v| (v[k] - mean[k]).powi(2)).sum();
                    sd[k] = (ss / (n - 1.0)).sqrt();
                }
            }
            if vals.len() != reports.len() {
                warnings.push(format!(
                    "{} present in {} of {} runs",
                    condition.column_label(site_id),
                    vals.len(),
                    reports.len()
                ));
            }
            Cell {
                site_id,
                condition,
                runs: vals.len(),
                mean,
                sd,
            }
        })
        .collect();
    Summary {
        runs: reports.len(),
        cells,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fedabc::evaluation::compute_metrics;

    fn report(hash: &str, f1_pred: &[u8]) -> MetricsReport {
        let metrics = compute_metrics(f1_pred, &[1, 1, 0, 0]).unwrap();
        MetricsReport {
            rows: vec![MetricsRow {
                site_id: 1,
                condition: Condition::Raw,
                cutoff: 0.5,
                train_f1: 1.0,
                threshold: None,
                metrics,
            }],
            seeds: BTreeMap::new(),
            config_hash: hash.into(),
        }
    }

    #[test]
    fn mean_and_sd() {
        let s = summarize(&[report("a", &[1, 1, 0, 0]), report("a", &[0, 0, 0, 0])]);
        let c = s.get(1, Condition::Raw).unwrap();
        assert_eq!(c.runs, 2);
        assert_eq!(c.f1(), 0.5);
        assert!((c.sd[5] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(s.warnings.is_empty());
        assert!(s.render_text().contains("Site 1 Raw"));
    }

    #[test]
    fn mismatched_configs_warn() {
        let s = summarize(&[report("a", &[1, 1, 0, 0]), report("b", &[1, 1, 0, 0])]);
        assert_eq!(s.warnings.len(), 1);
        assert!(s.render_text().contains("warning"));
    }
}
