//! Subcommand bodies: each reads its inputs from disk and writes artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fedabc::dataprep::{load_csv, CsvColumns};
use fedabc::evaluation::MetricsReport;
use log::{info, warn};
use serde::Serialize;

use crate::aggregate::{summarize, Summary};
use crate::config::ExperimentConfig;
use crate::pipeline::{self, write_json, RunPaths};

#[derive(Serialize)]
struct DataManifest<'a> {
    config_hash: String,
    seed: u64,
    rows: usize,
    features: usize,
    class_counts: (usize, usize),
    spec: &'a fedabc::dataprep::SynthSpec,
}

/// Writes `data.csv` (features, label, site) and `data_manifest.json`.
pub fn cmd_gen_data(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let data = pipeline::generate(cfg)?;
    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let path = cfg.data_csv();
    let site_col = cfg.data.site_column.as_deref().unwrap_or("site");
    pipeline::write_data_csv(&data, &path, &cfg.data.label_column, site_col)?;
    let mut spec = cfg.data.synthetic.clone();
    spec.profile = cfg.data.profile.clone();
    write_json(
        &cfg.out_dir.join("data_manifest.json"),
        &DataManifest {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            rows: data.dataset.len(),
            features: data.dataset.dim(),
            class_counts: data.dataset.class_counts(),
            spec: &spec,
        },
    )?;
    info!("wrote {} rows to {}", data.dataset.len(), path.display());
    Ok(path)
}

/// Filters, partitions, splits and standardizes the input table.
pub fn cmd_prepare(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let csv = cfg.data_csv();
    let cols = CsvColumns {
        label: cfg.data.label_column.clone(),
        site: cfg.data.site_column.clone(),
        row_id: None,
    };
    let loaded = load_csv(&csv, &cols).with_context(|| format!("loading {}", csv.display()))?;
    let prepared = pipeline::prepare(cfg, &loaded, &csv.display().to_string())?;
    let dir = cfg.prepared_dir();
    pipeline::write_prepared(&prepared, &dir)?;
    for s in &prepared.manifest.sites {
        info!(
            "site {}: train {}/{}, test {}/{}",
            s.site_id, s.train_counts.0, s.train_counts.1, s.test_counts.0, s.test_counts.1
        );
    }
    Ok(dir)
}

/// What `cmd_run` produced.
pub struct RunOutcome {
    /// 0 when at least one parameter set was accepted, 2 otherwise.
    pub exit_code: i32,
    pub report_text: String,
    pub paths: RunPaths,
}

/// Runs the experiment on prepared partitions and writes its artifacts.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let prepared = pipeline::read_prepared(&cfg.prepared_dir())?;
    let artifacts = pipeline::execute(cfg, &prepared)?;
    let paths = pipeline::write_run(cfg, &artifacts)?;
    let exit_code = artifacts.exit_code();
    if exit_code != 0 {
        warn!("no parameter set was accepted; ABC condition omitted");
    }
    info!("posterior written to {}", paths.posterior.display());
    Ok(RunOutcome {
        exit_code,
        report_text: artifacts.report.render_text(),
        paths,
    })
}

fn report_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("report.json")
    } else {
        p.to_path_buf()
    }
}

/// Aggregates `report.json` files (or run directories containing one).
pub fn cmd_report(paths: &[PathBuf], out: Option<&Path>) -> Result<Summary> {
    let reports = paths
        .iter()
        .map(|p| {
            let path = report_path(p);
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<MetricsReport>(&text).with_context(|| format!("parsing {}", path.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&reports);
    for w in &summary.warnings {
        warn!("{w}");
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.txt"), summary.render_text())?;
        write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(summary)
}
