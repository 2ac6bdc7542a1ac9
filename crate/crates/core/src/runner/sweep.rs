use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::{run_experiment, RunStatus};
use crate::error::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub dir: PathBuf,
    pub status: RunStatus,
    pub error: Option<String>,
    pub metrics: std::collections::BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub axis: String,
    pub points: Vec<SweepPoint>,
}

impl SweepSummary {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.status == RunStatus::Failed).count()
    }
}

/// Runs every point of the config's sweep, at most `jobs` at a time, each in
/// `out_dir/point-NNN`. A failing point is recorded and the rest continue.
/// Writes `summary.csv` with one row per point in axis order.
pub fn run_sweep(config: &ExperimentConfig, out_dir: &Path, jobs: usize) -> Result<SweepSummary> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep", "config declares no sweep"))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    info!("sweeping {} over {} points", sweep.axis.as_str(), sweep.values.len());

    let results: Vec<SweepPoint> = pool.install(|| {
        sweep
            .values
            .par_iter()
            .enumerate()
            .map(|(i, &value)| {
                let dir = out_dir.join(format!("point-{i:03}"));
                match config.sweep_point(value).and_then(|point| run_experiment(&point, &dir)) {
                    Ok(record) => SweepPoint {
                        value,
                        dir,
                        status: record.status,
                        error: record.error,
                        metrics: record.metrics,
                    },
                    Err(e) => {
                        warn!("sweep point {value} failed: {e}");
                        SweepPoint {
                            value,
                            dir,
                            status: RunStatus::Failed,
                            error: Some(e.to_string()),
                            metrics: Default::default(),
                        }
                    }
                }
            })
            .collect()
    });

    let summary = SweepSummary {
        axis: sweep.axis.as_str().to_string(),
        points: results,
    };
    write_summary(&out_dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

fn write_summary(path: &Path, summary: &SweepSummary) -> Result<()> {
    let keys: BTreeSet<&String> = summary.points.iter().flat_map(|p| p.metrics.keys()).collect();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec![summary.axis.clone(), "status".into()];
    header.extend(keys.iter().map(|k| k.to_string()));
    w.write_record(&header)?;
    for p in &summary.points {
        let status = match p.status {
            RunStatus::Ok => "ok",
            RunStatus::Failed => "failed",
        };
        let mut row = vec![p.value.to_string(), status.to_string()];
        row.extend(
            keys.iter()
                .map(|k| p.metrics.get(*k).map(f64::to_string).unwrap_or_default()),
        );
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
