use std::fs::File;
use std::path::Path;

use super::es::GenerationStats;
use super::local::TracePoint;
use crate::error::{Error, Result};

/// Columns: `evaluation,best_cost,wall_time_s`.
pub fn write_local_trace_csv(path: &Path, trace: &[TracePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path).map_err(|e| Error::io(path, e))?);
    w.write_record(["evaluation", "best_cost", "wall_time_s"])?;
    for t in trace {
        w.write_record([t.evaluation.to_string(), t.best.to_string(), t.wall_time_s.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Columns: `generation,mean_fitness,max_fitness,min_fitness,wall_time_s`.
pub fn write_es_trace_csv(path: &Path, trace: &[GenerationStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path).map_err(|e| Error::io(path, e))?);
    w.write_record([
        "generation",
        "mean_fitness",
        "max_fitness",
        "min_fitness",
        "wall_time_s",
    ])?;
    for t in trace {
        w.write_record([
            t.generation.to_string(),
            t.mean_fitness.to_string(),
            t.max_fitness.to_string(),
            t.min_fitness.to_string(),
            t.wall_time_s.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
