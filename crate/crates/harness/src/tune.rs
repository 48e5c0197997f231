//! Grid search over one agent parameter.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::config::{ExperimentConfig, Timing, TuneParam};
use crate::error::{HarnessError, Result};
use crate::runner::{run_rep, worker_pool};
use crate::stats::mean_stderr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneRow {
    pub value: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub param: TuneParam,
    pub rows: Vec<TuneRow>,
    pub best: f64,
}

/// Runs `reps` replications for every grid value and keeps the value with the largest
/// mean final cumulative reward; ties go to the smaller value.
pub fn tune(
    cfg: &ExperimentConfig,
    param: TuneParam,
    grid: &[f64],
    reps: usize,
) -> Result<TuneResult> {
    if grid.is_empty() || reps == 0 {
        return Err(HarnessError::Config(
            "tuning needs a nonempty grid and reps >= 1".into(),
        ));
    }
    let mut values = grid.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let configs = values
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            param.apply(&mut c.agent, v);
            c.experiment.reps = reps;
            c.experiment.timing = Timing::None;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|i| (0..reps).map(move |r| (i, r)))
        .collect();
    let pool = worker_pool(cfg.experiment.workers)?;
    let finals: Vec<f64> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, rep)| run_rep(&configs[i], rep).map(|o| o.final_cum_reward()))
            .collect::<Result<_>>()
    })?;
    let rows: Vec<TuneRow> = values
        .iter()
        .zip(finals.chunks(reps))
        .map(|(&value, chunk)| {
            let (mean, stderr) = mean_stderr(chunk);
            TuneRow {
                value,
                mean,
                stderr,
            }
        })
        .collect();
    let best = rows
        .iter()
        .fold(None::<TuneRow>, |acc, r| match acc {
            Some(b) if b.mean >= r.mean => Some(b),
            _ => Some(*r),
        })
        .expect("grid is nonempty")
        .value;
    Ok(TuneResult { param, rows, best })
}

impl TuneResult {
    pub fn to_tsv(&self) -> String {
        let mut out = format!("{}\tmean\tstderr\n", self.param.name());
        for r in &self.rows {
            out.push_str(&format!("{}\t{}\t{}\n", r.value, r.mean, r.stderr));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(self.to_tsv().as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| HarnessError::io(path, e))
    }
}
