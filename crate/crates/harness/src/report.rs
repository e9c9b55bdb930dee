//! Aggregation of trial records into curves and summaries, and CSV output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sparsense_core::metrics::to_db;

use crate::error::Result;
use crate::experiment::{run_trials, ExperimentSpec, TrialRecord};

/// How r-MSE values are averaged across trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Mean of the linear values, then dB.
    #[default]
    Linear,
    /// Mean of the per-trial dB values.
    Decibel,
}

impl Averaging {
    pub fn mean_db(self, linear: impl IntoIterator<Item = f64>) -> f64 {
        let (mut sum, mut count) = (0.0, 0usize);
        for v in linear {
            sum += match self {
                Averaging::Linear => v,
                Averaging::Decibel => to_db(v),
            };
            count += 1;
        }
        let mean = sum / count as f64;
        match self {
            Averaging::Linear => to_db(mean),
            Averaging::Decibel => mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub rmse_db: Vec<f64>,
    pub s_mean: Vec<f64>,
}

pub fn curve(records: &[TrialRecord], averaging: Averaging) -> Curve {
    let len = records.first().map_or(0, |r| r.rmse.len());
    let trials = records.len() as f64;
    let rmse_db = (0..len).map(|i| averaging.mean_db(records.iter().map(|r| r.rmse[i]))).collect();
    let s_mean = (0..len).map(|i| records.iter().map(|r| f64::from(r.s_trajectory[i])).sum::<f64>() / trials).collect();
    Curve { label: records.first().map(|r| r.label.clone()).unwrap_or_default(), rmse_db, s_mean }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub label: String,
    pub measurements: usize,
    pub trials: usize,
    pub final_rmse_db: f64,
    /// Mean r-MSE over the last `M` iterations.
    pub steady_rmse_db: f64,
    pub final_s_mean: f64,
    /// Trial mean of the first iteration at or below -15 dB; trials that
    /// never get there count as `stream length + 1`.
    pub iters_to_minus15_db: f64,
    pub reached_minus15_db: usize,
    pub wallclock_ms: f64,
}

pub const REACH_LEVEL_DB: f64 = -15.0;

/// Iterations needed to reach `level_db`, with `len + 1` for trials that never do.
pub fn censored_reach(record: &TrialRecord, level_db: f64) -> usize {
    record.iterations_to_reach(level_db).unwrap_or(record.rmse.len() + 1)
}

pub fn summarize(experiment: &str, measurements: usize, records: &[TrialRecord], averaging: Averaging) -> SummaryRow {
    let len = records[0].rmse.len();
    let tail = len.saturating_sub(measurements)..len;
    let n = records.len() as f64;
    SummaryRow {
        experiment: experiment.to_owned(),
        label: records[0].label.clone(),
        measurements,
        trials: records.len(),
        final_rmse_db: averaging.mean_db(records.iter().map(|r| r.rmse[len - 1])),
        steady_rmse_db: averaging.mean_db(records.iter().map(|r| r.mean_rmse(tail.clone()))),
        final_s_mean: records.iter().map(|r| f64::from(r.s_trajectory[len - 1])).sum::<f64>() / n,
        iters_to_minus15_db: records.iter().map(|r| censored_reach(r, REACH_LEVEL_DB) as f64).sum::<f64>() / n,
        reached_minus15_db: records.iter().filter(|r| r.iterations_to_reach(REACH_LEVEL_DB).is_some()).count(),
        wallclock_ms: records.iter().map(|r| r.wallclock.as_secs_f64() * 1e3).sum::<f64>() / n,
    }
}

/// Everything produced by one run of an experiment at one `M`.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub experiment: String,
    pub measurements: usize,
    pub records: Vec<Vec<TrialRecord>>,
}

impl RunResult {
    pub fn curves(&self, averaging: Averaging) -> Vec<Curve> {
        self.records.iter().map(|r| curve(r, averaging)).collect()
    }

    pub fn summary(&self, averaging: Averaging) -> Vec<SummaryRow> {
        self.records.iter().map(|r| summarize(&self.experiment, self.measurements, r, averaging)).collect()
    }

    pub fn by_label(&self, label: &str) -> Option<&[TrialRecord]> {
        self.records.iter().find(|r| r.first().is_some_and(|t| t.label == label)).map(Vec::as_slice)
    }
}

/// Runs an experiment at every `M` of its grid.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunResult>> {
    spec.measurement_grid()
        .into_iter()
        .map(|m| Ok(RunResult { experiment: spec.name.clone(), measurements: m, records: run_trials(spec, m)? }))
        .collect()
}

#[derive(Serialize)]
struct CurveRow<'a> {
    experiment: &'a str,
    label: &'a str,
    iteration: usize,
    rmse_db: f64,
    s_est_mean: f64,
}

/// Long format: one row per (algorithm, iteration), iterations 1-based.
pub fn write_curves<W: Write>(out: W, experiment: &str, curves: &[Curve]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in curves {
        for (i, (&rmse_db, &s_est_mean)) in c.rmse_db.iter().zip(&c.s_mean).enumerate() {
            w.serialize(CurveRow { experiment, label: &c.label, iteration: i + 1, rmse_db, s_est_mean })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated wide layout for gnuplot: a `#` header, then one row
/// per iteration with an r-MSE column per algorithm.
pub fn write_gnuplot<W: Write>(mut out: W, curves: &[Curve]) -> Result<()> {
    write!(out, "# iteration")?;
    for c in curves {
        write!(out, " {}", c.label)?;
    }
    writeln!(out)?;
    let len = curves.iter().map(|c| c.rmse_db.len()).max().unwrap_or(0);
    for i in 0..len {
        write!(out, "{}", i + 1)?;
        for c in curves {
            match c.rmse_db.get(i) {
                Some(v) => write!(out, " {v}")?,
                None => write!(out, " NaN")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<name>.csv` (or `<name>-M<m>.csv` for sweeps), the matching
/// `.dat` file when `gnuplot` is set, and `<name>-summary.csv`. Returns the
/// paths written.
pub fn write_outputs(dir: &Path, results: &[RunResult], averaging: Averaging, gnuplot: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut summary = Vec::new();
    let sweep = results.len() > 1;
    for res in results {
        let stem = if sweep { format!("{}-M{}", res.experiment, res.measurements) } else { res.experiment.clone() };
        let curves = res.curves(averaging);
        let path = dir.join(format!("{stem}.csv"));
        write_curves(std::io::BufWriter::new(std::fs::File::create(&path)?), &res.experiment, &curves)?;
        written.push(path);
        if gnuplot {
            let path = dir.join(format!("{stem}.dat"));
            write_gnuplot(std::io::BufWriter::new(std::fs::File::create(&path)?), &curves)?;
            written.push(path);
        }
        summary.extend(res.summary(averaging));
    }
    if let Some(first) = results.first() {
        let path = dir.join(format!("{}-summary.csv", first.experiment));
        write_summary(std::fs::File::create(&path)?, &summary)?;
        written.push(path);
    }
    Ok(written)
}
