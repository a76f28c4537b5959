//! Parallel execution of every (cell, trial) pair of a spec.

use rayon::prelude::*;

use crate::aggregate::{aggregate, Aggregate};
use crate::error::{Error, Result};
use crate::schemes::{run_trial, Cell, TrialRecord};
use crate::spec::ExperimentSpec;

/// Cells in output order: scheme, then N, M, K, power, κ.
pub fn cells(spec: &ExperimentSpec) -> Vec<Cell> {
    let mut out = Vec::new();
    for &scheme in &spec.schemes {
        for &n in &spec.n {
            for &m in &spec.m {
                for &k in &spec.k {
                    for &power_dbm in &spec.power_dbm {
                        for &kappa in &spec.kappa {
                            out.push(Cell {
                                scheme,
                                n,
                                m,
                                k,
                                power_dbm,
                                kappa,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
}

/// Runs the sweep on `threads` workers (all cores when `None`). Records come
/// back in cell-major, trial-minor order regardless of scheduling.
pub fn run_sweep(spec: &ExperimentSpec, threads: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    let jobs: Vec<(Cell, u64)> = cells(spec)
        .into_iter()
        .flat_map(|c| (0..spec.trials as u64).map(move |t| (c, t)))
        .collect();
    let work = || -> Result<Vec<TrialRecord>> { jobs.par_iter().map(|(c, t)| run_trial(spec, c, *t)).collect() };
    let records = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Spec {
                path: "threads".into(),
                msg: e.to_string(),
            })?
            .install(work)?,
        None => work()?,
    };
    let aggregates = aggregate(&records);
    Ok(SweepResult { records, aggregates })
}
