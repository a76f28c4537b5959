//! One Monte Carlo trial of each scheme.

use std::time::Instant;

use irs_core::alt_opt::{joint_optimize, objective_error, BeamformingSolution, OuterTraceRow};
use irs_core::channel::{perturb_csi, synthesize, CsiQuality};
use irs_core::metrics::TrialMetrics;
use irs_core::num::{cis, dbm_to_watts, CMat, CVec};
use irs_core::oracles::grid_phase_search;
use irs_core::precoder::mmse_precoder;
use irs_core::projectors::{ConstraintKind, PhaseVector};
use irs_core::ChannelSet64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::seeds::{stream, trial_seed, Stream};
use crate::spec::{irs_dims, ExperimentSpec, Scheme};

/// One sweep point: a scheme at fixed dimensions, power and CSI quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub scheme: Scheme,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub power_dbm: f64,
    pub kappa: f64,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scheme: String,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub power_dbm: f64,
    pub kappa: f64,
    pub sum_rate: f64,
    pub nrmse: f64,
    pub iters: usize,
    pub ms: f64,
}

pub const CSV_HEADER: &str = "scheme,seed,N,M,K,power_dbm,kappa,sum_rate,nrmse,iters,ms";

/// Single evaluated solution for fixed phases: precoder from `csi`.
fn fixed_phases(
    csi: &ChannelSet64,
    upsilon: PhaseVector<f64>,
    power: f64,
    sigma2: f64,
) -> Result<BeamformingSolution<f64>> {
    let sol = mmse_precoder(&csi.effective(&upsilon.upsilon)?, power, sigma2)?;
    let error = objective_error(sol.alpha, &upsilon.upsilon, &sol.f, csi, sigma2)?;
    let m = sol.f.ncols() as f64;
    let row = OuterTraceRow {
        iteration: 0,
        error,
        nrmse: (error / m).sqrt(),
        sum_rate: irs_core::metrics::sum_rate(csi, &upsilon.upsilon, &sol.f, sigma2)?,
    };
    Ok(BeamformingSolution {
        upsilon,
        f: sol.f,
        alpha: sol.alpha,
        trace: vec![row],
        iterations: 0,
        converged: true,
        diverged: false,
        clamp_events: 0,
    })
}

/// i.i.d. uniform unimodular phases with the MMSE precoder for them.
pub fn baseline_random_phase<R: Rng + ?Sized>(
    ch: &ChannelSet64,
    power: f64,
    sigma2: f64,
    rng: &mut R,
) -> Result<BeamformingSolution<f64>> {
    let (_, _, k) = ch.shape();
    let upsilon = CVec::from_fn(k, |_, _| cis(rng.random_range(0.0..2.0 * std::f64::consts::PI)));
    fixed_phases(
        ch,
        PhaseVector {
            upsilon,
            kind: ConstraintKind::Unimodular,
        },
        power,
        sigma2,
    )
}

/// The channel with the IRS removed: only `H_bu` is left.
pub fn direct_only(ch: &ChannelSet64) -> ChannelSet64 {
    let (n, _, k) = ch.shape();
    let m = ch.h_bu.ncols();
    ChannelSet64 {
        h_bs: CMat::zeros(k, n),
        h_bu: ch.h_bu.clone(),
        h_su: CMat::zeros(k, m),
        geometry: ch.geometry.clone(),
    }
}

/// Channel realization of trial `trial` for `cell`; `n` antennas.
pub fn trial_channel(spec: &ExperimentSpec, n: usize, cell: &Cell, seed: u64) -> Result<ChannelSet64> {
    let dims = irs_dims(n, cell.m, cell.k)?;
    let ch = synthesize(&mut stream(seed, Stream::Channel), &dims, &spec.channel_params(), spec.scenario.into())?;
    Ok(if spec.exclude_direct { ch.without_direct() } else { ch })
}

/// Solution of one trial together with the true channel it is scored on.
#[derive(Debug, Clone)]
pub struct TrialSolution {
    pub seed: u64,
    pub channel: ChannelSet64,
    pub solution: BeamformingSolution<f64>,
    pub ms: f64,
}

/// Draws the trial's channel, perturbs it to the cell's CSI quality and runs
/// the scheme on the estimate.
pub fn solve_trial(spec: &ExperimentSpec, cell: &Cell, trial: u64) -> Result<TrialSolution> {
    let seed = trial_seed(spec.base_seed, trial);
    let power = dbm_to_watts(cell.power_dbm);
    let sigma2 = spec.noise_watts();
    let n = match cell.scheme {
        Scheme::NoIrsMmse => cell.n * spec.no_irs_antenna_factor,
        _ => cell.n,
    };
    let mut ch = trial_channel(spec, n, cell, seed)?;
    if cell.scheme == Scheme::NoIrsMmse {
        ch = direct_only(&ch);
    }
    let csi = perturb_csi(&ch, CsiQuality::new(cell.kappa)?, &mut stream(seed, Stream::Csi))?;

    let start = Instant::now();
    let solution = match cell.scheme {
        Scheme::VampUnimodular | Scheme::VampReactive => {
            let kind = if cell.scheme == Scheme::VampUnimodular {
                ConstraintKind::Unimodular
            } else {
                ConstraintKind::Reactive
            };
            joint_optimize(&csi, power, sigma2, &spec.optimizer(kind), &mut stream(seed, Stream::Init))?
        }
        Scheme::RandomPhaseIrs => baseline_random_phase(&csi, power, sigma2, &mut stream(seed, Stream::Baseline))?,
        Scheme::NoIrsMmse => fixed_phases(&csi, PhaseVector::constant(cell.k, ConstraintKind::Unimodular), power, sigma2)?,
        Scheme::GridOracleTiny => {
            let (best, _) = grid_phase_search(&csi, power, sigma2, spec.grid_points)?;
            let upsilon = PhaseVector {
                upsilon: CVec::from_vec(best),
                kind: ConstraintKind::Unimodular,
            };
            fixed_phases(&csi, upsilon, power, sigma2)?
        }
    };
    let ms = if spec.record_wall_time {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok(TrialSolution {
        seed,
        channel: ch,
        solution,
        ms,
    })
}

pub fn run_trial(spec: &ExperimentSpec, cell: &Cell, trial: u64) -> Result<TrialRecord> {
    let TrialSolution {
        seed,
        channel,
        solution: sol,
        ms,
    } = solve_trial(spec, cell, trial)?;
    let metrics = TrialMetrics::evaluate(&channel, &sol.upsilon.upsilon, &sol.f, sol.alpha, spec.noise_watts(), false)?;
    Ok(TrialRecord {
        scheme: cell.scheme.name().to_string(),
        seed,
        n: cell.n,
        m: cell.m,
        k: cell.k,
        power_dbm: cell.power_dbm,
        kappa: cell.kappa,
        sum_rate: metrics.sum_rate,
        nrmse: metrics.nrmse,
        iters: sol.iterations,
        ms,
    })
}
