//! Tiny-instance check of the optimizer against the exhaustive phase grid.

use irs_core::alt_opt::{joint_optimize, OptimizerConfig};
use irs_core::channel::{synthesize, ChannelParams, Scenario, SystemDims};
use irs_core::num::dbm_to_watts;
use irs_core::oracles::grid_phase_search;
use irs_core::projectors::ConstraintKind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::seeds::{stream, trial_seed, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TinyRow {
    pub seed: u64,
    pub e_unimodular: f64,
    pub e_reactive: f64,
    pub e_grid: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TinySuite {
    pub trials: usize,
    pub base_seed: u64,
    pub grid_points: usize,
    pub power_dbm: f64,
    pub noise_dbm: f64,
}

impl Default for TinySuite {
    fn default() -> Self {
        Self {
            trials: 100,
            base_seed: 1,
            grid_points: 64,
            power_dbm: 30.0,
            noise_dbm: -100.0,
        }
    }
}

/// M = 1, N = 2, K = 2 (a 1×2 surface), scenario B.
pub fn run_tiny_suite(s: &TinySuite) -> Result<Vec<TinyRow>> {
    let dims = SystemDims::with_irs_grid(2, 1, 1, 2)?;
    let power = dbm_to_watts(s.power_dbm);
    let sigma2 = dbm_to_watts(s.noise_dbm);
    (0..s.trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(s.base_seed, t);
            let ch = synthesize(&mut stream(seed, Stream::Channel), &dims, &ChannelParams::default(), Scenario::B)?;
            let solve = |kind| {
                joint_optimize(&ch, power, sigma2, &OptimizerConfig::with_constraint(kind), &mut stream(seed, Stream::Init))
                    .map(|sol| sol.final_error())
            };
            let e_unimodular = solve(ConstraintKind::Unimodular)?;
            let e_reactive = solve(ConstraintKind::Reactive)?;
            let (_, e_grid) = grid_phase_search(&ch, power, sigma2, s.grid_points)?;
            Ok(TinyRow {
                seed,
                e_unimodular,
                e_reactive,
                e_grid,
                ratio: e_unimodular / e_grid,
            })
        })
        .collect()
}
