//! Experiment specification: a flat TOML table of scalars and lists.

use std::path::Path;

use irs_core::alt_opt::{InitMode, OptimizerConfig, WarmStart};
use irs_core::channel::{ChannelParams, PathLossParams, Scenario, SystemDims};
use irs_core::projectors::ConstraintKind;
use irs_core::vamp::{LmmseMode, VampConfig};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, spec_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    VampUnimodular,
    VampReactive,
    RandomPhaseIrs,
    NoIrsMmse,
    GridOracleTiny,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::VampUnimodular,
        Scheme::VampReactive,
        Scheme::RandomPhaseIrs,
        Scheme::NoIrsMmse,
        Scheme::GridOracleTiny,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::VampUnimodular => "vamp_unimodular",
            Scheme::VampReactive => "vamp_reactive",
            Scheme::RandomPhaseIrs => "random_phase_irs",
            Scheme::NoIrsMmse => "no_irs_mmse",
            Scheme::GridOracleTiny => "grid_oracle_tiny",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioName {
    A,
    B,
}

impl From<ScenarioName> for Scenario {
    fn from(s: ScenarioName) -> Self {
        match s {
            ScenarioName::A => Scenario::A,
            ScenarioName::B => Scenario::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Desk,
    Paper,
}

impl std::str::FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(format!("unknown preset '{other}' (expected desk or paper)")),
        }
    }
}

/// Every key is optional; missing keys take the desk-preset value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: ScenarioName,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub k: Vec<usize>,
    pub power_dbm: Vec<f64>,
    pub kappa: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub base_seed: u64,
    pub noise_dbm: f64,
    /// Optimize and evaluate with the BS-user link removed.
    pub exclude_direct: bool,
    /// Fill the `ms` column; off by default so output is reproducible.
    pub record_wall_time: bool,
    /// BS antennas of `no_irs_mmse` relative to `n`.
    pub no_irs_antenna_factor: usize,
    pub grid_points: usize,

    pub spacing_ratio: f64,
    pub q_irs: usize,
    pub q_bu: usize,
    pub q_su: usize,
    pub d_irs: f64,
    pub user_radius_min: f64,
    pub user_radius_max: f64,
    pub c0: f64,
    pub d0: f64,
    pub eta_irs: f64,
    pub eta_bu: f64,
    pub eta_su: f64,
    pub los_margin_db: f64,

    pub epsilon: f64,
    pub t_max: usize,
    pub rho: f64,
    pub gamma_w: f64,
    pub gamma_0: f64,
    pub gamma_floor: f64,
    pub inner_iterations: usize,
    pub warm_start: String,
    pub lmmse_mode: String,
    pub init: String,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self::preset(Preset::Desk)
    }
}

fn check(ok: bool, path: impl Into<String>, msg: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(spec_err(path, msg))
    }
}

impl ExperimentSpec {
    pub fn preset(p: Preset) -> Self {
        let ch = ChannelParams::default();
        let vamp = VampConfig::<f64>::default();
        let opt = OptimizerConfig::<f64>::default();
        let mut s = Self {
            scenario: ScenarioName::B,
            n: vec![8],
            m: vec![2],
            k: vec![16, 36, 64],
            power_dbm: vec![10.0, 20.0, 30.0],
            kappa: vec![1.0],
            schemes: vec![
                Scheme::VampUnimodular,
                Scheme::VampReactive,
                Scheme::RandomPhaseIrs,
                Scheme::NoIrsMmse,
            ],
            trials: 100,
            base_seed: 1,
            noise_dbm: -100.0,
            exclude_direct: false,
            record_wall_time: false,
            no_irs_antenna_factor: 3,
            grid_points: 64,
            spacing_ratio: ch.spacing_ratio,
            q_irs: ch.q_irs,
            q_bu: ch.q_bu,
            q_su: ch.q_su,
            d_irs: ch.d_irs,
            user_radius_min: ch.user_radius.0,
            user_radius_max: ch.user_radius.1,
            c0: ch.pl_irs.c0,
            d0: ch.pl_irs.d0,
            eta_irs: ch.pl_irs.eta,
            eta_bu: ch.pl_bu.eta,
            eta_su: ch.pl_su.eta,
            los_margin_db: ch.los_margin_db,
            epsilon: opt.epsilon_outer,
            t_max: opt.t_max_outer,
            rho: vamp.rho,
            gamma_w: vamp.gamma_w,
            gamma_0: vamp.gamma_0,
            gamma_floor: vamp.gamma_floor,
            inner_iterations: opt.inner_iterations,
            warm_start: "carry".into(),
            lmmse_mode: "structured".into(),
            init: "standard".into(),
        };
        if p == Preset::Paper {
            s.n = vec![32];
            s.m = vec![4];
            s.k = vec![64, 144, 256];
            s.power_dbm = vec![0.0, 10.0, 20.0, 30.0, 40.0];
            s.trials = 1000;
        }
        s
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let path = e
                .span()
                .map(|sp| key_at(text, sp.start))
                .unwrap_or_else(|| "<spec>".into());
            spec_err(path, msg)
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn channel_params(&self) -> ChannelParams {
        let pl = |eta| PathLossParams {
            c0: self.c0,
            d0: self.d0,
            eta,
        };
        ChannelParams {
            spacing_ratio: self.spacing_ratio,
            q_irs: self.q_irs,
            q_bu: self.q_bu,
            q_su: self.q_su,
            d_irs: self.d_irs,
            user_radius: (self.user_radius_min, self.user_radius_max),
            pl_irs: pl(self.eta_irs),
            pl_bu: pl(self.eta_bu),
            pl_su: pl(self.eta_su),
            los_margin_db: self.los_margin_db,
        }
    }

    pub fn optimizer(&self, constraint: ConstraintKind) -> OptimizerConfig<f64> {
        OptimizerConfig {
            vamp: VampConfig {
                gamma_w: self.gamma_w,
                epsilon: self.epsilon,
                t_max: self.t_max,
                rho: self.rho,
                gamma_floor: self.gamma_floor,
                gamma_0: self.gamma_0,
            },
            epsilon_outer: self.epsilon,
            t_max_outer: self.t_max,
            constraint,
            init: if self.init == "constant" { InitMode::Constant } else { InitMode::Standard },
            warm_start: if self.warm_start == "reset" { WarmStart::Reset } else { WarmStart::Carry },
            lmmse_mode: if self.lmmse_mode == "dense" { LmmseMode::Dense } else { LmmseMode::Structured },
            inner_iterations: self.inner_iterations,
        }
    }

    pub fn noise_watts(&self) -> f64 {
        irs_core::num::dbm_to_watts(self.noise_dbm)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.trials >= 1, "trials", "must be at least 1")?;
        for (name, len) in [
            ("n", self.n.len()),
            ("m", self.m.len()),
            ("k", self.k.len()),
            ("power_dbm", self.power_dbm.len()),
            ("kappa", self.kappa.len()),
            ("schemes", self.schemes.len()),
        ] {
            check(len > 0, name, "list must not be empty")?;
        }
        for (i, p) in self.power_dbm.iter().enumerate() {
            check(p.is_finite(), format!("power_dbm[{i}]"), "must be finite")?;
        }
        for (i, k) in self.kappa.iter().enumerate() {
            check((0.0..=1.0).contains(k), format!("kappa[{i}]"), "must lie in [0, 1]")?;
        }
        check(self.noise_dbm.is_finite(), "noise_dbm", "must be finite")?;
        check(self.no_irs_antenna_factor >= 1, "no_irs_antenna_factor", "must be at least 1")?;
        check(self.grid_points >= 1, "grid_points", "must be at least 1")?;
        for (i, n) in self.n.iter().enumerate() {
            for (j, m) in self.m.iter().enumerate() {
                for (l, k) in self.k.iter().enumerate() {
                    irs_dims(*n, *m, *k).map_err(|e| spec_err(format!("n[{i}]/m[{j}]/k[{l}]"), e.to_string()))?;
                }
            }
        }
        if let Some(pos) = self.schemes.iter().position(|s| *s == Scheme::GridOracleTiny) {
            for (l, k) in self.k.iter().enumerate() {
                let budget = (self.grid_points as f64).powi(*k as i32);
                check(
                    *k <= 3 && budget <= 1e6,
                    format!("k[{l}]"),
                    format!("schemes[{pos}] = grid_oracle_tiny needs K <= 3 and grid_points^K <= 1e6"),
                )?;
            }
        }
        for (key, val, options) in [
            ("warm_start", &self.warm_start, &["carry", "reset"][..]),
            ("lmmse_mode", &self.lmmse_mode, &["structured", "dense"][..]),
            ("init", &self.init, &["standard", "constant"][..]),
        ] {
            check(options.contains(&val.as_str()), key, format!("expected one of {options:?}"))?;
        }
        self.channel_params()
            .validate()
            .map_err(|e| spec_err("channel", e.to_string()))?;
        self.optimizer(ConstraintKind::Unimodular)
            .validate()
            .map_err(|e| spec_err("optimizer", e.to_string()))?;
        Ok(())
    }
}

/// System dimensions with the IRS laid out as the most square `rows × cols`
/// grid with `rows · cols = K`.
pub fn irs_dims(n: usize, m: usize, k: usize) -> irs_core::Result<SystemDims> {
    let rows = (1..=((k as f64).sqrt() as usize).max(1))
        .rev()
        .find(|r| k.is_multiple_of(*r))
        .unwrap_or(1);
    SystemDims::with_irs_grid(n, m, rows, k / rows.max(1))
}

/// Name of the key on the line containing byte `offset`.
fn key_at(text: &str, offset: usize) -> String {
    let start = text[..offset.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next().unwrap_or("");
    match line.split_once('=') {
        Some((key, _)) => key.trim().to_string(),
        None => "<spec>".into(),
    }
}
