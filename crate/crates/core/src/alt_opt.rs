//! Alternating minimization of the sum-MSE over the precoder and the IRS
//! phases.
//!
//! Each outer iteration rebuilds the phase sub-problem
//! `‖A Diag(υ) Bᵀ − Z‖²` from the current precoder, advances the VAMP state
//! by `inner_iterations` linear/projector passes, and refreshes the precoder
//! in closed form. The loop stops when the sum-MSE changes by less than
//! `epsilon_outer` relative to the previous value.

use rand::Rng;

use crate::channel::ChannelSet;
use crate::error::{invalid, mismatch, Error, Result};
use crate::metrics::sum_rate;
use crate::num::{cis, CMat, CVec, Complex, Real};
use crate::precoder::{mmse_precoder, PrecodingSolution};
use crate::projectors::{ConstraintKind, PhaseVector};
use crate::vamp::{ExtrinsicMessage, LmmseMode, SvdSystem, VampConfig, VampState};

/// `‖α(H_su^H Diag(υ) H_bs + H_bu^H)F − I‖²_F + Mα²σ²`.
pub fn objective_error<T: Real>(
    alpha: T,
    upsilon: &CVec<T>,
    f: &CMat<T>,
    ch: &ChannelSet<T>,
    sigma2: T,
) -> Result<T> {
    let h = ch.effective(upsilon)?;
    if f.nrows() != h.nrows() {
        return Err(mismatch(
            "objective_error",
            format!("H has {} rows, F has {}", h.nrows(), f.nrows()),
        ));
    }
    let m = f.ncols();
    let mut e = h.ad_mul(f).map(|z| z.scale(alpha));
    if e.nrows() != m {
        return Err(mismatch("objective_error", "F must have one column per user"));
    }
    for i in 0..m {
        e[(i, i)] -= Complex::new(T::one(), T::zero());
    }
    Ok(e.norm_squared() + T::of(m as f64) * alpha * alpha * sigma2)
}

/// Phase sub-problem for a fixed precoder: `A = αH_su^H` (`M×K`),
/// `B = (H_bs F)ᵀ` (`M×K`), `Z = I − αH_bu^H F` (`M×M`).
pub fn vamp_setup<T: Real>(ch: &ChannelSet<T>, f: &CMat<T>, alpha: T) -> Result<(CMat<T>, CMat<T>, CMat<T>)> {
    let (n, m, _) = ch.shape();
    if f.nrows() != n || f.ncols() != m {
        return Err(mismatch(
            "vamp_setup",
            format!("expected F {n}x{m}, got {}x{}", f.nrows(), f.ncols()),
        ));
    }
    let a = ch.h_su.adjoint().map(|z| z.scale(alpha));
    let b = (&ch.h_bs * f).transpose();
    let z = CMat::identity(m, m) - ch.h_bu.ad_mul(f).map(|x| x.scale(alpha));
    Ok((a, b, z))
}

/// Where the VAMP message starts at each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WarmStart {
    /// Keep `(r, γ)` from the previous outer iteration.
    #[default]
    Carry,
    /// Restart from `(υ̂_{t−1}, γ_0)`.
    Reset,
}

/// Initial phase vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// Uniform random phases for unimodular elements, `χ = 0` for reactive.
    #[default]
    Standard,
    /// Every element at the model's default point (`1` or `−1`).
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig<T: Real> {
    pub vamp: VampConfig<T>,
    pub epsilon_outer: T,
    pub t_max_outer: usize,
    pub constraint: ConstraintKind,
    pub init: InitMode,
    pub warm_start: WarmStart,
    pub lmmse_mode: LmmseMode,
    /// VAMP passes per outer iteration.
    pub inner_iterations: usize,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            vamp: VampConfig::default(),
            epsilon_outer: T::of(1e-3),
            t_max_outer: 100,
            constraint: ConstraintKind::Unimodular,
            init: InitMode::Standard,
            warm_start: WarmStart::Carry,
            lmmse_mode: LmmseMode::Structured,
            inner_iterations: 1,
        }
    }
}

impl<T: Real> OptimizerConfig<T> {
    pub fn with_constraint(constraint: ConstraintKind) -> Self {
        Self {
            constraint,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.vamp.validate()?;
        if !(self.epsilon_outer > T::zero()) {
            return Err(invalid("epsilon_outer", "must be positive"));
        }
        if self.t_max_outer == 0 {
            return Err(invalid("t_max_outer", "must be at least 1"));
        }
        if self.inner_iterations == 0 {
            return Err(invalid("inner_iterations", "must be at least 1"));
        }
        Ok(())
    }
}

/// Metrics recorded after each outer iteration; iteration 0 is the start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterTraceRow<T: Real> {
    pub iteration: usize,
    pub error: T,
    pub nrmse: T,
    pub sum_rate: T,
}

impl<T: Real> OuterTraceRow<T> {
    pub const CSV_HEADER: &'static str = "iteration,error,nrmse,sum_rate";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e}",
            self.iteration,
            self.error.as_f64(),
            self.nrmse.as_f64(),
            self.sum_rate.as_f64()
        )
    }
}

#[derive(Debug, Clone)]
pub struct BeamformingSolution<T: Real> {
    pub upsilon: PhaseVector<T>,
    pub f: CMat<T>,
    pub alpha: T,
    pub trace: Vec<OuterTraceRow<T>>,
    /// Outer iterations performed.
    pub iterations: usize,
    /// The relative-change test fired before `t_max_outer`.
    pub converged: bool,
    /// The VAMP message overflowed; the last finite phases were kept.
    pub diverged: bool,
    /// VAMP passes in which a precision was clamped.
    pub clamp_events: usize,
}

impl<T: Real> BeamformingSolution<T> {
    pub fn initial_error(&self) -> T {
        self.trace[0].error
    }

    pub fn final_error(&self) -> T {
        self.trace[self.trace.len() - 1].error
    }
}

/// Draws the initial phase vector for `cfg`.
pub fn initial_phases<T: Real, R: Rng + ?Sized>(
    k: usize,
    constraint: ConstraintKind,
    mode: InitMode,
    rng: &mut R,
) -> PhaseVector<T> {
    match (constraint, mode) {
        (ConstraintKind::Unimodular, InitMode::Standard) => PhaseVector {
            upsilon: CVec::from_fn(k, |_, _| cis(T::of(rng.random_range(0.0..2.0 * std::f64::consts::PI)))),
            kind: constraint,
        },
        _ => PhaseVector::constant(k, constraint),
    }
}

/// Joint precoder and phase optimization from an initial point drawn with
/// `rng`.
pub fn joint_optimize<T: Real, R: Rng + ?Sized>(
    ch: &ChannelSet<T>,
    power: T,
    sigma2: T,
    cfg: &OptimizerConfig<T>,
    rng: &mut R,
) -> Result<BeamformingSolution<T>> {
    let (_, _, k) = ch.shape();
    let init = initial_phases(k, cfg.constraint, cfg.init, rng);
    joint_optimize_from(ch, power, sigma2, cfg, init)
}

fn trace_row<T: Real>(
    iteration: usize,
    ch: &ChannelSet<T>,
    upsilon: &CVec<T>,
    sol: &PrecodingSolution<T>,
    sigma2: T,
) -> Result<OuterTraceRow<T>> {
    let error = objective_error(sol.alpha, upsilon, &sol.f, ch, sigma2)?;
    let m = T::of(sol.f.ncols() as f64);
    Ok(OuterTraceRow {
        iteration,
        error,
        nrmse: (error / m).sqrt(),
        sum_rate: sum_rate(ch, upsilon, &sol.f, sigma2)?,
    })
}

/// Joint optimization from a given feasible starting point.
pub fn joint_optimize_from<T: Real>(
    ch: &ChannelSet<T>,
    power: T,
    sigma2: T,
    cfg: &OptimizerConfig<T>,
    init: PhaseVector<T>,
) -> Result<BeamformingSolution<T>> {
    cfg.validate()?;
    let (_, _, k) = ch.shape();
    if init.len() != k {
        return Err(mismatch(
            "joint_optimize",
            format!("K = {k}, initial phases have {} entries", init.len()),
        ));
    }
    if init.kind != cfg.constraint {
        return Err(invalid("initial phases", "constraint kind differs from the configuration"));
    }
    let projector = cfg.constraint.projector::<T>();
    let mut upsilon = init.upsilon;
    let mut sol = mmse_precoder(&ch.effective(&upsilon)?, power, sigma2)?;
    let mut trace = vec![trace_row(0, ch, &upsilon, &sol, sigma2)?];

    let mut state = VampState::new(ExtrinsicMessage::new(upsilon.clone(), cfg.vamp.gamma_0), upsilon.clone());
    let mut converged = false;
    let mut diverged = false;
    let mut clamp_events = 0;
    let mut iterations = 0;
    for t in 1..=cfg.t_max_outer {
        let (a, b, z) = vamp_setup(ch, &sol.f, sol.alpha)?;
        let sys = SvdSystem::build(&a, &b, &z, cfg.lmmse_mode)?;
        if cfg.warm_start == WarmStart::Reset {
            state.reset_message(cfg.vamp.gamma_0);
        }
        for _ in 0..cfg.inner_iterations {
            match state.step(&sys, &sys.z_tilde, projector.as_ref(), &cfg.vamp) {
                Ok(rep) => {
                    if rep.lmmse_clamped || rep.projector_clamped {
                        clamp_events += 1;
                    }
                }
                Err(Error::NonFinite { .. }) => {
                    diverged = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        upsilon = state.x_hat.clone();
        sol = mmse_precoder(&ch.effective(&upsilon)?, power, sigma2)?;
        iterations = t;
        let row = trace_row(t, ch, &upsilon, &sol, sigma2)?;
        let prev = trace[trace.len() - 1].error;
        trace.push(row);
        if (row.error - prev).abs() < cfg.epsilon_outer * prev {
            converged = true;
            break;
        }
        if diverged {
            break;
        }
    }
    Ok(BeamformingSolution {
        upsilon: PhaseVector {
            upsilon,
            kind: cfg.constraint,
        },
        f: sol.f,
        alpha: sol.alpha,
        trace,
        iterations,
        converged,
        diverged,
        clamp_events,
    })
}
