//! Max-sum VAMP for problems of the form
//!
//! ```text
//! minimize ‖A Diag(x) Bᵀ − Z‖²_F   subject to x_k ∈ S
//! ```
//!
//! where the feasible set `S` is encoded by a separable [`Projector`]. The
//! linear step works on an SVD of `D = B * A`, either the structured one
//! built from the factors or a dense one of the explicit `D`.

use crate::error::{invalid, mismatch, Error, Result};
use crate::linalg::{
    economy_svd, khatri_rao_columns, structured_svd, vec_col_major, SvdFactors,
};
use crate::num::{all_finite, is_finite_c, mean, CMat, CVec, RVec, Real};
use crate::projectors::Projector;

/// Mean vector and scalar precision passed between the two VAMP modules.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrinsicMessage<T: Real> {
    pub r: CVec<T>,
    pub gamma: T,
}

impl<T: Real> ExtrinsicMessage<T> {
    pub fn new(r: CVec<T>, gamma: T) -> Self {
        Self { r, gamma }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VampConfig<T: Real> {
    /// Weight of the measurement term.
    pub gamma_w: T,
    /// Relative stopping tolerance.
    pub epsilon: T,
    pub t_max: usize,
    /// Damping factor in `(0, 1]`; `1` disables damping.
    pub rho: T,
    /// Lower clamp for every emitted precision.
    pub gamma_floor: T,
    /// Precision of the initial message.
    pub gamma_0: T,
}

impl<T: Real> Default for VampConfig<T> {
    fn default() -> Self {
        Self {
            gamma_w: T::one(),
            epsilon: T::of(1e-3),
            t_max: 100,
            rho: T::of(0.9),
            gamma_floor: T::of(1e-11),
            gamma_0: T::of(1e-3),
        }
    }
}

impl<T: Real> VampConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_w > T::zero()) {
            return Err(invalid("gamma_w", "must be positive"));
        }
        if !(self.epsilon > T::zero()) {
            return Err(invalid("epsilon", "must be positive"));
        }
        if self.t_max == 0 {
            return Err(invalid("t_max", "must be at least 1"));
        }
        if !(self.rho > T::zero() && self.rho <= T::one()) {
            return Err(invalid("rho", "must lie in (0, 1]"));
        }
        if !(self.gamma_floor > T::zero()) {
            return Err(invalid("gamma_floor", "must be positive"));
        }
        if !(self.gamma_0 >= T::zero()) {
            return Err(invalid("gamma_0", "must be non-negative"));
        }
        Ok(())
    }
}

/// How the linear step obtains the SVD of `D = B * A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LmmseMode {
    /// From the SVDs of `A` and `B`.
    #[default]
    Structured,
    /// Dense SVD of the explicit `MQ × K` matrix.
    Dense,
}

/// `ω`, `V^H` and the transformed target `z̃ = Diag(ω)⁻¹ U^H vec(Z)`.
#[derive(Debug, Clone)]
pub struct SvdSystem<T: Real> {
    pub omega: RVec<T>,
    pub v_h: CMat<T>,
    pub z_tilde: CVec<T>,
}

impl<T: Real> SvdFactors<T> for SvdSystem<T> {
    fn omega(&self) -> &RVec<T> {
        &self.omega
    }
    fn v_h(&self) -> &CMat<T> {
        &self.v_h
    }
}

impl<T: Real> SvdSystem<T> {
    /// Factorizes `D = B * A` and transforms `Z`. `A` is `M×K`, `B` is `Q×K`,
    /// `Z` is `M×Q`.
    pub fn build(a: &CMat<T>, b: &CMat<T>, z: &CMat<T>, mode: LmmseMode) -> Result<Self> {
        check_problem(a, b, z)?;
        match mode {
            LmmseMode::Structured => {
                let st = structured_svd(&economy_svd(a)?, &economy_svd(b)?, false)?;
                let z_tilde = st.project_target(z)?;
                Ok(Self {
                    omega: st.omega,
                    v_h: st.v_h,
                    z_tilde,
                })
            }
            LmmseMode::Dense => {
                let d = khatri_rao_columns(b, a)?;
                let svd = economy_svd(&d)?;
                let proj = svd.u.ad_mul(&vec_col_major(z));
                let z_tilde = proj.zip_map(&svd.omega, |p, w| p.unscale(w));
                Ok(Self {
                    omega: svd.omega,
                    v_h: svd.v_h,
                    z_tilde,
                })
            }
        }
    }

    pub fn dim_x(&self) -> usize {
        self.v_h.ncols()
    }
}

fn check_problem<T: Real>(a: &CMat<T>, b: &CMat<T>, z: &CMat<T>) -> Result<()> {
    if a.ncols() != b.ncols() || z.nrows() != a.nrows() || z.ncols() != b.nrows() {
        return Err(mismatch(
            "vamp problem",
            format!(
                "A is {}x{}, B is {}x{}, Z is {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                z.nrows(),
                z.ncols()
            ),
        ));
    }
    if !(all_finite(a) && all_finite(b) && all_finite(z)) {
        return Err(Error::NonFinite { what: "VAMP problem data" });
    }
    Ok(())
}

/// `‖A Diag(x) Bᵀ − Z‖²_F`.
pub fn vamp_objective<T: Real>(a: &CMat<T>, b: &CMat<T>, z: &CMat<T>, x: &CVec<T>) -> T {
    let mut ax = a.clone();
    for (mut col, &xi) in ax.column_iter_mut().zip(x.iter()) {
        col *= xi;
    }
    (ax * b.transpose() - z).norm_squared()
}

/// Result of the linear step.
#[derive(Debug, Clone)]
pub struct LmmseOutput<T: Real> {
    /// `(r̃, γ̃)`.
    pub msg: ExtrinsicMessage<T>,
    /// `⟨d⟩`.
    pub mean_d: T,
    /// `γ̃` hit the floor.
    pub clamped: bool,
}

/// SVD-form LMMSE extrinsic step.
///
/// ```text
/// d  = γ_w ω² / (γ_w ω² + γ)
/// r̃  = r + (N/R) V ((d/⟨d⟩) ⊙ (z̃ − V^H r))
/// γ̃  = γ ⟨d⟩ / (N/R − ⟨d⟩)
/// ```
pub fn lmmse_extrinsic<T: Real, S: SvdFactors<T> + ?Sized>(
    svd: &S,
    z_tilde: &CVec<T>,
    msg: &ExtrinsicMessage<T>,
    cfg: &VampConfig<T>,
    dim_x: usize,
) -> Result<LmmseOutput<T>> {
    let (omega, v_h) = (svd.omega(), svd.v_h());
    let rank = omega.len();
    if z_tilde.len() != rank || v_h.nrows() != rank {
        return Err(mismatch(
            "lmmse_extrinsic",
            format!("rank {rank}, z̃ has {} entries", z_tilde.len()),
        ));
    }
    if msg.r.len() != dim_x || v_h.ncols() != dim_x {
        return Err(mismatch(
            "lmmse_extrinsic",
            format!("dim_x {dim_x}, r has {} entries", msg.r.len()),
        ));
    }
    let d = omega.map(|w| {
        let p = cfg.gamma_w * w * w;
        p / (p + msg.gamma)
    });
    let mean_d = mean(&d);
    if rank == 0 || !(mean_d > T::zero()) {
        return Ok(LmmseOutput {
            msg: ExtrinsicMessage::new(msg.r.clone(), cfg.gamma_floor),
            mean_d,
            clamped: true,
        });
    }
    let ratio = T::of(dim_x as f64) / T::of(rank as f64);
    let mut resid = z_tilde - v_h * &msg.r;
    for (e, &di) in resid.iter_mut().zip(d.iter()) {
        *e = e.scale(di / mean_d);
    }
    let r_tilde = &msg.r + v_h.ad_mul(&resid).map(|e| e.scale(ratio));
    let raw = msg.gamma * mean_d / (ratio - mean_d);
    let (gamma_tilde, clamped) = clamp(raw, cfg.gamma_floor);
    Ok(LmmseOutput {
        msg: ExtrinsicMessage::new(r_tilde, gamma_tilde),
        mean_d,
        clamped,
    })
}

fn clamp<T: Real>(x: T, floor: T) -> (T, bool) {
    if x.is_finite() && x >= floor {
        (x, false)
    } else {
        (floor, true)
    }
}

/// Result of the projector step.
#[derive(Debug, Clone)]
pub struct ProjectOutput<T: Real> {
    pub x_hat: CVec<T>,
    pub gamma_hat: T,
    /// `(r, γ)` sent back to the linear step.
    pub msg: ExtrinsicMessage<T>,
    /// `γ̂ − γ̃` hit the floor.
    pub clamped: bool,
}

/// Separable projector step: `x̂ = g(r̃)`, `γ̂ = ⟨g'⟩/γ̃`, `γ = γ̂ − γ̃`,
/// `r = (γ̂ x̂ − γ̃ r̃)/γ`.
pub fn project_step<T: Real>(
    p: &dyn Projector<T>,
    r_tilde: &CVec<T>,
    gamma_tilde: T,
    cfg: &VampConfig<T>,
) -> Result<ProjectOutput<T>> {
    let x_hat = p.project_vec(r_tilde);
    finish_projection(p, r_tilde, gamma_tilde, x_hat, cfg)
}

fn finish_projection<T: Real>(
    p: &dyn Projector<T>,
    r_tilde: &CVec<T>,
    gamma_tilde: T,
    x_hat: CVec<T>,
    cfg: &VampConfig<T>,
) -> Result<ProjectOutput<T>> {
    if !(gamma_tilde > T::zero()) {
        return Err(invalid("gamma_tilde", "must be positive"));
    }
    let gamma_hat = p.mean_derivative(r_tilde) / gamma_tilde;
    let (gamma, clamped) = clamp(gamma_hat - gamma_tilde, cfg.gamma_floor);
    let r = x_hat.map(|x| x.scale(gamma_hat)) - r_tilde.map(|x| x.scale(gamma_tilde));
    let r = r.map(|x| x.unscale(gamma));
    Ok(ProjectOutput {
        x_hat,
        gamma_hat,
        msg: ExtrinsicMessage::new(r, gamma),
        clamped,
    })
}

/// `ρ·current + (1 − ρ)·previous`.
pub fn damp_update<T: Real>(current: T, previous: T, rho: T) -> T {
    rho * current + (T::one() - rho) * previous
}

/// Entrywise [`damp_update`].
pub fn damp_update_vec<T: Real>(current: &CVec<T>, previous: &CVec<T>, rho: T) -> CVec<T> {
    current.zip_map(previous, |c, p| c.scale(rho) + p.scale(T::one() - rho))
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<T: Real> {
    pub gamma_tilde: T,
    pub gamma_hat: T,
    pub lmmse_clamped: bool,
    pub projector_clamped: bool,
}

/// Iteration state: the message into the linear step and the last estimate.
///
/// Damping of `γ̃` and `x̂` kicks in from the second step on. The damped
/// estimate is projected again so it stays feasible.
#[derive(Debug, Clone)]
pub struct VampState<T: Real> {
    pub msg: ExtrinsicMessage<T>,
    pub x_hat: CVec<T>,
    prev_gamma_tilde: Option<T>,
    steps: usize,
}

impl<T: Real> VampState<T> {
    pub fn new(msg: ExtrinsicMessage<T>, x_hat: CVec<T>) -> Self {
        Self {
            msg,
            x_hat,
            prev_gamma_tilde: None,
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Restarts the message from the current estimate with precision `gamma`,
    /// keeping the damping memory.
    pub fn reset_message(&mut self, gamma: T) {
        self.msg = ExtrinsicMessage::new(self.x_hat.clone(), gamma);
    }

    /// One linear step followed by one projector step.
    ///
    /// A non-finite extrinsic mean is reported as [`Error::NonFinite`] and
    /// leaves the state untouched.
    pub fn step<S: SvdFactors<T> + ?Sized>(
        &mut self,
        svd: &S,
        z_tilde: &CVec<T>,
        p: &dyn Projector<T>,
        cfg: &VampConfig<T>,
    ) -> Result<StepReport<T>> {
        let dim_x = self.msg.r.len();
        let lin = lmmse_extrinsic(svd, z_tilde, &self.msg, cfg, dim_x)?;
        let mut gamma_tilde = lin.msg.gamma;
        if let Some(prev) = self.prev_gamma_tilde {
            gamma_tilde = damp_update(gamma_tilde, prev, cfg.rho);
        }
        let r_tilde = lin.msg.r;
        if !r_tilde.iter().all(|z| is_finite_c(*z)) {
            return Err(Error::NonFinite { what: "VAMP extrinsic mean" });
        }
        let mut x_hat = p.project_vec(&r_tilde);
        if self.steps > 0 {
            x_hat = p.project_vec(&damp_update_vec(&x_hat, &self.x_hat, cfg.rho));
        }
        let out = finish_projection(p, &r_tilde, gamma_tilde, x_hat, cfg)?;
        if !out.x_hat.iter().all(|z| is_finite_c(*z)) {
            return Err(Error::NonFinite { what: "VAMP estimate" });
        }
        self.prev_gamma_tilde = Some(gamma_tilde);
        self.msg = out.msg;
        self.x_hat = out.x_hat;
        self.steps += 1;
        Ok(StepReport {
            gamma_tilde,
            gamma_hat: out.gamma_hat,
            lmmse_clamped: lin.clamped,
            projector_clamped: out.clamped,
        })
    }
}

/// One row of the optional iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VampTraceRow<T: Real> {
    pub iteration: usize,
    pub objective: T,
    pub gamma_tilde: T,
    pub gamma_hat: T,
    pub lmmse_clamped: bool,
    pub projector_clamped: bool,
}

impl<T: Real> VampTraceRow<T> {
    pub const CSV_HEADER: &'static str =
        "iteration,objective,gamma_tilde,gamma_hat,lmmse_clamped,projector_clamped";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{},{}",
            self.iteration,
            self.objective.as_f64(),
            self.gamma_tilde.as_f64(),
            self.gamma_hat.as_f64(),
            self.lmmse_clamped as u8,
            self.projector_clamped as u8
        )
    }
}

#[derive(Debug, Clone)]
pub struct VampOutcome<T: Real> {
    pub x_hat: CVec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// The message became non-finite; `x_hat` is the last finite estimate.
    pub diverged: bool,
    /// Number of steps in which any precision was clamped.
    pub clamp_events: usize,
    /// Filled when tracing was requested.
    pub trace: Vec<VampTraceRow<T>>,
}

/// Runs max-sum VAMP on `‖A Diag(x) Bᵀ − Z‖²` from the message `init`.
///
/// Stops once `‖x̂_t − x̂_{t−1}‖² ≤ ε ‖x̂_{t−1}‖²` or after `t_max` steps.
/// `x̂_0` is the projection of `init.r`. If the message overflows the run
/// stops early with `diverged` set.
#[allow(clippy::too_many_arguments)]
pub fn run_vamp<T: Real>(
    a: &CMat<T>,
    b: &CMat<T>,
    z: &CMat<T>,
    p: &dyn Projector<T>,
    init: ExtrinsicMessage<T>,
    cfg: &VampConfig<T>,
    mode: LmmseMode,
    trace: bool,
) -> Result<VampOutcome<T>> {
    cfg.validate()?;
    if init.r.len() != a.ncols() {
        return Err(mismatch(
            "run_vamp",
            format!("A has {} columns, r has {} entries", a.ncols(), init.r.len()),
        ));
    }
    let sys = SvdSystem::build(a, b, z, mode)?;
    let x0 = p.project_vec(&init.r);
    let mut state = VampState::new(init, x0);
    let mut rows = Vec::new();
    let mut clamp_events = 0;
    let mut converged = false;
    let mut diverged = false;
    for t in 1..=cfg.t_max {
        let prev = state.x_hat.clone();
        let rep = match state.step(&sys, &sys.z_tilde, p, cfg) {
            Ok(rep) => rep,
            Err(Error::NonFinite { .. }) => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if rep.lmmse_clamped || rep.projector_clamped {
            clamp_events += 1;
        }
        if trace {
            rows.push(VampTraceRow {
                iteration: t,
                objective: vamp_objective(a, b, z, &state.x_hat),
                gamma_tilde: rep.gamma_tilde,
                gamma_hat: rep.gamma_hat,
                lmmse_clamped: rep.lmmse_clamped,
                projector_clamped: rep.projector_clamped,
            });
        }
        if (&state.x_hat - &prev).norm_squared() <= cfg.epsilon * prev.norm_squared() {
            converged = true;
            break;
        }
    }
    Ok(VampOutcome {
        x_hat: state.x_hat,
        iterations: state.steps,
        converged,
        diverged,
        clamp_events,
        trace: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Complex;
    use crate::projectors::{Identity, Unimodular};
    use crate::testutil::{rand_cmat, rand_cvec, rng};

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn diag(z: &[C]) -> CMat<f64> {
        CMat::from_diagonal(&CVec::from_column_slice(z))
    }

    #[test]
    fn lmmse_with_identity_system_returns_target() {
        let eye: CMat<f64> = CMat::identity(3, 3);
        let zs = [c(1.0, 2.0), c(-0.5, 0.1), c(3.0, 0.0)];
        let sys = SvdSystem::build(&eye, &eye, &diag(&zs), LmmseMode::Structured).unwrap();
        assert_eq!(sys.rank(), 3);
        let cfg = VampConfig::default();
        let msg = ExtrinsicMessage::new(CVec::from_element(3, c(0.3, -0.3)), 1.0);
        let out = lmmse_extrinsic(&sys, &sys.z_tilde, &msg, &cfg, 3).unwrap();
        for (r, z) in out.msg.r.iter().zip(zs) {
            assert!((r - z).norm() < 1e-14);
        }
        assert!((out.msg.gamma - 1.0).abs() < 1e-14);
        assert!(!out.clamped);
    }

    #[test]
    fn lmmse_strong_prior_limit() {
        // d/⟨d⟩ → ω²/⟨ω²⟩ as γ grows, so r̃ settles on a γ-independent value
        // rather than on the prior mean.
        let mut g = rng(3);
        let (a, b, z) = (rand_cmat(&mut g, 2, 5), rand_cmat(&mut g, 2, 5), rand_cmat(&mut g, 2, 2));
        let sys = SvdSystem::build(&a, &b, &z, LmmseMode::Dense).unwrap();
        let r = rand_cvec(&mut g, 5);
        let cfg = VampConfig::default();
        let at = |gamma: f64| {
            lmmse_extrinsic(&sys, &sys.z_tilde, &ExtrinsicMessage::new(r.clone(), gamma), &cfg, 5).unwrap()
        };
        let (hi, higher) = (at(1e8), at(1e10));
        assert!((&hi.msg.r - &higher.msg.r).norm() < 1e-6 * hi.msg.r.norm());
        let w2 = sys.omega.map(|w| w * w);
        let limit_gamma = cfg.gamma_w * w2.sum() / 5.0;
        assert!((higher.msg.gamma - limit_gamma).abs() < 1e-6 * limit_gamma);
    }

    #[test]
    fn lmmse_full_rank_division_by_zero_is_clamped() {
        // R = dim_x and γ = 0 give ⟨d⟩ = dim_x/R = 1.
        let eye: CMat<f64> = CMat::identity(2, 2);
        let sys = SvdSystem::build(&eye, &eye, &eye, LmmseMode::Structured).unwrap();
        let cfg = VampConfig::default();
        let msg = ExtrinsicMessage::new(CVec::zeros(2), 0.0);
        let out = lmmse_extrinsic(&sys, &sys.z_tilde, &msg, &cfg, 2).unwrap();
        assert!(out.clamped);
        assert_eq!(out.msg.gamma, cfg.gamma_floor);
    }

    #[test]
    fn lmmse_rejects_wrong_lengths() {
        let eye: CMat<f64> = CMat::identity(2, 2);
        let sys = SvdSystem::build(&eye, &eye, &eye, LmmseMode::Structured).unwrap();
        let msg = ExtrinsicMessage::new(CVec::zeros(3), 1.0);
        assert!(lmmse_extrinsic(&sys, &sys.z_tilde, &msg, &VampConfig::default(), 3).is_err());
    }

    #[test]
    fn project_step_identity_passes_through() {
        let r = CVec::from_vec(vec![c(1.0, 2.0), c(-3.0, 0.5)]);
        let out = project_step(&Identity, &r, 0.25, &VampConfig::default()).unwrap();
        assert_eq!(out.x_hat, r);
        assert!((out.gamma_hat - 4.0).abs() < 1e-15);
    }

    #[test]
    fn project_step_unimodular_examples() {
        let cfg = VampConfig::default();
        let r = CVec::from_vec(vec![c(2.0, 0.0), c(0.0, 2.0)]);
        let out = project_step(&Unimodular, &r, 0.1, &cfg).unwrap();
        assert!((out.x_hat[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((out.x_hat[1] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((out.gamma_hat - 1.0 / (4.0 * 0.1)).abs() < 1e-12);

        let u = CVec::from_vec(vec![crate::num::cis(0.4), crate::num::cis(-2.0)]);
        let out = project_step(&Unimodular, &u, 1.0, &cfg).unwrap();
        assert!((out.x_hat - u).norm() < 1e-15);
    }

    #[test]
    fn project_step_clamps_negative_precision() {
        // γ̂ = 0.5/γ̃ < γ̃ for γ̃ = 1.
        let cfg = VampConfig::default();
        let r = CVec::from_vec(vec![c(1.0, 0.0)]);
        let out = project_step(&Unimodular, &r, 1.0, &cfg).unwrap();
        assert!(out.clamped);
        assert_eq!(out.msg.gamma, cfg.gamma_floor);
        assert!(project_step(&Unimodular, &r, 0.0, &cfg).is_err());
    }

    #[test]
    fn damping_examples() {
        assert_eq!(damp_update(3.0, 7.0, 1.0), 3.0);
        assert_eq!(damp_update(2.0, 0.0, 0.5), 1.0);
        let cur = CVec::from_vec(vec![c(2.0, 1.0), c(0.0, -4.0)]);
        let prev = CVec::from_vec(vec![c(0.0, 1.0), c(2.0, 0.0)]);
        let v = damp_update_vec(&cur, &prev, 0.3);
        for i in 0..2 {
            let re = damp_update(cur[i].re, prev[i].re, 0.3);
            let im = damp_update(cur[i].im, prev[i].im, 0.3);
            assert!((v[i] - c(re, im)).norm() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        let ok = VampConfig::<f64>::default();
        assert!(ok.validate().is_ok());
        for bad in [
            VampConfig { rho: 0.0, ..ok },
            VampConfig { rho: 1.5, ..ok },
            VampConfig { t_max: 0, ..ok },
            VampConfig { gamma_w: 0.0, ..ok },
            VampConfig { epsilon: -1.0, ..ok },
            VampConfig { gamma_0: -1.0, ..ok },
            VampConfig { gamma_floor: 0.0, ..ok },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn run_vamp_scalar_already_optimal() {
        let one = CMat::from_element(1, 1, c(1.0, 0.0));
        let init = ExtrinsicMessage::new(CVec::from_element(1, c(1.0, 0.0)), 1e-3);
        let out = run_vamp(&one, &one, &one, &Unimodular, init, &VampConfig::default(), LmmseMode::Structured, false)
            .unwrap();
        assert!((out.x_hat[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(out.converged);
    }

    #[test]
    fn run_vamp_diagonal_target_projects_entrywise() {
        let mut g = rng(12);
        let eye: CMat<f64> = CMat::identity(4, 4);
        let zs: Vec<C> = rand_cvec(&mut g, 4).iter().copied().collect();
        let init = ExtrinsicMessage::new(CVec::from_element(4, c(1.0, 0.0)), 1e-3);
        for mode in [LmmseMode::Structured, LmmseMode::Dense] {
            let out = run_vamp(&eye, &eye, &diag(&zs), &Unimodular, init.clone(), &VampConfig::default(), mode, false)
                .unwrap();
            // Exact up to the roundoff left by the clamped precision.
            for (x, z) in out.x_hat.iter().zip(&zs) {
                assert!((x - z / z.norm()).norm() < 1e-3, "{x} vs {z}");
            }
        }
    }

    #[test]
    fn run_vamp_output_feasible_and_precisions_floored() {
        let mut g = rng(5);
        for _ in 0..20 {
            let (a, b, z) = (rand_cmat(&mut g, 3, 6), rand_cmat(&mut g, 2, 6), rand_cmat(&mut g, 3, 2));
            let init = ExtrinsicMessage::new(rand_cvec(&mut g, 6), 1e-3);
            let cfg = VampConfig::default();
            for mode in [LmmseMode::Structured, LmmseMode::Dense] {
                let out = run_vamp(&a, &b, &z, &Unimodular, init.clone(), &cfg, mode, true).unwrap();
                assert!(out.x_hat.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
                assert!(out.iterations <= cfg.t_max);
                assert_eq!(out.trace.len(), out.iterations);
                for row in &out.trace {
                    assert!(row.gamma_tilde >= cfg.gamma_floor);
                    assert!(row.objective.is_finite());
                }
            }
        }
    }

    #[test]
    fn run_vamp_rejects_dimension_mismatch() {
        let a: CMat<f64> = CMat::identity(2, 2);
        let z: CMat<f64> = CMat::identity(3, 2);
        let init = ExtrinsicMessage::new(CVec::zeros(2), 1e-3);
        assert!(run_vamp(&a, &a, &z, &Unimodular, init, &VampConfig::default(), LmmseMode::Dense, false).is_err());
    }

    #[test]
    fn objective_matches_khatri_rao_form() {
        let mut g = rng(1);
        let (a, b, z) = (rand_cmat(&mut g, 2, 4), rand_cmat(&mut g, 3, 4), rand_cmat(&mut g, 2, 3));
        let x = rand_cvec(&mut g, 4);
        let d = khatri_rao_columns(&b, &a).unwrap();
        let direct = (d * &x - vec_col_major(&z)).norm_squared();
        assert!((vamp_objective(&a, &b, &z, &x) - direct).abs() < 1e-12 * direct.max(1.0));
    }

    #[test]
    fn trace_row_csv() {
        let row = VampTraceRow { iteration: 3, objective: 0.5, gamma_tilde: 1.0, gamma_hat: 2.0, lmmse_clamped: false, projector_clamped: true };
        assert_eq!(row.csv_row(), "3,5e-1,1e0,2e0,0,1");
        assert_eq!(VampTraceRow::<f64>::CSV_HEADER.split(',').count(), 6);
    }
}
