//! Closed-form MMSE transmit precoder with a common receiver scale.
//!
//! For the `N×M` effective channel `H`, power budget `P` and noise variance
//! `σ²`, with `λ = Mσ²/P`:
//!
//! ```text
//! F = α⁻¹ (HH^H + λI)⁻¹ H,   α = √(Tr((HH^H + λI)⁻² HH^H) / P)
//! ```
//!
//! which gives `‖F‖²_F = P`. [`mmse_precoder`] evaluates this through the
//! `M×M` system `H (H^H H + λI)⁻¹`; [`mmse_precoder_gram`] is the literal
//! `N×N` transcription.

use crate::channel::ChannelSet;
use crate::error::{invalid, Error, Result};
use crate::num::{all_finite, CMat, CVec, Complex, Real};

/// `F` (`N×M`) and `α` for total power `power`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingSolution<T: Real> {
    pub f: CMat<T>,
    pub alpha: T,
    pub power: T,
}

/// `H` with `H^H = H_su^H Diag(υ) H_bs + H_bu^H`.
pub fn effective_channel<T: Real>(ch: &ChannelSet<T>, upsilon: &CVec<T>) -> Result<CMat<T>> {
    ch.effective(upsilon)
}

fn check_inputs<T: Real>(h: &CMat<T>, power: T, sigma2: T) -> Result<()> {
    if !(power > T::zero()) {
        return Err(invalid("power", "must be positive"));
    }
    if !(sigma2 >= T::zero()) {
        return Err(invalid("sigma_w2", "must be non-negative"));
    }
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(invalid("H", "dimensions must be strictly positive"));
    }
    if !all_finite(h) {
        return Err(Error::NonFinite { what: "effective channel" });
    }
    if h.iter().all(|z| z.re == T::zero() && z.im == T::zero()) {
        return Err(Error::NoSignalPath);
    }
    Ok(())
}

fn regularizer<T: Real>(m: usize, power: T, sigma2: T) -> T {
    T::of(m as f64) * sigma2 / power
}

/// `H (H^H H + λI_M)⁻¹`, the unnormalized precoder.
fn unnormalized<T: Real>(h: &CMat<T>, lambda: T) -> Result<CMat<T>> {
    let m = h.ncols();
    if lambda == T::zero() {
        // H (H^H H)⁻¹ = (H^H)⁺, which also covers rank-deficient H.
        let tol = T::eps() * T::of(h.nrows().max(m) as f64) * h.norm();
        return h
            .adjoint()
            .pseudo_inverse(tol)
            .map_err(|e| invalid("H", e.to_string()));
    }
    let mut g = h.ad_mul(h);
    for i in 0..m {
        g[(i, i)] += Complex::new(lambda, T::zero());
    }
    let inv = match g.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => {
            let tol = T::eps() * T::of(m as f64) * g.norm();
            g.pseudo_inverse(tol).map_err(|e| invalid("H", e.to_string()))?
        }
    };
    Ok(h * inv)
}

fn normalize<T: Real>(w: CMat<T>, power: T) -> Result<PrecodingSolution<T>> {
    let nw = w.norm();
    if !(nw > T::zero()) || !nw.is_finite() {
        return Err(Error::NoSignalPath);
    }
    let alpha = nw / power.sqrt();
    Ok(PrecodingSolution {
        f: w.map(|z| z.unscale(alpha)),
        alpha,
        power,
    })
}

/// Receiver scale `α` of the MMSE precoder.
pub fn alpha_opt<T: Real>(h: &CMat<T>, power: T, sigma2: T) -> Result<T> {
    Ok(mmse_precoder(h, power, sigma2)?.alpha)
}

/// MMSE precoder via the `M×M` regularized system.
///
/// `σ² = 0` with a rank-deficient `H` falls back to a pseudo-inverse.
pub fn mmse_precoder<T: Real>(h: &CMat<T>, power: T, sigma2: T) -> Result<PrecodingSolution<T>> {
    check_inputs(h, power, sigma2)?;
    let lambda = regularizer(h.ncols(), power, sigma2);
    normalize(unnormalized(h, lambda)?, power)
}

/// MMSE precoder from the `N×N` Gram form `G = HH^H + λI_N`.
///
/// `X = G⁻¹H` is obtained by a linear solve and the trace is evaluated as
/// `Tr(X^H X) = Tr(G⁻² HH^H)`, which avoids forming `G⁻²`.
pub fn mmse_precoder_gram<T: Real>(h: &CMat<T>, power: T, sigma2: T) -> Result<PrecodingSolution<T>> {
    check_inputs(h, power, sigma2)?;
    let n = h.nrows();
    let lambda = regularizer(h.ncols(), power, sigma2);
    let mut g = h * h.adjoint();
    for i in 0..n {
        g[(i, i)] += Complex::new(lambda, T::zero());
    }
    let x = match g.clone().cholesky() {
        Some(ch) if lambda > T::zero() => ch.solve(h),
        _ => {
            let tol = T::eps() * T::of(n as f64) * g.norm();
            g.pseudo_inverse(tol).map_err(|e| invalid("H", e.to_string()))? * h
        }
    };
    let trace = x.ad_mul(&x).trace().re;
    let alpha = (trace / power).sqrt();
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::NoSignalPath);
    }
    let f = x.map(|z| z.unscale(alpha));
    Ok(PrecodingSolution { f, alpha, power })
}

/// [`mmse_precoder`] for the effective channel of `ch` at phases `upsilon`.
pub fn precoder_for_phases<T: Real>(
    ch: &ChannelSet<T>,
    upsilon: &CVec<T>,
    power: T,
    sigma2: T,
) -> Result<PrecodingSolution<T>> {
    mmse_precoder(&effective_channel(ch, upsilon)?, power, sigma2)
}
