//! Sum-rate, per-user SINR and NRMSE of a beamforming solution.

use crate::alt_opt::objective_error;
use crate::channel::ChannelSet;
use crate::error::{mismatch, Result};
use crate::num::{CMat, CVec, Real};

/// `|h_m^H f_m|² / (σ² + Σ_{i≠m} |h_m^H f_i|²)` for every user `m`.
pub fn per_user_sinr<T: Real>(
    ch: &ChannelSet<T>,
    upsilon: &CVec<T>,
    f: &CMat<T>,
    sigma2: T,
) -> Result<Vec<T>> {
    let h = ch.effective(upsilon)?;
    if f.nrows() != h.nrows() || f.ncols() != h.ncols() {
        return Err(mismatch(
            "sinr",
            format!("H is {}x{}, F is {}x{}", h.nrows(), h.ncols(), f.nrows(), f.ncols()),
        ));
    }
    let g = h.ad_mul(f);
    Ok((0..g.nrows())
        .map(|m| {
            let row = g.row(m);
            let signal = row[m].norm_sqr();
            let total = row.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
            signal / (sigma2 + (total - signal).max(T::zero()))
        })
        .collect())
}

/// `Σ_m log₂(1 + SINR_m)` in bit/s/Hz.
pub fn sum_rate<T: Real>(ch: &ChannelSet<T>, upsilon: &CVec<T>, f: &CMat<T>, sigma2: T) -> Result<T> {
    Ok(per_user_sinr(ch, upsilon, f, sigma2)?
        .into_iter()
        .fold(T::zero(), |acc, s| acc + (T::one() + s).log2()))
}

/// `√(E / M)` with `E` the sum-MSE of [`objective_error`].
pub fn nrmse<T: Real>(
    alpha: T,
    upsilon: &CVec<T>,
    f: &CMat<T>,
    ch: &ChannelSet<T>,
    sigma2: T,
) -> Result<T> {
    let m = T::of(f.ncols() as f64);
    Ok((objective_error(alpha, upsilon, f, ch, sigma2)? / m).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics<T: Real> {
    pub sum_rate: T,
    pub nrmse: T,
    pub per_user_sinr: Vec<T>,
}

impl<T: Real> TrialMetrics<T> {
    /// Evaluates all metrics; `exclude_direct` drops the BS-user link first.
    pub fn evaluate(
        ch: &ChannelSet<T>,
        upsilon: &CVec<T>,
        f: &CMat<T>,
        alpha: T,
        sigma2: T,
        exclude_direct: bool,
    ) -> Result<Self> {
        let stripped;
        let ch = if exclude_direct {
            stripped = ch.without_direct();
            &stripped
        } else {
            ch
        };
        let per_user_sinr = per_user_sinr(ch, upsilon, f, sigma2)?;
        let sum_rate = per_user_sinr
            .iter()
            .fold(T::zero(), |acc, &s| acc + (T::one() + s).log2());
        Ok(Self {
            sum_rate,
            nrmse: nrmse(alpha, upsilon, f, ch, sigma2)?,
            per_user_sinr,
        })
    }
}
