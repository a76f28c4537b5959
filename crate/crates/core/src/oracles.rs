//! Brute-force and dense-form references for testing the solvers.
//!
//! Everything here is written directly against `nalgebra` in `f64` and avoids
//! the crate's own solver code paths, so agreement with the main path is
//! meaningful.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::ChannelSet;
use crate::error::{invalid, Error, Result};
use crate::vamp::ExtrinsicMessage;

type C = num_complex::Complex<f64>;
type M = DMatrix<C>;
type V = nalgebra::DVector<C>;

/// Posterior mean/precision and extrinsic message of the dense LMMSE step.
#[derive(Debug, Clone)]
pub struct DenseLmmse {
    pub x_bar: V,
    pub gamma_bar: f64,
    pub extrinsic: ExtrinsicMessage<f64>,
}

/// `x̄ = (γ_w D^H D + γI)⁻¹(γ_w D^H z + γr)`, `γ̄ = N / Tr((γ_w D^H D + γI)⁻¹)`,
/// `γ̃ = γ̄ − γ`, `r̃ = (γ̄x̄ − γr)/γ̃`.
pub fn dense_lmmse(d: &M, z: &V, msg: &ExtrinsicMessage<f64>, gamma_w: f64) -> Result<DenseLmmse> {
    let n = d.ncols();
    if z.len() != d.nrows() || msg.r.len() != n {
        return Err(invalid("dense_lmmse", "dimension mismatch"));
    }
    let mut q = d.adjoint() * d * C::new(gamma_w, 0.0);
    for i in 0..n {
        q[(i, i)] += C::new(msg.gamma, 0.0);
    }
    let cov = q
        .try_inverse()
        .ok_or_else(|| invalid("dense_lmmse", "singular information matrix"))?;
    let rhs = d.adjoint() * z * C::new(gamma_w, 0.0) + &msg.r * C::new(msg.gamma, 0.0);
    let x_bar = &cov * rhs;
    let gamma_bar = n as f64 / cov.trace().re;
    let gamma_tilde = gamma_bar - msg.gamma;
    let r_tilde = (&x_bar * C::new(gamma_bar, 0.0) - &msg.r * C::new(msg.gamma, 0.0)) / C::new(gamma_tilde, 0.0);
    Ok(DenseLmmse {
        x_bar,
        gamma_bar,
        extrinsic: ExtrinsicMessage::new(r_tilde, gamma_tilde),
    })
}

/// `B * A` by explicit index arithmetic.
pub fn dense_khatri_rao(b: &M, a: &M) -> M {
    let (ma, q, n) = (a.nrows(), b.nrows(), a.ncols());
    let mut d = M::zeros(ma * q, n);
    for k in 0..n {
        for j in 0..q {
            for i in 0..ma {
                d[(j * ma + i, k)] = b[(j, k)] * a[(i, k)];
            }
        }
    }
    d
}

/// Economy SVD `(U, ω, V^H)` of the explicit `B * A`, keeping singular values
/// above `1e-12 · max`.
pub fn dense_khatri_rao_svd(b: &M, a: &M) -> (M, Vec<f64>, M) {
    let d = dense_khatri_rao(b, a);
    let svd = d.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-12 * max)
        .collect();
    (
        u.select_columns(keep.iter()),
        keep.iter().map(|&i| svd.singular_values[i]).collect(),
        vt.select_rows(keep.iter()),
    )
}

/// Rows `h_m^H = h_su,m^H Diag(υ) H_bs + h_bu,m^H`, stacked as an `M×N`
/// matrix.
fn channel_rows(ch: &ChannelSet<f64>, upsilon: &[C]) -> M {
    let (k, n, m) = (ch.h_bs.nrows(), ch.h_bs.ncols(), ch.h_bu.ncols());
    M::from_fn(m, n, |mm, nn| {
        let mut acc = ch.h_bu[(nn, mm)].conj();
        for (kk, u) in upsilon.iter().enumerate().take(k) {
            acc += ch.h_su[(kk, mm)].conj() * u * ch.h_bs[(kk, nn)];
        }
        acc
    })
}

/// Sum-MSE at phases `upsilon` with the MMSE precoder re-solved from the
/// `N×N` Gram matrix by LU.
pub fn phase_objective(ch: &ChannelSet<f64>, upsilon: &[C], power: f64, sigma2: f64) -> f64 {
    let hh = channel_rows(ch, upsilon);
    let (m, n) = (hh.nrows(), hh.ncols());
    let h = hh.adjoint();
    let mut g = &h * &hh;
    let lambda = m as f64 * sigma2 / power;
    for i in 0..n {
        g[(i, i)] += C::new(lambda, 0.0);
    }
    let x = match g.clone().lu().solve(&h) {
        Some(x) => x,
        None => return m as f64,
    };
    let scale = x.norm() / power.sqrt();
    if !(scale > 0.0) {
        return m as f64;
    }
    let f = x / C::new(scale, 0.0);
    let mut e = &hh * f * C::new(scale, 0.0);
    for i in 0..m {
        e[(i, i)] -= C::new(1.0, 0.0);
    }
    e.norm_squared() + m as f64 * scale * scale * sigma2
}

/// Exhaustive search over `points` uniformly spaced phases per element.
///
/// Limited to `K ≤ 3` and `points^K ≤ 10⁶`.
pub fn grid_phase_search(ch: &ChannelSet<f64>, power: f64, sigma2: f64, points: usize) -> Result<(Vec<C>, f64)> {
    let k = ch.h_bs.nrows();
    let total = (points as f64).powi(k as i32);
    if k > 3 || total > 1e6 || points == 0 {
        return Err(Error::Budget(format!("{points}^{k} grid points")));
    }
    let phase = |i: usize| {
        let t = 2.0 * std::f64::consts::PI * i as f64 / points as f64;
        C::new(t.cos(), t.sin())
    };
    let mut best = (vec![C::new(1.0, 0.0); k], f64::INFINITY);
    let mut idx = vec![0usize; k];
    loop {
        let u: Vec<C> = idx.iter().map(|&i| phase(i)).collect();
        let e = phase_objective(ch, &u, power, sigma2);
        if e < best.1 {
            best = (u, e);
        }
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(best);
            }
            idx[pos] += 1;
            if idx[pos] < points {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// `|r + 1/(1 + jχ)|²` evaluated directly.
pub fn reactance_distance(r: C, chi: f64) -> f64 {
    let v = -C::new(1.0, 0.0) / C::new(1.0, chi);
    (r - v).norm_sqr()
}

/// Argmin of [`reactance_distance`] over `points` uniform samples of
/// `[lo, hi]`.
pub fn grid_reactance(r: C, lo: f64, hi: f64, points: usize) -> f64 {
    let step = (hi - lo) / (points.max(2) - 1) as f64;
    let mut best = (lo, f64::INFINITY);
    for i in 0..points.max(2) {
        let chi = lo + step * i as f64;
        let f = reactance_distance(r, chi);
        if f < best.1 {
            best = (chi, f);
        }
    }
    best.0
}

/// [`grid_reactance`] followed by `rounds` zooms of 1000 points over the
/// two grid cells around the incumbent.
pub fn grid_reactance_refined(r: C, lo: f64, hi: f64, points: usize, rounds: usize) -> f64 {
    let mut step = (hi - lo) / (points.max(2) - 1) as f64;
    let mut chi = grid_reactance(r, lo, hi, points);
    for _ in 0..rounds {
        let (a, b) = ((chi - step).max(lo), (chi + step).min(hi));
        chi = grid_reactance(r, a, b, 1001);
        step = (b - a) / 1000.0;
    }
    chi
}

/// Sum-MSE of a fixed precoder `f` with the best scalar `α`:
/// `M − (Re Tr G)² / (‖G‖² + Mσ²)`, `G = H^H F`.
pub fn precoder_objective(h: &M, f: &M, sigma2: f64) -> f64 {
    let m = f.ncols() as f64;
    let g = h.adjoint() * f;
    let t = g.trace().re;
    m - t * t / (g.norm_squared() + m * sigma2)
}

/// Best [`precoder_objective`] over `draws` random precoders on the power
/// sphere. Half the draws are isotropic; the rest perturb the incumbent with a
/// shrinking step.
pub fn random_precoder_search<R: Rng + ?Sized>(h: &M, power: f64, sigma2: f64, draws: usize, rng: &mut R) -> f64 {
    let (n, m) = (h.nrows(), h.ncols());
    let mut normal = || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C::new(re, im)
    };
    let project = |f: M| {
        let s = (power / f.norm_squared()).sqrt();
        f * C::new(s, 0.0)
    };
    let mut best_f = project(M::from_fn(n, m, |_, _| normal()));
    let mut best = precoder_objective(h, &best_f, sigma2);
    let isotropic = draws / 2;
    for i in 1..draws {
        let cand = if i < isotropic {
            project(M::from_fn(n, m, |_, _| normal()))
        } else {
            let frac = (i - isotropic) as f64 / (draws - isotropic).max(1) as f64;
            let step = power.sqrt() * 0.3 * (1e-4f64).powf(frac);
            project(&best_f + M::from_fn(n, m, |_, _| normal() * step))
        };
        let e = precoder_objective(h, &cand, sigma2);
        if e < best {
            best = e;
            best_f = cand;
        }
    }
    best
}
