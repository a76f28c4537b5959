//! Path-based channel synthesis for the BS-IRS, BS-user and IRS-user links.
//!
//! The IRS sits at the origin and the BS at `(−d_IRS, 0)`. Each link is a sum
//! of `Q` far-field paths with standard complex normal gains, scaled by the
//! square root of the link's path loss.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, mismatch, Error, Result};
use crate::num::{all_finite, CMat, CVec, Complex, Real};

/// Antenna and element counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    /// BS antennas.
    pub n: usize,
    /// Single-antenna users.
    pub m: usize,
    /// IRS elements, `irs_rows * irs_cols`.
    pub k: usize,
    pub irs_rows: usize,
    pub irs_cols: usize,
}

impl SystemDims {
    /// Square `√K × √K` IRS.
    pub fn new(n: usize, m: usize, k: usize) -> Result<Self> {
        let side = (k as f64).sqrt().round() as usize;
        if side * side != k {
            return Err(invalid("K", format!("{k} is not a perfect square")));
        }
        Self::with_irs_grid(n, m, side, side)
    }

    /// Rectangular `rows × cols` IRS.
    pub fn with_irs_grid(n: usize, m: usize, rows: usize, cols: usize) -> Result<Self> {
        let k = rows * cols;
        if m == 0 || k == 0 {
            return Err(invalid("dimensions", "M and K must be positive"));
        }
        if m >= n {
            return Err(invalid("M", format!("need M < N, got M = {m}, N = {n}")));
        }
        if k <= m {
            return Err(invalid("K", format!("need K > M, got K = {k}, M = {m}")));
        }
        Ok(Self {
            n,
            m,
            k,
            irs_rows: rows,
            irs_cols: cols,
        })
    }
}

/// `L(d) = C0 (d/d0)^(−η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    pub c0: f64,
    pub d0: f64,
    pub eta: f64,
}

impl PathLossParams {
    pub fn new(c0: f64, d0: f64, eta: f64) -> Result<Self> {
        if !(c0 > 0.0 && d0 > 0.0 && eta >= 0.0) {
            return Err(invalid("path loss", "need C0 > 0, d0 > 0, eta >= 0"));
        }
        Ok(Self { c0, d0, eta })
    }

    pub fn gain(&self, d: f64) -> Result<f64> {
        path_loss(d, self)
    }
}

pub fn path_loss(d: f64, p: &PathLossParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(invalid("distance", format!("must be positive, got {d}")));
    }
    Ok(p.c0 * (d / p.d0).powf(-p.eta))
}

/// Which links get a dominant line-of-sight path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Only the BS-IRS link.
    A,
    /// The BS-IRS link and every IRS-user link.
    B,
}

impl Scenario {
    fn boosts_irs_user(self) -> bool {
        matches!(self, Scenario::B)
    }
}

/// Geometry and propagation constants of the simulated deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Element spacing over wavelength, shared by the BS and IRS arrays.
    pub spacing_ratio: f64,
    pub q_irs: usize,
    pub q_bu: usize,
    pub q_su: usize,
    /// BS-IRS distance in metres.
    pub d_irs: f64,
    /// Users are dropped uniformly in radius within this annulus around the IRS.
    pub user_radius: (f64, f64),
    pub pl_irs: PathLossParams,
    pub pl_bu: PathLossParams,
    pub pl_su: PathLossParams,
    pub los_margin_db: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            spacing_ratio: 0.5,
            q_irs: 10,
            q_bu: 2,
            q_su: 2,
            d_irs: 500.0,
            user_radius: (10.0, 50.0),
            pl_irs: PathLossParams {
                c0: 1e-3,
                d0: 1.0,
                eta: 2.5,
            },
            pl_bu: PathLossParams {
                c0: 1e-3,
                d0: 1.0,
                eta: 3.7,
            },
            pl_su: PathLossParams {
                c0: 1e-3,
                d0: 1.0,
                eta: 2.5,
            },
            los_margin_db: 5.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing_ratio > 0.0) {
            return Err(invalid("spacing_ratio", "must be positive"));
        }
        if self.q_irs == 0 || self.q_bu == 0 || self.q_su == 0 {
            return Err(invalid("path count", "must be at least 1"));
        }
        if !(self.d_irs > 0.0) {
            return Err(invalid("d_irs", "must be positive"));
        }
        let (lo, hi) = self.user_radius;
        if !(lo > 0.0 && hi >= lo) {
            return Err(invalid("user_radius", "need 0 < min <= max"));
        }
        for p in [&self.pl_irs, &self.pl_bu, &self.pl_su] {
            PathLossParams::new(p.c0, p.d0, p.eta)?;
        }
        Ok(())
    }
}

/// Distances and path losses behind a [`ChannelSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub d_irs: f64,
    /// BS-user distances `d_m`.
    pub d_bu: Vec<f64>,
    /// IRS-user distances `d'_m`.
    pub d_su: Vec<f64>,
    pub l_bs: f64,
    pub l_bu: Vec<f64>,
    pub l_su: Vec<f64>,
}

/// `H_bs` (`K×N`), `H_bu` (`N×M`), `H_su` (`K×M`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T: Real> {
    pub h_bs: CMat<T>,
    pub h_bu: CMat<T>,
    pub h_su: CMat<T>,
    pub geometry: Option<Geometry>,
}

impl<T: Real> ChannelSet<T> {
    pub fn new(h_bs: CMat<T>, h_bu: CMat<T>, h_su: CMat<T>, geometry: Option<Geometry>) -> Result<Self> {
        let (k, n, m) = (h_bs.nrows(), h_bs.ncols(), h_bu.ncols());
        if h_bu.nrows() != n || h_su.nrows() != k || h_su.ncols() != m {
            return Err(mismatch(
                "ChannelSet",
                format!(
                    "H_bs {}x{}, H_bu {}x{}, H_su {}x{}",
                    k,
                    n,
                    h_bu.nrows(),
                    m,
                    h_su.nrows(),
                    h_su.ncols()
                ),
            ));
        }
        if !(all_finite(&h_bs) && all_finite(&h_bu) && all_finite(&h_su)) {
            return Err(Error::NonFinite { what: "channel" });
        }
        if let Some(g) = &geometry {
            if g.l_bu.len() != m || g.l_su.len() != m || g.d_bu.len() != m || g.d_su.len() != m {
                return Err(mismatch("ChannelSet", "geometry does not match the user count"));
            }
        }
        Ok(Self {
            h_bs,
            h_bu,
            h_su,
            geometry,
        })
    }

    /// `(N, M, K)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.h_bs.ncols(), self.h_bu.ncols(), self.h_bs.nrows())
    }

    /// `H = (H_su^H Diag(υ) H_bs + H_bu^H)^H`, the `N×M` end-to-end channel.
    pub fn effective(&self, upsilon: &CVec<T>) -> Result<CMat<T>> {
        let (_, _, k) = self.shape();
        if upsilon.len() != k {
            return Err(mismatch(
                "effective channel",
                format!("K = {k}, phase vector has {} entries", upsilon.len()),
            ));
        }
        let mut scaled = self.h_bs.clone();
        for (mut row, &u) in scaled.row_iter_mut().zip(upsilon.iter()) {
            row *= u;
        }
        Ok(scaled.ad_mul(&self.h_su) + &self.h_bu)
    }

    /// Copy with the BS-user link removed.
    pub fn without_direct(&self) -> Self {
        let mut out = self.clone();
        out.h_bu.fill(Complex::new(T::zero(), T::zero()));
        out
    }

    pub fn cast<S: Real>(&self) -> ChannelSet<S> {
        ChannelSet {
            h_bs: crate::num::cast_mat(&self.h_bs),
            h_bu: crate::num::cast_mat(&self.h_bu),
            h_su: crate::num::cast_mat(&self.h_su),
            geometry: self.geometry.clone(),
        }
    }
}

fn cn<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(T::of(re * s), T::of(im * s))
}

fn steer<T: Real>(u: f64, n: usize, ratio: f64) -> CVec<T> {
    CVec::from_fn(n, |i, _| {
        let theta = 2.0 * PI * ratio * i as f64 * u;
        Complex::new(T::of(theta.cos()), T::of(theta.sin()))
    })
}

/// ULA response, entry `n` is `exp(2πj · ratio · n · cos φ)`.
pub fn ula_response<T: Real>(phi: f64, n: usize, spacing_ratio: f64) -> Result<CVec<T>> {
    if n == 0 {
        return Err(invalid("N", "array needs at least one element"));
    }
    Ok(steer(phi.cos(), n, spacing_ratio))
}

/// Square UPA response with the `√|cos φ|` element pattern.
pub fn upa_response<T: Real>(phi: f64, psi: f64, k: usize, spacing_ratio: f64) -> Result<CVec<T>> {
    let side = (k as f64).sqrt().round() as usize;
    if side * side != k || k == 0 {
        return Err(invalid("K", format!("{k} is not a positive perfect square")));
    }
    upa_response_grid(phi, psi, side, side, spacing_ratio)
}

/// `rows × cols` UPA response:
/// `√|cos φ| · steer_rows(sin φ sin ψ) ⊗ steer_cols(sin φ cos ψ)`.
pub fn upa_response_grid<T: Real>(
    phi: f64,
    psi: f64,
    rows: usize,
    cols: usize,
    spacing_ratio: f64,
) -> Result<CVec<T>> {
    if rows == 0 || cols == 0 {
        return Err(invalid("IRS grid", "needs at least one element"));
    }
    let a: CVec<T> = steer(phi.sin() * psi.sin(), rows, spacing_ratio);
    let b: CVec<T> = steer(phi.sin() * psi.cos(), cols, spacing_ratio);
    let amp = T::of(phi.cos().abs().sqrt());
    Ok(CVec::from_fn(rows * cols, |i, _| (a[i / cols] * b[i % cols]).scale(amp)))
}

/// Rescales path 0 to sit exactly `margin_db` above the strongest other path,
/// keeping its phase. A single path is left as is.
pub fn boost_los<T: Real>(gains: &mut [Complex<T>], margin_db: f64) {
    if gains.len() < 2 {
        return;
    }
    let strongest = gains[1..]
        .iter()
        .map(|g| crate::num::cabs(*g))
        .fold(T::zero(), |m, x| m.max(x));
    let target = strongest * T::of(10f64.powf(margin_db / 20.0));
    let mag = crate::num::cabs(gains[0]);
    gains[0] = if mag > T::zero() {
        gains[0].scale(target / mag)
    } else {
        Complex::new(target, T::zero())
    };
}

fn draw_gains<T: Real, R: Rng + ?Sized>(rng: &mut R, q: usize, boost: Option<f64>) -> Vec<Complex<T>> {
    let mut g: Vec<Complex<T>> = (0..q).map(|_| cn(rng)).collect();
    if let Some(margin) = boost {
        boost_los(&mut g, margin);
    }
    g
}

/// `√L(d) Σ_q c_q a_IRS(φ_q, ψ_q) a_BS(φ'_q)ᵀ`, `K×N`.
pub fn synth_bs_irs<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    dims: &SystemDims,
    q: usize,
    d: f64,
    pl: &PathLossParams,
    spacing_ratio: f64,
    los_margin_db: Option<f64>,
) -> Result<CMat<T>> {
    if q == 0 {
        return Err(invalid("Q_IRS", "must be at least 1"));
    }
    let scale = T::of(path_loss(d, pl)?.sqrt());
    let gains = draw_gains::<T, R>(rng, q, los_margin_db);
    let mut h = CMat::zeros(dims.k, dims.n);
    for c in gains {
        let elev = rng.random_range(0.0..PI);
        let azim = rng.random_range(0.0..2.0 * PI);
        let aod = rng.random_range(0.0..2.0 * PI);
        let a_irs = upa_response_grid::<T>(elev, azim, dims.irs_rows, dims.irs_cols, spacing_ratio)?;
        let a_bs = ula_response::<T>(aod, dims.n, spacing_ratio)?;
        h += (a_irs * a_bs.transpose()) * c;
    }
    Ok(h.map(|z| z.scale(scale)))
}

/// `√L(d) Σ_q c_q a_BS(φ_q)`, length `N`.
pub fn synth_bs_user<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    q: usize,
    d: f64,
    pl: &PathLossParams,
    spacing_ratio: f64,
) -> Result<CVec<T>> {
    if q == 0 {
        return Err(invalid("Q_bu", "must be at least 1"));
    }
    let scale = T::of(path_loss(d, pl)?.sqrt());
    let gains = draw_gains::<T, R>(rng, q, None);
    let mut h = CVec::zeros(n);
    for c in gains {
        let aod = rng.random_range(0.0..2.0 * PI);
        h += ula_response::<T>(aod, n, spacing_ratio)? * c;
    }
    Ok(h.map(|z| z.scale(scale)))
}

/// `√L(d) Σ_q c_q a_IRS(φ_q, ψ_q)`, length `K`.
pub fn synth_irs_user<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    dims: &SystemDims,
    q: usize,
    d: f64,
    pl: &PathLossParams,
    spacing_ratio: f64,
    los_margin_db: Option<f64>,
) -> Result<CVec<T>> {
    if q == 0 {
        return Err(invalid("Q_su", "must be at least 1"));
    }
    let scale = T::of(path_loss(d, pl)?.sqrt());
    let gains = draw_gains::<T, R>(rng, q, los_margin_db);
    let mut h = CVec::zeros(dims.k);
    for c in gains {
        let elev = rng.random_range(0.0..PI);
        let azim = rng.random_range(0.0..2.0 * PI);
        h += upa_response_grid::<T>(elev, azim, dims.irs_rows, dims.irs_cols, spacing_ratio)? * c;
    }
    Ok(h.map(|z| z.scale(scale)))
}

/// Draws user positions and all three links for one channel realization.
pub fn synthesize<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    dims: &SystemDims,
    params: &ChannelParams,
    scenario: Scenario,
) -> Result<ChannelSet<T>> {
    params.validate()?;
    let margin = Some(params.los_margin_db);
    let h_bs = synth_bs_irs(rng, dims, params.q_irs, params.d_irs, &params.pl_irs, params.spacing_ratio, margin)?;

    let mut h_bu = CMat::zeros(dims.n, dims.m);
    let mut h_su = CMat::zeros(dims.k, dims.m);
    let mut geo = Geometry {
        d_irs: params.d_irs,
        d_bu: Vec::with_capacity(dims.m),
        d_su: Vec::with_capacity(dims.m),
        l_bs: path_loss(params.d_irs, &params.pl_irs)?,
        l_bu: Vec::with_capacity(dims.m),
        l_su: Vec::with_capacity(dims.m),
    };
    let (lo, hi) = params.user_radius;
    let su_margin = if scenario.boosts_irs_user() { margin } else { None };
    for m in 0..dims.m {
        let radius = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let angle = rng.random_range(0.0..2.0 * PI);
        let (x, y) = (radius * angle.cos(), radius * angle.sin());
        let d_bu = (x + params.d_irs).hypot(y);
        h_bu.set_column(m, &synth_bs_user(rng, dims.n, params.q_bu, d_bu, &params.pl_bu, params.spacing_ratio)?);
        h_su.set_column(
            m,
            &synth_irs_user(rng, dims, params.q_su, radius, &params.pl_su, params.spacing_ratio, su_margin)?,
        );
        geo.l_bu.push(path_loss(d_bu, &params.pl_bu)?);
        geo.l_su.push(path_loss(radius, &params.pl_su)?);
        geo.d_bu.push(d_bu);
        geo.d_su.push(radius);
    }
    ChannelSet::new(h_bs, h_bu, h_su, Some(geo))
}

/// Channel estimation accuracy `κ ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiQuality {
    kappa: f64,
}

impl CsiQuality {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(invalid("kappa", format!("must lie in [0, 1], got {kappa}")));
        }
        Ok(Self { kappa })
    }

    pub fn perfect() -> Self {
        Self { kappa: 1.0 }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// `Ĥ = κH + √((1 − κ²) L) Δ` per link, `Δ` standard complex normal.
///
/// `κ = 1` returns the input unchanged and draws nothing.
pub fn perturb_csi<T: Real, R: Rng + ?Sized>(
    ch: &ChannelSet<T>,
    q: CsiQuality,
    rng: &mut R,
) -> Result<ChannelSet<T>> {
    if q.kappa == 1.0 {
        return Ok(ch.clone());
    }
    let geo = ch
        .geometry
        .as_ref()
        .ok_or_else(|| invalid("channel", "path losses are needed to perturb CSI"))?;
    let kappa = T::of(q.kappa);
    let spread = 1.0 - q.kappa * q.kappa;
    let mut noisy = |h: &CMat<T>, loss: &dyn Fn(usize) -> f64| {
        CMat::from_fn(h.nrows(), h.ncols(), |r, c| {
            let s = T::of((spread * loss(c)).sqrt());
            h[(r, c)].scale(kappa) + cn::<T, R>(rng).scale(s)
        })
    };
    let h_bs = noisy(&ch.h_bs, &|_| geo.l_bs);
    let h_bu = noisy(&ch.h_bu, &|c| geo.l_bu[c]);
    let h_su = noisy(&ch.h_su, &|c| geo.l_su[c]);
    ChannelSet::new(h_bs, h_bu, h_su, ch.geometry.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::economy_svd;
    use crate::testutil::rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    type C = Complex<f64>;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn ula_examples() {
        let v: CVec<f64> = ula_response(FRAC_PI_2, 4, 0.5).unwrap();
        assert!(v.iter().all(|z| close(*z, C::new(1.0, 0.0), 1e-15)));
        let v: CVec<f64> = ula_response(0.7, 1, 0.5).unwrap();
        assert_eq!(v[0], C::new(1.0, 0.0));
        let v: CVec<f64> = ula_response(FRAC_PI_3, 2, 0.5).unwrap();
        assert!(close(v[1], C::new(0.0, 1.0), 1e-15));
        assert!(ula_response::<f64>(0.0, 0, 0.5).is_err());
    }

    #[test]
    fn upa_examples() {
        let v: CVec<f64> = upa_response(0.0, 1.1, 4, 0.5).unwrap();
        assert!(v.iter().all(|z| close(*z, C::new(1.0, 0.0), 1e-15)));
        let v: CVec<f64> = upa_response(FRAC_PI_2, 0.3, 9, 0.5).unwrap();
        assert!(v.iter().all(|z| z.norm() < 1e-7));
        let v: CVec<f64> = upa_response(FRAC_PI_4, 0.0, 4, 0.5).unwrap();
        let s = 2f64.powf(-0.25);
        let e = crate::num::cis(PI * FRAC_PI_4.sin());
        let expect = [C::new(1.0, 0.0), e, C::new(1.0, 0.0), e];
        for (z, x) in v.iter().zip(expect) {
            assert!(close(*z, x * s, 1e-14));
        }
        assert!(upa_response::<f64>(0.1, 0.2, 8, 0.5).is_err());
    }

    #[test]
    fn upa_grid_moduli() {
        let v: CVec<f64> = upa_response_grid(1.0, 2.0, 1, 2, 0.5).unwrap();
        assert_eq!(v.len(), 2);
        let m = 1f64.cos().abs().sqrt();
        assert!(v.iter().all(|z| (z.norm() - m).abs() < 1e-15));
    }

    #[test]
    fn path_loss_examples() {
        let p = PathLossParams::new(1e-3, 1.0, 2.5).unwrap();
        assert_eq!(path_loss(1.0, &p).unwrap(), 1e-3);
        assert!((path_loss(10.0, &p).unwrap() - 3.162_277_660_168_379e-6).abs() < 1e-18);
        let flat = PathLossParams::new(1e-3, 1.0, 0.0).unwrap();
        assert_eq!(path_loss(123.0, &flat).unwrap(), 1e-3);
        assert!(path_loss(0.0, &p).is_err());
        assert!(PathLossParams::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn los_boost_examples() {
        let mut one = [C::new(1.0, 0.0)];
        boost_los(&mut one, 5.0);
        assert_eq!(one[0], C::new(1.0, 0.0));

        let mut two = [C::new(1.0, 0.0), C::new(1.0, 0.0)];
        boost_los(&mut two, 5.0);
        assert!(two[0].norm() >= 10f64.powf(0.25) - 1e-12);

        let mut g = rng(4);
        for _ in 0..500 {
            let mut gains: Vec<C> = (0..6).map(|_| cn(&mut g)).collect();
            let phase = gains[0].arg();
            boost_los(&mut gains, 5.0);
            let others = gains[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(gains[0].norm() >= others * 10f64.powf(0.25) * (1.0 - 1e-12));
            assert!((gains[0].arg() - phase).abs() < 1e-12);
        }
    }

    #[test]
    fn dims_validation() {
        assert!(SystemDims::new(8, 2, 16).is_ok());
        assert!(SystemDims::new(8, 2, 15).is_err());
        assert!(SystemDims::new(2, 2, 16).is_err());
        assert!(SystemDims::new(8, 4, 4).is_err());
        let d = SystemDims::with_irs_grid(2, 1, 1, 2).unwrap();
        assert_eq!(d.k, 2);
    }

    #[test]
    fn single_path_links_are_rank_one() {
        let dims = SystemDims::new(4, 1, 9).unwrap();
        let pl = PathLossParams::new(1e-3, 1.0, 2.5).unwrap();
        let h: CMat<f64> = synth_bs_irs(&mut rng(1), &dims, 1, 500.0, &pl, 0.5, Some(5.0)).unwrap();
        assert_eq!(economy_svd(&h).unwrap().rank(), 1);
        let v: CVec<f64> = synth_bs_user(&mut rng(2), 4, 1, 100.0, &pl, 0.5).unwrap();
        let m = v[0].norm();
        assert!(v.iter().all(|z| (z.norm() - m).abs() < 1e-15 * m.max(1.0)));
    }

    #[test]
    fn bs_irs_rank_is_path_limited() {
        let dims = SystemDims::new(8, 2, 16).unwrap();
        let p = ChannelParams::default();
        let h: CMat<f64> = synth_bs_irs(&mut rng(3), &dims, 10, 500.0, &p.pl_irs, 0.5, Some(5.0)).unwrap();
        // K×N with N = 8 < Q = 10.
        assert_eq!(economy_svd(&h).unwrap().rank(), 8);
        let dims = SystemDims::new(16, 2, 64).unwrap();
        let h: CMat<f64> = synth_bs_irs(&mut rng(3), &dims, 10, 500.0, &p.pl_irs, 0.5, Some(5.0)).unwrap();
        assert_eq!(economy_svd(&h).unwrap().rank(), 10);
    }

    #[test]
    fn bs_irs_mean_power() {
        let dims = SystemDims::new(8, 2, 16).unwrap();
        let p = ChannelParams::default();
        let mut g = rng(10);
        let trials = 1000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let h: CMat<f64> = synth_bs_irs(&mut g, &dims, 10, 500.0, &p.pl_irs, 0.5, None).unwrap();
            acc += h.norm_squared();
        }
        let l = path_loss(500.0, &p.pl_irs).unwrap();
        let expect = l * 10.0 * 16.0 * 8.0 * (2.0 / PI);
        assert!((acc / trials as f64 / expect - 1.0).abs() < 0.1);
    }

    #[test]
    fn synthesis_is_seed_deterministic() {
        let dims = SystemDims::new(4, 2, 16).unwrap();
        let p = ChannelParams::default();
        let a: ChannelSet<f64> = synthesize(&mut rng(77), &dims, &p, Scenario::B).unwrap();
        let b: ChannelSet<f64> = synthesize(&mut rng(77), &dims, &p, Scenario::B).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shape(), (4, 2, 16));
        let geo = a.geometry.unwrap();
        for (&d, &dp) in geo.d_bu.iter().zip(&geo.d_su) {
            assert!((10.0..=50.0).contains(&dp));
            assert!((d - 500.0).abs() <= dp + 1e-9);
        }
    }

    #[test]
    fn users_are_uncorrelated() {
        let dims = SystemDims::new(4, 2, 16).unwrap();
        let p = ChannelParams::default();
        let mut g = rng(5);
        let trials = 2000;
        let mut cross = C::new(0.0, 0.0);
        for _ in 0..trials {
            let ch: ChannelSet<f64> = synthesize(&mut g, &dims, &p, Scenario::A).unwrap();
            let (a, b) = (ch.h_su.column(0), ch.h_su.column(1));
            let (na, nb) = (a.norm(), b.norm());
            cross += a.dotc(&b) / (na * nb);
        }
        let corr = cross.norm() / trials as f64;
        assert!(corr < 5.0 / (trials as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn effective_channel_matches_definition() {
        let dims = SystemDims::new(4, 2, 9).unwrap();
        let ch: ChannelSet<f64> = synthesize(&mut rng(6), &dims, &ChannelParams::default(), Scenario::B).unwrap();
        let mut g = rng(7);
        let u = CVec::from_fn(9, |_, _| crate::num::cis(g.random_range(0.0..6.0)));
        let h = ch.effective(&u).unwrap();
        let expect = (ch.h_su.adjoint() * CMat::from_diagonal(&u) * &ch.h_bs + ch.h_bu.adjoint()).adjoint();
        assert!((h - expect).norm() < 1e-20);
        assert!(ch.effective(&CVec::zeros(3)).is_err());
        assert!(ch.without_direct().h_bu.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn csi_examples() {
        let dims = SystemDims::new(4, 2, 16).unwrap();
        let ch: ChannelSet<f64> = synthesize(&mut rng(8), &dims, &ChannelParams::default(), Scenario::A).unwrap();
        assert_eq!(perturb_csi(&ch, CsiQuality::perfect(), &mut rng(1)).unwrap(), ch);
        assert!(CsiQuality::new(1.2).is_err());

        let geo = ch.geometry.clone().unwrap();
        let zero = CsiQuality::new(0.0).unwrap();
        let z = perturb_csi(&ch, zero, &mut rng(2)).unwrap();
        let z_other = perturb_csi(&ch.without_direct(), zero, &mut rng(2)).unwrap();
        assert_eq!(z.h_bu, z_other.h_bu);

        let kappa = 0.85;
        let q = CsiQuality::new(kappa).unwrap();
        let mut g = rng(3);
        let draws = 1000;
        let (mut e_bs, mut e_bu, mut e_su) = (0.0, 0.0, 0.0);
        for _ in 0..draws {
            let p = perturb_csi(&ch, q, &mut g).unwrap();
            e_bs += (&p.h_bs - ch.h_bs.map(|x| x * kappa)).norm_squared() / (16.0 * 4.0);
            e_bu += (p.h_bu.column(0) - ch.h_bu.column(0) * C::new(kappa, 0.0)).norm_squared() / 4.0;
            e_su += (p.h_su.column(1) - ch.h_su.column(1) * C::new(kappa, 0.0)).norm_squared() / 16.0;
        }
        let spread = 1.0 - kappa * kappa;
        let n = draws as f64;
        assert!((e_bs / n / (spread * geo.l_bs) - 1.0).abs() < 0.05);
        assert!((e_bu / n / (spread * geo.l_bu[0]) - 1.0).abs() < 0.05);
        assert!((e_su / n / (spread * geo.l_su[1]) - 1.0).abs() < 0.05);
    }

    #[test]
    fn csi_requires_geometry() {
        let eye: CMat<f64> = CMat::identity(2, 2);
        let ch = ChannelSet::new(CMat::identity(3, 2), eye, CMat::identity(3, 2), None).unwrap();
        assert!(perturb_csi(&ch, CsiQuality::new(0.5).unwrap(), &mut rng(1)).is_err());
        assert!(ChannelSet::new(CMat::<f64>::identity(3, 2), CMat::identity(3, 2), CMat::identity(3, 2), None).is_err());
    }
}
