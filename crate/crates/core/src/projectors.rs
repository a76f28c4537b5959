//! Separable projectors onto the two IRS element models and their
//! derivatives.
//!
//! Both are the large-penalty limits of the per-entry MAP denoiser, so they do
//! not depend on the incoming precision. The derivative returned alongside is
//! the modulus of the Wirtinger derivative `∂g/∂r`.

use crate::error::{invalid, Result};
use crate::num::{cabs, cplx, CVec, Complex, Real};

/// Derivative cap applied where the exact derivative diverges.
pub const DERIVATIVE_CAP: f64 = 1e12;
/// Reactance returned on the `Im r = 0`, `1 + 2 Re r ≥ 0` branch.
pub const DEGENERATE_REACTANCE: f64 = 1e6;
/// Central finite-difference step for the reactive derivative fallback.
pub const FD_STEP: f64 = 1e-6;

/// Element model the projector enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// `|υ| = 1`.
    Unimodular,
    /// `υ = −1/(1 + jχ)` for a real reactance `χ`.
    Reactive,
}

impl ConstraintKind {
    pub fn projector<T: Real>(self) -> Box<dyn Projector<T>> {
        match self {
            ConstraintKind::Unimodular => Box::new(Unimodular),
            ConstraintKind::Reactive => Box::new(ReactiveLoad),
        }
    }

    /// Deterministic feasible point used when no initial phases are given.
    pub fn default_point<T: Real>(self) -> Complex<T> {
        match self {
            ConstraintKind::Unimodular => cplx(1.0, 0.0),
            ConstraintKind::Reactive => cplx(-1.0, 0.0),
        }
    }
}

/// Per-entry map `g` and its derivative magnitude `g'`.
pub trait Projector<T: Real>: Send + Sync {
    fn project(&self, r: Complex<T>) -> Complex<T>;
    fn derivative(&self, r: Complex<T>) -> T;

    /// `None` for projectors that do not correspond to an IRS element model.
    fn kind(&self) -> Option<ConstraintKind> {
        None
    }

    fn project_vec(&self, r: &CVec<T>) -> CVec<T> {
        r.map(|z| self.project(z))
    }

    /// Mean of `g'` over the entries of `r`.
    fn mean_derivative(&self, r: &CVec<T>) -> T {
        if r.is_empty() {
            return T::zero();
        }
        r.iter().fold(T::zero(), |acc, &z| acc + self.derivative(z)) / T::of(r.len() as f64)
    }
}

/// Pass-through map, `g(r) = r`, `g' = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl<T: Real> Projector<T> for Identity {
    fn project(&self, r: Complex<T>) -> Complex<T> {
        r
    }
    fn derivative(&self, _r: Complex<T>) -> T {
        T::one()
    }
}

/// Nearest point on the unit circle.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unimodular;

impl<T: Real> Projector<T> for Unimodular {
    fn project(&self, r: Complex<T>) -> Complex<T> {
        unimodular_project(r)
    }
    fn derivative(&self, r: Complex<T>) -> T {
        unimodular_derivative(r)
    }
    fn kind(&self) -> Option<ConstraintKind> {
        Some(ConstraintKind::Unimodular)
    }
}

/// Nearest point on the reactive-load circle `{−1/(1 + jχ) : χ ∈ ℝ}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReactiveLoad;

impl<T: Real> Projector<T> for ReactiveLoad {
    fn project(&self, r: Complex<T>) -> Complex<T> {
        reactive_project(r)
    }
    fn derivative(&self, r: Complex<T>) -> T {
        reactive_derivative(r)
    }
    fn kind(&self) -> Option<ConstraintKind> {
        Some(ConstraintKind::Reactive)
    }
}

/// `r/|r|`, with `1` at the origin.
pub fn unimodular_project<T: Real>(r: Complex<T>) -> Complex<T> {
    let m = cabs(r);
    if m == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    r.unscale(m)
}

/// `1/(2|r|)`, capped at [`DERIVATIVE_CAP`].
pub fn unimodular_derivative<T: Real>(r: Complex<T>) -> T {
    let m = cabs(r);
    let cap = T::of(DERIVATIVE_CAP);
    if m == T::zero() {
        return cap;
    }
    (T::one() / (T::of(2.0) * m)).min(cap)
}

/// `−1/(1 + jχ)`.
pub fn reactive_element<T: Real>(chi: T) -> Complex<T> {
    -Complex::new(T::one(), chi).inv()
}

/// Reactance of a point on the reactive-load circle, `Im(−1/υ)`.
pub fn reactance_of<T: Real>(upsilon: Complex<T>) -> T {
    (-upsilon.inv()).im
}

/// `|r + 1/(1 + jχ)|²`, the distance minimized by [`reactance_opt`].
pub fn reactance_objective<T: Real>(r: Complex<T>, chi: T) -> T {
    (r - reactive_element(chi)).norm_sqr()
}

/// Closed-form `d²/dχ²` of [`reactance_objective`].
pub fn reactance_objective_curvature<T: Real>(r: Complex<T>, chi: T) -> T {
    let (b, c) = (r.im, T::one() + T::of(2.0) * r.re);
    let q = T::one() + chi * chi;
    let two = T::of(2.0);
    two / (q * q * q)
        * (T::of(6.0) * b * chi - two * b * chi * chi * chi + T::of(3.0) * c * chi * chi - c)
}

/// Minimizing reactance for `r = a + jb`.
///
/// For `b ≠ 0` this is the stationary point with positive curvature,
/// `(c + s)/(2b)` with `c = 1 + 2a`, `s = √(c² + 4b²)`, evaluated as
/// `2b/(s − c)` when `c ≤ 0` to avoid cancellation. For `b = 0` it is `0`
/// when `c < 0` and [`DEGENERATE_REACTANCE`] otherwise.
pub fn reactance_opt<T: Real>(r: Complex<T>) -> T {
    let (b, c) = (r.im, T::one() + T::of(2.0) * r.re);
    if b == T::zero() {
        return if c < T::zero() {
            T::zero()
        } else {
            T::of(DEGENERATE_REACTANCE)
        };
    }
    let s = c.hypot(T::of(2.0) * b);
    if c > T::zero() {
        (c + s) / (T::of(2.0) * b)
    } else {
        T::of(2.0) * b / (s - c)
    }
}

pub fn reactive_project<T: Real>(r: Complex<T>) -> Complex<T> {
    reactive_element(reactance_opt(r))
}

/// Partial derivatives `(∂χ/∂a, ∂χ/∂b)` of [`reactance_opt`]; requires
/// `Im r ≠ 0`.
pub fn reactance_partials<T: Real>(r: Complex<T>) -> (T, T) {
    let (b, c) = (r.im, T::one() + T::of(2.0) * r.re);
    let two = T::of(2.0);
    let s = c.hypot(two * b);
    if c > T::zero() {
        ((s + c) / (b * s), -c * (s + c) / (two * b * b * s))
    } else {
        let den = s * (s - c);
        (T::of(4.0) * b / den, -two * c / den)
    }
}

/// `|dg/dχ · ∂χ/∂r|` with `∂χ/∂r = ½(∂χ/∂a − j ∂χ/∂b)`.
///
/// Falls back to a central finite difference when `Im r = 0`. The result is
/// capped at [`DERIVATIVE_CAP`].
pub fn reactive_derivative<T: Real>(r: Complex<T>) -> T {
    let cap = T::of(DERIVATIVE_CAP);
    if r.im == T::zero() {
        let h = T::of(FD_STEP).max(T::eps().sqrt());
        return finite_difference_derivative(reactive_project, r, h).min(cap);
    }
    let chi = reactance_opt(r);
    let (da, db) = reactance_partials(r);
    let half = T::of(0.5);
    let dchi = Complex::new(half * da, -half * db);
    let w = Complex::new(T::one(), chi);
    let dg_dchi = Complex::new(T::zero(), T::one()) / (w * w);
    let d = cabs(dg_dchi * dchi);
    if d.is_finite() {
        d.min(cap)
    } else {
        cap
    }
}

/// `|∂g/∂r|` by central differences in the real and imaginary directions.
pub fn finite_difference_derivative<T: Real, F>(g: F, r: Complex<T>, h: T) -> T
where
    F: Fn(Complex<T>) -> Complex<T>,
{
    let two_h = T::of(2.0) * h;
    let ga = (g(r + Complex::new(h, T::zero())) - g(r - Complex::new(h, T::zero()))).unscale(two_h);
    let gb = (g(r + Complex::new(T::zero(), h)) - g(r - Complex::new(T::zero(), h))).unscale(two_h);
    let j = Complex::new(T::zero(), T::one());
    cabs((ga - j * gb).scale(T::of(0.5)))
}

/// IRS phase-shift vector tagged with the element model it satisfies.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector<T: Real> {
    pub upsilon: CVec<T>,
    pub kind: ConstraintKind,
}

impl<T: Real> PhaseVector<T> {
    /// Wraps `upsilon` after checking it against `kind` to within `tol`.
    pub fn new(upsilon: CVec<T>, kind: ConstraintKind, tol: T) -> Result<Self> {
        let pv = Self { upsilon, kind };
        match pv.max_violation() {
            v if v <= tol => Ok(pv),
            v => Err(invalid(
                "phase vector",
                format!("violates the {kind:?} constraint by {}", v.as_f64()),
            )),
        }
    }

    /// All entries at the model's default point.
    pub fn constant(len: usize, kind: ConstraintKind) -> Self {
        Self {
            upsilon: CVec::from_element(len, kind.default_point()),
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.upsilon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upsilon.is_empty()
    }

    /// Largest distance of any entry from the feasible set.
    pub fn max_violation(&self) -> T {
        let half = T::of(0.5);
        self.upsilon.iter().fold(T::zero(), |worst, &u| {
            let v = match self.kind {
                ConstraintKind::Unimodular => (cabs(u) - T::one()).abs(),
                ConstraintKind::Reactive => (cabs(u + Complex::new(half, T::zero())) - half).abs(),
            };
            worst.max(v)
        })
    }

    /// Phase angles `arg υ`.
    pub fn phases(&self) -> Vec<T> {
        self.upsilon.iter().map(|u| u.im.atan2(u.re)).collect()
    }

    /// Reactances `Im(−1/υ)`; meaningful for the reactive model.
    pub fn reactances(&self) -> Vec<T> {
        self.upsilon.iter().map(|&u| reactance_of(u)).collect()
    }
}
