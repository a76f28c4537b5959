//! Scalar abstraction shared by every numeric module.

use nalgebra::{DMatrix, DVector, RealField};
pub use num_complex::Complex;

/// Real scalar the solvers are generic over.
///
/// Everything numeric is written against this trait so the same code runs in
/// `f32` and `f64`. Literals go through [`Real::of`].
pub trait Real: RealField + Copy + Default + Send + Sync {
    /// Converts an `f64` literal or parameter into this scalar.
    fn of(x: f64) -> Self;
    fn as_f64(self) -> f64;
    /// Machine epsilon.
    fn eps() -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn of(x: f64) -> Self {
                x as $t
            }
            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn eps() -> Self {
                <$t>::EPSILON
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;
pub type RVec<T> = DVector<T>;

#[inline]
pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::of(re), T::of(im))
}

/// Modulus computed without intermediate overflow.
#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// `exp(j theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn is_finite_c<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn all_finite<T: Real>(m: &CMat<T>) -> bool {
    m.iter().all(|z| is_finite_c(*z))
}

/// Empirical mean of a real vector (`<.>` in the algorithm listings).
pub fn mean<T: Real>(v: &RVec<T>) -> T {
    if v.is_empty() {
        return T::zero();
    }
    v.sum() / T::of(v.len() as f64)
}

/// Casts a complex matrix between scalar types.
pub fn cast_mat<S: Real, T: Real>(m: &CMat<S>) -> CMat<T> {
    m.map(|z| Complex::new(T::of(z.re.as_f64()), T::of(z.im.as_f64())))
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a dB ratio to linear power.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
