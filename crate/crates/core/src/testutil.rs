//! Helpers shared by the unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::num::{CMat, CVec, Complex};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn(r: &mut impl Rng) -> Complex<f64> {
    let re: f64 = r.sample(StandardNormal);
    let im: f64 = r.sample(StandardNormal);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn rand_cmat(r: &mut impl Rng, rows: usize, cols: usize) -> CMat<f64> {
    CMat::from_fn(rows, cols, |_, _| cn(r))
}

pub fn rand_cvec(r: &mut impl Rng, n: usize) -> CVec<f64> {
    CVec::from_fn(n, |_, _| cn(r))
}

/// Dense Kronecker product `x ⊗ y`.
pub fn dense_kron(x: &CMat<f64>, y: &CMat<f64>) -> CMat<f64> {
    let (p, q) = (y.nrows(), y.ncols());
    CMat::from_fn(x.nrows() * p, x.ncols() * q, |r, c| {
        x[(r / p, c / q)] * y[(r % p, c % q)]
    })
}
