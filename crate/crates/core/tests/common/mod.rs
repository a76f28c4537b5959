#![allow(dead_code)]

use irs_core::num::{CMat, CVec};
use irs_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn(r: &mut impl Rng) -> C64 {
    let re: f64 = r.sample(StandardNormal);
    let im: f64 = r.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn rand_cmat(r: &mut impl Rng, rows: usize, cols: usize) -> CMat<f64> {
    CMat::from_fn(rows, cols, |_, _| cn(r))
}

pub fn rand_cvec(r: &mut impl Rng, n: usize) -> CVec<f64> {
    CVec::from_fn(n, |_, _| cn(r))
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
