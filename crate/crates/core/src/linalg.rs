//! Dense complex kernels and the structured SVD of a column-wise Khatri-Rao
//! product.
//!
//! For `D = B * A` (column `k` is `b_k ⊗ a_k`) with `A = U_A Σ_A V_A^H` and
//! `B = U_B Σ_B V_B^H`, the triple
//!
//! ```text
//! U   = U_B ⊗ U_A
//! ω   = (ω_B ⊗ ω_A) ⊙ v_n
//! V^H = (V_B^H * V_A^H) ⊙ (v_n^{-1} 1^T)
//! ```
//!
//! reconstructs `D` exactly, where `v_n` holds the row norms of
//! `V_B^H * V_A^H`. `U` has orthonormal columns; the rows of `V^H` are unit
//! norm but not mutually orthogonal in general, so the triple is a
//! factorization rather than a true SVD. [`StructuredSvd::v_orthogonality_defect`]
//! reports how far off it is.
//!
//! Kronecker indices are ordered with the `B` factor outermost: component
//! `(i, j)` (row `i` of the `A` factor, row `j` of the `B` factor) sits at
//! position `j * R_A + i`, which is also the column-major position of entry
//! `(i, j)` of `U_A^H Z conj(U_B)`.

use nalgebra::DMatrix;

use crate::error::{invalid, mismatch, Error, Result};
use crate::num::{all_finite, CMat, CVec, Complex, RVec, Real};

/// Relative singular-value threshold below which components are dropped.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Read access to the `ω` / `V^H` pair consumed by the LMMSE step.
pub trait SvdFactors<T: Real> {
    fn omega(&self) -> &RVec<T>;
    /// `R × N`, one row per retained component.
    fn v_h(&self) -> &CMat<T>;
    fn rank(&self) -> usize {
        self.omega().len()
    }
}

/// Economy SVD `A = U Diag(ω) V^H` with `R = rank` retained components,
/// sorted by decreasing singular value.
#[derive(Debug, Clone)]
pub struct EconomySvd<T: Real> {
    pub u: CMat<T>,
    pub omega: RVec<T>,
    pub v_h: CMat<T>,
}

impl<T: Real> SvdFactors<T> for EconomySvd<T> {
    fn omega(&self) -> &RVec<T> {
        &self.omega
    }
    fn v_h(&self) -> &CMat<T> {
        &self.v_h
    }
}

impl<T: Real> EconomySvd<T> {
    pub fn rank(&self) -> usize {
        self.omega.len()
    }

    pub fn reconstruct(&self) -> CMat<T> {
        scale_columns(&self.u, &self.omega) * &self.v_h
    }
}

pub fn economy_svd<T: Real>(a: &CMat<T>) -> Result<EconomySvd<T>> {
    economy_svd_with_tol(a, T::of(DEFAULT_RANK_TOL))
}

/// Economy SVD keeping singular values strictly above `tol * max(ω)`.
pub fn economy_svd_with_tol<T: Real>(a: &CMat<T>, tol: T) -> Result<EconomySvd<T>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(invalid("matrix", "dimensions must be strictly positive"));
    }
    if !all_finite(a) {
        return Err(Error::NonFinite { what: "SVD input" });
    }
    let svd = a.clone().svd_unordered(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => unreachable!("U and V^H were requested"),
    };
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&x, &y| {
        sv[y]
            .partial_cmp(&sv[x])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let max = order.first().map(|&i| sv[i]).unwrap_or_else(T::zero);
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| max > T::zero() && sv[i] > tol * max)
        .collect();

    Ok(EconomySvd {
        u: u.select_columns(keep.iter()),
        omega: RVec::from_iterator(keep.len(), keep.iter().map(|&i| sv[i])),
        v_h: v_t.select_rows(keep.iter()),
    })
}

/// Column-wise Khatri-Rao product `B * A`: column `k` is `b_k ⊗ a_k`.
pub fn khatri_rao_columns<T: Real>(b: &CMat<T>, a: &CMat<T>) -> Result<CMat<T>> {
    if a.ncols() != b.ncols() {
        return Err(mismatch(
            "khatri_rao_columns",
            format!("B has {} columns, A has {}", b.ncols(), a.ncols()),
        ));
    }
    let (m, q) = (a.nrows(), b.nrows());
    Ok(DMatrix::from_fn(m * q, a.ncols(), |row, k| {
        b[(row / m, k)] * a[(row % m, k)]
    }))
}

/// `vec(U_A^H Z conj(U_B))`, i.e. `(U_B ⊗ U_A)^H vec(Z)` without forming the
/// Kronecker product.
pub fn kron_transform<T: Real>(u_a: &CMat<T>, u_b: &CMat<T>, z: &CMat<T>) -> Result<CVec<T>> {
    if u_a.nrows() != z.nrows() || u_b.nrows() != z.ncols() {
        return Err(mismatch(
            "kron_transform",
            format!(
                "U_A is {}x{}, Z is {}x{}, U_B is {}x{}",
                u_a.nrows(),
                u_a.ncols(),
                z.nrows(),
                z.ncols(),
                u_b.nrows(),
                u_b.ncols()
            ),
        ));
    }
    let x = u_a.adjoint() * z * u_b.conjugate();
    Ok(vec_col_major(&x))
}

/// Column-major vectorization.
pub fn vec_col_major<T: Real>(m: &CMat<T>) -> CVec<T> {
    CVec::from_column_slice(m.as_slice())
}

/// Structured factorization of `B * A` assembled from the SVDs of its factors.
#[derive(Debug, Clone)]
pub struct StructuredSvd<T: Real> {
    pub u_a: CMat<T>,
    pub u_b: CMat<T>,
    pub omega: RVec<T>,
    pub v_h: CMat<T>,
    /// `(i, j)` factor indices of each retained component, aligned with
    /// `omega` and the rows of `v_h`.
    pub kept: Vec<(usize, usize)>,
    /// Components removed because their `v_n` entry (or singular value)
    /// vanished.
    pub dropped: usize,
}

impl<T: Real> SvdFactors<T> for StructuredSvd<T> {
    fn omega(&self) -> &RVec<T> {
        &self.omega
    }
    fn v_h(&self) -> &CMat<T> {
        &self.v_h
    }
}

/// Builds the structured factorization of `B * A` from `svd_a` (of `A`, `M×N`)
/// and `svd_b` (of `B`, `Q×N`).
///
/// Components are left in factor order unless `sort` is set, in which case
/// they are ordered by decreasing `ω`.
pub fn structured_svd<T: Real>(
    svd_a: &EconomySvd<T>,
    svd_b: &EconomySvd<T>,
    sort: bool,
) -> Result<StructuredSvd<T>> {
    let n = svd_a.v_h.ncols();
    if svd_b.v_h.ncols() != n {
        return Err(mismatch(
            "structured_svd",
            format!("V_A^H has {} columns, V_B^H has {}", n, svd_b.v_h.ncols()),
        ));
    }
    let (ra, rb) = (svd_a.rank(), svd_b.rank());
    let tol = T::of(DEFAULT_RANK_TOL);

    let mut rows: Vec<(usize, usize, T, Vec<Complex<T>>)> = Vec::with_capacity(ra * rb);
    let mut dropped = 0;
    for j in 0..rb {
        for i in 0..ra {
            let row: Vec<Complex<T>> = (0..n)
                .map(|k| svd_b.v_h[(j, k)] * svd_a.v_h[(i, k)])
                .collect();
            let norm = row
                .iter()
                .fold(T::zero(), |acc, z| acc + z.norm_sqr())
                .sqrt();
            if norm <= tol {
                dropped += 1;
                continue;
            }
            let w = svd_b.omega[j] * svd_a.omega[i] * norm;
            let inv = T::one() / norm;
            rows.push((i, j, w, row.into_iter().map(|z| z.scale(inv)).collect()));
        }
    }

    let w_max = rows.iter().fold(T::zero(), |m, r| m.max(r.2));
    let before = rows.len();
    rows.retain(|r| r.2 > tol * w_max);
    dropped += before - rows.len();

    if sort {
        rows.sort_by(|x, y| y.2.partial_cmp(&x.2).unwrap_or(std::cmp::Ordering::Equal));
    }

    let r = rows.len();
    let mut v_h = CMat::zeros(r, n);
    for (idx, row) in rows.iter().enumerate() {
        for (k, z) in row.3.iter().enumerate() {
            v_h[(idx, k)] = *z;
        }
    }
    Ok(StructuredSvd {
        u_a: svd_a.u.clone(),
        u_b: svd_b.u.clone(),
        omega: RVec::from_iterator(r, rows.iter().map(|x| x.2)),
        v_h,
        kept: rows.iter().map(|x| (x.0, x.1)).collect(),
        dropped,
    })
}

impl<T: Real> StructuredSvd<T> {
    pub fn rank(&self) -> usize {
        self.omega.len()
    }

    /// Materializes the retained columns of `U_B ⊗ U_A`.
    pub fn u_dense(&self) -> CMat<T> {
        let m = self.u_a.nrows();
        let q = self.u_b.nrows();
        let mut u = CMat::zeros(m * q, self.kept.len());
        for (c, &(i, j)) in self.kept.iter().enumerate() {
            for jb in 0..q {
                for ia in 0..m {
                    u[(jb * m + ia, c)] = self.u_b[(jb, j)] * self.u_a[(ia, i)];
                }
            }
        }
        u
    }

    pub fn to_economy(&self) -> EconomySvd<T> {
        EconomySvd {
            u: self.u_dense(),
            omega: self.omega.clone(),
            v_h: self.v_h.clone(),
        }
    }

    pub fn reconstruct(&self) -> CMat<T> {
        scale_columns(&self.u_dense(), &self.omega) * &self.v_h
    }

    /// `Diag(ω)^{-1} U^H vec(Z)` for the retained components.
    pub fn project_target(&self, z: &CMat<T>) -> Result<CVec<T>> {
        let full = kron_transform(&self.u_a, &self.u_b, z)?;
        let ra = self.u_a.ncols();
        Ok(CVec::from_iterator(
            self.kept.len(),
            self.kept
                .iter()
                .zip(self.omega.iter())
                .map(|(&(i, j), &w)| full[j * ra + i].unscale(w)),
        ))
    }

    /// `‖V^H V − I‖_F`; zero when the rows of `V^H` are orthonormal.
    pub fn v_orthogonality_defect(&self) -> T {
        let g = &self.v_h * self.v_h.adjoint();
        (g - CMat::identity(self.rank(), self.rank())).norm()
    }
}

fn scale_columns<T: Real>(u: &CMat<T>, w: &RVec<T>) -> CMat<T> {
    let mut out = u.clone();
    for (mut col, &s) in out.column_iter_mut().zip(w.iter()) {
        col.iter_mut().for_each(|z| *z = z.scale(s));
    }
    out
}

/// Relative Frobenius distance `‖x − y‖ / max(‖y‖, tiny)`.
pub fn rel_frobenius<T: Real>(x: &CMat<T>, y: &CMat<T>) -> T {
    let denom = y.norm();
    if denom == T::zero() {
        return (x - y).norm();
    }
    (x - y).norm() / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cplx;
    use crate::testutil::{dense_kron, rand_cmat, rng};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        cplx(re, im)
    }

    #[test]
    fn svd_of_scalar_one() {
        let a = CMat::from_element(1, 1, c(1.0, 0.0));
        let s = economy_svd(&a).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.omega[0] - 1.0).abs() < 1e-15);
        assert!((s.u[(0, 0)] * s.v_h[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((s.u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn svd_of_identity() {
        let a: CMat<f64> = CMat::identity(2, 2);
        let s = economy_svd(&a).unwrap();
        assert_eq!(s.omega.len(), 2);
        for w in s.omega.iter() {
            assert!((w - 1.0).abs() < 1e-14);
        }
        let eye: CMat<f64> = CMat::identity(2, 2);
        assert!((s.u.adjoint() * &s.u - &eye).norm() < 1e-14);
        assert!((&s.v_h * s.v_h.adjoint() - &eye).norm() < 1e-14);
    }

    #[test]
    fn svd_reconstructs_random_4x6() {
        let mut r = rng(7);
        let a = rand_cmat(&mut r, 4, 6);
        let s = economy_svd(&a).unwrap();
        assert_eq!(s.rank(), 4);
        assert!(rel_frobenius(&s.reconstruct(), &a) < 1e-10);
        assert!((s.u.adjoint() * &s.u - CMat::identity(4, 4)).norm() < 1e-12);
        assert!(s.omega.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn svd_rank_tolerance_drops_small_components() {
        let mut r = rng(3);
        let x = rand_cmat(&mut r, 5, 2);
        let y = rand_cmat(&mut r, 2, 6);
        let a = &x * &y;
        assert_eq!(economy_svd(&a).unwrap().rank(), 2);
        // A looser tolerance can only drop more.
        let s = economy_svd_with_tol(&a, 0.9).unwrap();
        assert!(s.rank() <= 2);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut a: CMat<f64> = CMat::identity(2, 2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(economy_svd(&a), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn khatri_rao_two_vectors() {
        let b = CMat::from_column_slice(2, 1, &[c(3.0, 0.0), c(4.0, 0.0)]);
        let a = CMat::from_column_slice(2, 1, &[c(1.0, 0.0), c(2.0, 0.0)]);
        let d = khatri_rao_columns(&b, &a).unwrap();
        let expect = [3.0, 6.0, 4.0, 8.0];
        for (z, e) in d.iter().zip(expect) {
            assert_eq!(*z, c(e, 0.0));
        }
    }

    #[test]
    fn khatri_rao_scalars() {
        let b = CMat::from_element(1, 1, c(1.0, 0.0));
        let a = CMat::from_element(1, 1, c(5.0, 0.0));
        assert_eq!(khatri_rao_columns(&b, &a).unwrap()[(0, 0)], c(5.0, 0.0));
    }

    #[test]
    fn khatri_rao_matches_columnwise_kronecker() {
        let mut r = rng(11);
        let b = rand_cmat(&mut r, 3, 4);
        let a = rand_cmat(&mut r, 2, 4);
        let d = khatri_rao_columns(&b, &a).unwrap();
        for k in 0..4 {
            let kron = dense_kron(&b.columns(k, 1).into_owned(), &a.columns(k, 1).into_owned());
            assert!((d.column(k) - kron.column(0)).norm() < 1e-15);
        }
    }

    #[test]
    fn khatri_rao_column_mismatch() {
        let b: CMat<f64> = CMat::zeros(2, 3);
        let a: CMat<f64> = CMat::zeros(2, 4);
        assert!(matches!(
            khatri_rao_columns(&b, &a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn structured_svd_scalars() {
        let one = CMat::from_element(1, 1, c(1.0, 0.0));
        let s = economy_svd(&one).unwrap();
        let st = structured_svd(&s, &s, false).unwrap();
        assert_eq!(st.rank(), 1);
        assert!((st.omega[0] - 1.0).abs() < 1e-15);
        assert!((st.v_h[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(rel_frobenius(&st.reconstruct(), &one) < 1e-15);
    }

    #[test]
    fn structured_svd_reconstructs_random_2x3() {
        let mut r = rng(5);
        let a = rand_cmat(&mut r, 2, 3);
        let b = rand_cmat(&mut r, 2, 3);
        let st = structured_svd(&economy_svd(&a).unwrap(), &economy_svd(&b).unwrap(), false).unwrap();
        let d = khatri_rao_columns(&b, &a).unwrap();
        assert!(rel_frobenius(&st.reconstruct(), &d) < 1e-9);
        // Oracle: a dense SVD of the explicit D reconstructs to the same matrix.
        let dense = economy_svd(&d).unwrap();
        assert!(rel_frobenius(&st.reconstruct(), &dense.reconstruct()) < 1e-9);
    }

    #[test]
    fn structured_svd_drops_vanishing_rows() {
        // A = [1, 0] has a zero column and B = [0, 1] is supported on it, so
        // the single Khatri-Rao row vanishes.
        let a = CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let b = CMat::from_row_slice(1, 2, &[c(0.0, 0.0), c(1.0, 0.0)]);
        let st = structured_svd(&economy_svd(&a).unwrap(), &economy_svd(&b).unwrap(), false).unwrap();
        assert_eq!(st.dropped, 1);
        assert_eq!(st.rank(), 0);
        // Dense rank of D agrees.
        let d = khatri_rao_columns(&b, &a).unwrap();
        assert!(d.norm() == 0.0);
    }

    #[test]
    fn structured_svd_zero_column_reduces_rank() {
        // Identity factors: only the (i, i) Khatri-Rao rows survive.
        let eye: CMat<f64> = CMat::identity(3, 3);
        let s = economy_svd(&eye).unwrap();
        let st = structured_svd(&s, &s, false).unwrap();
        assert_eq!(st.rank(), 3);
        assert_eq!(st.dropped, 6);
        let d = khatri_rao_columns(&eye, &eye).unwrap();
        assert_eq!(economy_svd(&d).unwrap().rank(), 3);
        assert!(rel_frobenius(&st.reconstruct(), &d) < 1e-14);
        assert!(st.v_orthogonality_defect() < 1e-14);
    }

    #[test]
    fn structured_svd_sort_flag_orders_and_keeps_alignment() {
        let mut r = rng(9);
        let a = rand_cmat(&mut r, 3, 5);
        let b = rand_cmat(&mut r, 2, 5);
        let z = rand_cmat(&mut r, 3, 2);
        let (sa, sb) = (economy_svd(&a).unwrap(), economy_svd(&b).unwrap());
        let plain = structured_svd(&sa, &sb, false).unwrap();
        let sorted = structured_svd(&sa, &sb, true).unwrap();
        assert!(sorted.omega.as_slice().windows(2).all(|w| w[0] >= w[1]));
        let d = khatri_rao_columns(&b, &a).unwrap();
        assert!(rel_frobenius(&sorted.reconstruct(), &d) < 1e-9);
        // ω ⊙ z̃ equals U^H vec(Z) in either ordering.
        for st in [&plain, &sorted] {
            let zt = st.project_target(&z).unwrap();
            let dense = st.u_dense().adjoint() * vec_col_major(&z);
            for k in 0..st.rank() {
                assert!((zt[k].scale(st.omega[k]) - dense[k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn structured_svd_rejects_mismatched_columns() {
        let mut r = rng(2);
        let sa = economy_svd(&rand_cmat(&mut r, 2, 3)).unwrap();
        let sb = economy_svd(&rand_cmat(&mut r, 2, 4)).unwrap();
        assert!(structured_svd(&sa, &sb, false).is_err());
    }

    #[test]
    fn kron_transform_identity_factors() {
        let eye: CMat<f64> = CMat::identity(2, 2);
        let v = kron_transform(&eye, &eye, &eye).unwrap();
        let expect = [1.0, 0.0, 0.0, 1.0];
        for (z, e) in v.iter().zip(expect) {
            assert_eq!(*z, c(e, 0.0));
        }
    }

    #[test]
    fn kron_transform_scalars() {
        let one = CMat::from_element(1, 1, c(1.0, 0.0));
        let z = CMat::from_element(1, 1, c(2.0, -3.0));
        assert_eq!(kron_transform(&one, &one, &z).unwrap()[0], c(2.0, -3.0));
    }

    #[test]
    fn kron_transform_matches_dense_3x3() {
        let mut r = rng(21);
        let ua = rand_cmat(&mut r, 3, 3);
        let ub = rand_cmat(&mut r, 3, 3);
        let z = rand_cmat(&mut r, 3, 3);
        let fast = kron_transform(&ua, &ub, &z).unwrap();
        let dense = dense_kron(&ub, &ua).adjoint() * vec_col_major(&z);
        assert!((fast - dense).norm() < 1e-12);
    }

    #[test]
    fn kron_transform_dimension_mismatch() {
        let a: CMat<f64> = CMat::zeros(2, 2);
        let z: CMat<f64> = CMat::zeros(3, 2);
        assert!(kron_transform(&a, &a, &z).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let mut r = rng(1);
        let a: CMat<f32> = crate::num::cast_mat(&rand_cmat(&mut r, 3, 4));
        let b: CMat<f32> = crate::num::cast_mat(&rand_cmat(&mut r, 2, 4));
        let st = structured_svd(&economy_svd(&a).unwrap(), &economy_svd(&b).unwrap(), false).unwrap();
        let d = khatri_rao_columns(&b, &a).unwrap();
        assert!(rel_frobenius(&st.reconstruct(), &d) < 1e-4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn structured_reconstruction_and_nonnegative_omega(
            m in 1usize..=8, q in 1usize..=8, n in 1usize..=8, seed in any::<u64>()
        ) {
            let mut r = rng(seed);
            let a = rand_cmat(&mut r, m, n);
            let b = rand_cmat(&mut r, q, n);
            let st = structured_svd(&economy_svd(&a).unwrap(), &economy_svd(&b).unwrap(), false).unwrap();
            let d = khatri_rao_columns(&b, &a).unwrap();
            prop_assert!(rel_frobenius(&st.reconstruct(), &d) < 1e-9);
            prop_assert!(st.omega.iter().all(|&w| w >= 0.0));
        }

        #[test]
        fn kron_transform_matches_dense(
            ma in 1usize..=8, ra in 1usize..=8, q in 1usize..=8, rb in 1usize..=8, seed in any::<u64>()
        ) {
            let mut r = rng(seed);
            let ua = rand_cmat(&mut r, ma, ra);
            let ub = rand_cmat(&mut r, q, rb);
            let z = rand_cmat(&mut r, ma, q);
            let fast = kron_transform(&ua, &ub, &z).unwrap();
            let dense = dense_kron(&ub, &ua).adjoint() * vec_col_major(&z);
            prop_assert!((&fast - &dense).norm() < 1e-12 * (1.0 + dense.norm()));
        }
    }
}
