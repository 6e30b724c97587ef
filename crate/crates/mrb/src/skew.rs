//! Dense skew-symmetric matrices: the algebra `so(n)` that carries the
//! angular velocity, the momentum and every controlled torque direction.
//!
//! Coordinates are taken with respect to the standard basis `E(r,s)`,
//! `1 <= r < s <= n`, which has `+1` at row `r`, column `s` and `-1` at the
//! transposed position. Coordinate vectors are ordered lexicographically in
//! `(r,s)`: `(1,2), (1,3), ..., (1,n), (2,3), ...`. The basis is orthonormal
//! for the inner product `<A,B> = -tr(AB)/2`; the Frobenius norm of a matrix
//! is `sqrt(2)` times the Euclidean norm of its coordinate vector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::num::Real;

/// Smallest supported matrix size. `so(2)` is abelian and has no rigid-body
/// dynamics worth the name.
pub const MIN_SIZE: usize = 3;

/// Relative size of the discarded symmetric part above which ingesting a
/// raw matrix logs a warning.
pub const SANITIZE_WARN_TOL: f64 = 1e-10;

/// Orthogonality tolerance for conjugation matrices, `|S^T S - I|_F`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Number of coordinates of `so(n)`.
pub fn algebra_dim(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Lexicographic coordinate index of the 1-based pair `(r,s)`, `r < s`.
pub fn pair_index(r: usize, s: usize, n: usize) -> Result<usize> {
    if r < 1 || s <= r || s > n {
        return Err(Error::InvalidIndex { r, s, n });
    }
    // Pairs with first index < r come first: sum_{i=1}^{r-1} (n - i).
    Ok((r - 1) * n - r * (r - 1) / 2 + (s - r - 1))
}

/// Inverse of [`pair_index`]: the 1-based pair at coordinate `idx`.
pub fn index_pair(idx: usize, n: usize) -> Result<(usize, usize)> {
    let mut rest = idx;
    for r in 1..n {
        let row = n - r;
        if rest < row {
            return Ok((r, r + 1 + rest));
        }
        rest -= row;
    }
    Err(Error::InvalidParameter(format!(
        "coordinate index {idx} out of range for n = {n}"
    )))
}

/// Element of `so(n)`.
///
/// The skewness invariant `entries[(i,j)] == -entries[(j,i)]` holds exactly:
/// every constructor either fills both triangles from one value or takes the
/// exact skew part of its input.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix<T: Real> {
    mat: DMatrix<T>,
}

impl<T: Real> SkewMatrix<T> {
    /// The zero element of `so(n)`.
    pub fn zeros(n: usize) -> Result<Self> {
        check_size(n)?;
        Ok(Self { mat: DMatrix::zeros(n, n) })
    }

    /// Standard basis element with `+1` at `(r,s)` and `-1` at `(s,r)`,
    /// indices 1-based, `1 <= r < s <= n`.
    pub fn basis_element(r: usize, s: usize, n: usize) -> Result<Self> {
        check_size(n)?;
        if r < 1 || s <= r || s > n {
            return Err(Error::InvalidIndex { r, s, n });
        }
        let mut mat = DMatrix::zeros(n, n);
        mat[(r - 1, s - 1)] = T::one();
        mat[(s - 1, r - 1)] = -T::one();
        Ok(Self { mat })
    }

    /// All `n(n-1)/2` basis elements in lexicographic pair order.
    pub fn basis(n: usize) -> Result<Vec<Self>> {
        check_size(n)?;
        let mut out = Vec::with_capacity(algebra_dim(n));
        for r in 1..=n {
            for s in (r + 1)..=n {
                out.push(Self::basis_element(r, s, n)?);
            }
        }
        Ok(out)
    }

    /// Ingest an arbitrary square matrix, keeping its exact skew part
    /// `(A - A^T)/2`. Logs a warning when the discarded symmetric part
    /// exceeds [`SANITIZE_WARN_TOL`] relative to the matrix norm.
    pub fn from_matrix(a: &DMatrix<T>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidParameter(format!(
                "expected a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        check_size(a.nrows())?;
        let skew = skew_part(a);
        let sym_norm = (a - &skew.mat).norm().as_f64();
        let scale = a.norm().as_f64().max(1.0);
        if sym_norm > SANITIZE_WARN_TOL * scale {
            log::warn!(
                "skew-matrix ingest discarded a symmetric part of norm {sym_norm:.3e} \
                 (matrix norm {scale:.3e})"
            );
        }
        Ok(skew)
    }

    /// Wrap a matrix that is already exactly skew. Debug builds verify the
    /// claim; release builds trust the caller.
    pub(crate) fn from_skew_unchecked(mat: DMatrix<T>) -> Self {
        debug_assert!(is_exactly_skew(&mat), "matrix is not exactly skew");
        Self { mat }
    }

    /// Build from a lexicographic coordinate vector of length `n(n-1)/2`.
    pub fn from_coords(n: usize, coords: &[T]) -> Result<Self> {
        check_size(n)?;
        let d = algebra_dim(n);
        if coords.len() != d {
            return Err(Error::InvalidParameter(format!(
                "expected {d} coordinates for n = {n}, got {}",
                coords.len()
            )));
        }
        let mut mat = DMatrix::zeros(n, n);
        let mut k = 0;
        for r in 0..n {
            for s in (r + 1)..n {
                mat[(r, s)] = coords[k];
                mat[(s, r)] = -coords[k];
                k += 1;
            }
        }
        Ok(Self { mat })
    }

    /// Lexicographic coordinate vector; round-trips exactly with
    /// [`SkewMatrix::from_coords`].
    pub fn coords(&self) -> DVector<T> {
        let n = self.n();
        let mut out = DVector::zeros(algebra_dim(n));
        let mut k = 0;
        for r in 0..n {
            for s in (r + 1)..n {
                out[k] = self.mat[(r, s)];
                k += 1;
            }
        }
        out
    }

    /// Matrix size `n`.
    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    /// Dimension `n(n-1)/2` of the algebra this element lives in.
    pub fn dim(&self) -> usize {
        algebra_dim(self.n())
    }

    /// Underlying dense matrix.
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.mat
    }

    /// Frobenius norm. All documented tolerances refer to this norm.
    pub fn norm(&self) -> T {
        self.mat.norm()
    }

    /// Matrix commutator `AB - BA`. Exactly skew by the symmetry of the
    /// floating-point products involved.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other)?;
        let mat = &self.mat * &other.mat - &other.mat * &self.mat;
        Ok(Self::from_skew_unchecked(mat))
    }

    /// Trace-form inner product `-tr(AB)/2`. The standard basis is
    /// orthonormal for it, so this is the Euclidean dot product of the
    /// coordinate vectors.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_same_n(other)?;
        let n = self.n();
        let mut acc = T::zero();
        for r in 0..n {
            for s in (r + 1)..n {
                acc += self.mat[(r, s)] * other.mat[(r, s)];
            }
        }
        Ok(acc)
    }

    /// Conjugation `S A S^T` by an orthogonal matrix. The result is
    /// re-skewed to keep the invariant exact under roundoff.
    pub fn conjugate(&self, s: &DMatrix<T>) -> Result<Self> {
        self.check_same_n_raw(s)?;
        check_orthogonal(s)?;
        Ok(self.conjugate_unchecked(s))
    }

    /// Conjugation without the orthogonality check, for matrices the crate
    /// built itself (eigenvector frames).
    pub(crate) fn conjugate_unchecked(&self, s: &DMatrix<T>) -> Self {
        let raw = s * &self.mat * s.transpose();
        skew_part(&raw)
    }

    /// `self * a + other * b`.
    pub fn scaled_sum(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.check_same_n(other)?;
        Ok(Self::from_skew_unchecked(&self.mat * a + &other.mat * b))
    }

    /// `self * a`.
    pub fn scale(&self, a: T) -> Self {
        Self::from_skew_unchecked(&self.mat * a)
    }

    /// True when every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.mat.iter().all(|x| x.is_zero())
    }

    /// Unit-Frobenius-norm copy, or an error for the zero matrix.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm.is_zero() {
            return Err(Error::ZeroInput);
        }
        Ok(self.scale(T::one() / norm))
    }

    fn check_same_n(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: other.n() });
        }
        Ok(())
    }

    fn check_same_n_raw(&self, other: &DMatrix<T>) -> Result<()> {
        if other.nrows() != self.n() || other.ncols() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: other.nrows() });
        }
        Ok(())
    }
}

impl<T: Real> std::ops::Add for &SkewMatrix<T> {
    type Output = SkewMatrix<T>;
    fn add(self, rhs: Self) -> SkewMatrix<T> {
        assert_eq!(self.n(), rhs.n(), "size mismatch");
        SkewMatrix::from_skew_unchecked(&self.mat + &rhs.mat)
    }
}

impl<T: Real> std::ops::Sub for &SkewMatrix<T> {
    type Output = SkewMatrix<T>;
    fn sub(self, rhs: Self) -> SkewMatrix<T> {
        assert_eq!(self.n(), rhs.n(), "size mismatch");
        SkewMatrix::from_skew_unchecked(&self.mat - &rhs.mat)
    }
}

impl<T: Real> std::ops::Neg for &SkewMatrix<T> {
    type Output = SkewMatrix<T>;
    fn neg(self) -> SkewMatrix<T> {
        SkewMatrix::from_skew_unchecked(-&self.mat)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < MIN_SIZE {
        return Err(Error::InvalidParameter(format!(
            "matrix size n = {n} below minimum {MIN_SIZE}"
        )));
    }
    Ok(())
}

/// Exact skew part `(A - A^T)/2`, filled from the upper triangle so both
/// triangles are exact negations of each other.
fn skew_part<T: Real>(a: &DMatrix<T>) -> SkewMatrix<T> {
    let n = a.nrows();
    let half = T::of(0.5);
    let mut mat = DMatrix::zeros(n, n);
    for r in 0..n {
        for s in (r + 1)..n {
            let v = (a[(r, s)] - a[(s, r)]) * half;
            mat[(r, s)] = v;
            mat[(s, r)] = -v;
        }
    }
    SkewMatrix { mat }
}

fn is_exactly_skew<T: Real>(a: &DMatrix<T>) -> bool {
    let n = a.nrows();
    if a.ncols() != n {
        return false;
    }
    for r in 0..n {
        if !a[(r, r)].is_zero() {
            return false;
        }
        for s in (r + 1)..n {
            if a[(r, s)] != -a[(s, r)] {
                return false;
            }
        }
    }
    true
}

/// Orthogonality check `|S^T S - I|_F <= tol`.
pub fn check_orthogonal<T: Real>(s: &DMatrix<T>) -> Result<()> {
    let n = s.nrows();
    let dev = (s.transpose() * s - DMatrix::<T>::identity(n, n)).norm().as_f64();
    if dev > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal { deviation: dev, tol: ORTHOGONALITY_TOL });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{rng_from_seed, random_unit_skew};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn basis(r: usize, s: usize, n: usize) -> SkewMatrix<f64> {
        SkewMatrix::basis_element(r, s, n).unwrap()
    }

    #[test]
    fn basis_element_1_2_3_matches_spelled_out_matrix() {
        let e = basis(1, 2, 3);
        let expected =
            DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(e.matrix(), &expected);
    }

    #[test]
    fn basis_element_rejects_bad_indices() {
        assert!(matches!(
            SkewMatrix::<f64>::basis_element(2, 2, 3),
            Err(Error::InvalidIndex { r: 2, s: 2, n: 3 })
        ));
        assert!(SkewMatrix::<f64>::basis_element(0, 1, 3).is_err());
        assert!(SkewMatrix::<f64>::basis_element(1, 4, 3).is_err());
        assert!(SkewMatrix::<f64>::basis_element(3, 2, 4).is_err());
    }

    #[test]
    fn basis_enumeration_counts_pairs() {
        assert_eq!(SkewMatrix::<f64>::basis(4).unwrap().len(), 6);
        assert_eq!(algebra_dim(8), 28);
    }

    #[test]
    fn pair_index_round_trips_for_all_sizes() {
        for n in 3..=12 {
            let mut k = 0;
            for r in 1..=n {
                for s in (r + 1)..=n {
                    assert_eq!(pair_index(r, s, n).unwrap(), k);
                    assert_eq!(index_pair(k, n).unwrap(), (r, s));
                    k += 1;
                }
            }
            assert_eq!(k, algebra_dim(n));
        }
        assert!(pair_index(2, 2, 4).is_err());
        assert!(index_pair(6, 4).is_err());
    }

    /// Oracle: plain dense-matrix arithmetic, no SkewMatrix involved.
    fn commutator_oracle(a: &SkewMatrix<f64>, b: &SkewMatrix<f64>) -> DMatrix<f64> {
        a.matrix() * b.matrix() - b.matrix() * a.matrix()
    }

    #[test]
    fn commutator_matches_matrix_oracle() {
        let e12 = basis(1, 2, 3);
        let e23 = basis(2, 3, 3);
        let got = e12.commutator(&e23).unwrap();
        assert_eq!(got.matrix(), &commutator_oracle(&e12, &e23));
        // [E12, E23] = E13 exactly (0/1 arithmetic).
        assert_eq!(got, basis(1, 3, 3));
    }

    #[test]
    fn commutator_of_element_with_itself_vanishes() {
        let mut rng = rng_from_seed(7);
        for n in [3usize, 5] {
            let a: SkewMatrix<f64> = random_unit_skew(n, &mut rng).unwrap();
            assert!(a.commutator(&a).unwrap().is_zero());
        }
    }

    #[test]
    fn commutator_of_disjoint_pairs_vanishes() {
        let a = basis(1, 2, 4);
        let b = basis(3, 4, 4);
        assert!(a.commutator(&b).unwrap().is_zero());
        assert!(commutator_oracle(&a, &b).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn commutator_rejects_size_mismatch() {
        let a = basis(1, 2, 3);
        let b = basis(1, 2, 4);
        assert!(matches!(a.commutator(&b), Err(Error::DimensionMismatch { .. })));
    }

    /// Oracle: -tr(AB)/2 via an explicit trace of the explicit product.
    fn inner_oracle(a: &SkewMatrix<f64>, b: &SkewMatrix<f64>) -> f64 {
        -0.5 * (a.matrix() * b.matrix()).trace()
    }

    #[test]
    fn inner_product_matches_trace_oracle_on_basis() {
        let e12 = basis(1, 2, 3);
        let e13 = basis(1, 3, 3);
        assert_eq!(inner_oracle(&e12, &e12), 1.0);
        assert_eq!(e12.inner(&e12).unwrap(), 1.0);
        assert_eq!(inner_oracle(&e12, &e13), 0.0);
        assert_eq!(e12.inner(&e13).unwrap(), 0.0);
    }

    #[test]
    fn inner_product_matches_trace_oracle_on_random_inputs() {
        let mut rng = rng_from_seed(11);
        for _ in 0..20 {
            let a: SkewMatrix<f64> = random_unit_skew(5, &mut rng).unwrap();
            let b = random_unit_skew(5, &mut rng).unwrap();
            let got = a.inner(&b).unwrap();
            assert!((got - inner_oracle(&a, &b)).abs() < 1e-14);
            // Symmetry of the trace form.
            assert!((got - b.inner(&a).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn basis_is_orthonormal_up_to_n_8() {
        for n in 3..=8 {
            let basis = SkewMatrix::<f64>::basis(n).unwrap();
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert_eq!(a.inner(b).unwrap(), expected, "pair ({i},{j}) for n={n}");
                }
            }
        }
    }

    #[test]
    fn conjugation_by_identity_is_identity() {
        let mut rng = rng_from_seed(3);
        let a: SkewMatrix<f64> = random_unit_skew(4, &mut rng).unwrap();
        let id = DMatrix::identity(4, 4);
        assert_eq!(a.conjugate(&id).unwrap(), a);
    }

    #[test]
    fn conjugation_preserves_inner_product_and_commutators() {
        let mut rng = rng_from_seed(5);
        for _ in 0..10 {
            let s = crate::sample::random_orthogonal::<f64>(5, &mut rng);
            let a: SkewMatrix<f64> = random_unit_skew(5, &mut rng).unwrap();
            let b = random_unit_skew(5, &mut rng).unwrap();
            let sa = a.conjugate(&s).unwrap();
            let sb = b.conjugate(&s).unwrap();
            // Orthogonal invariance of the trace form.
            assert!((sa.inner(&sb).unwrap() - a.inner(&b).unwrap()).abs() < 1e-12);
            // Conjugation is an algebra homomorphism.
            let lhs = a.commutator(&b).unwrap().conjugate(&s).unwrap();
            let rhs = sa.commutator(&sb).unwrap();
            assert!((&lhs - &rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugation_rejects_non_orthogonal_matrices() {
        let a = basis(1, 2, 3);
        let mut s = DMatrix::identity(3, 3);
        s[(0, 1)] = 0.5;
        assert!(matches!(a.conjugate(&s), Err(Error::NotOrthogonal { .. })));
    }

    #[test]
    fn ingest_takes_exact_skew_part() {
        let raw = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 2.0, 3.0, -1.0, 4.0, 5.0, -3.0, -5.0, 9.0],
        );
        let skew = SkewMatrix::from_matrix(&raw).unwrap();
        // (A - A^T)/2 entry by entry.
        assert_eq!(skew.matrix()[(0, 1)], 1.5);
        assert_eq!(skew.matrix()[(1, 0)], -1.5);
        assert_eq!(skew.matrix()[(0, 2)], 3.0);
        assert_eq!(skew.matrix()[(1, 2)], 5.0);
        for i in 0..3 {
            assert_eq!(skew.matrix()[(i, i)], 0.0);
        }
    }

    #[test]
    fn size_below_minimum_is_rejected() {
        assert!(SkewMatrix::<f64>::zeros(2).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let a = SkewMatrix::<f32>::basis_element(1, 2, 3).unwrap();
        let b = SkewMatrix::<f32>::basis_element(2, 3, 3).unwrap();
        let c = a.commutator(&b).unwrap();
        assert_eq!(c, SkewMatrix::<f32>::basis_element(1, 3, 3).unwrap());
        assert_eq!(a.inner(&a).unwrap(), 1.0f32);
    }

    proptest! {
        #[test]
        fn coords_round_trip_exactly(seed in 0u64..1000, n in 3usize..7) {
            let mut rng = rng_from_seed(seed);
            let a: SkewMatrix<f64> = random_unit_skew(n, &mut rng).unwrap();
            let coords = a.coords();
            let back = SkewMatrix::from_coords(n, coords.as_slice()).unwrap();
            prop_assert_eq!(&back, &a);
            let coords_again = back.coords();
            prop_assert_eq!(coords.as_slice(), coords_again.as_slice());
        }

        #[test]
        fn jacobi_identity_holds(seed in 0u64..1000) {
            let mut rng = rng_from_seed(seed);
            let a: SkewMatrix<f64> = random_unit_skew(4, &mut rng).unwrap();
            let b = random_unit_skew(4, &mut rng).unwrap();
            let c = random_unit_skew(4, &mut rng).unwrap();
            let t1 = a.commutator(&b.commutator(&c).unwrap()).unwrap();
            let t2 = b.commutator(&c.commutator(&a).unwrap()).unwrap();
            let t3 = c.commutator(&a.commutator(&b).unwrap()).unwrap();
            let sum = &(&t1 + &t2) + &t3;
            let bound = 1e-12 * a.norm() * b.norm() * c.norm();
            prop_assert!(sum.norm() <= bound);
        }

        #[test]
        fn linear_combinations_stay_exactly_skew(seed in 0u64..1000) {
            let mut rng = rng_from_seed(seed);
            let a: SkewMatrix<f64> = random_unit_skew(5, &mut rng).unwrap();
            let b = random_unit_skew(5, &mut rng).unwrap();
            let combo = a.scaled_sum(1.7, &b, -0.3).unwrap();
            let m = combo.matrix();
            for r in 0..5 {
                for s in 0..5 {
                    prop_assert_eq!(m[(r, s)], -m[(s, r)]);
                }
            }
        }
    }
}
