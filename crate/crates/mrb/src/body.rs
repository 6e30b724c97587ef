//! Inertia data and the free drift of the n-dimensional rigid body.
//!
//! A body is described by a symmetric positive-definite matrix `C` with
//! pairwise distinct eigenvalues (the genericity condition; violating it is
//! a construction error). Writing `C = S D S^T` with `D = diag(I_1 < ... <
//! I_n)`, the conjugated basis elements `W(r,s) = S E(r,s) S^T` are the
//! principal axes: eigenvectors of the inertia operator
//! `I_C: W -> WC + CW` with eigenvalues `I_r + I_s`.
//!
//! The free motion is `dW/dt = I_C^{-1}[C, W^2]`, which also equals
//! `I_C^{-1}[I_C W, W]`; principal axes are equilibria. A direction `G` is
//! *steady* when `[C, G^2] = 0`; for `n = 3` steady directions and principal
//! axes coincide, while from `n = 4` on the steady set is strictly larger.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::skew::{algebra_dim, pair_index, SkewMatrix};

/// Symmetry tolerance for the inertia parameter matrix, relative to its norm.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Default minimum gap between consecutive eigenvalues.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Inertia data: the matrix `C`, its eigendecomposition and the cached
/// principal axes. Immutable after construction.
#[derive(Debug, Clone)]
pub struct RigidBody<T: Real> {
    n: usize,
    c: DMatrix<T>,
    rotation: DMatrix<T>,
    eigenvalues: Vec<T>,
    axes: Vec<SkewMatrix<T>>,
    diagonal: bool,
}

impl<T: Real> RigidBody<T> {
    /// Build a body from a symmetric matrix with the default eigenvalue gap
    /// tolerance.
    pub fn new(c: &DMatrix<T>) -> Result<Self> {
        Self::with_gap_tol(c, T::of(DEFAULT_GAP_TOL))
    }

    /// Build a body, rejecting spectra whose minimum eigenvalue gap is at or
    /// below `gap_tol`.
    pub fn with_gap_tol(c: &DMatrix<T>, gap_tol: T) -> Result<Self> {
        let n = c.nrows();
        if c.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "inertia matrix must be square, got {}x{}",
                n,
                c.ncols()
            )));
        }
        if n < crate::skew::MIN_SIZE {
            return Err(Error::InvalidParameter(format!(
                "matrix size n = {n} below minimum {}",
                crate::skew::MIN_SIZE
            )));
        }
        let scale = c.norm().as_f64().max(1.0);
        let asym = (c - c.transpose()).norm().as_f64();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric { deviation: asym, tol: SYMMETRY_TOL });
        }
        // Exactly symmetric copy; all later exactness arguments rely on it.
        let half = T::of(0.5);
        let mut sym = DMatrix::zeros(n, n);
        for i in 0..n {
            sym[(i, i)] = c[(i, i)];
            for j in (i + 1)..n {
                let v = (c[(i, j)] + c[(j, i)]) * half;
                sym[(i, j)] = v;
                sym[(j, i)] = v;
            }
        }

        let eig = sym.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let eigenvalues: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut rotation = DMatrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(src).clone_owned();
            // Deterministic sign: first entry of visible magnitude positive.
            if let Some(lead) = v.iter().find(|x| x.abs().as_f64() > 1e-12) {
                if *lead < T::zero() {
                    v = -v;
                }
            }
            rotation.set_column(col, &v);
        }

        check_spectrum(&eigenvalues, gap_tol)?;

        let diagonal = is_diagonal(&sym);
        let body = Self::assemble(n, sym, rotation, eigenvalues, diagonal)?;

        let rebuilt = body.rotation.clone()
            * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(body.eigenvalues.clone()))
            * body.rotation.transpose();
        let err = (&rebuilt - &body.c).norm().as_f64();
        if err > 1e-10 * scale {
            return Err(Error::InvalidParameter(format!(
                "eigendecomposition failed to reproduce C: residual {err:.3e}"
            )));
        }
        Ok(body)
    }

    /// Diagonal body from a list of eigenvalues. Values are sorted
    /// ascending, `C = diag(values)` and the frame is exactly the identity.
    pub fn from_eigenvalues(values: &[T]) -> Result<Self> {
        Self::from_eigenvalues_with_gap_tol(values, T::of(DEFAULT_GAP_TOL))
    }

    /// [`RigidBody::from_eigenvalues`] with an explicit gap tolerance.
    pub fn from_eigenvalues_with_gap_tol(values: &[T], gap_tol: T) -> Result<Self> {
        let n = values.len();
        if n < crate::skew::MIN_SIZE {
            return Err(Error::InvalidParameter(format!(
                "need at least {} eigenvalues, got {n}",
                crate::skew::MIN_SIZE
            )));
        }
        let mut eigenvalues = values.to_vec();
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
        check_spectrum(&eigenvalues, gap_tol)?;
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eigenvalues.clone()));
        let rotation = DMatrix::identity(n, n);
        Self::assemble(n, c, rotation, eigenvalues, true)
    }

    fn assemble(
        n: usize,
        c: DMatrix<T>,
        rotation: DMatrix<T>,
        eigenvalues: Vec<T>,
        diagonal: bool,
    ) -> Result<Self> {
        let mut axes = Vec::with_capacity(algebra_dim(n));
        for e in SkewMatrix::basis(n)? {
            if diagonal {
                axes.push(e);
            } else {
                axes.push(e.conjugate_unchecked(&rotation));
            }
        }
        Ok(Self { n, c, rotation, eigenvalues, axes, diagonal })
    }

    /// Matrix size `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension `n(n-1)/2` of the algebra.
    pub fn dim(&self) -> usize {
        algebra_dim(self.n)
    }

    /// The (exactly symmetric) inertia parameter matrix.
    pub fn c_matrix(&self) -> &DMatrix<T> {
        &self.c
    }

    /// Orthogonal eigenvector frame with deterministic column signs.
    pub fn rotation(&self) -> &DMatrix<T> {
        &self.rotation
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Eigenvalue of the inertia operator on the axis `(r,s)` (1-based):
    /// `I_r + I_s`.
    pub fn inertia_eigenvalue(&self, r: usize, s: usize) -> Result<T> {
        pair_index(r, s, self.n)?;
        Ok(self.eigenvalues[r - 1] + self.eigenvalues[s - 1])
    }

    /// Principal axis for the 1-based pair `(r,s)`, `r < s`.
    pub fn axis(&self, r: usize, s: usize) -> Result<&SkewMatrix<T>> {
        Ok(&self.axes[pair_index(r, s, self.n)?])
    }

    /// All principal axes in lexicographic pair order.
    pub fn axes(&self) -> &[SkewMatrix<T>] {
        &self.axes
    }

    /// True when the body was built from eigenvalues directly (frame is the
    /// identity and the axes are the standard basis).
    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    fn check_same_n(&self, w: &SkewMatrix<T>) -> Result<()> {
        if w.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: w.n() });
        }
        Ok(())
    }

    /// Inertia operator: angular velocity to angular momentum,
    /// `M = W C + C W`.
    pub fn inertia_apply(&self, w: &SkewMatrix<T>) -> Result<SkewMatrix<T>> {
        self.check_same_n(w)?;
        let m = w.matrix() * &self.c + &self.c * w.matrix();
        Ok(SkewMatrix::from_skew_unchecked(m))
    }

    /// Inverse of the inertia operator, computed in the spectral frame:
    /// conjugate into eigencoordinates, divide the `(r,s)` entry by
    /// `I_r + I_s`, conjugate back. Well defined because the spectrum is
    /// strictly positive.
    pub fn inertia_inverse(&self, m: &SkewMatrix<T>) -> Result<SkewMatrix<T>> {
        self.check_same_n(m)?;
        if self.diagonal {
            Ok(self.divide_by_inertia(m))
        } else {
            let st = self.rotation.transpose();
            let in_frame = m.conjugate_unchecked(&st);
            let scaled = self.divide_by_inertia(&in_frame);
            Ok(scaled.conjugate_unchecked(&self.rotation))
        }
    }

    fn divide_by_inertia(&self, m: &SkewMatrix<T>) -> SkewMatrix<T> {
        let n = self.n;
        let mut out = DMatrix::zeros(n, n);
        for r in 0..n {
            for s in (r + 1)..n {
                let v = m.matrix()[(r, s)] / (self.eigenvalues[r] + self.eigenvalues[s]);
                out[(r, s)] = v;
                out[(s, r)] = -v;
            }
        }
        SkewMatrix::from_skew_unchecked(out)
    }

    /// Free drift `I_C^{-1}[C, W^2]` evaluated at `w`.
    pub fn euler_drift(&self, w: &SkewMatrix<T>) -> Result<SkewMatrix<T>> {
        self.check_same_n(w)?;
        self.inertia_inverse(&self.commutator_with_c(&(w.matrix() * w.matrix())))
    }

    /// `[C, P]` for a symmetric `P`; exactly skew because both factors are
    /// exactly symmetric.
    fn commutator_with_c(&self, p: &DMatrix<T>) -> SkewMatrix<T> {
        SkewMatrix::from_skew_unchecked(&self.c * p - p * &self.c)
    }

    /// Frobenius norm of `[C, G^2]`: zero (up to roundoff) exactly on the
    /// steady directions of the free motion.
    pub fn steady_residual(&self, g: &SkewMatrix<T>) -> Result<T> {
        self.check_same_n(g)?;
        Ok(self.commutator_with_c(&(g.matrix() * g.matrix())).norm())
    }

    /// Principal-axis test: is `g` an eigenvector of the inertia operator?
    ///
    /// Returns the verdict together with the Rayleigh quotient
    /// `mu = <I_C g, g> / <g, g>`; the verdict is true when
    /// `|I_C g - mu g| <= tol |g|`. Rejects the zero direction.
    pub fn principal_axis(&self, g: &SkewMatrix<T>, tol: T) -> Result<(bool, T)> {
        self.check_same_n(g)?;
        let norm = g.norm();
        if norm.is_zero() {
            return Err(Error::ZeroInput);
        }
        let image = self.inertia_apply(g)?;
        let mu = image.inner(g)? / g.inner(g)?;
        let residual = image.scaled_sum(T::one(), g, -mu)?.norm();
        Ok((residual <= tol * norm, mu))
    }
}

fn check_spectrum<T: Real>(eigenvalues: &[T], gap_tol: T) -> Result<()> {
    for (i, &v) in eigenvalues.iter().enumerate() {
        if v <= T::zero() {
            return Err(Error::NonPositiveEigenvalue { index: i + 1, value: v.as_f64() });
        }
    }
    for i in 0..eigenvalues.len() - 1 {
        let gap = eigenvalues[i + 1] - eigenvalues[i];
        if gap <= gap_tol {
            return Err(Error::DegenerateSpectrum {
                i: i + 1,
                j: i + 2,
                a: eigenvalues[i].as_f64(),
                b: eigenvalues[i + 1].as_f64(),
                gap: gap.as_f64(),
                tol: gap_tol.as_f64(),
            });
        }
    }
    Ok(())
}

fn is_diagonal<T: Real>(m: &DMatrix<T>) -> bool {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && !m[(i, j)].is_zero() {
                return false;
            }
        }
    }
    true
}
