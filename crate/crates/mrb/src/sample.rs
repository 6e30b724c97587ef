//! Seeded random generators. Every probe in the crate that involves
//! "generic" directions or bodies takes an explicit seed so results are
//! reproducible bit for bit.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::body::RigidBody;
use crate::error::Result;
use crate::num::Real;
use crate::skew::{algebra_dim, SkewMatrix};

/// Deterministic RNG from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random direction in `so(n)` with unit Frobenius norm: Gaussian
/// coordinates, normalized.
pub fn random_unit_skew<T: Real>(n: usize, rng: &mut impl Rng) -> Result<SkewMatrix<T>>
where
    StandardNormal: Distribution<T>,
{
    let d = algebra_dim(n);
    let coords: Vec<T> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    SkewMatrix::from_coords(n, &coords)?.normalized()
}

/// Haar-ish random orthogonal matrix: QR of a Gaussian matrix with the
/// sign of each column fixed by the corresponding diagonal entry of R.
pub fn random_orthogonal<T: Real>(n: usize, rng: &mut impl Rng) -> DMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < T::zero() {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Random valid body: eigenvalues `i + 0.4 u_i` with `u_i` uniform in
/// `[0,1)` (so gaps stay above 0.6 and the spectrum above 1), conjugated by
/// a random orthogonal frame.
pub fn random_body<T: Real>(n: usize, rng: &mut impl Rng) -> Result<RigidBody<T>>
where
    StandardNormal: Distribution<T>,
{
    let eigenvalues: Vec<T> = (1..=n)
        .map(|i| T::of(i as f64) + T::of(0.4) * T::of(rng.random::<f64>()))
        .collect();
    let s = random_orthogonal::<T>(n, rng);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eigenvalues));
    let c = &s * d * s.transpose();
    RigidBody::new(&c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = rng_from_seed(42);
        for n in [3usize, 6] {
            let q = random_orthogonal::<f64>(n, &mut rng);
            let dev = (q.transpose() * &q - DMatrix::<f64>::identity(n, n)).norm();
            assert!(dev < 1e-13, "n = {n}, deviation {dev:.3e}");
        }
    }

    #[test]
    fn random_unit_skew_has_unit_norm_and_is_deterministic() {
        let mut a_rng = rng_from_seed(7);
        let mut b_rng = rng_from_seed(7);
        let a: SkewMatrix<f64> = random_unit_skew(5, &mut a_rng).unwrap();
        let b: SkewMatrix<f64> = random_unit_skew(5, &mut b_rng).unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_body_is_valid_and_deterministic() {
        let mut rng = rng_from_seed(19);
        let body: RigidBody<f64> = random_body(4, &mut rng).unwrap();
        let ev = body.eigenvalues();
        for w in ev.windows(2) {
            assert!(w[1] - w[0] > 0.5);
        }
        assert!(ev[0] > 0.9);

        let mut rng2 = rng_from_seed(19);
        let body2: RigidBody<f64> = random_body(4, &mut rng2).unwrap();
        assert_eq!(body.c_matrix(), body2.c_matrix());
    }
}
