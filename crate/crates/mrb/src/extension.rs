//! The extension operator and the saturation engine.
//!
//! For two controlled torque directions `A`, `B` the double bracket of the
//! corresponding constant vector fields with the drift contributes a new
//! constant controlled direction, given by the symmetric bilinear operator
//!
//! ```text
//!     ext(A, B) = I_C^{-1} [C, AB + BA].
//! ```
//!
//! In the principal-axes basis `W(r,s)` the operator has a closed-form
//! table: `ext(W(r,s), W(r,s)) = 0`, pairs with four distinct indices map
//! to zero, and pairs sharing one index map to the axis on the remaining
//! two indices with coefficient `(I_q - I_p)/(I_p + I_q)` (signs fixed by
//! the index arrangement, see [`table_value`]).
//!
//! Iterating the operator from a seed set and collecting the span is the
//! *saturation* procedure: when the closure reaches all of `so(n)` the seed
//! set is certified as spanning, which is the computational content of the
//! two-torque controllability construction. [`saturate`] runs the plain
//! span closure; [`saturate_constrained`] additionally requires one member
//! of every evaluated pair to be a steady direction, which is the form the
//! damped-case results need.

use nalgebra::{DMatrix, DVector};

use crate::body::RigidBody;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::skew::{index_pair, SkewMatrix};

/// Extension operator `I_C^{-1}[C, AB + BA]`.
///
/// Symmetric in its arguments (exactly: the symmetrized product makes both
/// orders bit-identical) and bilinear.
pub fn extending_direction<T: Real>(
    body: &RigidBody<T>,
    a: &SkewMatrix<T>,
    b: &SkewMatrix<T>,
) -> Result<SkewMatrix<T>> {
    if a.n() != body.n() {
        return Err(Error::DimensionMismatch { expected: body.n(), got: a.n() });
    }
    if b.n() != body.n() {
        return Err(Error::DimensionMismatch { expected: body.n(), got: b.n() });
    }
    let prod = a.matrix() * b.matrix() + b.matrix() * a.matrix();
    let c = body.c_matrix();
    let bracket = SkewMatrix::from_skew_unchecked(c * &prod - &prod * c);
    body.inertia_inverse(&bracket)
}

/// Closed-form value of the extension operator on two principal axes,
/// identified by their 1-based index pairs.
///
/// Zero when the pairs coincide or are disjoint; otherwise, with shared
/// index `t`, remaining indices `p` (first pair) and `q` (second pair),
/// the value is `s (I_q - I_p)/(I_p + I_q)` times the axis on `{p,q}`,
/// where the sign `s` flips once for each argument whose stored order puts
/// the shared index second and once more when `p > q`.
pub fn table_value<T: Real>(
    body: &RigidBody<T>,
    first: (usize, usize),
    second: (usize, usize),
) -> Result<SkewMatrix<T>> {
    let n = body.n();
    // Validate both pairs.
    crate::skew::pair_index(first.0, first.1, n)?;
    crate::skew::pair_index(second.0, second.1, n)?;
    if first == second {
        return SkewMatrix::zeros(n);
    }
    let shares = |x: usize, (a, b): (usize, usize)| x == a || x == b;
    let shared: Vec<usize> = [first.0, first.1]
        .into_iter()
        .filter(|&x| shares(x, second))
        .collect();
    if shared.is_empty() {
        return SkewMatrix::zeros(n);
    }
    debug_assert_eq!(shared.len(), 1, "distinct pairs share at most one index");
    let t = shared[0];
    let p = if first.0 == t { first.1 } else { first.0 };
    let q = if second.0 == t { second.1 } else { second.0 };
    let mut sign = T::one();
    if t > p {
        sign = -sign;
    }
    if t > q {
        sign = -sign;
    }
    if p > q {
        sign = -sign;
    }
    let ev = body.eigenvalues();
    let coeff = sign * (ev[q - 1] - ev[p - 1]) / (ev[p - 1] + ev[q - 1]);
    Ok(body.axis(p.min(q), p.max(q))?.scale(coeff))
}

/// Result of sweeping the closed-form table against the numeric operator.
#[derive(Debug, Clone)]
pub struct TableReport<T: Real> {
    /// Largest Frobenius-norm deviation over all ordered axis pairs.
    pub max_deviation: T,
    /// Number of ordered pairs checked (`d^2`).
    pub pairs_checked: usize,
}

/// Compare the numeric extension operator against [`table_value`] on every
/// ordered pair of principal axes.
pub fn table_deviation<T: Real>(body: &RigidBody<T>) -> Result<TableReport<T>> {
    let n = body.n();
    let d = body.dim();
    let mut max_dev = T::zero();
    for i in 0..d {
        for j in 0..d {
            let pi = index_pair(i, n)?;
            let pj = index_pair(j, n)?;
            let numeric = extending_direction(body, body.axis(pi.0, pi.1)?, body.axis(pj.0, pj.1)?)?;
            let expected = table_value(body, pi, pj)?;
            let dev = (&numeric - &expected).norm();
            if dev > max_dev {
                max_dev = dev;
            }
        }
    }
    Ok(TableReport { max_deviation: max_dev, pairs_checked: d * d })
}

/// The canonical two-torque seed pair: the principal axis on `(1,2)` and
/// the sum of the consecutive axes `(2,3) + (3,4) + ... + (n-1,n)`.
/// Iterating the extension operator from these two directions spans all of
/// `so(n)`.
pub fn two_torque_seeds<T: Real>(body: &RigidBody<T>) -> Result<(SkewMatrix<T>, SkewMatrix<T>)> {
    let n = body.n();
    let g1 = body.axis(1, 2)?.clone();
    let mut g2 = SkewMatrix::zeros(n)?;
    for i in 2..n {
        g2 = g2.scaled_sum(T::one(), body.axis(i, i + 1)?, T::one())?;
    }
    Ok((g1, g2))
}

/// The explicit chain of new directions generated from the two-torque
/// seeds: step `i` applies the extension operator to the previous chain
/// element and the second seed, then removes the components along the
/// directions already available (seeds and earlier chain elements), which
/// is what the extension adds on top of the existing controlled span.
///
/// The `i`-th element (for `i = 3..n`, stored at position `i - 3`) is
/// parallel to the principal axis on `(1,i)`; each is returned with unit
/// Frobenius norm.
pub fn principal_axis_chain<T: Real>(body: &RigidBody<T>) -> Result<Vec<SkewMatrix<T>>> {
    let n = body.n();
    let (g1, g2) = two_torque_seeds(body)?;
    let mut available: Vec<DVector<T>> = Vec::new();
    let push_available = |v: DVector<T>, store: &mut Vec<DVector<T>>| {
        let mut w = v;
        for q in store.iter() {
            let proj = q.dot(&w);
            w.axpy(-proj, q, T::one());
        }
        let norm = w.norm();
        if norm > T::of(1e-14) {
            store.push(w / norm);
        }
    };
    push_available(g1.coords(), &mut available);
    push_available(g2.coords(), &mut available);

    let mut chain = Vec::with_capacity(n.saturating_sub(2));
    let mut prev = g1;
    for i in 3..=n {
        let raw = extending_direction(body, &prev, &g2)?;
        let mut w = raw.coords();
        for q in available.iter() {
            let proj = q.dot(&w);
            w.axpy(-proj, q, T::one());
        }
        let norm = w.norm();
        if norm.as_f64() < 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "chain collapsed at step {i}: no new direction left after reduction"
            )));
        }
        let unit = &w / norm;
        available.push(unit.clone());
        let dir = SkewMatrix::from_coords(n, unit.as_slice())?.normalized()?;
        chain.push(dir.clone());
        prev = dir;
    }
    Ok(chain)
}

/// Tolerances and limits for the saturation engine.
#[derive(Debug, Clone)]
pub struct SaturateOptions<T: Real> {
    /// Hard bound on the number of closure rounds.
    pub max_rounds: usize,
    /// Relative singular-value threshold for rank decisions: singular
    /// values below `rank_tol * sigma_max` count as zero.
    pub rank_tol: T,
    /// Steadiness tolerance for the constrained variant; a direction `G`
    /// passes when `|[C, G^2]| <= steady_tol * |G|^2 * |C|`.
    pub steady_tol: T,
}

impl<T: Real> Default for SaturateOptions<T> {
    fn default() -> Self {
        Self { max_rounds: 16, rank_tol: T::of(1e-9), steady_tol: T::of(1e-9) }
    }
}

/// One closure round: which unit directions were added and the span
/// dimension after adjoining them.
#[derive(Debug, Clone)]
pub struct SaturationRound<T: Real> {
    /// 1-based round index.
    pub index: usize,
    /// Orthonormal complement directions gained this round, unit Frobenius
    /// norm each.
    pub added: Vec<SkewMatrix<T>>,
    /// Span dimension after this round.
    pub span_dim: usize,
}

/// Trace of a saturation run.
#[derive(Debug, Clone)]
pub struct SaturationResult<T: Real> {
    /// Span dimension of the seed set itself.
    pub initial_dim: usize,
    /// Closure rounds in order.
    pub rounds: Vec<SaturationRound<T>>,
    /// Span dimension when the run stopped.
    pub final_dim: usize,
    /// True exactly when the span reached all of `so(n)`.
    pub certificate: bool,
    /// Provenance label per seed.
    pub seed_labels: Vec<String>,
}

impl<T: Real> SaturationResult<T> {
    /// Number of rounds actually executed.
    pub fn rounds_used(&self) -> usize {
        self.rounds.len()
    }
}

/// Full pairwise closure: evaluate the extension operator on every
/// unordered pair of available directions, adjoining each product that a
/// singular-value rank decision certifies as a new direction; adjoined
/// directions are pairable immediately. A round ends when every pair has
/// been evaluated; the run stops when the span stops growing or reaches
/// `n(n-1)/2`. Deterministic: pairs are processed in a fixed order.
pub fn saturate<T: Real>(
    body: &RigidBody<T>,
    seeds: &[SkewMatrix<T>],
    opts: &SaturateOptions<T>,
) -> Result<SaturationResult<T>> {
    let labels: Vec<String> = (0..seeds.len()).map(|i| format!("seed-{i}")).collect();
    saturate_with_labels(body, seeds, &labels, opts)
}

/// [`saturate`] with caller-provided seed provenance labels.
pub fn saturate_with_labels<T: Real>(
    body: &RigidBody<T>,
    seeds: &[SkewMatrix<T>],
    labels: &[String],
    opts: &SaturateOptions<T>,
) -> Result<SaturationResult<T>> {
    run_saturation(body, seeds, None, labels, opts)
}

/// Steady-constrained closure: a pair contributes only if at least one of
/// its members is steady. Steady candidates are the seeds flagged (and
/// verified) steady, principal axes lying in the current span, and earlier
/// extensions that pass the steady test. Requires at least one verified
/// steady seed.
pub fn saturate_constrained<T: Real>(
    body: &RigidBody<T>,
    seeds: &[SkewMatrix<T>],
    steady_flags: &[bool],
    opts: &SaturateOptions<T>,
) -> Result<SaturationResult<T>> {
    let labels: Vec<String> = (0..seeds.len()).map(|i| format!("seed-{i}")).collect();
    saturate_constrained_with_labels(body, seeds, steady_flags, &labels, opts)
}

/// [`saturate_constrained`] with caller-provided seed labels.
pub fn saturate_constrained_with_labels<T: Real>(
    body: &RigidBody<T>,
    seeds: &[SkewMatrix<T>],
    steady_flags: &[bool],
    labels: &[String],
    opts: &SaturateOptions<T>,
) -> Result<SaturationResult<T>> {
    if steady_flags.len() != seeds.len() {
        return Err(Error::InvalidParameter(format!(
            "got {} steady flags for {} seeds",
            steady_flags.len(),
            seeds.len()
        )));
    }
    run_saturation(body, seeds, Some(steady_flags), labels, opts)
}

fn run_saturation<T: Real>(
    body: &RigidBody<T>,
    seeds: &[SkewMatrix<T>],
    steady_flags: Option<&[bool]>,
    labels: &[String],
    opts: &SaturateOptions<T>,
) -> Result<SaturationResult<T>> {
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    if labels.len() != seeds.len() {
        return Err(Error::InvalidParameter(format!(
            "got {} labels for {} seeds",
            labels.len(),
            seeds.len()
        )));
    }
    if opts.max_rounds == 0 {
        return Err(Error::InvalidParameter("max_rounds must be at least 1".into()));
    }
    for s in seeds {
        if s.n() != body.n() {
            return Err(Error::DimensionMismatch { expected: body.n(), got: s.n() });
        }
    }
    let constrained = steady_flags.is_some();

    // Indices (into the pool) of verified steady seeds; the constrained
    // variant needs at least one to start from.
    let steady_seed_idx: Vec<usize> = match steady_flags {
        None => Vec::new(),
        Some(flags) => {
            let mut out = Vec::new();
            for (i, (seed, &flag)) in seeds.iter().zip(flags).enumerate() {
                if !flag {
                    continue;
                }
                if is_steady(body, seed, opts.steady_tol) {
                    out.push(i);
                } else {
                    log::warn!(
                        "seed flagged steady fails the steady test (residual {:.3e}); ignored",
                        body.steady_residual(seed).unwrap_or(T::zero()).as_f64()
                    );
                }
            }
            if out.is_empty() {
                return Err(Error::NoSteadySeed);
            }
            out
        }
    };

    let n = body.n();
    let d = body.dim();

    // Pool of pairable directions: the seeds, then every extension in the
    // order it was adjoined.
    let mut pool: Vec<SkewMatrix<T>> = seeds.to_vec();

    // Orthonormal span basis in coordinates, grown one direction at a time;
    // each candidate is admitted by a singular-value rank check against the
    // current basis.
    let mut basis: Vec<DVector<T>> = Vec::new();
    for seed in seeds {
        admit(&mut basis, seed.coords(), opts.rank_tol);
    }
    let initial_dim = basis.len();

    // Steadiness of pool members, memoized. Flagged-but-failing seeds were
    // warned about above and count as non-steady.
    let mut steady: Vec<bool> = seeds
        .iter()
        .map(|s| constrained && is_steady(body, s, opts.steady_tol))
        .collect();
    for &i in &steady_seed_idx {
        steady[i] = true;
    }

    let mut rounds = Vec::new();
    let mut evaluated = std::collections::HashSet::<(usize, usize)>::new();

    for round in 1..=opts.max_rounds {
        if basis.len() == d {
            break;
        }

        // The constrained variant may also pair against principal axes that
        // entered the current span since the last round.
        if constrained {
            for axis in body.axes() {
                let coords = axis.coords();
                if distance_to_span(&basis, &coords) <= opts.steady_tol * axis.norm()
                    && !pool.iter().any(|p| p == axis)
                {
                    pool.push(axis.clone());
                    steady.push(true);
                }
            }
        }

        let dim_before = basis.len();
        let mut added = Vec::new();
        let mut swept = 0usize;

        // Sweep every not-yet-evaluated pair; directions adjoined during
        // the sweep join the pool immediately and their pairs are processed
        // in the same round. Processing order is fixed, so the run is
        // deterministic.
        let mut i = 0;
        while i < pool.len() {
            let mut j = i;
            while j < pool.len() {
                if basis.len() == d {
                    break;
                }
                if !evaluated.contains(&(i, j)) {
                    let allowed = !constrained || steady[i] || steady[j];
                    evaluated.insert((i, j));
                    swept += 1;
                    if allowed {
                        let product = extending_direction(body, &pool[i], &pool[j])?;
                        if !product.is_zero()
                            && admit(&mut basis, product.coords(), opts.rank_tol)
                        {
                            let unit = product.normalized()?;
                            added.push(unit.clone());
                            steady.push(constrained && is_steady(body, &unit, opts.steady_tol));
                            pool.push(unit);
                        }
                    }
                }
                j += 1;
            }
            i += 1;
        }

        if swept == 0 {
            break; // nothing left to evaluate: stalled before this round
        }
        let span_dim = basis.len();
        rounds.push(SaturationRound { index: round, added, span_dim });
        if span_dim == d || span_dim == dim_before {
            break;
        }
    }

    let final_dim = basis.len();
    Ok(SaturationResult {
        initial_dim,
        rounds,
        final_dim,
        certificate: final_dim == d,
        seed_labels: labels.to_vec(),
    })
}

/// Adjoin `candidate` to the orthonormal `basis` when the singular values
/// of `[basis | candidate]` say it carries a new direction: the smallest
/// one must clear `rel_tol` times the largest. Returns whether it was
/// admitted; on admission the stored column is the normalized residual.
fn admit<T: Real>(basis: &mut Vec<DVector<T>>, candidate: DVector<T>, rel_tol: T) -> bool {
    if candidate.iter().all(|x| x.is_zero()) {
        return false;
    }
    let mut stacked = basis.clone();
    stacked.push(candidate.clone());
    let m = DMatrix::from_columns(&stacked);
    let svd = m.svd(false, false);
    let sigma = &svd.singular_values;
    let order = descending_order(sigma);
    let sigma_max = sigma[order[0]];
    if sigma_max.is_zero() {
        return false;
    }
    let rank = order.iter().filter(|&&k| sigma[k] > rel_tol * sigma_max).count();
    if rank <= basis.len() {
        return false;
    }
    let mut residual = candidate;
    for q in basis.iter() {
        let proj = q.dot(&residual);
        residual.axpy(-proj, q, T::one());
    }
    let norm = residual.norm();
    debug_assert!(norm > T::zero());
    basis.push(residual / norm);
    true
}

/// Steadiness test scaled as residual vs `|G|^2 |C|`.
pub fn is_steady<T: Real>(body: &RigidBody<T>, g: &SkewMatrix<T>, steady_tol: T) -> bool {
    match body.steady_residual(g) {
        Ok(res) => {
            let scale = g.norm() * g.norm() * body.c_matrix().norm();
            res <= steady_tol * scale
        }
        Err(_) => false,
    }
}

/// Singular-value indices sorted by decreasing magnitude; nalgebra does not
/// promise an order, so impose one.
fn descending_order<T: Real>(sigma: &DVector<T>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap());
    order
}

/// Distance from `v` to the span of the orthonormal set `basis`.
fn distance_to_span<T: Real>(basis: &[DVector<T>], v: &DVector<T>) -> T {
    let mut w = v.clone();
    for q in basis {
        let proj = q.dot(&w);
        w.axpy(-proj, q, T::one());
    }
    // Coordinate 2-norm and Frobenius norm differ by sqrt(2) on both sides
    // of the comparison, so either convention works; keep Frobenius.
    w.norm() * T::of(std::f64::consts::SQRT_2)
}
