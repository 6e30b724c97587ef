//! Polynomial vector fields on `so(n)` coordinates and their Lie brackets.
//!
//! Fields are stored componentwise as sparse polynomials (monomial exponent
//! vector -> coefficient), which is the canonical symmetric form of the
//! constant/linear/multilinear coefficient data: symmetrization happens by
//! construction when terms accumulate into the same monomial.
//!
//! The bracket convention is `{f, g} = Dg . f - Df . g`; only spans of
//! bracket evaluations matter downstream, so the sign choice is free but
//! fixed here once.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::body::RigidBody;
use crate::error::{Error, Result};
use crate::extension::extending_direction;
use crate::num::Real;
use crate::skew::SkewMatrix;

type Monomial = Vec<u8>;

/// Sparse polynomial in `nvars` variables with exact coefficient
/// arithmetic (up to floating point). Terms are keyed by exponent vectors
/// in a BTreeMap, so iteration order and therefore every computed sum is
/// deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T: Real> {
    nvars: usize,
    terms: BTreeMap<Monomial, T>,
}

impl<T: Real> Polynomial<T> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, value: T) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(&vec![0; nvars], value);
        p
    }

    /// The variable `x_j` as a polynomial.
    pub fn variable(nvars: usize, j: usize) -> Self {
        let mut exps = vec![0u8; nvars];
        exps[j] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(&exps, T::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&e| e as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Accumulate `value` onto the monomial `exps`, dropping the term when
    /// the coefficient cancels exactly.
    pub fn add_term(&mut self, exps: &[u8], value: T) {
        debug_assert_eq!(exps.len(), self.nvars);
        if value.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps.to_vec()).or_insert_with(T::zero);
        *entry += value;
        if entry.is_zero() {
            self.terms.remove(exps);
        }
    }

    pub fn add_scaled(&mut self, other: &Self, scale: T) {
        debug_assert_eq!(self.nvars, other.nvars);
        for (m, &c) in &other.terms {
            self.add_term(m, c * scale);
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let exps: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(&exps, ca * cb);
            }
        }
        out
    }

    /// Partial derivative with respect to `x_j`.
    pub fn diff(&self, j: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, &c) in &self.terms {
            if m[j] == 0 {
                continue;
            }
            let mut exps = m.clone();
            exps[j] -= 1;
            out.add_term(&exps, c * T::of(m[j] as f64));
        }
        out
    }

    pub fn eval(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = T::zero();
        for (m, &c) in &self.terms {
            let mut term = c;
            for (j, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    term *= x[j];
                }
            }
            acc += term;
        }
        acc
    }

    pub fn max_abs_coeff(&self) -> T {
        self.terms.values().fold(T::zero(), |a, &c| if c.abs() > a { c.abs() } else { a })
    }
}

/// Vector field on `so(n)` coordinates with polynomial components.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyVectorField<T: Real> {
    nvars: usize,
    comps: Vec<Polynomial<T>>,
}

impl<T: Real> PolyVectorField<T> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, comps: vec![Polynomial::zero(nvars); nvars] }
    }

    /// Constant field with the given coordinate value.
    pub fn constant(values: &DVector<T>) -> Self {
        let nvars = values.len();
        let comps = values.iter().map(|&v| Polynomial::constant(nvars, v)).collect();
        Self { nvars, comps }
    }

    /// Constant field whose value is the given direction.
    pub fn constant_from_skew(g: &SkewMatrix<T>) -> Self {
        Self::constant(&g.coords())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn component(&self, i: usize) -> &Polynomial<T> {
        &self.comps[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut Polynomial<T> {
        &mut self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Polynomial::is_zero)
    }

    /// Largest component degree.
    pub fn degree(&self) -> usize {
        self.comps.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// Largest coefficient magnitude over all components; the field norm
    /// used in reports.
    pub fn max_abs_coeff(&self) -> T {
        self.comps.iter().fold(T::zero(), |a, p| {
            let m = p.max_abs_coeff();
            if m > a {
                m
            } else {
                a
            }
        })
    }

    pub fn eval(&self, x: &[T]) -> DVector<T> {
        DVector::from_iterator(self.nvars, self.comps.iter().map(|p| p.eval(x)))
    }

    pub fn add_scaled(&mut self, other: &Self, scale: T) {
        debug_assert_eq!(self.nvars, other.nvars);
        for (c, o) in self.comps.iter_mut().zip(&other.comps) {
            c.add_scaled(o, scale);
        }
    }

    /// Constant part of the field as a direction, together with the largest
    /// non-constant coefficient left over.
    pub fn constant_part(&self, n: usize) -> Result<(SkewMatrix<T>, T)> {
        let zero_mono = vec![0u8; self.nvars];
        let mut coords = Vec::with_capacity(self.nvars);
        let mut residue = T::zero();
        for p in &self.comps {
            coords.push(p.terms.get(&zero_mono).copied().unwrap_or_else(T::zero));
            for (m, &c) in &p.terms {
                if m.iter().any(|&e| e > 0) && c.abs() > residue {
                    residue = c.abs();
                }
            }
        }
        Ok((SkewMatrix::from_coords(n, &coords)?, residue))
    }

    /// Lie bracket `{f, g} = Dg . f - Df . g`. The result degree is at most
    /// `deg f + deg g - 1`.
    pub fn lie_bracket(&self, g: &Self) -> Result<Self> {
        if self.nvars != g.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: g.nvars });
        }
        let nv = self.nvars;
        let mut out = Self::zero(nv);
        for i in 0..nv {
            let mut acc = Polynomial::zero(nv);
            for j in 0..nv {
                let dg = g.comps[i].diff(j);
                if !dg.is_zero() && !self.comps[j].is_zero() {
                    acc.add_scaled(&dg.mul(&self.comps[j]), T::one());
                }
                let df = self.comps[i].diff(j);
                if !df.is_zero() && !g.comps[j].is_zero() {
                    acc.add_scaled(&df.mul(&g.comps[j]), -T::one());
                }
            }
            out.comps[i] = acc;
        }
        Ok(out)
    }
}

/// The drift as a degree-2 polynomial field in standard coordinates, plus
/// the damping term `-nu x` when `nu` is nonzero. Evaluation agrees with
/// [`RigidBody::euler_drift`] pointwise.
pub fn drift_field<T: Real>(body: &RigidBody<T>, nu: T) -> Result<PolyVectorField<T>> {
    let n = body.n();
    let d = body.dim();
    let basis = SkewMatrix::basis(n)?;
    let mut out = PolyVectorField::zero(d);
    let half = T::of(0.5);
    for i in 0..d {
        for j in i..d {
            let col = extending_direction(body, &basis[i], &basis[j])?.coords();
            if col.iter().all(|c| c.is_zero()) {
                continue;
            }
            let mut exps = vec![0u8; d];
            exps[i] += 1;
            exps[j] += 1;
            let scale = if i == j { half } else { T::one() };
            for (k, &c) in col.iter().enumerate() {
                out.comps[k].add_term(&exps, c * scale);
            }
        }
    }
    if !nu.is_zero() {
        for k in 0..d {
            let mut exps = vec![0u8; d];
            exps[k] = 1;
            out.comps[k].add_term(&exps, -nu);
        }
    }
    Ok(out)
}

/// Norms and comparisons behind the key double-bracket identities for a
/// pair of constant controlled directions.
#[derive(Debug, Clone)]
pub struct ExtensionRelationsReport<T: Real> {
    /// Max coefficient of `{g~, g-}`; zero for constant fields.
    pub commuting_bracket_norm: T,
    /// Max coefficient of `{g~, {g~, f}}`; zero exactly when the first
    /// direction is steady.
    pub repeated_bracket_norm: T,
    /// The constant field `{g-, {g~, f}}` as a direction.
    pub extension_value: SkewMatrix<T>,
    /// Angular deviation (sine of the angle) between `extension_value` and
    /// the extension operator applied to the same pair.
    pub angular_deviation: T,
    /// Least-squares factor `extension_value ~ factor * ext(g~, g-)`.
    pub factor: T,
}

/// Evaluate the double-bracket relations for the pair `(g_tilde, g_bar)`
/// against the undamped drift.
pub fn extension_relations<T: Real>(
    body: &RigidBody<T>,
    g_tilde: &SkewMatrix<T>,
    g_bar: &SkewMatrix<T>,
) -> Result<ExtensionRelationsReport<T>> {
    let f = drift_field(body, T::zero())?;
    let gt = PolyVectorField::constant_from_skew(g_tilde);
    let gb = PolyVectorField::constant_from_skew(g_bar);

    let commuting = gt.lie_bracket(&gb)?;
    let inner = gt.lie_bracket(&f)?;
    let repeated = gt.lie_bracket(&inner)?;
    let extending = gb.lie_bracket(&inner)?;

    let (extension_value, residue) = extending.constant_part(body.n())?;
    debug_assert!(residue.is_zero(), "double bracket of constants with the drift is constant");

    let reference = extending_direction(body, g_tilde, g_bar)?;
    let ref_sq = reference.inner(&reference)?;
    let (factor, angular_deviation) = if ref_sq.is_zero() {
        let dev = if extension_value.is_zero() { T::zero() } else { T::one() };
        (T::zero(), dev)
    } else {
        let factor = extension_value.inner(&reference)? / ref_sq;
        let val_norm = extension_value.norm();
        let dev = if val_norm.is_zero() {
            T::one()
        } else {
            extension_value
                .scaled_sum(T::one(), &reference, -factor)?
                .norm()
                / val_norm
        };
        (factor, dev)
    };

    Ok(ExtensionRelationsReport {
        commuting_bracket_norm: commuting.max_abs_coeff(),
        repeated_bracket_norm: repeated.max_abs_coeff(),
        extension_value,
        angular_deviation,
        factor,
    })
}

/// Caps and thresholds for the bracket-generating rank test.
#[derive(Debug, Clone)]
pub struct RankOptions<T: Real> {
    /// Bracket generations to build (>= 1).
    pub depth: usize,
    /// Brackets whose result degree would exceed this are pruned.
    pub degree_cap: usize,
    /// Hard error when the tree grows beyond this many fields.
    pub field_cap: usize,
    /// Relative singular-value threshold for the per-point rank.
    pub rank_tol: T,
}

impl<T: Real> Default for RankOptions<T> {
    fn default() -> Self {
        Self { depth: 4, degree_cap: 6, field_cap: 5000, rank_tol: T::of(1e-9) }
    }
}

/// Outcome of the rank probe.
#[derive(Debug, Clone)]
pub struct RankReport {
    /// Rank of the stacked evaluation matrix at each supplied point.
    pub ranks: Vec<usize>,
    /// True when the rank is full at every supplied nonzero point. The
    /// origin is reported but never counted: every bracket containing the
    /// drift vanishes there to first order, so it is diagnostic only.
    pub verdict: bool,
    /// Fields in the tree when the run stopped.
    pub fields_built: usize,
    /// Last generation actually built (early exit on full rank everywhere).
    pub depth_reached: usize,
}

/// Build the bracket tree of drift and constant controlled fields up to
/// `opts.depth` generations and report the evaluation rank at each point.
///
/// Generation zero is the drift (with damping `nu`) and the controlled
/// constants; generation `k` brackets every unordered pair with at least
/// one member from generation `k-1`. Pairs of constants and brackets whose
/// degree would exceed the cap are skipped; the field-count cap is a hard
/// error.
pub fn bracket_generating_rank<T: Real>(
    body: &RigidBody<T>,
    directions: &[SkewMatrix<T>],
    nu: T,
    points: &[SkewMatrix<T>],
    opts: &RankOptions<T>,
) -> Result<RankReport> {
    if opts.depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(Error::InvalidParameter("need at least one evaluation point".into()));
    }
    for g in directions {
        if g.n() != body.n() {
            return Err(Error::DimensionMismatch { expected: body.n(), got: g.n() });
        }
    }
    for p in points {
        if p.n() != body.n() {
            return Err(Error::DimensionMismatch { expected: body.n(), got: p.n() });
        }
    }
    let d = body.dim();

    let mut fields: Vec<PolyVectorField<T>> = Vec::new();
    let mut gen_of: Vec<usize> = Vec::new();
    fields.push(drift_field(body, nu)?);
    gen_of.push(0);
    for g in directions {
        fields.push(PolyVectorField::constant_from_skew(g));
        gen_of.push(0);
    }

    let coords: Vec<Vec<T>> = points.iter().map(|p| {
        let c = p.coords();
        c.as_slice().to_vec()
    }).collect();
    let in_verdict: Vec<bool> = points.iter().map(|p| !p.is_zero()).collect();

    // Rows of the evaluation matrix per point, extended as the tree grows.
    let mut rows: Vec<Vec<DVector<T>>> =
        coords.iter().map(|x| fields.iter().map(|f| f.eval(x)).collect()).collect();

    let mut ranks = point_ranks(&rows, d, opts.rank_tol);
    let mut depth_reached = 0;

    for generation in 1..=opts.depth {
        if full_everywhere(&ranks, &in_verdict, d) {
            break;
        }
        let prev_len = fields.len();
        let mut new_fields = Vec::new();
        for i in 0..prev_len {
            for j in (i + 1)..prev_len {
                if gen_of[i].max(gen_of[j]) != generation - 1 {
                    continue;
                }
                let (da, db) = (fields[i].degree(), fields[j].degree());
                if da == 0 && db == 0 {
                    continue; // constants commute
                }
                if da + db > opts.degree_cap + 1 {
                    continue; // pruned by the degree cap
                }
                let br = fields[i].lie_bracket(&fields[j])?;
                if br.is_zero() {
                    continue;
                }
                if fields.len() + new_fields.len() + 1 > opts.field_cap {
                    return Err(Error::ResourceCap {
                        what: "bracket-tree field count",
                        cap: opts.field_cap,
                    });
                }
                new_fields.push(br);
            }
        }
        if new_fields.is_empty() {
            break;
        }
        depth_reached = generation;
        for f in new_fields {
            for (point_rows, x) in rows.iter_mut().zip(&coords) {
                point_rows.push(f.eval(x));
            }
            fields.push(f);
            gen_of.push(generation);
        }
        ranks = point_ranks(&rows, d, opts.rank_tol);
    }

    let verdict = full_everywhere(&ranks, &in_verdict, d)
        && in_verdict.iter().any(|&v| v);
    Ok(RankReport { ranks, verdict, fields_built: fields.len(), depth_reached })
}

fn full_everywhere(ranks: &[usize], in_verdict: &[bool], d: usize) -> bool {
    ranks.iter().zip(in_verdict).all(|(&r, &v)| !v || r == d)
}

fn point_ranks<T: Real>(rows: &[Vec<DVector<T>>], d: usize, rel_tol: T) -> Vec<usize> {
    rows.iter()
        .map(|point_rows| {
            let nonzero: Vec<&DVector<T>> =
                point_rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
            if nonzero.is_empty() {
                return 0;
            }
            let m = DMatrix::from_fn(nonzero.len(), d, |i, j| nonzero[i][j]);
            let svd = m.svd(false, false);
            let sigma = &svd.singular_values;
            let sigma_max = sigma.iter().fold(T::zero(), |a, &b| if b > a { b } else { a });
            if sigma_max.is_zero() {
                0
            } else {
                sigma.iter().filter(|&&s| s > rel_tol * sigma_max).count()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_body, random_unit_skew, rng_from_seed};
    use rand::Rng;

    fn diag_body(values: &[f64]) -> RigidBody<f64> {
        RigidBody::from_eigenvalues(values).unwrap()
    }

    /// Random polynomial field of degree <= 2 with a handful of terms.
    fn random_quadratic_field(nvars: usize, rng: &mut impl Rng) -> PolyVectorField<f64> {
        let mut f = PolyVectorField::zero(nvars);
        for i in 0..nvars {
            let comp = f.component_mut(i);
            comp.add_term(&vec![0u8; nvars], rng.random_range(-1.0..1.0));
            for j in 0..nvars {
                let mut exps = vec![0u8; nvars];
                exps[j] = 1;
                comp.add_term(&exps, rng.random_range(-1.0..1.0));
                for k in j..nvars {
                    let mut exps = vec![0u8; nvars];
                    exps[j] += 1;
                    exps[k] += 1;
                    comp.add_term(&exps, rng.random_range(-1.0..1.0));
                }
            }
        }
        f
    }

    fn random_point(nvars: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..nvars).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn drift_field_vanishes_on_axes() {
        let mut rng = rng_from_seed(97);
        let body: RigidBody<f64> = random_body(4, &mut rng).unwrap();
        let f = drift_field(&body, 0.0).unwrap();
        for axis in body.axes() {
            let v = f.eval(axis.coords().as_slice());
            assert!(v.norm() <= 1e-12);
        }
    }

    #[test]
    fn drift_field_matches_pointwise_drift() {
        let mut rng = rng_from_seed(101);
        let body: RigidBody<f64> = random_body(4, &mut rng).unwrap();
        let f = drift_field(&body, 0.0).unwrap();
        let mut max_diff = 0.0f64;
        for _ in 0..100 {
            let w = random_unit_skew(4, &mut rng).unwrap();
            let via_field = f.eval(w.coords().as_slice());
            let via_matrix = body.euler_drift(&w).unwrap().coords();
            let diff = (via_field - via_matrix).norm();
            max_diff = max_diff.max(diff);
        }
        assert!(max_diff < 1e-12, "max diff {max_diff:.3e}");
    }

    #[test]
    fn damping_term_survives_at_a_steady_point() {
        let body = diag_body(&[1.0, 2.0, 3.0]);
        let f = drift_field(&body, 0.5).unwrap();
        let e12 = body.axis(1, 2).unwrap();
        let got = f.eval(e12.coords().as_slice());
        let want = e12.scale(-0.5).coords();
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn bracket_of_constant_fields_is_exactly_zero() {
        let mut rng = rng_from_seed(103);
        let a: SkewMatrix<f64> = random_unit_skew(4, &mut rng).unwrap();
        let b = random_unit_skew(4, &mut rng).unwrap();
        let fa = PolyVectorField::constant_from_skew(&a);
        let fb = PolyVectorField::constant_from_skew(&b);
        assert!(fa.lie_bracket(&fb).unwrap().is_zero());
    }

    #[test]
    fn bracket_of_constant_with_drift_is_the_directional_derivative() {
        // {g, f}(w) = I_C^{-1}[C, WG + GW] by hand differentiation of the
        // quadratic drift.
        let mut rng = rng_from_seed(107);
        let body: RigidBody<f64> = random_body(4, &mut rng).unwrap();
        let f = drift_field(&body, 0.0).unwrap();
        let g = random_unit_skew(4, &mut rng).unwrap();
        let gf = PolyVectorField::constant_from_skew(&g).lie_bracket(&f).unwrap();
        for _ in 0..10 {
            let w = random_unit_skew(4, &mut rng).unwrap();
            let got = gf.eval(w.coords().as_slice());
            let want = extending_direction(&body, &w, &g).unwrap().coords();
            assert!((got - want).norm() < 1e-13);
        }
    }

    #[test]
    fn double_bracket_reproduces_extension_operator_with_constant_factor() {
        let mut rng = rng_from_seed(109);
        let body: RigidBody<f64> = random_body(4, &mut rng).unwrap();
        let mut factors = Vec::new();
        for _ in 0..20 {
            let gt = random_unit_skew(4, &mut rng).unwrap();
            let gb = random_unit_skew(4, &mut rng).unwrap();
            let report = extension_relations(&body, &gt, &gb).unwrap();
            assert_eq!(report.commuting_bracket_norm, 0.0);
            assert!(report.angular_deviation < 1e-10,
                "angular deviation {:.3e}", report.angular_deviation);
            factors.push(report.factor);
        }
        let mean: f64 = factors.iter().sum::<f64>() / factors.len() as f64;
        for f in &factors {
            assert!((f - mean).abs() <= 1e-9 * mean.abs(), "factor spread too wide");
        }
        println!("double-bracket factor: {mean}");
    }

    #[test]
    fn repeated_bracket_vanishes_exactly_on_steady_directions() {
        let body = diag_body(&[1.0, 2.0, 3.0]);
        let steady = body.axis(1, 2).unwrap().clone();
        let other = body.axis(1, 3).unwrap().clone();
        let report = extension_relations(&body, &steady, &other).unwrap();
        assert!(report.repeated_bracket_norm < 1e-12);

        let wobbly = body
            .axis(1, 2)
            .unwrap()
            .scaled_sum(1.0, body.axis(2, 3).unwrap(), 1.0)
            .unwrap();
        let report = extension_relations(&body, &wobbly, &other).unwrap();
        assert!(report.repeated_bracket_norm > 1e-3);
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let mut rng = rng_from_seed(113);
        let f = random_quadratic_field(3, &mut rng);
        let g = random_quadratic_field(3, &mut rng);
        let mut sum = f.lie_bracket(&g).unwrap();
        sum.add_scaled(&g.lie_bracket(&f).unwrap(), 1.0);
        assert!(sum.max_abs_coeff() <= 1e-14);
    }

    #[test]
    fn bracket_satisfies_jacobi_identity() {
        let mut rng = rng_from_seed(127);
        for _ in 0..5 {
            let f = random_quadratic_field(3, &mut rng);
            let g = random_quadratic_field(3, &mut rng);
            let h = random_quadratic_field(3, &mut rng);
            let mut sum = f.lie_bracket(&g.lie_bracket(&h).unwrap()).unwrap();
            sum.add_scaled(&g.lie_bracket(&h.lie_bracket(&f).unwrap()).unwrap(), 1.0);
            sum.add_scaled(&h.lie_bracket(&f.lie_bracket(&g).unwrap()).unwrap(), 1.0);
            assert!(sum.max_abs_coeff() <= 1e-10, "jacobi residue {}", sum.max_abs_coeff());
        }
    }

    #[test]
    fn bracket_matches_central_differences() {
        let mut rng = rng_from_seed(131);
        let f = random_quadratic_field(3, &mut rng);
        let g = random_quadratic_field(3, &mut rng);
        let br = f.lie_bracket(&g).unwrap();
        let h = 1e-5;
        for _ in 0..10 {
            let x = random_point(3, &mut rng);
            let exact = br.eval(&x);
            // Directional derivatives Dg.f and Df.g by central differences.
            let fx = f.eval(&x);
            let gx = g.eval(&x);
            let shift = |base: &[f64], dir: &DVector<f64>, step: f64| -> Vec<f64> {
                base.iter().enumerate().map(|(i, &v)| v + step * dir[i]).collect()
            };
            let dg_f = (g.eval(&shift(&x, &fx, h)) - g.eval(&shift(&x, &fx, -h))) / (2.0 * h);
            let df_g = (f.eval(&shift(&x, &gx, h)) - f.eval(&shift(&x, &gx, -h))) / (2.0 * h);
            let approx = dg_f - df_g;
            assert!((exact - approx).norm() < 1e-7);
        }
    }

    #[test]
    fn bracket_degree_is_bounded() {
        let mut rng = rng_from_seed(137);
        let f = random_quadratic_field(3, &mut rng);
        let g = random_quadratic_field(3, &mut rng);
        let br = f.lie_bracket(&g).unwrap();
        assert!(br.degree() <= f.degree() + g.degree() - 1);
    }

    #[test]
    fn rank_probe_certifies_so3_with_one_generic_torque() {
        let mut rng = rng_from_seed(139);
        let body: RigidBody<f64> = random_body(3, &mut rng).unwrap();
        let g = random_unit_skew(3, &mut rng).unwrap();
        let points: Vec<SkewMatrix<f64>> =
            (0..5).map(|_| random_unit_skew(3, &mut rng).unwrap()).collect();
        let opts = RankOptions { depth: 4, ..RankOptions::default() };
        let report = bracket_generating_rank(&body, &[g], 0.0, &points, &opts).unwrap();
        assert!(report.verdict, "ranks {:?}", report.ranks);
        assert!(report.ranks.iter().all(|&r| r == 3));
    }

    #[test]
    fn rank_probe_records_principal_axis_direction() {
        // A principal axis is not generic; the outcome is recorded, not
        // asserted.
        let body = diag_body(&[1.0, 2.0, 3.0]);
        let mut rng = rng_from_seed(149);
        let points: Vec<SkewMatrix<f64>> =
            (0..5).map(|_| random_unit_skew(3, &mut rng).unwrap()).collect();
        let opts = RankOptions { depth: 4, ..RankOptions::default() };
        let report = bracket_generating_rank(
            &body,
            &[body.axis(1, 2).unwrap().clone()],
            0.0,
            &points,
            &opts,
        )
        .unwrap();
        println!(
            "principal-axis torque ranks: {:?} (verdict {})",
            report.ranks, report.verdict
        );
    }

    #[test]
    fn rank_probe_certifies_so4_and_so5() {
        let mut rng = rng_from_seed(151);
        for (n, depth) in [(4usize, 4usize), (5, 5)] {
            let body: RigidBody<f64> = random_body(n, &mut rng).unwrap();
            let g = random_unit_skew(n, &mut rng).unwrap();
            let points: Vec<SkewMatrix<f64>> =
                (0..5).map(|_| random_unit_skew(n, &mut rng).unwrap()).collect();
            let opts = RankOptions { depth, ..RankOptions::default() };
            let report = bracket_generating_rank(&body, &[g], 0.0, &points, &opts).unwrap();
            let d = n * (n - 1) / 2;
            assert!(report.verdict, "n={n}: ranks {:?}", report.ranks);
            assert!(report.ranks.iter().all(|&r| r == d));
        }
    }

    #[test]
    fn origin_is_diagnostic_only() {
        let mut rng = rng_from_seed(157);
        let body: RigidBody<f64> = random_body(3, &mut rng).unwrap();
        let g = random_unit_skew(3, &mut rng).unwrap();
        let mut points: Vec<SkewMatrix<f64>> =
            (0..2).map(|_| random_unit_skew(3, &mut rng).unwrap()).collect();
        points.push(SkewMatrix::zeros(3).unwrap());
        let opts = RankOptions { depth: 4, ..RankOptions::default() };
        let report = bracket_generating_rank(&body, &[g], 0.0, &points, &opts).unwrap();
        assert_eq!(report.ranks.len(), 3);
        // Verdict ignores whatever rank the origin row reports.
        assert!(report.verdict);
    }

    #[test]
    fn field_cap_is_a_hard_error() {
        let mut rng = rng_from_seed(163);
        let body: RigidBody<f64> = random_body(3, &mut rng).unwrap();
        let g = random_unit_skew(3, &mut rng).unwrap();
        let points = vec![random_unit_skew(3, &mut rng).unwrap()];
        // Cap below what generation 1 needs: the tree starts at two fields
        // and the first bracket pushes it over.
        let opts = RankOptions { depth: 6, field_cap: 2, ..RankOptions::default() };
        match bracket_generating_rank(&body, &[g], 0.0, &points, &opts) {
            Err(Error::ResourceCap { cap: 2, .. }) => {}
            other => panic!("expected resource-cap error, got {other:?}"),
        }
    }
}
