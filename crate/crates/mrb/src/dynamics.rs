//! Time integration of the controlled, damped rotation
//!
//! ```text
//!     dW/dt = I_C^{-1}[C, W^2] - nu W + sum_i u_i(t) G^i
//! ```
//!
//! with piecewise-constant controls on a uniform segment grid, by classical
//! fixed-step fourth-order Runge-Kutta on the coordinate representation.
//! Fixed step keeps trajectories reproducible and makes the order of the
//! method directly checkable; step-size guidance is `dt <= 1e-3 / |W0|`.
//!
//! For the free body (`nu = 0`, `u = 0`) the energy `<I_C W, W>` and the
//! traces of even momentum powers are first integrals (the momentum evolves
//! isospectrally), which [`conservation_report`] turns into a drift
//! diagnostic.

use nalgebra::DVector;

use crate::body::RigidBody;
use crate::error::{Error, Result};
use crate::extension::extending_direction;
use crate::num::Real;
use crate::skew::SkewMatrix;

/// Piecewise-constant control values on a uniform segment grid:
/// `values[segment][control]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule<T: Real> {
    values: Vec<Vec<T>>,
    controls: usize,
}

impl<T: Real> Schedule<T> {
    /// All-zero schedule.
    pub fn zero(segments: usize, controls: usize) -> Result<Self> {
        Self::from_values(vec![vec![T::zero(); controls]; segments.max(1)], controls)
    }

    /// Validate and wrap explicit control values.
    pub fn from_values(values: Vec<Vec<T>>, controls: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("schedule needs at least one segment".into()));
        }
        for (s, row) in values.iter().enumerate() {
            if row.len() != controls {
                return Err(Error::InvalidParameter(format!(
                    "segment {s} has {} control values, expected {controls}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "segment {s} contains a non-finite control value"
                )));
            }
        }
        Ok(Self { values, controls })
    }

    pub fn segments(&self) -> usize {
        self.values.len()
    }

    pub fn controls(&self) -> usize {
        self.controls
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }
}

/// Body, damping, controlled directions and a control schedule.
#[derive(Debug, Clone)]
pub struct ControlledSystem<T: Real> {
    body: RigidBody<T>,
    nu: T,
    directions: Vec<SkewMatrix<T>>,
    schedule: Schedule<T>,
}

impl<T: Real> ControlledSystem<T> {
    pub fn new(
        body: RigidBody<T>,
        nu: T,
        directions: Vec<SkewMatrix<T>>,
        schedule: Schedule<T>,
    ) -> Result<Self> {
        if !nu.is_finite() || nu < T::zero() {
            return Err(Error::InvalidParameter(format!(
                "damping must be finite and nonnegative, got {}",
                nu.as_f64()
            )));
        }
        for g in &directions {
            if g.n() != body.n() {
                return Err(Error::DimensionMismatch { expected: body.n(), got: g.n() });
            }
        }
        if schedule.controls() != directions.len() {
            return Err(Error::InvalidParameter(format!(
                "schedule drives {} controls but there are {} directions",
                schedule.controls(),
                directions.len()
            )));
        }
        Ok(Self { body, nu, directions, schedule })
    }

    /// Free body: no damping, no controls.
    pub fn free(body: RigidBody<T>) -> Self {
        let schedule = Schedule::zero(1, 0).expect("trivial schedule");
        Self { body, nu: T::zero(), directions: Vec::new(), schedule }
    }

    /// Damped free body.
    pub fn damped(body: RigidBody<T>, nu: T) -> Result<Self> {
        let schedule = Schedule::zero(1, 0)?;
        Self::new(body, nu, Vec::new(), schedule)
    }

    /// Same plant with a different schedule.
    pub fn with_schedule(&self, schedule: Schedule<T>) -> Result<Self> {
        Self::new(self.body.clone(), self.nu, self.directions.clone(), schedule)
    }

    pub fn body(&self) -> &RigidBody<T> {
        &self.body
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn directions(&self) -> &[SkewMatrix<T>] {
        &self.directions
    }

    pub fn schedule(&self) -> &Schedule<T> {
        &self.schedule
    }
}

/// Integrated path: uniform time grid and the state at every grid point.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    times: Vec<T>,
    states: Vec<SkewMatrix<T>>,
    dt: T,
    method_order: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn states(&self) -> &[SkewMatrix<T>] {
        &self.states
    }

    /// Actual step size used (the requested one, rounded down so that steps
    /// tile each control segment exactly).
    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn method_order(&self) -> usize {
        self.method_order
    }

    pub fn terminal_state(&self) -> &SkewMatrix<T> {
        self.states.last().expect("trajectory has at least the initial state")
    }
}

/// The drift compiled to a dense quadratic coordinate table, cheap enough
/// for integrator inner loops. Built once per body, reused across steps.
pub(crate) struct DriftTable<T: Real> {
    dim: usize,
    // (i, j, column) for the nonzero columns of the symmetrized quadratic
    // form; diagonal columns already carry the 1/2.
    entries: Vec<(usize, usize, DVector<T>)>,
}

impl<T: Real> DriftTable<T> {
    pub fn new(body: &RigidBody<T>) -> Result<Self> {
        let d = body.dim();
        let basis = SkewMatrix::basis(body.n())?;
        let half = T::of(0.5);
        let mut entries = Vec::new();
        for i in 0..d {
            for j in i..d {
                let mut col = extending_direction(body, &basis[i], &basis[j])?.coords();
                if col.iter().all(|c| c.is_zero()) {
                    continue;
                }
                if i == j {
                    col *= half;
                }
                entries.push((i, j, col));
            }
        }
        Ok(Self { dim: d, entries })
    }

    /// `out += drift(x)`.
    pub fn eval_add(&self, x: &DVector<T>, out: &mut DVector<T>) {
        for (i, j, col) in &self.entries {
            let w = x[*i] * x[*j];
            for k in 0..self.dim {
                out[k] += w * col[k];
            }
        }
    }
}

/// Right-hand side evaluator shared by [`integrate`] and the steering
/// shooter: drift + damping + the active segment's constant control input.
pub(crate) struct Rhs<'a, T: Real> {
    drift: &'a DriftTable<T>,
    nu: T,
    control_input: DVector<T>,
}

impl<'a, T: Real> Rhs<'a, T> {
    pub fn new(drift: &'a DriftTable<T>, nu: T, dim: usize) -> Self {
        Self { drift, nu, control_input: DVector::zeros(dim) }
    }

    /// Fix the constant control input for the current segment.
    pub fn set_segment(&mut self, directions: &[DVector<T>], u: &[T]) {
        self.control_input.fill(T::zero());
        for (g, &ui) in directions.iter().zip(u) {
            self.control_input.axpy(ui, g, T::one());
        }
    }

    pub fn eval(&self, x: &DVector<T>, out: &mut DVector<T>) {
        out.copy_from(&self.control_input);
        if !self.nu.is_zero() {
            out.axpy(-self.nu, x, T::one());
        }
        self.drift.eval_add(x, out);
    }
}

/// One classical RK4 step of size `h` in place; scratch holds 5 vectors.
pub(crate) fn rk4_step<T: Real>(
    rhs: &Rhs<'_, T>,
    x: &mut DVector<T>,
    h: T,
    scratch: &mut [DVector<T>; 5],
) {
    let [k1, k2, k3, k4, tmp] = scratch;
    let half = T::of(0.5);
    let sixth = T::of(1.0 / 6.0);
    let two = T::of(2.0);

    rhs.eval(x, k1);
    tmp.copy_from(x);
    tmp.axpy(half * h, k1, T::one());
    rhs.eval(tmp, k2);
    tmp.copy_from(x);
    tmp.axpy(half * h, k2, T::one());
    rhs.eval(tmp, k3);
    tmp.copy_from(x);
    tmp.axpy(h, k3, T::one());
    rhs.eval(tmp, k4);

    k1.axpy(two, k2, T::one());
    k1.axpy(two, k3, T::one());
    k1.axpy(T::one(), k4, T::one());
    x.axpy(sixth * h, k1, T::one());
}

/// Steps per segment so that an integer number of steps of size `<= dt`
/// tiles one segment exactly.
pub(crate) fn steps_per_segment<T: Real>(seg_len: T, dt: T) -> usize {
    let ratio = (seg_len / dt).as_f64();
    let steps = (ratio - 1e-9).ceil().max(1.0);
    steps as usize
}

/// Integrate the controlled system from `omega0` over `[0, horizon]`.
///
/// The requested `dt` is rounded down so that segment boundaries fall on
/// grid points; every stage of a step then sees its own segment's control
/// values. Produces one state per grid point. A non-finite state aborts
/// with the failing time.
pub fn integrate<T: Real>(
    system: &ControlledSystem<T>,
    omega0: &SkewMatrix<T>,
    horizon: T,
    dt: T,
) -> Result<Trajectory<T>> {
    if omega0.n() != system.body.n() {
        return Err(Error::DimensionMismatch { expected: system.body.n(), got: omega0.n() });
    }
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::InvalidParameter("horizon must be positive and finite".into()));
    }
    if !(dt > T::zero()) || dt > horizon {
        return Err(Error::InvalidParameter("need 0 < dt <= horizon".into()));
    }

    let drift = DriftTable::new(&system.body)?;
    let n = system.body.n();
    let d = system.body.dim();
    let segments = system.schedule.segments();
    let seg_len = horizon / T::of(segments as f64);
    let per_seg = steps_per_segment(seg_len, dt);
    let dt_eff = seg_len / T::of(per_seg as f64);

    let dir_coords: Vec<DVector<T>> = system.directions.iter().map(|g| g.coords()).collect();
    let mut rhs = Rhs::new(&drift, system.nu, d);
    let mut scratch = std::array::from_fn(|_| DVector::zeros(d));
    let mut x = omega0.coords();

    let total = per_seg * segments;
    let mut times = Vec::with_capacity(total + 1);
    let mut states = Vec::with_capacity(total + 1);
    times.push(T::zero());
    states.push(SkewMatrix::from_coords(n, x.as_slice())?);

    let mut step_index = 0usize;
    for seg in 0..segments {
        rhs.set_segment(&dir_coords, &system.schedule.values[seg]);
        for _ in 0..per_seg {
            rk4_step(&rhs, &mut x, dt_eff, &mut scratch);
            step_index += 1;
            let t = dt_eff * T::of(step_index as f64);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { time: t.as_f64() });
            }
            times.push(t);
            states.push(SkewMatrix::from_coords(n, x.as_slice())?);
        }
    }

    Ok(Trajectory { times, states, dt: dt_eff, method_order: 4 })
}

/// Relative drift of the free-body first integrals along a trajectory.
#[derive(Debug, Clone)]
pub struct ConservationReport<T: Real> {
    /// Energy `<I_C W, W>` relative drift.
    pub energy_drift: T,
    /// `tr(M^2)` relative drift, `M = I_C W`.
    pub momentum_square_drift: T,
    /// `tr(M^4)` relative drift.
    pub momentum_quartic_drift: T,
    /// Initial values of the three integrals, for scale.
    pub initial: [T; 3],
}

/// Measure the drift of energy, `tr(M^2)` and `tr(M^4)` along `trajectory`.
/// Meaningful for trajectories of the free body (`nu = 0`, `u = 0`), where
/// all three are conserved.
pub fn conservation_report<T: Real>(
    body: &RigidBody<T>,
    trajectory: &Trajectory<T>,
) -> Result<ConservationReport<T>> {
    let mut first: Option<[T; 3]> = None;
    let mut max_dev = [T::zero(); 3];
    for state in &trajectory.states {
        let m = body.inertia_apply(state)?;
        let energy = m.inner(state)?;
        // For skew M, tr(M^2) = -|M|_F^2 and M^2 is symmetric, so
        // tr(M^4) = |M^2|_F^2.
        let m_norm = m.norm();
        let tr_m2 = -m_norm * m_norm;
        let m2 = m.matrix() * m.matrix();
        let tr_m4 = m2.norm() * m2.norm();
        let current = [energy, tr_m2, tr_m4];
        match &first {
            None => first = Some(current),
            Some(base) => {
                for k in 0..3 {
                    let dev = (current[k] - base[k]).abs();
                    if dev > max_dev[k] {
                        max_dev[k] = dev;
                    }
                }
            }
        }
    }
    let base = first.ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    let rel = |dev: T, scale: T| if scale.is_zero() { dev } else { dev / scale.abs() };
    Ok(ConservationReport {
        energy_drift: rel(max_dev[0], base[0]),
        momentum_square_drift: rel(max_dev[1], base[1]),
        momentum_quartic_drift: rel(max_dev[2], base[2]),
        initial: base,
    })
}
