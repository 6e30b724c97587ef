//! Two-point steering by direct shooting.
//!
//! Decision variables are the piecewise-constant control values (one per
//! direction per segment); the objective is the Frobenius distance between
//! the integrated terminal state and the goal. A Levenberg-Marquardt loop
//! with a forward-difference Jacobian drives it down, restarting from
//! seeded random schedules when a candidate gets stuck. At desk scale
//! (tens of decision variables) finite differences are accurate and cheap
//! enough that variational integration would buy nothing.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::dynamics::{rk4_step, steps_per_segment, ControlledSystem, DriftTable, Rhs, Schedule};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::sample::rng_from_seed;
use crate::skew::SkewMatrix;

/// Knobs for [`steer`]. Defaults match unit-scale problems.
#[derive(Debug, Clone)]
pub struct SteerOptions<T: Real> {
    /// Terminal Frobenius error below which steering counts as success.
    pub error_target: T,
    /// Random restarts tried after the initial candidate.
    pub restarts: usize,
    /// Forward-difference step for the Jacobian.
    pub fd_step: T,
    /// Initial Levenberg-Marquardt damping.
    pub lambda_init: T,
    /// Random initial schedules are drawn uniformly from this amplitude.
    pub init_scale: T,
    /// Integrator step; `None` picks segment length / 50.
    pub dt: Option<T>,
}

impl<T: Real> Default for SteerOptions<T> {
    fn default() -> Self {
        Self {
            error_target: T::of(1e-3),
            restarts: 5,
            fd_step: T::of(1e-6),
            lambda_init: T::of(1e-3),
            init_scale: T::one(),
            dt: None,
        }
    }
}

/// Best schedule found and how it was reached. A target miss is a result,
/// not an error: `success` is false and `terminal_error` carries the best
/// distance achieved.
#[derive(Debug, Clone)]
pub struct SteerOutcome<T: Real> {
    pub schedule: Schedule<T>,
    pub terminal_error: T,
    /// Accepted optimizer iterations for the winning candidate.
    pub iterations: usize,
    /// Which candidate won: 0 is the warm start, `k >= 1` the k-th random
    /// restart. Ties go to the lower index.
    pub restart_index: usize,
    pub success: bool,
}

/// Steer the plant of `system` from `start` to `goal` in time `horizon`
/// using `segments` piecewise-constant control intervals.
///
/// `system.schedule()` seeds the first candidate when its shape matches
/// (zero it for a cold start); subsequent candidates are seeded random
/// schedules. Deterministic for a fixed `seed`.
pub fn steer<T: Real>(
    system: &ControlledSystem<T>,
    start: &SkewMatrix<T>,
    goal: &SkewMatrix<T>,
    horizon: T,
    segments: usize,
    max_iter: usize,
    seed: u64,
    opts: &SteerOptions<T>,
) -> Result<SteerOutcome<T>> {
    let body = system.body();
    if start.n() != body.n() || goal.n() != body.n() {
        return Err(Error::DimensionMismatch {
            expected: body.n(),
            got: if start.n() != body.n() { start.n() } else { goal.n() },
        });
    }
    if segments < 2 {
        return Err(Error::InvalidParameter("need at least 2 control segments".into()));
    }
    let controls = system.directions().len();
    if controls == 0 {
        return Err(Error::InvalidParameter("need at least one controlled direction".into()));
    }
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::InvalidParameter("horizon must be positive and finite".into()));
    }

    let d = body.dim();
    let nvars = controls * segments;
    let seg_len = horizon / T::of(segments as f64);
    let dt = opts.dt.unwrap_or(seg_len / T::of(50.0));
    let per_seg = steps_per_segment(seg_len, dt);
    let dt_eff = seg_len / T::of(per_seg as f64);

    let drift = DriftTable::new(body)?;
    let dir_coords: Vec<DVector<T>> = system.directions().iter().map(|g| g.coords()).collect();
    let x0 = start.coords();
    let goal_coords = goal.coords();
    let sqrt2 = T::of(std::f64::consts::SQRT_2);

    // Terminal residual, scaled so its 2-norm is the Frobenius distance.
    let shoot = |u: &DVector<T>| -> Option<DVector<T>> {
        let mut rhs = Rhs::new(&drift, system.nu(), d);
        let mut scratch = std::array::from_fn(|_| DVector::zeros(d));
        let mut x = x0.clone();
        for seg in 0..segments {
            let lo = seg * controls;
            rhs.set_segment(&dir_coords, &u.as_slice()[lo..lo + controls]);
            for _ in 0..per_seg {
                rk4_step(&rhs, &mut x, dt_eff, &mut scratch);
            }
            if x.iter().any(|v| !v.is_finite()) {
                return None;
            }
        }
        Some((x - &goal_coords) * sqrt2)
    };

    let warm: DVector<T> = if system.schedule().segments() == segments
        && system.schedule().controls() == controls
    {
        DVector::from_iterator(
            nvars,
            system.schedule().values().iter().flatten().copied(),
        )
    } else {
        DVector::zeros(nvars)
    };

    let mut rng = rng_from_seed(seed);
    let mut best: Option<(DVector<T>, T, usize, usize)> = None;

    for candidate in 0..=opts.restarts {
        let u0 = if candidate == 0 {
            warm.clone()
        } else {
            DVector::from_fn(nvars, |_, _| {
                T::of(rng.random_range(-1.0..1.0)) * opts.init_scale
            })
        };
        if let Some((u, err, iters)) = minimize(&shoot, u0, max_iter, opts) {
            let better = match &best {
                None => true,
                Some((_, best_err, _, _)) => err < *best_err,
            };
            if better {
                best = Some((u, err, iters, candidate));
            }
        }
        if let Some((_, err, _, _)) = &best {
            if *err < opts.error_target {
                break;
            }
        }
    }

    let (u, terminal_error, iterations, restart_index) = best.ok_or_else(|| {
        Error::InvalidParameter("every steering candidate diverged; reduce controls or dt".into())
    })?;
    let values: Vec<Vec<T>> = (0..segments)
        .map(|s| u.as_slice()[s * controls..(s + 1) * controls].to_vec())
        .collect();
    let schedule = Schedule::from_values(values, controls)?;
    Ok(SteerOutcome {
        schedule,
        terminal_error,
        iterations,
        restart_index,
        success: terminal_error < opts.error_target,
    })
}

/// Levenberg-Marquardt on one candidate. Returns the refined variables,
/// the final residual norm and the accepted iteration count; `None` when
/// the very first shot diverges.
fn minimize<T: Real>(
    shoot: &impl Fn(&DVector<T>) -> Option<DVector<T>>,
    mut u: DVector<T>,
    max_iter: usize,
    opts: &SteerOptions<T>,
) -> Option<(DVector<T>, T, usize)> {
    let mut residual = shoot(&u)?;
    let mut err = residual.norm();
    let mut lambda = opts.lambda_init;
    let nvars = u.len();
    let mut iterations = 0usize;

    if err < opts.error_target {
        return Some((u, err, 0));
    }

    'outer: for _ in 0..max_iter {
        // Forward-difference Jacobian of the residual.
        let mut jac = DMatrix::zeros(residual.len(), nvars);
        for j in 0..nvars {
            let mut shifted = u.clone();
            shifted[j] += opts.fd_step;
            let r = shoot(&shifted)?;
            let col = (r - &residual) / opts.fd_step;
            jac.set_column(j, &col);
        }
        let normal = jac.transpose() * &jac;
        let gradient = jac.transpose() * &residual;

        let mut accepted = false;
        for _ in 0..20 {
            let mut damped = normal.clone();
            for i in 0..nvars {
                damped[(i, i)] += lambda;
            }
            let Some(delta) = damped.lu().solve(&(-&gradient)) else {
                lambda *= T::of(10.0);
                continue;
            };
            let trial = &u + &delta;
            let Some(trial_residual) = shoot(&trial) else {
                lambda *= T::of(10.0);
                continue;
            };
            let trial_err = trial_residual.norm();
            if trial_err < err {
                let step = delta.norm();
                u = trial;
                residual = trial_residual;
                err = trial_err;
                lambda = (lambda / T::of(3.0)).max(T::of(1e-14));
                iterations += 1;
                accepted = true;
                if err < opts.error_target || step < T::of(1e-13) * (T::one() + u.norm()) {
                    break 'outer;
                }
                break;
            }
            lambda *= T::of(10.0);
        }
        if !accepted {
            break;
        }
    }
    Some((u, err, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::RigidBody;
    use crate::extension::two_torque_seeds;
    use crate::sample::{random_unit_skew, rng_from_seed};

    fn steering_system() -> ControlledSystem<f64> {
        let body = RigidBody::from_eigenvalues(&[1.0, 2.0, 3.0]).unwrap();
        let (g1, g2) = two_torque_seeds(&body).unwrap();
        let schedule = Schedule::zero(12, 2).unwrap();
        ControlledSystem::new(body, 0.0, vec![g1, g2], schedule).unwrap()
    }

    #[test]
    fn staying_at_a_steady_point_needs_no_iterations() {
        let system = steering_system();
        let w = system.body().axis(1, 2).unwrap().clone();
        let outcome =
            steer(&system, &w, &w, 6.0, 12, 60, 7, &SteerOptions::default()).unwrap();
        assert!(outcome.success);
        assert_eq!(outcome.iterations, 0);
        assert_eq!(outcome.restart_index, 0);
        assert!(outcome.terminal_error < 1e-12);
        for row in outcome.schedule.values() {
            assert!(row.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn random_transfer_succeeds_without_damping() {
        let system = steering_system();
        let mut rng = rng_from_seed(11);
        let start = random_unit_skew(3, &mut rng).unwrap();
        let goal = random_unit_skew(3, &mut rng).unwrap();
        let outcome =
            steer(&system, &start, &goal, 6.0, 12, 60, 13, &SteerOptions::default()).unwrap();
        assert!(
            outcome.success,
            "terminal error {:.3e} after {} iterations",
            outcome.terminal_error, outcome.iterations
        );
    }

    #[test]
    fn random_transfer_succeeds_with_damping() {
        let base = steering_system();
        let system = ControlledSystem::new(
            base.body().clone(),
            0.3,
            base.directions().to_vec(),
            Schedule::zero(12, 2).unwrap(),
        )
        .unwrap();
        let mut rng = rng_from_seed(17);
        let start = random_unit_skew(3, &mut rng).unwrap();
        let goal = random_unit_skew(3, &mut rng).unwrap();
        let outcome =
            steer(&system, &start, &goal, 6.0, 12, 60, 19, &SteerOptions::default()).unwrap();
        assert!(
            outcome.success,
            "terminal error {:.3e} after {} iterations",
            outcome.terminal_error, outcome.iterations
        );
    }

    #[test]
    fn steering_is_deterministic_for_a_fixed_seed() {
        let system = steering_system();
        let mut rng = rng_from_seed(23);
        let start = random_unit_skew(3, &mut rng).unwrap();
        let goal = random_unit_skew(3, &mut rng).unwrap();
        let a = steer(&system, &start, &goal, 6.0, 12, 40, 29, &SteerOptions::default()).unwrap();
        let b = steer(&system, &start, &goal, 6.0, 12, 40, 29, &SteerOptions::default()).unwrap();
        assert_eq!(a.terminal_error, b.terminal_error);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.schedule.values(), b.schedule.values());
    }

    #[test]
    fn bad_setups_are_rejected() {
        let system = steering_system();
        let w = system.body().axis(1, 2).unwrap().clone();
        assert!(steer(&system, &w, &w, 6.0, 1, 10, 1, &SteerOptions::default()).is_err());
        let free = ControlledSystem::free(system.body().clone());
        assert!(steer(&free, &w, &w, 6.0, 12, 10, 1, &SteerOptions::default()).is_err());
    }
}
