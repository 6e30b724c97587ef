use mrb::*;
use mrb::sample::*;
use mrb::dynamics::*;

fn main() {
    for n in [3usize, 4] {
        let mut rng = rng_from_seed(173);
        let body: RigidBody<f64> = random_body(n, &mut rng).unwrap();
        let base = random_unit_skew(n, &mut rng).unwrap();
        let system = ControlledSystem::free(body.clone());
        for scale in [5.0, 10.0, 20.0] {
            let w0 = base.scale(scale);
            for dt in [2e-3, 1e-3, 5e-4] {
                let traj = integrate(&system, &w0, 10.0, dt).unwrap();
                let rep = conservation_report(&body, &traj).unwrap();
                println!("n={n} scale={scale} dt={dt:.1e}: E={:.3e} m2={:.3e} m4={:.3e}",
                    rep.energy_drift, rep.momentum_square_drift, rep.momentum_quartic_drift);
            }
        }
    }
}
