//! Launches a fan of ejection orbits from m2 and demonstrates the launch-speed
//! law |W| = sqrt(8 mu) and the mirror pairing with m3 ejections.

use r4bp::integrate::{ChartState, IntegratorConfig};
use r4bp::model::MassParameter;
use r4bp::orbits::{ejection_momentum_magnitude, ejection_orbit};
use r4bp::regularization::regularized_hamiltonian;

fn main() {
    let mu = MassParameter::new(1.0 / 3.0).unwrap();
    let jacobi = 3.5;
    let config = IntegratorConfig::default();

    println!(
        "every ejection launches with |W| = sqrt(8 mu) = {:.12}, independent of C\n",
        ejection_momentum_magnitude(mu)
    );

    for k in 0..8 {
        let theta = k as f64 * std::f64::consts::TAU / 8.0;
        let orbit = ejection_orbit(2, jacobi, theta, 3.0, mu, &config).unwrap();
        let mut max_hbar: f64 = 0.0;
        let mut max_w: f64 = 0.0;
        for sample in &orbit.trajectory.samples {
            if let ChartState::Regularized(r) = sample.state {
                max_hbar = max_hbar.max(regularized_hamiltonian(&r, mu).unwrap().abs());
                max_w = max_w.max(r.w.norm());
            }
        }
        let end = orbit.trajectory.final_sample();
        println!(
            "theta = {theta:.4}: physical time {:+.4}, max |w| = {:.3}, |Hbar| <= {:.1e}, {} return collision(s)",
            end.t,
            max_w,
            max_hbar,
            orbit.return_collisions.len()
        );
    }

    // The y-mirror of the m2 ejection at angle theta is the m3 ejection at
    // pi - theta traversed backward in fictitious time.
    let theta = 0.7;
    let a = ejection_orbit(2, jacobi, theta, 1.0, mu, &config).unwrap();
    let b = ejection_orbit(3, jacobi, std::f64::consts::PI - theta, -1.0, mu, &config).unwrap();
    let (wa, wb) = match (
        a.trajectory.final_sample().state,
        b.trajectory.final_sample().state,
    ) {
        (ChartState::Regularized(ra), ChartState::Regularized(rb)) => (ra.w, rb.w),
        _ => unreachable!(),
    };
    println!("\nmirror check at tau = 1:");
    println!("  m2 ejection, theta = {theta}:        w = {wa}");
    println!("  m3 ejection, pi - theta, backward: w = {wb}");
    println!("  |w_b - conj(w_a)| = {:.3e}", (wb - wa.conj()).norm());
}
