//! Refines a symmetric periodic orbit by shooting and continues it in the
//! Jacobi constant, printing the family as it evolves.

use r4bp::integrate::IntegratorConfig;
use r4bp::model::MassParameter;
use r4bp::orbits::{
    continue_family, family_to_jsonl, refine_symmetric_orbit, ContinuationPolicy, ShootingMode,
};

fn main() -> std::io::Result<()> {
    // Rotating Kepler limit: the retrograde circle through (a, 0) has
    // ydot = a (omega - 1) with omega = -a^(-3/2), C = 1/a - 2 sqrt(a), and
    // rotating-frame period 2 pi / (1 + a^(-3/2)).
    let mu = MassParameter::new(0.0).unwrap();
    let config = IntegratorConfig::default();
    let a: f64 = 0.8;
    let ydot_exact = a * (-a.powf(-1.5) - 1.0);

    // A 1% perturbation of the section velocity converges straight back.
    let seed = refine_symmetric_orbit(
        mu,
        a,
        ydot_exact * 1.01,
        ShootingMode::VaryYdot,
        1.3,
        &config,
    )
    .unwrap();
    println!(
        "seed orbit: x0 = {:.12}, ydot0 = {:.12}, T = {:.12}, C = {:.12} (residual {:.1e})",
        seed.x0, seed.ydot0, seed.period, seed.jacobi, seed.closure_residual
    );
    println!("exact circle velocity: {ydot_exact:.12}\n");

    let policy = ContinuationPolicy {
        delta_c_total: 0.1,
        ..Default::default()
    };
    let family = continue_family(&seed, mu, 1.0, &policy, &config).unwrap();
    println!(
        "continued {} members in C, termination {:?}:",
        family.members.len(),
        family.termination
    );
    for member in family.members.iter().step_by(5) {
        println!(
            "  C = {:+.6}  x0 = {:.6}  T = {:.6}  phase {}  min r2 = {:.3}",
            member.orbit.jacobi,
            member.orbit.x0,
            member.orbit.period,
            member.phase,
            member.min_distance[1]
        );
    }

    std::fs::create_dir_all("out")?;
    std::fs::write("out/family.jsonl", family_to_jsonl(&family))?;
    println!("\nfamily written to out/family.jsonl");
    Ok(())
}
