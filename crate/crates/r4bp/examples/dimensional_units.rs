//! Dimensional reduction: a physical triangle system collapses to the single
//! mass parameter mu plus unit side and unit angular speed, and the round trip
//! restores the original quantities.

use r4bp::model::{
    jacobi_constant, nondimensionalize, redimensionalize, DimensionalSystem, Point2,
};

fn main() {
    // Kepler's third law fixes the mean motion: n = sqrt(k2 M / L^3).
    let sys = DimensionalSystem::with_kepler_mean_motion(1.0, 0.5, 0.25, 0.25, 2.0).unwrap();
    println!(
        "L = {}, M = {}, n = {:.12} (from Kepler's third law)",
        sys.triangle_side,
        sys.total_mass(),
        sys.mean_motion
    );

    let position = Point2::new(0.7, -1.3);
    let velocity = Point2::new(0.2, 0.11);
    let (state, mu) = nondimensionalize(&sys, position, velocity, 5.0).unwrap();
    println!("mu = {:.12}", mu.value());
    println!(
        "dimensionless state: ({:+.6}, {:+.6}, {:+.6}, {:+.6}) at t = {:.6}",
        state.x, state.y, state.xdot, state.ydot, state.t
    );
    println!(
        "jacobi constant: {:.12}",
        jacobi_constant(&state, mu).unwrap()
    );

    let (p, v, t) = redimensionalize(&sys, &state);
    println!(
        "round trip: position ({:+.12}, {:+.12}), velocity ({:+.12}, {:+.12}), time {:.12}",
        p.x, p.y, v.x, v.y, t
    );

    // An inconsistent system (Kepler's law off by 1%) is rejected outright.
    let bad = DimensionalSystem::new(1.0, 0.8, 0.1, 0.1, 1.0, 1.01f64.sqrt());
    println!("\ninconsistent mean motion: {}", bad.unwrap_err());
}
