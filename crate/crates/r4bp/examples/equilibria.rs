//! Locates the critical points of the effective potential for the equal-mass
//! case and groups them by their zero-velocity level.

use r4bp::analysis::find_equilibria;
use r4bp::model::MassParameter;

fn main() {
    let mu = MassParameter::new(1.0 / 3.0).unwrap();
    let equilibria = find_equilibria(mu, 50).unwrap();

    println!(
        "{} equilibria at mu = 1/3 (sorted by Jacobi constant):",
        equilibria.len()
    );
    for e in &equilibria {
        println!(
            "  ({:+.12}, {:+.12})   C = {:.12}   |grad| = {:.2e}",
            e.x, e.y, e.jacobi, e.gradient_norm
        );
    }

    // Equal masses give a three-fold symmetric configuration, so equilibria
    // come in triples sharing a level; the outermost triple sits at the
    // reference value C1 = 3.35804.
    let c1 = 3.35804;
    let at_c1 = equilibria
        .iter()
        .filter(|e| (e.jacobi - c1).abs() < 1e-3)
        .count();
    println!("\n{at_c1} critical points share the reference level C1 = {c1}");
}
