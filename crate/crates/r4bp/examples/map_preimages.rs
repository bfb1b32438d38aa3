//! Properties of the regularizing conformal map: fixed points at the
//! symmetric primaries, vanishing derivative there, and the two-sheeted
//! pre-image structure.

use num_complex::Complex64;
use r4bp::regularization::{birkhoff_derivative, birkhoff_map, preimages, A1, A2, U1, U2, U3};

fn main() {
    println!("map:        f(w) = (w - 1/4w)/2");
    println!("fixed:      f(u2) = {}", birkhoff_map(U2).unwrap());
    println!("            f(u3) = {}", birkhoff_map(U3).unwrap());
    println!(
        "derivative: f'(u2) = {:.3e}",
        birkhoff_derivative(U2).unwrap().norm()
    );
    println!(
        "            f'(u3) = {:.3e}",
        birkhoff_derivative(U3).unwrap().norm()
    );
    println!();
    println!("m1 at u1 = {U1} pulls back to the two new singular points:");
    println!("  f({A1}) = {}", birkhoff_map(A1).unwrap());
    println!("  f({A2}) = {}", birkhoff_map(A2).unwrap());
    println!();

    for u in [
        Complex64::new(0.0, 0.0),
        U1,
        U2,
        Complex64::new(0.4, 0.3),
        Complex64::new(-1.2, 0.5),
    ] {
        let pre = preimages(u);
        println!(
            "pre-images of {u}: {} and {}{}",
            pre.roots[0],
            pre.roots[1],
            if pre.is_double() {
                "  (double root: collision point)"
            } else {
                ""
            }
        );
        for root in pre.roots {
            let back = birkhoff_map(root).unwrap();
            assert!((back - u).norm() < 1e-10);
        }
    }
}
