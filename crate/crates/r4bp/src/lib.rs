//! Planar equilateral restricted four-body problem (R4BP).
//!
//! Three primaries sit at the vertices of an equilateral triangle, fixed in a
//! rotating (synodic) frame; a massless particle moves in their field. The two
//! primaries placed symmetrically about the x-axis carry equal mass `mu`, and
//! binary collisions with them are removed globally by a Birkhoff-type
//! canonical transformation with a rescaled (fictitious) time. The regularized
//! flow lives on a fixed Jacobi level and passes smoothly through collision.
//!
//! Module layout:
//! - [`model`]: masses, primary geometry, effective potential, Jacobi integral.
//! - [`dynamics`]: synodic vector field and Hamiltonians (z- and u-frames).
//! - [`regularization`]: the conformal map `f(w) = (w - 1/4w)/2`, its canonical
//!   extension, the regularized Hamiltonian and vector field, chart bridges.
//! - [`integrate`]: adaptive RK7(8) integration, event detection, automatic
//!   chart switching through collisions, trajectory serialization.
//! - [`analysis`]: equilibria, Hill-region rasters in both charts, Routh mass bound.
//! - [`orbits`]: symmetric periodic orbits, continuation in the Jacobi constant,
//!   ejection-collision orbits.
//! - [`cli`]: batch subcommands used by the `r4bp` binary.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod integrate;
pub mod model;
pub mod orbits;
pub mod regularization;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimensional system violating positivity or Kepler's third law.
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    /// Parameter outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Evaluation at (or within the guard radius of) primary `index`.
    #[error("singular evaluation at primary m{index}")]
    Singularity { index: usize },
    /// The map `w -> (w - 1/4w)/2` has a pole at the origin.
    #[error("pole of the conformal map at w = 0")]
    Pole,
    /// Momentum transform requested where the map derivative vanishes.
    #[error("zero map derivative at w = {w}")]
    ZeroDerivative { w: num_complex::Complex64 },
    /// Invalid pre-image branch request.
    #[error("branch selection error: {0}")]
    BranchSelection(String),
    /// Evaluation outside the regular regularized domain (w in {0, a1, a2}).
    #[error("regularized state outside the regular domain: {0}")]
    OutsideRegularDomain(String),
    /// Integrator exceeded its step budget.
    #[error("maximum step count {max_steps} exceeded at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },
    /// State stopped being finite during integration.
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    /// Invalid integrator configuration.
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    /// No section crossing found within the allowed horizon.
    #[error("no section crossing found within horizon {horizon}")]
    NoCrossing { horizon: f64 },
    /// Newton iteration failed to converge.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    /// Degenerate problem instance (e.g. mu = 0 equilibria).
    #[error("degenerate case: {0}")]
    Degenerate(String),
    /// Invalid raster bounds or resolution.
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Formats a float with 17 significant digits so that parsing the text
/// recovers the exact bit pattern.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips_exactly() {
        for &x in &[
            0.0,
            -0.5,
            1.0 / 3.0,
            std::f64::consts::PI,
            3.35804,
            -1.234567890123456e-13,
            1e300,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
