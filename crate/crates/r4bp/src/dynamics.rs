//! Vector fields and Hamiltonians for the unregularized problem, in synodic
//! z-coordinates and in the translated u-frame whose origin sits midway
//! between the two symmetric primaries.

use crate::model::{
    effective_potential_gradient, MassParameter, PrimaryConfiguration, SynodicState,
    SINGULARITY_GUARD,
};
use crate::{Error, Result};
use num_complex::Complex64;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Canonical state `(z, P)` with `P = p_x + i p_y` conjugate to `z = x + i y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub z: Complex64,
    pub momentum: Complex64,
}

/// Canonical state in the translated frame, `u = z - (sqrt(3) mu - sqrt(3)/2)`.
/// The translation leaves momenta unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UState {
    pub u: Complex64,
    pub momentum: Complex64,
}

/// Offset `c = sqrt(3) mu - sqrt(3)/2` with `z = u + c`.
///
/// Computed from a single expression everywhere so chart switches stay
/// bit-stable.
pub fn translation_offset(mu: MassParameter) -> f64 {
    SQRT3 * mu.value() - SQRT3 / 2.0
}

/// Primary positions in the u-frame: `(sqrt(3)/2, -i/2, +i/2)`.
pub fn u_primaries() -> [Complex64; 3] {
    [
        Complex64::new(SQRT3 / 2.0, 0.0),
        Complex64::new(0.0, -0.5),
        Complex64::new(0.0, 0.5),
    ]
}

/// Velocity-to-momentum bridge: `p_x = xdot - y`, `p_y = ydot + x`.
pub fn to_phase_state(state: &SynodicState) -> PhaseState {
    PhaseState {
        z: state.position(),
        momentum: Complex64::new(state.xdot - state.y, state.ydot + state.x),
    }
}

/// Momentum-to-velocity bridge, exact inverse of [`to_phase_state`].
pub fn to_synodic_state(phase: &PhaseState, t: f64) -> SynodicState {
    SynodicState {
        x: phase.z.re,
        y: phase.z.im,
        xdot: phase.momentum.re + phase.z.im,
        ydot: phase.momentum.im - phase.z.re,
        t,
    }
}

/// Translates a z-frame phase state into the u-frame (momenta unchanged).
pub fn to_u_state(phase: &PhaseState, mu: MassParameter) -> UState {
    UState {
        u: phase.z - translation_offset(mu),
        momentum: phase.momentum,
    }
}

/// Inverse of [`to_u_state`].
pub fn from_u_state(state: &UState, mu: MassParameter) -> PhaseState {
    PhaseState {
        z: state.u + translation_offset(mu),
        momentum: state.momentum,
    }
}

/// First-order synodic vector field: `(xdot, ydot, Omega_x + 2 ydot, Omega_y - 2 xdot)`.
pub fn synodic_rhs(state: &SynodicState, mu: MassParameter) -> Result<[f64; 4]> {
    let (gx, gy) = effective_potential_gradient(state.x, state.y, mu)?;
    Ok([
        state.xdot,
        state.ydot,
        gx + 2.0 * state.ydot,
        gy - 2.0 * state.xdot,
    ])
}

fn gravitational_potential(z: Complex64, mu: MassParameter) -> Result<f64> {
    let config = PrimaryConfiguration::new(mu);
    let mut v = 0.0;
    for i in 0..3 {
        let m = config.masses[i];
        let r = (z - config.position_complex(i)).norm();
        if r < SINGULARITY_GUARD && m > 0.0 {
            return Err(Error::Singularity { index: i + 1 });
        }
        if m > 0.0 {
            v += m / r;
        }
    }
    Ok(v)
}

/// Rotating-frame Hamiltonian `H = |P|^2/2 + Im(z conj(P)) - U(z)`.
///
/// Equals `-C/2` for momenta bridged from velocities.
pub fn hamiltonian(state: &PhaseState, mu: MassParameter) -> Result<f64> {
    let v = gravitational_potential(state.z, mu)?;
    Ok(0.5 * state.momentum.norm_sqr() + (state.z * state.momentum.conj()).im - v)
}

/// Gravitational potential in the u-frame, `V(u) = sum_i mu_i / |u - u_i|`.
pub fn u_potential(u: Complex64, mu: MassParameter) -> Result<f64> {
    let masses = mu.masses();
    let primaries = u_primaries();
    let mut v = 0.0;
    for i in 0..3 {
        let r = (u - primaries[i]).norm();
        if r < SINGULARITY_GUARD && masses[i] > 0.0 {
            return Err(Error::Singularity { index: i + 1 });
        }
        if masses[i] > 0.0 {
            v += masses[i] / r;
        }
    }
    Ok(v)
}

/// Hamiltonian in the translated frame,
/// `H = |U|^2/2 + Im((u + sqrt(3) mu - sqrt(3)/2) conj(U)) - V(u)`.
pub fn hamiltonian_u(state: &UState, mu: MassParameter) -> Result<f64> {
    let v = u_potential(state.u, mu)?;
    let shifted = state.u + translation_offset(mu);
    Ok(0.5 * state.momentum.norm_sqr() + (shifted * state.momentum.conj()).im - v)
}
