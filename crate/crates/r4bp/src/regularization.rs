//! Global regularization of binary collisions with the two symmetric primaries.
//!
//! The conformal map `u = f(w) = (w - 1/4w)/2` fixes both symmetric primaries
//! (`u2 = -i/2`, `u3 = +i/2`) and has vanishing derivative there, so extending
//! it canonically (`U = W / conj(f'(w))`) and rescaling time by
//! `dt/dtau = |f'(w)|^2` removes both collision singularities at once. The
//! price is a new singular set `{0, a1, a2}` in the w-plane: `w = 0` maps to
//! infinity, and `a1 = 1 + sqrt(3)/2`, `a2 = -1 + sqrt(3)/2` are the two
//! pre-images of the unregularized primary `m1`.
//!
//! On a fixed Jacobi level `C`, the rescaled Hamiltonian
//! `Hbar = |f'|^2 (H + C/2)` is a polynomial-plus-smooth expression in
//! `(w, W)` whose flow on `Hbar = 0` reproduces the synodic flow away from
//! collisions and passes smoothly through them.

use crate::dynamics::{to_phase_state, to_synodic_state, to_u_state, translation_offset, UState};
use crate::model::{MassParameter, SynodicState, SINGULARITY_GUARD};
use crate::{Error, Result};
use num_complex::Complex64;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Fixed points of the map: positions of `m2` and `m3` in both charts.
pub const U2: Complex64 = Complex64::new(0.0, -0.5);
pub const U3: Complex64 = Complex64::new(0.0, 0.5);
/// Position of `m1` in the u-frame.
pub const U1: Complex64 = Complex64::new(SQRT3 / 2.0, 0.0);
/// Pre-images of `m1`: the new singularities of the regularized system.
pub const A1: Complex64 = Complex64::new(1.0 + SQRT3 / 2.0, 0.0);
pub const A2: Complex64 = Complex64::new(-1.0 + SQRT3 / 2.0, 0.0);

/// Radius around `u2`, `u3` inside which the momentum transform is treated as
/// non-invertible (the map derivative vanishes at the collision points).
pub const COLLISION_GUARD: f64 = 1e-12;

/// The frame translation `c = sqrt(3) mu - sqrt(3)/2` as a complex constant
/// (purely real).
pub fn translation_offset_complex(mu: MassParameter) -> Complex64 {
    Complex64::new(translation_offset(mu), 0.0)
}

/// Which chart a state lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    Synodic,
    Regularized,
}

/// Pre-image sheet label: roots `w` of `f(w) = u` are `u +/- s`; the positive
/// branch has `Re(w - u) > 0`, ties broken by `Im(w - u) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Positive,
    Negative,
}

/// Branch policy when bridging into the regularized chart.
#[derive(Debug, Clone, Copy)]
pub enum BranchChoice {
    /// Fixed sheet by label.
    Labeled(Branch),
    /// Continuity rule: take the root closer to a previously tracked `w`.
    Nearest(Complex64),
}

/// Chart annotation attached to trajectory samples.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChartTag {
    pub chart: Chart,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
}

impl ChartTag {
    pub fn synodic() -> Self {
        Self {
            chart: Chart::Synodic,
            branch: None,
        }
    }

    pub fn regularized(branch: Branch) -> Self {
        Self {
            chart: Chart::Regularized,
            branch: Some(branch),
        }
    }
}

/// State of the regularized flow on the level `Hbar = 0` of a fixed `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedState {
    pub w: Complex64,
    /// Conjugate momentum `W`.
    pub momentum: Complex64,
    /// Fictitious time.
    pub tau: f64,
    /// Accumulated physical time.
    pub t_physical: f64,
    /// Jacobi constant of the level set the flow is confined to.
    pub jacobi: f64,
}

impl RegularizedState {
    /// Synodic position of the state; defined even at the collision instant.
    pub fn synodic_position(&self, mu: MassParameter) -> Result<Complex64> {
        Ok(birkhoff_map(self.w)? + translation_offset(mu))
    }
}

/// `f(w) = (w - 1/4w)/2`. Pole at the origin (maps to infinity in u-space).
pub fn birkhoff_map(w: Complex64) -> Result<Complex64> {
    if w.norm() < SINGULARITY_GUARD {
        return Err(Error::Pole);
    }
    Ok(0.5 * w - 0.125 / w)
}

/// Map derivative in the factorized form `f'(w) = (w - u2)(w - u3) / (2 w^2)`,
/// which exhibits the zeros at the two collision points explicitly.
pub fn birkhoff_derivative(w: Complex64) -> Result<Complex64> {
    if w.norm() < SINGULARITY_GUARD {
        return Err(Error::Pole);
    }
    Ok((w - U2) * (w - U3) / (2.0 * w * w))
}

/// Direct form of the derivative, `(1 + 1/(4 w^2))/2`; used as the second
/// algebraic route when validating the factorization.
pub fn birkhoff_derivative_direct(w: Complex64) -> Result<Complex64> {
    if w.norm() < SINGULARITY_GUARD {
        return Err(Error::Pole);
    }
    Ok(0.5 + 0.125 / (w * w))
}

fn birkhoff_second_derivative(w: Complex64) -> Complex64 {
    -0.25 / (w * w * w)
}

/// Time-rescaling factor `dt/dtau = |f'(w)|^2`, vanishing at `u2` and `u3`.
pub fn time_rescaling(w: Complex64) -> Result<f64> {
    Ok(birkhoff_derivative(w)?.norm_sqr())
}

/// Forward momentum transform of the canonical extension: `U = W / conj(f'(w))`.
///
/// Fails where the derivative vanishes (at the collision points, where the
/// collision instant has no synodic velocity representation).
pub fn momentum_transform(w_momentum: Complex64, w: Complex64) -> Result<Complex64> {
    if (w - U2).norm() < COLLISION_GUARD || (w - U3).norm() < COLLISION_GUARD {
        return Err(Error::ZeroDerivative { w });
    }
    Ok(w_momentum / birkhoff_derivative(w)?.conj())
}

/// Inverse momentum transform, `W = U conj(f'(w))`; defined on all of `w != 0`.
pub fn momentum_transform_inverse(u_momentum: Complex64, w: Complex64) -> Result<Complex64> {
    Ok(u_momentum * birkhoff_derivative(w)?.conj())
}

/// The two pre-images of a point under `f`, i.e. the roots of
/// `p(w) = w^2 - 2 u w - 1/4`.
#[derive(Debug, Clone, Copy)]
pub struct Preimages {
    /// Roots ordered `[positive branch, negative branch]`.
    pub roots: [Complex64; 2],
    /// `u^2 + 1/4`; a double root iff this vanishes (exactly at `u2`, `u3`).
    pub discriminant: Complex64,
}

impl Preimages {
    pub fn is_double(&self) -> bool {
        self.discriminant.norm() < 1e-14
    }

    pub fn select(&self, branch: Branch) -> Complex64 {
        match branch {
            Branch::Positive => self.roots[0],
            Branch::Negative => self.roots[1],
        }
    }

    /// Root closer to `prev`, with its label.
    pub fn nearest(&self, prev: Complex64) -> (Complex64, Branch) {
        if (self.roots[0] - prev).norm() <= (self.roots[1] - prev).norm() {
            (self.roots[0], Branch::Positive)
        } else {
            (self.roots[1], Branch::Negative)
        }
    }

    /// Label of a root already in hand (by proximity).
    pub fn branch_of(&self, w: Complex64) -> Branch {
        self.nearest(w).1
    }
}

/// Solves `w^2 - 2 u w - 1/4 = 0` with the numerically stable quadratic
/// formula: the larger-magnitude root is computed first and the other is
/// recovered from the product of roots, `-1/4`.
pub fn preimages(u: Complex64) -> Preimages {
    let disc = u * u + 0.25;
    let mut s = disc.sqrt();
    // Normalize the square root to the positive-branch label.
    if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
        s = -s;
    }
    // Constructive addition avoids cancellation: add s with the sign that
    // enlarges the root, then use w_pos * w_neg = -1/4 for the other.
    let big = if u.re * s.re + u.im * s.im >= 0.0 {
        u + s
    } else {
        u - s
    };
    let roots = if big.norm() == 0.0 {
        // u = 0 never lands here (s = 1/2), kept for completeness.
        [s, -s]
    } else {
        let other = -0.25 / big;
        [big, other]
    };
    // Order by the branch label of (root - u) = +/- s.
    let d = roots[0] - u;
    let positive_first = d.re > 0.0 || (d.re == 0.0 && d.im >= 0.0);
    let ordered = if positive_first {
        roots
    } else {
        [roots[1], roots[0]]
    };
    Preimages {
        roots: ordered,
        discriminant: disc,
    }
}

fn check_regular_domain(w: Complex64) -> Result<()> {
    if w.norm() < SINGULARITY_GUARD {
        return Err(Error::OutsideRegularDomain("w = 0 (escape point)".into()));
    }
    if (w - A1).norm() < SINGULARITY_GUARD {
        return Err(Error::OutsideRegularDomain(
            "w = a1 (pre-image of m1)".into(),
        ));
    }
    if (w - A2).norm() < SINGULARITY_GUARD {
        return Err(Error::OutsideRegularDomain(
            "w = a2 (pre-image of m1)".into(),
        ));
    }
    Ok(())
}

/// The rescaled gravitational term `|f'(w)|^2 V(f(w))` in closed form:
///
/// `B = [ (1-2mu) q2 q3 / (p1 p2) + mu (q2 + q3) ] / (2 |w|^3)`
///
/// with `q_i = |w - u_i|^2` and `p_i = |w - a_i|`. This is finite and smooth at
/// the collision points (`B(u2) = B(u3) = 4 mu`) and singular only on
/// `{0, a1, a2}`.
pub fn regularized_potential_term(w: Complex64, mu: MassParameter) -> Result<f64> {
    check_regular_domain(w)?;
    let m = mu.value();
    let q2 = (w - U2).norm_sqr();
    let q3 = (w - U3).norm_sqr();
    let p1 = (w - A1).norm();
    let p2 = (w - A2).norm();
    let s = w.norm();
    let t = (1.0 - 2.0 * m) * q2 * q3 / (p1 * p2) + m * (q2 + q3);
    Ok(t / (2.0 * s * s * s))
}

/// Gradient of [`regularized_potential_term`] with respect to `(w1, w2)`.
///
/// With s2 = w1^2 + w2^2, q2 = w1^2 + (w2 + 1/2)^2, q3 = w1^2 + (w2 - 1/2)^2,
/// p1 = hypot(w1 - a1, w2), p2 = hypot(w1 - a2, w2) and
/// T = (1 - 2mu) q2 q3/(p1 p2) + mu (q2 + q3):
///
///   dq2 = (2 w1, 2 w2 + 1),  dq3 = (2 w1, 2 w2 - 1)
///   dp1 = ((w1 - a1)/p1, w2/p1),  dp2 = ((w1 - a2)/p2, w2/p2)
///   dT  = (1 - 2mu) [ (dq2 q3 + q2 dq3)/(p1 p2)
///                     - q2 q3 (dp1 p2 + p1 dp2)/(p1 p2)^2 ] + mu (dq2 + dq3)
///   dB  = dT/(2 s^3) - 3 T w/(2 s^5)
fn regularized_potential_gradient(w: Complex64, mu: MassParameter) -> Result<(f64, f64)> {
    check_regular_domain(w)?;
    let m = mu.value();
    let (w1, w2) = (w.re, w.im);
    let q2 = w1 * w1 + (w2 + 0.5) * (w2 + 0.5);
    let q3 = w1 * w1 + (w2 - 0.5) * (w2 - 0.5);
    let p1 = (w1 - A1.re).hypot(w2);
    let p2 = (w1 - A2.re).hypot(w2);
    let s = w.norm();
    let s3 = s * s * s;
    let s5 = s3 * s * s;

    let dq2 = (2.0 * w1, 2.0 * w2 + 1.0);
    let dq3 = (2.0 * w1, 2.0 * w2 - 1.0);
    let dp1 = ((w1 - A1.re) / p1, w2 / p1);
    let dp2 = ((w1 - A2.re) / p2, w2 / p2);

    let pp = p1 * p2;
    let t = (1.0 - 2.0 * m) * q2 * q3 / pp + m * (q2 + q3);
    let mut grad = (0.0, 0.0);
    for j in 0..2 {
        let (dq2j, dq3j) = if j == 0 {
            (dq2.0, dq3.0)
        } else {
            (dq2.1, dq3.1)
        };
        let (dp1j, dp2j) = if j == 0 {
            (dp1.0, dp2.0)
        } else {
            (dp1.1, dp2.1)
        };
        let dt = (1.0 - 2.0 * m)
            * ((dq2j * q3 + q2 * dq3j) / pp - q2 * q3 * (dp1j * p2 + p1 * dp2j) / (pp * pp))
            + m * (dq2j + dq3j);
        let wj = if j == 0 { w1 } else { w2 };
        let db = dt / (2.0 * s3) - 3.0 * t * wj / (2.0 * s5);
        if j == 0 {
            grad.0 = db;
        } else {
            grad.1 = db;
        }
    }
    Ok(grad)
}

/// The rotation term coefficient `G(w) = (f(w) + c) conj(f'(w))` with
/// `c = sqrt(3) mu - sqrt(3)/2`, so that `Hbar` carries `Im(G conj(W))`.
fn rotation_coefficient(w: Complex64, mu: MassParameter) -> Result<Complex64> {
    let a = birkhoff_map(w)? + translation_offset(mu);
    Ok(a * birkhoff_derivative(w)?.conj())
}

/// Regularized Hamiltonian on the level set of `C`:
///
/// `Hbar = |W|^2/2 + Im((f(w) + c) conj(f'(w) W)) - |f'|^2 V + |f'|^2 C/2`.
///
/// Along trajectories bridged from a synodic state on level `C`, `Hbar = 0`.
pub fn regularized_hamiltonian(state: &RegularizedState, mu: MassParameter) -> Result<f64> {
    check_regular_domain(state.w)?;
    let g = rotation_coefficient(state.w, mu)?;
    let b = regularized_potential_term(state.w, mu)?;
    let rho = time_rescaling(state.w)?;
    Ok(
        0.5 * state.momentum.norm_sqr() + (g * state.momentum.conj()).im - b
            + rho * state.jacobi / 2.0,
    )
}

/// Hamiltonian vector field of `Hbar` in fictitious time, with the physical
/// time quadrature appended: returns
/// `(dw1, dw2, dW1, dW2, dt)/dtau` for the state layout `[w1, w2, W1, W2, t]`.
///
/// Writing G = G1 + i G2 and W = W1 + i W2, the Hamiltonian reads
/// `Hbar = (W1^2 + W2^2)/2 + G2 W1 - G1 W2 - B + rho C/2`, so
///
///   dw1/dtau =  W1 + G2
///   dw2/dtau =  W2 - G1
///   dW1/dtau = -( d1G2 W1 - d1G1 W2 - d1B + d1rho C/2 )
///   dW2/dtau = -( d2G2 W1 - d2G1 W2 - d2B + d2rho C/2 )
///   dt/dtau  =  rho = |f'(w)|^2
///
/// where, for the analytic pieces (dX/dw2 = i dX/dw1 for analytic X),
///   dG/dw1 = f'(w) conj(f'(w)) + (f(w)+c) conj(f''(w))
///   dG/dw2 = i f'(w) conj(f'(w)) - i (f(w)+c) conj(f''(w))
///   drho/dw1 =  2 Re(f''(w) conj(f'(w)))
///   drho/dw2 = -2 Im(f''(w) conj(f'(w)))
pub fn regularized_rhs(state: &RegularizedState, mu: MassParameter) -> Result<[f64; 5]> {
    check_regular_domain(state.w)?;
    let w = state.w;
    let c = state.jacobi;
    let (wp1, wp2) = (state.momentum.re, state.momentum.im);

    let fw = birkhoff_map(w)?;
    let fp = birkhoff_derivative(w)?;
    let fpp = birkhoff_second_derivative(w);
    let a = fw + translation_offset(mu);

    let g = a * fp.conj();
    let dg_dw1 = fp * fp.conj() + a * fpp.conj();
    let dg_dw2 = Complex64::i() * fp * fp.conj() - Complex64::i() * a * fpp.conj();
    let drho_dw1 = 2.0 * (fpp * fp.conj()).re;
    let drho_dw2 = -2.0 * (fpp * fp.conj()).im;
    let (db_dw1, db_dw2) = regularized_potential_gradient(w, mu)?;

    Ok([
        wp1 + g.im,
        wp2 - g.re,
        -(dg_dw1.im * wp1 - dg_dw1.re * wp2 - db_dw1 + drho_dw1 * c / 2.0),
        -(dg_dw2.im * wp1 - dg_dw2.re * wp2 - db_dw2 + drho_dw2 * c / 2.0),
        fp.norm_sqr(),
    ])
}

/// Bridges a synodic state on Jacobi level `C` into the regularized chart.
///
/// The branch policy selects which of the two pre-image sheets carries the
/// state; round-tripping through [`to_synodic`] with the recorded branch is
/// the identity.
pub fn to_regularized(
    state: &SynodicState,
    mu: MassParameter,
    jacobi: f64,
    branch: BranchChoice,
) -> Result<RegularizedState> {
    let phase = to_phase_state(state);
    let u_state = to_u_state(&phase, mu);
    let u = u_state.u;
    if (u - U1).norm() < SINGULARITY_GUARD {
        return Err(Error::BranchSelection(
            "state at the unregularized primary m1: both pre-images are singular".into(),
        ));
    }
    if (u - U2).norm() < COLLISION_GUARD {
        return Err(Error::Singularity { index: 2 });
    }
    if (u - U3).norm() < COLLISION_GUARD {
        return Err(Error::Singularity { index: 3 });
    }
    let pre = preimages(u);
    let w = match branch {
        BranchChoice::Labeled(b) => pre.select(b),
        BranchChoice::Nearest(prev) => pre.nearest(prev).0,
    };
    let momentum = momentum_transform_inverse(u_state.momentum, w)?;
    Ok(RegularizedState {
        w,
        momentum,
        tau: 0.0,
        t_physical: state.t,
        jacobi,
    })
}

/// Maps a regularized state back to synodic coordinates. The physical time
/// carried by the state becomes the synodic `t`.
pub fn to_synodic(state: &RegularizedState, mu: MassParameter) -> Result<SynodicState> {
    check_regular_domain(state.w)?;
    let u = birkhoff_map(state.w)?;
    let u_momentum = momentum_transform(state.momentum, state.w)?;
    let phase = crate::dynamics::from_u_state(
        &UState {
            u,
            momentum: u_momentum,
        },
        mu,
    );
    Ok(to_synodic_state(&phase, state.t_physical))
}

/// `Hbar` evaluated from a synodic state bridged onto level `C`; used as the
/// second route when validating the closed-form assembly.
pub fn scaled_energy_residual(state: &SynodicState, mu: MassParameter, jacobi: f64) -> Result<f64> {
    let reg = to_regularized(state, mu, jacobi, BranchChoice::Labeled(Branch::Positive))?;
    regularized_hamiltonian(&reg, mu)
}
