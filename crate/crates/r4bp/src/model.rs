//! Physical setup: masses, primary geometry, effective potential, Jacobi integral,
//! and the dimensional-to-dimensionless reduction.

use crate::{Error, Result};
use num_complex::Complex64;

/// Distance below which potential evaluations at a primary raise
/// [`Error::Singularity`] instead of overflowing.
pub const SINGULARITY_GUARD: f64 = 1e-13;

/// Relative tolerance used when enforcing Kepler's third law on construction.
pub const KEPLER_TOL: f64 = 1e-12;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// A planar point; converts to and from [`Complex64`] by exact field copies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<Complex64> for Point2 {
    fn from(z: Complex64) -> Self {
        Self { x: z.re, y: z.im }
    }
}

impl From<Point2> for Complex64 {
    fn from(p: Point2) -> Self {
        Complex64::new(p.x, p.y)
    }
}

/// Mass parameter of the symmetric family: `mu2 = mu3 = mu`, `mu1 = 1 - 2 mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassParameter {
    mu: f64,
}

impl MassParameter {
    /// Requires `mu` in `[0, 1/2]`.
    pub fn new(mu: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&mu) || !mu.is_finite() {
            return Err(Error::Domain(format!("mu = {mu} outside [0, 1/2]")));
        }
        Ok(Self { mu })
    }

    pub fn value(&self) -> f64 {
        self.mu
    }

    /// Masses `(mu1, mu2, mu3) = (1 - 2 mu, mu, mu)`.
    pub fn masses(&self) -> [f64; 3] {
        [1.0 - 2.0 * self.mu, self.mu, self.mu]
    }
}

/// A dimensional configuration: gravitational constant, three masses, triangle
/// side, and mean motion, tied together by Kepler's third law
/// `k2 (m1 + m2 + m3) = n^2 L^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalSystem {
    pub gravitational_constant_k2: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub triangle_side: f64,
    pub mean_motion: f64,
}

impl DimensionalSystem {
    pub fn new(k2: f64, m1: f64, m2: f64, m3: f64, side: f64, mean_motion: f64) -> Result<Self> {
        for (name, v) in [
            ("k2", k2),
            ("m1", m1),
            ("m2", m2),
            ("m3", m3),
            ("L", side),
            ("n", mean_motion),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSystem(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        let lhs = k2 * (m1 + m2 + m3);
        let rhs = mean_motion * mean_motion * side.powi(3);
        if (lhs - rhs).abs() > KEPLER_TOL * lhs.abs().max(rhs.abs()) {
            return Err(Error::InvalidSystem(format!(
                "Kepler's third law violated: k2 M = {lhs}, n^2 L^3 = {rhs}"
            )));
        }
        Ok(Self {
            gravitational_constant_k2: k2,
            m1,
            m2,
            m3,
            triangle_side: side,
            mean_motion,
        })
    }

    /// Builds a consistent system by computing the mean motion from Kepler's
    /// third law, `n = sqrt(k2 M / L^3)`.
    pub fn with_kepler_mean_motion(k2: f64, m1: f64, m2: f64, m3: f64, side: f64) -> Result<Self> {
        for (name, v) in [("k2", k2), ("m1", m1), ("m2", m2), ("m3", m3), ("L", side)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSystem(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        let n = (k2 * (m1 + m2 + m3) / side.powi(3)).sqrt();
        Self::new(k2, m1, m2, m3, side, n)
    }

    pub fn total_mass(&self) -> f64 {
        self.m1 + self.m2 + self.m3
    }
}

/// State of the massless particle in the rotating frame, dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynodicState {
    pub x: f64,
    pub y: f64,
    pub xdot: f64,
    pub ydot: f64,
    pub t: f64,
}

impl SynodicState {
    pub fn new(x: f64, y: f64, xdot: f64, ydot: f64) -> Self {
        Self {
            x,
            y,
            xdot,
            ydot,
            t: 0.0,
        }
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn position(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn velocity(&self) -> Complex64 {
        Complex64::new(self.xdot, self.ydot)
    }

    /// Distances to the three primaries.
    pub fn primary_distances(&self, mu: MassParameter) -> [f64; 3] {
        let config = PrimaryConfiguration::new(mu);
        config.positions.map(|p| (self.x - p.x).hypot(self.y - p.y))
    }

    /// Whether any primary lies within `radius` of this state.
    pub fn near_collision(&self, mu: MassParameter, radius: f64) -> Option<usize> {
        self.primary_distances(mu)
            .iter()
            .position(|&r| r < radius)
            .map(|i| i + 1)
    }
}

/// Vertices of the rotating equilateral triangle and the masses at them.
///
/// `m1` lies on the positive x-axis, `m2`/`m3` symmetric below/above it:
/// `z1 = (sqrt(3) mu, 0)`, `z2,3 = (-sqrt(3)(1-2mu)/2, -/+ 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryConfiguration {
    pub positions: [Point2; 3],
    pub masses: [f64; 3],
}

impl PrimaryConfiguration {
    pub fn new(mu: MassParameter) -> Self {
        let m = mu.value();
        let positions = [
            Point2::new(SQRT3 * m, 0.0),
            Point2::new(-SQRT3 * (1.0 - 2.0 * m) / 2.0, -0.5),
            Point2::new(-SQRT3 * (1.0 - 2.0 * m) / 2.0, 0.5),
        ];
        Self {
            positions,
            masses: mu.masses(),
        }
    }

    pub fn position_complex(&self, index: usize) -> Complex64 {
        self.positions[index].into()
    }
}

/// Converts a dimensional state to synodic dimensionless coordinates and the
/// mass parameter: `x = xbar / L`, `t = n tbar`, velocities by `1/(L n)`.
///
/// Requires `m2 = m3` (the symmetric family is the only one modeled).
pub fn nondimensionalize(
    sys: &DimensionalSystem,
    position: Point2,
    velocity: Point2,
    time: f64,
) -> Result<(SynodicState, MassParameter)> {
    let total = sys.total_mass();
    if (sys.m2 - sys.m3).abs() > 1e-12 * total {
        return Err(Error::InvalidSystem(format!(
            "m2 = {} and m3 = {} must be equal",
            sys.m2, sys.m3
        )));
    }
    let mu = MassParameter::new(sys.m2 / total)?;
    let scale_l = sys.triangle_side;
    let scale_v = sys.triangle_side * sys.mean_motion;
    let state = SynodicState {
        x: position.x / scale_l,
        y: position.y / scale_l,
        xdot: velocity.x / scale_v,
        ydot: velocity.y / scale_v,
        t: sys.mean_motion * time,
    };
    Ok((state, mu))
}

/// Inverse of [`nondimensionalize`]: returns `(position, velocity, time)` in
/// the dimensional units of `sys`.
pub fn redimensionalize(sys: &DimensionalSystem, state: &SynodicState) -> (Point2, Point2, f64) {
    let scale_l = sys.triangle_side;
    let scale_v = sys.triangle_side * sys.mean_motion;
    (
        Point2::new(state.x * scale_l, state.y * scale_l),
        Point2::new(state.xdot * scale_v, state.ydot * scale_v),
        state.t / sys.mean_motion,
    )
}

fn guard_distances(x: f64, y: f64, config: &PrimaryConfiguration) -> Result<[f64; 3]> {
    let mut r = [0.0; 3];
    for (i, p) in config.positions.iter().enumerate() {
        r[i] = (x - p.x).hypot(y - p.y);
        if r[i] < SINGULARITY_GUARD && config.masses[i] > 0.0 {
            return Err(Error::Singularity { index: i + 1 });
        }
    }
    Ok(r)
}

/// Effective potential `Omega = (x^2 + y^2)/2 + sum_i mu_i / r_i`.
///
/// Zero-mass primaries contribute nothing and their positions are not singular.
pub fn effective_potential(x: f64, y: f64, mu: MassParameter) -> Result<f64> {
    let config = PrimaryConfiguration::new(mu);
    let r = guard_distances(x, y, &config)?;
    let mut omega = 0.5 * (x * x + y * y);
    for (m, ri) in config.masses.iter().zip(&r) {
        if *m > 0.0 {
            omega += m / ri;
        }
    }
    Ok(omega)
}

/// Analytic gradient `(Omega_x, Omega_y)`.
pub fn effective_potential_gradient(x: f64, y: f64, mu: MassParameter) -> Result<(f64, f64)> {
    let config = PrimaryConfiguration::new(mu);
    let r = guard_distances(x, y, &config)?;
    let mut gx = x;
    let mut gy = y;
    for ((m, p), ri) in config.masses.iter().zip(&config.positions).zip(&r) {
        if *m > 0.0 {
            let r3 = ri * ri * ri;
            gx -= m * (x - p.x) / r3;
            gy -= m * (y - p.y) / r3;
        }
    }
    Ok((gx, gy))
}

/// Analytic Hessian of `Omega` as `(Omega_xx, Omega_xy, Omega_yy)`.
pub fn effective_potential_hessian(x: f64, y: f64, mu: MassParameter) -> Result<(f64, f64, f64)> {
    let config = PrimaryConfiguration::new(mu);
    let r = guard_distances(x, y, &config)?;
    let (mut hxx, mut hxy, mut hyy) = (1.0, 0.0, 1.0);
    for ((m, p), ri) in config.masses.iter().zip(&config.positions).zip(&r) {
        if *m > 0.0 {
            let dx = x - p.x;
            let dy = y - p.y;
            let r2 = ri * ri;
            let r5 = r2 * r2 * ri;
            hxx += m * (3.0 * dx * dx - r2) / r5;
            hxy += m * 3.0 * dx * dy / r5;
            hyy += m * (3.0 * dy * dy - r2) / r5;
        }
    }
    Ok((hxx, hxy, hyy))
}

/// Jacobi integral `C = 2 Omega(x, y) - (xdot^2 + ydot^2)`.
pub fn jacobi_constant(state: &SynodicState, mu: MassParameter) -> Result<f64> {
    let omega = effective_potential(state.x, state.y, mu)?;
    Ok(2.0 * omega - (state.xdot * state.xdot + state.ydot * state.ydot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mu(v: f64) -> MassParameter {
        MassParameter::new(v).unwrap()
    }

    #[test]
    fn primary_geometry_invariants_across_mu() {
        for k in 0..=50 {
            let m = mu(0.5 * k as f64 / 50.0);
            let config = PrimaryConfiguration::new(m);
            let p = &config.positions;
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                assert!((p[i].distance(&p[j]) - 1.0).abs() < 1e-12, "side {i}{j}");
            }
            let (mut cx, mut cy) = (0.0, 0.0);
            for (m, q) in config.masses.iter().zip(p) {
                cx += m * q.x;
                cy += m * q.y;
            }
            assert!(cx.abs() < 1e-12 && cy.abs() < 1e-12, "center of mass");
        }
    }

    #[test]
    fn limiting_cases_of_mu() {
        let config = PrimaryConfiguration::new(mu(0.0));
        assert_eq!(config.positions[0], Point2::new(0.0, 0.0));
        assert_eq!(config.masses, [1.0, 0.0, 0.0]);

        let config = PrimaryConfiguration::new(mu(0.5));
        assert!(config.masses[0].abs() < 1e-15);
        assert_eq!(config.masses[1], 0.5);

        let config = PrimaryConfiguration::new(mu(1.0 / 3.0));
        assert!((config.positions[0].x - SQRT3 / 3.0).abs() < 1e-15);
        assert!((config.positions[1].x + SQRT3 / 6.0).abs() < 1e-15);
        assert_eq!(config.positions[1].y, -0.5);
        assert_eq!(config.positions[2].y, 0.5);
    }

    #[test]
    fn mass_parameter_domain() {
        assert!(MassParameter::new(-0.01).is_err());
        assert!(MassParameter::new(0.51).is_err());
        assert!(MassParameter::new(f64::NAN).is_err());
        assert!(MassParameter::new(0.0).is_ok());
        assert!(MassParameter::new(0.5).is_ok());
    }

    #[test]
    fn potential_at_origin_equal_masses() {
        // All three distances are 1/sqrt(3), so Omega = 3 * (1/3) * sqrt(3) = sqrt(3).
        let m = mu(1.0 / 3.0);
        let config = PrimaryConfiguration::new(m);
        for p in &config.positions {
            assert!((p.distance(&Point2::new(0.0, 0.0)) - 1.0 / SQRT3).abs() < 1e-14);
        }
        let omega = effective_potential(0.0, 0.0, m).unwrap();
        assert!((omega - SQRT3).abs() < 1e-14, "Omega(0,0) = {omega}");
    }

    #[test]
    fn potential_reflection_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = mu(rng.gen_range(0.0..=0.5));
            let x = rng.gen_range(-2.0..2.0);
            let y = rng.gen_range(-2.0..2.0);
            let a = effective_potential(x, y, m);
            let b = effective_potential(x, -y, m);
            match (a, b) {
                (Ok(a), Ok(b)) => assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0)),
                (Err(_), Err(_)) => {}
                _ => panic!("symmetry broke the error surface"),
            }
        }
    }

    #[test]
    fn potential_far_field_single_primary() {
        let m = mu(0.0);
        for &r in &[10.0, 50.0, 200.0] {
            let omega = effective_potential(r, 0.0, m).unwrap();
            assert!((omega - (r * r / 2.0 + 1.0 / r)).abs() < 1e-10 * omega);
        }
    }

    #[test]
    fn potential_singularity_carries_primary_index() {
        let m = mu(0.2);
        let config = PrimaryConfiguration::new(m);
        for (i, p) in config.positions.iter().enumerate() {
            match effective_potential(p.x, p.y, m) {
                Err(Error::Singularity { index }) => assert_eq!(index, i + 1),
                other => panic!("expected singularity, got {other:?}"),
            }
        }
        // Massless primary positions are regular.
        let m0 = mu(0.0);
        let config = PrimaryConfiguration::new(m0);
        let p = config.positions[1];
        assert!(effective_potential(p.x, p.y, m0).is_ok());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        let mut checked = 0;
        while checked < 100 {
            let m = mu(rng.gen_range(0.0..=0.5));
            let x = rng.gen_range(-2.0..2.0);
            let y = rng.gen_range(-2.0..2.0);
            let s = SynodicState::new(x, y, 0.0, 0.0);
            if s.primary_distances(m).iter().any(|&r| r < 0.1) {
                continue;
            }
            let (gx, gy) = effective_potential_gradient(x, y, m).unwrap();
            let fx = (effective_potential(x + h, y, m).unwrap()
                - effective_potential(x - h, y, m).unwrap())
                / (2.0 * h);
            let fy = (effective_potential(x, y + h, m).unwrap()
                - effective_potential(x, y - h, m).unwrap())
                / (2.0 * h);
            assert!((gx - fx).abs() <= 1e-6, "dOmega/dx at ({x},{y})");
            assert!((gy - fy).abs() <= 1e-6, "dOmega/dy at ({x},{y})");
            checked += 1;
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = 1e-5;
        let mut checked = 0;
        while checked < 50 {
            let m = mu(rng.gen_range(0.01..=0.5));
            let x = rng.gen_range(-2.0..2.0);
            let y = rng.gen_range(-2.0..2.0);
            if SynodicState::new(x, y, 0.0, 0.0)
                .primary_distances(m)
                .iter()
                .any(|&r| r < 0.15)
            {
                continue;
            }
            let (hxx, hxy, hyy) = effective_potential_hessian(x, y, m).unwrap();
            let gp = effective_potential_gradient(x + h, y, m).unwrap();
            let gm = effective_potential_gradient(x - h, y, m).unwrap();
            assert!((hxx - (gp.0 - gm.0) / (2.0 * h)).abs() < 1e-5);
            assert!((hxy - (gp.1 - gm.1) / (2.0 * h)).abs() < 1e-5);
            let gp = effective_potential_gradient(x, y + h, m).unwrap();
            let gm = effective_potential_gradient(x, y - h, m).unwrap();
            assert!((hyy - (gp.1 - gm.1) / (2.0 * h)).abs() < 1e-5);
            checked += 1;
        }
    }

    #[test]
    fn jacobi_constant_zero_velocity_origin() {
        let m = mu(1.0 / 3.0);
        let state = SynodicState::new(0.0, 0.0, 0.0, 0.0);
        let c = jacobi_constant(&state, m).unwrap();
        assert!((c - 2.0 * SQRT3).abs() < 1e-14);
    }

    #[test]
    fn nondimensionalize_identity_scaling() {
        let sys = DimensionalSystem::new(1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0, 1.0).unwrap();
        let (state, m) =
            nondimensionalize(&sys, Point2::new(1.0, 0.0), Point2::new(0.0, 0.3), 2.0).unwrap();
        assert_eq!(state.x, 1.0);
        assert_eq!(state.ydot, 0.3);
        assert_eq!(state.t, 2.0);
        assert!((m.value() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn nondimensionalize_rejects_kepler_violation() {
        // k2 M = 1 but n^2 L^3 = 1.01: off by 1%.
        let err = DimensionalSystem::new(1.0, 0.8, 0.1, 0.1, 1.0, 1.01f64.sqrt());
        assert!(matches!(err, Err(Error::InvalidSystem(_))));
        assert!(DimensionalSystem::new(1.0, 0.8, 0.1, 0.1, -1.0, 1.0).is_err());
    }

    #[test]
    fn nondimensionalize_round_trip_l2() {
        // L = 2, k2 = 1, M = 1 gives n = sqrt(1/8).
        let sys = DimensionalSystem::with_kepler_mean_motion(1.0, 0.5, 0.25, 0.25, 2.0).unwrap();
        assert!((sys.mean_motion - (1.0f64 / 8.0).sqrt()).abs() < 1e-15);
        let pos = Point2::new(0.7, -1.3);
        let vel = Point2::new(0.2, 0.11);
        let time = 5.0;
        let (state, _) = nondimensionalize(&sys, pos, vel, time).unwrap();
        let (p2, v2, t2) = redimensionalize(&sys, &state);
        assert!((p2.x - pos.x).abs() < 1e-12 * pos.x.abs());
        assert!((p2.y - pos.y).abs() < 1e-12 * pos.y.abs());
        assert!((v2.x - vel.x).abs() < 1e-12 * vel.x.abs());
        assert!((v2.y - vel.y).abs() < 1e-12 * vel.y.abs());
        assert!((t2 - time).abs() < 1e-12 * time);
    }

    #[test]
    fn nondimensionalize_requires_symmetric_masses() {
        let sys = DimensionalSystem::with_kepler_mean_motion(1.0, 0.5, 0.3, 0.2, 1.0).unwrap();
        assert!(matches!(
            nondimensionalize(&sys, Point2::new(0.0, 0.0), Point2::new(0.0, 0.0), 0.0),
            Err(Error::InvalidSystem(_))
        ));
    }
}
