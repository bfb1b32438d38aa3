//! Symmetric periodic orbits, natural-parameter continuation in the Jacobi
//! constant, and ejection-collision orbits launched exactly from the
//! regularized primaries.
//!
//! Symmetric orbits are characterized by perpendicular crossings of the
//! x-axis: a trajectory starting at `(x0, 0)` with `xdot = 0` that reaches a
//! second perpendicular crossing closes into a periodic orbit by the
//! reflection symmetry, with the full period twice the crossing time.

use crate::integrate::{
    integrate, integrate_switching, regularized_array, regularized_from_array, ChartState,
    EventDirection, EventKind, EventSpec, IntegratorConfig, PositionEvent, RegularizedSystem,
    Termination, Trajectory, TrajectoryEvent, TrajectorySample,
};
use crate::model::{
    effective_potential, jacobi_constant, MassParameter, PrimaryConfiguration, SynodicState,
};
use crate::regularization::{birkhoff_map, Branch, Chart, ChartTag, RegularizedState, U2, U3};
use crate::{fmt_f64, Error, Result};
use num_complex::Complex64;
use serde::Serialize;

/// A symmetric periodic orbit datum on the x-axis section.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeriodicOrbit {
    /// Section coordinate: position on the x-axis.
    pub x0: f64,
    /// Section velocity (the crossing is perpendicular: `xdot = 0`).
    pub ydot0: f64,
    pub period: f64,
    pub jacobi: f64,
    /// Trace of the finite-difference 2x2 period-map Jacobian; reported as an
    /// indicator only.
    pub stability_trace: f64,
    /// Shooting residual `|xdot|` at the half-period crossing.
    pub closure_residual: f64,
}

impl PeriodicOrbit {
    pub fn initial_state(&self) -> SynodicState {
        SynodicState::new(self.x0, 0.0, 0.0, self.ydot0)
    }

    /// Orientation diagnostic: angular momentum `x ydot - y xdot` at the
    /// section crossing.
    pub fn section_angular_momentum(&self) -> f64 {
        self.x0 * self.ydot0
    }
}

/// Which shooting unknown Newton varies.
#[derive(Debug, Clone, Copy)]
pub enum ShootingMode {
    /// Fix `x0`, vary `ydot0`.
    VaryYdot,
    /// Fix the Jacobi level: vary `x0` with `ydot0 = sign * sqrt(2 Omega - C)`.
    VaryX0 { jacobi: f64, ydot_sign: f64 },
}

const NEWTON_MAX_ITER: usize = 25;
const NEWTON_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-7;

fn ydot_on_level(x0: f64, jacobi: f64, sign: f64, mu: MassParameter) -> Result<f64> {
    let omega = effective_potential(x0, 0.0, mu)?;
    let v2 = 2.0 * omega - jacobi;
    if v2 < 0.0 {
        return Err(Error::Domain(format!(
            "x0 = {x0} outside the Hill region of C = {jacobi}"
        )));
    }
    Ok(sign * v2.sqrt())
}

/// Integrates from a perpendicular section state to the next x-axis crossing
/// (in either direction) and returns the crossing state.
fn section_crossing(
    mu: MassParameter,
    x0: f64,
    ydot0: f64,
    horizon: f64,
    config: &IntegratorConfig,
) -> Result<SynodicState> {
    let state = SynodicState::new(x0, 0.0, 0.0, ydot0);
    let jacobi = jacobi_constant(&state, mu)?;
    let crossing = PositionEvent {
        kind: EventKind::XAxisCrossing,
        direction: EventDirection::Any,
        terminal: true,
        g: Box::new(|_, z| z.im),
    };
    let traj = integrate_switching(&state, mu, jacobi, horizon, config, vec![crossing])?;
    match traj.termination {
        Termination::TerminalEvent {
            kind: EventKind::XAxisCrossing,
        } => traj.final_synodic(),
        Termination::TerminalEvent {
            kind: EventKind::CollisionM1,
        } => Err(Error::Singularity { index: 1 }),
        _ => Err(Error::NoCrossing { horizon }),
    }
}

/// Continues a crossing state to the following crossing (used to close a full
/// period out of two symmetric half-legs).
fn next_crossing(
    mu: MassParameter,
    from: &SynodicState,
    horizon: f64,
    config: &IntegratorConfig,
) -> Result<SynodicState> {
    let jacobi = jacobi_constant(from, mu)?;
    let crossing = PositionEvent {
        kind: EventKind::XAxisCrossing,
        direction: EventDirection::Any,
        terminal: true,
        g: Box::new(|_, z| z.im),
    };
    let traj = integrate_switching(from, mu, jacobi, horizon, config, vec![crossing])?;
    match traj.termination {
        Termination::TerminalEvent {
            kind: EventKind::XAxisCrossing,
        } => traj.final_synodic(),
        _ => Err(Error::NoCrossing { horizon }),
    }
}

/// Newton refinement of a symmetric periodic orbit from a section guess.
///
/// The shooting residual is `xdot` at the next x-axis crossing; its derivative
/// with respect to the free parameter comes from central differences with
/// step 1e-7. The guess must reach a crossing within five half-period guesses.
pub fn refine_symmetric_orbit(
    mu: MassParameter,
    x0_guess: f64,
    ydot0_guess: f64,
    mode: ShootingMode,
    half_period_guess: f64,
    config: &IntegratorConfig,
) -> Result<PeriodicOrbit> {
    if !half_period_guess.is_finite() || half_period_guess <= 0.0 {
        return Err(Error::Domain("half-period guess must be positive".into()));
    }
    let horizon = 5.0 * half_period_guess;

    let residual = |param: f64| -> Result<(f64, SynodicState)> {
        let (x0, ydot0) = match mode {
            ShootingMode::VaryYdot => (x0_guess, param),
            ShootingMode::VaryX0 { jacobi, ydot_sign } => {
                (param, ydot_on_level(param, jacobi, ydot_sign, mu)?)
            }
        };
        let crossing = section_crossing(mu, x0, ydot0, horizon, config)?;
        Ok((crossing.xdot, crossing))
    };

    let mut param = match mode {
        ShootingMode::VaryYdot => ydot0_guess,
        ShootingMode::VaryX0 { .. } => x0_guess,
    };

    let mut last = residual(param)?;
    for iteration in 0..NEWTON_MAX_ITER {
        if last.0.abs() <= NEWTON_TOL {
            let (x0, ydot0) = match mode {
                ShootingMode::VaryYdot => (x0_guess, param),
                ShootingMode::VaryX0 { jacobi, ydot_sign } => {
                    (param, ydot_on_level(param, jacobi, ydot_sign, mu)?)
                }
            };
            let half_period = last.1.t;
            let state = SynodicState::new(x0, 0.0, 0.0, ydot0);
            let jacobi = jacobi_constant(&state, mu)?;
            let trace = period_map_trace(mu, x0, ydot0, half_period, config).unwrap_or(f64::NAN);
            return Ok(PeriodicOrbit {
                x0,
                ydot0,
                period: 2.0 * half_period,
                jacobi,
                stability_trace: trace,
                closure_residual: last.0.abs(),
            });
        }
        let plus = residual(param + FD_STEP)?;
        let minus = residual(param - FD_STEP)?;
        let derivative = (plus.0 - minus.0) / (2.0 * FD_STEP);
        if derivative.abs() < 1e-14 {
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual: last.0.abs(),
            });
        }
        // Damped Newton: halve until the residual improves.
        let mut step = -last.0 / derivative;
        let mut improved = false;
        for _ in 0..30 {
            if let Ok(next) = residual(param + step) {
                if next.0.abs() < last.0.abs() {
                    param += step;
                    last = next;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            return Err(Error::NonConvergence {
                iterations: iteration + 1,
                residual: last.0.abs(),
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: NEWTON_MAX_ITER,
        residual: last.0.abs(),
    })
}

/// Full-period section map `(x, ydot) -> (x', ydot')` made of two successive
/// crossing legs.
fn period_map(
    mu: MassParameter,
    x0: f64,
    ydot0: f64,
    half_period_guess: f64,
    config: &IntegratorConfig,
) -> Result<(f64, f64)> {
    let horizon = 5.0 * half_period_guess;
    let first = section_crossing(mu, x0, ydot0, horizon, config)?;
    let second = next_crossing(mu, &first, horizon, config)?;
    Ok((second.x, second.ydot))
}

/// Trace of the finite-difference Jacobian of the period map (step 1e-6).
fn period_map_trace(
    mu: MassParameter,
    x0: f64,
    ydot0: f64,
    half_period: f64,
    config: &IntegratorConfig,
) -> Result<f64> {
    let h = 1e-6;
    let xp = period_map(mu, x0 + h, ydot0, half_period, config)?;
    let xm = period_map(mu, x0 - h, ydot0, half_period, config)?;
    let yp = period_map(mu, x0, ydot0 + h, half_period, config)?;
    let ym = period_map(mu, x0, ydot0 - h, half_period, config)?;
    let dxdx = (xp.0 - xm.0) / (2.0 * h);
    let dydy = (yp.1 - ym.1) / (2.0 * h);
    Ok(dxdx + dydy)
}

/// Why a continuation run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTermination {
    CollisionM1,
    CollisionM23,
    PeriodBlowup,
    StepFailure,
    Boundary,
}

/// One continued orbit with its per-period diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FamilyMember {
    #[serde(flatten)]
    pub orbit: PeriodicOrbit,
    /// Phase index; increments exactly at ejection-collision members.
    pub phase: usize,
    /// Ejection-collision flags per primary over one period.
    pub flags: [bool; 3],
    /// Minimum distance to each primary over one period.
    pub min_distance: [f64; 3],
    /// Signed transverse offset of the closest approach to m2; its sign flip
    /// locates collision passages of the family.
    pub collision_proxy: f64,
}

/// A continued family of symmetric periodic orbits.
#[derive(Debug, Clone)]
pub struct FamilyRecord {
    pub members: Vec<FamilyMember>,
    pub termination: FamilyTermination,
}

/// Step policy and stop policy of the natural-parameter continuation.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationPolicy {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Successive successes before the step grows by `growth`.
    pub grow_after: usize,
    pub growth: f64,
    pub max_members: usize,
    /// Total |Delta C| to sweep before stopping at the boundary.
    pub delta_c_total: f64,
    /// Terminate when the period exceeds this multiple of the seed period.
    pub period_blowup_factor: f64,
}

impl Default for ContinuationPolicy {
    fn default() -> Self {
        Self {
            initial_step: 2e-3,
            min_step: 1e-6,
            max_step: 1e-2,
            grow_after: 3,
            growth: 1.3,
            max_members: 10_000,
            delta_c_total: 0.2,
            period_blowup_factor: 50.0,
        }
    }
}

/// Natural-parameter continuation of a symmetric family in the Jacobi
/// constant. Steps adapt between `min_step` and `max_step` (halving on Newton
/// failure, growing after repeated successes); all trajectory work runs
/// through the chart-switching integrator so families continue through
/// collisions with the symmetric primaries.
pub fn continue_family(
    seed: &PeriodicOrbit,
    mu: MassParameter,
    direction: f64,
    policy: &ContinuationPolicy,
    config: &IntegratorConfig,
) -> Result<FamilyRecord> {
    if direction == 0.0 || !direction.is_finite() {
        return Err(Error::Domain(
            "continuation direction must be +1 or -1".into(),
        ));
    }
    let direction = direction.signum();
    let ydot_sign = if seed.ydot0 >= 0.0 { 1.0 } else { -1.0 };

    let mut members: Vec<FamilyMember> = Vec::new();
    let seed_diag = one_period_diagnostics(seed, mu, config)?;
    members.push(seed_diag);

    let mut step = policy.initial_step.clamp(policy.min_step, policy.max_step);
    let mut successes = 0usize;
    let mut swept = 0.0f64;
    let mut termination = FamilyTermination::Boundary;

    while members.len() < policy.max_members && swept < policy.delta_c_total {
        let last = members.last().expect("seed present");
        let target_c = last.orbit.jacobi + direction * step;
        // Secant extrapolation of x0 when two members are available.
        let guess_x0 = if members.len() >= 2 {
            let prev = &members[members.len() - 2];
            let dc = last.orbit.jacobi - prev.orbit.jacobi;
            if dc.abs() > 1e-15 {
                last.orbit.x0
                    + (last.orbit.x0 - prev.orbit.x0) / dc * (target_c - last.orbit.jacobi)
            } else {
                last.orbit.x0
            }
        } else {
            last.orbit.x0
        };

        let refined = refine_symmetric_orbit(
            mu,
            guess_x0,
            last.orbit.ydot0,
            ShootingMode::VaryX0 {
                jacobi: target_c,
                ydot_sign,
            },
            last.orbit.period / 2.0,
            config,
        );
        match refined {
            Ok(orbit) => {
                if orbit.period > policy.period_blowup_factor * seed.period {
                    termination = FamilyTermination::PeriodBlowup;
                    let mut member = one_period_diagnostics(&orbit, mu, config)?;
                    advance_phase(&mut member, members.last().unwrap(), config);
                    members.push(member);
                    break;
                }
                let mut member = one_period_diagnostics(&orbit, mu, config)?;
                advance_phase(&mut member, members.last().unwrap(), config);
                swept += step;
                members.push(member);
                successes += 1;
                if successes >= policy.grow_after {
                    step = (step * policy.growth).min(policy.max_step);
                    successes = 0;
                }
            }
            Err(Error::Singularity { index: 1 }) => {
                termination = FamilyTermination::CollisionM1;
                break;
            }
            Err(_) => {
                successes = 0;
                step *= 0.5;
                if step < policy.min_step {
                    termination = FamilyTermination::StepFailure;
                    break;
                }
            }
        }
    }
    Ok(FamilyRecord {
        members,
        termination,
    })
}

fn advance_phase(member: &mut FamilyMember, previous: &FamilyMember, config: &IntegratorConfig) {
    member.phase = previous.phase;
    // The signed transverse offset of the closest approach to m2 flips sign
    // exactly when the family sweeps through the collision; require the
    // approach to be local so distant sign jitter cannot increment the phase.
    let near =
        member.min_distance[1].min(previous.min_distance[1]) <= config.collision_switch_radius;
    if near && member.collision_proxy * previous.collision_proxy < 0.0 {
        member.phase += 1;
    }
}

/// One-period diagnostics of a converged orbit: minimum primary distances,
/// ejection-collision flags, and the signed m2 proxy. The period is covered as
/// a symmetric `[-T/2, T/2]` pass so both collision partners of a symmetric
/// orbit show up.
fn one_period_diagnostics(
    orbit: &PeriodicOrbit,
    mu: MassParameter,
    config: &IntegratorConfig,
) -> Result<FamilyMember> {
    let state = orbit.initial_state();
    let jacobi = jacobi_constant(&state, mu)?;
    let forward = integrate_switching(&state, mu, jacobi, orbit.period / 2.0, config, vec![])?;
    let backward = integrate_switching(&state, mu, jacobi, -orbit.period / 2.0, config, vec![])?;

    let mut min_distance = [f64::INFINITY; 3];
    for (i, d) in forward.min_primary_distance.iter().enumerate() {
        min_distance[i] = min_distance[i].min(*d);
    }
    for (i, d) in backward.min_primary_distance.iter().enumerate() {
        min_distance[i] = min_distance[i].min(*d);
    }

    let mut flags = [false; 3];
    flags[0] = matches!(
        forward.termination,
        Termination::TerminalEvent {
            kind: EventKind::CollisionM1
        }
    ) || matches!(
        backward.termination,
        Termination::TerminalEvent {
            kind: EventKind::CollisionM1
        }
    ) || min_distance[0] <= config.singularity_stop_radius;
    flags[1] = min_distance[1] <= EJECTION_COLLISION_DIST;
    flags[2] = min_distance[2] <= EJECTION_COLLISION_DIST;

    let proxy = collision_proxy(&forward, &backward, mu);
    Ok(FamilyMember {
        orbit: *orbit,
        phase: 0,
        flags,
        min_distance,
        collision_proxy: proxy,
    })
}

/// Signed transverse offset of the closest approach to m2 over the period:
/// the 2D cross product of the unit velocity with the offset vector at the
/// closest sample.
fn collision_proxy(forward: &Trajectory, backward: &Trajectory, mu: MassParameter) -> f64 {
    let z2 = PrimaryConfiguration::new(mu).position_complex(1);
    let mut best = f64::INFINITY;
    let mut proxy = f64::NAN;
    for sample in forward.samples.iter().chain(backward.samples.iter()) {
        let view = match sample.state.synodic_view(mu) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let offset = view.position() - z2;
        let dist = offset.norm();
        if dist < best {
            best = dist;
            let speed = view.velocity().norm();
            if speed > 0.0 {
                let v = view.velocity() / speed;
                proxy = v.re * offset.im - v.im * offset.re;
            }
        }
    }
    proxy
}

/// Distance at or below which a minimum counts as an exact collision passage.
pub const EJECTION_COLLISION_DIST: f64 = 1e-9;

/// Ejection-collision flags of a converged orbit over one period
/// (`[-T/2, T/2]` through the symmetric section state): m2/m3 flag when the
/// refined minimum distance reaches 1e-9, m1 when the stop radius is reached.
pub fn detect_ejection_collision(
    orbit: &PeriodicOrbit,
    mu: MassParameter,
    config: &IntegratorConfig,
) -> Result<[bool; 3]> {
    Ok(one_period_diagnostics(orbit, mu, config)?.flags)
}

/// Launch momentum magnitude of an ejection orbit: at `w = u_i` the vanishing
/// time factor kills every `Hbar` term except `|W|^2/2 - 4 mu`, so
/// `|W| = sqrt(8 mu)` on the zero level regardless of `C`.
pub fn ejection_momentum_magnitude(mu: MassParameter) -> f64 {
    (8.0 * mu.value()).sqrt()
}

/// A trajectory launched exactly from a collision with `m2` or `m3`.
#[derive(Debug)]
pub struct EjectionCollisionOrbit {
    /// Which primary the orbit ejects from (2 or 3).
    pub primary: usize,
    pub launch_angle: f64,
    pub jacobi: f64,
    /// Launch momentum (`|W| = sqrt(8 mu)`).
    pub initial_momentum: Complex64,
    pub trajectory: Trajectory,
    /// Collision passages detected after launch (may include both primaries).
    pub return_collisions: Vec<TrajectoryEvent>,
}

/// Integrates an ejection orbit in the regularized chart from `w = u_i` with
/// the momentum direction set by `launch_angle` and `|W|` fixed by `Hbar = 0`.
/// A signed `tau_horizon` integrates backward (an orbit arriving in collision).
///
/// Exceeding the horizon without further events is not an error: the result
/// simply carries no return collisions.
pub fn ejection_orbit(
    primary: usize,
    jacobi: f64,
    launch_angle: f64,
    tau_horizon: f64,
    mu: MassParameter,
    config: &IntegratorConfig,
) -> Result<EjectionCollisionOrbit> {
    if primary != 2 && primary != 3 {
        return Err(Error::Domain(format!(
            "primary {primary} is not regularized (use 2 or 3)"
        )));
    }
    if mu.value() == 0.0 {
        return Err(Error::Degenerate(
            "mu = 0: the symmetric primaries are massless".into(),
        ));
    }
    let w0 = if primary == 2 { U2 } else { U3 };
    let momentum = Complex64::from_polar(ejection_momentum_magnitude(mu), launch_angle);
    let initial = RegularizedState {
        w: w0,
        momentum,
        tau: 0.0,
        t_physical: 0.0,
        jacobi,
    };
    let trajectory = integrate_regularized_trajectory(&initial, mu, tau_horizon, config)?;
    let return_collisions = trajectory
        .events
        .iter()
        .filter(|e| {
            matches!(e.kind, EventKind::CollisionM2 | EventKind::CollisionM3) && e.t.abs() > 1e-12
        })
        .copied()
        .collect();
    Ok(EjectionCollisionOrbit {
        primary,
        launch_angle,
        jacobi,
        initial_momentum: momentum,
        trajectory,
        return_collisions,
    })
}

/// Integrates the regularized system without chart switching, recording
/// collision passages, m1 approaches, and escapes.
pub fn integrate_regularized_trajectory(
    initial: &RegularizedState,
    mu: MassParameter,
    tau_horizon: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let system = RegularizedSystem {
        mu,
        jacobi: initial.jacobi,
    };
    let jacobi = initial.jacobi;
    let stop = config.singularity_stop_radius;
    let escape = config.escape_radius;
    let offset = crate::regularization::translation_offset_complex(mu);

    let radial_velocity = move |y: &[f64; 5], center: Complex64| -> f64 {
        let state = regularized_from_array(y, 0.0, jacobi);
        match crate::regularization::regularized_rhs(&state, mu) {
            Ok(d) => {
                let rel = state.w - center;
                2.0 * (rel.conj() * Complex64::new(d[0], d[1])).re
            }
            Err(_) => f64::NAN,
        }
    };

    let specs: Vec<EventSpec<'_, 5>> = vec![
        EventSpec {
            kind: EventKind::CollisionM2,
            direction: EventDirection::Any,
            terminal: false,
            g: Box::new(move |_, y| radial_velocity(y, U2)),
        },
        EventSpec {
            kind: EventKind::CollisionM3,
            direction: EventDirection::Any,
            terminal: false,
            g: Box::new(move |_, y| radial_velocity(y, U3)),
        },
        EventSpec {
            kind: EventKind::CollisionM1,
            direction: EventDirection::Falling,
            terminal: true,
            g: Box::new(move |_, y| {
                let u = birkhoff_map(Complex64::new(y[0], y[1])).expect("regular");
                (u - crate::regularization::U1).norm() - stop
            }),
        },
        EventSpec {
            kind: EventKind::Escape,
            direction: EventDirection::Rising,
            terminal: true,
            g: Box::new(move |_, y| {
                let u = birkhoff_map(Complex64::new(y[0], y[1])).expect("regular");
                (u + offset).norm() - escape
            }),
        },
        EventSpec {
            kind: EventKind::XAxisCrossing,
            direction: EventDirection::Any,
            terminal: false,
            g: Box::new(|_, y| {
                birkhoff_map(Complex64::new(y[0], y[1]))
                    .expect("regular")
                    .im
            }),
        },
    ];

    let raw = integrate(
        &system,
        0.0,
        &regularized_array(initial),
        tau_horizon,
        config,
        &specs,
    )?;

    let branch = Branch::Positive;
    let mut traj = Trajectory {
        mu,
        samples: Vec::with_capacity(raw.samples.len()),
        events: Vec::new(),
        termination: raw.termination,
        min_primary_distance: [f64::INFINITY; 3],
    };
    for (tau, y) in &raw.samples {
        let s = regularized_from_array(y, *tau, jacobi);
        let u = birkhoff_map(s.w).expect("regular");
        let d = [
            (u - crate::regularization::U1).norm(),
            (u - U2).norm(),
            (u - U3).norm(),
        ];
        for (slot, di) in traj.min_primary_distance.iter_mut().zip(&d) {
            *slot = slot.min(*di);
        }
        traj.samples.push(TrajectorySample {
            t: s.t_physical,
            state: ChartState::Regularized(s),
            tag: ChartTag::regularized(branch),
        });
    }
    for ev in &raw.events {
        if ev.spec_index == usize::MAX {
            continue;
        }
        let spec_kind = specs[ev.spec_index].kind;
        let s = regularized_from_array(&ev.y, ev.t, jacobi);
        let z = s.synodic_position(mu).expect("regular");
        match spec_kind {
            EventKind::CollisionM2 | EventKind::CollisionM3 => {
                let (idx, center) = if spec_kind == EventKind::CollisionM2 {
                    (1, U2)
                } else {
                    (2, U3)
                };
                let dist = (birkhoff_map(s.w).expect("regular") - center).norm();
                traj.min_primary_distance[idx] = traj.min_primary_distance[idx].min(dist);
                if dist <= EJECTION_COLLISION_DIST {
                    traj.events.push(TrajectoryEvent {
                        t: s.t_physical,
                        kind: spec_kind,
                        chart: Chart::Regularized,
                        x: z.re,
                        y: z.im,
                        xdot: None,
                        ydot: None,
                        w_re: Some(s.w.re),
                        w_im: Some(s.w.im),
                    });
                }
            }
            kind => {
                let view = crate::regularization::to_synodic(&s, mu).ok();
                traj.events.push(TrajectoryEvent {
                    t: s.t_physical,
                    kind,
                    chart: Chart::Regularized,
                    x: z.re,
                    y: z.im,
                    xdot: view.map(|v| v.xdot),
                    ydot: view.map(|v| v.ydot),
                    w_re: Some(s.w.re),
                    w_im: Some(s.w.im),
                });
            }
        }
    }
    Ok(traj)
}

/// Serializes a family as JSON lines, one orbit per line.
pub fn family_to_jsonl(record: &FamilyRecord) -> String {
    let mut out = String::new();
    for member in &record.members {
        #[derive(Serialize)]
        #[allow(non_snake_case)]
        struct Line {
            x0: f64,
            ydot0: f64,
            T: f64,
            C: f64,
            residual: f64,
            phase: usize,
            flags: [bool; 3],
            stability_trace: f64,
            min_distance_m1: f64,
            min_distance_m2: f64,
            min_distance_m3: f64,
        }
        let line = Line {
            x0: member.orbit.x0,
            ydot0: member.orbit.ydot0,
            T: member.orbit.period,
            C: member.orbit.jacobi,
            residual: member.orbit.closure_residual,
            phase: member.phase,
            flags: member.flags,
            stability_trace: member.orbit.stability_trace,
            min_distance_m1: member.min_distance[0],
            min_distance_m2: member.min_distance[1],
            min_distance_m3: member.min_distance[2],
        };
        out.push_str(&serde_json::to_string(&line).expect("family line serializes"));
        out.push('\n');
    }
    out
}

/// Human-readable one-line summary used by the CLI.
pub fn orbit_summary(orbit: &PeriodicOrbit) -> String {
    format!(
        "x0={} ydot0={} T={} C={} residual={}",
        fmt_f64(orbit.x0),
        fmt_f64(orbit.ydot0),
        fmt_f64(orbit.period),
        fmt_f64(orbit.jacobi),
        fmt_f64(orbit.closure_residual)
    )
}

/// Phase indices induced by a sequence of (proxy, min-distance) diagnostics;
/// exposed for direct testing of the increment rule.
pub fn phases_from_proxies(data: &[(f64, f64)], locality: f64) -> Vec<usize> {
    let mut phases = Vec::with_capacity(data.len());
    let mut phase = 0usize;
    for (i, (proxy, dist)) in data.iter().enumerate() {
        if i > 0 {
            let (prev_proxy, prev_dist) = data[i - 1];
            if dist.min(prev_dist) <= locality && proxy * prev_proxy < 0.0 {
                phase += 1;
            }
        }
        phases.push(phase);
    }
    phases
}
