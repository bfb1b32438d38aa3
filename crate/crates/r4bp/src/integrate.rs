//! Adaptive ODE integration with event detection and automatic chart switching
//! through collisions with the regularized primaries.
//!
//! The stepper is an embedded 13-stage Runge-Kutta 7(8) pair; the 8th-order
//! solution advances the state and the difference against the 7th-order one
//! drives the step controller. Events are located by bisection on the sign of
//! an event function, re-stepping exactly onto each candidate time, so event
//! states carry full integration accuracy and event times are refined well
//! below the 1e-10 contract.

use crate::dynamics::synodic_rhs;
use crate::model::{jacobi_constant, MassParameter, SynodicState};
use crate::regularization::{
    birkhoff_map, preimages, regularized_rhs, to_regularized, to_synodic,
    translation_offset_complex, Branch, BranchChoice, Chart, ChartTag, RegularizedState, U1, U2,
    U3,
};
use crate::{fmt_f64, Error, Result};
use num_complex::Complex64;
use serde::Serialize;

// ---------------------------------------------------------------------------
// Runge-Kutta-Fehlberg 7(8) tableau (13 stages).
// ---------------------------------------------------------------------------

const STAGES: usize = 13;

const C: [f64; STAGES] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    1.0 / 2.0,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

const A: [[f64; 12]; STAGES] = [
    [0.0; 12],
    [
        2.0 / 27.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.0 / 36.0,
        1.0 / 12.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.0 / 24.0,
        0.0,
        1.0 / 8.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        5.0 / 12.0,
        0.0,
        -25.0 / 16.0,
        25.0 / 16.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.0 / 20.0,
        0.0,
        0.0,
        1.0 / 4.0,
        1.0 / 5.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -25.0 / 108.0,
        0.0,
        0.0,
        125.0 / 108.0,
        -65.0 / 27.0,
        125.0 / 54.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        31.0 / 300.0,
        0.0,
        0.0,
        0.0,
        61.0 / 225.0,
        -2.0 / 9.0,
        13.0 / 900.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.0,
        0.0,
        0.0,
        -53.0 / 6.0,
        704.0 / 45.0,
        -107.0 / 9.0,
        67.0 / 90.0,
        3.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -91.0 / 108.0,
        0.0,
        0.0,
        23.0 / 108.0,
        -976.0 / 135.0,
        311.0 / 54.0,
        -19.0 / 60.0,
        17.0 / 6.0,
        -1.0 / 12.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2383.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -301.0 / 82.0,
        2133.0 / 4100.0,
        45.0 / 82.0,
        45.0 / 164.0,
        18.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        3.0 / 205.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -6.0 / 41.0,
        -3.0 / 205.0,
        -3.0 / 41.0,
        3.0 / 41.0,
        6.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        -1777.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -289.0 / 82.0,
        2193.0 / 4100.0,
        51.0 / 82.0,
        33.0 / 164.0,
        12.0 / 41.0,
        0.0,
        1.0,
    ],
];

/// Weights of the 8th-order solution (used to advance the state).
const B8: [f64; STAGES] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

/// `y7 - y8 = h * 41/840 * (k0 + k10 - k11 - k12)`.
const ERR_COEFF: f64 = 41.0 / 840.0;

// ---------------------------------------------------------------------------
// Generic integration core.
// ---------------------------------------------------------------------------

/// Right-hand side of a first-order system; may fail at singular states.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]>;
}

/// Integrator tuning and switching policy.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Distance to m2/m3 below which integration moves to the regularized chart.
    pub collision_switch_radius: f64,
    /// Distance to m1 at which integration stops (m1 stays unregularized).
    pub singularity_stop_radius: f64,
    /// |z| beyond which the trajectory is flagged as escaping.
    pub escape_radius: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            max_step: 0.1,
            max_steps: 2_000_000,
            collision_switch_radius: 0.05,
            singularity_stop_radius: 1e-3,
            escape_radius: 20.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(1e-14..=1e-3).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {v} outside [1e-14, 1e-3]"
                )));
            }
        }
        if !positive(self.max_step) {
            return Err(Error::InvalidConfig("max_step must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        if !positive(self.singularity_stop_radius) || !positive(self.escape_radius) {
            return Err(Error::InvalidConfig("radii must be positive".into()));
        }
        if self.collision_switch_radius <= self.singularity_stop_radius {
            return Err(Error::InvalidConfig(
                "collision_switch_radius must exceed singularity_stop_radius".into(),
            ));
        }
        Ok(())
    }
}

/// Crossing direction filter for event functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventDirection {
    Rising,
    Falling,
    Any,
}

/// Kinds of recorded trajectory events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    CollisionM1,
    CollisionM2,
    CollisionM3,
    XAxisCrossing,
    Escape,
    ChartSwitch,
    SingularityStop,
}

/// Scalar event function of `(t, y)`; a sign change marks the event.
pub type EventFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>;

/// An event to monitor during integration of an `N`-dimensional system.
pub struct EventSpec<'a, const N: usize> {
    pub kind: EventKind,
    pub direction: EventDirection,
    pub terminal: bool,
    pub g: EventFn<'a, N>,
}

/// How an integration segment ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Termination {
    Horizon,
    TerminalEvent { kind: EventKind },
    SingularityStop { t: f64 },
}

/// Event record of the generic core.
#[derive(Debug, Clone, Copy)]
pub struct RawEvent<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub spec_index: usize,
}

/// Output of the generic core: accepted-step samples plus refined events.
pub struct RawTrajectory<const N: usize> {
    pub samples: Vec<(f64, [f64; N])>,
    pub events: Vec<RawEvent<N>>,
    pub termination: Termination,
}

impl<const N: usize> RawTrajectory<N> {
    pub fn final_sample(&self) -> (f64, [f64; N]) {
        *self
            .samples
            .last()
            .expect("trajectory always holds the initial sample")
    }
}

const MIN_STEP: f64 = 1e-13;
const EVENT_TIME_TOL: f64 = 1e-12;

struct Stepper<'a, S, const N: usize> {
    system: &'a S,
    rel_tol: f64,
    abs_tol: f64,
}

impl<'a, S: OdeSystem<N>, const N: usize> Stepper<'a, S, N> {
    /// One embedded step of signed size `h`. Returns the 8th-order solution
    /// and the normalized error estimate.
    fn step(&self, t: f64, y: &[f64; N], h: f64) -> Result<([f64; N], f64)> {
        let mut k = [[0.0; N]; STAGES];
        k[0] = self.system.rhs(t, y)?;
        for i in 1..STAGES {
            let mut yi = *y;
            for (j, kj) in k.iter().enumerate().take(i) {
                let a = A[i][j];
                if a != 0.0 {
                    for n in 0..N {
                        yi[n] += h * a * kj[n];
                    }
                }
            }
            k[i] = self.system.rhs(t + C[i] * h, &yi)?;
        }
        let mut y8 = *y;
        for (i, ki) in k.iter().enumerate() {
            if B8[i] != 0.0 {
                for n in 0..N {
                    y8[n] += h * B8[i] * ki[n];
                }
            }
        }
        let mut err: f64 = 0.0;
        for n in 0..N {
            let e = h * ERR_COEFF * (k[0][n] + k[10][n] - k[11][n] - k[12][n]);
            let scale = self.abs_tol + self.rel_tol * y[n].abs().max(y8[n].abs());
            err = err.max((e / scale).abs());
        }
        Ok((y8, err))
    }
}

/// Adaptive integration of `system` from `(t0, y0)` over a signed `horizon`,
/// recording every accepted step and refining event crossings by bisection.
pub fn integrate<S: OdeSystem<N>, const N: usize>(
    system: &S,
    t0: f64,
    y0: &[f64; N],
    horizon: f64,
    config: &IntegratorConfig,
    events: &[EventSpec<'_, N>],
) -> Result<RawTrajectory<N>> {
    config.validate()?;
    if !y0.iter().all(|v| v.is_finite()) || !t0.is_finite() || !horizon.is_finite() {
        return Err(Error::InvalidConfig("non-finite initial data".into()));
    }
    let stepper = Stepper {
        system,
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
    };
    let t_end = t0 + horizon;
    let direction = if horizon >= 0.0 { 1.0 } else { -1.0 };

    let mut samples = vec![(t0, *y0)];
    let mut recorded = Vec::new();

    if horizon == 0.0 {
        return Ok(RawTrajectory {
            samples,
            events: recorded,
            termination: Termination::Horizon,
        });
    }

    let mut t = t0;
    let mut y = *y0;
    let mut h = config.max_step.min(horizon.abs()).min(0.05) * direction;
    let mut g_prev: Vec<f64> = events.iter().map(|spec| (spec.g)(t, &y)).collect();
    let mut steps = 0usize;

    loop {
        if (t_end - t) * direction <= 1e-14 * t_end.abs().max(1.0) {
            return Ok(RawTrajectory {
                samples,
                events: recorded,
                termination: Termination::Horizon,
            });
        }
        if (t + h - t_end) * direction > 0.0 {
            h = t_end - t;
        }

        steps += 1;
        if steps > config.max_steps {
            return Err(Error::MaxSteps {
                max_steps: config.max_steps,
                t,
            });
        }

        let attempt = stepper.step(t, &y, h);
        let (y_new, err) = match attempt {
            Ok(pair) => pair,
            Err(_) => {
                // The right-hand side failed inside the step (singular region):
                // retreat like a rejected step until the step floor is hit.
                h *= 0.25;
                if h.abs() < MIN_STEP {
                    recorded.push(RawEvent {
                        t,
                        y,
                        spec_index: usize::MAX,
                    });
                    return Ok(RawTrajectory {
                        samples,
                        events: recorded,
                        termination: Termination::SingularityStop { t },
                    });
                }
                continue;
            }
        };

        if err > 1.0 || !y_new.iter().all(|v| v.is_finite()) {
            let factor = if err.is_finite() && err > 0.0 {
                (0.9 * err.powf(-1.0 / 8.0)).clamp(0.1, 0.5)
            } else {
                0.25
            };
            h *= factor;
            if h.abs() < MIN_STEP {
                recorded.push(RawEvent {
                    t,
                    y,
                    spec_index: usize::MAX,
                });
                return Ok(RawTrajectory {
                    samples,
                    events: recorded,
                    termination: Termination::SingularityStop { t },
                });
            }
            continue;
        }

        let t_new = t + h;

        // Event scan over the accepted step, earliest-first.
        let mut triggered: Vec<(f64, [f64; N], usize)> = Vec::new();
        for (idx, spec) in events.iter().enumerate() {
            let ga = g_prev[idx];
            let gb = (spec.g)(t_new, &y_new);
            if crossed(ga, gb, spec.direction) {
                let (te, ye) = refine_event(&stepper, spec, t, &y, t_new, &y_new, ga)?;
                triggered.push((te, ye, idx));
            }
        }
        triggered.sort_by(|a, b| ((a.0 - t) * direction).total_cmp(&((b.0 - t) * direction)));

        let mut terminated = None;
        for (te, ye, idx) in &triggered {
            recorded.push(RawEvent {
                t: *te,
                y: *ye,
                spec_index: *idx,
            });
            if events[*idx].terminal {
                terminated = Some((*te, *ye, *idx));
                break;
            }
        }

        if let Some((te, ye, idx)) = terminated {
            samples.push((te, ye));
            return Ok(RawTrajectory {
                samples,
                events: recorded,
                termination: Termination::TerminalEvent {
                    kind: events[idx].kind,
                },
            });
        }

        for (idx, spec) in events.iter().enumerate() {
            g_prev[idx] = (spec.g)(t_new, &y_new);
        }
        t = t_new;
        y = y_new;
        samples.push((t, y));

        let factor = if err > 0.0 {
            (0.9 * err.powf(-1.0 / 8.0)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h * factor).clamp(-config.max_step, config.max_step);
        if h.abs() < MIN_STEP {
            h = MIN_STEP * direction;
        }
    }
}

fn crossed(ga: f64, gb: f64, direction: EventDirection) -> bool {
    if ga == 0.0 {
        return false;
    }
    match direction {
        EventDirection::Rising => ga < 0.0 && gb >= 0.0,
        EventDirection::Falling => ga > 0.0 && gb <= 0.0,
        EventDirection::Any => ga * gb < 0.0 || (gb == 0.0),
    }
}

/// Bisection refinement of an event inside one accepted step. Each candidate
/// time is reached by a single exact-size RK step from the live bracket start,
/// so the event state keeps full integration accuracy.
fn refine_event<S: OdeSystem<N>, const N: usize>(
    stepper: &Stepper<S, N>,
    spec: &EventSpec<'_, N>,
    mut ta: f64,
    ya: &[f64; N],
    mut tb: f64,
    yb: &[f64; N],
    mut ga: f64,
) -> Result<(f64, [f64; N])> {
    let mut ya = *ya;
    let mut yb = *yb;
    for _ in 0..90 {
        if (tb - ta).abs() <= EVENT_TIME_TOL {
            break;
        }
        let tm = 0.5 * (ta + tb);
        let (ym, _) = stepper.step(ta, &ya, tm - ta)?;
        let gm = (spec.g)(tm, &ym);
        if crossed(ga, gm, spec.direction) {
            tb = tm;
            yb = ym;
        } else {
            ta = tm;
            ya = ym;
            ga = gm;
        }
    }
    Ok((tb, yb))
}

// ---------------------------------------------------------------------------
// R4BP systems.
// ---------------------------------------------------------------------------

/// Synodic equations of motion as a 4-dimensional first-order system
/// `[x, y, xdot, ydot]`.
pub struct SynodicSystem {
    pub mu: MassParameter,
}

impl OdeSystem<4> for SynodicSystem {
    fn rhs(&self, t: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let state = SynodicState {
            x: y[0],
            y: y[1],
            xdot: y[2],
            ydot: y[3],
            t,
        };
        synodic_rhs(&state, self.mu)
    }
}

/// Regularized equations in fictitious time as a 5-dimensional system
/// `[w1, w2, W1, W2, t]`; the last component integrates `dt/dtau = |f'(w)|^2`.
pub struct RegularizedSystem {
    pub mu: MassParameter,
    pub jacobi: f64,
}

impl OdeSystem<5> for RegularizedSystem {
    fn rhs(&self, tau: f64, y: &[f64; 5]) -> Result<[f64; 5]> {
        let state = RegularizedState {
            w: Complex64::new(y[0], y[1]),
            momentum: Complex64::new(y[2], y[3]),
            tau,
            t_physical: y[4],
            jacobi: self.jacobi,
        };
        regularized_rhs(&state, self.mu)
    }
}

pub fn synodic_array(state: &SynodicState) -> [f64; 4] {
    [state.x, state.y, state.xdot, state.ydot]
}

pub fn synodic_from_array(y: &[f64; 4], t: f64) -> SynodicState {
    SynodicState {
        x: y[0],
        y: y[1],
        xdot: y[2],
        ydot: y[3],
        t,
    }
}

pub fn regularized_array(state: &RegularizedState) -> [f64; 5] {
    [
        state.w.re,
        state.w.im,
        state.momentum.re,
        state.momentum.im,
        state.t_physical,
    ]
}

pub fn regularized_from_array(y: &[f64; 5], tau: f64, jacobi: f64) -> RegularizedState {
    RegularizedState {
        w: Complex64::new(y[0], y[1]),
        momentum: Complex64::new(y[2], y[3]),
        tau,
        t_physical: y[4],
        jacobi,
    }
}

// ---------------------------------------------------------------------------
// Chart-tagged trajectories.
// ---------------------------------------------------------------------------

/// A state in whichever chart the integrator was using.
#[derive(Debug, Clone, Copy)]
pub enum ChartState {
    Synodic(SynodicState),
    Regularized(RegularizedState),
}

impl ChartState {
    /// Synodic representation; fails only at the exact collision instant.
    pub fn synodic_view(&self, mu: MassParameter) -> Result<SynodicState> {
        match self {
            ChartState::Synodic(s) => Ok(*s),
            ChartState::Regularized(r) => to_synodic(r, mu),
        }
    }

    /// Synodic position, defined in both charts even at collision.
    pub fn position(&self, mu: MassParameter) -> Complex64 {
        match self {
            ChartState::Synodic(s) => s.position(),
            ChartState::Regularized(r) => {
                birkhoff_map(r.w).expect("regular domain") + translation_offset_complex(mu)
            }
        }
    }
}

/// One recorded sample of a chart-switching trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: ChartState,
    pub tag: ChartTag,
}

/// A refined event with its synodic-position snapshot.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryEvent {
    pub t: f64,
    pub kind: EventKind,
    pub chart: Chart,
    pub x: f64,
    pub y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xdot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ydot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_im: Option<f64>,
}

/// Time-ordered samples with chart tags, refined events, and termination.
#[derive(Debug)]
pub struct Trajectory {
    pub mu: MassParameter,
    pub samples: Vec<TrajectorySample>,
    pub events: Vec<TrajectoryEvent>,
    pub termination: Termination,
    /// Smallest observed distance to each primary (sample resolution in the
    /// synodic chart; refined through the event machinery near collisions).
    pub min_primary_distance: [f64; 3],
}

impl Trajectory {
    pub fn final_sample(&self) -> &TrajectorySample {
        self.samples
            .last()
            .expect("trajectory holds at least the initial sample")
    }

    /// Final state mapped to the synodic chart.
    pub fn final_synodic(&self) -> Result<SynodicState> {
        self.final_sample().state.synodic_view(self.mu)
    }
}

/// A chart-agnostic auxiliary event evaluated on the synodic position.
pub struct PositionEvent {
    pub kind: EventKind,
    pub direction: EventDirection,
    pub terminal: bool,
    pub g: Box<dyn Fn(f64, Complex64) -> f64>,
}

/// Plain synodic integration (no chart switching). Records x-axis crossings,
/// flags escapes, and terminates cleanly if the step size underflows near a
/// primary.
pub fn integrate_synodic(
    initial: &SynodicState,
    mu: MassParameter,
    horizon: f64,
    config: &IntegratorConfig,
    extra: Vec<PositionEvent>,
) -> Result<Trajectory> {
    let system = SynodicSystem { mu };
    let mut specs: Vec<EventSpec<'_, 4>> = Vec::new();
    specs.push(EventSpec {
        kind: EventKind::XAxisCrossing,
        direction: EventDirection::Any,
        terminal: false,
        g: Box::new(|_, y| y[1]),
    });
    let escape2 = config.escape_radius * config.escape_radius;
    specs.push(EventSpec {
        kind: EventKind::Escape,
        direction: EventDirection::Rising,
        terminal: true,
        g: Box::new(move |_, y| y[0] * y[0] + y[1] * y[1] - escape2),
    });
    for ev in &extra {
        let g = &ev.g;
        specs.push(EventSpec {
            kind: ev.kind,
            direction: ev.direction,
            terminal: ev.terminal,
            g: Box::new(move |t, y: &[f64; 4]| g(t, Complex64::new(y[0], y[1]))),
        });
    }

    let raw = integrate(
        &system,
        initial.t,
        &synodic_array(initial),
        horizon,
        config,
        &specs,
    )?;
    let mut traj = Trajectory {
        mu,
        samples: Vec::with_capacity(raw.samples.len()),
        events: Vec::new(),
        termination: raw.termination,
        min_primary_distance: [f64::INFINITY; 3],
    };
    for (t, y) in &raw.samples {
        let state = synodic_from_array(y, *t);
        update_min_distances(&mut traj.min_primary_distance, &state, mu);
        traj.samples.push(TrajectorySample {
            t: *t,
            state: ChartState::Synodic(state),
            tag: ChartTag::synodic(),
        });
    }
    for ev in &raw.events {
        let kind = if ev.spec_index == usize::MAX {
            EventKind::SingularityStop
        } else {
            specs[ev.spec_index].kind
        };
        let s = synodic_from_array(&ev.y, ev.t);
        traj.events.push(TrajectoryEvent {
            t: ev.t,
            kind,
            chart: Chart::Synodic,
            x: s.x,
            y: s.y,
            xdot: Some(s.xdot),
            ydot: Some(s.ydot),
            w_re: None,
            w_im: None,
        });
    }
    Ok(traj)
}

fn update_min_distances(min: &mut [f64; 3], state: &SynodicState, mu: MassParameter) {
    for (i, r) in state.primary_distances(mu).iter().enumerate() {
        min[i] = min[i].min(*r);
    }
}

fn u_distances(w: Complex64) -> [f64; 3] {
    let u = birkhoff_map(w).expect("regular w");
    [(u - U1).norm(), (u - U2).norm(), (u - U3).norm()]
}

/// Collision-passage threshold: a refined distance minimum at or below this
/// value is recorded as an exact collision with the primary.
const COLLISION_EVENT_DIST: f64 = 1e-8;

/// Integrates through collisions with `m2`/`m3`: runs the synodic chart while
/// far from the symmetric primaries, hands over to the regularized chart when
/// either distance drops below `collision_switch_radius`, carries physical time
/// across the switch exactly, and returns to the synodic chart when the
/// distance grows back past the radius. Approaching `m1` within
/// `singularity_stop_radius` terminates with a `collision_m1` event.
pub fn integrate_with_regularization(
    initial: &SynodicState,
    mu: MassParameter,
    jacobi: f64,
    horizon: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let c_state = jacobi_constant(initial, mu)?;
    if (c_state - jacobi).abs() > 1e-10 * jacobi.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "jacobi constant {jacobi} inconsistent with the state (C = {c_state})"
        )));
    }
    integrate_switching(initial, mu, jacobi, horizon, config, Vec::new())
}

/// Chart-switching driver with additional caller events (evaluated on the
/// synodic position in either chart).
pub fn integrate_switching(
    initial: &SynodicState,
    mu: MassParameter,
    jacobi: f64,
    horizon: f64,
    config: &IntegratorConfig,
    extra: Vec<PositionEvent>,
) -> Result<Trajectory> {
    config.validate()?;
    let t_end = initial.t + horizon;

    let mut traj = Trajectory {
        mu,
        samples: Vec::new(),
        events: Vec::new(),
        termination: Termination::Horizon,
        min_primary_distance: [f64::INFINITY; 3],
    };

    let mut state = *initial;
    let mut prev_w: Option<Complex64> = None;
    traj.samples.push(TrajectorySample {
        t: state.t,
        state: ChartState::Synodic(state),
        tag: ChartTag::synodic(),
    });
    update_min_distances(&mut traj.min_primary_distance, &state, mu);

    for _switch in 0..10_000 {
        if horizon == 0.0 || (t_end - state.t) * horizon.signum() <= 1e-14 * t_end.abs().max(1.0) {
            traj.termination = Termination::Horizon;
            return Ok(traj);
        }

        let r = state.primary_distances(mu);
        if r[0] <= config.singularity_stop_radius {
            push_position_event(&mut traj, EventKind::CollisionM1, Chart::Synodic, &state);
            traj.termination = Termination::TerminalEvent {
                kind: EventKind::CollisionM1,
            };
            return Ok(traj);
        }

        let outcome =
            if r[1] > config.collision_switch_radius && r[2] > config.collision_switch_radius {
                run_synodic_leg(&mut traj, &state, mu, t_end, config, &extra)?
            } else {
                // Inside the switch region: bridge into the regularized chart here.
                let choice = match prev_w {
                    Some(w) => BranchChoice::Nearest(w),
                    None => BranchChoice::Labeled(Branch::Positive),
                };
                let reg = to_regularized(&state, mu, jacobi, choice)?;
                let branch = preimages(birkhoff_map(reg.w).expect("regular")).branch_of(reg.w);
                push_position_event(&mut traj, EventKind::ChartSwitch, Chart::Synodic, &state);
                traj.samples.push(TrajectorySample {
                    t: state.t,
                    state: ChartState::Regularized(reg),
                    tag: ChartTag::regularized(branch),
                });
                prev_w = Some(reg.w);
                run_regularized_leg(&mut traj, reg, branch, mu, jacobi, t_end, config, &extra)?
            };

        match outcome {
            LegOutcome::Finished => return Ok(traj),
            LegOutcome::SwitchIn(next) => {
                // A chart boundary was hit; the next loop pass decides which
                // chart carries on from `next` (it also re-pushes no samples:
                // legs record their own, and bridges record the paired pair).
                if let ChartState::Regularized(r) = traj.final_sample().state {
                    prev_w = Some(r.w);
                    // Leaving the regularized chart: record the synodic twin.
                    traj.samples.push(TrajectorySample {
                        t: next.t,
                        state: ChartState::Synodic(next),
                        tag: ChartTag::synodic(),
                    });
                }
                state = next;
            }
        }
    }
    Err(Error::MaxSteps {
        max_steps: 10_000,
        t: state.t,
    })
}

enum LegOutcome {
    /// The whole run is over (horizon, escape, m1 stop, terminal extra, ...).
    Finished,
    /// The leg hit a chart boundary; continue in the other chart from here.
    SwitchIn(SynodicState),
}

fn push_position_event(traj: &mut Trajectory, kind: EventKind, chart: Chart, state: &SynodicState) {
    traj.events.push(TrajectoryEvent {
        t: state.t,
        kind,
        chart,
        x: state.x,
        y: state.y,
        xdot: Some(state.xdot),
        ydot: Some(state.ydot),
        w_re: None,
        w_im: None,
    });
}

#[allow(clippy::too_many_arguments)]
fn run_synodic_leg(
    traj: &mut Trajectory,
    state: &SynodicState,
    mu: MassParameter,
    t_end: f64,
    config: &IntegratorConfig,
    extra: &[PositionEvent],
) -> Result<LegOutcome> {
    let system = SynodicSystem { mu };
    let primaries = crate::model::PrimaryConfiguration::new(mu);
    let z1: Complex64 = primaries.position_complex(0);
    let z2: Complex64 = primaries.position_complex(1);
    let z3: Complex64 = primaries.position_complex(2);
    let switch = config.collision_switch_radius;
    let stop = config.singularity_stop_radius;
    let escape2 = config.escape_radius * config.escape_radius;

    let mut specs: Vec<EventSpec<'_, 4>> = vec![
        EventSpec {
            kind: EventKind::ChartSwitch, // enter m2 region
            direction: EventDirection::Falling,
            terminal: true,
            g: Box::new(move |_, y| Complex64::new(y[0] - z2.re, y[1] - z2.im).norm() - switch),
        },
        EventSpec {
            kind: EventKind::ChartSwitch, // enter m3 region
            direction: EventDirection::Falling,
            terminal: true,
            g: Box::new(move |_, y| Complex64::new(y[0] - z3.re, y[1] - z3.im).norm() - switch),
        },
        EventSpec {
            kind: EventKind::CollisionM1,
            direction: EventDirection::Falling,
            terminal: true,
            g: Box::new(move |_, y| Complex64::new(y[0] - z1.re, y[1] - z1.im).norm() - stop),
        },
        EventSpec {
            kind: EventKind::Escape,
            direction: EventDirection::Rising,
            terminal: true,
            g: Box::new(move |_, y| y[0] * y[0] + y[1] * y[1] - escape2),
        },
        EventSpec {
            kind: EventKind::XAxisCrossing,
            direction: EventDirection::Any,
            terminal: false,
            g: Box::new(|_, y| y[1]),
        },
    ];
    for ev in extra {
        let g = &ev.g;
        specs.push(EventSpec {
            kind: ev.kind,
            direction: ev.direction,
            terminal: ev.terminal,
            g: Box::new(move |t, y: &[f64; 4]| g(t, Complex64::new(y[0], y[1]))),
        });
    }

    let raw = integrate(
        &system,
        state.t,
        &synodic_array(state),
        t_end - state.t,
        config,
        &specs,
    )?;
    for (t, y) in raw.samples.iter().skip(1) {
        let s = synodic_from_array(y, *t);
        update_min_distances(&mut traj.min_primary_distance, &s, mu);
        traj.samples.push(TrajectorySample {
            t: *t,
            state: ChartState::Synodic(s),
            tag: ChartTag::synodic(),
        });
    }
    for ev in &raw.events {
        if ev.spec_index == usize::MAX {
            let s = synodic_from_array(&ev.y, ev.t);
            push_position_event(traj, EventKind::SingularityStop, Chart::Synodic, &s);
            continue;
        }
        // The two region-entry specs are recorded by the driver as the
        // paired chart-switch; everything else is logged here.
        if ev.spec_index < 2 {
            continue;
        }
        let s = synodic_from_array(&ev.y, ev.t);
        push_position_event(traj, specs[ev.spec_index].kind, Chart::Synodic, &s);
    }
    match raw.termination {
        Termination::Horizon => {
            traj.termination = Termination::Horizon;
            Ok(LegOutcome::Finished)
        }
        Termination::SingularityStop { t } => {
            traj.termination = Termination::SingularityStop { t };
            Ok(LegOutcome::Finished)
        }
        Termination::TerminalEvent { kind } => {
            let (t, y) = raw.final_sample();
            let s = synodic_from_array(&y, t);
            match kind {
                EventKind::ChartSwitch => Ok(LegOutcome::SwitchIn(s)),
                other => {
                    traj.termination = Termination::TerminalEvent { kind: other };
                    Ok(LegOutcome::Finished)
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_regularized_leg(
    traj: &mut Trajectory,
    reg: RegularizedState,
    branch: Branch,
    mu: MassParameter,
    jacobi: f64,
    t_end: f64,
    config: &IntegratorConfig,
    extra: &[PositionEvent],
) -> Result<LegOutcome> {
    let system = RegularizedSystem { mu, jacobi };
    let switch = config.collision_switch_radius;
    let stop = config.singularity_stop_radius;
    let escape = config.escape_radius;
    let offset = translation_offset_complex(mu);
    let m = mu;
    let jc = jacobi;

    let direction = if t_end >= reg.t_physical { 1.0 } else { -1.0 };

    let radial_velocity = move |y: &[f64; 5], center: Complex64| -> f64 {
        let state = regularized_from_array(y, 0.0, jc);
        match regularized_rhs(&state, m) {
            Ok(d) => {
                let dw = Complex64::new(d[0], d[1]);
                let rel = state.w - center;
                2.0 * (rel.conj() * dw).re
            }
            Err(_) => f64::NAN,
        }
    };

    let mut specs: Vec<EventSpec<'_, 5>> = vec![
        // 0: physical horizon reached while inside the regularized chart.
        EventSpec {
            kind: EventKind::ChartSwitch,
            direction: if direction > 0.0 {
                EventDirection::Rising
            } else {
                EventDirection::Falling
            },
            terminal: true,
            g: Box::new(move |_, y| y[4] - t_end),
        },
        // 1: both symmetric primaries out of range again, switch back.
        EventSpec {
            kind: EventKind::ChartSwitch,
            direction: EventDirection::Rising,
            terminal: true,
            g: Box::new(move |_, y| {
                let d = u_distances(Complex64::new(y[0], y[1]));
                d[1].min(d[2]) - switch
            }),
        },
        // 2: unregularized m1 approached (w near a1 or a2).
        EventSpec {
            kind: EventKind::CollisionM1,
            direction: EventDirection::Falling,
            terminal: true,
            g: Box::new(move |_, y| u_distances(Complex64::new(y[0], y[1]))[0] - stop),
        },
        // 3: escape (w near the origin maps to u-space infinity).
        EventSpec {
            kind: EventKind::Escape,
            direction: EventDirection::Rising,
            terminal: true,
            g: Box::new(move |_, y| {
                let u = birkhoff_map(Complex64::new(y[0], y[1])).expect("regular");
                (u + offset).norm() - escape
            }),
        },
        // 4, 5: distance extrema to m2/m3 (collision passages).
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
        // 6: x-axis crossing, y = Im(f(w)) (the frame offset is real).
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
    for ev in extra {
        let g = &ev.g;
        specs.push(EventSpec {
            kind: ev.kind,
            direction: ev.direction,
            terminal: ev.terminal,
            g: Box::new(move |t, y: &[f64; 5]| {
                let _ = t;
                let u = birkhoff_map(Complex64::new(y[0], y[1])).expect("regular");
                g(y[4], u + offset)
            }),
        });
    }

    // Generous fictitious horizon; the physical-time event ends the leg.
    let tau_horizon = 1e6 * direction;
    let raw = integrate(
        &system,
        reg.tau,
        &regularized_array(&reg),
        tau_horizon,
        config,
        &specs,
    )?;

    for (tau, y) in raw.samples.iter().skip(1) {
        let s = regularized_from_array(y, *tau, jacobi);
        let d = u_distances(s.w);
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
            let s = regularized_from_array(&ev.y, ev.t, jacobi);
            let z = s.synodic_position(mu).expect("regular");
            traj.events.push(TrajectoryEvent {
                t: s.t_physical,
                kind: EventKind::SingularityStop,
                chart: Chart::Regularized,
                x: z.re,
                y: z.im,
                xdot: None,
                ydot: None,
                w_re: Some(s.w.re),
                w_im: Some(s.w.im),
            });
            continue;
        }
        let spec = &specs[ev.spec_index];
        let s = regularized_from_array(&ev.y, ev.t, jacobi);
        match spec.kind {
            EventKind::CollisionM2 | EventKind::CollisionM3 => {
                let idx = if spec.kind == EventKind::CollisionM2 {
                    1
                } else {
                    2
                };
                let dist = u_distances(s.w)[idx];
                traj.min_primary_distance[idx] = traj.min_primary_distance[idx].min(dist);
                if dist <= COLLISION_EVENT_DIST {
                    let z = s.synodic_position(mu).expect("regular");
                    traj.events.push(TrajectoryEvent {
                        t: s.t_physical,
                        kind: spec.kind,
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
            EventKind::ChartSwitch => {}
            kind => {
                let z = s.synodic_position(mu).expect("regular");
                let view = to_synodic(&s, mu).ok();
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

    match raw.termination {
        Termination::Horizon => {
            // Fictitious-time budget exhausted without leaving the region.
            traj.termination = Termination::SingularityStop {
                t: raw.final_sample().0,
            };
            Ok(LegOutcome::Finished)
        }
        Termination::SingularityStop { t } => {
            traj.termination = Termination::SingularityStop { t };
            Ok(LegOutcome::Finished)
        }
        Termination::TerminalEvent { kind } => {
            let (tau, y) = raw.final_sample();
            let s = regularized_from_array(&y, tau, jacobi);
            match kind {
                EventKind::ChartSwitch if (t_end - s.t_physical) * direction <= 1e-12 => {
                    // Physical horizon hit inside this leg (possibly at a
                    // collision instant, where no synodic view exists).
                    traj.termination = Termination::Horizon;
                    Ok(LegOutcome::Finished)
                }
                EventKind::ChartSwitch => {
                    let view = to_synodic(&s, mu)?;
                    push_position_event(traj, EventKind::ChartSwitch, Chart::Regularized, &view);
                    Ok(LegOutcome::SwitchIn(view))
                }
                other => {
                    traj.termination = Termination::TerminalEvent { kind: other };
                    Ok(LegOutcome::Finished)
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

/// Writes a trajectory as CSV with header `t,chart,x,y,xdot,ydot,C_instant`.
/// Floats carry 17 significant digits; parsing and re-emitting is bit-exact.
/// Samples at the exact collision instant (no synodic velocity) are skipped;
/// the event log carries them.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,chart,x,y,xdot,ydot,C_instant\n");
    for sample in &traj.samples {
        let chart = match sample.tag.chart {
            Chart::Synodic => "synodic",
            Chart::Regularized => "regularized",
        };
        let view = match sample.state.synodic_view(traj.mu) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let c = jacobi_constant(&view, traj.mu).unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(sample.t),
            chart,
            fmt_f64(view.x),
            fmt_f64(view.y),
            fmt_f64(view.xdot),
            fmt_f64(view.ydot),
            fmt_f64(c)
        ));
    }
    out
}

/// One parsed CSV record.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub chart: String,
    pub x: f64,
    pub y: f64,
    pub xdot: f64,
    pub ydot: f64,
    pub c_instant: f64,
}

/// Parses the CSV format emitted by [`trajectory_to_csv`].
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("t,chart,x,y,xdot,ydot,C_instant") => {}
        other => return Err(Error::Parse(format!("bad CSV header: {other:?}"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse(format!("line {}: expected 7 fields", i + 2)));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("line {}: bad float {s:?}", i + 2)))
        };
        rows.push(CsvRow {
            t: num(fields[0])?,
            chart: fields[1].to_string(),
            x: num(fields[2])?,
            y: num(fields[3])?,
            xdot: num(fields[4])?,
            ydot: num(fields[5])?,
            c_instant: num(fields[6])?,
        });
    }
    Ok(rows)
}

/// Re-emits parsed rows in the exact on-disk format.
pub fn csv_rows_to_string(rows: &[CsvRow]) -> String {
    let mut out = String::from("t,chart,x,y,xdot,ydot,C_instant\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(r.t),
            r.chart,
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.xdot),
            fmt_f64(r.ydot),
            fmt_f64(r.c_instant)
        ));
    }
    out
}

/// Serializes the event log (with the termination reason) as JSON.
pub fn events_to_json(traj: &Trajectory) -> String {
    #[derive(Serialize)]
    struct Log<'a> {
        termination: &'a Termination,
        events: &'a [TrajectoryEvent],
    }
    serde_json::to_string_pretty(&Log {
        termination: &traj.termination,
        events: &traj.events,
    })
    .expect("event log serializes")
}
