//! Batch subcommands: integration, Hill rasters, equilibria, pre-images,
//! ejection orbits, and continuation, each writing its outputs plus a manifest
//! that echoes every resolved parameter.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical stop (partial output on
//! disk), 4 non-convergence.

use crate::analysis::{find_equilibria, raster_hill, routh_critical_mu, Bounds, HillSpace};
use crate::integrate::{
    events_to_json, integrate_synodic, integrate_with_regularization, trajectory_to_csv, EventKind,
    IntegratorConfig, Termination,
};
use crate::model::{jacobi_constant, MassParameter, SynodicState};
use crate::orbits::{
    continue_family, ejection_orbit, family_to_jsonl, orbit_summary, refine_symmetric_orbit,
    ContinuationPolicy, ShootingMode,
};
use crate::regularization::preimages;
use crate::{fmt_f64, Error};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "R4BP_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;

const COMMANDS: &[&str] = &[
    "integrate",
    "hill",
    "equilibria",
    "routh",
    "preimage",
    "eject",
    "continue",
];

/// Prints a line to stdout, ignoring a closed pipe so batch runs can be
/// piped into `head` and friends without aborting mid-write.
fn emit(line: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_fmt(line);
    let _ = out.write_all(b"\n");
}

macro_rules! emit {
    ($($arg:tt)*) => { emit(format_args!($($arg)*)) };
}

/// Entry point of the `r4bp` binary; returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    let mut args = args.iter();
    let command = match args.next() {
        Some(c) => c.as_str(),
        None => {
            eprintln!("{}", top_level_help());
            return EXIT_USAGE;
        }
    };
    if command == "--help" || command == "help" {
        emit!("{}", top_level_help());
        return EXIT_OK;
    }
    if !COMMANDS.contains(&command) {
        eprintln!("unknown command {command:?}\n\n{}", top_level_help());
        return EXIT_USAGE;
    }
    let rest: Vec<String> = args.cloned().collect();
    if rest.iter().any(|a| a == "--help") {
        emit!("{}", command_help(command));
        return EXIT_OK;
    }
    let flags = match Flags::parse(command, &rest) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("{msg}\n\n{}", command_help(command));
            return EXIT_USAGE;
        }
    };
    let result = match command {
        "integrate" => cmd_integrate(flags),
        "hill" => cmd_hill(flags),
        "equilibria" => cmd_equilibria(flags),
        "routh" => cmd_routh(flags),
        "preimage" => cmd_preimage(flags),
        "eject" => cmd_eject(flags),
        "continue" => cmd_continue(flags),
        _ => unreachable!(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Domain(_)
        | Error::InvalidSystem(_)
        | Error::InvalidConfig(_)
        | Error::InvalidBounds(_)
        | Error::Parse(_)
        | Error::BranchSelection(_) => EXIT_USAGE,
        Error::NonConvergence { .. } | Error::NoCrossing { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_NUMERICAL,
    }
}

/// Resolved key-value parameters: config-file values overridden by flags,
/// every lookup echoed into the manifest.
struct Flags {
    values: BTreeMap<String, String>,
    manifest: BTreeMap<String, String>,
    command: String,
}

const COMMON_FLAGS: &[&str] = &["config", "out-dir", "seed"];
const INTEGRATOR_FLAGS: &[&str] = &[
    "rel-tol",
    "abs-tol",
    "max-step",
    "max-steps",
    "switch-radius",
    "stop-radius",
    "escape-radius",
];

/// Command-specific flags (after alias normalization).
fn known_flags(command: &str) -> Vec<&'static str> {
    let mut known: Vec<&str> = COMMON_FLAGS.to_vec();
    match command {
        "integrate" => {
            known.extend(["mu", "state", "horizon", "regularize"]);
            known.extend(INTEGRATOR_FLAGS);
        }
        "hill" => known.extend(["mu", "jacobi", "space", "bounds", "nx", "ny"]),
        "equilibria" => known.extend(["mu", "seed-grid"]),
        "routh" => {}
        "preimage" => known.extend(["u"]),
        "eject" => {
            known.extend(["mu", "jacobi", "primary", "angle", "tau-horizon"]);
            known.extend(INTEGRATOR_FLAGS);
        }
        "continue" => {
            known.extend([
                "mu",
                "x0",
                "ydot0",
                "half-period",
                "direction",
                "delta-c",
                "step",
                "min-step",
                "max-step-c",
                "grow-after",
                "growth",
                "blowup-factor",
                "max-members",
            ]);
            known.extend(INTEGRATOR_FLAGS);
        }
        _ => unreachable!(),
    }
    known
}

impl Flags {
    fn parse(command: &str, args: &[String]) -> std::result::Result<Self, String> {
        let boolean = ["regularize"];
        let known = known_flags(command);
        let mut cli: BTreeMap<String, String> = BTreeMap::new();
        let mut iter = args.iter().peekable();
        while let Some(arg) = iter.next() {
            let name = arg
                .strip_prefix("--")
                .ok_or_else(|| format!("unexpected argument {arg:?}"))?;
            let name = normalize_key(name);
            if !known.contains(&name.as_str()) {
                return Err(format!("unknown flag --{name} for {command}"));
            }
            if boolean.contains(&name.as_str()) {
                // Optional explicit value, defaults to true when bare.
                let next_is_value = iter.peek().map(|n| !n.starts_with("--")).unwrap_or(false);
                let value = if next_is_value {
                    iter.next().unwrap().clone()
                } else {
                    "true".into()
                };
                cli.insert(name, value);
            } else {
                let value = iter
                    .next()
                    .ok_or_else(|| format!("flag --{name} needs a value"))?;
                cli.insert(name, value.clone());
            }
        }
        let mut values = BTreeMap::new();
        if let Some(path) = cli.get("config") {
            // Config files may be shared across commands, so keys a command
            // does not read are tolerated (and never echoed to the manifest).
            for (k, v) in read_config_file(path).map_err(|e| format!("config: {e}"))? {
                values.insert(normalize_key(&k), v);
            }
        }
        // Flags override file values.
        for (k, v) in cli {
            values.insert(k, v);
        }
        Ok(Self {
            values,
            manifest: BTreeMap::new(),
            command: command.to_string(),
        })
    }

    fn get(&mut self, name: &str) -> Option<String> {
        let v = self.values.get(name).cloned();
        if let Some(ref v) = v {
            self.manifest.insert(name.to_string(), v.clone());
        }
        v
    }

    fn required(&mut self, name: &str) -> crate::Result<String> {
        self.get(name)
            .ok_or_else(|| Error::Domain(format!("missing required flag --{name}")))
    }

    fn f64_required(&mut self, name: &str) -> crate::Result<f64> {
        let raw = self.required(name)?;
        raw.parse::<f64>()
            .map_err(|_| Error::Parse(format!("--{name}: bad float {raw:?}")))
    }

    fn f64_or(&mut self, name: &str, default: f64) -> crate::Result<f64> {
        match self.get(name) {
            Some(raw) => raw
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("--{name}: bad float {raw:?}"))),
            None => {
                self.manifest.insert(name.to_string(), fmt_f64(default));
                Ok(default)
            }
        }
    }

    fn usize_or(&mut self, name: &str, default: usize) -> crate::Result<usize> {
        match self.get(name) {
            Some(raw) => raw
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("--{name}: bad integer {raw:?}"))),
            None => {
                self.manifest.insert(name.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    fn bool_or(&mut self, name: &str, default: bool) -> crate::Result<bool> {
        match self.get(name) {
            Some(raw) => match raw.as_str() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(Error::Parse(format!("--{name}: bad boolean {other:?}"))),
            },
            None => {
                self.manifest.insert(name.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    fn string_or(&mut self, name: &str, default: &str) -> String {
        match self.get(name) {
            Some(v) => v,
            None => {
                self.manifest.insert(name.to_string(), default.to_string());
                default.to_string()
            }
        }
    }

    fn out_dir(&mut self) -> crate::Result<PathBuf> {
        let dir = match self.get("out-dir") {
            Some(d) => d,
            None => {
                let d = std::env::var(OUT_DIR_ENV).unwrap_or_else(|_| "out".to_string());
                self.manifest.insert("out-dir".to_string(), d.clone());
                d
            }
        };
        let path = PathBuf::from(dir);
        std::fs::create_dir_all(&path)?;
        Ok(path)
    }

    fn mu(&mut self) -> crate::Result<MassParameter> {
        MassParameter::new(self.f64_required("mu")?)
    }

    fn integrator_config(&mut self) -> crate::Result<IntegratorConfig> {
        let default = IntegratorConfig::default();
        let config = IntegratorConfig {
            rel_tol: self.f64_or("rel-tol", default.rel_tol)?,
            abs_tol: self.f64_or("abs-tol", default.abs_tol)?,
            max_step: self.f64_or("max-step", default.max_step)?,
            max_steps: self.usize_or("max-steps", default.max_steps)?,
            collision_switch_radius: self
                .f64_or("switch-radius", default.collision_switch_radius)?,
            singularity_stop_radius: self.f64_or("stop-radius", default.singularity_stop_radius)?,
            escape_radius: self.f64_or("escape-radius", default.escape_radius)?,
        };
        config.validate()?;
        Ok(config)
    }

    /// Seed for any randomized sampling; none of the commands draw random
    /// numbers today, but the value is part of the reproducibility contract.
    fn seed(&mut self) -> crate::Result<u64> {
        match self.get("seed") {
            Some(raw) => raw
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("--seed: bad integer {raw:?}"))),
            None => {
                self.manifest.insert("seed".to_string(), "0".to_string());
                Ok(0)
            }
        }
    }

    fn write_manifest(&self, dir: &Path) -> crate::Result<()> {
        let mut map = self.manifest.clone();
        map.insert("command".to_string(), self.command.clone());
        let json = serde_json::to_string_pretty(&map).expect("manifest serializes");
        std::fs::write(
            dir.join(format!("{}_manifest.json", self.command)),
            json + "\n",
        )?;
        Ok(())
    }
}

/// Flag-name aliases: `--c`/`--C` are accepted for the Jacobi constant.
fn normalize_key(key: &str) -> String {
    match key {
        "c" | "C" => "jacobi".to_string(),
        other => other.to_string(),
    }
}

fn read_config_file(path: &str) -> crate::Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", i + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_components<const N: usize>(name: &str, raw: &str) -> crate::Result<[f64; N]> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != N {
        return Err(Error::Parse(format!(
            "--{name}: expected {N} comma-separated values"
        )));
    }
    let mut out = [0.0; N];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("--{name}: bad float {p:?}")))?;
    }
    Ok(out)
}

fn cmd_integrate(mut flags: Flags) -> crate::Result<i32> {
    let mu = flags.mu()?;
    let state_raw = flags.required("state")?;
    let [x, y, xdot, ydot] = parse_components::<4>("state", &state_raw)?;
    let horizon = flags.f64_required("horizon")?;
    let regularize = flags.bool_or("regularize", false)?;
    let config = flags.integrator_config()?;
    let _ = flags.seed()?;
    let out = flags.out_dir()?;

    let state = SynodicState::new(x, y, xdot, ydot);
    let jacobi = jacobi_constant(&state, mu)?;
    flags.manifest.insert("jacobi".into(), fmt_f64(jacobi));

    let traj = if regularize {
        integrate_with_regularization(&state, mu, jacobi, horizon, &config)?
    } else {
        integrate_synodic(&state, mu, horizon, &config, vec![])?
    };

    std::fs::write(out.join("trajectory.csv"), trajectory_to_csv(&traj))?;
    std::fs::write(out.join("events.json"), events_to_json(&traj) + "\n")?;
    flags.write_manifest(&out)?;

    emit!(
        "integrated {} samples, {} events, termination {:?}",
        traj.samples.len(),
        traj.events.len(),
        traj.termination
    );
    match traj.termination {
        Termination::SingularityStop { .. }
        | Termination::TerminalEvent {
            kind: EventKind::CollisionM1,
        } => Ok(EXIT_NUMERICAL),
        _ => Ok(EXIT_OK),
    }
}

fn cmd_hill(mut flags: Flags) -> crate::Result<i32> {
    let mu = flags.mu()?;
    let jacobi = flags.f64_required("jacobi")?;
    let space = match flags.string_or("space", "u").as_str() {
        "u" => HillSpace::U,
        "w" => HillSpace::W,
        other => {
            return Err(Error::Domain(format!(
                "--space must be u or w, got {other:?}"
            )))
        }
    };
    let bounds_raw = flags.string_or("bounds", "-2,2,-2,2");
    let [xmin, xmax, ymin, ymax] = parse_components::<4>("bounds", &bounds_raw)?;
    let bounds = Bounds::new(xmin, xmax, ymin, ymax)?;
    let nx = flags.usize_or("nx", 512)?;
    let ny = flags.usize_or("ny", 512)?;
    let _ = flags.seed()?;
    let out = flags.out_dir()?;

    let raster = raster_hill(space, bounds, nx, ny, jacobi, mu)?;
    std::fs::write(out.join("hill.pgm"), raster.to_pgm())?;
    std::fs::write(out.join("hill.json"), raster.sidecar_json() + "\n")?;
    flags.write_manifest(&out)?;
    emit!(
        "hill raster {}x{}: {} admissible components",
        nx,
        ny,
        raster.admissible_components()
    );
    Ok(EXIT_OK)
}

fn cmd_equilibria(mut flags: Flags) -> crate::Result<i32> {
    let mu = flags.mu()?;
    let grid = flags.usize_or("seed-grid", 50)?;
    let _ = flags.seed()?;
    let out = flags.out_dir()?;
    let equilibria = find_equilibria(mu, grid)?;
    let json = serde_json::to_string_pretty(&equilibria).expect("equilibria serialize");
    std::fs::write(out.join("equilibria.json"), json + "\n")?;
    flags.write_manifest(&out)?;
    emit!("{} equilibria", equilibria.len());
    for e in &equilibria {
        emit!(
            "x={} y={} C={}",
            fmt_f64(e.x),
            fmt_f64(e.y),
            fmt_f64(e.jacobi)
        );
    }
    Ok(EXIT_OK)
}

fn cmd_routh(mut flags: Flags) -> crate::Result<i32> {
    let _ = flags.seed()?;
    let out = flags.out_dir()?;
    let value = routh_critical_mu();
    let json = format!("{{\"mu_critical\": {}}}", fmt_f64(value));
    std::fs::write(out.join("routh.json"), json.clone() + "\n")?;
    flags.write_manifest(&out)?;
    emit!("{json}");
    Ok(EXIT_OK)
}

fn cmd_preimage(mut flags: Flags) -> crate::Result<i32> {
    let raw = flags.required("u")?;
    let [re, im] = parse_components::<2>("u", &raw)?;
    let _ = flags.seed()?;
    let out = flags.out_dir()?;
    let pre = preimages(Complex64::new(re, im));
    let json = format!(
        "{{\"roots\": [[{}, {}], [{}, {}]], \"double\": {}}}",
        fmt_f64(pre.roots[0].re),
        fmt_f64(pre.roots[0].im),
        fmt_f64(pre.roots[1].re),
        fmt_f64(pre.roots[1].im),
        pre.is_double()
    );
    std::fs::write(out.join("preimage.json"), json.clone() + "\n")?;
    flags.write_manifest(&out)?;
    emit!("{json}");
    Ok(EXIT_OK)
}

fn cmd_eject(mut flags: Flags) -> crate::Result<i32> {
    let mu = flags.mu()?;
    let jacobi = flags.f64_required("jacobi")?;
    let primary = flags.usize_or("primary", 2)?;
    let angle = flags.f64_required("angle")?;
    let tau_horizon = flags.f64_or("tau-horizon", 10.0)?;
    let config = flags.integrator_config()?;
    let _ = flags.seed()?;
    let out = flags.out_dir()?;

    let orbit = ejection_orbit(primary, jacobi, angle, tau_horizon, mu, &config)?;
    std::fs::write(
        out.join("eject_trajectory.csv"),
        trajectory_to_csv(&orbit.trajectory),
    )?;
    std::fs::write(
        out.join("eject_events.json"),
        events_to_json(&orbit.trajectory) + "\n",
    )?;
    flags.write_manifest(&out)?;
    emit!(
        "ejection from m{} at angle {}: |W| = {}, {} return collision(s)",
        primary,
        fmt_f64(angle),
        fmt_f64(orbit.initial_momentum.norm()),
        orbit.return_collisions.len()
    );
    match orbit.trajectory.termination {
        Termination::SingularityStop { .. }
        | Termination::TerminalEvent {
            kind: EventKind::CollisionM1,
        } => Ok(EXIT_NUMERICAL),
        _ => Ok(EXIT_OK),
    }
}

fn cmd_continue(mut flags: Flags) -> crate::Result<i32> {
    let mu = flags.mu()?;
    let x0 = flags.f64_required("x0")?;
    let ydot0 = flags.f64_required("ydot0")?;
    let half_period = flags.f64_required("half-period")?;
    let direction = flags.f64_or("direction", 1.0)?;
    let policy = ContinuationPolicy {
        initial_step: flags.f64_or("step", 2e-3)?,
        min_step: flags.f64_or("min-step", 1e-6)?,
        max_step: flags.f64_or("max-step-c", 1e-2)?,
        grow_after: flags.usize_or("grow-after", 3)?,
        growth: flags.f64_or("growth", 1.3)?,
        max_members: flags.usize_or("max-members", 10_000)?,
        delta_c_total: flags.f64_or("delta-c", 0.2)?,
        period_blowup_factor: flags.f64_or("blowup-factor", 50.0)?,
    };
    let config = flags.integrator_config()?;
    let _ = flags.seed()?;
    let out = flags.out_dir()?;

    let seed = refine_symmetric_orbit(mu, x0, ydot0, ShootingMode::VaryYdot, half_period, &config)?;
    emit!("seed: {}", orbit_summary(&seed));
    let family = continue_family(&seed, mu, direction, &policy, &config)?;
    std::fs::write(out.join("family.jsonl"), family_to_jsonl(&family))?;
    flags.write_manifest(&out)?;
    emit!(
        "family: {} members, termination {:?}",
        family.members.len(),
        family.termination
    );
    Ok(EXIT_OK)
}

fn top_level_help() -> String {
    "r4bp: equilateral restricted four-body problem toolbox\n\
     \n\
     usage: r4bp <command> [--flag value ...]\n\
     \n\
     commands:\n\
       integrate   integrate a trajectory (optionally through collisions)\n\
       hill        rasterize a Hill region in the u or w chart\n\
       equilibria  locate critical points of the effective potential\n\
       routh       print the critical mass of the Routh stability bound\n\
       preimage    pre-images of a point under the regularizing map\n\
       eject       launch an ejection orbit from a regularized primary\n\
       continue    continue a symmetric periodic orbit in the Jacobi constant\n\
     \n\
     common flags: --out-dir DIR (default $R4BP_OUT_DIR or ./out),\n\
     --config FILE (key=value lines; flags override), --seed N, --help.\n\
     Every run writes <command>_manifest.json echoing all resolved parameters."
        .to_string()
}

fn command_help(command: &str) -> String {
    let body = match command {
        "integrate" => {
            "usage: r4bp integrate --mu M --state X,Y,XDOT,YDOT --horizon T [flags]\n\
             \n\
             flags:\n\
               --mu M             mass parameter in [0, 1/2] (required)\n\
               --state S          initial state as x,y,xdot,ydot (required)\n\
               --horizon T        integration horizon, signed (required)\n\
               --regularize       switch charts through m2/m3 collisions\n\
               --rel-tol R        relative tolerance (default 1e-12)\n\
               --abs-tol A        absolute tolerance (default 1e-12)\n\
               --max-step H       largest step (default 0.1)\n\
               --max-steps N      step budget (default 2000000)\n\
               --switch-radius R  chart-switch distance (default 0.05)\n\
               --stop-radius R    m1 stop distance (default 0.001)\n\
               --escape-radius R  escape distance (default 20)\n\
             \n\
             writes trajectory.csv and events.json; exit 3 on a numerical stop"
        }
        "hill" => {
            "usage: r4bp hill --mu M --jacobi C [flags]\n\
             \n\
             flags:\n\
               --mu M         mass parameter (required)\n\
               --jacobi C     Jacobi constant of the level (required; --c works too)\n\
               --space u|w    chart to rasterize (default u)\n\
               --bounds B     window xmin,xmax,ymin,ymax (default -2,2,-2,2)\n\
               --nx N --ny N  resolution (default 512x512)\n\
             \n\
             writes hill.pgm (0 forbidden, 1 singular, 2 admissible) and hill.json"
        }
        "equilibria" => {
            "usage: r4bp equilibria --mu M [flags]\n\
             \n\
             flags:\n\
               --mu M         mass parameter in (0, 1/2] (required)\n\
               --seed-grid N  Newton seed lattice density (default 50)\n\
             \n\
             writes equilibria.json sorted by Jacobi constant descending"
        }
        "routh" => {
            "usage: r4bp routh\n\
             \n\
             prints {\"mu_critical\": ...}, the upper mass bound for linear\n\
             stability of the triangle configuration, and writes routh.json"
        }
        "preimage" => {
            "usage: r4bp preimage --u RE,IM\n\
             \n\
             flags:\n\
               --u RE,IM   point of the translated frame (required)\n\
             \n\
             prints both pre-images under the regularizing map and whether\n\
             they coincide (double root at the symmetric primaries)"
        }
        "eject" => {
            "usage: r4bp eject --mu M --jacobi C --angle A [flags]\n\
             \n\
             flags:\n\
               --mu M           mass parameter (required, > 0)\n\
               --jacobi C       Jacobi constant of the level (required)\n\
               --angle A        launch angle of the momentum (required)\n\
               --primary 2|3    which primary to eject from (default 2)\n\
               --tau-horizon T  fictitious-time horizon, signed (default 10)\n\
               (tolerance flags as in integrate)\n\
             \n\
             writes eject_trajectory.csv and eject_events.json"
        }
        "continue" => {
            "usage: r4bp continue --mu M --x0 X --ydot0 V --half-period T [flags]\n\
             \n\
             flags:\n\
               --mu M            mass parameter (required)\n\
               --x0 X            section position guess (required)\n\
               --ydot0 V         section velocity guess (required)\n\
               --half-period T   half-period guess of the seed (required)\n\
               --direction D     +1 or -1 in the Jacobi constant (default 1)\n\
               --delta-c D       total |Delta C| to sweep (default 0.2)\n\
               --step S          initial step (default 0.002)\n\
               --min-step S      smallest step (default 1e-6)\n\
               --max-step-c S    largest step (default 0.01)\n\
               --grow-after N    successes before growth (default 3)\n\
               --growth G        growth factor (default 1.3)\n\
               --blowup-factor F period blow-up termination (default 50)\n\
               --max-members N   member cap (default 10000)\n\
               (tolerance flags as in integrate)\n\
             \n\
             writes family.jsonl, one orbit per line"
        }
        _ => unreachable!(),
    };
    format!("{body}\n\ncommon flags: --out-dir DIR, --config FILE, --seed N, --help")
}
