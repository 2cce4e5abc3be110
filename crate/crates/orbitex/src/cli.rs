//! Command line front end.
//!
//! Settings come from an optional flat `key = value` file (`--config`) and
//! from flags; flags win. Keys are the long flag names without dashes.
//! Exit codes: 0 success, 2 invalid input, 3 integration failure or drift
//! above tolerance, 4 failed verification.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{CommandFactory, Parser, Subcommand};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{CMat3, GammaParams, Vec3};
use crate::conserved::integral_set;
use crate::dynamics::{legendre, MomentumState, ReducedVelocity};
use crate::integrate::{fmt_num, simulate, IntegratorConfig, Method, Trajectory};
use crate::phases::{base_point, orbit_sample_rng, potential_u, PhaseId, PotentialParams};
use crate::verify::{self, VerificationReport, VerifyConfig};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INTEGRATION: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "orbitex", version, about = "Texture equations on group orbits: simulate, verify, list phases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default, Clone)]
struct Flags {
    /// Flat key = value settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// a1, a2, b, omega1, omega4, omega6 or omega8.
    #[arg(long)]
    phase: Option<String>,
    /// g1,g2,g3 (all positive).
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// alpha,b1,b2,b3,b4,b5 of the potential.
    #[arg(long = "alpha-beta", allow_hyphen_values = true)]
    alpha_beta: Option<String>,
    /// Initial w (3 values).
    #[arg(long, allow_hyphen_values = true)]
    w0: Option<String>,
    /// Initial v (scalar, or 3 values for a1).
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<String>,
    /// Initial m (3 values).
    #[arg(long, allow_hyphen_values = true)]
    m0: Option<String>,
    /// Initial n (a1 only, 3 values).
    #[arg(long, allow_hyphen_values = true)]
    n0: Option<String>,
    /// Initial p (b, omega1, omega4).
    #[arg(long, allow_hyphen_values = true)]
    p0: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// z0,z1.
    #[arg(long = "z-span", allow_hyphen_values = true)]
    z_span: Option<String>,
    #[arg(long)]
    dz: Option<String>,
    /// lie-group-rk4 or ambient-rk4-project.
    #[arg(long)]
    method: Option<String>,
    /// Output samples (simulate) or random points per check (verify).
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the texture equations and write a trajectory.
    Simulate(Flags),
    /// Run numerical checks for one phase or all phases.
    Verify {
        #[command(flatten)]
        flags: Flags,
        /// Verify every phase.
        #[arg(long)]
        all: bool,
    },
    /// List the phases and their integrals.
    Phases,
}

/// Output format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Initial data for a run.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Velocity { v: Vec<f64>, w: Vec3 },
    Momentum { p: f64, m: Vec3, n: Vec3 },
    Random,
}

/// Fully parsed settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub phase: Option<PhaseId>,
    pub gamma: GammaParams,
    pub potential: PotentialParams,
    pub initial: Option<InitialSpec>,
    pub seed: Option<u64>,
    pub z_span: [f64; 2],
    pub dz: f64,
    pub method: Method,
    pub points: Option<usize>,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Parse a flat `key = value` file. `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", no + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

const KEYS: [&str; 16] = [
    "phase", "gamma", "alpha-beta", "w0", "v0", "m0", "n0", "p0", "seed", "z-span", "dz", "method", "points", "tol",
    "out", "format",
];

fn merged(flags: &Flags) -> Result<BTreeMap<String, String>> {
    let mut map = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    if let Some(bad) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown config key '{bad}'")));
    }
    let pairs: [(&str, &Option<String>); 14] = [
        ("phase", &flags.phase),
        ("gamma", &flags.gamma),
        ("alpha-beta", &flags.alpha_beta),
        ("w0", &flags.w0),
        ("v0", &flags.v0),
        ("m0", &flags.m0),
        ("n0", &flags.n0),
        ("p0", &flags.p0),
        ("seed", &flags.seed),
        ("z-span", &flags.z_span),
        ("dz", &flags.dz),
        ("method", &flags.method),
        ("points", &flags.points),
        ("tol", &flags.tol),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            map.insert(k.to_string(), v.clone());
        }
    }
    if let Some(o) = &flags.out {
        map.insert("out".into(), o.display().to_string());
    }
    if let Some(f) = &flags.format {
        map.insert("format".into(), f.clone());
    }
    Ok(map)
}

fn floats(key: &str, s: &str, n: Option<usize>) -> Result<Vec<f64>> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<f64>, _>>()
        .map_err(|_| Error::Parse(format!("--{key}: expected comma-separated numbers, got '{s}'")))?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parse(format!("--{key}: values must be finite")));
    }
    if let Some(n) = n {
        if v.len() != n {
            return Err(Error::Parse(format!("--{key}: expected {n} values, got {}", v.len())));
        }
    }
    Ok(v)
}

fn vec3(key: &str, s: &str) -> Result<Vec3> {
    let v = floats(key, s, Some(3))?;
    Ok(Vec3([v[0], v[1], v[2]]))
}

fn scalar(key: &str, s: &str) -> Result<f64> {
    Ok(floats(key, s, Some(1))?[0])
}

/// Build a [`RunConfig`] from merged settings.
pub fn build_config(map: &BTreeMap<String, String>) -> Result<RunConfig> {
    let get = |k: &str| map.get(k).map(String::as_str);
    let phase = get("phase").map(str::parse::<PhaseId>).transpose()?;
    let gamma = match get("gamma") {
        Some(s) => {
            let g = floats("gamma", s, Some(3))?;
            GammaParams::new(g[0], g[1], g[2]).map_err(|e| Error::Parse(e.to_string()))?
        }
        None => GammaParams::default(),
    };
    let potential = match get("alpha-beta") {
        Some(s) => {
            let v = floats("alpha-beta", s, Some(6))?;
            PotentialParams { alpha: v[0], beta: [v[1], v[2], v[3], v[4], v[5]] }
        }
        None => PotentialParams::default(),
    };
    let seed = get("seed")
        .map(|s| s.trim().parse::<u64>().map_err(|_| Error::Parse(format!("--seed: expected an unsigned integer, got '{s}'"))))
        .transpose()?;
    let initial = if get("v0").is_some() || get("w0").is_some() {
        let w = get("w0").map(|s| vec3("w0", s)).transpose()?.unwrap_or(Vec3::ZERO);
        let v = match (get("v0"), phase) {
            (None, _) => vec![],
            (Some(s), Some(PhaseId::APhase1)) => vec3("v0", s)?.0.to_vec(),
            (Some(s), _) => vec![scalar("v0", s)?],
        };
        Some(InitialSpec::Velocity { v, w })
    } else if ["m0", "n0", "p0"].iter().any(|k| get(k).is_some()) {
        Some(InitialSpec::Momentum {
            p: get("p0").map(|s| scalar("p0", s)).transpose()?.unwrap_or(0.0),
            m: get("m0").map(|s| vec3("m0", s)).transpose()?.unwrap_or(Vec3::ZERO),
            n: get("n0").map(|s| vec3("n0", s)).transpose()?.unwrap_or(Vec3::ZERO),
        })
    } else if seed.is_some() {
        Some(InitialSpec::Random)
    } else {
        None
    };
    let z_span = match get("z-span") {
        Some(s) => {
            let v = floats("z-span", s, Some(2))?;
            [v[0], v[1]]
        }
        None => [0.0, 10.0],
    };
    let dz = get("dz").map(|s| scalar("dz", s)).transpose()?.unwrap_or(1e-3);
    if dz <= 0.0 {
        return Err(Error::Parse("--dz must be positive".into()));
    }
    let method = get("method").map(str::parse::<Method>).transpose()?.unwrap_or_default();
    let points = get("points")
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Parse(format!("--points: expected a count, got '{s}'"))))
        .transpose()?;
    let tol = get("tol").map(|s| scalar("tol", s)).transpose()?.unwrap_or(1e-8);
    if tol <= 0.0 {
        return Err(Error::Parse("--tol must be positive".into()));
    }
    let format = match get("format") {
        None | Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => return Err(Error::Parse(format!("--format: expected csv or json, got '{other}'"))),
    };
    Ok(RunConfig {
        phase,
        gamma,
        potential,
        initial,
        seed,
        z_span,
        dz,
        method,
        points,
        tol,
        out: get("out").map(PathBuf::from),
        format,
    })
}

/// Initial state described by a config.
pub fn initial_state(phase: PhaseId, cfg: &RunConfig) -> Result<MomentumState> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let a: CMat3 = match cfg.seed {
        Some(_) => orbit_sample_rng(phase, &mut rng).a,
        None => base_point(phase).a,
    };
    let k = phase.algebra_dim();
    let spec = cfg
        .initial
        .as_ref()
        .ok_or_else(|| Error::Parse("no initial state: give --v0/--w0, --m0/--n0/--p0 or --seed".into()))?;
    match spec {
        InitialSpec::Velocity { v, w } => {
            let xi = match phase {
                PhaseId::APhase1 => {
                    let v = if v.is_empty() { Vec3::ZERO } else { Vec3([v[0], v[1], v[2]]) };
                    ReducedVelocity::Chiral { v, w: *w }
                }
                PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8 => {
                    if !v.is_empty() {
                        return Err(Error::Parse(format!("--v0 does not apply to phase {phase}")));
                    }
                    ReducedVelocity::Rotation { w: *w }
                }
                _ => ReducedVelocity::PhaseRotation { v: v.first().copied().unwrap_or(0.0), w: *w },
            };
            Ok(legendre(phase, &xi, &a, &cfg.gamma))
        }
        InitialSpec::Momentum { p, m, n } => {
            let mu = match phase {
                PhaseId::APhase1 => [m.0, n.0].concat(),
                PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8 => {
                    if *p != 0.0 || *n != Vec3::ZERO {
                        return Err(Error::Parse(format!("--p0/--n0 do not apply to phase {phase}")));
                    }
                    m.0.to_vec()
                }
                _ => {
                    if *n != Vec3::ZERO {
                        return Err(Error::Parse(format!("--n0 does not apply to phase {phase}")));
                    }
                    vec![*p, m[0], m[1], m[2]]
                }
            };
            MomentumState::new(phase, mu, a)
        }
        InitialSpec::Random => {
            let mu = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            MomentumState::new(phase, mu, a)
        }
    }
}

fn usage(sub: &str) -> String {
    let mut cmd = Cli::command();
    cmd.find_subcommand_mut(sub).map(|c| c.render_usage().to_string()).unwrap_or_default()
}

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Outcome {
    fn fail(code: i32, msg: String) -> Self {
        Outcome { code, stdout: String::new(), stderr: msg }
    }
}

fn write_out(path: &Option<PathBuf>, body: &str, stdout: &mut String) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(Error::Io),
        None => {
            stdout.push_str(body);
            Ok(())
        }
    }
}

fn cmd_simulate(flags: &Flags) -> Outcome {
    let cfg = match merged(flags).and_then(|m| build_config(&m)) {
        Ok(c) => c,
        Err(e) => return Outcome::fail(EXIT_PARSE, format!("error: {e}\n{}", usage("simulate"))),
    };
    let Some(phase) = cfg.phase else {
        return Outcome::fail(EXIT_PARSE, format!("error: --phase is required\n{}", usage("simulate")));
    };
    let init = match initial_state(phase, &cfg) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(EXIT_PARSE, format!("error: {e}\n{}", usage("simulate"))),
    };
    let run = IntegratorConfig {
        method: cfg.method,
        dz: cfg.dz,
        z_span: cfg.z_span,
        tol: cfg.tol,
        points: cfg.points.unwrap_or(IntegratorConfig::default().points),
    };
    let traj = match simulate(&init, &cfg.gamma, &run) {
        Ok(t) => t,
        Err(e) => return Outcome::fail(EXIT_INTEGRATION, format!("error: {e}\n")),
    };
    let body = match cfg.format {
        Format::Csv => traj.to_csv(),
        Format::Json => traj.to_json(),
    };
    let mut stdout = String::new();
    if let Err(e) = write_out(&cfg.out, &body, &mut stdout) {
        return Outcome::fail(EXIT_PARSE, format!("error: {e}\n"));
    }
    let mut summary = drift_summary(&traj, &cfg);
    let mut code = EXIT_OK;
    if let Some((name, z)) = first_violation(&traj, cfg.tol) {
        let _ = writeln!(summary, "error: drift of {name} exceeds tolerance {} at z = {z}", cfg.tol);
        code = EXIT_INTEGRATION;
    }
    if cfg.out.is_some() {
        stdout.push_str(&summary);
        Outcome { code, stdout, stderr: String::new() }
    } else {
        Outcome { code, stdout, stderr: summary }
    }
}

fn drift_summary(t: &Trajectory, cfg: &RunConfig) -> String {
    let mut s = String::new();
    let steps = ((cfg.z_span[1] - cfg.z_span[0]).abs() / cfg.dz).round().max(1.0);
    let _ = writeln!(
        s,
        "phase {}  method {}  steps {}  samples {}",
        t.phase,
        cfg.method.name(),
        steps,
        t.samples.len()
    );
    if let Ok(st) = t.state(0) {
        let _ = writeln!(s, "potential U = {}", fmt_num(potential_u(&st.a, &cfg.potential)));
    }
    for (n, d) in t.drift.names.iter().zip(&t.drift.max_relative) {
        let _ = writeln!(s, "drift {n:<9} {d:.3e}");
    }
    let _ = writeln!(s, "orbit residual {:.3e}", t.drift.orbit_residual);
    s
}

/// The first quantity whose drift exceeds `tol` and the first recorded
/// `z` where that is visible (the end of the run if only seen between samples).
fn first_violation(t: &Trajectory, tol: f64) -> Option<(String, f64)> {
    let i = t.drift.max_relative.iter().position(|d| *d > tol)?;
    let f0 = t.samples[0].conserved[i];
    let z = t
        .samples
        .iter()
        .find(|s| (s.conserved[i] - f0).abs() / f0.abs().max(1.0) > tol)
        .map_or(t.samples.last().map_or(0.0, |s| s.z), |s| s.z);
    Some((t.drift.names[i].clone(), z))
}

fn suite(phase: PhaseId, cfg: &RunConfig) -> Result<Vec<VerificationReport>> {
    let vc = VerifyConfig { gamma: cfg.gamma, n_points: cfg.points.unwrap_or(100), seed: cfg.seed.unwrap_or(1), tol: cfg.tol };
    let run = IntegratorConfig { method: cfg.method, dz: cfg.dz, z_span: cfg.z_span, tol: cfg.tol, points: 1 };
    let mut reps = verify::default_suite(phase, &vc, &run, &cfg.potential)?;
    let small = VerifyConfig { n_points: vc.n_points.min(2), ..vc };
    match phase {
        PhaseId::BPhase => {
            reps.push(verify::check_bphase_closed_form(&small, &run)?);
            reps.push(verify::check_ep_el_equivalence(phase, &VerifyConfig { n_points: 1, ..vc }, 1.0, 2e-3)?);
        }
        PhaseId::APhase2 => {
            reps.push(verify::check_ep_el_equivalence(phase, &VerifyConfig { n_points: 1, ..vc }, 1.0, 2e-3)?);
        }
        _ => {}
    }
    Ok(reps)
}

fn reports_csv(reps: &[VerificationReport]) -> String {
    let mut s = String::from("check,phase,seed,n_points,max_residual,tolerance,pass,flags\n");
    for r in reps {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.check,
            r.phase,
            r.seed,
            r.n_points,
            fmt_num(r.max_residual),
            fmt_num(r.tolerance),
            r.pass,
            r.flags.join(";")
        );
    }
    s
}

fn reports_table(reps: &[VerificationReport]) -> String {
    let mut s = format!("{:<8} {:<18} {:>6} {:>12} {:>10}  {}\n", "phase", "check", "points", "residual", "tolerance", "result");
    for r in reps {
        let extra = if r.flags.is_empty() { String::new() } else { format!(" [{}]", r.flags.join(", ")) };
        let _ = writeln!(
            s,
            "{:<8} {:<18} {:>6} {:>12.3e} {:>10.1e}  {}{}",
            r.phase,
            r.check,
            r.n_points,
            r.max_residual,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" },
            extra
        );
    }
    s
}

fn cmd_verify(flags: &Flags, all: bool) -> Outcome {
    let cfg = match merged(flags).and_then(|m| build_config(&m)) {
        Ok(c) => c,
        Err(e) => return Outcome::fail(EXIT_PARSE, format!("error: {e}\n{}", usage("verify"))),
    };
    let phases: Vec<PhaseId> = match (all, cfg.phase) {
        (true, _) => PhaseId::ALL.to_vec(),
        (false, Some(p)) => vec![p],
        (false, None) => {
            return Outcome::fail(EXIT_PARSE, format!("error: give --phase or --all\n{}", usage("verify")));
        }
    };
    let mut reps = Vec::new();
    for p in phases {
        match suite(p, &cfg) {
            Ok(r) => reps.extend(r),
            Err(e) => return Outcome::fail(EXIT_VERIFY, format!("error: {p}: {e}\n")),
        }
    }
    let body = match cfg.format {
        Format::Json => {
            let items: Vec<String> = reps.iter().map(|r| r.to_json()).collect();
            format!("[\n{}\n]\n", items.join(",\n"))
        }
        Format::Csv => reports_csv(&reps),
    };
    let mut stdout = String::new();
    if let Err(e) = write_out(&cfg.out, &body, &mut stdout) {
        return Outcome::fail(EXIT_PARSE, format!("error: {e}\n"));
    }
    let table = reports_table(&reps);
    let code = if reps.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_VERIFY };
    if cfg.out.is_some() {
        stdout.push_str(&table);
        Outcome { code, stdout, stderr: String::new() }
    } else {
        Outcome { code, stdout, stderr: table }
    }
}

/// Short integrability status for each phase.
pub fn status(phase: PhaseId) -> &'static str {
    match phase {
        PhaseId::APhase1 => "completely integrable on the 10-dimensional leaves",
        PhaseId::APhase2 => "completely integrable on the 6-dimensional leaves",
        PhaseId::BPhase => "explicitly solvable (free symmetric rigid body with uniform phase winding)",
        PhaseId::Omega1 => "completely integrable on the 6-dimensional leaves",
        PhaseId::Omega4 => "three integrals in involution; not known to be complete",
        PhaseId::Omega6 => "completely integrable on the 6-dimensional leaves",
        PhaseId::Omega8 => "completely integrable; orbit diffeomorphic to SO(3)",
    }
}

fn fmt_matrix(a: &CMat3) -> String {
    let c = |z: crate::C64| {
        let r = |x: f64| if x.abs() < 5e-16 { 0.0 } else { x };
        format!("{:+.4}{:+.4}i", r(z.re), r(z.im))
    };
    (0..3)
        .map(|i| (0..3).map(|j| c(a.get(i, j))).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Text printed by `orbitex phases`.
pub fn phases_text() -> String {
    let mut s = String::new();
    for p in PhaseId::ALL {
        let set = integral_set(p);
        let _ = writeln!(s, "{p}");
        let _ = writeln!(s, "  group       {}", p.group_name());
        let _ = writeln!(s, "  base point  [{}]", fmt_matrix(&base_point(p).a));
        let _ = writeln!(s, "  orbit dim   {}", p.orbit_dim());
        let _ = writeln!(s, "  integrals   {} ({})", set.quantities.len(), set.names().join(", "));
        let _ = writeln!(s, "  status      {}", status(p));
    }
    s
}

/// Run the command line with explicit arguments and return the exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    let out = match &cli.command {
        Command::Simulate(f) => cmd_simulate(f),
        Command::Verify { flags, all } => cmd_verify(flags, *all),
        Command::Phases => Outcome { code: EXIT_OK, stdout: phases_text(), stderr: String::new() },
    };
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    run_with(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_of(pairs: &[(&str, &str)]) -> Result<RunConfig> {
        let m: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        build_config(&m)
    }

    #[test]
    fn config_file_parsing() {
        let m = parse_config_file("# comment\nphase = b\n\ngamma=1,2,3 # trailing\n").unwrap();
        assert_eq!(m["phase"], "b");
        assert_eq!(m["gamma"], "1,2,3");
        assert!(parse_config_file("phase b").is_err());
    }

    #[test]
    fn build_config_defaults_and_errors() {
        let c = cfg_of(&[("phase", "a2")]).unwrap();
        assert_eq!(c.dz, 1e-3);
        assert_eq!(c.z_span, [0.0, 10.0]);
        assert_eq!(c.method, Method::LieGroupRk4);
        assert_eq!(c.format, Format::Csv);
        assert!(c.initial.is_none());
        assert!(cfg_of(&[("gamma", "1,0,1")]).is_err());
        assert!(cfg_of(&[("gamma", "1,1")]).is_err());
        assert!(cfg_of(&[("phase", "c")]).is_err());
        assert!(cfg_of(&[("dz", "-1")]).is_err());
        assert!(cfg_of(&[("format", "xml")]).is_err());
        assert!(cfg_of(&[("method", "euler")]).is_err());
    }

    #[test]
    fn initial_states() {
        let c = cfg_of(&[("phase", "b"), ("w0", "1,0,1")]).unwrap();
        let s = initial_state(PhaseId::BPhase, &c).unwrap();
        assert_eq!(s.a, CMat3::IDENTITY);
        assert_eq!(s.mu, vec![0.0, 8.0, 0.0, 4.0]);
        let c = cfg_of(&[("phase", "a2"), ("m0", "1,2,3")]).unwrap();
        assert_eq!(initial_state(PhaseId::APhase2, &c).unwrap().mu, vec![1.0, 2.0, 3.0]);
        let c = cfg_of(&[("phase", "a2"), ("v0", "1")]).unwrap();
        assert!(initial_state(PhaseId::APhase2, &c).is_err());
        let c = cfg_of(&[("phase", "a2"), ("seed", "7")]).unwrap();
        assert_eq!(initial_state(PhaseId::APhase2, &c).unwrap(), initial_state(PhaseId::APhase2, &c).unwrap());
        let c = cfg_of(&[("phase", "a2")]).unwrap();
        assert!(initial_state(PhaseId::APhase2, &c).is_err());
    }

    #[test]
    fn phases_listing() {
        let t = phases_text();
        assert!(t.contains("a1\n") && t.contains("integrals   5 (h, jm, j3orb, jspin3, jspin_sq)"));
        assert!(t.contains("diffeomorphic to SO(3)"));
        assert!(t.contains("explicitly solvable"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_with(["orbitex", "simulate"]), EXIT_PARSE);
        assert_eq!(run_with(["orbitex", "bogus"]), EXIT_PARSE);
        assert_eq!(run_with(["orbitex", "verify"]), EXIT_PARSE);
        assert_eq!(run_with(["orbitex", "phases"]), EXIT_OK);
    }
}
