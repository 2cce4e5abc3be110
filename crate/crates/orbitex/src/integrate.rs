//! Integration along `z`, the closed-form B-phase solution and trajectory IO.
//!
//! The default method is a Runge-Kutta-Munthe-Kaas scheme of order four:
//! the momenta follow classical RK4 while `A` is only ever moved by group
//! elements `exp(u) . A0`, so it stays on its orbit up to rounding.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::algebra::{exp_so3, rot_e3, CMat3, GammaParams, Mat3, Vec3, C64};
use crate::conserved::{evaluate, tracked};
use crate::dynamics::{bphase_inertia, generator_lstsq, vector_field, MomentumState};
use crate::phases::{bracket, exp_act, exp_elem, orbit_residual, GroupElem, PhaseId};
use crate::{Error, Result};

/// Integration scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    LieGroupRk4,
    AmbientRk4Project,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LieGroupRk4 => "lie-group-rk4",
            Method::AmbientRk4Project => "ambient-rk4-project",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lie-group-rk4" => Ok(Method::LieGroupRk4),
            "ambient-rk4-project" => Ok(Method::AmbientRk4Project),
            _ => Err(Error::Parse(format!("unknown method '{s}'"))),
        }
    }
}

/// Integrator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dz: f64,
    pub z_span: [f64; 2],
    /// Drift tolerance reported against; also scales the orbit check.
    pub tol: f64,
    /// Maximum number of recorded intervals; 0 records every step.
    pub points: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { method: Method::LieGroupRk4, dz: 1e-3, z_span: [0.0, 10.0], tol: 1e-8, points: 1000 }
    }
}

/// `dexp_u^{-1}(v)` truncated after the second bracket, enough for order four.
fn dexpinv(phase: PhaseId, u: &[f64], v: &[f64]) -> Vec<f64> {
    let c1 = bracket(phase, u, v);
    let c2 = bracket(phase, u, &c1);
    (0..v.len()).map(|i| v[i] - 0.5 * c1[i] + c2[i] / 12.0).collect()
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(p, q)| p + a * q).collect()
}

fn rk_combine(k: [&[f64]; 4], h: f64) -> Vec<f64> {
    (0..k[0].len()).map(|i| h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i])).collect()
}

fn lie_step(s: &MomentumState, h: f64, g: &GammaParams) -> Result<MomentumState> {
    let p = s.phase;
    let f1 = vector_field(s, g)?;
    let k1 = f1.xi.clone();
    let mut ks = vec![k1];
    let mut fs = vec![f1.dmu];
    for scale in [0.5, 0.5, 1.0] {
        let u: Vec<f64> = ks.last().expect("stage").iter().map(|x| x * scale * h).collect();
        let mu = axpy(&s.mu, scale * h, fs.last().expect("stage"));
        let st = MomentumState { phase: p, mu, a: exp_act(p, &u, &s.a) };
        let f = vector_field(&st, g)?;
        ks.push(dexpinv(p, &u, &f.xi));
        fs.push(f.dmu);
    }
    let u = rk_combine([&ks[0], &ks[1], &ks[2], &ks[3]], h);
    let dmu = rk_combine([&fs[0], &fs[1], &fs[2], &fs[3]], h);
    Ok(MomentumState { phase: p, mu: axpy(&s.mu, 1.0, &dmu), a: exp_act(p, &u, &s.a) })
}

/// Gauss-Newton projection of an ambient matrix onto the orbit through `start`.
pub fn project_to_orbit(phase: PhaseId, target: &CMat3, start: &CMat3) -> Result<CMat3> {
    let mut cur = *start;
    for _ in 0..5 {
        let delta = generator_lstsq(phase, &cur, &(*target - cur));
        cur = exp_act(phase, &delta, &cur);
    }
    let dist = (*target - cur).norm();
    if !dist.is_finite() || dist > 0.1 {
        return Err(Error::Projection(dist));
    }
    Ok(cur)
}

fn ambient_step(s: &MomentumState, h: f64, g: &GammaParams) -> Result<MomentumState> {
    let p = s.phase;
    let mut dm = Vec::with_capacity(4);
    let mut da = Vec::with_capacity(4);
    let mut cur = s.clone();
    for c in [0.5, 0.5, 1.0, 0.0] {
        let f = vector_field(&cur, g)?;
        cur = MomentumState { phase: p, mu: axpy(&s.mu, c * h, &f.dmu), a: s.a + f.da.scale(c * h) };
        dm.push(f.dmu);
        da.push(f.da);
    }
    let mu = axpy(&s.mu, 1.0, &rk_combine([&dm[0], &dm[1], &dm[2], &dm[3]], h));
    let a = s.a + (da[0] + da[1].scale(2.0) + da[2].scale(2.0) + da[3]).scale(h / 6.0);
    Ok(MomentumState { phase: p, mu, a: project_to_orbit(p, &a, &s.a)? })
}

/// One step of size `h` (negative `h` integrates backwards).
pub fn step(s: &MomentumState, h: f64, g: &GammaParams, method: Method) -> Result<MomentumState> {
    let next = match method {
        Method::LieGroupRk4 => lie_step(s, h, g)?,
        Method::AmbientRk4Project => ambient_step(s, h, g)?,
    };
    if next.mu.iter().any(|x| !x.is_finite()) || !next.a.is_finite() {
        return Err(Error::SingularSolve(f64::INFINITY));
    }
    Ok(next)
}

/// One recorded row of a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub z: f64,
    /// Momenta, then the 9 real and 9 imaginary entries of `A` row-major.
    pub state: Vec<f64>,
    pub conserved: Vec<f64>,
}

/// Maximum deviations observed along a run.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub names: Vec<String>,
    /// `max |f - f(z0)| / max(|f(z0)|, 1)` per quantity.
    pub max_relative: Vec<f64>,
    pub orbit_residual: f64,
}

impl DriftReport {
    pub fn worst(&self) -> f64 {
        self.max_relative.iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// A sampled solution together with its settings and drift report.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub phase: PhaseId,
    pub gamma: GammaParams,
    pub config: IntegratorConfig,
    pub conserved_names: Vec<String>,
    pub samples: Vec<Sample>,
    pub drift: DriftReport,
}

/// Column names of the flattened state.
pub fn state_columns(phase: PhaseId) -> Vec<String> {
    let mut v: Vec<String> = phase.momentum_names().iter().map(|s| s.to_string()).collect();
    for part in ["re", "im"] {
        for i in 1..=3 {
            for j in 1..=3 {
                v.push(format!("{part}_a{i}{j}"));
            }
        }
    }
    v
}

pub fn flatten(s: &MomentumState) -> Vec<f64> {
    let mut v = s.mu.clone();
    v.extend_from_slice(&s.a.to_real18());
    v
}

pub fn unflatten(phase: PhaseId, x: &[f64]) -> Result<MomentumState> {
    let k = phase.algebra_dim();
    if x.len() != k + 18 {
        return Err(Error::StateMismatch(phase.name()));
    }
    MomentumState::new(phase, x[..k].to_vec(), CMat3::from_real18(&x[k..]))
}

impl Trajectory {
    pub fn state(&self, i: usize) -> Result<MomentumState> {
        unflatten(self.phase, &self.samples[i].state)
    }

    pub fn final_state(&self) -> Result<MomentumState> {
        self.state(self.samples.len() - 1)
    }
}

struct DriftAccumulator {
    initial: Vec<f64>,
    max_rel: Vec<f64>,
    orbit: f64,
}

impl DriftAccumulator {
    fn new(initial: Vec<f64>) -> Self {
        let n = initial.len();
        DriftAccumulator { initial, max_rel: vec![0.0; n], orbit: 0.0 }
    }

    fn add(&mut self, values: &[f64], a: &CMat3, phase: PhaseId) {
        for (i, v) in values.iter().enumerate() {
            let d = (v - self.initial[i]).abs() / self.initial[i].abs().max(1.0);
            self.max_rel[i] = self.max_rel[i].max(if d.is_nan() { f64::INFINITY } else { d });
        }
        self.orbit = self.orbit.max(orbit_residual(phase, a));
    }
}

/// Integrate from `initial` over `config.z_span` and record samples and drift.
pub fn simulate(initial: &MomentumState, g: &GammaParams, config: &IntegratorConfig) -> Result<Trajectory> {
    let phase = initial.phase;
    let [z0, z1] = config.z_span;
    if !(config.dz > 0.0) || !z0.is_finite() || !z1.is_finite() {
        return Err(Error::Parse("step must be positive and the span finite".into()));
    }
    let n = (((z1 - z0).abs() / config.dz).round() as usize).max(1);
    let h = (z1 - z0) / n as f64;
    let every = if config.points == 0 { 1 } else { n.div_ceil(config.points) };
    let kinds = tracked(phase);
    let mut state = initial.clone();
    let v0 = evaluate(&kinds, &state, g);
    let mut drift = DriftAccumulator::new(v0.clone());
    drift.add(&v0, &state.a, phase);
    let mut samples = vec![Sample { z: z0, state: flatten(&state), conserved: v0 }];
    for i in 1..=n {
        let z = z0 + h * i as f64;
        state = step(&state, h, g, config.method)
            .map_err(|e| Error::Integration { z: z - h, source: Box::new(e) })?;
        let vals = evaluate(&kinds, &state, g);
        drift.add(&vals, &state.a, phase);
        if i % every == 0 || i == n {
            samples.push(Sample { z, state: flatten(&state), conserved: vals });
        }
    }
    Ok(Trajectory {
        phase,
        gamma: *g,
        config: *config,
        conserved_names: kinds.iter().map(|k| k.name()).collect(),
        samples,
        drift: DriftReport {
            names: kinds.iter().map(|k| k.name()).collect(),
            max_relative: drift.max_rel,
            orbit_residual: drift.orbit,
        },
    })
}

/// Drift report recomputed from recorded samples alone.
pub fn drift_from_samples(phase: PhaseId, names: &[String], samples: &[Sample]) -> Result<DriftReport> {
    let first = samples.first().ok_or_else(|| Error::Parse("trajectory has no samples".into()))?;
    let mut acc = DriftAccumulator::new(first.conserved.clone());
    for s in samples {
        acc.add(&s.conserved, &unflatten(phase, &s.state)?.a, phase);
    }
    Ok(DriftReport { names: names.to_vec(), max_relative: acc.max_rel, orbit_residual: acc.orbit })
}

/// Closed-form B-phase solution `(v, w, A)` at `z`.
///
/// `w` precesses about the symmetry axis at rate `(a - b) w3 / a`, where
/// `J = diag(a, a, b)`, and the attitude is the product of a fixed-axis
/// rotation and a body precession.
pub fn bphase_analytic(v0: f64, w0: Vec3, a0: &CMat3, g: &GammaParams, z: f64) -> (f64, Vec3, CMat3) {
    let [a, _, b] = bphase_inertia(g);
    let om = (a - b) / a * w0[2];
    let w = rot_e3(-om * z).mul_vec(&w0);
    let r = bphase_attitude(w0, g, z);
    (v0, w, a0.rmul_real(&r).mul_scalar(C64::cis(v0 * z)))
}

/// Reconstruct group elements `g(z)` with `dg/dz g^-1 = xi(z)` from
/// velocity samples on a uniform grid, using the fourth-order Magnus
/// expansion at the Gauss points with cubic interpolation of `xi`.
pub fn reconstruct(phase: PhaseId, xi: &[Vec<f64>], dz: f64, g0: &GroupElem) -> Vec<GroupElem> {
    let mut out = vec![*g0];
    if xi.len() < 2 {
        return out;
    }
    let n = xi.len();
    let k = xi[0].len();
    let t = [0.5 - 3f64.sqrt() / 6.0, 0.5 + 3f64.sqrt() / 6.0];
    for i in 0..n - 1 {
        // Four nodes around the interval, clamped at the ends.
        let lo = if n < 4 { 0 } else { i.saturating_sub(1).min(n - 4) };
        let nodes: Vec<usize> = (lo..(lo + 4).min(n)).collect();
        let interp = |s: f64| -> Vec<f64> {
            let x = i as f64 + s;
            let mut v = vec![0.0; k];
            for &j in &nodes {
                let w: f64 = nodes.iter().filter(|&&m| m != j).map(|&m| (x - m as f64) / (j as f64 - m as f64)).product();
                for c in 0..k {
                    v[c] += w * xi[j][c];
                }
            }
            v
        };
        let (x1, x2) = (interp(t[0]), interp(t[1]));
        let c = bracket(phase, &x2, &x1);
        let om: Vec<f64> = (0..k).map(|c_| 0.5 * dz * (x1[c_] + x2[c_]) + 3f64.sqrt() * dz * dz / 12.0 * c[c_]).collect();
        let next = exp_elem(phase, &om).compose(out.last().expect("nonempty"));
        out.push(next);
    }
    out
}

/// Format with 17 significant digits; parsing and reformatting is exact.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_num(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{s}'")))
}

impl Trajectory {
    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["z".to_string()];
        h.extend(state_columns(self.phase));
        h.extend(self.conserved_names.iter().cloned());
        h
    }

    /// Long-form CSV: one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header().join(",");
        out.push('\n');
        for s in &self.samples {
            let row: Vec<String> = std::iter::once(s.z).chain(s.state.iter().copied()).chain(s.conserved.iter().copied()).map(fmt_num).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Read the CSV written by [`Trajectory::to_csv`]. Settings are not
    /// stored in CSV, so they are taken from the arguments; the drift
    /// report is recomputed from the rows.
    pub fn from_csv(text: &str, phase: PhaseId, gamma: GammaParams, config: IntegratorConfig) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or_else(|| Error::Parse("empty csv".into()))?.split(',').collect();
        let ns = phase.algebra_dim() + 18;
        let expect = state_columns(phase);
        if header.len() < 1 + ns || header[0] != "z" || header[1..=ns].iter().zip(&expect).any(|(a, b)| a != b) {
            return Err(Error::Parse(format!("csv header does not match phase {phase}")));
        }
        let conserved_names: Vec<String> = header[1 + ns..].iter().map(|s| s.to_string()).collect();
        let mut samples = Vec::new();
        for line in lines {
            let vals = line.split(',').map(parse_num).collect::<Result<Vec<f64>>>()?;
            if vals.len() != header.len() {
                return Err(Error::Parse("csv row length does not match header".into()));
            }
            samples.push(Sample { z: vals[0], state: vals[1..=ns].to_vec(), conserved: vals[1 + ns..].to_vec() });
        }
        let drift = drift_from_samples(phase, &conserved_names, &samples)?;
        Ok(Trajectory { phase, gamma, config, conserved_names, samples, drift })
    }

    pub fn to_json(&self) -> String {
        let nums = |v: &[f64]| v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",");
        let strs = |v: &[String]| v.iter().map(|x| format!("\"{x}\"")).collect::<Vec<_>>().join(",");
        let c = &self.config;
        let mut out = String::new();
        let _ = write!(
            out,
            "{{\"phase\":\"{}\",\"config\":{{\"gamma\":[{}],\"method\":\"{}\",\"dz\":{},\"z_span\":[{}],\"tol\":{},\"points\":{},\"state_columns\":[{}],\"conserved_columns\":[{}]}},\"samples\":[",
            self.phase,
            nums(&[self.gamma.g1, self.gamma.g2, self.gamma.g3]),
            c.method.name(),
            fmt_num(c.dz),
            nums(&c.z_span),
            fmt_num(c.tol),
            c.points,
            strs(&state_columns(self.phase)),
            strs(&self.conserved_names),
        );
        for (i, s) in self.samples.iter().enumerate() {
            let sep = if i + 1 < self.samples.len() { "," } else { "" };
            let _ = write!(
                out,
                "\n{{\"z\":{},\"state\":[{}],\"conserved\":[{}]}}{sep}",
                fmt_num(s.z),
                nums(&s.state),
                nums(&s.conserved)
            );
        }
        let _ = write!(
            out,
            "\n],\"drift\":{{\"names\":[{}],\"max_relative\":[{}],\"orbit_residual\":{}}}}}\n",
            strs(&self.drift.names),
            nums(&self.drift.max_relative),
            fmt_num(self.drift.orbit_residual)
        );
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("trajectory json: {what}"));
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let f64s = |x: &serde_json::Value| -> Result<Vec<f64>> {
            x.as_array()
                .ok_or_else(|| bad("expected array"))?
                .iter()
                .map(|e| e.as_f64().ok_or_else(|| bad("expected number")))
                .collect()
        };
        let strings = |x: &serde_json::Value| -> Result<Vec<String>> {
            x.as_array()
                .ok_or_else(|| bad("expected array"))?
                .iter()
                .map(|e| e.as_str().map(str::to_string).ok_or_else(|| bad("expected string")))
                .collect()
        };
        let num = |x: &serde_json::Value| x.as_f64().ok_or_else(|| bad("expected number"));
        let phase: PhaseId = v["phase"].as_str().ok_or_else(|| bad("phase"))?.parse()?;
        let c = &v["config"];
        let gm = f64s(&c["gamma"])?;
        if gm.len() != 3 {
            return Err(bad("gamma"));
        }
        let span = f64s(&c["z_span"])?;
        if span.len() != 2 {
            return Err(bad("z_span"));
        }
        let config = IntegratorConfig {
            method: c["method"].as_str().ok_or_else(|| bad("method"))?.parse()?,
            dz: num(&c["dz"])?,
            z_span: [span[0], span[1]],
            tol: num(&c["tol"])?,
            points: c["points"].as_u64().ok_or_else(|| bad("points"))? as usize,
        };
        if strings(&c["state_columns"])? != state_columns(phase) {
            return Err(bad("state columns do not match phase"));
        }
        let samples = v["samples"]
            .as_array()
            .ok_or_else(|| bad("samples"))?
            .iter()
            .map(|s| Ok(Sample { z: num(&s["z"])?, state: f64s(&s["state"])?, conserved: f64s(&s["conserved"])? }))
            .collect::<Result<Vec<_>>>()?;
        let d = &v["drift"];
        Ok(Trajectory {
            phase,
            gamma: GammaParams::new(gm[0], gm[1], gm[2])?,
            config,
            conserved_names: strings(&c["conserved_columns"])?,
            samples,
            drift: DriftReport {
                names: strings(&d["names"])?,
                max_relative: f64s(&d["max_relative"])?,
                orbit_residual: num(&d["orbit_residual"])?,
            },
        })
    }
}

/// Maximum entrywise distance between two matrices, used by comparisons.
pub fn mat_dist(a: &CMat3, b: &CMat3) -> f64 {
    (*a - *b).max_abs()
}

/// The rotation part of the closed-form solution, exposed for checks of
/// the spatial angular momentum `R J w`.
pub fn bphase_attitude(w0: Vec3, g: &GammaParams, z: f64) -> Mat3 {
    let [a, _, b] = bphase_inertia(g);
    let om = (a - b) / a * w0[2];
    exp_so3(&((w0 - Vec3::e(2) * om) * z)) * rot_e3(om * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{inverse_legendre, legendre, ReducedVelocity};
    use crate::phases::{base_point, orbit_sample, orbit_sample_rng};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_state(p: PhaseId, seed: u64) -> MomentumState {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let a = orbit_sample_rng(p, &mut r).a;
        let mu = (0..p.algebra_dim()).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        MomentumState { phase: p, mu, a }
    }

    fn bstate(v0: f64, w0: Vec3, a0: CMat3, g: &GammaParams) -> MomentumState {
        legendre(PhaseId::BPhase, &ReducedVelocity::PhaseRotation { v: v0, w: w0 }, &a0, g)
    }

    fn short(dz: f64, z1: f64) -> IntegratorConfig {
        IntegratorConfig { dz, z_span: [0.0, z1], points: 0, ..Default::default() }
    }

    #[test]
    fn zero_momentum_is_fixed() {
        let g = GammaParams::default();
        for p in PhaseId::ALL {
            let s = MomentumState { phase: p, mu: vec![0.0; p.algebra_dim()], a: orbit_sample(p, 3).a };
            for m in [Method::LieGroupRk4, Method::AmbientRk4Project] {
                let t = step(&s, 0.1, &g, m).unwrap();
                assert!(t.mu.iter().all(|x| *x == 0.0));
                assert!(mat_dist(&t.a, &s.a) < 1e-14, "{p} {m:?}");
            }
        }
    }

    #[test]
    fn analytic_examples() {
        let g = GammaParams::default();
        let a0 = CMat3::IDENTITY;
        let (_, w, _) = bphase_analytic(0.0, Vec3::e(2), &a0, &g, 3.0);
        assert!((w - Vec3::e(2)).norm() < 1e-15);
        let (_, w, _) = bphase_analytic(0.0, Vec3::e(0), &a0, &g, 3.0);
        assert!((w - Vec3::e(0)).norm() < 1e-15);
        for z in [0.0, 0.7, 4.0] {
            let (_, w, _) = bphase_analytic(0.3, Vec3::new(1.0, 0.0, 1.0), &a0, &g, z);
            let e = Vec3::new((z / 2.0).cos(), -(z / 2.0).sin(), 1.0);
            assert!((w - e).norm() < 1e-14);
        }
    }

    #[test]
    fn analytic_solution_satisfies_equations() {
        let g = GammaParams::new(0.8, 1.4, 0.6).unwrap();
        let w0 = Vec3::new(0.4, -0.9, 1.3);
        let jd = bphase_inertia(&g);
        let a0 = orbit_sample(PhaseId::BPhase, 5).a;
        let (z, h) = (1.7, 1e-5);
        let (v, w, a) = bphase_analytic(0.6, w0, &a0, &g, z);
        let (_, wp, ap) = bphase_analytic(0.6, w0, &a0, &g, z + h);
        let (_, wm, am) = bphase_analytic(0.6, w0, &a0, &g, z - h);
        let da = (ap - am).scale(0.5 / h);
        let rhs = crate::phases::generator(PhaseId::BPhase, &[v, w[0], w[1], w[2]], &a);
        assert!(mat_dist(&da, &rhs) < 1e-8);
        let jw = |w: Vec3| Vec3::new(jd[0] * w[0], jd[1] * w[1], jd[2] * w[2]);
        let dj = (jw(wp) - jw(wm)) * (0.5 / h);
        assert!((dj + w.cross(&jw(w))).norm() < 1e-8);
        // Spatial angular momentum is constant.
        let pi0 = jw(w0);
        let pi = bphase_attitude(w0, &g, z).mul_vec(&jw(w));
        assert!((pi - pi0).norm() < 1e-12);
    }

    #[test]
    fn numeric_matches_analytic_bphase() {
        let g = GammaParams::new(1.1, 0.7, 0.9).unwrap();
        let w0 = Vec3::new(0.8, 0.3, -1.1);
        let a0 = orbit_sample(PhaseId::BPhase, 2).a;
        let tr = simulate(&bstate(0.4, w0, a0, &g), &g, &short(1e-2, 2.0)).unwrap();
        let s = tr.final_state().unwrap();
        let (_, _, a) = bphase_analytic(0.4, w0, &a0, &g, 2.0);
        assert!(mat_dist(&s.a, &a) < 1e-8, "{}", mat_dist(&s.a, &a));
    }

    #[test]
    fn fourth_order_convergence() {
        let g = GammaParams::default();
        let w0 = Vec3::new(1.0, 0.0, 1.0);
        let a0 = CMat3::IDENTITY;
        let (_, _, exact) = bphase_analytic(0.5, w0, &a0, &g, 2.0);
        let err = |dz: f64| {
            let t = simulate(&bstate(0.5, w0, a0, &g), &g, &short(dz, 2.0)).unwrap();
            mat_dist(&t.final_state().unwrap().a, &exact)
        };
        let (e1, e2) = (err(0.2), err(0.1));
        let order = (e1 / e2).log2();
        assert!((3.6..4.4).contains(&order), "{order}");
    }

    #[test]
    fn lie_group_method_stays_on_orbit() {
        let g = GammaParams::new(1.3, 0.6, 0.9).unwrap();
        for p in PhaseId::ALL {
            let tr = simulate(&random_state(p, 4), &g, &short(0.05, 3.0)).unwrap();
            assert!(tr.drift.orbit_residual < 1e-12, "{p}: {}", tr.drift.orbit_residual);
        }
    }

    #[test]
    fn ambient_method_agrees_and_projects() {
        let g = GammaParams::default();
        for p in [PhaseId::APhase2, PhaseId::Omega4] {
            let s = random_state(p, 6);
            let c = short(1e-2, 1.0);
            let a = simulate(&s, &g, &c).unwrap().final_state().unwrap();
            let b = simulate(&s, &g, &IntegratorConfig { method: Method::AmbientRk4Project, ..c })
                .unwrap();
            assert!(b.drift.orbit_residual < 1e-10, "{p}");
            assert!(mat_dist(&a.a, &b.final_state().unwrap().a) < 1e-6, "{p}");
        }
    }

    #[test]
    fn projection_failure_is_reported() {
        let p = PhaseId::APhase2;
        let a0 = base_point(p).a;
        let far = a0.scale(3.0);
        assert!(matches!(project_to_orbit(p, &far, &a0), Err(Error::Projection(_))));
        let near = a0 + CMat3::IDENTITY.scale(1e-4);
        let q = project_to_orbit(p, &near, &a0).unwrap();
        assert!(orbit_residual(p, &q) < 1e-12);
    }

    #[test]
    fn time_reversal() {
        let g = GammaParams::new(0.9, 1.2, 0.7).unwrap();
        for p in PhaseId::ALL {
            let s = random_state(p, 8);
            let fwd = simulate(&s, &g, &short(1e-2, 1.0)).unwrap().final_state().unwrap();
            let back = simulate(&fwd, &g, &IntegratorConfig { z_span: [1.0, 0.0], ..short(1e-2, 1.0) })
                .unwrap()
                .final_state()
                .unwrap();
            let dmu = back.mu.iter().zip(&s.mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dmu < 1e-9 && mat_dist(&back.a, &s.a) < 1e-9, "{p}");
        }
    }

    #[test]
    fn reconstruct_examples() {
        let p = PhaseId::BPhase;
        let g0 = GroupElem::identity(p);
        let zero = vec![vec![0.0; 4]; 5];
        assert!(reconstruct(p, &zero, 0.1, &g0).iter().all(|g| *g == g0));
        let c = vec![0.3, 0.1, -0.2, 0.5];
        let gs = reconstruct(p, &vec![c.clone(); 11], 0.1, &g0);
        let expect = exp_elem(p, &c.iter().map(|x| x * 1.0).collect::<Vec<_>>());
        let a0 = orbit_sample(p, 1).a;
        assert!(mat_dist(&gs[10].apply(&a0), &expect.apply(&a0)) < 1e-12);
    }

    #[test]
    fn reconstruct_matches_bphase_solution() {
        let g = GammaParams::new(1.0, 0.5, 1.5).unwrap();
        let w0 = Vec3::new(0.7, -0.4, 0.9);
        let a0 = orbit_sample(PhaseId::BPhase, 9).a;
        let dz = 1e-2;
        let xi: Vec<Vec<f64>> = (0..=300)
            .map(|i| {
                let (v, w, _) = bphase_analytic(0.3, w0, &a0, &g, i as f64 * dz);
                vec![v, w[0], w[1], w[2]]
            })
            .collect();
        let gs = reconstruct(PhaseId::BPhase, &xi, dz, &GroupElem::identity(PhaseId::BPhase));
        let (_, _, a) = bphase_analytic(0.3, w0, &a0, &g, 3.0);
        assert!(mat_dist(&gs[300].apply(&a0), &a) < 1e-8);
    }

    #[test]
    fn csv_and_json_roundtrip() {
        let g = GammaParams::new(1.0, 2.0, 0.5).unwrap();
        for p in [PhaseId::APhase1, PhaseId::Omega1] {
            let c = IntegratorConfig { dz: 0.05, z_span: [0.0, 0.5], points: 5, ..Default::default() };
            let t = simulate(&random_state(p, 2), &g, &c).unwrap();
            assert_eq!(t.samples.len(), 6);
            let csv = t.to_csv();
            let back = Trajectory::from_csv(&csv, p, g, c).unwrap();
            assert_eq!(back.to_csv(), csv);
            let js = t.to_json();
            let back = Trajectory::from_json(&js).unwrap();
            assert_eq!(back, t);
            assert_eq!(back.to_json(), js);
        }
    }

    #[test]
    fn inverse_legendre_reproduces_velocity_along_run() {
        let g = GammaParams::default();
        let w0 = Vec3::new(1.0, 0.0, 1.0);
        let s = bstate(0.0, w0, CMat3::IDENTITY, &g);
        let t = simulate(&s, &g, &short(1e-2, 1.0)).unwrap();
        let xi = inverse_legendre(&t.final_state().unwrap(), &g).unwrap().coords();
        assert!((xi[1] - 0.5f64.cos()).abs() < 1e-10 && (xi[2] + 0.5f64.sin()).abs() < 1e-10);
    }
}
