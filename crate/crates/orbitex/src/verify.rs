//! Numerical checks of the structural claims: involution and independence
//! of integrals, Poisson kernel dimensions, analytic derivatives,
//! conservation, the B-phase closed form and equivalence with a
//! constrained Euler-Lagrange formulation.
//!
//! Every check draws its random states from a ChaCha8 stream seeded by
//! [`VerifyConfig::seed`], so reports are reproducible.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::algebra::{pair, CMat3, GammaParams, Vec3};
use crate::conserved::{integral_set, jm, Quantity, QuantityKind};
use crate::dynamics::{
    basis_generators, bracket_of, fd_gradient, hamiltonian_vector, infgen, lagrangian, lagrangian_from_generator,
    legendre, var_derivatives, Gradient, MatrixCoord, MomentumCoord, MomentumState, Observable,
    ReducedVelocity,
};
use crate::integrate::{bphase_analytic, mat_dist, simulate, IntegratorConfig, Method};
use crate::phases::{exp_act, generator, orbit_sample_rng, potential_u, PhaseId, PotentialParams};
use crate::{Error, Result};

/// Relative singular-value cutoff for numerical rank.
pub const RANK_TOL: f64 = 1e-8;

/// Settings shared by the sampling checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    pub gamma: GammaParams,
    pub n_points: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { gamma: GammaParams::default(), n_points: 100, seed: 1, tol: 1e-8 }
    }
}

/// Outcome of one check on one phase.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub phase: String,
    pub seed: u64,
    pub n_points: usize,
    pub max_residual: f64,
    /// Rank (or kernel dimension for the kernel check) -> number of points.
    pub rank_histogram: BTreeMap<usize, usize>,
    pub pass: bool,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    /// Rank of the Hamiltonian vector fields, for the independence check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_rank_histogram: Option<BTreeMap<usize, usize>>,
}

impl VerificationReport {
    fn new(check: &str, phase: PhaseId, cfg: &VerifyConfig, n_points: usize, tolerance: f64) -> Self {
        VerificationReport {
            check: check.into(),
            phase: phase.name().into(),
            seed: cfg.seed,
            n_points,
            max_residual: 0.0,
            rank_histogram: BTreeMap::new(),
            pass: false,
            tolerance,
            flags: vec![],
            field_rank_histogram: None,
        }
    }

    fn residual(&mut self, r: f64) {
        self.max_residual = self.max_residual.max(if r.is_nan() { f64::INFINITY } else { r });
    }

    fn finish_residual(mut self) -> Self {
        self.pass = self.max_residual <= self.tolerance;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Singular values of a dense matrix, largest first.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let mut s = f.singular_values().expect("svd converges");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above [`RANK_TOL`] times the largest.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|x| **x > RANK_TOL * top).count()
}

fn normals(r: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| r.sample(StandardNormal)).collect()
}

/// Random state: normal momenta at a random orbit point.
pub fn random_state<R: Rng + ?Sized>(phase: PhaseId, rng: &mut R) -> MomentumState {
    let a = orbit_sample_rng(phase, rng).a;
    let mu = (0..phase.algebra_dim()).map(|_| rng.sample(StandardNormal)).collect();
    MomentumState { phase, mu, a }
}

fn random_gamma(r: &mut ChaCha8Rng) -> GammaParams {
    GammaParams::new(r.random_range(0.5..2.0), r.random_range(0.5..2.0), r.random_range(0.5..2.0))
        .expect("positive")
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Bracket residual scaled by the gradient sizes and the momentum norm.
pub fn involution_residual(s: &MomentumState, f: &Gradient, g: &Gradient) -> f64 {
    let b = bracket_of(s.phase, &s.mu, f, g);
    b.abs() / (1.0 + f.norm() * g.norm() * (1.0 + norm(&s.mu)))
}

/// Pairwise brackets of the integral set at random states.
pub fn check_involution(phase: PhaseId, cfg: &VerifyConfig) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let set = integral_set(phase);
    let mut rep = VerificationReport::new("involution", phase, cfg, cfg.n_points, cfg.tol);
    rep.flags = set.flags().iter().map(|s| s.to_string()).collect();
    for _ in 0..cfg.n_points {
        let s = random_state(phase, &mut rng);
        let grads: Vec<Gradient> = set.quantities.iter().map(|q| Quantity::new(*q, cfg.gamma).gradient(&s)).collect();
        for i in 0..grads.len() {
            for j in i + 1..grads.len() {
                rep.residual(involution_residual(&s, &grads[i], &grads[j]));
            }
        }
    }
    rep.finish_residual()
}

fn vector_of_field(phase: PhaseId, s: &MomentumState, g: &Gradient) -> Vec<f64> {
    let (dmu, da) = hamiltonian_vector(phase, &s.mu, &s.a, g);
    let mut v = dmu;
    v.extend_from_slice(&da.to_real18());
    v
}

/// Rank of the differentials `(df/dmu, tau_f)` and of the Hamiltonian
/// vector fields of the integral set. Passes when both ranks are full at
/// no fewer than 99% of the points. `max_residual` is the fraction of
/// deficient points.
pub fn check_independence(phase: PhaseId, cfg: &VerifyConfig) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let set = integral_set(phase);
    let n = set.quantities.len();
    let mut rep = VerificationReport::new("independence", phase, cfg, cfg.n_points, 0.01);
    rep.flags = set.flags().iter().map(|s| s.to_string()).collect();
    let mut fields = BTreeMap::new();
    let mut deficient = 0usize;
    for _ in 0..cfg.n_points {
        let s = random_state(phase, &mut rng);
        let grads: Vec<Gradient> = set.quantities.iter().map(|q| Quantity::new(*q, cfg.gamma).gradient(&s)).collect();
        let k = phase.algebra_dim();
        let d = DMatrix::from_fn(n, 2 * k, |i, j| if j < k { grads[i].dmu[j] } else { grads[i].tau[j - k] });
        let vf: Vec<Vec<f64>> = grads.iter().map(|g| vector_of_field(phase, &s, g)).collect();
        let f = DMatrix::from_fn(n, k + 18, |i, j| vf[i][j]);
        let (rd, rf) = (numerical_rank(&d), numerical_rank(&f));
        *rep.rank_histogram.entry(rd).or_insert(0) += 1;
        *fields.entry(rf).or_insert(0) += 1;
        if rd < n || rf < n {
            deficient += 1;
        }
    }
    rep.field_rank_histogram = Some(fields);
    rep.max_residual = deficient as f64 / cfg.n_points.max(1) as f64;
    rep.pass = rep.max_residual <= rep.tolerance;
    rep
}

/// Expected kernel dimension of the Poisson tensor on the reduced space.
pub fn expected_kernel(phase: PhaseId) -> usize {
    match phase {
        PhaseId::APhase1 | PhaseId::Omega1 => 1,
        _ => 0,
    }
}

/// Poisson tensor in the coordinates `(mu, Re A, Im A)`.
pub fn poisson_tensor(s: &MomentumState) -> DMatrix<f64> {
    let k = s.phase.algebra_dim();
    let grads: Vec<Gradient> = (0..k)
        .map(|i| MomentumCoord(i).gradient(s))
        .chain((0..18).map(|i| MatrixCoord(i).gradient(s)))
        .collect();
    DMatrix::from_fn(k + 18, k + 18, |i, j| bracket_of(s.phase, &s.mu, &grads[i], &grads[j]))
}

/// Kernel dimension of the Poisson tensor restricted to the reduced space,
/// whose dimension is `k + rank{E_i(A)}`.
pub fn kernel_dimension(s: &MomentumState) -> usize {
    let gens = basis_generators(s.phase, &s.a);
    let t = DMatrix::from_fn(18, gens.len(), |r, c| gens[c].to_real18()[r]);
    let dim = s.phase.algebra_dim() + numerical_rank(&t);
    dim - numerical_rank(&poisson_tensor(s))
}

pub fn check_kernel_dimension(phase: PhaseId, cfg: &VerifyConfig) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = VerificationReport::new("kernel", phase, cfg, cfg.n_points, 0.0);
    let want = expected_kernel(phase);
    let mut wrong = 0usize;
    for _ in 0..cfg.n_points {
        let s = random_state(phase, &mut rng);
        let kd = kernel_dimension(&s);
        *rep.rank_histogram.entry(kd).or_insert(0) += 1;
        if kd != want {
            wrong += 1;
        }
    }
    rep.max_residual = wrong as f64;
    rep.pass = wrong == 0;
    rep
}

fn rel_err(a: &[f64], f: &[f64]) -> f64 {
    let d = a.iter().zip(f).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let s = f.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    d / s.max(1.0)
}

/// Closed-form variational derivatives against central differences:
/// `dl/dxi` directly and `dl/dA` through its pairing with the orbit
/// tangents `E_i(A)`. Hamiltonian and integral gradients are included.
pub fn check_gradients(phase: PhaseId, cfg: &VerifyConfig) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tol = 1e-6;
    let mut rep = VerificationReport::new("gradients", phase, cfg, cfg.n_points, tol);
    let k = phase.algebra_dim();
    let h = 1e-5;
    for _ in 0..cfg.n_points {
        let g = random_gamma(&mut rng);
        let a = orbit_sample_rng(phase, &mut rng).a;
        let x = normals(&mut rng, k);
        let xi = ReducedVelocity::from_coords(phase, &x);
        let d = var_derivatives(phase, &xi, &a, &g);
        let l = |x: &[f64], a: &CMat3| lagrangian(phase, &ReducedVelocity::from_coords(phase, x), a, &g);
        let mut fd_xi = vec![0.0; k];
        let mut fd_a = vec![0.0; k];
        let mut an_a = vec![0.0; k];
        let gens = basis_generators(phase, &a);
        for i in 0..k {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += h;
            xm[i] -= h;
            fd_xi[i] = (l(&xp, &a) - l(&xm, &a)) / (2.0 * h);
            let mut e = vec![0.0; k];
            e[i] = h;
            let ap = exp_act(phase, &e, &a);
            e[i] = -h;
            let am = exp_act(phase, &e, &a);
            fd_a[i] = (l(&x, &ap) - l(&x, &am)) / (2.0 * h);
            an_a[i] = pair(&d.dl_da, &gens[i]);
        }
        rep.residual(rel_err(&d.dl_dxi, &fd_xi));
        rep.residual(rel_err(&an_a, &fd_a));
        let s = legendre(phase, &xi, &a, &g);
        let mut kinds = vec![QuantityKind::H];
        kinds.extend(integral_set(phase).quantities);
        for q in kinds {
            let obs = Quantity::new(q, g);
            let an = obs.gradient(&s);
            let fd = fd_gradient(&obs, &s, h);
            rep.residual(rel_err(&[an.dmu.clone(), an.tau.clone()].concat(), &[fd.dmu, fd.tau].concat()));
        }
    }
    rep.finish_residual()
}

/// `U` at orbit samples against its value at the base point.
pub fn check_potential_invariance(phase: PhaseId, cfg: &VerifyConfig, p: &PotentialParams) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = VerificationReport::new("potential", phase, cfg, cfg.n_points, 1e-9);
    let u0 = potential_u(&crate::phases::base_point(phase).a, p);
    let scale = if u0 != 0.0 { u0.abs() } else { 1.0 };
    for _ in 0..cfg.n_points {
        let a = orbit_sample_rng(phase, &mut rng).a;
        rep.residual((potential_u(&a, p) - u0).abs() / scale);
    }
    rep.finish_residual()
}

/// Closed-form Lagrangian against `<<xi_M(A), xi_M(A)>>`.
pub fn check_lagrangian_identity(phase: PhaseId, cfg: &VerifyConfig) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = VerificationReport::new("lagrangian", phase, cfg, cfg.n_points, 1e-12);
    for _ in 0..cfg.n_points {
        let g = random_gamma(&mut rng);
        let a = orbit_sample_rng(phase, &mut rng).a;
        let xi = ReducedVelocity::from_coords(phase, &normals(&mut rng, phase.algebra_dim()));
        let l1 = lagrangian(phase, &xi, &a, &g);
        let l2 = lagrangian_from_generator(phase, &xi, &a, &g);
        rep.residual((l1 - l2).abs() / l2.abs().max(1.0));
    }
    rep.finish_residual()
}

/// The two forms of `jm` through the Legendre map; for phases with a
/// scalar phase momentum, also `jm = p`.
pub fn check_momentum_identity(phase: PhaseId, cfg: &VerifyConfig) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = VerificationReport::new("jm-identity", phase, cfg, cfg.n_points, 1e-10);
    for _ in 0..cfg.n_points {
        let g = random_gamma(&mut rng);
        let a = orbit_sample_rng(phase, &mut rng).a;
        let xi = ReducedVelocity::from_coords(phase, &normals(&mut rng, phase.algebra_dim()));
        let s = legendre(phase, &xi, &a, &g);
        let t = crate::conserved::jm_tangent(&a, &infgen(phase, &xi, &a), &g);
        let m = jm(&s);
        let scale = t.abs().max(1.0);
        rep.residual((m - t).abs() / scale);
        if let Some(p) = s.p() {
            rep.residual((m - p).abs() / scale);
        }
    }
    rep.finish_residual()
}

/// Conservation of the integral set along a lie-group-rk4 run from each
/// of `cfg.n_points` random states. The A-phase first regime also checks
/// the Casimir against `1e-10`.
pub fn check_conservation(phase: PhaseId, cfg: &VerifyConfig, run: &IntegratorConfig) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = VerificationReport::new("conservation", phase, cfg, cfg.n_points, cfg.tol);
    let set = integral_set(phase);
    rep.flags = set.flags().iter().map(|s| s.to_string()).collect();
    let names = set.names();
    let run = IntegratorConfig { points: 1, ..*run };
    let mut casimir_ok = true;
    for _ in 0..cfg.n_points {
        let s = random_state(phase, &mut rng);
        let t = simulate(&s, &cfg.gamma, &run)?;
        for (name, d) in t.drift.names.iter().zip(&t.drift.max_relative) {
            if names.contains(name) {
                rep.residual(*d);
            }
            if name == "casimir" && *d > 1e-10 {
                casimir_ok = false;
            }
        }
    }
    rep.pass = rep.max_residual <= rep.tolerance && casimir_ok;
    if !casimir_ok {
        rep.flags.push("casimir-drift".into());
    }
    Ok(rep)
}

/// B-phase numeric solution against the closed form for random
/// `(gamma, v0, w0)`. The residual is the sup over samples of the
/// largest entrywise deviation in `A` and in the velocities.
pub fn check_bphase_closed_form(cfg: &VerifyConfig, run: &IntegratorConfig) -> Result<VerificationReport> {
    let phase = PhaseId::BPhase;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = VerificationReport::new("bphase-closed-form", phase, cfg, cfg.n_points, cfg.tol);
    for _ in 0..cfg.n_points {
        let g = random_gamma(&mut rng);
        let v0: f64 = rng.sample(StandardNormal);
        let w0 = Vec3(std::array::from_fn(|_| rng.sample(StandardNormal)));
        let a0 = orbit_sample_rng(phase, &mut rng).a;
        rep.residual(bphase_error(v0, w0, &a0, &g, run)?);
    }
    Ok(rep.finish_residual())
}

fn bphase_error(v0: f64, w0: Vec3, a0: &CMat3, g: &GammaParams, run: &IntegratorConfig) -> Result<f64> {
    let phase = PhaseId::BPhase;
    let s = legendre(phase, &ReducedVelocity::PhaseRotation { v: v0, w: w0 }, a0, g);
    let t = simulate(&s, g, run)?;
    let mut err: f64 = 0.0;
    for (i, smp) in t.samples.iter().enumerate() {
        let st = t.state(i)?;
        let (v, w, a) = bphase_analytic(v0, w0, a0, g, smp.z);
        let xi = crate::dynamics::inverse_legendre(&st, g)?.coords();
        let dv = [xi[0] - v, xi[1] - w[0], xi[2] - w[1], xi[3] - w[2]].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        err = err.max(mat_dist(&st.a, &a)).max(dv);
    }
    Ok(err)
}

/// Observed convergence order of the B-phase endpoint error for steps
/// `dz, dz/2, dz/4`: `log2(e(dz/2) / e(dz/4))`.
pub fn bphase_convergence_order(method: Method, dz: f64, z_end: f64) -> Result<f64> {
    let g = GammaParams::new(1.0, 0.8, 1.3)?;
    let (v0, w0) = (0.7, Vec3::new(0.9, -0.4, 1.1));
    let a0 = CMat3::IDENTITY;
    let (_, _, exact) = bphase_analytic(v0, w0, &a0, &g, z_end);
    let s = legendre(PhaseId::BPhase, &ReducedVelocity::PhaseRotation { v: v0, w: w0 }, &a0, &g);
    let errs = [dz, dz / 2.0, dz / 4.0]
        .iter()
        .map(|&h| {
            let run = IntegratorConfig { method, dz: h, z_span: [0.0, z_end], tol: 1.0, points: 1 };
            Ok(mat_dist(&simulate(&s, &g, &run)?.final_state()?.a, &exact))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((errs[1] / errs[2]).log2())
}

/// Orbit constraints `F(A) = 0` used by the Euler-Lagrange oracle.
pub fn constraints(phase: PhaseId, a: &CMat3) -> Option<Vec<f64>> {
    let mut out = Vec::new();
    match phase {
        PhaseId::BPhase => {
            let p = a.adjoint() * *a;
            let q = a.transpose() * *a;
            for i in 0..3 {
                for j in i..3 {
                    let v = p.get(i, j);
                    out.push(v.re - if i == j { 1.0 } else { 0.0 });
                    if i != j {
                        out.push(v.im);
                        out.push(q.get(i, j).re);
                        out.push(q.get(i, j).im);
                    }
                }
            }
            for i in 0..2 {
                let d = q.get(i, i) - q.get(i + 1, i + 1);
                out.push(d.re);
                out.push(d.im);
            }
        }
        PhaseId::APhase2 => {
            let aa = *a * a.adjoint();
            out.extend((aa * *a - a.scale(2.0)).to_real18());
            out.extend(aa.im.0.iter().flatten());
            out.extend((*a * a.transpose()).to_real18());
            out.extend((*a * *a).to_real18());
        }
        _ => return None,
    }
    Some(out)
}

/// Exact five-point stencils for polynomials of degree up to four (first
/// derivative) and five (second derivative).
fn stencil<F: Fn(f64) -> Vec<f64>>(f: F, h: f64) -> (Vec<f64>, Vec<f64>) {
    let (p2, p1, p0, m1, m2) = (f(2.0 * h), f(h), f(0.0), f(-h), f(-2.0 * h));
    let d1 = (0..p0.len()).map(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h)).collect();
    let d2 = (0..p0.len())
        .map(|i| (-p2[i] + 16.0 * p1[i] - 30.0 * p0[i] + 16.0 * m1[i] - m2[i]) / (12.0 * h * h))
        .collect();
    (d1, d2)
}

/// Acceleration of the constrained geodesic flow of `<<dA, dA>>` on the
/// constraint set: `2 Gamma A'' = J^T lambda` with `J A'' = -D^2F[A', A']`.
fn el_acceleration(phase: PhaseId, a: &[f64], da: &[f64], g: &GammaParams) -> Result<Vec<f64>> {
    let at = |x: &[f64]| constraints(phase, &CMat3::from_real18(x)).expect("phase has constraints");
    let shift = |dir: &[f64], t: f64| -> Vec<f64> { a.iter().zip(dir).map(|(p, q)| p + t * q).collect() };
    let h = 0.5;
    let (_, d2) = stencil(|t| at(&shift(da, t)), h);
    let m = d2.len();
    let d = g.diag();
    // Weight per real coordinate: column j of A carries Gamma_jj.
    let w: Vec<f64> = (0..18).map(|c| 1.0 / (2.0 * d[c % 3])).collect();
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let mut b = DMatrix::zeros(m, 18);
    for c in 0..18 {
        let mut e = vec![0.0; 18];
        e[c] = 1.0;
        let (d1, _) = stencil(|t| at(&shift(&e, t)), h);
        for r in 0..m {
            b[(r, c)] = d1[r] * sw[c];
        }
    }
    // A'' = -W^{1/2} (B^T B)^+ B^T D2 with B = J W^{1/2}.
    let btb = b.transpose() * &b;
    let rhs = b.transpose() * nalgebra::DVector::from_vec(d2);
    let eig = SymmetricEigen::new(btb);
    let cut = 1e-10 * eig.eigenvalues.amax();
    let mut x = nalgebra::DVector::zeros(18);
    for c in 0..18 {
        let lam = eig.eigenvalues[c];
        if lam > cut {
            let col = eig.eigenvectors.column(c);
            x += col * (col.dot(&rhs) / lam);
        }
    }
    let out: Vec<f64> = (0..18).map(|c| -sw[c] * x[c]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Constraint(f64::NAN));
    }
    Ok(out)
}

/// Integrate the constrained Euler-Lagrange oracle with classical RK4 and
/// return `A` at every step.
pub fn el_trajectory(phase: PhaseId, a0: &CMat3, da0: &CMat3, g: &GammaParams, dz: f64, n: usize) -> Result<Vec<CMat3>> {
    let mut y: Vec<f64> = a0.to_real18().iter().chain(da0.to_real18().iter()).copied().collect();
    let rhs = |y: &[f64], z: f64| -> Result<Vec<f64>> {
        let acc = el_acceleration(phase, &y[..18], &y[18..], g).map_err(|_| Error::Constraint(z))?;
        Ok(y[18..].iter().copied().chain(acc).collect())
    };
    let mut out = vec![*a0];
    for i in 0..n {
        let z = i as f64 * dz;
        let k1 = rhs(&y, z)?;
        let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * dz * b).collect();
        let k2 = rhs(&y2, z)?;
        let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * dz * b).collect();
        let k3 = rhs(&y3, z)?;
        let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + dz * b).collect();
        let k4 = rhs(&y4, z)?;
        for j in 0..36 {
            y[j] += dz / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push(CMat3::from_real18(&y[..18]));
    }
    Ok(out)
}

/// Euler-Poincare solution against the constrained Euler-Lagrange oracle
/// from matched data `(A0, E_xi0(A0))` for `cfg.n_points` random initial
/// conditions. Only phases with an implemented constraint set are supported.
pub fn check_ep_el_equivalence(phase: PhaseId, cfg: &VerifyConfig, z_end: f64, dz: f64) -> Result<VerificationReport> {
    if constraints(phase, &CMat3::ZERO).is_none() {
        return Err(Error::StateMismatch(phase.name()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = VerificationReport::new("ep-el", phase, cfg, cfg.n_points, 1e-6);
    let n = (z_end / dz).round() as usize;
    for _ in 0..cfg.n_points {
        let a0 = orbit_sample_rng(phase, &mut rng).a;
        let x: Vec<f64> = normals(&mut rng, phase.algebra_dim()).iter().map(|v| 0.5 * v).collect();
        let xi = ReducedVelocity::from_coords(phase, &x);
        let s = legendre(phase, &xi, &a0, &cfg.gamma);
        let run = IntegratorConfig { method: Method::LieGroupRk4, dz, z_span: [0.0, n as f64 * dz], tol: 1.0, points: 0 };
        let ep = simulate(&s, &cfg.gamma, &run)?;
        let el = el_trajectory(phase, &a0, &generator(phase, &x, &a0), &cfg.gamma, dz, n)?;
        for (i, a) in el.iter().enumerate() {
            rep.residual(mat_dist(&ep.state(i)?.a, a));
        }
    }
    Ok(rep.finish_residual())
}

/// Checks run by default for a phase.
pub fn default_suite(
    phase: PhaseId,
    cfg: &VerifyConfig,
    run: &IntegratorConfig,
    potential: &PotentialParams,
) -> Result<Vec<VerificationReport>> {
    let mut out = vec![
        check_involution(phase, cfg),
        check_independence(phase, cfg),
        check_kernel_dimension(phase, cfg),
        check_gradients(phase, cfg),
        check_lagrangian_identity(phase, cfg),
        check_momentum_identity(phase, cfg),
        check_potential_invariance(phase, cfg, potential),
    ];
    let few = VerifyConfig { n_points: 1, ..*cfg };
    out.push(check_conservation(phase, &few, run)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phases::base_point;

    fn cfg(n: usize) -> VerifyConfig {
        VerifyConfig { n_points: n, ..Default::default() }
    }

    #[test]
    fn singular_values_are_exact_on_tall_matrices() {
        // Tall generator matrix with a repeated singular value.
        let mut r = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = orbit_sample_rng(PhaseId::Omega8, &mut r).a;
            let gens = basis_generators(PhaseId::Omega8, &a);
            let m = DMatrix::from_fn(18, 3, |i, j| gens[j].to_real18()[i]);
            let s = singular_values(&m);
            let g = m.transpose() * &m;
            let ev = SymmetricEigen::new(g).eigenvalues;
            let mut e: Vec<f64> = ev.iter().map(|x| x.sqrt()).collect();
            e.sort_by(|a, b| b.total_cmp(a));
            for (x, y) in s.iter().zip(&e) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_dimensions() {
        for p in PhaseId::ALL {
            let rep = check_kernel_dimension(p, &cfg(5));
            assert!(rep.pass, "{p}: {:?}", rep.rank_histogram);
        }
    }

    #[test]
    fn involution_and_independence() {
        for p in PhaseId::ALL {
            let c = cfg(10);
            let inv = check_involution(p, &c);
            assert!(inv.pass, "{p}: {}", inv.max_residual);
            let ind = check_independence(p, &c);
            assert!(ind.pass, "{p}: {:?} {:?}", ind.rank_histogram, ind.field_rank_histogram);
        }
        assert_eq!(check_involution(PhaseId::Omega4, &cfg(1)).flags, vec!["not-known-complete"]);
    }

    #[test]
    fn degenerate_state_loses_rank() {
        // Zero momentum: every integral except the Hamiltonian-type ones has a vanishing differential.
        let p = PhaseId::APhase2;
        let s = MomentumState { phase: p, mu: vec![0.0; 3], a: base_point(p).a };
        let g = GammaParams::default();
        let grads: Vec<Gradient> = integral_set(p).quantities.iter().map(|q| Quantity::new(*q, g).gradient(&s)).collect();
        let d = DMatrix::from_fn(3, 6, |i, j| if j < 3 { grads[i].dmu[j] } else { grads[i].tau[j - 3] });
        assert!(numerical_rank(&d) < 3);
    }

    #[test]
    fn gradient_and_identity_checks() {
        for p in PhaseId::ALL {
            let c = cfg(5);
            assert!(check_gradients(p, &c).pass, "{p}");
            assert!(check_lagrangian_identity(p, &c).pass, "{p}");
            assert!(check_momentum_identity(p, &c).pass, "{p}");
            assert!(check_potential_invariance(p, &cfg(50), &PotentialParams::default()).pass, "{p}");
        }
    }

    #[test]
    fn el_oracle_constraints_have_expected_rank() {
        let g = GammaParams::default();
        for (p, want) in [(PhaseId::BPhase, 14), (PhaseId::APhase2, 15)] {
            let a = orbit_sample_rng(p, &mut ChaCha8Rng::seed_from_u64(2)).a;
            assert!(constraints(p, &a).unwrap().iter().all(|x| x.abs() < 1e-12));
            let x = a.to_real18();
            let m = constraints(p, &a).unwrap().len();
            let mut j = DMatrix::zeros(m, 18);
            for c in 0..18 {
                let mut e = vec![0.0; 18];
                e[c] = 1.0;
                let (d1, _) = stencil(|t| constraints(p, &CMat3::from_real18(&x.iter().zip(&e).map(|(a, b)| a + t * b).collect::<Vec<_>>())).unwrap(), 0.5);
                for r in 0..m {
                    j[(r, c)] = d1[r];
                }
            }
            assert_eq!(numerical_rank(&j), want, "{p}");
            // Orbit tangents lie in the kernel of the constraint Jacobian.
            for e in basis_generators(p, &a) {
                let v = &j * nalgebra::DVector::from_column_slice(&e.to_real18());
                assert!(v.amax() < 1e-10);
            }
            let _ = g;
        }
    }

    #[test]
    fn ep_el_zero_velocity_and_short_run() {
        let c = VerifyConfig { n_points: 1, ..Default::default() };
        for p in [PhaseId::APhase2, PhaseId::BPhase] {
            let a0 = base_point(p).a;
            let el = el_trajectory(p, &a0, &CMat3::ZERO, &c.gamma, 0.01, 10).unwrap();
            assert!(el.iter().all(|a| mat_dist(a, &a0) == 0.0));
            let rep = check_ep_el_equivalence(p, &c, 0.5, 5e-3).unwrap();
            assert!(rep.pass, "{p}: {}", rep.max_residual);
        }
        assert!(check_ep_el_equivalence(PhaseId::Omega6, &c, 0.1, 0.01).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let c = cfg(3);
        assert_eq!(check_involution(PhaseId::APhase1, &c), check_involution(PhaseId::APhase1, &c));
        let js = check_independence(PhaseId::APhase1, &c).to_json();
        let v: serde_json::Value = serde_json::from_str(&js).unwrap();
        for key in ["check", "phase", "seed", "n_points", "max_residual", "rank_histogram", "pass"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn convergence_order_near_four() {
        let o = bphase_convergence_order(Method::LieGroupRk4, 0.1, 2.0).unwrap();
        assert!((3.8..=4.2).contains(&o), "{o}");
    }
}
