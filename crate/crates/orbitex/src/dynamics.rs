//! Reduced Lagrangians, Legendre transform, Hamiltonians, Lie-Poisson
//! brackets and vector fields.
//!
//! All phases share one structure. With generators `E_xi(A)` from
//! [`phases::generator`], the reduced Lagrangian is
//! `l(xi, A) = <<E_xi(A), E_xi(A)>> = xi^T G(A) xi`, the momentum is
//! `mu = 2 G(A) xi` and the Hamiltonian is `h = mu^T G(A)^+ mu / 4`, with
//! the pseudo-inverse taken on the complement of the isotropy algebra.
//!
//! Functional derivatives with respect to `A` enter the bracket only
//! through their pairing with generators, `tau_i = <df/dA, E_i(A)>`. A
//! [`Gradient`] therefore stores `(df/dmu, tau)`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::algebra::{gpair, hat, pair, vee, CMat3, GammaParams, Mat3, Vec3};
use crate::phases::{self, bracket, generator, GroupElem, PhaseId};
use crate::{Error, Result};

/// Condition number above which the velocity map is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Reduced velocity `xi = dg/dz g^-1` in phase-specific form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReducedVelocity {
    /// `(v, w)` of the A-phase first regime.
    Chiral { v: Vec3, w: Vec3 },
    /// `w` of the A-phase second regime, Omega6 and Omega8.
    Rotation { w: Vec3 },
    /// `(v, w)` with scalar `v` for the B-phase, Omega1 and Omega4.
    PhaseRotation { v: f64, w: Vec3 },
}

impl ReducedVelocity {
    pub fn zero(phase: PhaseId) -> Self {
        Self::from_coords(phase, &vec![0.0; phase.algebra_dim()])
    }

    pub fn from_coords(phase: PhaseId, x: &[f64]) -> Self {
        match phase {
            PhaseId::APhase1 => ReducedVelocity::Chiral {
                v: Vec3([x[0], x[1], x[2]]),
                w: Vec3([x[3], x[4], x[5]]),
            },
            PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8 => {
                ReducedVelocity::Rotation { w: Vec3([x[0], x[1], x[2]]) }
            }
            _ => ReducedVelocity::PhaseRotation { v: x[0], w: Vec3([x[1], x[2], x[3]]) },
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        match self {
            ReducedVelocity::Chiral { v, w } => [v.0, w.0].concat(),
            ReducedVelocity::Rotation { w } => w.0.to_vec(),
            ReducedVelocity::PhaseRotation { v, w } => vec![*v, w[0], w[1], w[2]],
        }
    }

    pub fn fits(&self, phase: PhaseId) -> bool {
        matches!(
            (self, phase),
            (ReducedVelocity::Chiral { .. }, PhaseId::APhase1)
                | (
                    ReducedVelocity::Rotation { .. },
                    PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8
                )
                | (
                    ReducedVelocity::PhaseRotation { .. },
                    PhaseId::BPhase | PhaseId::Omega1 | PhaseId::Omega4
                )
        )
    }
}

/// Reduced momenta together with the orbit point.
///
/// `mu` is ordered as `(m, n)`, `m` or `(p, m)` following
/// [`PhaseId::momentum_names`].
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumState {
    pub phase: PhaseId,
    pub mu: Vec<f64>,
    pub a: CMat3,
}

impl MomentumState {
    pub fn new(phase: PhaseId, mu: Vec<f64>, a: CMat3) -> Result<Self> {
        if mu.len() != phase.algebra_dim() || mu.iter().any(|x| !x.is_finite()) {
            return Err(Error::StateMismatch(phase.name()));
        }
        Ok(MomentumState { phase, mu, a })
    }

    pub fn chiral(m: Vec3, n: Vec3, a: CMat3) -> Self {
        MomentumState { phase: PhaseId::APhase1, mu: [m.0, n.0].concat(), a }
    }

    /// The `m` component (left momentum for the A-phase first regime).
    pub fn m(&self) -> Vec3 {
        match self.phase {
            PhaseId::APhase1 | PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8 => {
                Vec3([self.mu[0], self.mu[1], self.mu[2]])
            }
            _ => Vec3([self.mu[1], self.mu[2], self.mu[3]]),
        }
    }

    pub fn n(&self) -> Option<Vec3> {
        (self.phase == PhaseId::APhase1).then(|| Vec3([self.mu[3], self.mu[4], self.mu[5]]))
    }

    pub fn p(&self) -> Option<f64> {
        matches!(self.phase, PhaseId::BPhase | PhaseId::Omega1 | PhaseId::Omega4).then(|| self.mu[0])
    }
}

/// Inertia-type tensors built from the weighted pairing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InertiaTensors {
    /// `I_ab = <<A e_a, A e_b>>`.
    pub i: Mat3,
    /// `chi_ab = <<e_a A, e_b A>>`.
    pub chi: Mat3,
    /// `Sigma_ab = <<e_a A, A e_b>>`.
    pub sigma: Mat3,
    /// `J_ab = <<[A, e_a], [A, e_b]>>`.
    pub j: Mat3,
}

pub fn tensors(a: &CMat3, g: &GammaParams) -> InertiaTensors {
    let eh: [Mat3; 3] = std::array::from_fn(|k| hat(&Vec3::e(k)));
    let right: [CMat3; 3] = std::array::from_fn(|k| a.rmul_real(&eh[k]));
    let left: [CMat3; 3] = std::array::from_fn(|k| a.lmul_real(&eh[k]));
    let comm: [CMat3; 3] = std::array::from_fn(|k| right[k] - left[k]);
    let mut t = InertiaTensors { i: Mat3::ZERO, chi: Mat3::ZERO, sigma: Mat3::ZERO, j: Mat3::ZERO };
    for x in 0..3 {
        for y in 0..3 {
            t.i.0[x][y] = gpair(&right[x], &right[y], g);
            t.chi.0[x][y] = gpair(&left[x], &left[y], g);
            t.sigma.0[x][y] = gpair(&left[x], &right[y], g);
            t.j.0[x][y] = gpair(&comm[x], &comm[y], g);
        }
    }
    t
}

/// Generators of the coordinate basis at `a`.
pub fn basis_generators(phase: PhaseId, a: &CMat3) -> Vec<CMat3> {
    let k = phase.algebra_dim();
    (0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            generator(phase, &e, a)
        })
        .collect()
}

/// Minimum-norm `x` minimising `|E_x(A) - target|`, via the normal
/// equations. Directions with eigenvalue below `1e-9` of the largest are
/// treated as kernel.
pub fn generator_lstsq(phase: PhaseId, a: &CMat3, target: &CMat3) -> Vec<f64> {
    let gens = basis_generators(phase, a);
    let k = gens.len();
    let normal = DMatrix::from_fn(k, k, |i, j| pair(&gens[i], &gens[j]));
    let b: Vec<f64> = gens.iter().map(|e| pair(e, target)).collect();
    let eig = SymmetricEigen::new(normal);
    let cut = 1e-9 * eig.eigenvalues.amax();
    let mut x = vec![0.0; k];
    for c in 0..k {
        let lam = eig.eigenvalues[c];
        if lam > cut {
            let col = eig.eigenvectors.column(c);
            let proj: f64 = (0..k).map(|r| col[r] * b[r]).sum::<f64>() / lam;
            for r in 0..k {
                x[r] += proj * col[r];
            }
        }
    }
    x
}

/// Gram matrix `G_ij = <<E_i(A), E_j(A)>>`.
pub fn gram(phase: PhaseId, a: &CMat3, g: &GammaParams) -> DMatrix<f64> {
    let gens = basis_generators(phase, a);
    let k = gens.len();
    DMatrix::from_fn(k, k, |i, j| gpair(&gens[i], &gens[j], g))
}

/// Infinitesimal generator `xi_M(A)`, i.e. `dA/dz` for velocity `xi`.
pub fn infgen(phase: PhaseId, xi: &ReducedVelocity, a: &CMat3) -> CMat3 {
    generator(phase, &xi.coords(), a)
}

fn gamma_sum(g: &GammaParams) -> f64 {
    3.0 * g.g1 + g.g2 + g.g3
}

/// `<<iA, [w^, A]>>`.
fn cross_term(a: &CMat3, w: &Vec3, g: &GammaParams) -> f64 {
    let wh = hat(w);
    let c = a.lmul_real(&wh) - a.rmul_real(&wh);
    gpair(&a.mul_i(), &c, g)
}

/// `vee(Re[i Gamma A*, A])`.
fn omega_cross_vector(a: &CMat3, g: &GammaParams) -> Vec3 {
    let ga = a.adjoint().lmul_real(&g.matrix()).mul_i();
    vee(&ga.commutator(a).re)
}

/// Diagonal of the B-phase inertia `J = diag(4g1 + 2g2 + 2g3, same, 4g1)`.
pub fn bphase_inertia(g: &GammaParams) -> [f64; 3] {
    let a = 4.0 * g.g1 + 2.0 * g.g2 + 2.0 * g.g3;
    [a, a, 4.0 * g.g1]
}

/// Reduced Lagrangian from the per-phase closed forms.
pub fn lagrangian(phase: PhaseId, xi: &ReducedVelocity, a: &CMat3, g: &GammaParams) -> f64 {
    let t = tensors(a, g);
    match (*xi, phase) {
        (ReducedVelocity::Chiral { v, w }, _) => {
            w.dot(&t.i.mul_vec(&w)) + v.dot(&t.chi.mul_vec(&v)) + 2.0 * v.dot(&t.sigma.mul_vec(&w))
        }
        (ReducedVelocity::Rotation { w }, _) => w.dot(&t.j.mul_vec(&w)),
        (ReducedVelocity::PhaseRotation { v, w }, PhaseId::BPhase) => {
            2.0 * g.g1 * w.dot(&w) + (g.g2 + g.g3) * (w[0] * w[0] + w[1] * w[1]) + gamma_sum(g) * v * v
        }
        (ReducedVelocity::PhaseRotation { v, w }, PhaseId::Omega1) => {
            v * v * gpair(a, a, g) + 2.0 * v * cross_term(a, &w, g) + w.dot(&t.j.mul_vec(&w))
        }
        (ReducedVelocity::PhaseRotation { v, w }, _) => {
            w.dot(&t.j.mul_vec(&w)) + 2.0 * v * cross_term(a, &w, g) + gamma_sum(g) * v * v
        }
    }
}

/// `<<xi_M(A), xi_M(A)>>`, the defining form of the Lagrangian.
pub fn lagrangian_from_generator(phase: PhaseId, xi: &ReducedVelocity, a: &CMat3, g: &GammaParams) -> f64 {
    let x = infgen(phase, xi, a);
    gpair(&x, &x, g)
}

/// Functional derivatives of the reduced Lagrangian.
#[derive(Clone, Debug, PartialEq)]
pub struct VarDerivatives {
    /// `dl/dxi` in algebra order; this is the momentum.
    pub dl_dxi: Vec<f64>,
    /// Ambient `dl/dA`. Only its pairing with orbit tangents is meaningful.
    pub dl_da: CMat3,
}

/// Ambient `dl/dA = -2 E_xi(E_xi(A) Gamma)` valid for every phase.
pub fn dl_da_generic(phase: PhaseId, xi: &[f64], a: &CMat3, g: &GammaParams) -> CMat3 {
    let e = generator(phase, xi, a).rmul_real(&g.matrix());
    generator(phase, xi, &e).scale(-2.0)
}

/// Per-phase closed-form functional derivatives.
pub fn var_derivatives(phase: PhaseId, xi: &ReducedVelocity, a: &CMat3, g: &GammaParams) -> VarDerivatives {
    let t = tensors(a, g);
    let gm = g.matrix();
    match (*xi, phase) {
        (ReducedVelocity::Chiral { v, w }, _) => {
            let dv = t.chi.mul_vec(&v) * 2.0 + t.sigma.mul_vec(&w) * 2.0;
            let dw = t.i.mul_vec(&w) * 2.0 + t.sigma.transpose().mul_vec(&v) * 2.0;
            let (vh, wh) = (hat(&v), hat(&w));
            let da = a.rmul_real(&(wh * gm * wh))
                + a.lmul_real(&(vh * vh)).rmul_real(&gm)
                + a.lmul_real(&vh).rmul_real(&(wh * gm))
                + a.lmul_real(&vh).rmul_real(&(gm * wh));
            VarDerivatives { dl_dxi: [dv.0, dw.0].concat(), dl_da: da.scale(-2.0) }
        }
        (ReducedVelocity::Rotation { w }, _) => {
            let dw = t.j.mul_vec(&w) * 2.0;
            let y = rotation_term(a, &w, &gm);
            let da = if phase == PhaseId::APhase2 { y.scale(2.0) } else { y + y.transpose() };
            VarDerivatives { dl_dxi: dw.0.to_vec(), dl_da: da }
        }
        (ReducedVelocity::PhaseRotation { v, w }, PhaseId::BPhase) => {
            let jd = bphase_inertia(g);
            VarDerivatives {
                dl_dxi: vec![2.0 * gamma_sum(g) * v, jd[0] * w[0], jd[1] * w[1], jd[2] * w[2]],
                dl_da: CMat3::ZERO,
            }
        }
        (ReducedVelocity::PhaseRotation { v, w }, _) => {
            let c = cross_term(a, &w, g);
            let dv = if phase == PhaseId::Omega1 {
                2.0 * v * gpair(a, a, g) + 2.0 * c
            } else {
                2.0 * gamma_sum(g) * v + 2.0 * c
            };
            let dw = t.j.mul_vec(&w) * 2.0 - omega_cross_vector(a, g) * (4.0 * v);
            let y = rotation_term(a, &w, &gm);
            let wh = hat(&w);
            let comm = a.lmul_real(&wh) - a.rmul_real(&wh);
            let ag = a.rmul_real(&gm);
            let comm_g = ag.lmul_real(&wh) - ag.rmul_real(&wh);
            let x = a.rmul_real(&gm).scale(2.0 * v * v)
                - comm.rmul_real(&gm).mul_i().scale(2.0 * v)
                - comm_g.mul_i().scale(2.0 * v);
            VarDerivatives {
                dl_dxi: vec![dv, dw[0], dw[1], dw[2]],
                dl_da: y + y.transpose() + x.traceless_symmetric(),
            }
        }
    }
}

/// `[[w^, A] Gamma, w^]`.
fn rotation_term(a: &CMat3, w: &Vec3, gm: &Mat3) -> CMat3 {
    let wh = hat(w);
    let c = (a.lmul_real(&wh) - a.rmul_real(&wh)).rmul_real(gm);
    c.rmul_real(&wh) - c.lmul_real(&wh)
}

/// Legendre transform `xi -> mu = dl/dxi`.
pub fn legendre(phase: PhaseId, xi: &ReducedVelocity, a: &CMat3, g: &GammaParams) -> MomentumState {
    MomentumState { phase, mu: var_derivatives(phase, xi, a, g).dl_dxi, a: *a }
}

/// Legendre transform through the Gram matrix, `mu = 2 G xi`.
pub fn legendre_gram(phase: PhaseId, xi: &[f64], a: &CMat3, g: &GammaParams) -> Vec<f64> {
    let gm = gram(phase, a, g);
    let x = nalgebra::DVector::from_column_slice(xi);
    (gm * x * 2.0).as_slice().to_vec()
}

/// Solution of the velocity map at one state.
#[derive(Clone, Debug)]
pub struct VelocitySolve {
    /// `xi = G^+ mu / 2`.
    pub xi: Vec<f64>,
    /// `u = G^+ xi`.
    pub u: Vec<f64>,
    /// `(I - G G^+) mu`, the part of `mu` along the isotropy algebra.
    pub kernel: Vec<f64>,
    pub condition: f64,
}

/// Minimum-norm solve of `2 G xi = mu`. The isotropy directions of `G`
/// (known per phase) are dropped; the rest must be well conditioned.
pub fn solve_velocity(phase: PhaseId, mu: &[f64], a: &CMat3, g: &GammaParams) -> Result<VelocitySolve> {
    let k = phase.algebra_dim();
    let eig = SymmetricEigen::new(gram(phase, a, g));
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let kept = &order[phase.isotropy_dim()..];
    let lmin = eig.eigenvalues[kept[0]];
    let lmax = eig.eigenvalues[*kept.last().expect("nonempty")];
    let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::SingularSolve(condition));
    }
    let mut xi = vec![0.0; k];
    let mut u = vec![0.0; k];
    let mut kernel = mu.to_vec();
    for &c in kept {
        let col = eig.eigenvectors.column(c);
        let lam = eig.eigenvalues[c];
        let proj: f64 = (0..k).map(|r| col[r] * mu[r]).sum();
        for r in 0..k {
            xi[r] += 0.5 * proj / lam * col[r];
            u[r] += 0.5 * proj / (lam * lam) * col[r];
            kernel[r] -= proj * col[r];
        }
    }
    Ok(VelocitySolve { xi, u, kernel, condition })
}

/// Inverse Legendre transform (minimum-norm for degenerate phases).
pub fn inverse_legendre(state: &MomentumState, g: &GammaParams) -> Result<ReducedVelocity> {
    let s = solve_velocity(state.phase, &state.mu, &state.a, g)?;
    Ok(ReducedVelocity::from_coords(state.phase, &s.xi))
}

/// Hamiltonian `h = mu^T G^+ mu / 4`.
pub fn hamiltonian(state: &MomentumState, g: &GammaParams) -> Result<f64> {
    let s = solve_velocity(state.phase, &state.mu, &state.a, g)?;
    Ok(0.5 * s.xi.iter().zip(&state.mu).map(|(x, m)| x * m).sum::<f64>())
}

/// Ambient formula `<(m^ A + A n^) Gamma^-1, m^ A + A n^> / 4` for the
/// A-phase first regime. It shares the symmetries of [`hamiltonian`] but
/// is not its Legendre transform; see the README.
pub fn hamiltonian_a1_ambient(state: &MomentumState, g: &GammaParams) -> f64 {
    let m = state.m();
    let n = state.n().unwrap_or(Vec3::ZERO);
    let x = state.a.lmul_real(&hat(&m)) + state.a.rmul_real(&hat(&n));
    let d = g.diag();
    let ginv = Mat3::from_diag([1.0 / d[0], 1.0 / d[1], 1.0 / d[2]]);
    0.25 * pair(&x.rmul_real(&ginv), &x)
}

/// Functional derivative bundle of an observable at a state.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    /// `df/dmu`.
    pub dmu: Vec<f64>,
    /// `tau_i = <df/dA, E_i(A)>`.
    pub tau: Vec<f64>,
}

impl Gradient {
    pub fn zero(phase: PhaseId) -> Self {
        let k = phase.algebra_dim();
        Gradient { dmu: vec![0.0; k], tau: vec![0.0; k] }
    }

    /// From an ambient `df/dA`.
    pub fn from_ambient(phase: PhaseId, dmu: Vec<f64>, df_da: &CMat3, a: &CMat3) -> Self {
        let tau = basis_generators(phase, a).iter().map(|e| pair(df_da, e)).collect();
        Gradient { dmu, tau }
    }

    pub fn norm(&self) -> f64 {
        self.dmu.iter().chain(&self.tau).map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// A function on reduced phase space.
pub trait Observable {
    fn name(&self) -> String;
    fn value(&self, s: &MomentumState) -> f64;
    /// Functional derivatives. Defaults to central finite differences.
    fn gradient(&self, s: &MomentumState) -> Gradient {
        fd_gradient(self, s, 1e-6)
    }
}

/// Central finite-difference gradient: `mu` directly, `A` along the group directions.
pub fn fd_gradient<O: Observable + ?Sized>(obs: &O, s: &MomentumState, h: f64) -> Gradient {
    let k = s.phase.algebra_dim();
    let mut dmu = vec![0.0; k];
    let mut tau = vec![0.0; k];
    for i in 0..k {
        let mut sp = s.clone();
        let mut sm = s.clone();
        sp.mu[i] += h;
        sm.mu[i] -= h;
        dmu[i] = (obs.value(&sp) - obs.value(&sm)) / (2.0 * h);
        let mut e = vec![0.0; k];
        e[i] = h;
        let mut ap = s.clone();
        ap.a = phases::exp_act(s.phase, &e, &s.a);
        e[i] = -h;
        let mut am = s.clone();
        am.a = phases::exp_act(s.phase, &e, &s.a);
        tau[i] = (obs.value(&ap) - obs.value(&am)) / (2.0 * h);
    }
    Gradient { dmu, tau }
}

/// Lie-Poisson bracket from functional derivatives:
/// `{f, h} = mu . [f_mu, h_mu] + tau_f . h_mu - tau_h . f_mu`.
pub fn bracket_of(phase: PhaseId, mu: &[f64], f: &Gradient, h: &Gradient) -> f64 {
    let c = bracket(phase, &f.dmu, &h.dmu);
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    dot(mu, &c) + dot(&f.tau, &h.dmu) - dot(&h.tau, &f.dmu)
}

pub fn poisson_bracket(f: &dyn Observable, h: &dyn Observable, s: &MomentumState) -> f64 {
    bracket_of(s.phase, &s.mu, &f.gradient(s), &h.gradient(s))
}

/// Hamiltonian vector field of an observable with gradient `f`:
/// `(dmu_i, dA) = (mu . [e_i, f_mu] - tau_i, E_{f_mu}(A))`.
pub fn hamiltonian_vector(phase: PhaseId, mu: &[f64], a: &CMat3, f: &Gradient) -> (Vec<f64>, CMat3) {
    let k = phase.algebra_dim();
    let dmu = (0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            let c = bracket(phase, &e, &f.dmu);
            mu.iter().zip(&c).map(|(m, x)| m * x).sum::<f64>() - f.tau[i]
        })
        .collect();
    (dmu, generator(phase, &f.dmu, a))
}

/// Analytic gradient of the Hamiltonian together with the velocity solve.
pub fn hamiltonian_gradient(state: &MomentumState, g: &GammaParams) -> Result<(Gradient, VelocitySolve)> {
    let phase = state.phase;
    let s = solve_velocity(phase, &state.mu, &state.a, g)?;
    let gm = g.matrix();
    let ex = generator(phase, &s.xi, &state.a).rmul_real(&gm);
    let mut dh_da = generator(phase, &s.xi, &ex).scale(2.0);
    if phase.isotropy_dim() > 0 {
        let eu = generator(phase, &s.u, &state.a).rmul_real(&gm);
        dh_da = dh_da - generator(phase, &s.kernel, &eu);
    }
    let grad = Gradient::from_ambient(phase, s.xi.clone(), &dh_da, &state.a);
    Ok((grad, s))
}

/// The Hamiltonian as an observable.
#[derive(Clone, Copy, Debug)]
pub struct Hamiltonian(pub GammaParams);

impl Observable for Hamiltonian {
    fn name(&self) -> String {
        "h".into()
    }
    fn value(&self, s: &MomentumState) -> f64 {
        hamiltonian(s, &self.0).unwrap_or(f64::NAN)
    }
    fn gradient(&self, s: &MomentumState) -> Gradient {
        hamiltonian_gradient(s, &self.0)
            .map(|(g, _)| g)
            .unwrap_or_else(|_| Gradient::zero(s.phase))
    }
}

/// Time derivative of a state together with the current velocity.
#[derive(Clone, Debug)]
pub struct StateDerivative {
    pub dmu: Vec<f64>,
    pub da: CMat3,
    pub xi: Vec<f64>,
}

/// Lie-Poisson vector field `dz f = {f, h}`.
pub fn vector_field(state: &MomentumState, g: &GammaParams) -> Result<StateDerivative> {
    let (grad, s) = hamiltonian_gradient(state, g)?;
    let (dmu, da) = hamiltonian_vector(state.phase, &state.mu, &state.a, &grad);
    Ok(StateDerivative { dmu, da, xi: s.xi })
}

/// Coordinate observable `mu_i`.
#[derive(Clone, Copy, Debug)]
pub struct MomentumCoord(pub usize);

impl Observable for MomentumCoord {
    fn name(&self) -> String {
        format!("mu{}", self.0)
    }
    fn value(&self, s: &MomentumState) -> f64 {
        s.mu[self.0]
    }
    fn gradient(&self, s: &MomentumState) -> Gradient {
        let mut g = Gradient::zero(s.phase);
        g.dmu[self.0] = 1.0;
        g
    }
}

/// Coordinate observable: entry `idx` of [`CMat3::to_real18`].
#[derive(Clone, Copy, Debug)]
pub struct MatrixCoord(pub usize);

impl Observable for MatrixCoord {
    fn name(&self) -> String {
        format!("a{}", self.0)
    }
    fn value(&self, s: &MomentumState) -> f64 {
        s.a.to_real18()[self.0]
    }
    fn gradient(&self, s: &MomentumState) -> Gradient {
        let mut e = [0.0; 18];
        e[self.0] = 1.0;
        Gradient::from_ambient(s.phase, vec![0.0; s.phase.algebra_dim()], &CMat3::from_real18(&e), &s.a)
    }
}

/// Coadjoint action of `(R1, R2, V)` in the A-phase first regime:
/// `(m, n, A) -> (R1 m + vee 2Re(R1 A R2^-1 V), R2 n + vee 2Re(V R1 A R2^-1), R1 A R2^-1)`.
pub fn coadjoint_act(g: &GroupElem, v: &CMat3, state: &MomentumState) -> Result<MomentumState> {
    if state.phase != PhaseId::APhase1 {
        return Err(Error::StateMismatch(state.phase.name()));
    }
    let (r1, r2) = match g {
        GroupElem::LeftRight { phi, left, right } if *phi == 0.0 => (*left, *right),
        _ => return Err(Error::GroupMismatch(PhaseId::APhase1.name())),
    };
    if !r1.is_rotation(1e-10) || !r2.is_rotation(1e-10) {
        return Err(Error::NotRotation);
    }
    let b = state.a.lmul_real(&r1).rmul_real(&r2.transpose());
    let m = r1.mul_vec(&state.m()) + vee(&(b * *v).re.scale(2.0));
    let n = r2.mul_vec(&state.n().unwrap_or(Vec3::ZERO)) + vee(&(*v * b).re.scale(2.0));
    Ok(MomentumState::chiral(m, n, b))
}
