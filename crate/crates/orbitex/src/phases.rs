//! Phase registry: base points, symmetry actions, orbit membership,
//! isotropy, random sampling and the Ginzburg-Landau potential.
//!
//! Every phase comes with a Lie algebra in coordinates. The coordinate
//! order is `(v, w)` for the A-phase first regime, `w` for the pure
//! rotation phases and `(v, w1, w2, w3)` for phases with a U(1) factor.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{exp_so3, gpair, hat, rot_e3, CMat3, GammaParams, Mat3, Vec3, C64};
use crate::{Error, Result};

/// Order parameter phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhaseId {
    APhase1,
    APhase2,
    BPhase,
    Omega1,
    Omega4,
    Omega6,
    Omega8,
}

impl PhaseId {
    pub const ALL: [PhaseId; 7] = [
        PhaseId::APhase1,
        PhaseId::APhase2,
        PhaseId::BPhase,
        PhaseId::Omega1,
        PhaseId::Omega4,
        PhaseId::Omega6,
        PhaseId::Omega8,
    ];

    /// Lowercase name used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            PhaseId::APhase1 => "a1",
            PhaseId::APhase2 => "a2",
            PhaseId::BPhase => "b",
            PhaseId::Omega1 => "omega1",
            PhaseId::Omega4 => "omega4",
            PhaseId::Omega6 => "omega6",
            PhaseId::Omega8 => "omega8",
        }
    }

    /// Dimension of the Lie algebra acting on the orbit.
    pub fn algebra_dim(self) -> usize {
        match self {
            PhaseId::APhase1 => 6,
            PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8 => 3,
            PhaseId::BPhase | PhaseId::Omega1 | PhaseId::Omega4 => 4,
        }
    }

    pub fn orbit_dim(self) -> usize {
        match self {
            PhaseId::APhase1 => 5,
            PhaseId::BPhase | PhaseId::Omega4 => 4,
            _ => 3,
        }
    }

    /// Dimension of the isotropy algebra, i.e. of the kernel of the velocity map.
    pub fn isotropy_dim(self) -> usize {
        self.algebra_dim() - self.orbit_dim()
    }

    /// Human readable symmetry group.
    pub fn group_name(self) -> &'static str {
        match self {
            PhaseId::APhase1 => "SO(3)_L x SO(3)_R acting by A -> R1 A R2^-1 (U(1) acts through it)",
            PhaseId::APhase2 => "SO(3) acting by A -> R A R^-1",
            PhaseId::BPhase => "U(1) x SO(3) acting by A -> e^{i phi} A R^-1",
            PhaseId::Omega1 | PhaseId::Omega4 => "U(1) x SO(3) acting by A -> e^{i phi} R A R^-1",
            PhaseId::Omega6 | PhaseId::Omega8 => "SO(3) acting by A -> R A R^-1 (U(1) acts through it)",
        }
    }

    /// Momentum coordinate names in state order.
    pub fn momentum_names(self) -> &'static [&'static str] {
        match self {
            PhaseId::APhase1 => &["m1", "m2", "m3", "n1", "n2", "n3"],
            PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8 => &["m1", "m2", "m3"],
            _ => &["p", "m1", "m2", "m3"],
        }
    }

    /// Velocity coordinate names in algebra order.
    pub fn velocity_names(self) -> &'static [&'static str] {
        match self {
            PhaseId::APhase1 => &["v1", "v2", "v3", "w1", "w2", "w3"],
            PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8 => &["w1", "w2", "w3"],
            _ => &["v", "w1", "w2", "w3"],
        }
    }

    /// Symmetric traceless order parameters (neutron-star phases).
    pub fn is_symmetric(self) -> bool {
        matches!(self, PhaseId::Omega1 | PhaseId::Omega4 | PhaseId::Omega6 | PhaseId::Omega8)
    }
}

impl fmt::Display for PhaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PhaseId::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown phase '{s}' (expected one of a1, a2, b, omega1, omega4, omega6, omega8)"
                ))
            })
    }
}

/// A matrix tagged with its phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitPoint {
    pub phase: PhaseId,
    pub a: CMat3,
}

impl OrbitPoint {
    /// Checked constructor.
    pub fn new(phase: PhaseId, a: CMat3, tol: f64) -> Result<Self> {
        if !is_on_orbit(phase, &a, tol) {
            return Err(Error::StateMismatch(phase.name()));
        }
        Ok(OrbitPoint { phase, a })
    }
}

fn omega() -> C64 {
    C64::cis(2.0 * PI / 3.0)
}

/// Representative of each orbit.
pub fn base_point(phase: PhaseId) -> OrbitPoint {
    let (o, i, z) = (C64::ONE, C64::I, C64::ZERO);
    let a = match phase {
        PhaseId::APhase1 | PhaseId::APhase2 => {
            CMat3::from_entries([[z, z, z], [z, z, z], [o, i, z]])
        }
        PhaseId::BPhase => CMat3::IDENTITY,
        PhaseId::Omega1 => CMat3::from_real(Mat3::from_diag([1.0, 1.0, -2.0])),
        PhaseId::Omega4 => {
            let w = omega();
            CMat3::from_entries([[o, z, z], [z, w, z], [z, z, w * w]])
        }
        PhaseId::Omega6 => {
            let m = C64::new(-1.0, 0.0);
            CMat3::from_entries([[o, i, z], [i, m, z], [z, z, z]])
        }
        PhaseId::Omega8 => CMat3::from_entries([[z, o, i], [o, z, z], [i, z, z]]),
    };
    OrbitPoint { phase, a }
}

/// The Omega4 matrix with a unit (2,1) entry. It is neither symmetric
/// nor unitary and is kept only for comparison with [`base_point`].
pub fn omega4_printed_matrix() -> CMat3 {
    let (o, z, w) = (C64::ONE, C64::ZERO, omega());
    CMat3::from_entries([[o, z, z], [o, w, z], [z, z, w * w]])
}

/// Symmetry group element.
///
/// `LeftRight` acts by `A -> e^{i phi} L A R^-1` and is used by the
/// A-phase first regime and the B-phase. `Conjugate` acts by
/// `A -> e^{i phi} R A R^-1` and is used by the other phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GroupElem {
    LeftRight { phi: f64, left: Mat3, right: Mat3 },
    Conjugate { phi: f64, rot: Mat3 },
}

impl GroupElem {
    pub fn identity(phase: PhaseId) -> Self {
        match phase {
            PhaseId::APhase1 | PhaseId::BPhase => GroupElem::LeftRight {
                phi: 0.0,
                left: Mat3::IDENTITY,
                right: Mat3::IDENTITY,
            },
            _ => GroupElem::Conjugate { phi: 0.0, rot: Mat3::IDENTITY },
        }
    }

    fn fits(&self, phase: PhaseId) -> bool {
        matches!(
            (self, phase),
            (GroupElem::LeftRight { .. }, PhaseId::APhase1 | PhaseId::BPhase)
                | (
                    GroupElem::Conjugate { .. },
                    PhaseId::APhase2
                        | PhaseId::Omega1
                        | PhaseId::Omega4
                        | PhaseId::Omega6
                        | PhaseId::Omega8
                )
        )
    }

    fn rotations_ok(&self, tol: f64) -> bool {
        match self {
            GroupElem::LeftRight { left, right, .. } => {
                left.is_rotation(tol) && right.is_rotation(tol)
            }
            GroupElem::Conjugate { rot, .. } => rot.is_rotation(tol),
        }
    }

    /// Group product `self * o`.
    pub fn compose(&self, o: &GroupElem) -> GroupElem {
        match (self, o) {
            (
                GroupElem::LeftRight { phi: p, left: l, right: r },
                GroupElem::LeftRight { phi: q, left: l2, right: r2 },
            ) => GroupElem::LeftRight { phi: p + q, left: *l * *l2, right: *r * *r2 },
            (GroupElem::Conjugate { phi: p, rot: r }, GroupElem::Conjugate { phi: q, rot: r2 }) => {
                GroupElem::Conjugate { phi: p + q, rot: *r * *r2 }
            }
            _ => panic!("composing group elements of different groups"),
        }
    }

    pub fn inverse(&self) -> GroupElem {
        match self {
            GroupElem::LeftRight { phi, left, right } => GroupElem::LeftRight {
                phi: -phi,
                left: left.transpose(),
                right: right.transpose(),
            },
            GroupElem::Conjugate { phi, rot } => GroupElem::Conjugate { phi: -phi, rot: rot.transpose() },
        }
    }

    /// Apply without validation.
    pub fn apply(&self, a: &CMat3) -> CMat3 {
        match self {
            GroupElem::LeftRight { phi, left, right } => a
                .lmul_real(left)
                .rmul_real(&right.transpose())
                .mul_scalar(C64::cis(*phi)),
            GroupElem::Conjugate { phi, rot } => a
                .lmul_real(rot)
                .rmul_real(&rot.transpose())
                .mul_scalar(C64::cis(*phi)),
        }
    }
}

/// Validated group action.
pub fn act(phase: PhaseId, g: &GroupElem, a: &OrbitPoint) -> Result<OrbitPoint> {
    if !g.fits(phase) || a.phase != phase {
        return Err(Error::GroupMismatch(phase.name()));
    }
    if !g.rotations_ok(1e-10) {
        return Err(Error::NotRotation);
    }
    Ok(OrbitPoint { phase, a: g.apply(&a.a) })
}

fn split_vw(phase: PhaseId, xi: &[f64]) -> (f64, Vec3, Vec3) {
    match phase {
        PhaseId::APhase1 => (0.0, Vec3([xi[0], xi[1], xi[2]]), Vec3([xi[3], xi[4], xi[5]])),
        PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8 => {
            (0.0, Vec3::ZERO, Vec3([xi[0], xi[1], xi[2]]))
        }
        _ => (xi[0], Vec3::ZERO, Vec3([xi[1], xi[2], xi[3]])),
    }
}

/// Infinitesimal generator of algebra element `xi`, applied to any matrix.
///
/// The map is linear in both arguments and skew-adjoint for `Re Tr(X* Y)`.
pub fn generator(phase: PhaseId, xi: &[f64], x: &CMat3) -> CMat3 {
    let (s, v, w) = split_vw(phase, xi);
    let wh = hat(&w);
    match phase {
        PhaseId::APhase1 => x.lmul_real(&hat(&v)) + x.rmul_real(&wh),
        PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8 => {
            x.lmul_real(&wh) - x.rmul_real(&wh)
        }
        PhaseId::BPhase => x.mul_i().scale(s) + x.rmul_real(&wh),
        PhaseId::Omega1 | PhaseId::Omega4 => {
            x.mul_i().scale(s) + x.lmul_real(&wh) - x.rmul_real(&wh)
        }
    }
}

/// Lie bracket in algebra coordinates. Generators satisfy
/// `[X_a, X_b] = -X_{bracket(a, b)}` as vector fields.
pub fn bracket(phase: PhaseId, a: &[f64], b: &[f64]) -> Vec<f64> {
    let (_, av, aw) = split_vw(phase, a);
    let (_, bv, bw) = split_vw(phase, b);
    match phase {
        PhaseId::APhase1 => {
            let l = av.cross(&bv);
            let r = aw.cross(&bw);
            vec![l[0], l[1], l[2], -r[0], -r[1], -r[2]]
        }
        PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8 => aw.cross(&bw).0.to_vec(),
        PhaseId::BPhase => {
            let r = aw.cross(&bw);
            vec![0.0, -r[0], -r[1], -r[2]]
        }
        PhaseId::Omega1 | PhaseId::Omega4 => {
            let r = aw.cross(&bw);
            vec![0.0, r[0], r[1], r[2]]
        }
    }
}

/// Group element `exp(xi)` whose action has generator [`generator`].
pub fn exp_elem(phase: PhaseId, xi: &[f64]) -> GroupElem {
    let (s, v, w) = split_vw(phase, xi);
    match phase {
        PhaseId::APhase1 => GroupElem::LeftRight { phi: 0.0, left: exp_so3(&v), right: exp_so3(&-w) },
        PhaseId::BPhase => GroupElem::LeftRight { phi: s, left: Mat3::IDENTITY, right: exp_so3(&-w) },
        _ => GroupElem::Conjugate { phi: s, rot: exp_so3(&w) },
    }
}

/// `exp(xi) . A`.
pub fn exp_act(phase: PhaseId, xi: &[f64], a: &CMat3) -> CMat3 {
    exp_elem(phase, xi).apply(a)
}

fn sym_residual(a: &CMat3) -> f64 {
    (*a - a.transpose()).max_abs().max(a.trace().abs())
}

/// Largest violation of the algebraic system defining the orbit.
pub fn orbit_residual(phase: PhaseId, a: &CMat3) -> f64 {
    let aa = *a * a.adjoint();
    match phase {
        PhaseId::APhase1 | PhaseId::APhase2 => {
            let mut r = (aa * *a - a.scale(2.0))
                .max_abs()
                .max(aa.im.max_abs())
                .max((*a * a.transpose()).max_abs())
                .max((aa.trace().re - 2.0).abs());
            if phase == PhaseId::APhase2 {
                r = r.max((*a * *a).max_abs());
            }
            r
        }
        PhaseId::BPhase => {
            let u = (a.adjoint() * *a - CMat3::IDENTITY).max_abs();
            let ata = a.transpose() * *a;
            let lam = ata.trace() * (1.0 / 3.0);
            u.max((ata - CMat3::IDENTITY.mul_scalar(lam)).max_abs())
        }
        PhaseId::Omega1 => {
            let s = (*a * *a).trace() * (1.0 / 6.0);
            let s = s.sqrt();
            let mut best = f64::INFINITY;
            for sign in [1.0, -1.0] {
                let unit = if s.abs() > 0.0 { s.conj() * (sign / s.abs()) } else { C64::ONE };
                let b = a.mul_scalar(unit);
                let p = (CMat3::IDENTITY - b).scale(1.0 / 3.0);
                let r = b.im.max_abs().max((p * p - p).max_abs());
                best = best.min(r);
            }
            sym_residual(a).max((s.abs() - 1.0).abs()).max(best)
        }
        PhaseId::Omega4 => sym_residual(a)
            .max((aa - CMat3::IDENTITY).max_abs())
            .max((*a * *a).trace().abs()),
        PhaseId::Omega6 => sym_residual(a)
            .max((aa * *a - a.scale(4.0)).max_abs())
            .max((aa.trace().re - 4.0).abs()),
        PhaseId::Omega8 => {
            let p = aa.re - Mat3::IDENTITY;
            let j = (0..3)
                .max_by(|&x, &y| p.column(x).norm().total_cmp(&p.column(y).norm()))
                .unwrap_or(0);
            let col = p.column(j);
            let u = if col.norm() > 0.0 { col * (1.0 / col.norm()) } else { Vec3::e(0) };
            // b = A u, then A must equal u b^T + b u^T.
            let b: [C64; 3] = std::array::from_fn(|i| {
                (0..3).fold(C64::ZERO, |acc, k| acc + a.get(i, k) * u[k])
            });
            let mut rebuilt = CMat3::ZERO;
            for i in 0..3 {
                for k in 0..3 {
                    rebuilt.set(i, k, b[k] * u[i] + b[i] * u[k]);
                }
            }
            let bb = b.iter().fold(C64::ZERO, |acc, x| acc + *x * *x);
            let nb: f64 = b.iter().map(|x| x.re * x.re + x.im * x.im).sum();
            let bu = b.iter().zip(u.0.iter()).fold(C64::ZERO, |acc, (x, y)| acc + *x * *y);
            sym_residual(a)
                .max((p - Mat3::outer(&u, &u)).max_abs())
                .max((*a - rebuilt).max_abs())
                .max(bb.abs())
                .max((nb - 2.0).abs())
                .max(bu.abs())
        }
    }
}

pub fn is_on_orbit(phase: PhaseId, a: &CMat3, tol: f64) -> bool {
    a.is_finite() && orbit_residual(phase, a) <= tol
}

/// True iff `g` fixes the base point to `1e-10`.
pub fn isotropy_check(phase: PhaseId, g: &GroupElem) -> bool {
    let a0 = base_point(phase);
    match act(phase, g, &a0) {
        Ok(b) => (b.a - a0.a).max_abs() <= 1e-10,
        Err(_) => false,
    }
}

fn sign_diag(e: [f64; 3]) -> Mat3 {
    Mat3::from_diag(e)
}

/// Representative isotropy elements of each base point. Continuous
/// families are sampled at a few parameter values.
pub fn isotropy_elements(phase: PhaseId) -> Vec<GroupElem> {
    let jp = Mat3::IDENTITY;
    let jm = sign_diag([1.0, -1.0, -1.0]);
    let tjm = sign_diag([-1.0, -1.0, 1.0]);
    let angles = [0.0, 0.4, 1.3, -2.2, PI];
    let mut out = Vec::new();
    match phase {
        PhaseId::APhase1 => {
            for &phi in &angles {
                for &alpha in &angles {
                    for (j, tj) in [(jp, jp), (jm, tjm)] {
                        out.push(GroupElem::LeftRight {
                            phi,
                            left: rot_e3(alpha) * j,
                            right: rot_e3(phi) * tj,
                        });
                    }
                }
            }
        }
        PhaseId::APhase2 => out.push(GroupElem::identity(phase)),
        PhaseId::BPhase => {
            for v in [Vec3::ZERO, Vec3::new(0.3, -1.0, 0.5), Vec3::new(2.0, 0.1, 0.0)] {
                let r = exp_so3(&v);
                out.push(GroupElem::LeftRight { phi: 0.0, left: r, right: r });
            }
        }
        PhaseId::Omega1 => {
            for &phi in &angles {
                for j in [jp, jm] {
                    out.push(GroupElem::Conjugate { phi: 0.0, rot: rot_e3(phi) * j });
                }
            }
        }
        PhaseId::Omega4 => {
            let w = 2.0 * PI / 3.0;
            for e in [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]] {
                out.push(GroupElem::Conjugate { phi: 0.0, rot: sign_diag(e) });
                out.push(GroupElem::Conjugate {
                    phi: w,
                    rot: Mat3([[0.0, 0.0, e[0]], [e[1], 0.0, 0.0], [0.0, e[2], 0.0]]),
                });
                out.push(GroupElem::Conjugate {
                    phi: 2.0 * w,
                    rot: Mat3([[0.0, e[0], 0.0], [0.0, 0.0, e[1]], [e[2], 0.0, 0.0]]),
                });
            }
        }
        PhaseId::Omega6 => {
            for &phi in &angles {
                for tj in [jp, tjm] {
                    out.push(GroupElem::Conjugate { phi, rot: tj * rot_e3(0.5 * phi) });
                }
            }
        }
        PhaseId::Omega8 => out.push(GroupElem::identity(phase)),
    }
    out
}

/// The three non-identity sign matrices proposed as isotropy of the
/// A-phase second-regime base point. Conjugation by each of them moves
/// `A0` (to `-A0` or to a conjugate), so the true isotropy is trivial.
pub fn a2_sign_matrices() -> [Mat3; 3] {
    [
        sign_diag([1.0, -1.0, -1.0]),
        sign_diag([-1.0, -1.0, 1.0]),
        sign_diag([-1.0, 1.0, -1.0]),
    ]
}

/// Rotation from a normally distributed axis and an angle uniform in `[0, pi]`.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    let mut axis = Vec3(std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal)));
    let n = axis.norm();
    axis = if n > 1e-12 { axis * (1.0 / n) } else { Vec3::e(2) };
    let angle = rng.random_range(0.0..=PI);
    exp_so3(&(axis * angle))
}

/// Random element of the phase's symmetry group.
pub fn random_group_elem<R: Rng + ?Sized>(phase: PhaseId, rng: &mut R) -> GroupElem {
    let phi = rng.random_range(0.0..2.0 * PI);
    match phase {
        PhaseId::APhase1 | PhaseId::BPhase => {
            let left = random_rotation(rng);
            let right = random_rotation(rng);
            GroupElem::LeftRight { phi, left, right }
        }
        _ => GroupElem::Conjugate { phi, rot: random_rotation(rng) },
    }
}

/// Random orbit point from an existing generator.
pub fn orbit_sample_rng<R: Rng + ?Sized>(phase: PhaseId, rng: &mut R) -> OrbitPoint {
    let g = random_group_elem(phase, rng);
    OrbitPoint { phase, a: g.apply(&base_point(phase).a) }
}

/// Deterministic random orbit point.
pub fn orbit_sample(phase: PhaseId, seed: u64) -> OrbitPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    orbit_sample_rng(phase, &mut rng)
}

/// Coefficients `alpha, beta_1 .. beta_5` of the potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub alpha: f64,
    pub beta: [f64; 5],
}

impl Default for PotentialParams {
    fn default() -> Self {
        PotentialParams { alpha: -1.0, beta: [0.1, 0.2, 0.3, 0.4, 0.5] }
    }
}

/// Ginzburg-Landau potential `U(A)`.
pub fn potential_u(a: &CMat3, p: &PotentialParams) -> f64 {
    let aa = *a * a.adjoint();
    let a_a = a.adjoint() * *a;
    let t = aa.trace().re;
    p.alpha * t
        + p.beta[0] * (*a * a.transpose()).trace().abs().powi(2)
        + p.beta[1] * t * t
        + p.beta[2] * (a_a * a_a.conj()).trace().re
        + p.beta[3] * (aa * aa).trace().re
        + p.beta[4] * (aa * aa.conj()).trace().re
}

/// Gradient energy density along `z` written as the three gamma sums.
pub fn fgrad(_a: &CMat3, da: &CMat3, g: &GammaParams) -> f64 {
    // Spatial derivative d_k A with only the z component (k = 2) nonzero.
    let d = |k: usize, p: usize, i: usize| -> C64 { if k == 2 { da.get(p, i) } else { C64::ZERO } };
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    for i in 0..3 {
        for p in 0..3 {
            for k in 0..3 {
                s1 += (d(k, p, i).conj() * d(k, p, i)).re;
                s2 += (d(k, p, i).conj() * d(i, p, k)).re;
                s3 += (d(k, p, k).conj() * d(i, p, i)).re;
            }
        }
    }
    g.g1 * s1 + g.g2 * s2 + g.g3 * s3
}

/// `<<dA, dA>>`, the same density through the weighted pairing.
pub fn fgrad_pairing(da: &CMat3, g: &GammaParams) -> f64 {
    gpair(da, da, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn base_points_lie_on_their_orbits() {
        for p in PhaseId::ALL {
            let r = orbit_residual(p, &base_point(p).a);
            assert!(r < 1e-14, "{p}: {r}");
        }
    }

    #[test]
    fn base_point_entries() {
        let a = base_point(PhaseId::APhase1).a;
        assert_eq!(a.get(2, 0), C64::ONE);
        assert_eq!(a.get(2, 1), C64::I);
        assert_eq!(a.get(0, 0), C64::ZERO);
        assert_eq!(base_point(PhaseId::BPhase).a, CMat3::IDENTITY);
        assert_eq!(base_point(PhaseId::Omega1).a.re, Mat3::from_diag([1.0, 1.0, -2.0]));
    }

    #[test]
    fn printed_omega4_matrix_fails_symmetry_and_isotropy() {
        let m = omega4_printed_matrix();
        assert!((m - m.transpose()).max_abs() > 0.5);
        assert!(orbit_residual(PhaseId::Omega4, &m) > 0.5);
        let fixed = isotropy_elements(PhaseId::Omega4)
            .iter()
            .filter(|g| (g.apply(&m) - m).max_abs() < 1e-10)
            .count();
        assert!(fixed < 12);
    }

    #[test]
    fn scaled_base_point_is_off_orbit() {
        let a = base_point(PhaseId::APhase1).a.scale(2.0);
        assert!(!is_on_orbit(PhaseId::APhase1, &a, 1e-10));
    }

    #[test]
    fn phase_times_rotation_is_on_b_orbit() {
        let mut r = rng(3);
        for _ in 0..20 {
            let rot = random_rotation(&mut r);
            let a = CMat3::from_real(rot).mul_scalar(C64::cis(PI / 4.0));
            assert!(is_on_orbit(PhaseId::BPhase, &a, 1e-10));
        }
    }

    #[test]
    fn group_orbits_preserved_by_random_actions() {
        for p in PhaseId::ALL {
            let mut r = rng(11);
            for _ in 0..100 {
                let g = random_group_elem(p, &mut r);
                let a = act(p, &g, &base_point(p)).unwrap();
                let res = orbit_residual(p, &a.a);
                assert!(res < 1e-10, "{p}: {res}");
            }
        }
    }

    #[test]
    fn action_is_a_left_action() {
        for p in PhaseId::ALL {
            let mut r = rng(5);
            let a = orbit_sample_rng(p, &mut r);
            let g = random_group_elem(p, &mut r);
            let h = random_group_elem(p, &mut r);
            let lhs = act(p, &g.compose(&h), &a).unwrap().a;
            let rhs = act(p, &g, &act(p, &h, &a).unwrap()).unwrap().a;
            assert!((lhs - rhs).max_abs() < 1e-13);
            let back = g.inverse().apply(&g.apply(&a.a));
            assert!((back - a.a).max_abs() < 1e-13);
        }
    }

    #[test]
    fn act_rejects_non_rotations_and_wrong_groups() {
        let p = PhaseId::APhase2;
        let bad = GroupElem::Conjugate { phi: 0.0, rot: Mat3::IDENTITY.scale(1.1) };
        assert!(matches!(act(p, &bad, &base_point(p)), Err(Error::NotRotation)));
        let refl = GroupElem::Conjugate { phi: 0.0, rot: Mat3::from_diag([1.0, 1.0, -1.0]) };
        assert!(act(p, &refl, &base_point(p)).is_err());
        let lr = GroupElem::identity(PhaseId::APhase1);
        assert!(matches!(act(p, &lr, &base_point(p)), Err(Error::GroupMismatch(_))));
    }

    #[test]
    fn phase_rotation_identities() {
        let phi = 0.83;
        let a0 = base_point(PhaseId::APhase1).a;
        // A0 rho(-phi) = e^{-i phi} A0, so rho(phi) A0 rho(-phi) = e^{-i phi} A0.
        let g = GroupElem::LeftRight { phi: 0.0, left: rot_e3(phi), right: rot_e3(phi) };
        let lhs = g.apply(&a0);
        assert!((lhs - a0.mul_scalar(C64::cis(-phi))).max_abs() < 1e-15);
        assert!((lhs - a0.mul_scalar(C64::cis(phi))).max_abs() > 0.5);

        let b0 = base_point(PhaseId::Omega6).a;
        let h = GroupElem::Conjugate { phi: 0.0, rot: rot_e3(-0.5 * phi) };
        assert!((h.apply(&b0) - b0.mul_scalar(C64::cis(phi))).max_abs() < 1e-15);

        let c0 = base_point(PhaseId::Omega8).a;
        let k = GroupElem::Conjugate { phi: 0.0, rot: crate::algebra::rot_e1(phi) };
        assert!((k.apply(&c0) - c0.mul_scalar(C64::cis(-phi))).max_abs() < 1e-15);
    }

    #[test]
    fn listed_isotropy_elements_fix_base_points() {
        for p in PhaseId::ALL {
            for g in isotropy_elements(p) {
                assert!(isotropy_check(p, &g), "{p}: {g:?}");
            }
        }
        assert_eq!(isotropy_elements(PhaseId::Omega4).len(), 12);
        assert_eq!(isotropy_elements(PhaseId::APhase2).len(), 1);
    }

    #[test]
    fn a2_sign_matrices_move_the_base_point() {
        let a0 = base_point(PhaseId::APhase2).a;
        for r in a2_sign_matrices() {
            let g = GroupElem::Conjugate { phi: 0.0, rot: r };
            assert!(!isotropy_check(PhaseId::APhase2, &g));
            let b = g.apply(&a0);
            let to_minus = (b + a0).max_abs();
            let to_conj = (b - a0.conj()).max_abs();
            let to_minus_conj = (b + a0.conj()).max_abs();
            assert!(to_minus.min(to_conj).min(to_minus_conj) < 1e-15);
        }
    }

    #[test]
    fn isotropy_rejects_other_candidates() {
        // Signed permutation matrices of determinant one, with all cube-root phases.
        let perms = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0], [1, 0, 2]];
        let mut count4 = 0;
        let mut count2 = 0;
        let mut count8 = 0;
        for perm in perms {
            for s in 0..8 {
                let e = [
                    if s & 1 == 0 { 1.0 } else { -1.0 },
                    if s & 2 == 0 { 1.0 } else { -1.0 },
                    if s & 4 == 0 { 1.0 } else { -1.0 },
                ];
                let mut r = Mat3::ZERO;
                for i in 0..3 {
                    r.0[i][perm[i]] = e[i];
                }
                if (r.det() - 1.0).abs() > 1e-12 {
                    continue;
                }
                for k in 0..3 {
                    let g = GroupElem::Conjugate { phi: 2.0 * PI * k as f64 / 3.0, rot: r };
                    count4 += isotropy_check(PhaseId::Omega4, &g) as usize;
                }
                let g = GroupElem::Conjugate { phi: 0.0, rot: r };
                count2 += isotropy_check(PhaseId::APhase2, &g) as usize;
                count8 += isotropy_check(PhaseId::Omega8, &g) as usize;
            }
        }
        assert_eq!(count4, 12);
        assert_eq!(count2, 1);
        assert_eq!(count8, 1);
        // SO(3) part of the Omega6 isotropy: exactly the two sign matrices.
        let mut count6 = 0;
        for e in [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]] {
            let g = GroupElem::Conjugate { phi: 0.0, rot: Mat3::from_diag(e) };
            count6 += isotropy_check(PhaseId::Omega6, &g) as usize;
        }
        assert_eq!(count6, 2);
        let mut r = rng(9);
        for p in [PhaseId::APhase2, PhaseId::Omega4, PhaseId::Omega8] {
            let g = random_group_elem(p, &mut r);
            assert!(!isotropy_check(p, &g));
        }
    }

    #[test]
    fn a1_generators_span_five_dimensions() {
        use nalgebra::DMatrix;
        let a0 = base_point(PhaseId::APhase1).a;
        // 7 generators: u(1), so(3)_L, so(3)_R.
        let mut cols: Vec<[f64; 18]> = vec![a0.mul_i().to_real18()];
        for i in 0..6 {
            let mut xi = [0.0; 6];
            xi[i] = 1.0;
            cols.push(generator(PhaseId::APhase1, &xi, &a0).to_real18());
        }
        let m = DMatrix::from_fn(18, 7, |r, c| cols[c][r]);
        assert_eq!(m.rank(1e-10), 5);
    }

    #[test]
    fn generators_match_group_exponential() {
        for p in PhaseId::ALL {
            let mut r = rng(21);
            let a = orbit_sample_rng(p, &mut r).a;
            let xi: Vec<f64> = (0..p.algebra_dim()).map(|_| r.sample(StandardNormal)).collect();
            let h = 1e-6;
            let xp: Vec<f64> = xi.iter().map(|x| x * h).collect();
            let xm: Vec<f64> = xi.iter().map(|x| -x * h).collect();
            let fd = (exp_act(p, &xp, &a) - exp_act(p, &xm, &a)).scale(0.5 / h);
            assert!((fd - generator(p, &xi, &a)).max_abs() < 1e-8, "{p}");
        }
    }

    #[test]
    fn generator_bracket_convention() {
        // [X_a, X_b](A) = X_b'(A)[X_a] - X_a'(A)[X_b] = E_a E_b A - E_b E_a A for linear fields.
        for p in PhaseId::ALL {
            let mut r = rng(33);
            let a = orbit_sample_rng(p, &mut r).a;
            let k = p.algebra_dim();
            let x: Vec<f64> = (0..k).map(|_| r.sample(StandardNormal)).collect();
            let y: Vec<f64> = (0..k).map(|_| r.sample(StandardNormal)).collect();
            let xy = generator(p, &y, &generator(p, &x, &a)) - generator(p, &x, &generator(p, &y, &a));
            let c = generator(p, &bracket(p, &x, &y), &a);
            assert!((xy + c).max_abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn generators_are_skew_adjoint() {
        for p in PhaseId::ALL {
            let mut r = rng(4);
            let k = p.algebra_dim();
            let xi: Vec<f64> = (0..k).map(|_| r.sample(StandardNormal)).collect();
            let x = orbit_sample_rng(p, &mut r).a;
            let y = orbit_sample_rng(p, &mut r).a.mul_i();
            let s = crate::algebra::pair(&generator(p, &xi, &x), &y)
                + crate::algebra::pair(&x, &generator(p, &xi, &y));
            assert!(s.abs() < 1e-13);
        }
    }

    #[test]
    fn orbit_samples_are_deterministic_and_distinct() {
        for p in PhaseId::ALL {
            assert_eq!(orbit_sample(p, 7), orbit_sample(p, 7));
            assert!((orbit_sample(p, 7).a - orbit_sample(p, 8).a).max_abs() > 1e-6);
        }
    }

    #[test]
    fn potential_examples() {
        let zero = PotentialParams { alpha: 1.0, beta: [0.0; 5] };
        assert_eq!(potential_u(&CMat3::ZERO, &PotentialParams::default()), 0.0);
        let a0 = base_point(PhaseId::APhase1).a;
        assert!((potential_u(&a0, &zero) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn potential_terms_by_hand_on_b_base_point() {
        // A = I: Tr(AA^T) = 3, Tr(AA*) = 3, each quartic trace = 3.
        let p = PotentialParams { alpha: 2.0, beta: [1.0, 10.0, 100.0, 1000.0, 10000.0] };
        let u = potential_u(&CMat3::IDENTITY, &p);
        assert!((u - (6.0 + 9.0 + 90.0 + 300.0 + 3000.0 + 30000.0)).abs() < 1e-9);
    }

    #[test]
    fn potential_is_invariant() {
        let params = PotentialParams::default();
        for p in PhaseId::ALL {
            let mut r = rng(17);
            let u0 = potential_u(&base_point(p).a, &params);
            for _ in 0..100 {
                let a = orbit_sample_rng(p, &mut r);
                let g = random_group_elem(p, &mut r);
                let b = act(p, &g, &a).unwrap();
                let du = potential_u(&b.a, &params) - u0;
                assert!(du.abs() <= 1e-9 * u0.abs().max(1.0), "{p}: {du}");
            }
        }
    }

    #[test]
    fn fgrad_examples() {
        let g = GammaParams::default();
        let a = base_point(PhaseId::BPhase).a;
        assert_eq!(fgrad(&a, &CMat3::ZERO, &g), 0.0);
        assert!((fgrad(&a, &CMat3::IDENTITY, &g) - 5.0).abs() < 1e-15);
        let g = GammaParams::new(0.4, 1.7, 0.9).unwrap();
        let mut r = rng(2);
        for _ in 0..20 {
            let da = CMat3::from_real18(&std::array::from_fn::<f64, 18, _>(|_| r.sample(StandardNormal)));
            let lhs = fgrad(&a, &da, &g);
            let rhs = fgrad_pairing(&da, &g);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn phase_names_roundtrip() {
        for p in PhaseId::ALL {
            assert_eq!(p.name().parse::<PhaseId>().unwrap(), p);
        }
        assert!("omega2".parse::<PhaseId>().is_err());
    }
}
