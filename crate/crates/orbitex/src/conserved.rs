//! Conserved quantities with analytic functional derivatives.
//!
//! The momentum-side form of `jm` is `mu . zeta(A)` where `zeta(A)` is the
//! minimum-norm algebra element generating the phase rotation,
//! `E_zeta(A) = iA`. Through the Legendre map this equals the tangent form
//! `2 <<dA/dz, iA>>`.

use crate::algebra::{gpair, CMat3, GammaParams};
use crate::dynamics::{generator_lstsq, hamiltonian, hamiltonian_gradient, Gradient, MomentumState, Observable};
use crate::phases::{bracket, PhaseId};

/// Names of all conserved quantities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuantityKind {
    H,
    Jm,
    J3Orb,
    /// Component 0, 1 or 2 of the spin momentum map.
    JSpin(usize),
    JSpinSq,
    J3,
    P,
    Casimir,
}

impl QuantityKind {
    pub fn name(self) -> String {
        match self {
            QuantityKind::H => "h".into(),
            QuantityKind::Jm => "jm".into(),
            QuantityKind::J3Orb => "j3orb".into(),
            QuantityKind::JSpin(i) => format!("jspin{}", i + 1),
            QuantityKind::JSpinSq => "jspin_sq".into(),
            QuantityKind::J3 => "j3".into(),
            QuantityKind::P => "p".into(),
            QuantityKind::Casimir => "casimir".into(),
        }
    }

    pub fn applies_to(self, phase: PhaseId) -> bool {
        use PhaseId::*;
        match self {
            QuantityKind::H | QuantityKind::Jm => true,
            QuantityKind::J3Orb | QuantityKind::JSpin(_) | QuantityKind::JSpinSq | QuantityKind::Casimir => {
                phase == APhase1
            }
            QuantityKind::J3 => phase != APhase1,
            QuantityKind::P => matches!(phase, BPhase | Omega1 | Omega4),
        }
    }
}

impl std::str::FromStr for QuantityKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        Ok(match s {
            "h" => QuantityKind::H,
            "jm" => QuantityKind::Jm,
            "j3orb" => QuantityKind::J3Orb,
            "jspin1" => QuantityKind::JSpin(0),
            "jspin2" => QuantityKind::JSpin(1),
            "jspin3" => QuantityKind::JSpin(2),
            "jspin_sq" => QuantityKind::JSpinSq,
            "j3" => QuantityKind::J3,
            "p" => QuantityKind::P,
            "casimir" => QuantityKind::Casimir,
            _ => return Err(crate::Error::Parse(format!("unknown quantity '{s}'"))),
        })
    }
}

/// A conserved quantity bound to the anisotropy coefficients.
#[derive(Clone, Copy, Debug)]
pub struct Quantity {
    pub kind: QuantityKind,
    pub gamma: GammaParams,
}

impl Quantity {
    pub fn new(kind: QuantityKind, gamma: GammaParams) -> Self {
        Quantity { kind, gamma }
    }
}

fn j3_index(phase: PhaseId) -> usize {
    match phase {
        PhaseId::APhase2 | PhaseId::Omega6 | PhaseId::Omega8 => 2,
        _ => 3,
    }
}

/// Minimum-norm `zeta` with `E_zeta(A) = iA`.
pub fn phase_generator(phase: PhaseId, a: &CMat3) -> Vec<f64> {
    let k = phase.algebra_dim();
    if matches!(phase, PhaseId::BPhase | PhaseId::Omega1 | PhaseId::Omega4) {
        let mut z = vec![0.0; k];
        z[0] = 1.0;
        return z;
    }
    generator_lstsq(phase, a, &a.mul_i())
}

/// Momentum-side `jm = mu . zeta(A)`.
pub fn jm(state: &MomentumState) -> f64 {
    let z = phase_generator(state.phase, &state.a);
    state.mu.iter().zip(&z).map(|(m, x)| m * x).sum()
}

/// Tangent-side `jm = 2 <<dA/dz, iA>>`.
pub fn jm_tangent(a: &CMat3, da: &CMat3, g: &GammaParams) -> f64 {
    2.0 * gpair(da, &a.mul_i(), g)
}

pub fn j3(state: &MomentumState) -> f64 {
    state.mu[j3_index(state.phase)]
}

/// `-e3 . n`; zero outside the A-phase first regime.
pub fn j3_orb(state: &MomentumState) -> f64 {
    state.n().map_or(0.0, |n| -n[2])
}

pub fn j_spin(state: &MomentumState) -> crate::Vec3 {
    state.m()
}

/// `Re Tr(A* A) / 2`.
pub fn casimir(state: &MomentumState) -> f64 {
    0.5 * crate::algebra::pair(&state.a, &state.a)
}

impl Observable for Quantity {
    fn name(&self) -> String {
        self.kind.name()
    }

    fn value(&self, s: &MomentumState) -> f64 {
        match self.kind {
            QuantityKind::H => hamiltonian(s, &self.gamma).unwrap_or(f64::NAN),
            QuantityKind::Jm => jm(s),
            QuantityKind::J3Orb => j3_orb(s),
            QuantityKind::JSpin(i) => s.m()[i],
            QuantityKind::JSpinSq => s.m().dot(&s.m()),
            QuantityKind::J3 => j3(s),
            QuantityKind::P => s.p().unwrap_or(0.0),
            QuantityKind::Casimir => casimir(s),
        }
    }

    fn gradient(&self, s: &MomentumState) -> Gradient {
        let mut g = Gradient::zero(s.phase);
        match self.kind {
            QuantityKind::H => {
                if let Ok((grad, _)) = hamiltonian_gradient(s, &self.gamma) {
                    g = grad;
                }
            }
            QuantityKind::Jm => {
                // zeta is equivariant, so moving A along e_i rotates it by ad_{e_i}.
                let z = phase_generator(s.phase, &s.a);
                for i in 0..g.tau.len() {
                    let mut e = vec![0.0; g.tau.len()];
                    e[i] = 1.0;
                    let c = bracket(s.phase, &e, &z);
                    g.tau[i] = s.mu.iter().zip(&c).map(|(m, x)| m * x).sum();
                }
                g.dmu = z;
            }
            QuantityKind::J3Orb => {
                if s.phase == PhaseId::APhase1 {
                    g.dmu[5] = -1.0;
                }
            }
            QuantityKind::JSpin(i) => {
                if s.phase == PhaseId::APhase1 {
                    g.dmu[i] = 1.0;
                }
            }
            QuantityKind::JSpinSq => {
                if s.phase == PhaseId::APhase1 {
                    for i in 0..3 {
                        g.dmu[i] = 2.0 * s.mu[i];
                    }
                }
            }
            QuantityKind::J3 => g.dmu[j3_index(s.phase)] = 1.0,
            QuantityKind::P => {
                if s.p().is_some() {
                    g.dmu[0] = 1.0;
                }
            }
            // Constant on the orbit, independent of the momenta.
            QuantityKind::Casimir => {}
        }
        g
    }
}

/// Integrals of motion claimed for a phase.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralSet {
    pub phase: PhaseId,
    pub quantities: Vec<QuantityKind>,
    /// False when the set is not known to be complete.
    pub known_complete: bool,
}

impl IntegralSet {
    pub fn flags(&self) -> Vec<&'static str> {
        if self.known_complete {
            vec![]
        } else {
            vec!["not-known-complete"]
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.quantities.iter().map(|q| q.name()).collect()
    }
}

/// The integrals in involution for each phase.
pub fn integral_set(phase: PhaseId) -> IntegralSet {
    use QuantityKind::*;
    let quantities = match phase {
        PhaseId::APhase1 => vec![H, Jm, J3Orb, JSpin(2), JSpinSq],
        PhaseId::Omega4 => vec![H, J3, Jm],
        _ => vec![H, Jm, J3],
    };
    IntegralSet { phase, quantities, known_complete: phase != PhaseId::Omega4 }
}

/// Every quantity recorded along trajectories: the integral set plus
/// the remaining spin components, `p` and the Casimir where they apply.
pub fn tracked(phase: PhaseId) -> Vec<QuantityKind> {
    use QuantityKind::*;
    match phase {
        PhaseId::APhase1 => vec![H, Jm, J3Orb, JSpin(0), JSpin(1), JSpin(2), JSpinSq, Casimir],
        PhaseId::BPhase | PhaseId::Omega1 | PhaseId::Omega4 => vec![H, Jm, J3, P],
        _ => vec![H, Jm, J3],
    }
}

/// Values of `kinds` at a state.
pub fn evaluate(kinds: &[QuantityKind], s: &MomentumState, g: &GammaParams) -> Vec<f64> {
    kinds.iter().map(|k| Quantity::new(*k, *g).value(s)).collect()
}
