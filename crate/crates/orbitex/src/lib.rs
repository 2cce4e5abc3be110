//! Texture equations of superfluid ³He and of neutron-star condensates as
//! Euler-Poincaré and Lie-Poisson systems on group orbits in `gl(3, C)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: 3x3 real and complex matrices, hat/vee, pairings, `exp` on SO(3).
//! * [`phases`]: phase registry, base points, group actions, orbit tests, potential.
//! * [`dynamics`]: Lagrangians, Legendre transform, Hamiltonians, brackets, vector fields.
//! * [`conserved`]: conserved quantities with analytic functional derivatives.
//! * [`integrate`]: Lie-group Runge-Kutta integration and the closed-form B-phase solution.
//! * [`verify`]: numerical checks of involution, independence, kernels and gradients.
//! * [`cli`]: the `orbitex` command line front end.

pub mod algebra;
pub mod cli;
pub mod conserved;
pub mod dynamics;
pub mod integrate;
pub mod phases;
pub mod verify;

pub use algebra::{CMat3, GammaParams, Mat3, Vec3, C64};
pub use phases::PhaseId;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("gamma coefficients must be finite and positive, got {0:?}")]
    InvalidGamma([f64; 3]),
    #[error("group element component is not a rotation")]
    NotRotation,
    #[error("group element does not belong to the symmetry group of phase {0}")]
    GroupMismatch(&'static str),
    #[error("momentum/velocity map is near singular (condition number {0:e})")]
    SingularSolve(f64),
    #[error("state does not match phase {0}")]
    StateMismatch(&'static str),
    #[error("projection onto the orbit failed: distance {0:e} exceeds 0.1")]
    Projection(f64),
    #[error("integration failed at z = {z}: {source}")]
    Integration { z: f64, source: Box<Error> },
    #[error("constraint solve failed at z = {0}")]
    Constraint(f64),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
