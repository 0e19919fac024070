//! Spectral simulation of the incompressible tangential Navier-Stokes
//! equation with variable viscosity on closed surfaces.
//!
//! The velocity is expanded in divergence-free toroidal vector harmonics on
//! the sphere, so the degree-1 block of a [`SpectralState`] is exactly its
//! Killing (rigid rotation) component. Around that representation the crate
//! provides:
//!
//! - [`geometry`]: sphere and torus quadrature grids with spectral surface
//!   differential operators (gradient, covariant derivative, strain).
//! - [`harmonics`]: scalar and toroidal transforms and the Leray projection.
//! - [`killing`]: Killing bases, the orthogonal projector onto them and the
//!   discrete Korn constant.
//! - [`operators`]: weak-form variable-viscosity Stokes operator, convective
//!   term and forcing evaluation.
//! - [`forcing`]: the forcing catalog with hypothesis flags and Monte-Carlo
//!   hypothesis checks.
//! - [`timestepper`]: IMEX Crank-Nicolson/Adams-Bashforth and RK4
//!   integrators with an energy ledger.
//! - [`diagnostics`]: norms, decay fits and the long-time identities checked
//!   along trajectories.

pub mod diagnostics;
pub mod error;
pub mod forcing;
pub mod geometry;
pub mod harmonics;
pub mod killing;
pub mod legendre;
pub mod operators;
pub mod quadrature;
pub mod random;
pub mod timestepper;

mod galerkin;
mod sht;

pub use error::{Error, Result};
pub use geometry::{SurfaceGrid, SurfaceKind, TangentialField, TangentialTensor, ViscosityField};
pub use harmonics::SpectralState;
pub use killing::KillingBasis;
