//! Numerical toolkit for the variable-coefficient "good" Boussinesq equation
//! `rho y_tt + (sigma y_xx)_xx - (q y_x)_x + (y^2)_xx = 0` on `(0, l)` with
//! hinged ends and a boundary control acting on `sigma y_xx` at `x = l`.
//!
//! The crate is generic over the scalar type ([`Real`] is implemented for
//! `f32` and `f64`); the `*F64` aliases below cover the common case.

pub mod coefficients;
pub mod control;
pub mod error;
pub mod expr;
pub mod fd;
pub mod io;
pub mod linalg;
pub mod modal;
pub mod nonlinear;
pub mod observability;
pub mod scalar;
pub mod spectral;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use coefficients::{CoefficientSet, Grid, Profile, RawCoefficients};
pub use error::{Error, Result};
pub use scalar::Real;
pub use control::{MinNormControl, VerificationReport};
pub use fd::{SimulationOptions, SimulationResult};
pub use modal::{ControlSignal, ModalState, ModalTrajectory};
pub use nonlinear::FixedPointResult;
pub use spectral::{EigenPair, Spectrum};

pub type CoefficientSetF64 = CoefficientSet<f64>;
pub type GridF64 = Grid<f64>;
pub type ProfileF64 = Profile<f64>;
pub type SpectrumF64 = Spectrum<f64>;
pub type EigenPairF64 = EigenPair<f64>;
pub type ModalStateF64 = ModalState<f64>;
pub type ModalTrajectoryF64 = ModalTrajectory<f64>;
pub type ControlSignalF64 = ControlSignal<f64>;
pub type SimulationResultF64 = SimulationResult<f64>;
pub type MinNormControlF64 = MinNormControl<f64>;
pub type FixedPointResultF64 = FixedPointResult<f64>;
