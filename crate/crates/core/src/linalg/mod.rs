//! Small self-contained linear algebra kernels.

pub mod banded;
pub mod hermitian;
pub mod jacobi;

pub use banded::{LdlBand, SymBand};
pub use hermitian::{hermitian_condition, HermitianCholesky};
pub use jacobi::{symmetric_eigen, SymmetricEigen};
