//! Simulation and analysis toolkit for a single high-spin nuclear qudit.
//!
//! All states use the descending-`m` basis: index `j` holds `|m = I - j>`.
//! Hamiltonians are in frequency units (Hz) and propagate as `exp(-i 2 pi H t)`.

pub mod catcode;
pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod hamiltonian;
pub mod linalg;
pub mod ode;
pub mod spincore;
pub mod tomography;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
