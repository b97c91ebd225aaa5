//! Classical simulator of a two-photon variational quantum eigensolver for
//! the two-site lattice Schwinger model.
//!
//! The crate is layered bottom-up:
//!
//! * [`linalg`]: small dense complex matrices, states and a Jacobi eigensolver.
//! * [`photonics`]: waveplates, the six-angle ansatz and basis compilation.
//! * [`schwinger`]: the Hamiltonian, its spectrum, the order parameter.
//! * [`measurement`]: settings, shot sampling, dephasing noise.
//! * [`spsa`]: the optimizer and single VQE trials.
//! * [`experiments`]: sweeps, statistics and PCA over many trials.

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod measurement;
pub mod photonics;
pub mod schwinger;
pub mod seeding;
pub mod spsa;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityOperator, StateVector};
pub use measurement::{EnergyEstimator, KrausChannel, NoiseConfig, NoiseMode, Shots};
pub use photonics::ParamVector;
pub use schwinger::{PauliString, PauliTermSum, SchwingerConfig, SpectrumInfo};
pub use spsa::{SpsaMeta, TrialResult, VqeProblem};
