//! Iterative Bayesian phase estimation with a freshly sampled Hamiltonian
//! at every repetition of the controlled evolution.
//!
//! - [`hamiltonian`]: Pauli-sum Hamiltonians, the term-list text format and
//!   dense matrices.
//! - [`solver`]: exact diagonalization and time evolution.
//! - [`sampler`]: hedged importance sampling and uniform subsampling of
//!   Hamiltonian terms, with closed-form estimator variances.
//! - [`phase`]: grid posterior, experiment design, interferometer
//!   simulation and end-to-end sessions.
//! - [`bounds`]: computable forms of the perturbation bounds and numerical
//!   checkers that compare them against exact results.

pub mod bounds;
pub mod error;
pub mod hamiltonian;
pub mod phase;
pub mod rng;
pub mod sampler;
pub mod solver;

pub use error::{Error, Result};
