//! Noisy circuit simulation and verified phase estimation.
//!
//! The crate is organised bottom-up: [`sim`] and [`noise`] simulate circuits
//! as density matrices, [`hamiltonian`] builds target operators and their
//! exact evolution circuits, [`ansatz`] prepares trial states, [`vpe`] runs
//! the verification protocols, [`signal`] turns phase functions into
//! energies and [`experiments`] sweeps all of it over noise rates.

pub mod ansatz;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod linalg;
pub mod noise;
pub mod rng;
pub mod signal;
pub mod sim;
pub mod vpe;

pub use error::{Error, Result};
