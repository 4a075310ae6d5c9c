//! Simulation of a time-multiplexed fiber-loop photonic C-NOT gate.
//!
//! The crate covers the whole chain: a layered beamsplitter description of
//! the post-selected gate ([`circuit`]), its compilation into per-round
//! polarization rotations on time bins ([`tmloop`]), multi-photon
//! evolution with partial distinguishability and lossy threshold detection
//! ([`fock`]), the pair source ([`source`]), the error budget
//! ([`budget`]), polarization tomography ([`tomo`]) and the end-to-end
//! pipelines ([`experiment`]).

pub mod circuit;
pub mod error;
pub mod fock;
pub mod matrix;
pub mod source;
pub mod budget;
pub mod experiment;
pub mod tmloop;
pub mod tomo;

pub use error::{Error, Result};
pub use matrix::{c64, ComplexMatrix, C64};
