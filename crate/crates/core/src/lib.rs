//! Decoherence-free subspaces and subsystems for collective noise.
//!
//! The crate builds the DFS bases of the weak (single-axis) and strong
//! (three-axis) collective decoherence models, verifies their stabilizer and
//! error-detection properties, certifies encoded universality by Lie-algebra
//! closure, compiles encoded gates into exchange-pulse schedules and integrates
//! the Markovian master equation to show that encoded information survives.

pub mod basis;
pub mod cli;
pub mod compiler;
pub mod config;
pub mod error;
pub mod lie;
pub mod lindblad;
pub mod matrix;
pub mod operators;
pub mod par;
pub mod random;
pub mod report;
pub mod stabilizer;

pub use error::{Error, Result};
