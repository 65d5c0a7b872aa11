//! Quantum Fisher information growth under parameter-dependent Lindblad
//! dynamics: exact QFI and its rate, growth-rate bounds, closed-form bound
//! curves and the oscillator and qubit scenarios built on them.

pub mod bounds;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod scenarios;

pub use error::{Error, Result};
