//! Horizontally filtered Bardina model on a flat channel: grid, operators,
//! filter, IMEX solver, weights and diagnostics.

pub mod banded;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod filter;
pub mod grid;
pub mod io;
pub mod operators;
pub mod solver;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
