//! Verification engine and collocation solver for hyperkähler Monge-Ampère
//! systems on ℂ⁴: the six reduced Poisson-bracket equations for potentials
//! H(q, ζ, v, ρ), the full symplectic system for potentials Ω, a pointwise
//! form-algebra oracle, and a least-squares collocation search for new
//! reduced solutions.

// tensor arithmetic is written with explicit index loops throughout
#![allow(clippy::needless_range_loop)]

pub mod brackets;
pub mod coords;
pub mod error;
pub mod expr;
pub mod forms;
pub mod jets;
pub mod potentials;
pub mod report;
pub mod residuals;
pub mod sample;
pub mod solver;

pub use error::{Error, Result};
