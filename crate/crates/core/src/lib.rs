//! Finite-dimensional Wick calculus on Gaussian noise: Skorokhod integrals,
//! randomized-shift partition functions, intersection local times, discrete
//! polymers and Wick-type stochastic heat equations.

pub mod acceptance;
pub mod basis;
pub mod cli;
pub mod error;
pub mod milt;
pub mod paths;
pub mod polymers;
pub mod quadrature;
pub mod rng;
pub mod she;
pub mod shifts;
pub mod skorokhod;
pub mod stats;

pub use error::{Result, WickError};
