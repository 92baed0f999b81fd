//! Stochastic subspace correction (randomized Schwarz) solvers for SPD problems,
//! with an overlapping domain-decomposition splitting of a 2D Poisson problem,
//! fault-injection scenarios and dense reference oracles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod error;
pub mod experiment;
pub mod faults;
pub mod fem;
pub mod iteration;
pub mod oracle;
pub mod rng;
pub mod sparse;
pub mod splitting;
pub mod verify;

pub use error::{Error, Result};
