// SPDX-License-Identifier: Apache-2.0

//! Numerical free additive convolution of probability measures on the real
//! line, with tools for free infinitely divisible laws and the free central
//! limit theorem.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod infdiv;
pub mod measures;
pub mod quad;
pub mod subordination;
pub mod transforms;

pub use error::{Error, Result};
pub use infdiv::GeneratingPair;
pub use measures::{DistanceKind, Family, FiniteMeasure, Measure};
pub use subordination::{FreeSum, SolverConfig};
pub use transforms::UpperHalfPoint;
