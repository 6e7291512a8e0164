// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {re} + {im}i is not in the open upper half-plane")]
    NotUpperHalfPlane { re: f64, im: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("target {re} + {im}i lies outside the invertibility domain")]
    OutsideInvertibilityDomain { re: f64, im: f64 },

    #[error("inversion window too small: mass deficit {deficit:e} on [{lo}, {hi}]")]
    WindowTooSmall { lo: f64, hi: f64, deficit: f64 },

    #[error("moment precondition violated: {0}")]
    MomentPrecondition(String),

    #[error("no norming constant: {0}")]
    NoNormingConstant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
