// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate rotation: the product is ±identity and has no axis")]
    DegenerateRotation,

    #[error("synthesis failed: best residual {best_residual:.3e}")]
    SynthesisFailure { best_residual: f64 },

    #[error("oracle found nothing within tolerance: best residual {best_residual:.3e}")]
    OracleMiss { best_residual: f64 },

    #[error("internal invariant breach: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
