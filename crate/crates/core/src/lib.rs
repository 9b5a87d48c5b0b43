// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time-optimal synthesis of single-qubit rotations from two alternating control axes.
//!
//! The controls rotate about `n_x = (1,0,0)` at unit speed and about
//! `n_v = (cosα, sinα, 0)` at speed `1/κ`. [`search::synthesize`] returns the cheapest
//! admissible sequence realizing a target rotation up to global phase, and
//! [`oracle::brute_force_min_time`] checks it against a discretized exhaustive search.

pub mod catalog;
pub mod decomposition;
pub mod error;
pub mod export;
pub mod geometry;
pub mod oracle;
pub mod search;
mod solve;

pub use error::{Error, Result};
pub use geometry::{
    compose, distance_up_to_phase, rot, Axis, ControlConfig, Generator, Mode, Pulse, PulseSequence,
    UnitQuaternion,
};
