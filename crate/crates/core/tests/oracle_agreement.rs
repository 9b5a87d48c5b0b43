// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Synthesis against the exhaustive grid search on a small seeded suite.

mod common;

use std::f64::consts::PI;

use su2opt::oracle::{brute_force_min_time, OracleOptions};
use su2opt::search::{synthesize, SynthesisOptions};
use su2opt::{ControlConfig, Mode, PulseSequence};

/// n ≥ 4 bidirectional sign patterns of the structure tables, in time order.
const BIDI_PATTERNS: [&[i8]; 4] = [
    &[1, 1, -1, -1],
    &[1, -1, -1, 1],
    &[1, 1, -1, -1, 1],
    &[1, -1, -1, 1, 1],
];

fn tabulated_bidi(seq: &PulseSequence) -> bool {
    let s: Vec<i8> = seq
        .pulses()
        .iter()
        .map(|p| if p.angle < 0.0 { -1 } else { 1 })
        .collect();
    s.len() <= 3
        || BIDI_PATTERNS.iter().any(|p| {
            p.len() == s.len()
                && (p.iter().zip(&s).all(|(a, b)| a == b)
                    || p.iter().zip(&s).all(|(a, b)| a == &-b))
        })
}

fn agree(alpha: f64, kappa: f64, mode: Mode, seed: u64, count: usize) {
    let c = ControlConfig::new(alpha, kappa, mode).unwrap();
    let opts = OracleOptions {
        angle_grid: 96,
        max_len: 5,
        ..Default::default()
    };
    let mut off_table = 0;
    for (i, t) in common::targets(seed, count).iter().enumerate() {
        let s = synthesize(t, &c, &SynthesisOptions::default()).unwrap();
        let o = brute_force_min_time(t, &c, &opts).unwrap();
        // The polished oracle returns a verified sequence. In positive mode it never beats
        // synthesis. In bidirectional mode it may, but only with a sign pattern that has
        // no row, i.e. one that approximates a limit word with more than three parts.
        if o.cost < s.best.total_cost() - 1e-7 {
            assert!(
                mode == Mode::Bidirectional && !tabulated_bidi(&o.sequence),
                "#{i}: oracle {:?} {} < synth {}",
                o.sequence.raw(),
                o.cost,
                s.best.total_cost()
            );
            off_table += 1;
            continue;
        }
        // finite synthesis results within the oracle's length reach are matched
        if !s.best.is_infinite() && s.best.len() <= opts.max_len {
            assert!(
                o.cost - s.best.total_cost() <= o.grid_error_bound,
                "#{i}: {} vs {}",
                o.cost,
                s.best.total_cost()
            );
        }
    }
    assert!(
        off_table <= count / 2,
        "{off_table} of {count} beaten off-table"
    );
}

#[test]
fn slow_positive() {
    agree(PI / 3.0, 0.25, Mode::PositiveOnly, 21, 6);
}

#[test]
fn fast_positive() {
    agree(1.0, 0.75, Mode::PositiveOnly, 22, 6);
}

#[test]
fn bidirectional() {
    agree(1.2, 0.6, Mode::Bidirectional, 23, 12);
}
