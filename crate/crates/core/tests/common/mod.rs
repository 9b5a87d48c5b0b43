// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use su2opt::UnitQuaternion;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on SU(2) by rejection from the 4-ball.
pub fn random_target(rng: &mut ChaCha8Rng) -> UnitQuaternion {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n: f64 = v.iter().map(|x| x * x).sum();
        if n > 0.01 && n < 1.0 {
            return UnitQuaternion::new(v[0], v[1], v[2], v[3]).unwrap();
        }
    }
}

pub fn targets(seed: u64, count: usize) -> Vec<UnitQuaternion> {
    let mut r = rng(seed);
    (0..count).map(|_| random_target(&mut r)).collect()
}
