// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! The synthesis engine.
//!
//! Every admissible template is solved against the target. Three-pulse and limit rows
//! are solved exactly by [`decompose3`]. Longer rows have one free internal angle `u`:
//! the inner block `W(u)` is fixed by the internal relation, and `target ≃ L·W(u)·F`
//! is solvable for the outer angles exactly when `n_lᵀ(R_target − R_W(u))n_f = 0`, a
//! scalar equation in `u` solved by grid bracketing and Brent. The cheapest candidate
//! that no alternative decomposition beats is returned.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{
    self, enumerate_templates_with, outer_bounds, CatalogOptions, SequenceLength, StructureTemplate,
};
use crate::decomposition::{
    alternative_decompositions, decompose3, flank_residual, short_rewrites, solve_flanked,
};
use crate::error::{domain, Error, Result};
use crate::geometry::{
    chordal_distance, distance_up_to_phase, ControlConfig, Generator, Mode, Pulse, PulseSequence,
    UnitQuaternion, ZERO_ANGLE,
};
use crate::solve::brent;

/// Cost differences below this count as ties.
pub const COST_TIE: f64 = 1e-10;

/// A rewrite only counts as equivalent within this chordal distance; the quadratic
/// phase-blind distance would let angle drift of order 1e-6 pass as a cheaper rewrite.
pub const EQUIVALENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisOptions {
    /// Largest accepted residual, in `]0, 1e-6]`.
    pub tolerance: f64,
    /// Grid points over the internal angle range of each n ≥ 4 row.
    pub grid: usize,
    /// Number of runner-ups to report.
    pub runner_ups: usize,
    /// Discard candidates beaten by an alternative decomposition.
    pub prune: bool,
    pub catalog: CatalogOptions,
    /// Solve templates on the rayon pool.
    pub parallel: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            grid: 2048,
            runner_ups: 4,
            prune: true,
            catalog: CatalogOptions::default(),
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub templates_tried: usize,
    pub roots_found: usize,
    pub candidates: usize,
    pub prunes_applied: usize,
}

/// A verified sequence and the template it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub sequence: PulseSequence,
    pub template_id: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisResult {
    pub best: PulseSequence,
    pub residual: f64,
    pub template_id: String,
    /// Next-best distinct solutions, cheapest first.
    pub runner_ups: Vec<Candidate>,
    pub stats: SearchStats,
}

/// Re-simulates `seq` and returns its phase-blind distance to `target`. The total cost is
/// recomputed from the pulses and must agree with the stored one.
pub fn verify(seq: &PulseSequence, target: &UnitQuaternion, config: &ControlConfig) -> Result<f64> {
    let mut u = UnitQuaternion::identity();
    let mut cost = 0.0;
    for p in seq.pulses() {
        u = UnitQuaternion::from_axis_angle(&config.axis(p.generator)?, p.angle).compose(&u);
        cost += config.cost(p.generator, p.angle)?;
    }
    if (cost - seq.total_cost()).abs() > 1e-12 {
        return Err(Error::Internal(format!(
            "stored cost {} disagrees with recomputed {}",
            seq.total_cost(),
            cost
        )));
    }
    Ok(distance_up_to_phase(&u, target))
}

/// Builds a sequence of exactly these pulses, or `None` if any angle vanishes or two
/// neighbours share a generator.
fn exact_sequence(
    raw: &[(Generator, f64)],
    config: &ControlConfig,
    allow_zero_outer: bool,
) -> Option<PulseSequence> {
    let mut pulses = Vec::with_capacity(raw.len());
    let last = raw.len().saturating_sub(1);
    for (i, &(g, t)) in raw.iter().enumerate() {
        let p = Pulse::new(g, t, config).ok()?;
        if p.angle.abs() < ZERO_ANGLE {
            if allow_zero_outer && (i == 0 || i == last) {
                continue;
            }
            return None;
        }
        pulses.push(p);
    }
    PulseSequence::new(pulses).ok()
}

/// Whether `raw` (full length, zeros kept) meets every bound of `template`.
pub(crate) fn admissible(
    template: &StructureTemplate,
    raw: &[(Generator, f64)],
    config: &ControlConfig,
) -> bool {
    let angles: Vec<f64> = raw.iter().map(|&(_, t)| t).collect();
    if !template.signs.admits(&angles) {
        return false;
    }
    let n = raw.len();
    if let Some(b) = template.internal {
        let inner = &raw[1..n - 1];
        if !inner
            .iter()
            .filter(|(g, _)| *g == b.generator)
            .all(|&(_, t)| b.contains(t))
        {
            return false;
        }
    }
    if n >= 4 {
        let tx = raw[1..n - 1]
            .iter()
            .find(|(g, _)| *g == Generator::X)
            .map_or(0.0, |p| p.1);
        let tv = raw[1..n - 1]
            .iter()
            .find(|(g, _)| *g == Generator::V)
            .map_or(0.0, |p| p.1);
        if !outer_bounds(template, tx, tv, config).admits(raw[0].1, raw[n - 1].1) {
            return false;
        }
    }
    if let Some(tmax) = template.t_max {
        let cost: f64 = raw
            .iter()
            .map(|&(g, t)| config.cost(g, t).unwrap_or(f64::INFINITY))
            .sum();
        if cost > tmax + 1e-9 {
            return false;
        }
    }
    true
}

/// Internal pulses of an n ≥ 4 row for internal X magnitude `u`, in time order, and
/// the global sign applied to a bidirectional pattern.
pub(crate) fn internal_word(
    template: &StructureTemplate,
    u: f64,
    flip: f64,
    config: &ControlConfig,
) -> Option<Vec<(Generator, f64)>> {
    let n = template.generators.len();
    let tv = match config.mode() {
        Mode::PositiveOnly => {
            catalog::internal_relation(catalog::relation(catalog::RelationLabel::A), u, config)
                .ok()?
        }
        Mode::Bidirectional => 2.0 * ((u / 2.0).tan() / config.kappa()).atan(),
    };
    let signs: Vec<f64> = match &template.signs {
        catalog::SignRule::Pattern(p) => p.iter().map(|&s| f64::from(s) * flip).collect(),
        _ => vec![1.0; n],
    };
    Some(
        (1..n - 1)
            .map(|i| {
                let g = template.generators[i];
                let mag = if g == Generator::X { u } else { tv };
                (g, signs[i] * mag)
            })
            .collect(),
    )
}

pub(crate) fn word_unitary(
    raw: &[(Generator, f64)],
    config: &ControlConfig,
) -> Option<UnitQuaternion> {
    let mut u = UnitQuaternion::identity();
    for &(g, t) in raw {
        u = UnitQuaternion::from_axis_angle(&config.axis(g).ok()?, t).compose(&u);
    }
    Some(u)
}

/// All sequences following `template` that realize `target` and meet its bounds.
pub fn solve_fixed_structure(
    template: &StructureTemplate,
    target: &UnitQuaternion,
    config: &ControlConfig,
    options: &SynthesisOptions,
) -> Vec<PulseSequence> {
    solve_counted(template, target, config, options).0
}

fn solve_counted(
    template: &StructureTemplate,
    target: &UnitQuaternion,
    config: &ControlConfig,
    options: &SynthesisOptions,
) -> (Vec<PulseSequence>, usize) {
    let gens = &template.generators;
    // limit and three-pulse rows may degenerate to shorter words at zero outer angles
    let zero_outer_ok = template.length == SequenceLength::Infinite || gens.len() == 3;
    let mut out: Vec<PulseSequence> = Vec::new();
    let mut roots = 0;
    let accept = |raw: Vec<(Generator, f64)>, out: &mut Vec<PulseSequence>| {
        let wrapped: Vec<(Generator, f64)> =
            raw.iter().map(|&(g, t)| (g, config.wrap(t))).collect();
        if !admissible(template, &wrapped, config) {
            return;
        }
        let Some(seq) = exact_sequence(&wrapped, config, zero_outer_ok) else {
            return;
        };
        if verify(&seq, target, config).is_ok_and(|r| r <= options.tolerance)
            && !out.iter().any(|s| same_sequence(s, &seq))
        {
            out.push(seq);
        }
    };

    if gens.len() == 3 {
        let axes: Option<Vec<_>> = gens.iter().map(|&g| config.axis(g).ok()).collect();
        let Some(axes) = axes else { return (out, 0) };
        if let Ok(list) = decompose3(target, &axes[0], &axes[1], &axes[2]) {
            for d in list {
                roots += 1;
                accept(
                    vec![
                        (gens[0], d.theta1),
                        (gens[1], d.theta2),
                        (gens[2], d.theta3),
                    ],
                    &mut out,
                );
            }
        }
        return (out, roots);
    }
    let Some(bound) = template.internal else {
        return (out, 0);
    };
    let (Ok(nf), Ok(nl)) = (config.axis(gens[0]), config.axis(gens[gens.len() - 1])) else {
        return (out, 0);
    };
    let flips: &[f64] = match template.signs {
        catalog::SignRule::Pattern(_) => &[1.0, -1.0],
        _ => &[1.0],
    };
    let lo = bound.lower.max(0.0) + 1e-12;
    let hi = bound.upper - if bound.upper_inclusive { 0.0 } else { 1e-12 };
    if hi <= lo {
        return (out, 0);
    }
    let m = options.grid.max(8);
    for &flip in flips {
        let h = |u: f64| -> f64 {
            internal_word(template, u, flip, config)
                .and_then(|w| word_unitary(&w, config))
                .map_or(f64::NAN, |core| flank_residual(target, &core, &nf, &nl))
        };
        let grid: Vec<f64> = (0..=m)
            .map(|j| lo + (hi - lo) * j as f64 / m as f64)
            .collect();
        let vals: Vec<f64> = grid.iter().map(|&u| h(u)).collect();
        let mut found: Vec<f64> = Vec::new();
        for j in 0..m {
            let (a, b) = (vals[j], vals[j + 1]);
            if !(a.is_finite() && b.is_finite()) {
                continue;
            }
            let root = if a == 0.0 {
                Some(grid[j])
            } else if a.signum() != b.signum() && b != 0.0 {
                brent(&h, grid[j], grid[j + 1], 1e-15)
            } else if j + 1 == m && b == 0.0 {
                Some(grid[j + 1])
            } else {
                None
            };
            if let Some(r) = root {
                if !found.iter().any(|f| (f - r).abs() < 1e-8) {
                    found.push(r);
                }
            }
        }
        for u in found {
            roots += 1;
            let Some(inner) = internal_word(template, u, flip, config) else {
                continue;
            };
            let Some(core) = word_unitary(&inner, config) else {
                continue;
            };
            let Some((tf, tl)) = solve_flanked(target, &core, &nf, &nl) else {
                continue;
            };
            let mut raw = vec![(gens[0], tf)];
            raw.extend(inner);
            raw.push((gens[gens.len() - 1], tl));
            accept(raw, &mut out);
        }
    }
    (out, roots)
}

fn same_sequence(a: &PulseSequence, b: &PulseSequence) -> bool {
    a.len() == b.len()
        && a.pulses()
            .iter()
            .zip(b.pulses())
            .all(|(p, q)| p.generator == q.generator && (p.angle - q.angle).abs() < 1e-8)
}

/// True when some contiguous piece of `candidate` has an equivalent rewrite that lowers
/// the total cost by more than the tie threshold.
pub fn prune_by_alternative(candidate: &PulseSequence, config: &ControlConfig) -> bool {
    cheaper_alternative(candidate, config).is_some()
}

/// The first strictly cheaper equivalent found by [`prune_by_alternative`].
pub fn cheaper_alternative(
    candidate: &PulseSequence,
    config: &ControlConfig,
) -> Option<PulseSequence> {
    let raw = candidate.raw();
    let n = raw.len();
    let Ok(target) = candidate.unitary(config) else {
        return None;
    };
    for len in (1..=n).rev() {
        for start in 0..=n - len {
            let Ok(sub) = PulseSequence::new(candidate.pulses()[start..start + len].to_vec())
            else {
                continue;
            };
            for alt in alternative_decompositions(&sub, config) {
                let mut spliced = raw[..start].to_vec();
                spliced.extend(alt.raw());
                spliced.extend_from_slice(&raw[start + len..]);
                let Ok(seq) = PulseSequence::canonical(&spliced, config) else {
                    continue;
                };
                if seq.total_cost() < candidate.total_cost() - COST_TIE
                    && seq
                        .unitary(config)
                        .is_ok_and(|u| chordal_distance(&u, &target) <= EQUIVALENCE_TOL)
                {
                    return Some(seq);
                }
            }
        }
    }
    None
}

fn tie_key(c: &Candidate) -> (bool, usize, Vec<f64>) {
    (
        c.sequence.is_infinite(),
        c.sequence.len(),
        c.sequence.pulses().iter().map(|p| p.angle.abs()).collect(),
    )
}

fn cmp_key(a: &(bool, usize, Vec<f64>), b: &(bool, usize, Vec<f64>)) -> Ordering {
    a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then_with(|| {
        for (x, y) in a.2.iter().zip(&b.2) {
            match x.total_cmp(y) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    })
}

/// Sorts by cost; runs of costs within [`COST_TIE`] of their cheapest member are then
/// ordered finite first, shorter first, then by angle magnitudes.
pub(crate) fn order_candidates(list: &mut [Candidate]) {
    list.sort_by(|a, b| a.sequence.total_cost().total_cmp(&b.sequence.total_cost()));
    let mut start = 0;
    while start < list.len() {
        let base = list[start].sequence.total_cost();
        let mut end = start + 1;
        while end < list.len() && list[end].sequence.total_cost() <= base + COST_TIE {
            end += 1;
        }
        list[start..end].sort_by(|a, b| cmp_key(&tie_key(a), &tie_key(b)));
        start = end;
    }
}

fn trivial_candidates(target: &UnitQuaternion, config: &ControlConfig, tol: f64) -> Vec<Candidate> {
    let mut out = Vec::new();
    for raw in short_rewrites(target, config) {
        let Ok(seq) = PulseSequence::canonical(&raw, config) else {
            continue;
        };
        let Ok(residual) = verify(&seq, target, config) else {
            continue;
        };
        if residual > tol {
            continue;
        }
        let word: String = seq
            .pulses()
            .iter()
            .map(|p| format!("{:?}", p.generator))
            .collect();
        out.push(Candidate {
            template_id: format!("trivial:n{}:{}", seq.len(), word),
            residual,
            sequence: seq,
        });
    }
    out
}

/// The minimum-cost admissible sequence realizing `target`.
pub fn synthesize(
    target: &UnitQuaternion,
    config: &ControlConfig,
    options: &SynthesisOptions,
) -> Result<SynthesisResult> {
    if !(options.tolerance > 0.0 && options.tolerance <= 1e-6) {
        return Err(domain("tolerance must lie in ]0, 1e-6]"));
    }
    let templates = enumerate_templates_with(config, &options.catalog);
    let solve = |t: &StructureTemplate| {
        let (seqs, roots) = solve_counted(t, target, config, options);
        let cands: Vec<Candidate> = seqs
            .into_iter()
            .filter_map(|s| {
                let residual = verify(&s, target, config).ok()?;
                Some(Candidate {
                    sequence: s,
                    template_id: t.id.clone(),
                    residual,
                })
            })
            .collect();
        (cands, roots)
    };
    let per_template: Vec<(Vec<Candidate>, usize)> = if options.parallel {
        templates.par_iter().map(solve).collect()
    } else {
        templates.iter().map(solve).collect()
    };
    let mut stats = SearchStats {
        templates_tried: templates.len(),
        ..Default::default()
    };
    let mut all = trivial_candidates(target, config, options.tolerance);
    for (c, r) in per_template {
        stats.roots_found += r;
        all.extend(c);
    }
    stats.candidates = all.len();
    if all.is_empty() {
        return Err(Error::SynthesisFailure {
            best_residual: best_residual_anywhere(target, config),
        });
    }
    order_candidates(&mut all);

    let mut kept: Vec<Candidate> = Vec::new();
    for c in all {
        if kept.len() > options.runner_ups {
            break;
        }
        if kept.iter().any(|k| same_sequence(&k.sequence, &c.sequence)) {
            continue;
        }
        if options.prune && prune_by_alternative(&c.sequence, config) {
            stats.prunes_applied += 1;
            continue;
        }
        kept.push(c);
    }
    if kept.is_empty() {
        return Err(Error::SynthesisFailure {
            best_residual: best_residual_anywhere(target, config),
        });
    }
    let best = kept.remove(0);
    Ok(SynthesisResult {
        best: best.sequence,
        residual: best.residual,
        template_id: best.template_id,
        runner_ups: kept,
        stats,
    })
}

/// Smallest residual reachable by an X–V–X or V–X–V product, reported on failure.
fn best_residual_anywhere(target: &UnitQuaternion, config: &ControlConfig) -> f64 {
    let mut best = f64::INFINITY;
    for [a, b, c] in [
        [Generator::X, Generator::V, Generator::X],
        [Generator::V, Generator::X, Generator::V],
    ] {
        let (Ok(na), Ok(nb), Ok(nc)) = (config.axis(a), config.axis(b), config.axis(c)) else {
            continue;
        };
        for d in crate::decomposition::decompose3_unchecked(target, &na, &nb, &nc, true) {
            best = best.min(distance_up_to_phase(&d.unitary(), target));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rot, Axis};
    use std::f64::consts::PI;

    fn cfg(alpha: f64, kappa: f64, mode: Mode) -> ControlConfig {
        ControlConfig::new(alpha, kappa, mode).unwrap()
    }

    fn z_pi() -> UnitQuaternion {
        UnitQuaternion::from_axis_angle(&Axis::z_hat(), PI)
    }

    #[test]
    fn identity_gives_empty() {
        let c = cfg(1.0, 0.5, Mode::PositiveOnly);
        let r = synthesize(
            &UnitQuaternion::identity(),
            &c,
            &SynthesisOptions::default(),
        )
        .unwrap();
        assert!(r.best.is_empty());
        assert_eq!(r.best.total_cost(), 0.0);
    }

    #[test]
    fn on_axis_target_is_one_pulse() {
        let c = cfg(1.0, 0.5, Mode::PositiveOnly);
        let r = synthesize(
            &rot(Generator::X, 1.2, &c).unwrap(),
            &c,
            &SynthesisOptions::default(),
        )
        .unwrap();
        assert_eq!(r.best.len(), 1);
        assert!((r.best.total_cost() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn euler_row_at_right_angle() {
        let c = cfg(PI / 2.0, 1.0, Mode::PositiveOnly);
        let t = enumerate_templates_with(&c, &CatalogOptions::default())
            .into_iter()
            .find(|t| t.generators == vec![Generator::V, Generator::X, Generator::V])
            .unwrap();
        let sols = solve_fixed_structure(&t, &z_pi(), &c, &SynthesisOptions::default());
        assert!(!sols.is_empty());
        let middle = |s: &PulseSequence| {
            s.pulses()
                .iter()
                .find(|p| p.generator == Generator::X)
                .unwrap()
                .angle
        };
        assert!(sols.iter().any(|s| (middle(s) - PI).abs() < 1e-9));
    }

    #[test]
    fn limit_row_recovers_pure_q() {
        let c = cfg(1.0, 0.9, Mode::PositiveOnly);
        let target = rot(Generator::Q, 0.7, &c).unwrap();
        let t = enumerate_templates_with(&c, &CatalogOptions::default())
            .into_iter()
            .find(|t| t.generators.contains(&Generator::Q))
            .unwrap();
        let sols = solve_fixed_structure(&t, &target, &c, &SynthesisOptions::default());
        assert!(sols
            .iter()
            .any(|s| s.len() == 1 && (s.pulses()[0].angle - 0.7).abs() < 1e-9));
    }

    #[test]
    fn four_pulses_for_slow_example() {
        let c = cfg(PI / 3.0, 0.25, Mode::PositiveOnly);
        let r = synthesize(&z_pi(), &c, &SynthesisOptions::default()).unwrap();
        assert_eq!(r.best.len(), 4, "{:?}", r.best);
        assert!(r.residual <= 1e-9);
        assert!(r
            .runner_ups
            .iter()
            .all(|c| c.sequence.total_cost() >= r.best.total_cost()));
    }

    #[test]
    fn verify_cases() {
        let c = cfg(PI / 2.0, 1.0, Mode::PositiveOnly);
        assert_eq!(
            verify(&PulseSequence::empty(), &UnitQuaternion::identity(), &c).unwrap(),
            0.0
        );
        let seq = PulseSequence::canonical(&[(Generator::X, PI), (Generator::V, PI)], &c).unwrap();
        let target = rot(Generator::V, PI, &c)
            .unwrap()
            .compose(&rot(Generator::X, PI, &c).unwrap());
        assert!(verify(&seq, &target, &c).unwrap() < 1e-12);
        let bumped =
            PulseSequence::canonical(&[(Generator::X, PI + 1e-3), (Generator::V, PI)], &c).unwrap();
        let r = verify(&bumped, &target, &c).unwrap();
        assert!(r > 1e-8 && r < 1e-5);
    }

    #[test]
    fn single_pulse_never_pruned() {
        let c = cfg(1.0, 0.5, Mode::PositiveOnly);
        let seq = PulseSequence::canonical(&[(Generator::X, 0.8)], &c).unwrap();
        assert!(!prune_by_alternative(&seq, &c));
    }

    #[test]
    fn four_pulses_pruned_at_right_angle() {
        let c = cfg(PI / 2.0, 1.0, Mode::PositiveOnly);
        let seq = PulseSequence::canonical(
            &[
                (Generator::X, 1.0),
                (Generator::V, 3.6),
                (Generator::X, 3.6),
                (Generator::V, 1.0),
            ],
            &c,
        )
        .unwrap();
        assert!(prune_by_alternative(&seq, &c));
    }

    #[test]
    fn tie_order_is_total() {
        let c = cfg(PI / 2.0, 1.0, Mode::PositiveOnly);
        let mk = |raw: &[(Generator, f64)]| Candidate {
            sequence: PulseSequence::canonical(raw, &c).unwrap(),
            template_id: String::new(),
            residual: 0.0,
        };
        let mut list = vec![
            mk(&[(Generator::X, 0.5), (Generator::V, 0.5)]),
            mk(&[(Generator::X, 1.0)]),
            mk(&[(Generator::V, 0.2)]),
        ];
        order_candidates(&mut list);
        assert_eq!(list[0].sequence.len(), 1);
        assert_eq!(list[0].sequence.pulses()[0].generator, Generator::V);
        assert_eq!(list[1].sequence.len(), 1);
    }

    #[test]
    fn bad_tolerance_is_domain_error() {
        let c = cfg(1.0, 0.5, Mode::PositiveOnly);
        let opts = SynthesisOptions {
            tolerance: 1e-3,
            ..Default::default()
        };
        assert!(matches!(
            synthesize(&z_pi(), &c, &opts),
            Err(Error::Domain(_))
        ));
    }

    /// Plants an admissible instance of every n ≥ 4 row and checks the solver finds it
    /// or something cheaper.
    #[test]
    fn planted_rows_are_recovered() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let configs = [
            cfg(PI / 3.0, 0.5, Mode::Bidirectional),
            cfg(1.0, 0.8, Mode::Bidirectional),
            cfg(2.2, 0.3, Mode::Bidirectional),
            cfg(PI / 3.0, 0.25, Mode::PositiveOnly),
            cfg(1.0, 0.75, Mode::PositiveOnly),
        ];
        let opts = SynthesisOptions {
            prune: false,
            ..Default::default()
        };
        let mut planted = 0;
        for c in &configs {
            for t in enumerate_templates_with(c, &CatalogOptions::default()) {
                let (Some(n), Some(b)) = (t.n(), t.internal) else {
                    continue;
                };
                if n < 4 {
                    continue;
                }
                let hint = |i: usize| match &t.signs {
                    catalog::SignRule::Pattern(p) => f64::from(p[i]),
                    _ => 1.0,
                };
                for _ in 0..200 {
                    let u = rng.gen_range(b.lower.max(0.0)..b.upper);
                    let flip = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let Some(inner) = internal_word(&t, u, flip, c) else {
                        continue;
                    };
                    let first = c.wrap(flip * hint(0) * rng.gen_range(0.01..PI));
                    let last = c.wrap(flip * hint(n - 1) * rng.gen_range(0.01..PI));
                    let mut raw = vec![(t.first(), first)];
                    raw.extend(inner);
                    raw.push((t.last(), last));
                    if !admissible(&t, &raw, c) {
                        continue;
                    }
                    let seq = PulseSequence::canonical(&raw, c).unwrap();
                    let target = word_unitary(&raw, c).unwrap();
                    let found = solve_fixed_structure(&t, &target, c, &opts);
                    let best = found
                        .iter()
                        .map(PulseSequence::total_cost)
                        .fold(f64::INFINITY, f64::min);
                    assert!(
                        best <= seq.total_cost() + 1e-9,
                        "{} {:?} best {best}",
                        t.id,
                        raw
                    );
                    planted += 1;
                }
            }
        }
        assert!(planted > 100, "{planted}");
    }
}
