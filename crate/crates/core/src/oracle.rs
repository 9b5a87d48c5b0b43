// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference search, independent of the catalog.
//!
//! For every length n and first generator, the first `n − 3` angles of an alternating
//! X/V word run over a grid and the last three are closed exactly by [`decompose3`], so
//! every grid point yields sequences that hit the target. A depth-first walk with
//! branch-and-bound keeps the K cheapest, which are then polished by coordinate descent.
//! The grid spacing bounds how far the result can sit above the true optimum.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{enumerate_templates_with, CatalogOptions, RegionPolicy, SequenceLength};
use crate::decomposition::{decompose3_unchecked, short_rewrites};
use crate::error::{domain, Error, Result};
use crate::geometry::{
    distance_up_to_phase, ControlConfig, Generator, Mode, PulseSequence, UnitQuaternion, TWO_PI,
};
use crate::search::{admissible, internal_word, prune_by_alternative, word_unitary};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleOptions {
    /// Samples per pulse-angle domain, at least 8.
    pub angle_grid: usize,
    /// Longest word searched, at least 1.
    pub max_len: usize,
    /// Discard anything costlier than this.
    pub cost_budget: Option<f64>,
    pub tolerance: f64,
    /// Grid candidates kept for polishing.
    pub top_k: usize,
    /// Branch-and-bound on partial cost; off means full enumeration.
    pub prune: bool,
    pub parallel: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            angle_grid: 256,
            max_len: 6,
            cost_budget: None,
            tolerance: 1e-9,
            top_k: 16,
            prune: true,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// Polished cost, an upper bound on the optimum over words up to `max_len`.
    pub cost: f64,
    pub sequence: PulseSequence,
    /// `cost − grid_error_bound` is a lower bound on that optimum.
    pub grid_error_bound: f64,
    pub residual: f64,
    /// Best cost before polishing.
    pub grid_cost: f64,
    /// Grid prefixes examined at full length.
    pub evaluated: u64,
}

#[derive(Debug, Clone)]
struct Hit {
    cost: f64,
    n: usize,
    first: Generator,
    prefix: Vec<u32>,
    closure: [f64; 3],
}

fn cmp_hits(a: &Hit, b: &Hit) -> Ordering {
    a.cost
        .total_cmp(&b.cost)
        .then(a.n.cmp(&b.n))
        .then(a.first.cmp(&b.first))
        .then_with(|| a.prefix.cmp(&b.prefix))
}

/// Bounded best-K list, cheapest first.
struct TopK {
    k: usize,
    items: Vec<Hit>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn threshold(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.k - 1].cost
        }
    }

    fn push(&mut self, h: Hit) {
        if h.cost >= self.threshold() {
            return;
        }
        let pos = self
            .items
            .partition_point(|x| cmp_hits(x, &h) == Ordering::Less);
        self.items.insert(pos, h);
        self.items.truncate(self.k);
    }
}

struct Grid {
    angles: Vec<f64>,
    x_inv: Vec<UnitQuaternion>,
    v_inv: Vec<UnitQuaternion>,
    min_cost: f64,
}

fn grid_for(config: &ControlConfig, m: usize) -> Grid {
    let step = TWO_PI / m as f64;
    let angles: Vec<f64> = match config.mode() {
        Mode::PositiveOnly => (1..m).map(|j| j as f64 * step).collect(),
        Mode::Bidirectional => (1..m)
            .map(|j| -std::f64::consts::PI + j as f64 * step)
            .filter(|t| t.abs() > 1e-12)
            .collect(),
    };
    let (nx, nv) = (config.n_x(), config.n_v());
    let min_abs = angles.iter().fold(f64::INFINITY, |a, t| a.min(t.abs()));
    let x: Vec<UnitQuaternion> = angles
        .iter()
        .map(|&t| UnitQuaternion::from_axis_angle(&nx, t))
        .collect();
    let v: Vec<UnitQuaternion> = angles
        .iter()
        .map(|&t| UnitQuaternion::from_axis_angle(&nv, t))
        .collect();
    Grid {
        x_inv: x.iter().map(|q| q.inverse()).collect(),
        v_inv: v.iter().map(|q| q.inverse()).collect(),
        angles,
        min_cost: min_abs * config.kappa(),
    }
}

fn gen_at(first: Generator, i: usize) -> Generator {
    if i % 2 == 0 {
        first
    } else {
        first.partner()
    }
}

/// Cheapest exact closure `A(θ₃)·B(θ₂)·A(θ₁) ≃ rest` over the decomposition branches,
/// skipped when even the middle pulse alone would push the total past `budget`.
fn close(
    rest: &UnitQuaternion,
    gens: [Generator; 3],
    config: &ControlConfig,
    tol: f64,
    budget: f64,
) -> Option<(f64, [f64; 3])> {
    let axes = [
        config.n_axis(gens[0]),
        config.n_axis(gens[1]),
        config.n_axis(gens[2]),
    ];
    // n_aᵀ R n_a = d² + (1 − d²)·cos θ₂ fixes the middle angle up to sign
    let d = axes[0].dot(&axes[1]);
    let v = rest.v();
    let vn = v.dot(&axes[0].vector());
    let r_aa = 1.0 - 2.0 * (v.norm_squared() - vn * vn);
    let cos2 = (r_aa - d * d) / (1.0 - d * d);
    if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&cos2) {
        return None;
    }
    let middle_floor = cost_of(gens[1], cos2.clamp(-1.0, 1.0).acos(), config);
    if middle_floor > budget {
        return None;
    }
    let (na, nb) = (axes[0].vector(), axes[1].vector());
    let m_na = rest.rotate(&na);
    let mt_na = rest.inverse().rotate(&na);
    let th2 = cos2.clamp(-1.0, 1.0).acos();
    let mut best: Option<(f64, [f64; 3])> = None;
    for t2 in [th2, -th2] {
        let (s, c) = t2.sin_cos();
        let cross = nb.cross(&na);
        let along = nb * (d * (1.0 - c));
        let b_na = na * c + cross * s + along;
        let bt_na = na * c - cross * s + along;
        let (Some(t3), Some(t1m)) = (
            signed_angle(&na, &b_na, &m_na),
            signed_angle(&na, &bt_na, &mt_na),
        ) else {
            // degenerate geometry: defer to the general solver
            return slow_close(rest, gens, &axes, config, tol);
        };
        let th = [config.wrap(-t1m), config.wrap(t2), config.wrap(t3)];
        let cost = cost_of(gens[0], th[0], config)
            + cost_of(gens[1], th[1], config)
            + cost_of(gens[2], th[2], config);
        if cost > budget || best.is_some_and(|b| cost >= b.0) {
            continue;
        }
        let u = UnitQuaternion::from_axis_angle(&axes[2], th[2])
            .compose(&UnitQuaternion::from_axis_angle(&axes[1], th[1]))
            .compose(&UnitQuaternion::from_axis_angle(&axes[0], th[0]));
        if distance_up_to_phase(&u, rest) <= tol {
            best = Some((cost, th));
        }
    }
    best
}

/// Signed angle about `n` from `p` to `q`, both assumed equally inclined to `n`.
fn signed_angle(
    n: &nalgebra::Vector3<f64>,
    p: &nalgebra::Vector3<f64>,
    q: &nalgebra::Vector3<f64>,
) -> Option<f64> {
    let pp = p - n * n.dot(p);
    let qp = q - n * n.dot(q);
    if pp.norm_squared() < 1e-18 || qp.norm_squared() < 1e-18 {
        return None;
    }
    Some(n.dot(&pp.cross(&qp)).atan2(pp.dot(&qp)))
}

fn slow_close(
    rest: &UnitQuaternion,
    gens: [Generator; 3],
    axes: &[crate::geometry::Axis; 3],
    config: &ControlConfig,
    tol: f64,
) -> Option<(f64, [f64; 3])> {
    let mut best: Option<(f64, [f64; 3])> = None;
    for dec in decompose3_unchecked(rest, &axes[0], &axes[1], &axes[2], false) {
        if distance_up_to_phase(&dec.unitary(), rest) > tol {
            continue;
        }
        let th = [
            config.wrap(dec.theta1),
            config.wrap(dec.theta2),
            config.wrap(dec.theta3),
        ];
        let c = cost_of(gens[0], th[0], config)
            + cost_of(gens[1], th[1], config)
            + cost_of(gens[2], th[2], config);
        if best.is_none_or(|b| c < b.0) {
            best = Some((c, th));
        }
    }
    best
}

fn cost_of(g: Generator, t: f64, config: &ControlConfig) -> f64 {
    match g {
        Generator::V => config.kappa() * t.abs(),
        _ => t.abs(),
    }
}

trait AxisOf {
    fn n_axis(&self, g: Generator) -> crate::geometry::Axis;
}

impl AxisOf for ControlConfig {
    fn n_axis(&self, g: Generator) -> crate::geometry::Axis {
        if g == Generator::X {
            self.n_x()
        } else {
            self.n_v()
        }
    }
}

struct Walk<'a> {
    config: &'a ControlConfig,
    grid: &'a Grid,
    n: usize,
    first: Generator,
    bound: f64,
    prune: bool,
    tol: f64,
    top: TopK,
    prefix: Vec<u32>,
    evaluated: u64,
}

impl Walk<'_> {
    /// `rest` is the target with the prefix so far stripped off its right end.
    fn dfs(&mut self, depth: usize, rest: UnitQuaternion, cost: f64) {
        let p = self.n - 3;
        if depth == p {
            self.evaluated += 1;
            self.leaf(&rest, cost);
            return;
        }
        let g = gen_at(self.first, depth);
        let table = if g == Generator::X {
            &self.grid.x_inv
        } else {
            &self.grid.v_inv
        };
        // the remaining prefix pulses cost at least this much
        let rest_floor = self.grid.min_cost * (p - depth - 1) as f64;
        let next_closure = [gen_at(self.first, p), gen_at(self.first, p + 1)];
        let a = self.config.n_axis(next_closure[0]).vector();
        let ab = self
            .config
            .n_axis(next_closure[0])
            .dot(&self.config.n_axis(next_closure[1]));
        for j in 0..table.len() {
            let c = cost + cost_of(g, self.grid.angles[j], self.config);
            let limit = self.bound.min(self.top.threshold());
            if self.prune && c + rest_floor >= limit {
                continue;
            }
            if depth + 1 == p && self.prune {
                // cheap look-ahead on the closure's middle angle before composing
                let inv = &table[j];
                let (w1, v1) = (rest.w(), rest.v());
                let (w2, v2) = (inv.w(), inv.v());
                let v = v2 * w1 + v1 * w2 + v1.cross(&v2);
                let vn = v.dot(&a);
                let r_aa = 1.0 - 2.0 * (v.norm_squared() - vn * vn);
                let cos2 = (r_aa - ab * ab) / (1.0 - ab * ab);
                if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&cos2) {
                    self.evaluated += 1;
                    continue;
                }
                if c + cost_of(next_closure[1], cos2.clamp(-1.0, 1.0).acos(), self.config) >= limit
                {
                    self.evaluated += 1;
                    continue;
                }
            }
            self.prefix.push(j as u32);
            self.dfs(depth + 1, rest.compose(&table[j]), c);
            self.prefix.pop();
        }
    }

    fn leaf(&mut self, rest: &UnitQuaternion, cost: f64) {
        let p = self.n - 3;
        let gens = [
            gen_at(self.first, p),
            gen_at(self.first, p + 1),
            gen_at(self.first, p + 2),
        ];
        let room = if self.prune {
            self.bound.min(self.top.threshold()) - cost
        } else {
            f64::INFINITY
        };
        if let Some((c, th)) = close(rest, gens, self.config, self.tol, room) {
            let total = cost + c;
            if total <= self.bound {
                self.top.push(Hit {
                    cost: total,
                    n: self.n,
                    first: self.first,
                    prefix: self.prefix.clone(),
                    closure: th,
                });
            }
        }
    }
}

fn hit_sequence(h: &Hit, angles: &[f64], config: &ControlConfig) -> Result<PulseSequence> {
    let mut raw: Vec<(Generator, f64)> = angles
        .iter()
        .enumerate()
        .map(|(i, &t)| (gen_at(h.first, i), t))
        .collect();
    let p = angles.len();
    for (k, &t) in h.closure.iter().enumerate() {
        raw.push((gen_at(h.first, p + k), t));
    }
    PulseSequence::canonical(&raw, config)
}

/// Coordinate descent on the prefix angles; the closure is re-solved at every step.
fn polish(
    h: &Hit,
    grid: &Grid,
    target: &UnitQuaternion,
    config: &ControlConfig,
    tol: f64,
    step0: f64,
) -> (f64, Vec<f64>, [f64; 3]) {
    let mut x: Vec<f64> = h.prefix.iter().map(|&j| grid.angles[j as usize]).collect();
    let p = x.len();
    let eval = |x: &[f64]| -> Option<(f64, [f64; 3])> {
        let mut u = UnitQuaternion::identity();
        let mut c = 0.0;
        for (i, &t) in x.iter().enumerate() {
            let g = gen_at(h.first, i);
            u = UnitQuaternion::from_axis_angle(&config.n_axis(g), t).compose(&u);
            c += cost_of(g, t, config);
        }
        let rest = target.compose(&u.inverse());
        let gens = [
            gen_at(h.first, p),
            gen_at(h.first, p + 1),
            gen_at(h.first, p + 2),
        ];
        close(&rest, gens, config, tol, f64::INFINITY).map(|(cc, th)| (c + cc, th))
    };
    let mut best = (h.cost, h.closure);
    if p == 0 {
        return (best.0, x, best.1);
    }
    let mut step = step0;
    let mut iters = 0;
    while step > 1e-10 && iters < 4000 {
        iters += 1;
        let mut improved = false;
        for i in 0..p {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] = config.wrap(y[i] + dir * step);
                if let Some(r) = eval(&y) {
                    if r.0 < best.0 - 1e-15 {
                        best = r;
                        x = y;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best.0, x, best.1)
}

/// Cheapest alternating X/V word of length ≤ `max_len` found on the angle grid, polished.
pub fn brute_force_min_time(
    target: &UnitQuaternion,
    config: &ControlConfig,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    if opts.angle_grid < 8 {
        return Err(domain("angle_grid must be at least 8"));
    }
    if opts.max_len < 1 {
        return Err(domain("max_len must be at least 1"));
    }
    let grid_error_bound =
        opts.max_len as f64 * (TWO_PI / opts.angle_grid as f64) * config.kappa().max(1.0);
    let grid = grid_for(config, opts.angle_grid);
    let exact_tol = 1e-12;

    let trivial: Vec<PulseSequence> = short_rewrites(target, config)
        .iter()
        .filter_map(|raw| PulseSequence::canonical(raw, config).ok())
        .collect();
    let trivial_best = trivial
        .iter()
        .map(|s| s.total_cost())
        .fold(f64::INFINITY, f64::min);
    let mut global = TopK::new(opts.top_k.max(1));
    let mut evaluated = 0u64;
    let budget = opts.cost_budget.unwrap_or(f64::INFINITY);
    for n in 3..=opts.max_len {
        let incumbent = global
            .items
            .first()
            .map_or(f64::INFINITY, |h| h.cost)
            .min(trivial_best);
        let bound = if opts.prune {
            budget.min(incumbent + grid_error_bound)
        } else {
            budget
        };
        let mut tasks: Vec<(Generator, Option<usize>)> = Vec::new();
        for first in [Generator::X, Generator::V] {
            if n == 3 {
                tasks.push((first, None));
            } else {
                tasks.extend((0..grid.angles.len()).map(|j| (first, Some(j))));
            }
        }
        let run = |&(first, j0): &(Generator, Option<usize>)| -> (Vec<Hit>, u64) {
            let mut w = Walk {
                config,
                grid: &grid,
                n,
                first,
                bound,
                prune: opts.prune,
                tol: exact_tol,
                top: TopK::new(opts.top_k.max(1)),
                prefix: Vec::new(),
                evaluated: 0,
            };
            match j0 {
                None => w.dfs(0, *target, 0.0),
                Some(j) => {
                    let g = first;
                    let c = cost_of(g, grid.angles[j], config);
                    let inv = if g == Generator::X {
                        grid.x_inv[j]
                    } else {
                        grid.v_inv[j]
                    };
                    if !(opts.prune && c >= bound) {
                        w.prefix.push(j as u32);
                        w.dfs(1, target.compose(&inv), c);
                    }
                }
            }
            (w.top.items, w.evaluated)
        };
        let results: Vec<(Vec<Hit>, u64)> = if opts.parallel {
            tasks.par_iter().map(run).collect()
        } else {
            tasks.iter().map(run).collect()
        };
        for (hits, ev) in results {
            evaluated += ev;
            for h in hits {
                global.push(h);
            }
        }
    }

    let grid_best = global
        .items
        .first()
        .map_or(f64::INFINITY, |h| h.cost)
        .min(trivial_best);
    let step0 = TWO_PI / opts.angle_grid as f64;
    let polish_one = |h: &Hit| {
        let (_, x, th) = polish(h, &grid, target, config, exact_tol, step0);
        let hh = Hit {
            closure: th,
            ..h.clone()
        };
        hit_sequence(&hh, &x, config)
            .ok()
            .map(|s| (s.total_cost(), s))
    };
    let polished: Vec<(f64, PulseSequence)> = if opts.parallel {
        global.items.par_iter().filter_map(polish_one).collect()
    } else {
        global.items.iter().filter_map(polish_one).collect()
    };
    let candidates = trivial
        .into_iter()
        .map(|s| (s.total_cost(), s))
        .chain(polished);
    let mut best: Option<(f64, PulseSequence, f64)> = None;
    for (c, s) in candidates {
        let Ok(u) = s.unitary(config) else { continue };
        let r = distance_up_to_phase(&u, target);
        if r > opts.tolerance {
            continue;
        }
        if best.as_ref().is_none_or(|b| c < b.0 && c <= budget) {
            best = Some((c, s, r));
        }
    }
    match best {
        Some((cost, sequence, residual)) => Ok(OracleResult {
            cost,
            sequence,
            grid_error_bound,
            residual,
            grid_cost: grid_best,
            evaluated,
        }),
        None => Err(Error::OracleMiss {
            best_residual: nearest_residual(target, config),
        }),
    }
}

fn nearest_residual(target: &UnitQuaternion, config: &ControlConfig) -> f64 {
    let (x, v) = (config.n_x(), config.n_v());
    decompose3_unchecked(target, &x, &v, &x, true)
        .into_iter()
        .chain(decompose3_unchecked(target, &v, &x, &v, true))
        .map(|d| distance_up_to_phase(&d.unitary(), target))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionCell {
    pub alpha: f64,
    pub t_x: f64,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionOptions {
    /// Samples per outer angle when looking for a surviving sequence.
    pub outer_grid: usize,
    /// Region bounds used to pick candidate rows; relaxed by default so pruning alone
    /// decides the shape.
    pub catalog: CatalogOptions,
    pub parallel: bool,
}

impl Default for RegionOptions {
    fn default() -> Self {
        Self {
            outer_grid: 12,
            catalog: CatalogOptions {
                kappa_one_regions: RegionPolicy::Relax,
                ..CatalogOptions::default()
            },
            parallel: true,
        }
    }
}

/// For each `(α, t_x)` cell: does some length-n row with that internal X angle, and
/// outer angles on a grid, give a sequence that meets the row's bounds and survives
/// [`prune_by_alternative`]?
pub fn region_scan(
    alphas: &[f64],
    t_xs: &[f64],
    n: usize,
    kappa: f64,
    mode: Mode,
    opts: &RegionOptions,
) -> Result<Vec<RegionCell>> {
    if n < 4 {
        return Err(domain("region scans need n ≥ 4"));
    }
    let configs: Vec<ControlConfig> = alphas
        .iter()
        .map(|&a| ControlConfig::new(a, kappa, mode))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, f64)> = (0..alphas.len())
        .flat_map(|i| t_xs.iter().map(move |&t| (i, t)))
        .collect();
    let eval = |&(i, t_x): &(usize, f64)| RegionCell {
        alpha: alphas[i],
        t_x,
        admissible: cell_admissible(&configs[i], t_x, n, opts),
    };
    Ok(if opts.parallel {
        cells.par_iter().map(eval).collect()
    } else {
        cells.iter().map(eval).collect()
    })
}

fn cell_admissible(config: &ControlConfig, t_x: f64, n: usize, opts: &RegionOptions) -> bool {
    let m = opts.outer_grid.max(2);
    let outer: Vec<f64> = match config.mode() {
        Mode::PositiveOnly => (1..=m)
            .map(|j| j as f64 * TWO_PI / (m + 1) as f64)
            .collect(),
        Mode::Bidirectional => (1..=m)
            .map(|j| -std::f64::consts::PI + j as f64 * TWO_PI / (m + 1) as f64)
            .filter(|t| t.abs() > 1e-9)
            .collect(),
    };
    let flips: [f64; 2] = [1.0, -1.0];
    for tpl in enumerate_templates_with(config, &opts.catalog) {
        if tpl.length != SequenceLength::Finite(n) {
            continue;
        }
        let Some(b) = tpl.internal else { continue };
        if !b.contains(t_x) {
            continue;
        }
        let flip_count = if matches!(tpl.signs, crate::catalog::SignRule::Pattern(_)) {
            2
        } else {
            1
        };
        for &flip in &flips[..flip_count] {
            let Some(inner) = internal_word(&tpl, t_x.abs(), flip, config) else {
                continue;
            };
            if word_unitary(&inner, config).is_none() {
                continue;
            }
            let (gf, gl) = (tpl.first(), tpl.last());
            for &a in &outer {
                for &c in &outer {
                    let mut raw = vec![(gf, a)];
                    raw.extend(inner.iter().copied());
                    raw.push((gl, c));
                    let wrapped: Vec<_> = raw.iter().map(|&(g, t)| (g, config.wrap(t))).collect();
                    if !admissible(&tpl, &wrapped, config) {
                        continue;
                    }
                    let Ok(seq) = PulseSequence::canonical(&wrapped, config) else {
                        continue;
                    };
                    if seq.len() == n && !prune_by_alternative(&seq, config) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// `alpha,t_x,admissible` rows with a header.
pub fn region_csv(cells: &[RegionCell]) -> String {
    let mut s = String::from("alpha,t_x,admissible\n");
    for c in cells {
        s.push_str(&format!(
            "{},{},{}\n",
            crate::geometry::sig(c.alpha, 12),
            crate::geometry::sig(c.t_x, 12),
            u8::from(c.admissible)
        ));
    }
    s
}
