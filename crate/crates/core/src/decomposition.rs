// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact rewrites of rotations about the control axes.
//!
//! [`decompose3`] splits any rotation into three rotations about given axes (when
//! possible), [`solve_flanked`] fits two outer rotations around a fixed core,
//! [`conjugate_split`] trades `A(δ)B(t)A(δ)` for `B(τ)A(μ)B(τ)` and
//! [`reflect_single`] rewrites `A(t)` as `B(t*)A(−t)B(t*)`. These feed
//! [`alternative_decompositions`], which the search uses to discard sequences that
//! have a cheaper equivalent.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::{
    distance_up_to_phase, skew, wrap_pi, Axis, ControlConfig, Generator, Mode, PulseSequence,
    UnitQuaternion, ZERO_ANGLE,
};
use crate::solve::gauss_newton_2d;

/// Recomposition must reproduce the input at least this well.
pub const RECOMPOSE_TOL: f64 = 1e-12;

/// Slack on the existence inequality, absorbing rounding in the matrix entries.
pub const EXISTENCE_SLACK: f64 = 1e-12;

/// Skew matrix with `rod(v)·w = v × w`.
pub fn rod(v: &Vector3<f64>) -> Matrix3<f64> {
    skew(v)
}

/// `exp(θ·rod(n))`, the SO(3) rotation by θ about `n`.
fn rodrigues(n: &Axis, theta: f64) -> Matrix3<f64> {
    let k = rod(&n.vector());
    Matrix3::identity() + k * theta.sin() + k * k * (1.0 - theta.cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// `C(θ₃)·B(θ₂)·A(θ₁)` with `axes = (A, B, C)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleDecomposition {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub axes: (Axis, Axis, Axis),
    pub branch: Branch,
}

impl TripleDecomposition {
    pub fn unitary(&self) -> UnitQuaternion {
        let (a, b, c) = self.axes;
        UnitQuaternion::from_axis_angle(&c, self.theta3)
            .compose(&UnitQuaternion::from_axis_angle(&b, self.theta2))
            .compose(&UnitQuaternion::from_axis_angle(&a, self.theta1))
    }
}

/// Signed angle about `n` taking `p` to `q`; `None` when `p` is (anti)parallel to `n`.
fn angle_about(n: &Vector3<f64>, p: &Vector3<f64>, q: &Vector3<f64>) -> Option<f64> {
    let pp = p - n * n.dot(p);
    let qp = q - n * n.dot(q);
    if pp.norm() < 1e-9 || qp.norm() < 1e-9 {
        return None;
    }
    Some(n.dot(&p.cross(q)).atan2(p.dot(q) - p.dot(n) * q.dot(n)))
}

/// Angle of `q` read as a rotation about `n` (assumed to be its axis).
fn angle_along(q: &UnitQuaternion, n: &Axis) -> f64 {
    wrap_pi(2.0 * q.v().dot(&n.vector()).atan2(q.w()))
}

/// Existence inequality slack for [`decompose3`]: right side minus left side.
/// Negative means no decomposition exists.
pub fn existence_margin(u: &UnitQuaternion, a: &Axis, b: &Axis, c: &Axis) -> f64 {
    let r = u.rotation_matrix();
    let (na, nb, nc) = (a.vector(), b.vector(), c.vector());
    let lhs = nc.dot(&((r - nb * nb.transpose()) * na)).abs();
    let rhs =
        (1.0 - nc.dot(&nb).powi(2)).max(0.0).sqrt() * (1.0 - na.dot(&nb).powi(2)).max(0.0).sqrt();
    rhs - lhs
}

/// The inequality [`decompose3`] uses to decide existence.
pub fn decomposition_exists(u: &UnitQuaternion, a: &Axis, b: &Axis, c: &Axis) -> bool {
    existence_margin(u, a, b, c) >= -EXISTENCE_SLACK
}

/// All `(θ₁, θ₂, θ₃)` in `]−π, π]` with `C(θ₃)·B(θ₂)·A(θ₁) ≃ u`.
pub fn decompose3(
    u: &UnitQuaternion,
    a: &Axis,
    b: &Axis,
    c: &Axis,
) -> Result<Vec<TripleDecomposition>> {
    if a.dot(b).abs() > 1.0 - 1e-12 || b.dot(c).abs() > 1.0 - 1e-12 {
        return Err(domain("adjacent decomposition axes must not be parallel"));
    }
    if !decomposition_exists(u, a, b, c) {
        return Ok(Vec::new());
    }
    Ok(decompose3_unchecked(u, a, b, c, false))
}

/// Like [`decompose3`] but, when no exact solution exists, returns the nearest
/// triple obtained by clamping the discriminant; callers must check the residual.
pub(crate) fn decompose3_unchecked(
    u: &UnitQuaternion,
    a: &Axis,
    b: &Axis,
    c: &Axis,
    allow_inexact: bool,
) -> Vec<TripleDecomposition> {
    let r = u.rotation_matrix();
    let (na, nb, nc) = (a.vector(), b.vector(), c.vector());
    let k = rod(&nb);
    let k2 = k * k;
    let ca = -nc.dot(&(k2 * na));
    let cb = nc.dot(&(k * na));
    let cc = nc.dot(&((r - Matrix3::identity() - k2) * na));
    let disc = (ca * ca + cb * cb - cc * cc).max(0.0);
    let base = cb.atan2(ca);
    let spread = disc.sqrt().atan2(cc);
    let mut branches = vec![(Branch::Plus, wrap_pi(base + spread))];
    if spread.abs() > 1e-12 {
        branches.push((Branch::Minus, wrap_pi(base - spread)));
    }

    let mut out = Vec::with_capacity(2);
    for (branch, theta2) in branches {
        let v_a = rodrigues(b, -theta2) * nc;
        let w_a = r.transpose() * nc;
        let v_c = rodrigues(b, theta2) * na;
        let w_c = r * na;
        let t1 = angle_about(&na, &v_a, &w_a).map(|t| -t);
        let t3 = angle_about(&nc, &v_c, &w_c);
        let bq = UnitQuaternion::from_axis_angle(b, theta2);
        let (theta1, theta3) = match (t1, t3) {
            (Some(t1), Some(t3)) => (t1, t3),
            (None, Some(t3)) => {
                let rest = UnitQuaternion::from_axis_angle(c, t3)
                    .compose(&bq)
                    .inverse()
                    .compose(u);
                (angle_along(&rest, a), t3)
            }
            (Some(t1), None) => {
                let rest = u.compose(
                    &bq.compose(&UnitQuaternion::from_axis_angle(a, t1))
                        .inverse(),
                );
                (t1, angle_along(&rest, c))
            }
            (None, None) => (0.0, angle_along(&u.compose(&bq.inverse()), c)),
        };
        let d = TripleDecomposition {
            theta1: wrap_pi(theta1),
            theta2,
            theta3: wrap_pi(theta3),
            axes: (*a, *b, *c),
            branch,
        };
        if allow_inexact || distance_up_to_phase(&d.unitary(), u) <= RECOMPOSE_TOL {
            out.push(d);
        }
    }
    out
}

/// `n_lastᵀ(R_target − R_core)n_first`; zero exactly when [`solve_flanked`] succeeds.
pub fn flank_residual(
    target: &UnitQuaternion,
    core: &UnitQuaternion,
    first: &Axis,
    last: &Axis,
) -> f64 {
    let d = target.rotation_matrix() - core.rotation_matrix();
    last.vector().dot(&(d * first.vector()))
}

/// `(θ_first, θ_last)` with `target ≃ L(θ_last)·core·F(θ_first)`, where F and L rotate
/// about `first` and `last`.
pub fn solve_flanked(
    target: &UnitQuaternion,
    core: &UnitQuaternion,
    first: &Axis,
    last: &Axis,
) -> Option<(f64, f64)> {
    let nf = first.vector();
    let nl = last.vector();
    let p = core.rotate(&nf);
    let q = target.rotate(&nf);
    let (theta_first, theta_last) = match angle_about(&nl, &p, &q) {
        Some(tl) => {
            let l = UnitQuaternion::from_axis_angle(last, tl);
            let f = l.compose(core).inverse().compose(target);
            (angle_along(&f, first), wrap_pi(tl))
        }
        None => (0.0, angle_along(&target.compose(&core.inverse()), last)),
    };
    let rebuilt = UnitQuaternion::from_axis_angle(last, theta_last)
        .compose(core)
        .compose(&UnitQuaternion::from_axis_angle(first, theta_first));
    (distance_up_to_phase(&rebuilt, target) <= RECOMPOSE_TOL).then_some((theta_first, theta_last))
}

/// First-order `(τ, μ)` with `A(δ)·B(t)·A(δ) ≃ B(τ)·A(μ)·B(τ)`, where B is `middle_gen`
/// and A is `flank_gen`.
pub fn conjugate_split(
    middle_gen: Generator,
    t: f64,
    flank_gen: Generator,
    delta: f64,
    config: &ControlConfig,
) -> Result<(f64, f64)> {
    if delta.abs() >= t.abs() {
        return Err(domain("conjugate split needs |delta| < |t|"));
    }
    if middle_gen == flank_gen || flank_gen.is_limit() {
        return Err(domain(
            "conjugate split needs an X/V flank around a different middle",
        ));
    }
    let d = config.axis(flank_gen)?.dot(&config.axis(middle_gen)?);
    let c = (t / 2.0).cos();
    Ok((t / 2.0 + delta * d * (1.0 - c), 2.0 * delta * c))
}

/// [`conjugate_split`] refined until the rewritten product matches exactly.
pub fn conjugate_split_exact(
    middle_gen: Generator,
    t: f64,
    flank_gen: Generator,
    delta: f64,
    config: &ControlConfig,
) -> Result<Option<(f64, f64)>> {
    let (tau, mu) = conjugate_split(middle_gen, t, flank_gen, delta, config)?;
    let a = config.axis(flank_gen)?;
    let b = config.axis(middle_gen)?;
    let qa = |x: f64| UnitQuaternion::from_axis_angle(&a, x);
    let qb = |x: f64| UnitQuaternion::from_axis_angle(&b, x);
    let target = qa(delta).compose(&qb(t)).compose(&qa(delta));
    let residual = |p: Vector2<f64>| {
        let guess = qb(p.x).compose(&qa(p.y)).compose(&qb(p.x));
        guess.inverse().compose(&target).canonical().v()
    };
    Ok(gauss_newton_2d(residual, Vector2::new(tau, mu), 1e-12, 50).map(|p| (p.x, p.y)))
}

/// Result of [`reflect_single`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    pub t_star: f64,
    /// Set when `t` sits on the `tan(t/2)` pole and `t*` is its continuous limit 0.
    pub at_pole: bool,
}

/// `t*` with `B(t*)·A(−t)·B(t*) ≃ A(t)`.
pub fn reflect_single(a: &Axis, b: &Axis, t: f64) -> Result<Reflection> {
    let half = (t / 2.0).rem_euclid(PI);
    if half.abs() < ZERO_ANGLE || (PI - half).abs() < ZERO_ANGLE {
        return Err(domain("reflection needs t ≠ 0 mod 2π"));
    }
    if (t / 2.0).cos().abs() < 1e-12 {
        return Ok(Reflection {
            t_star: 0.0,
            at_pole: true,
        });
    }
    let x = a.dot(b) * (t / 2.0).tan();
    Ok(Reflection {
        t_star: -2.0 * arccot(x),
        at_pole: false,
    })
}

/// `arccot` on the branch `]−π/2, π/2]`, continuous across infinity.
pub fn arccot(x: f64) -> f64 {
    if x == 0.0 {
        PI / 2.0
    } else {
        (1.0 / x).atan()
    }
}

/// Axis triples usable for three-rotation rewrites under this configuration.
fn rewrite_triples(config: &ControlConfig) -> Vec<[Generator; 3]> {
    use Generator::*;
    let mut out = vec![[X, V, X], [V, X, V]];
    if config.has_q() {
        out.extend([[X, Q, V], [V, Q, X], [X, Q, X], [V, Q, V]]);
    }
    if config.has_p() && config.mode() == Mode::Bidirectional {
        out.extend([[X, P, V], [V, P, X], [X, P, X], [V, P, V]]);
    }
    out
}

fn q(config: &ControlConfig, g: Generator, t: f64) -> Option<UnitQuaternion> {
    config
        .axis(g)
        .ok()
        .map(|a| UnitQuaternion::from_axis_angle(&a, t))
}

fn raw_unitary(raw: &[(Generator, f64)], config: &ControlConfig) -> Option<UnitQuaternion> {
    let mut u = UnitQuaternion::identity();
    for &(g, t) in raw {
        u = q(config, g, t)?.compose(&u);
    }
    Some(u)
}

/// Three-rotation rewrites of `target` on every admissible axis triple, in time order.
pub(crate) fn triple_rewrites(
    target: &UnitQuaternion,
    config: &ControlConfig,
) -> Vec<Vec<(Generator, f64)>> {
    let mut out = Vec::new();
    for [ga, gb, gc] in rewrite_triples(config) {
        let (Ok(a), Ok(b), Ok(c)) = (config.axis(ga), config.axis(gb), config.axis(gc)) else {
            continue;
        };
        if let Ok(list) = decompose3(target, &a, &b, &c) {
            for d in list {
                out.push(vec![(ga, d.theta1), (gb, d.theta2), (gc, d.theta3)]);
            }
        }
    }
    out
}

/// Rewrites of `target` as at most two rotations about X and V, in time order.
pub(crate) fn short_rewrites(
    target: &UnitQuaternion,
    config: &ControlConfig,
) -> Vec<Vec<(Generator, f64)>> {
    use Generator::*;
    let mut out = Vec::new();
    if distance_up_to_phase(target, &UnitQuaternion::identity()) <= RECOMPOSE_TOL {
        out.push(Vec::new());
        return out;
    }
    for g in [X, V] {
        let n = config.n_x();
        let n = if g == X { n } else { config.n_v() };
        let t = angle_along(target, &n);
        let guess = UnitQuaternion::from_axis_angle(&n, t);
        if distance_up_to_phase(&guess, target) <= RECOMPOSE_TOL {
            out.push(vec![(g, t)]);
        }
    }
    for (gf, gl) in [(X, V), (V, X)] {
        let (f, l) = (config.axis(gf).unwrap(), config.axis(gl).unwrap());
        if flank_residual(target, &UnitQuaternion::identity(), &f, &l).abs() > 1e-9 {
            continue;
        }
        if let Some((tf, tl)) = solve_flanked(target, &UnitQuaternion::identity(), &f, &l) {
            out.push(vec![(gf, tf), (gl, tl)]);
        }
    }
    out
}

/// Equivalent rewrites of `sub`, each canonicalized for the config's mode and verified to
/// realize the same rotation. Empty when no rewrite pattern applies.
pub fn alternative_decompositions(
    sub: &PulseSequence,
    config: &ControlConfig,
) -> Vec<PulseSequence> {
    use Generator::*;
    let Ok(target) = sub.unitary(config) else {
        return Vec::new();
    };
    let raw = sub.raw();
    let m = raw.len();
    let mut words: Vec<Vec<(Generator, f64)>> = short_rewrites(&target, config);
    words.extend(triple_rewrites(&target, config));

    if m >= 2 {
        // mirrored cores: the negated word, in the same and in reversed order
        let negated: Vec<_> = raw.iter().map(|&(g, t)| (g, -t)).collect();
        let reversed: Vec<_> = negated.iter().rev().copied().collect();
        for core in [negated, reversed] {
            let Some(cu) = raw_unitary(&core, config) else {
                continue;
            };
            for gf in [X, V] {
                for gl in [X, V] {
                    let (f, l) = (config.axis(gf).unwrap(), config.axis(gl).unwrap());
                    if flank_residual(&target, &cu, &f, &l).abs() > 1e-9 {
                        continue;
                    }
                    if let Some((tf, tl)) = solve_flanked(&target, &cu, &f, &l) {
                        let mut w = vec![(gf, tf)];
                        w.extend(core.iter().copied());
                        w.push((gl, tl));
                        words.push(w);
                    }
                }
            }
        }

        // extend by the second pulse's generator and undo it on the outside
        let (g2, s2) = raw[1];
        if !g2.is_limit() {
            if let Some(ext) = q(config, g2, s2) {
                for tri in triple_rewrites(&target.compose(&ext), config) {
                    let mut w = vec![(g2, -s2)];
                    w.extend(tri);
                    words.push(w);
                }
            }
        }
        let (gp, sp) = raw[m - 2];
        if !gp.is_limit() {
            if let Some(ext) = q(config, gp, sp) {
                for mut tri in triple_rewrites(&ext.compose(&target), config) {
                    tri.push((gp, -sp));
                    words.push(tri);
                }
            }
        }
    }

    if m == 3 && raw[0].0 == raw[2].0 && !raw[0].0.is_limit() {
        let (ga, a) = raw[0];
        let (gb, t) = raw[1];
        let c = raw[2].1;
        let scale = a.abs().min(c.abs()).min(t.abs());
        for frac in [1e-3, 5e-2, 0.25] {
            for sign in [1.0, -1.0] {
                let delta = sign * frac * scale;
                if let Ok(Some((tau, mu))) = conjugate_split_exact(gb, t, ga, delta, config) {
                    words.push(vec![
                        (ga, a - delta),
                        (gb, tau),
                        (ga, mu),
                        (gb, tau),
                        (ga, c - delta),
                    ]);
                }
            }
        }
    }

    if m == 1 {
        let (ga, t) = raw[0];
        for gb in [X, V] {
            if gb == ga {
                continue;
            }
            let (Ok(na), Ok(nb)) = (config.axis(ga), config.axis(gb)) else {
                continue;
            };
            if let Ok(r) = reflect_single(&na, &nb, t) {
                words.push(vec![(gb, r.t_star), (ga, -t), (gb, r.t_star)]);
            }
        }
    }

    let mut out: Vec<PulseSequence> = Vec::new();
    for w in words {
        let Ok(seq) = PulseSequence::canonical(&w, config) else {
            continue;
        };
        let Ok(u) = seq.unitary(config) else { continue };
        if distance_up_to_phase(&u, &target) > RECOMPOSE_TOL {
            continue;
        }
        if !out.iter().any(|s| s == &seq) {
            out.push(seq);
        }
    }
    out
}
