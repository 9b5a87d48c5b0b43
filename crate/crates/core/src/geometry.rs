// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Rotation arithmetic on SU(2), the two-axis control set and Bloch-sphere trajectories.
//!
//! A unit quaternion `(w, v)` stands for `w·𝟙 − i(v·σ)`, so `exp(−i t/2 n·σ)` is
//! `(cos(t/2), sin(t/2)·n)` and acts on Bloch vectors as a right-handed rotation by `t`
//! about `n`. Products follow operator order: `a.compose(&b)` applies `b` first.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::Mul;

use nalgebra::Matrix3;
pub use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Angles closer than this to zero are treated as absent pulses.
pub const ZERO_ANGLE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    w: f64,
    v: Vector3<f64>,
}

impl UnitQuaternion {
    pub fn identity() -> Self {
        Self {
            w: 1.0,
            v: Vector3::zeros(),
        }
    }

    /// Normalizes `(w, x, y, z)`; fails on a zero or non-finite input.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < 1e-300 {
            return Err(domain("quaternion must have finite nonzero norm"));
        }
        Ok(Self {
            w: w / n,
            v: Vector3::new(x, y, z) / n,
        })
    }

    pub fn from_axis_angle(axis: &Axis, angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Self {
            w: c,
            v: axis.0 * s,
        }
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn v(&self) -> Vector3<f64> {
        self.v
    }

    /// Operator product `self · rhs` (rhs acts first), renormalized.
    pub fn compose(&self, rhs: &Self) -> Self {
        let w = self.w * rhs.w - self.v.dot(&rhs.v);
        let v = rhs.v * self.w + self.v * rhs.w + self.v.cross(&rhs.v);
        let n = (w * w + v.norm_squared()).sqrt();
        Self { w: w / n, v: v / n }
    }

    pub fn inverse(&self) -> Self {
        Self {
            w: self.w,
            v: -self.v,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            w: -self.w,
            v: -self.v,
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.w * other.w + self.v.dot(&other.v)
    }

    /// Representative with `w ≥ 0`.
    pub fn canonical(&self) -> Self {
        if self.w < 0.0 {
            self.neg()
        } else {
            *self
        }
    }

    /// SO(3) image `(w²−|v|²)I + 2vvᵀ + 2w[v]×`.
    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let w = self.w;
        let v = self.v;
        Matrix3::identity() * (w * w - v.norm_squared())
            + v * v.transpose() * 2.0
            + skew(&v) * (2.0 * w)
    }

    pub fn rotate(&self, r: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_matrix() * r
    }

    /// Axis and angle in `[0, π]` of the physical rotation; `None` for the identity.
    pub fn axis_angle(&self) -> Option<(Axis, f64)> {
        let q = self.canonical();
        let s = q.v.norm();
        if s < 1e-15 {
            return None;
        }
        Some((Axis(q.v / s), 2.0 * s.atan2(q.w)))
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;

    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

impl Serialize for UnitQuaternion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.w, self.v.x, self.v.y, self.v.z].serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitQuaternion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [w, x, y, z] = <[f64; 4]>::deserialize(d)?;
        Self::new(w, x, y, z).map_err(serde::de::Error::custom)
    }
}

pub fn compose(a: &UnitQuaternion, b: &UnitQuaternion) -> UnitQuaternion {
    a.compose(b)
}

/// `min(|a − b|, |a + b|)`: linear in the angle error, unlike [`distance_up_to_phase`].
pub fn chordal_distance(a: &UnitQuaternion, b: &UnitQuaternion) -> f64 {
    let d = |s: f64| ((a.w - s * b.w).powi(2) + (a.v - b.v * s).norm_squared()).sqrt();
    d(1.0).min(d(-1.0))
}

/// `1 − |a·b|`: zero iff `a` and `b` are the same rotation up to global phase.
pub fn distance_up_to_phase(a: &UnitQuaternion, b: &UnitQuaternion) -> f64 {
    (1.0 - a.dot(b).abs()).max(0.0)
}

/// Cross-product matrix: `skew(v) * w == v × w`.
pub(crate) fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Unit rotation axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis(Vector3<f64>);

impl Axis {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n < 1e-300 {
            return Err(domain("axis must have finite nonzero length"));
        }
        Ok(Self(v / n))
    }

    pub fn x_hat() -> Self {
        Self(Vector3::x())
    }

    pub fn y_hat() -> Self {
        Self(Vector3::y())
    }

    pub fn z_hat() -> Self {
        Self(Vector3::z())
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.0
    }

    pub fn dot(&self, other: &Axis) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn flipped(&self) -> Self {
        Self(-self.0)
    }
}

impl Serialize for Axis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0.x, self.0.y, self.0.z].serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Only positive rotation angles are physical; `−t` is realized as `2π − t`.
    #[serde(rename = "positive")]
    PositiveOnly,
    Bidirectional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    X,
    V,
    /// Infinitely fast alternation of X and V with same-sign angles.
    Q,
    /// Infinitely fast alternation of X and V with opposite-sign angles.
    P,
}

impl Generator {
    pub fn is_limit(self) -> bool {
        matches!(self, Generator::Q | Generator::P)
    }

    /// The other finite generator; Q and P map to themselves.
    pub fn partner(self) -> Self {
        match self {
            Generator::X => Generator::V,
            Generator::V => Generator::X,
            g => g,
        }
    }
}

/// Control axes `n_x = (1,0,0)`, `n_v = (cosα, sinα, 0)` with V slower by the factor κ.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig {
    alpha: f64,
    kappa: f64,
    mode: Mode,
    n_x: Axis,
    n_v: Axis,
    k1: f64,
    k3: f64,
    norm_q: f64,
    norm_p: f64,
    n_q: Axis,
    n_p: Axis,
}

impl ControlConfig {
    pub fn new(alpha: f64, kappa: f64, mode: Mode) -> Result<Self> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(domain(format!("alpha must lie in ]0, π[, got {alpha}")));
        }
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(domain(format!("kappa must lie in ]0, 1], got {kappa}")));
        }
        let (s, c) = alpha.sin_cos();
        let n_x = Axis::x_hat();
        let n_v = Axis(Vector3::new(c, s, 0.0));
        let k1 = (kappa - c) / (1.0 - kappa * c);
        let k3 = (kappa + c) / (1.0 + kappa * c);
        let q = n_x.0 + n_v.0 * k1;
        let p = n_x.0 - n_v.0 * k3;
        Ok(Self {
            alpha,
            kappa,
            mode,
            n_x,
            n_v,
            k1,
            k3,
            norm_q: q.norm(),
            norm_p: p.norm(),
            n_q: Axis(q / q.norm()),
            n_p: Axis(p / p.norm()),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k3(&self) -> f64 {
        self.k3
    }

    pub fn norm_q(&self) -> f64 {
        self.norm_q
    }

    pub fn norm_p(&self) -> f64 {
        self.norm_p
    }

    pub fn n_x(&self) -> Axis {
        self.n_x
    }

    pub fn n_v(&self) -> Axis {
        self.n_v
    }

    /// Q is reachable as a limit when κ > cos α.
    pub fn has_q(&self) -> bool {
        self.kappa > self.alpha.cos()
    }

    /// P is reachable as a limit when κ > cos(π − α).
    pub fn has_p(&self) -> bool {
        self.kappa > -self.alpha.cos()
    }

    pub fn axis(&self, g: Generator) -> Result<Axis> {
        match g {
            Generator::X => Ok(self.n_x),
            Generator::V => Ok(self.n_v),
            Generator::Q if self.has_q() => Ok(self.n_q),
            Generator::P if self.has_p() => Ok(self.n_p),
            Generator::Q => Err(domain("Q requires kappa > cos(alpha)")),
            Generator::P => Err(domain("P requires kappa > cos(pi - alpha)")),
        }
    }

    /// Time to rotate by `angle` with generator `g`.
    pub fn cost(&self, g: Generator, angle: f64) -> Result<f64> {
        let t = angle.abs();
        match g {
            Generator::X => Ok(t),
            Generator::V => Ok(self.kappa * t),
            Generator::Q => {
                self.axis(g)?;
                Ok(t / self.norm_q * (1.0 + self.kappa * self.k1))
            }
            Generator::P => {
                self.axis(g)?;
                Ok(t / self.norm_p * (1.0 + self.kappa * self.k3))
            }
        }
    }

    /// Reduces an angle into the mode's domain: `[0, 2π[` or `]−π, π]`.
    pub fn wrap(&self, angle: f64) -> f64 {
        match self.mode {
            Mode::PositiveOnly => {
                let t = angle.rem_euclid(TWO_PI);
                if TWO_PI - t < ZERO_ANGLE {
                    0.0
                } else {
                    t
                }
            }
            Mode::Bidirectional => wrap_pi(angle),
        }
    }
}

impl Serialize for ControlConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Plain {
            alpha: f64,
            kappa: f64,
            mode: Mode,
        }
        Plain {
            alpha: self.alpha,
            kappa: self.kappa,
            mode: self.mode,
        }
        .serialize(s)
    }
}

/// Reduces an angle into `]−π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let t = (angle + PI).rem_euclid(TWO_PI) - PI;
    if t <= -PI {
        t + TWO_PI
    } else {
        t
    }
}

pub fn rot(g: Generator, angle: f64, config: &ControlConfig) -> Result<UnitQuaternion> {
    Ok(UnitQuaternion::from_axis_angle(&config.axis(g)?, angle))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pulse {
    #[serde(rename = "gen")]
    pub generator: Generator,
    /// Physical rotation angle, already reduced into the mode's domain.
    pub angle: f64,
    pub cost: f64,
}

impl Pulse {
    pub fn new(generator: Generator, angle: f64, config: &ControlConfig) -> Result<Self> {
        if !angle.is_finite() {
            return Err(domain("pulse angle must be finite"));
        }
        let angle = config.wrap(angle);
        let cost = config.cost(generator, angle)?;
        Ok(Self {
            generator,
            angle,
            cost,
        })
    }

    pub fn unitary(&self, config: &ControlConfig) -> Result<UnitQuaternion> {
        rot(self.generator, self.angle, config)
    }
}

/// Pulses in time order: `pulses[0]` acts first, so the realized operator is
/// `pulses[n−1] · … · pulses[0]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSequence {
    pulses: Vec<Pulse>,
    total_cost: f64,
}

impl PulseSequence {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a sequence from already-alternating pulses.
    pub fn new(pulses: Vec<Pulse>) -> Result<Self> {
        if pulses.windows(2).any(|w| w[0].generator == w[1].generator) {
            return Err(domain("adjacent pulses must use different generators"));
        }
        let total_cost = pulses.iter().map(|p| p.cost).sum();
        Ok(Self { pulses, total_cost })
    }

    /// Merges neighbours with the same generator and drops zero-angle pulses, repeatedly,
    /// re-wrapping merged angles into the mode's domain.
    pub fn canonical(raw: &[(Generator, f64)], config: &ControlConfig) -> Result<Self> {
        let mut out: Vec<(Generator, f64)> = Vec::with_capacity(raw.len());
        for &(g, t) in raw {
            let t = config.wrap(t);
            match out.last_mut() {
                Some(last) if last.0 == g => {
                    last.1 = config.wrap(last.1 + t);
                    if last.1.abs() < ZERO_ANGLE {
                        out.pop();
                    }
                }
                _ if t.abs() < ZERO_ANGLE => {}
                _ => out.push((g, t)),
            }
        }
        let pulses = out
            .into_iter()
            .map(|(g, t)| Pulse::new(g, t, config))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pulses)
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    /// True when the sequence contains a Q or P limit block.
    pub fn is_infinite(&self) -> bool {
        self.pulses.iter().any(|p| p.generator.is_limit())
    }

    pub fn raw(&self) -> Vec<(Generator, f64)> {
        self.pulses.iter().map(|p| (p.generator, p.angle)).collect()
    }

    pub fn unitary(&self, config: &ControlConfig) -> Result<UnitQuaternion> {
        let mut u = UnitQuaternion::identity();
        for p in &self.pulses {
            u = p.unitary(config)?.compose(&u);
        }
        Ok(u)
    }
}

impl Serialize for PulseSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.pulses.serialize(s)
    }
}

/// Axis and angle of `X(t_x)·V(t_v)` from the closed-form expressions.
pub fn effective_rotation(t_x: f64, t_v: f64, alpha: f64) -> Result<(Axis, f64)> {
    let (sx, cx) = (t_x / 2.0).sin_cos();
    let (sv, cv) = (t_v / 2.0).sin_cos();
    let (sa, ca) = alpha.sin_cos();
    let w = cv * cx - ca * sv * sx;
    let den = (1.0 - w * w).max(0.0).sqrt();
    if den < 1e-12 {
        return Err(Error::DegenerateRotation);
    }
    let m = Vector3::new(ca * sv * cx + cv * sx, sa * sv * cx, sa * sv * sx) / den;
    Ok((Axis(m / m.norm()), 2.0 * w.clamp(-1.0, 1.0).acos()))
}

/// Word variants of a two-pulse product sharing the same `(m, θ)` parametrization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelatedVariant {
    /// `X(t_x)·V(t_v)`
    XV,
    /// `X(−t_x)·V(−t_v)`
    XnegVneg,
    /// `V(t_v)·X(t_x)`
    VX,
    /// `V(−t_v)·X(−t_x)`
    VnegXneg,
}

/// Maps the `(m, θ)` of `X(t_x)·V(t_v)` to that of a related word.
pub fn related_rotation(variant: RelatedVariant, axis: &Axis, angle: f64) -> (Axis, f64) {
    let m = axis.0;
    let mirrored = Axis(Vector3::new(m.x, m.y, -m.z));
    match variant {
        RelatedVariant::XV => (*axis, angle),
        RelatedVariant::XnegVneg => (mirrored, -angle),
        RelatedVariant::VX => (mirrored, angle),
        RelatedVariant::VnegXneg => (*axis, -angle),
    }
}

/// Samples the Bloch vector `r0` while each pulse runs, uniformly in that pulse's time.
/// The first sample is `(0, r0)`.
pub fn bloch_trajectory(
    seq: &PulseSequence,
    r0: &Vector3<f64>,
    samples_per_pulse: usize,
    config: &ControlConfig,
) -> Result<Vec<(f64, Vector3<f64>)>> {
    if (r0.norm() - 1.0).abs() > 1e-9 {
        return Err(domain("initial Bloch vector must be a unit vector"));
    }
    let samples = samples_per_pulse.max(1);
    let mut out = vec![(0.0, *r0)];
    let mut u = UnitQuaternion::identity();
    let mut clock = 0.0;
    for p in seq.pulses() {
        let axis = config.axis(p.generator)?;
        for j in 1..=samples {
            let f = j as f64 / samples as f64;
            let partial = UnitQuaternion::from_axis_angle(&axis, p.angle * f).compose(&u);
            out.push((clock + p.cost * f, partial.rotate(r0)));
        }
        u = p.unitary(config)?.compose(&u);
        clock += p.cost;
    }
    if let Some(last) = out.last_mut() {
        last.0 = seq.total_cost();
    }
    Ok(out)
}

/// `t,rx,ry,rz` rows with 12 significant digits under a header line.
pub fn trajectory_csv(samples: &[(f64, Vector3<f64>)]) -> String {
    let mut s = String::from("t,rx,ry,rz\n");
    for (t, r) in samples {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            sig(*t, 12),
            sig(r.x, 12),
            sig(r.y, 12),
            sig(r.z, 12)
        );
    }
    s
}

/// Formats `x` with `digits` significant digits, trimming trailing zeros.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let parsed: f64 = format!("{:.*e}", digits - 1, x).parse().unwrap_or(x);
    let text = format!("{parsed}");
    if text == "-0" {
        "0".into()
    } else {
        text
    }
}

/// Rounds `x` to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alpha: f64, kappa: f64) -> ControlConfig {
        ControlConfig::new(alpha, kappa, Mode::Bidirectional).unwrap()
    }

    fn close(a: &UnitQuaternion, b: &UnitQuaternion) -> bool {
        distance_up_to_phase(a, b) <= 1e-12
    }

    #[test]
    fn zero_angle_is_identity() {
        let q = rot(Generator::X, 0.0, &cfg(1.0, 0.5)).unwrap();
        assert_eq!(q, UnitQuaternion::identity());
    }

    #[test]
    fn v_at_right_angle_is_y() {
        let q = rot(Generator::V, PI, &cfg(PI / 2.0, 1.0)).unwrap();
        assert!(q.w().abs() < 1e-15);
        assert!((q.v() - Vector3::y()).norm() < 1e-15);
    }

    #[test]
    fn y_after_x_is_z_flip() {
        let c = cfg(PI / 2.0, 1.0);
        let x = rot(Generator::X, PI, &c).unwrap();
        let y = rot(Generator::V, PI, &c).unwrap();
        let z = UnitQuaternion::new(0.0, 0.0, 0.0, 1.0).unwrap();
        assert!(close(&y.compose(&x), &z));
    }

    #[test]
    fn identity_against_x_pi_is_unit_distance() {
        let x = rot(Generator::X, PI, &cfg(1.0, 1.0)).unwrap();
        assert!((distance_up_to_phase(&UnitQuaternion::identity(), &x) - 1.0).abs() < 1e-15);
        assert_eq!(distance_up_to_phase(&x, &x.neg()), 0.0);
    }

    #[test]
    fn config_rejects_endpoints() {
        assert!(ControlConfig::new(0.0, 0.5, Mode::PositiveOnly).is_err());
        assert!(ControlConfig::new(PI, 0.5, Mode::PositiveOnly).is_err());
        assert!(ControlConfig::new(1.0, 0.0, Mode::PositiveOnly).is_err());
        assert!(ControlConfig::new(1.0, 1.5, Mode::PositiveOnly).is_err());
    }

    #[test]
    fn q_and_p_validity() {
        let c = cfg(PI / 3.0, 0.25);
        assert!(!c.has_q());
        assert!(c.has_p());
        assert!(rot(Generator::Q, 1.0, &c).is_err());
        let c = cfg(2.5, 0.5);
        assert!(c.has_q());
        assert!(!c.has_p());
        assert!(rot(Generator::P, 1.0, &c).is_err());
    }

    #[test]
    fn wrapping_per_mode() {
        let p = ControlConfig::new(1.0, 0.5, Mode::PositiveOnly).unwrap();
        assert!((p.wrap(-1.0) - (TWO_PI - 1.0)).abs() < 1e-15);
        let b = cfg(1.0, 0.5);
        assert!((b.wrap(4.0) - (4.0 - TWO_PI)).abs() < 1e-15);
        assert_eq!(b.wrap(-PI), PI);
    }

    #[test]
    fn costs_per_generator() {
        let c = cfg(1.0, 0.3);
        assert_eq!(c.cost(Generator::X, -2.0).unwrap(), 2.0);
        assert!((c.cost(Generator::V, 0.5).unwrap() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn canonical_merges_and_drops() {
        let c = cfg(1.0, 0.5);
        let s = PulseSequence::canonical(
            &[
                (Generator::X, 0.4),
                (Generator::V, 0.0),
                (Generator::X, 0.6),
                (Generator::V, 1.0),
            ],
            &c,
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.pulses()[0].angle - 1.0).abs() < 1e-15);
        let s = PulseSequence::canonical(&[(Generator::V, 0.4), (Generator::V, -0.4)], &c).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn new_rejects_repeats() {
        let c = cfg(1.0, 0.5);
        let x = Pulse::new(Generator::X, 1.0, &c).unwrap();
        assert!(PulseSequence::new(vec![x, x]).is_err());
    }

    #[test]
    fn effective_rotation_on_axis() {
        let (n, t) = effective_rotation(0.7, 0.0, 1.1).unwrap();
        assert!((n.vector() - Vector3::x()).norm() < 1e-12);
        assert!((t - 0.7).abs() < 1e-12);
        let (n, t) = effective_rotation(0.0, 0.9, 1.1).unwrap();
        assert!((n.vector() - Vector3::new(1.1f64.cos(), 1.1f64.sin(), 0.0)).norm() < 1e-12);
        assert!((t - 0.9).abs() < 1e-12);
        assert_eq!(
            effective_rotation(0.0, 0.0, 1.1),
            Err(Error::DegenerateRotation)
        );
    }

    #[test]
    fn related_rotation_rows() {
        let n = Axis::new(0.3, 0.4, 0.5).unwrap();
        assert_eq!(related_rotation(RelatedVariant::XV, &n, 1.0), (n, 1.0));
        assert_eq!(
            related_rotation(RelatedVariant::VnegXneg, &n, 1.0),
            (n, -1.0)
        );
    }

    #[test]
    fn trajectory_of_empty_and_flip() {
        let c = cfg(1.0, 0.5);
        let z = Vector3::z();
        let t = bloch_trajectory(&PulseSequence::empty(), &z, 8, &c).unwrap();
        assert_eq!(t, vec![(0.0, z)]);
        let seq = PulseSequence::new(vec![Pulse::new(Generator::X, PI, &c).unwrap()]).unwrap();
        let t = bloch_trajectory(&seq, &z, 8, &c).unwrap();
        let (time, r) = t.last().unwrap();
        assert!((time - PI).abs() < 1e-15);
        assert!((r + z).norm() < 1e-12);
        assert!(t.windows(2).all(|w| w[1].0 >= w[0].0));
    }

    #[test]
    fn csv_has_header_and_digits() {
        let s = trajectory_csv(&[(0.0, Vector3::new(1.0 / 3.0, 0.0, -2.0))]);
        assert_eq!(s, "t,rx,ry,rz\n0,0.333333333333,0,-2\n");
    }
}
