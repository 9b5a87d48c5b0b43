// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Necessary conditions for time-optimality, as data plus evaluators.
//!
//! This covers the internal-angle relations of 4-subsequences and the determinant
//! they zero, the admissible structures (which words can be optimal, with angle
//! and sign bounds), the special angles where mirrored words coincide, and the
//! length and total-time bounds.

use std::f64::consts::PI;

use serde::Serialize;

use crate::decomposition::arccot;
use crate::error::{domain, Result};
use crate::geometry::{
    distance_up_to_phase, rot, ControlConfig, Generator, Mode, UnitQuaternion, TWO_PI,
};
use crate::solve::brent;

/// Configurations with `|κ − cosα|` below this enumerate both positive-mode regimes.
pub const THIN_WALL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RelationLabel {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "c")]
    C,
    #[serde(rename = "d1")]
    D1,
    #[serde(rename = "d2")]
    D2,
    #[serde(rename = "e")]
    E,
    #[serde(rename = "f")]
    F,
    #[serde(rename = "g1")]
    G1,
    #[serde(rename = "g2")]
    G2,
    #[serde(rename = "h")]
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthClass {
    /// Can close finite sequences; the infinite limit too in positive-only mode.
    FiniteAndInfinite,
    Finite,
    Infinite,
    /// Never time-optimal.
    None,
}

/// One internal-angle relation for `X(t_f)·V(t_v)·X(t_x)·V(t_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationCase {
    pub label: RelationLabel,
    /// Signs listed as `(t_f, t_v, t_x, t_i)`, the order of the determinant's last row.
    pub sign_vector: [i8; 4],
    /// Which internal angle the relation returns when given the other.
    pub solves_for: Generator,
    pub second_derivative_viable: bool,
    pub length_class: LengthClass,
}

pub const RELATIONS: [RelationCase; 10] = {
    use Generator::{V, X};
    use LengthClass::*;
    use RelationLabel::*;
    const fn row(
        label: RelationLabel,
        sign_vector: [i8; 4],
        solves_for: Generator,
        second_derivative_viable: bool,
        length_class: LengthClass,
    ) -> RelationCase {
        RelationCase {
            label,
            sign_vector,
            solves_for,
            second_derivative_viable,
            length_class,
        }
    }
    [
        row(A, [1, 1, 1, 1], V, true, FiniteAndInfinite),
        row(B, [1, 1, 1, -1], V, true, None),
        row(C, [1, 1, -1, 1], X, true, None),
        row(D1, [1, 1, -1, -1], X, true, Finite),
        row(D2, [1, 1, -1, -1], V, false, None),
        row(E, [1, -1, 1, 1], V, true, None),
        row(F, [1, -1, 1, -1], V, true, Infinite),
        row(G1, [1, -1, -1, 1], X, true, Finite),
        row(G2, [1, -1, -1, 1], V, false, None),
        row(H, [1, -1, -1, -1], X, true, None),
    ]
};

pub fn relation(label: RelationLabel) -> &'static RelationCase {
    RELATIONS
        .iter()
        .find(|r| r.label == label)
        .expect("every label has a row")
}

fn half_to_angle(tan_half: f64, mode: Mode) -> f64 {
    let t = 2.0 * tan_half.atan();
    match mode {
        Mode::PositiveOnly => t.rem_euclid(TWO_PI),
        Mode::Bidirectional => t,
    }
}

/// The paired internal angle: `t_v` from `t_x`, or `t_x` from `t_v` for the rows that
/// solve for X. Positive-only results land in `[0, 2π[`, bidirectional ones in `]−π, π[`.
pub fn internal_relation(case: &RelationCase, t_known: f64, config: &ControlConfig) -> Result<f64> {
    if !t_known.is_finite() {
        return Err(domain("internal angle must be finite"));
    }
    let (k, c) = (config.kappa(), config.alpha().cos());
    let mode = config.mode();
    let half = t_known / 2.0;
    let (s, co) = half.sin_cos();
    let out = match case.label {
        RelationLabel::A => {
            // branch-continuous through the tan pole at t = π
            let t = 2.0 * (config.k1() * s).atan2(co);
            match mode {
                Mode::PositiveOnly => t.rem_euclid(TWO_PI),
                Mode::Bidirectional => crate::geometry::wrap_pi(t),
            }
        }
        RelationLabel::F => {
            let t = 2.0 * (-config.k3() * s).atan2(co);
            match mode {
                Mode::PositiveOnly => t.rem_euclid(TWO_PI),
                Mode::Bidirectional => crate::geometry::wrap_pi(t),
            }
        }
        RelationLabel::D1 => half_to_angle(-k * half.tan(), mode),
        RelationLabel::G1 => half_to_angle(k * half.tan(), mode),
        RelationLabel::D2 | RelationLabel::G2 => half_to_angle(co / s / c, mode),
        RelationLabel::B => {
            let st = t_known.sin();
            half_to_angle(
                -(k + c + t_known.cos() * (k - c)) / ((1.0 - k * c) * st),
                mode,
            )
        }
        RelationLabel::C => {
            let st = t_known.sin();
            half_to_angle(
                (1.0 - k * c + t_known.cos() * (1.0 + k * c)) / ((k + c) * st),
                mode,
            )
        }
        RelationLabel::E => {
            let st = t_known.sin();
            half_to_angle(
                (k - c + t_known.cos() * (k + c)) / ((1.0 + k * c) * st),
                mode,
            )
        }
        RelationLabel::H => {
            let st = t_known.sin();
            half_to_angle(
                -(1.0 + k * c + t_known.cos() * (1.0 - k * c)) / ((k - c) * st),
                mode,
            )
        }
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(domain("relation undefined at this angle"))
    }
}

/// Stationarity determinant for `X(t_f)·V(t_v)·X(t_x)·V(t_i)` with signs given as
/// `(t_f, t_v, t_x, t_i)`.
pub fn constraint_determinant(signs: [i8; 4], t_x: f64, t_v: f64, config: &ControlConfig) -> f64 {
    let (k, c) = (config.kappa(), config.alpha().cos());
    let s = signs.map(f64::from);
    let m = nalgebra::Matrix4::new(
        t_v.cos(),
        0.0,
        1.0,
        2.0 * c * (t_x / 2.0).sin().powi(2),
        2.0 * c * (t_v / 2.0).sin().powi(2),
        1.0,
        0.0,
        t_x.cos(),
        t_v.sin(),
        0.0,
        0.0,
        t_x.sin(),
        s[0],
        k * s[1],
        s[2],
        k * s[3],
    );
    m.determinant()
}

fn special(alpha: f64, denom: f64) -> Option<f64> {
    let r = (alpha.cos() - (PI / denom).cos()) / (1.0 + alpha.cos());
    if r < -1e-15 {
        return None;
    }
    Some(2.0 * (-r.max(0.0).sqrt()).clamp(-1.0, 1.0).acos())
}

/// `(t_odd,k, t_even,k)`, where `[X(t)V(t)]^k X(t) ≃ [V(−t)X(−t)]^k V(−t)` and
/// `[X(t)V(t)]^k ≃ [V(−t)X(−t)]^k` respectively. `None` when undefined at this α.
pub fn special_angles(config: &ControlConfig, k: u32) -> Result<(Option<f64>, Option<f64>)> {
    if k == 0 {
        return Err(domain("special angles need k ≥ 1"));
    }
    let a = config.alpha();
    let k = f64::from(k);
    Ok((special(a, 2.0 * k + 1.0), special(a, 2.0 * k)))
}

/// The angle in `]π, 3π/2[` where `X(t)·V(t) ≃ V(−t)·X(−t)`, i.e. where `X(t)·V(t)` is a
/// half turn. Exists for `α < π/2`.
pub fn t_dagger(alpha: f64) -> Option<f64> {
    if !(alpha > 0.0 && alpha < PI / 2.0) {
        return None;
    }
    let c = alpha.cos();
    // scalar part of X(t)·V(t), which changes sign at the root
    let w = |t: f64| (t / 2.0).cos().powi(2) - c * (t / 2.0).sin().powi(2);
    let t = brent(w, PI, 1.5 * PI, 1e-15)?;
    let cfg = ControlConfig::new(alpha, 1.0, Mode::Bidirectional).ok()?;
    let lhs = rot(Generator::X, t, &cfg)
        .ok()?
        .compose(&rot(Generator::V, t, &cfg).ok()?);
    let rhs = rot(Generator::V, -t, &cfg)
        .ok()?
        .compose(&rot(Generator::X, -t, &cfg).ok()?);
    (distance_up_to_phase(&lhs, &rhs) <= 1e-10).then_some(t)
}

fn thin_wall(config: &ControlConfig) -> bool {
    (config.kappa() - config.alpha().cos()).abs() < THIN_WALL
}

fn fast_regime(config: &ControlConfig) -> bool {
    config.kappa() > config.alpha().cos() || thin_wall(config)
}

fn slow_regime(config: &ControlConfig) -> bool {
    config.kappa() < config.alpha().cos() || thin_wall(config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MaxLength {
    pub finite: usize,
    pub infinite_allowed: bool,
}

/// Longest finite sequence that can be time-optimal, and whether limit rows exist.
pub fn max_length(config: &ControlConfig) -> MaxLength {
    let a = config.alpha();
    match config.mode() {
        Mode::Bidirectional => MaxLength {
            finite: 5,
            infinite_allowed: true,
        },
        Mode::PositiveOnly => {
            let mut finite = 3;
            if fast_regime(config) {
                finite = if a > 2.0 * PI / 3.0 {
                    3
                } else {
                    (PI / a + 1e-12).floor() as usize + 3
                };
            }
            if slow_regime(config) {
                finite = finite.max(((TWO_PI / a + 1e-12).floor() as usize + 1).max(5));
            }
            MaxLength {
                finite,
                infinite_allowed: config.has_q(),
            }
        }
    }
}

/// Loose upper bound on the total time of a finite time-optimal sequence.
/// `outer` is the generator of the first and last pulse; it is ignored for even n.
pub fn max_total_time(config: &ControlConfig, n: usize, outer: Generator) -> Result<f64> {
    if n < 3 {
        return Err(domain("total-time bounds start at n = 3"));
    }
    if outer.is_limit() {
        return Err(domain("outer generator must be X or V"));
    }
    let k = config.kappa();
    let nf = n as f64;
    let odd = n % 2 == 1;
    match config.mode() {
        Mode::Bidirectional => match (n, outer) {
            (3, Generator::X) => Ok(PI * (4.0 + k)),
            (3, _) => Ok(PI * (1.0 + 4.0 * k)),
            (4, _) => Ok(PI * (1.0 + k)),
            (5, Generator::X) => Ok(13.0 * PI / 6.0 + PI * k),
            (5, _) => Ok(2.0 * PI + 2.0 * PI * k / 3.0),
            _ => Err(domain("bidirectional finite sequences have n ≤ 5")),
        },
        Mode::PositiveOnly => {
            let mut best: Option<f64> = None;
            if fast_regime(config) {
                let pair = (3.0 * nf - 5.0) / (nf - 2.0) * PI;
                let extra = if n > 3 { 1.0 } else { 0.0 };
                let t = if !odd {
                    3.0 * PI * (1.0 + k) + (nf - 4.0) / 2.0 * pair
                } else if outer == Generator::X {
                    TWO_PI * (2.0 + k)
                        + extra * ((nf - 5.0) / 2.0 * pair + (nf - 1.0) / (nf - 2.0) * PI)
                } else {
                    TWO_PI * (1.0 + 2.0 * k) + extra * ((nf - 5.0) / 2.0 * pair + TWO_PI * k)
                };
                best = Some(t);
            }
            if slow_regime(config) {
                let t = if !odd {
                    TWO_PI * (1.0 + k) + (nf - 2.0) / 2.0 * 3.0 * PI
                } else if outer == Generator::X {
                    TWO_PI * (2.0 + k) + (nf - 3.0) / 2.0 * 3.0 * PI
                } else {
                    PI * (1.0 + 4.0 * k) + (nf - 3.0) / 2.0 * 3.0 * PI
                };
                best = Some(best.map_or(t, |b: f64| b.max(t)));
            }
            best.ok_or_else(|| domain("no positive-mode regime applies"))
        }
    }
}

/// Which group of admissible structures a template belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateFamily {
    /// Positive angles, κ > cos α.
    PositiveFast,
    /// Positive angles, κ < cos α.
    PositiveSlow,
    Bidirectional,
}

impl TemplateFamily {
    fn tag(self) -> &'static str {
        match self {
            TemplateFamily::PositiveFast => "pos-fast",
            TemplateFamily::PositiveSlow => "pos-slow",
            TemplateFamily::Bidirectional => "bidi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum SequenceLength {
    Finite(usize),
    Infinite,
}

/// Sign constraints; bidirectional patterns hold up to a global sign flip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "pattern", rename_all = "snake_case")]
pub enum SignRule {
    Unconstrained,
    OuterOpposite,
    OuterSame,
    AllSame,
    /// Relative signs of every pulse in time order.
    Pattern(Vec<i8>),
}

impl SignRule {
    pub fn admits(&self, angles: &[f64]) -> bool {
        let sg = |t: f64| if t < 0.0 { -1i8 } else { 1 };
        let n = angles.len();
        match self {
            SignRule::Unconstrained => true,
            SignRule::OuterOpposite => n >= 2 && sg(angles[0]) != sg(angles[n - 1]),
            SignRule::OuterSame => n >= 2 && sg(angles[0]) == sg(angles[n - 1]),
            SignRule::AllSame => angles.iter().all(|&t| sg(t) == sg(angles[0])),
            SignRule::Pattern(p) => {
                p.len() == n && {
                    let flip = sg(angles[0]) * p[0];
                    angles.iter().zip(p).all(|(&t, &s)| sg(t) == s * flip)
                }
            }
        }
    }
}

/// Open-or-closed interval on one internal angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleBound {
    /// Generator whose internal angle is bounded.
    pub generator: Generator,
    /// Bound applies to `|t|` rather than `t`.
    pub magnitude: bool,
    pub lower: f64,
    pub upper: f64,
    pub upper_inclusive: bool,
}

impl AngleBound {
    pub fn contains(&self, t: f64) -> bool {
        let t = if self.magnitude { t.abs() } else { t };
        // endpoint ties resolve toward admissibility
        let slack = 1e-12;
        t > self.lower - slack
            && (t < self.upper + slack || (self.upper_inclusive && t <= self.upper + slack))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterRule {
    None,
    /// Positive angles, κ > cos α, n ≥ 4.
    PositiveFast,
    /// Bidirectional 4-sequences.
    BidirectionalFour,
    /// Bidirectional 5-sequences.
    BidirectionalFive,
}

/// One admissible sequence shape with its bounds evaluated for a configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureTemplate {
    pub id: String,
    pub family: TemplateFamily,
    pub mode: Mode,
    pub length: SequenceLength,
    /// Generators in time order; limit rows list `[first, Q|P, last]`.
    pub generators: Vec<Generator>,
    pub signs: SignRule,
    pub relations: Vec<RelationLabel>,
    pub internal: Option<AngleBound>,
    pub outer: OuterRule,
    /// Upper end of the α range (inclusive) this row is valid for.
    pub alpha_max: f64,
    pub kappa_condition: &'static str,
    pub t_max: Option<f64>,
    /// False for the limit rows added by [`CatalogOptions::limit_extensions`].
    pub tabulated: bool,
}

impl StructureTemplate {
    pub fn n(&self) -> Option<usize> {
        match self.length {
            SequenceLength::Finite(n) => Some(n),
            SequenceLength::Infinite => None,
        }
    }

    pub fn first(&self) -> Generator {
        self.generators[0]
    }

    pub fn last(&self) -> Generator {
        *self.generators.last().expect("templates have pulses")
    }
}

/// How to treat region bounds proved only for κ = 1 when κ < 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionPolicy {
    /// Use them as loose bounds: `t_x ≤ t†` for 4-sequences below α = π/2, the
    /// special-angle caps for n ≥ 5, and no finite n ≥ 4 rows at α = π/2.
    Apply,
    /// Only the tabulated row bounds.
    Relax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatalogOptions {
    pub kappa_one_regions: RegionPolicy,
    /// Tighten the α cap of positive-mode n ≥ 5 rows to `π/(n−2)`.
    pub strict_tighter_alpha: bool,
    /// Also list the limit words the tables exclude: `A·Q·A`, and in bidirectional
    /// mode every outer pair and sign for Q and P. The exhaustive oracle finds
    /// chattering sequences of these shapes beating every tabulated row, e.g. at
    /// α = π/2, κ = 1. Rows added here carry `tabulated = false`.
    pub limit_extensions: bool,
}

impl Default for CatalogOptions {
    fn default() -> Self {
        Self {
            kappa_one_regions: RegionPolicy::Apply,
            strict_tighter_alpha: false,
            limit_extensions: true,
        }
    }
}

impl CatalogOptions {
    /// Exactly the tabulated rows.
    pub fn tables_only() -> Self {
        Self {
            limit_extensions: false,
            ..Self::default()
        }
    }
}

/// Caps on the outer angles' magnitudes, and on their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuterLimits {
    pub first: Option<f64>,
    pub last: Option<f64>,
    pub joint: Option<f64>,
}

impl OuterLimits {
    pub fn admits(&self, first: f64, last: f64) -> bool {
        let ok = |cap: Option<f64>, t: f64| cap.is_none_or(|c| t.abs() < c + 1e-12);
        ok(self.first, first) && ok(self.last, last) && ok(self.joint, first.abs() + last.abs())
    }
}

/// Outer-angle caps given the internal X and V angle magnitudes.
pub fn outer_bounds(
    template: &StructureTemplate,
    t_x: f64,
    t_v: f64,
    config: &ControlConfig,
) -> OuterLimits {
    let a = config.alpha();
    let c = a.cos();
    let none = OuterLimits {
        first: None,
        last: None,
        joint: None,
    };
    let cap_for = |g: Generator| -> Option<f64> {
        match template.outer {
            OuterRule::None => None,
            OuterRule::PositiveFast => {
                if a > PI / 2.0 && template.n() == Some(4) {
                    Some(PI)
                } else if a < PI / 2.0 {
                    let adj = if g == Generator::X { t_v } else { t_x };
                    Some(TWO_PI + 2.0 * arccot(c * (adj / 2.0).tan()))
                } else {
                    None
                }
            }
            OuterRule::BidirectionalFour => Some(
                PI - if g == Generator::X {
                    t_x.abs()
                } else {
                    t_v.abs()
                },
            ),
            OuterRule::BidirectionalFive => Some(
                (if g == Generator::X {
                    t_x.abs()
                } else {
                    t_v.abs()
                })
                .min(PI / 3.0),
            ),
        }
    };
    if template.outer == OuterRule::None {
        return none;
    }
    OuterLimits {
        first: cap_for(template.first()),
        last: cap_for(template.last()),
        joint: (template.outer == OuterRule::BidirectionalFour).then_some(2.0 * PI / 3.0),
    }
}

/// `2·acos(r)`, read as no constraint when `r` leaves `[−1, 1]`.
fn two_acos_or_open(r: f64) -> f64 {
    if (-1.0..=1.0).contains(&r) {
        2.0 * r.acos()
    } else {
        TWO_PI
    }
}

fn alternating(first: Generator, n: usize) -> Vec<Generator> {
    (0..n)
        .map(|i| if i % 2 == 0 { first } else { first.partner() })
        .collect()
}

fn word(gens: &[Generator]) -> String {
    gens.iter().map(|g| format!("{g:?}")).collect()
}

fn pattern_tag(p: &[i8]) -> String {
    p.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

struct Builder<'a> {
    tabulated: bool,
    config: &'a ControlConfig,
    out: Vec<StructureTemplate>,
}

impl Builder<'_> {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        family: TemplateFamily,
        gens: Vec<Generator>,
        signs: SignRule,
        relations: Vec<RelationLabel>,
        internal: Option<AngleBound>,
        outer: OuterRule,
        alpha_max: f64,
        kappa_condition: &'static str,
    ) {
        let infinite = gens.iter().any(|g| g.is_limit());
        let n = gens.len();
        let length = if infinite {
            SequenceLength::Infinite
        } else {
            SequenceLength::Finite(n)
        };
        let mut id = format!(
            "{}:{}:{}",
            family.tag(),
            if infinite {
                "inf".into()
            } else {
                format!("n{n}")
            },
            word(&gens)
        );
        match &signs {
            SignRule::Pattern(p) => id.push_str(&format!(":{}", pattern_tag(p))),
            SignRule::OuterOpposite => id.push_str(":outer-opposite"),
            SignRule::OuterSame => id.push_str(":outer-same"),
            SignRule::AllSame => id.push_str(":all-same"),
            SignRule::Unconstrained => {}
        }
        if !self.tabulated {
            id.push_str(":ext");
        }
        let t_max = if infinite {
            None
        } else {
            max_total_time(self.config, n, gens[0]).ok()
        };
        self.out.push(StructureTemplate {
            id,
            family,
            mode: self.config.mode(),
            length,
            generators: gens,
            signs,
            relations,
            internal,
            outer,
            alpha_max,
            kappa_condition,
            t_max,
            tabulated: self.tabulated,
        });
    }
}

fn bound(
    generator: Generator,
    magnitude: bool,
    lower: f64,
    upper: f64,
    upper_inclusive: bool,
) -> Option<AngleBound> {
    (upper > lower).then_some(AngleBound {
        generator,
        magnitude,
        lower,
        upper,
        upper_inclusive,
    })
}

pub fn enumerate_templates(config: &ControlConfig) -> Vec<StructureTemplate> {
    enumerate_templates_with(config, &CatalogOptions::default())
}

/// Every admissible row valid at this configuration, with evaluated bounds.
pub fn enumerate_templates_with(
    config: &ControlConfig,
    opts: &CatalogOptions,
) -> Vec<StructureTemplate> {
    use Generator::*;
    let mut b = Builder {
        tabulated: true,
        config,
        out: Vec::new(),
    };
    let a = config.alpha();
    let k = config.kappa();
    let c = a.cos();
    match config.mode() {
        Mode::PositiveOnly => {
            if fast_regime(config) {
                positive_fast(&mut b, opts);
            }
            if slow_regime(config) {
                positive_slow(&mut b);
            }
        }
        Mode::Bidirectional => {
            let fam = TemplateFamily::Bidirectional;
            let ac = c.abs();
            b.push(
                fam,
                vec![V, X, V],
                SignRule::OuterOpposite,
                vec![],
                bound(X, true, 0.0, two_acos_or_open(ac / (k + ac)), false),
                OuterRule::None,
                PI,
                "any",
            );
            b.push(
                fam,
                vec![V, X, V],
                SignRule::OuterSame,
                vec![],
                bound(X, true, 0.0, two_acos_or_open((c - k) / (c + k)), false),
                OuterRule::None,
                PI,
                "any",
            );
            b.push(
                fam,
                vec![X, V, X],
                SignRule::OuterOpposite,
                vec![],
                bound(
                    V,
                    true,
                    0.0,
                    two_acos_or_open(k * ac / (1.0 + k * ac)),
                    false,
                ),
                OuterRule::None,
                PI,
                "any",
            );
            for first in [X, V] {
                for (p, rel) in [
                    (vec![1, 1, -1, -1], RelationLabel::D1),
                    (vec![1, -1, -1, 1], RelationLabel::G1),
                ] {
                    b.push(
                        fam,
                        alternating(first, 4),
                        SignRule::Pattern(p),
                        vec![rel],
                        bound(X, true, 0.0, two_acos_or_open(ac / (k + ac)), false),
                        OuterRule::BidirectionalFour,
                        PI,
                        "any",
                    );
                }
            }
            for first in [V, X] {
                let cap = if first == V {
                    PI / 2.0
                } else {
                    2.0 * arccot(1.0 / k)
                };
                for p in [vec![1, 1, -1, -1, 1], vec![1, -1, -1, 1, 1]] {
                    b.push(
                        fam,
                        alternating(first, 5),
                        SignRule::Pattern(p),
                        vec![RelationLabel::D1, RelationLabel::G1],
                        bound(X, true, 0.0, cap, false),
                        OuterRule::BidirectionalFive,
                        PI,
                        "any",
                    );
                }
            }
            if config.has_q() {
                for g in [vec![X, Q, V], vec![V, Q, X]] {
                    b.push(
                        fam,
                        g,
                        SignRule::AllSame,
                        vec![RelationLabel::A],
                        None,
                        OuterRule::None,
                        PI,
                        "kappa > cos(alpha)",
                    );
                }
            }
            if config.has_p() {
                let rows = [
                    (
                        vec![V, P, V],
                        bound(P, true, 0.0, two_acos_or_open(k / (1.0 + k)), false),
                    ),
                    (vec![X, P, X], bound(P, true, 0.0, 2.0 * PI / 3.0, false)),
                    (vec![X, P, V], None),
                    (vec![V, P, X], None),
                ];
                for (g, ib) in rows {
                    b.push(
                        fam,
                        g,
                        SignRule::OuterOpposite,
                        vec![RelationLabel::F],
                        ib,
                        OuterRule::None,
                        PI - k.acos(),
                        "kappa > cos(pi - alpha)",
                    );
                }
            }
        }
    }
    if opts.limit_extensions {
        limit_extensions(&mut b);
    }
    b.out
}

fn limit_extensions(b: &mut Builder<'_>) {
    use Generator::*;
    let config = b.config;
    b.tabulated = false;
    match config.mode() {
        Mode::PositiveOnly => {
            if config.has_q() {
                for g in [vec![X, Q, X], vec![V, Q, V]] {
                    let fam = TemplateFamily::PositiveFast;
                    b.push(
                        fam,
                        g,
                        SignRule::Unconstrained,
                        vec![RelationLabel::A],
                        bound(Q, false, 0.0, PI, false),
                        OuterRule::None,
                        PI,
                        "kappa > cos(alpha)",
                    );
                }
            }
        }
        Mode::Bidirectional => {
            let fam = TemplateFamily::Bidirectional;
            let pairs = [(X, X), (V, V), (X, V), (V, X)];
            if config.has_q() {
                for (f, l) in pairs {
                    b.push(
                        fam,
                        vec![f, Q, l],
                        SignRule::Unconstrained,
                        vec![RelationLabel::A],
                        None,
                        OuterRule::None,
                        PI,
                        "kappa > cos(alpha)",
                    );
                }
            }
            if config.has_p() {
                for (f, l) in pairs {
                    let alpha_max = PI - config.kappa().acos();
                    b.push(
                        fam,
                        vec![f, P, l],
                        SignRule::Unconstrained,
                        vec![RelationLabel::F],
                        None,
                        OuterRule::None,
                        alpha_max,
                        "kappa > cos(pi - alpha)",
                    );
                }
            }
        }
    }
    b.tabulated = true;
}

fn positive_fast(b: &mut Builder<'_>, opts: &CatalogOptions) {
    use Generator::*;
    let fam = TemplateFamily::PositiveFast;
    let config = b.config;
    let a = config.alpha();
    let apply = opts.kappa_one_regions == RegionPolicy::Apply;
    let kc = "kappa > cos(alpha)";
    b.push(
        fam,
        vec![V, X, V],
        SignRule::Unconstrained,
        vec![],
        bound(X, false, PI, TWO_PI, false),
        OuterRule::None,
        PI,
        kc,
    );
    b.push(
        fam,
        vec![X, V, X],
        SignRule::Unconstrained,
        vec![],
        bound(V, false, PI, TWO_PI, false),
        OuterRule::None,
        PI,
        kc,
    );

    let orthogonal = apply && (a - PI / 2.0).abs() < 1e-12;
    if a <= 2.0 * PI / 3.0 && !orthogonal {
        let mut hi = 1.5 * PI;
        let mut inclusive = false;
        if apply {
            if let Some(td) = t_dagger(a) {
                if td < hi {
                    hi = td;
                    inclusive = true;
                }
            }
        }
        for first in [X, V] {
            b.push(
                fam,
                alternating(first, 4),
                SignRule::Unconstrained,
                vec![RelationLabel::A],
                bound(X, false, PI, hi, inclusive),
                OuterRule::PositiveFast,
                2.0 * PI / 3.0,
                kc,
            );
        }
    }
    let n_max =
        max_length(&ControlConfig::new(a, 1.0, Mode::PositiveOnly).expect("valid alpha")).finite;
    for n in 5..=n_max {
        let nf = n as f64;
        let mut alpha_cap = PI / (nf - 3.0);
        if opts.strict_tighter_alpha {
            alpha_cap = PI / (nf - 2.0);
        }
        if a > alpha_cap + 1e-12 || orthogonal {
            continue;
        }
        let mut hi = (nf - 1.0) / (nf - 2.0) * PI;
        if apply {
            let k = ((n - 3) / 2) as u32;
            let cap = if n % 2 == 1 {
                special_angles(config, k).ok().and_then(|s| s.1)
            } else {
                special_angles(config, k - 1).ok().and_then(|s| s.0)
            };
            if let Some(cap) = cap {
                hi = hi.min(cap);
            }
        }
        let firsts: &[Generator] = if n % 2 == 1 { &[V, X] } else { &[X, V] };
        for &first in firsts {
            b.push(
                fam,
                alternating(first, n),
                SignRule::Unconstrained,
                vec![RelationLabel::A],
                bound(X, false, PI, hi, true),
                OuterRule::PositiveFast,
                alpha_cap,
                kc,
            );
        }
    }
    if config.has_q() {
        for g in [vec![X, Q, V], vec![V, Q, X]] {
            b.push(
                fam,
                g,
                SignRule::Unconstrained,
                vec![RelationLabel::A],
                bound(Q, false, 0.0, PI, false),
                OuterRule::None,
                PI,
                kc,
            );
        }
    }
}

fn positive_slow(b: &mut Builder<'_>) {
    use Generator::*;
    let fam = TemplateFamily::PositiveSlow;
    let a = b.config.alpha();
    let kc = "kappa < cos(alpha)";
    let amax = b.config.kappa().acos();
    b.push(
        fam,
        vec![V, X, V],
        SignRule::Unconstrained,
        vec![],
        bound(X, false, 0.0, PI, false),
        OuterRule::None,
        amax,
        kc,
    );
    b.push(
        fam,
        vec![X, V, X],
        SignRule::Unconstrained,
        vec![],
        bound(V, false, PI, TWO_PI, false),
        OuterRule::None,
        amax,
        kc,
    );
    for n in [4usize, 5] {
        for first in [X, V] {
            b.push(
                fam,
                alternating(first, n),
                SignRule::Unconstrained,
                vec![RelationLabel::A],
                bound(X, false, 0.0, PI, false),
                OuterRule::None,
                amax,
                kc,
            );
        }
    }
    let mut k = 2usize;
    while a <= PI / (1.0 + k as f64) + 1e-12 {
        for n in [2 * k + 2, 2 * k + 3] {
            for first in [X, V] {
                b.push(
                    fam,
                    alternating(first, n),
                    SignRule::Unconstrained,
                    vec![RelationLabel::A],
                    bound(X, false, PI / 3.0, PI, false),
                    OuterRule::None,
                    (PI / (1.0 + k as f64)).min(amax),
                    kc,
                );
            }
        }
        k += 1;
    }
}

/// The operator `[X(t)V(t)]^k` (optionally followed on the left by `X(t)`) and its mirror,
/// used to check special-angle identities.
pub fn mirrored_words(
    config: &ControlConfig,
    t: f64,
    k: u32,
    odd: bool,
) -> Result<(UnitQuaternion, UnitQuaternion)> {
    let x = rot(Generator::X, t, config)?;
    let v = rot(Generator::V, t, config)?;
    let xn = rot(Generator::X, -t, config)?;
    let vn = rot(Generator::V, -t, config)?;
    let mut lhs = UnitQuaternion::identity();
    let mut rhs = UnitQuaternion::identity();
    for _ in 0..k {
        lhs = lhs.compose(&x.compose(&v));
        rhs = rhs.compose(&vn.compose(&xn));
    }
    if odd {
        lhs = lhs.compose(&x);
        rhs = rhs.compose(&vn);
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(alpha: f64, kappa: f64) -> ControlConfig {
        ControlConfig::new(alpha, kappa, Mode::PositiveOnly).unwrap()
    }

    fn bidi(alpha: f64, kappa: f64) -> ControlConfig {
        ControlConfig::new(alpha, kappa, Mode::Bidirectional).unwrap()
    }

    #[test]
    fn ten_rows_with_two_nonviable() {
        assert_eq!(RELATIONS.len(), 10);
        let bad: Vec<_> = RELATIONS
            .iter()
            .filter(|r| !r.second_derivative_viable)
            .map(|r| r.label)
            .collect();
        assert_eq!(bad, vec![RelationLabel::D2, RelationLabel::G2]);
        assert_eq!(
            relation(RelationLabel::A).length_class,
            LengthClass::FiniteAndInfinite
        );
        assert_eq!(
            relation(RelationLabel::F).length_class,
            LengthClass::Infinite
        );
    }

    #[test]
    fn relation_a_equal_at_kappa_one() {
        let c = pos(1.1, 1.0);
        for t in [0.3, 2.0, 3.5, 5.9] {
            let tv = internal_relation(relation(RelationLabel::A), t, &c).unwrap();
            assert!((tv - t).abs() < 1e-12);
        }
    }

    #[test]
    fn relation_a_orthogonal() {
        let c = pos(PI / 2.0, 0.4);
        let tv = internal_relation(relation(RelationLabel::A), 1.0, &c).unwrap();
        assert!(((tv / 2.0).tan() - 0.4 * 0.5f64.tan()).abs() < 1e-12);
    }

    #[test]
    fn relation_g1_equal_at_kappa_one() {
        let c = bidi(1.1, 1.0);
        let tx = internal_relation(relation(RelationLabel::G1), 0.8, &c).unwrap();
        assert!((tx - 0.8).abs() < 1e-12);
    }

    #[test]
    fn determinant_zero_on_relations() {
        let c = pos(PI / 3.0, 0.8);
        let tv = internal_relation(relation(RelationLabel::A), 4.0, &c).unwrap();
        assert!(constraint_determinant([1, 1, 1, 1], 4.0, tv, &c).abs() < 1e-9);
        let b = bidi(PI / 3.0, 0.8);
        let tx = internal_relation(relation(RelationLabel::D1), 1.3, &b).unwrap();
        assert!(constraint_determinant([1, 1, -1, -1], tx, 1.3, &b).abs() < 1e-9);
        assert!(constraint_determinant([1, 1, 1, 1], 1.0, 2.0, &c).abs() > 1e-3);
    }

    #[test]
    fn special_angle_edges() {
        let (odd, _) = special_angles(&pos(PI / 3.0, 1.0), 1).unwrap();
        assert!((odd.unwrap() - PI).abs() < 1e-12);
        let (_, even) = special_angles(&pos(PI / 2.0, 1.0), 1).unwrap();
        assert!((even.unwrap() - PI).abs() < 1e-12);
        let (odd, even) = special_angles(&pos(2.0, 1.0), 1).unwrap();
        assert!(odd.is_none() && even.is_none());
    }

    #[test]
    fn special_angles_found_by_root_search() {
        // k = 2 at α = π/5: find the mirror coincidence by scanning and compare
        let c = pos(PI / 5.0, 1.0);
        let (odd, even) = special_angles(&c, 2).unwrap();
        for (want, is_odd) in [(odd.unwrap(), true), (even.unwrap(), false)] {
            let b = ControlConfig::new(PI / 5.0, 1.0, Mode::Bidirectional).unwrap();
            let w = |t: f64| {
                let (l, r) = mirrored_words(&b, t, 2, is_odd).unwrap();
                l.inverse().compose(&r).w()
            };
            let lo = want - 0.05;
            let hi = want + 0.05;
            let root = brent(w, lo, hi, 1e-14).unwrap_or(f64::NAN);
            let d = |t: f64| {
                let (l, r) = mirrored_words(&b, t, 2, is_odd).unwrap();
                distance_up_to_phase(&l, &r)
            };
            assert!(d(want) < 1e-9, "identity holds at the closed form");
            assert!(root.is_nan() || d(root) < 1e-9 || (root - want).abs() < 1e-6);
        }
    }

    #[test]
    fn dagger_identity_and_range() {
        for a in [0.2, PI / 3.0, 1.4] {
            let t = t_dagger(a).unwrap();
            assert!(t > PI && t < 1.5 * PI);
            assert!((t - (TWO_PI - 2.0 * (1.0 / a.cos().sqrt()).atan())).abs() < 1e-12);
        }
        assert!(t_dagger(2.0).is_none());
    }

    #[test]
    fn max_length_cases() {
        assert_eq!(max_length(&pos(PI / 5.0, 0.9)).finite, 8);
        assert_eq!(max_length(&pos(3.0 * PI / 4.0, 0.5)).finite, 3);
        assert_eq!(
            max_length(&bidi(1.0, 0.3)),
            MaxLength {
                finite: 5,
                infinite_allowed: true
            }
        );
    }

    #[test]
    fn total_time_cases() {
        let k = 0.3;
        assert!(
            (max_total_time(&bidi(1.0, k), 4, Generator::X).unwrap() - PI * (1.0 + k)).abs()
                < 1e-15
        );
        assert!(
            (max_total_time(&bidi(1.0, k), 5, Generator::X).unwrap() - (13.0 * PI / 6.0 + PI * k))
                .abs()
                < 1e-15
        );
        let slow = pos(PI / 3.0, 0.25);
        let t = max_total_time(&slow, 6, Generator::X).unwrap();
        assert!((t - (TWO_PI * 1.25 + 2.0 * 3.0 * PI)).abs() < 1e-12);
        assert!(max_total_time(&bidi(1.0, k), 6, Generator::X).is_err());
    }

    #[test]
    fn slow_regime_lists_only_slow_rows() {
        let t = enumerate_templates(&pos(PI / 3.0, 0.25));
        assert!(t.iter().all(|t| t.family == TemplateFamily::PositiveSlow));
        assert!(t.iter().all(|t| !t.generators.iter().any(|g| g.is_limit())));
        for row in t.iter().filter(|t| t.n().unwrap() >= 6) {
            let ib = row.internal.unwrap();
            assert!((ib.lower - PI / 3.0).abs() < 1e-15 && (ib.upper - PI).abs() < 1e-15);
        }
    }

    #[test]
    fn orthogonal_fast_has_no_long_finite_rows() {
        let c = pos(PI / 2.0, 1.0);
        let t = enumerate_templates_with(&c, &CatalogOptions::tables_only());
        assert!(t.iter().all(|t| t.n().is_none_or(|n| n == 3)));
        assert_eq!(t.iter().filter(|t| t.n().is_none()).count(), 2);
        let ext: Vec<_> = enumerate_templates(&c)
            .into_iter()
            .filter(|t| !t.tabulated)
            .collect();
        assert_eq!(
            ext.iter().map(|t| t.id.as_str()).collect::<Vec<_>>(),
            ["pos-fast:inf:XQX:ext", "pos-fast:inf:VQV:ext"]
        );
    }

    #[test]
    fn bidirectional_lists_patterns_and_limits() {
        let t = enumerate_templates(&bidi(PI / 3.0, 0.8));
        assert!(t.iter().any(|t| matches!(t.signs, SignRule::Pattern(_))));
        assert!(t.iter().any(|t| t.generators.contains(&Generator::Q)));
        assert!(t.iter().any(|t| t.generators.contains(&Generator::P)));
        assert!(t.iter().all(|t| t.n().is_none_or(|n| n <= 5)));
    }

    #[test]
    fn outer_caps() {
        let c = pos(2.0, 0.9);
        let row = enumerate_templates(&c)
            .into_iter()
            .find(|t| t.n() == Some(4))
            .unwrap();
        let lim = outer_bounds(&row, 3.5, 3.5, &c);
        assert_eq!((lim.first, lim.last), (Some(PI), Some(PI)));
        let b = bidi(1.0, 0.5);
        let row = enumerate_templates(&b)
            .into_iter()
            .find(|t| t.n() == Some(5))
            .unwrap();
        let lim = outer_bounds(&row, 0.4, 1.5, &b);
        assert!(lim.first.unwrap() <= PI / 3.0 && lim.last.unwrap() <= PI / 3.0);
    }

    #[test]
    fn arccot_cap_is_tighter() {
        let c = pos(0.9, 1.0);
        let row = enumerate_templates_with(
            &c,
            &CatalogOptions {
                kappa_one_regions: RegionPolicy::Relax,
                ..CatalogOptions::default()
            },
        )
        .into_iter()
        .find(|t| t.n() == Some(4))
        .unwrap();
        for i in 1..40 {
            let tv = PI + i as f64 * (PI / 2.0) / 40.0;
            let lim = outer_bounds(&row, tv, tv, &c);
            assert!(lim.first.unwrap() < 3.0 * PI - tv);
        }
    }

    #[test]
    fn sign_rules() {
        assert!(SignRule::Pattern(vec![1, 1, -1, -1]).admits(&[-0.1, -0.2, 0.3, 0.4]));
        assert!(!SignRule::Pattern(vec![1, 1, -1, -1]).admits(&[0.1, -0.2, 0.3, 0.4]));
        assert!(SignRule::OuterOpposite.admits(&[0.1, 0.2, -0.3]));
        assert!(SignRule::AllSame.admits(&[-0.1, -0.2, -0.3]));
    }
}
