// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! `--target` parsing: `axis=x,y,z:angle=r`, `gate=NAME` or `quat=w,x,y,z`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use su2opt::{Axis, UnitQuaternion};

/// Inputs whose norm is off by more than this are normalized with a warning.
const NORM_SLACK: f64 = 1e-6;

#[derive(Debug, PartialEq)]
pub struct Parsed {
    pub target: UnitQuaternion,
    pub warnings: Vec<String>,
}

fn numbers(s: &str, want: usize, what: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number {p:?} in {what}"))
        })
        .collect::<Result<_, _>>()?;
    if v.len() != want {
        return Err(format!("{what} needs {want} components, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(format!("{what} must be finite"));
    }
    Ok(v)
}

fn norm_warning(v: &[f64], what: &str, warnings: &mut Vec<String>) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (n - 1.0).abs() > NORM_SLACK {
        warnings.push(format!("{what} has norm {n}; normalized"));
    }
}

fn gate(name: &str) -> Result<UnitQuaternion, String> {
    let about = |axis: Axis| UnitQuaternion::from_axis_angle(&axis, PI);
    Ok(match name {
        "I" => UnitQuaternion::identity(),
        "X_pi" => about(Axis::x_hat()),
        "Y_pi" => about(Axis::y_hat()),
        "Z_pi" => about(Axis::z_hat()),
        "H" => about(Axis::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2).map_err(|e| e.to_string())?),
        _ => {
            return Err(format!(
                "unknown gate {name:?}; expected I, X_pi, Y_pi, Z_pi or H"
            ))
        }
    })
}

pub fn parse(spec: &str) -> Result<Parsed, String> {
    let mut warnings = Vec::new();
    let spec = spec.trim();
    let target = if let Some(name) = spec.strip_prefix("gate=") {
        gate(name)?
    } else if let Some(q) = spec.strip_prefix("quat=") {
        let v = numbers(q, 4, "quat")?;
        norm_warning(&v, "quaternion", &mut warnings);
        UnitQuaternion::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())?
    } else if spec.starts_with("axis=") {
        let mut axis = None;
        let mut angle = None;
        for part in spec.split(':') {
            match part.split_once('=') {
                Some(("axis", v)) => axis = Some(numbers(v, 3, "axis")?),
                Some(("angle", v)) => {
                    angle = Some(
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| format!("bad angle {v:?}"))?,
                    )
                }
                _ => return Err(format!("unexpected {part:?} in axis target")),
            }
        }
        let (Some(a), Some(t)) = (axis, angle) else {
            return Err("axis target needs both axis= and angle=".into());
        };
        if !t.is_finite() {
            return Err("angle must be finite".into());
        }
        norm_warning(&a, "axis", &mut warnings);
        UnitQuaternion::from_axis_angle(&Axis::new(a[0], a[1], a[2]).map_err(|e| e.to_string())?, t)
    } else {
        return Err(format!(
            "unrecognized target {spec:?}; use axis=x,y,z:angle=r, gate=NAME or quat=w,x,y,z"
        ));
    };
    Ok(Parsed { target, warnings })
}
