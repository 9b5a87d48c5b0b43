// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Versioned JSON documents for synthesis and oracle results.
//!
//! Floats are rounded to 15 significant digits so that output is stable across
//! platforms. [`read_result`] parses a synthesis document back into a config and a
//! sequence.

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{domain, Result};
use crate::geometry::{round_sig, ControlConfig, Generator, Mode, PulseSequence, UnitQuaternion};
use crate::oracle::OracleResult;
use crate::search::SynthesisResult;

pub const SCHEMA: u32 = 1;
pub const DIGITS: usize = 15;

fn num(x: f64) -> Value {
    json!(round_sig(x, DIGITS))
}

fn target_json(target: &UnitQuaternion) -> Value {
    let (axis, angle) = target
        .axis_angle()
        .map_or(([0.0, 0.0, 1.0], 0.0), |(a, t)| {
            let v = a.vector();
            ([v.x, v.y, v.z], t)
        });
    json!({ "axis": axis.iter().map(|&x| num(x)).collect::<Vec<_>>(), "angle": num(angle) })
}

fn config_json(config: &ControlConfig) -> Value {
    json!({ "alpha": num(config.alpha()), "kappa": num(config.kappa()), "mode": config.mode() })
}

fn sequence_json(seq: &PulseSequence) -> Value {
    Value::Array(
        seq.pulses()
            .iter()
            .map(|p| json!({ "gen": p.generator, "angle": num(p.angle), "cost": num(p.cost) }))
            .collect(),
    )
}

pub fn synthesis_json(
    target: &UnitQuaternion,
    config: &ControlConfig,
    result: &SynthesisResult,
) -> Value {
    let runner_ups: Vec<Value> = result
        .runner_ups
        .iter()
        .map(|c| {
            json!({
                "sequence": sequence_json(&c.sequence),
                "total_cost": num(c.sequence.total_cost()),
                "residual": num(c.residual),
                "template": c.template_id,
            })
        })
        .collect();
    json!({
        "schema": SCHEMA,
        "target": target_json(target),
        "config": config_json(config),
        "sequence": sequence_json(&result.best),
        "total_cost": num(result.best.total_cost()),
        "residual": num(result.residual),
        "template": result.template_id,
        "runner_ups": runner_ups,
        "stats": result.stats,
    })
}

pub fn oracle_json(
    target: &UnitQuaternion,
    config: &ControlConfig,
    result: &OracleResult,
) -> Value {
    json!({
        "schema": SCHEMA,
        "target": target_json(target),
        "config": config_json(config),
        "sequence": sequence_json(&result.sequence),
        "total_cost": num(result.cost),
        "residual": num(result.residual),
        "grid_cost": num(result.grid_cost),
        "grid_error_bound": num(result.grid_error_bound),
        "lower_bound": num(result.cost - result.grid_error_bound),
    })
}

/// `gen,angle,cost` rows with a header.
pub fn sequence_csv(seq: &PulseSequence) -> String {
    let mut s = String::from("gen,angle,cost\n");
    for p in seq.pulses() {
        s.push_str(&format!(
            "{:?},{},{}\n",
            p.generator,
            crate::geometry::sig(p.angle, DIGITS),
            crate::geometry::sig(p.cost, DIGITS)
        ));
    }
    s
}

#[derive(Deserialize)]
struct DocConfig {
    alpha: f64,
    kappa: f64,
    mode: Mode,
}

#[derive(Deserialize)]
struct DocPulse {
    #[serde(rename = "gen")]
    generator: Generator,
    angle: f64,
}

#[derive(Deserialize)]
struct Doc {
    schema: u32,
    config: DocConfig,
    sequence: Vec<DocPulse>,
}

/// Config and sequence from a synthesis or oracle document.
pub fn read_result(text: &str) -> Result<(ControlConfig, PulseSequence)> {
    let doc: Doc =
        serde_json::from_str(text).map_err(|e| domain(format!("bad result document: {e}")))?;
    if doc.schema != SCHEMA {
        return Err(domain(format!("unsupported schema {}", doc.schema)));
    }
    let config = ControlConfig::new(doc.config.alpha, doc.config.kappa, doc.config.mode)?;
    let pulses = doc
        .sequence
        .iter()
        .map(|p| crate::geometry::Pulse::new(p.generator, p.angle, &config))
        .collect::<Result<Vec<_>>>()?;
    Ok((config, PulseSequence::new(pulses)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Axis;
    use crate::search::{synthesize, SynthesisOptions};

    #[test]
    fn round_trip_keeps_cost() {
        let c = ControlConfig::new(1.0, 0.6, Mode::Bidirectional).unwrap();
        let target = UnitQuaternion::from_axis_angle(&Axis::new(0.2, 0.4, 0.9).unwrap(), 1.7);
        let r = synthesize(&target, &c, &SynthesisOptions::default()).unwrap();
        let text = synthesis_json(&target, &c, &r).to_string();
        let (c2, seq) = read_result(&text).unwrap();
        assert_eq!(c2.mode(), Mode::Bidirectional);
        assert!((seq.total_cost() - r.best.total_cost()).abs() < 1e-12);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["config"]["mode"], "bidirectional");
    }

    #[test]
    fn fifteen_digits() {
        assert_eq!(num(std::f64::consts::PI).to_string(), "3.14159265358979");
    }

    #[test]
    fn wrong_schema_rejected() {
        let text = r#"{"schema":2,"config":{"alpha":1,"kappa":1,"mode":"positive"},"sequence":[]}"#;
        assert!(read_result(text).is_err());
    }
}
