// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Optional `key = value` defaults file. Keys are the long flag names.

use std::collections::BTreeMap;

pub const KEYS: [&str; 8] = [
    "alpha", "kappa", "mode", "target", "tol", "grid", "max-len", "out",
];

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key = value", i + 1));
        };
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(format!("config line {}: unknown key {k:?}", i + 1));
        }
        out.insert(k, v.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_pairs_and_comments() {
        let m =
            parse("# defaults\nalpha = 1.0\nmax_len=5 # short\n\nmode = \"positive\"\n").unwrap();
        assert_eq!(m["alpha"], "1.0");
        assert_eq!(m["max-len"], "5");
        assert_eq!(m["mode"], "positive");
    }

    #[test]
    fn target_values_keep_their_equals_sign() {
        let m = parse("target = axis=0,0,1:angle=1").unwrap();
        assert_eq!(m["target"], "axis=0,0,1:angle=1");
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(parse("speed = 3").is_err());
        assert!(parse("alpha").is_err());
    }
}
