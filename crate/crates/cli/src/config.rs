//! Flat key=value experiment configuration: a text file of `key = value`
//! lines with `#` comments, optionally overridden by `--key value` pairs
//! from the command line. Commands declare their accepted keys and anything
//! else is rejected.

use std::collections::BTreeMap;
use std::path::Path;

use crate::Failure;

#[derive(Debug, Clone)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

/// Parses a float, additionally accepting a `pi` suffix and `a/b` fractions
/// so mesh sizes like `2/5` and frequencies like `6pi` stay readable.
pub fn parse_float(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let d = parse_plain(den)?;
        if d == 0.0 {
            return None;
        }
        return Some(parse_plain(num)? / d);
    }
    parse_plain(s)
}

fn parse_plain(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(head) = s.strip_suffix("pi") {
        let head = head.trim();
        let factor = if head.is_empty() { 1.0 } else { head.parse::<f64>().ok()? };
        return Some(factor * std::f64::consts::PI);
    }
    s.parse().ok()
}

impl Config {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Failure::config(format!(
                    "{}:{}: expected key = value, got {:?}",
                    path.display(),
                    lineno + 1,
                    line
                ))
            })?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        apply_overrides(&mut entries, overrides)?;
        Ok(Self { entries })
    }

    /// Rejects keys outside the command's vocabulary.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), Failure> {
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .map(String::as_str)
            .filter(|k| !allowed.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Failure::config(format!("unknown config keys: {}", unknown.join(", "))))
        }
    }

    pub fn opt_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require_str(&self, key: &str) -> Result<&str, Failure> {
        self.opt_str(key)
            .ok_or_else(|| Failure::config(format!("missing required config key {key}")))
    }

    pub fn opt_f64(&self, key: &str, default: f64) -> Result<f64, Failure> {
        match self.opt_str(key) {
            None => Ok(default),
            Some(s) => parse_float(s)
                .ok_or_else(|| Failure::config(format!("{key}: cannot parse {s:?} as a number"))),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, Failure> {
        let s = self.require_str(key)?;
        parse_float(s).ok_or_else(|| Failure::config(format!("{key}: cannot parse {s:?} as a number")))
    }

    pub fn opt_usize(&self, key: &str, default: usize) -> Result<usize, Failure> {
        match self.opt_str(key) {
            None => Ok(default),
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| Failure::config(format!("{key}: cannot parse {s:?} as an integer"))),
        }
    }

    pub fn require_usize(&self, key: &str) -> Result<usize, Failure> {
        let s = self.require_str(key)?;
        s.trim()
            .parse()
            .map_err(|_| Failure::config(format!("{key}: cannot parse {s:?} as an integer")))
    }

    pub fn require_usize_list(&self, key: &str) -> Result<Vec<usize>, Failure> {
        let s = self.require_str(key)?;
        let mut out = Vec::new();
        for part in s.split(',') {
            out.push(part.trim().parse().map_err(|_| {
                Failure::config(format!("{key}: cannot parse {:?} as an integer", part.trim()))
            })?);
        }
        if out.is_empty() {
            return Err(Failure::config(format!("{key}: empty list")));
        }
        Ok(out)
    }

    pub fn require_f64_list(&self, key: &str) -> Result<Vec<f64>, Failure> {
        let s = self.require_str(key)?;
        let mut out = Vec::new();
        for part in s.split(',') {
            out.push(parse_float(part).ok_or_else(|| {
                Failure::config(format!("{key}: cannot parse {:?} as a number", part.trim()))
            })?);
        }
        if out.is_empty() {
            return Err(Failure::config(format!("{key}: empty list")));
        }
        Ok(out)
    }
}

fn apply_overrides(
    entries: &mut BTreeMap<String, String>,
    overrides: &[String],
) -> Result<(), Failure> {
    let mut it = overrides.iter();
    while let Some(tok) = it.next() {
        let body = tok.strip_prefix("--").ok_or_else(|| {
            Failure::config(format!("override {tok:?} must be written --key value or --key=value"))
        })?;
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| {
                    Failure::config(format!("override --{body} is missing a value"))
                })?;
                (body.to_string(), v.clone())
            }
        };
        entries.insert(key, value);
    }
    Ok(())
}
