//! Flat `key = value` configuration with dotted namespaces, or the equivalent JSON object.
//!
//! Every key read by a runner is recorded with its effective value (defaults included) for the
//! manifest; keys that no runner read are rejected by [`Config::finish`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_text(text)
        }
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut cfg = Self::new();
        for (no, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", no + 1)))?;
            let k = k.trim();
            if k.is_empty() || k.split('.').any(|p| p.is_empty()) {
                return Err(config_err(format!("line {}: malformed key {k:?}", no + 1)));
            }
            if cfg.entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(config_err(format!("line {}: duplicate key {k}", no + 1)));
            }
        }
        Ok(cfg)
    }

    /// Nested objects become dotted keys; arrays become comma-separated lists.
    pub fn parse_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let mut cfg = Self::new();
        flatten("", &value, &mut cfg.entries)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Insert or replace a value (command-line overrides).
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn record(&self, key: &str, value: String) {
        self.resolved.borrow_mut().insert(key.to_string(), value);
    }

    pub fn get<T: FromStr + ToString>(&self, key: &str, default: T) -> Result<T> {
        match self.entries.get(key) {
            Some(raw) => {
                let v = raw
                    .parse::<T>()
                    .map_err(|_| config_err(format!("{key}: cannot parse {raw:?}")))?;
                self.record(key, raw.clone());
                Ok(v)
            }
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            Some(raw) => {
                self.record(key, raw.clone());
                raw.parse::<T>()
                    .map(Some)
                    .map_err(|_| config_err(format!("{key}: cannot parse {raw:?}")))
            }
            None => {
                self.record(key, String::new());
                Ok(None)
            }
        }
    }

    pub fn get_list<T: FromStr + ToString + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>> {
        match self.entries.get(key) {
            Some(raw) => {
                let tokens: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                let items = tokens
                    .iter()
                    .map(|s| s.parse::<T>().map_err(|_| config_err(format!("{key}: cannot parse {s:?}"))))
                    .collect::<Result<Vec<T>>>()?;
                self.record(key, tokens.join(","));
                Ok(items)
            }
            None => {
                let joined: Vec<String> = default.iter().map(ToString::to_string).collect();
                self.record(key, joined.join(","));
                Ok(default.to_vec())
            }
        }
    }

    /// Error on the first key no runner asked for.
    pub fn finish(&self) -> Result<()> {
        let seen = self.resolved.borrow();
        match self.entries.keys().find(|k| !seen.contains_key(*k)) {
            Some(k) => Err(config_err(format!("unknown key {k}"))),
            None => Ok(()),
        }
    }

    /// Effective values of every key read so far.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.resolved.borrow().clone()
    }
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut BTreeMap<String, String>) -> Result<()> {
    use serde_json::Value;
    let scalar = |v: &Value| -> Result<String> {
        match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            Value::Bool(b) => Ok(b.to_string()),
            other => Err(config_err(format!("{prefix}: unsupported value {other}"))),
        }
    };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out)?;
            }
        }
        Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
            out.insert(prefix.to_string(), parts.join(","));
        }
        other => {
            if prefix.is_empty() {
                return Err(config_err("top level must be an object"));
            }
            out.insert(prefix.to_string(), scalar(other)?);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "\
# census sweep
seed = 7
resonance.gap_factor = 4   # G
census.n = 4, 8
";

    #[test]
    fn text_and_json_agree() {
        let a = Config::parse(TEXT).unwrap();
        let b = Config::parse(r#"{"seed": 7, "resonance": {"gap_factor": 4}, "census": {"n": [4, 8]}}"#).unwrap();
        for cfg in [&a, &b] {
            assert_eq!(cfg.get("seed", 0u64).unwrap(), 7);
            assert_eq!(cfg.get("resonance.gap_factor", 3.0).unwrap(), 4.0);
            assert_eq!(cfg.get_list("census.n", &[1.0]).unwrap(), vec![4.0, 8.0]);
            cfg.finish().unwrap();
        }
        assert_eq!(a.echo(), b.echo());
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let cfg = Config::parse("seed = 1\nbogus.key = 2").unwrap();
        cfg.get("seed", 0u64).unwrap();
        assert!(matches!(cfg.finish(), Err(Error::Config(m)) if m.contains("bogus.key")));
        assert!(Config::parse("no equals sign").is_err());
        assert!(Config::parse("a..b = 1").is_err());
        assert!(Config::parse("a = 1\na = 2").is_err());
        assert!(Config::parse("seed = x").unwrap().get("seed", 0u64).is_err());
    }

    #[test]
    fn defaults_are_echoed() {
        let cfg = Config::new();
        assert_eq!(cfg.get("dt", 0.5).unwrap(), 0.5);
        assert_eq!(cfg.get_opt::<f64>("t_end").unwrap(), None);
        let echo = cfg.echo();
        assert_eq!(echo["dt"], "0.5");
        assert!(echo.contains_key("t_end"));
    }
}
