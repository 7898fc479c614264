//! Effective run configuration: config-file entries overridden by command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};

/// Flat `key=value` settings. Keys use underscores; `tau-max` and `tau_max` are the same key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    entries: BTreeMap<String, String>,
}

pub fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Settings {
    /// Parses a config file: one `key=value` per line, blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| {
                    anyhow!(crate::UsageError(format!("config line {}: expected key=value, got {raw:?}", k + 1)))
                })?;
            let key = normalize_key(key);
            if key.is_empty() {
                return Err(anyhow!(crate::UsageError(format!("config line {}: empty key", k + 1))));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.insert(normalize_key(key), value.to_string());
    }

    /// Sets `key` only when the flag was given; flags win over file entries.
    pub fn set_opt<T: Display>(&mut self, key: &str, value: &Option<T>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn set_default(&mut self, key: &str, value: impl Display) {
        self.entries
            .entry(normalize_key(key))
            .or_insert_with(|| value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize_key(key)).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow!(crate::UsageError(format!("{key}={v}: {e}")))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        self.get(key)?
            .ok_or_else(|| anyhow!(crate::UsageError(format!("missing required setting {key}"))))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// `# key=value` lines for output headers.
    pub fn header(&self) -> String {
        self.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.iter()
                .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.to_string())))
                .collect(),
        )
    }
}

/// One swept parameter and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<f64>,
}

/// `key=v1,v2,...` or `key=start:stop:count` (inclusive, evenly spaced).
pub fn parse_sweep(spec: &str) -> Result<Sweep> {
    let (key, rest) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!(crate::UsageError(format!("sweep {spec:?}: expected key=values"))))?;
    let bad = |msg: &str| anyhow!(crate::UsageError(format!("sweep {spec:?}: {msg}")));
    let values = if rest.contains(':') {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range form is start:stop:count"));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad("bad start"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad("bad stop"))?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad("bad count"))?;
        match count {
            0 => return Err(bad("count must be positive")),
            1 => vec![start],
            _ => (0..count)
                .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
                .collect(),
        }
    } else {
        rest.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad("values must be numbers")))
            .collect::<Result<_>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(Sweep {
        key: normalize_key(key),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut s = Settings::parse("# run\ntau-max = 50\nseed=3 # trailing\n\nalpha=0.05\n").unwrap();
        assert_eq!(s.get::<usize>("tau_max").unwrap(), Some(50));
        s.set_opt("tau-max", &Some(80));
        s.set_opt::<u64>("seed", &None);
        s.set_default("alpha", 0.01);
        assert_eq!(s.require::<usize>("tau_max").unwrap(), 80);
        assert_eq!(s.require::<u64>("seed").unwrap(), 3);
        assert_eq!(s.require::<f64>("alpha").unwrap(), 0.05);
        assert!(s.header().contains("# tau_max=80\n"));
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        assert!(Settings::parse("tau_max 50").is_err());
        assert!(Settings::parse("=3").is_err());
        let s = Settings::parse("n=ten").unwrap();
        assert!(s.get::<usize>("n").is_err());
        assert!(s.require::<usize>("seed").is_err());
    }

    #[test]
    fn sweep_forms() {
        assert_eq!(parse_sweep("phi=0,0.5,1").unwrap().values, vec![0.0, 0.5, 1.0]);
        let r = parse_sweep("var=0:0.01:5").unwrap();
        assert_eq!(r.key, "var");
        assert_eq!(r.values.len(), 5);
        assert!((r.values[4] - 0.01).abs() < 1e-15 && (r.values[1] - 0.0025).abs() < 1e-15);
        assert_eq!(parse_sweep("var=0.3:1:1").unwrap().values, vec![0.3]);
        for bad in ["var", "var=a,b", "var=0:1", "var=0:1:0", "var=inf"] {
            assert!(parse_sweep(bad).is_err(), "{bad}");
        }
    }
}
