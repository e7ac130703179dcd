//! Flat `key = value` configuration with `[section]` headers.
//!
//! Keys are addressed as `section.key`. Later sources override earlier ones:
//! built-in defaults, then the config file, then `--set` pairs, then flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Config(BTreeMap<String, String>);

impl Config {
    #[cfg(test)]
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self(pairs.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::Config(format!("line {}: unterminated section header", i + 1)))?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
            let key = if section.is_empty() { k.trim().to_string() } else { format!("{section}.{}", k.trim()) };
            map.insert(key, v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Overlay `other`, refusing keys that `self` does not define.
    pub fn merge(&mut self, other: &Config) -> Result<(), CliError> {
        for (k, v) in &other.0 {
            if !self.0.contains_key(k) {
                return Err(CliError::Config(format!("unknown key `{k}`")));
            }
            self.0.insert(k.clone(), v.clone());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    /// Apply a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{pair}`")))?;
        let k = k.trim();
        if !self.0.contains_key(k) {
            return Err(CliError::Config(format!("unknown key `{k}`")));
        }
        self.0.insert(k.to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Result<&str, CliError> {
        self.0.get(key).map(String::as_str).ok_or_else(|| CliError::Config(format!("missing key `{key}`")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| CliError::Config(format!("`{key}` = `{v}` does not parse")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.get(key)?;
        if !v.is_finite() {
            return Err(CliError::Config(format!("`{key}` must be finite")));
        }
        Ok(v)
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.raw(key)?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| CliError::Config(format!("`{key}`: bad number `{s}`"))))
            .collect()
    }

    /// Render back to the file format; `parse(render())` is the identity.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut current: Option<&str> = None;
        for (k, v) in &self.0 {
            let (sec, key) = k.split_once('.').unwrap_or(("", k));
            if current != Some(sec) {
                if !sec.is_empty() {
                    if current.is_some() {
                        out.push('\n');
                    }
                    let _ = writeln!(out, "[{sec}]");
                }
                current = Some(sec);
            }
            let _ = writeln!(out, "{key} = {v}");
        }
        out
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}
