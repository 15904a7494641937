//! Flat `key = value` config files and resolution of the effective settings.
//!
//! Precedence is command-line flag, then config file, then default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use triplesim::{Backend, NumericMode, SetMode};

const KEYS: &[&str] = &[
    "alpha",
    "beta",
    "gamma",
    "backend",
    "set_mode",
    "numeric_mode",
    "embedding_path",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub backend: Option<Backend>,
    pub set_mode: Option<SetMode>,
    pub numeric_mode: Option<NumericMode>,
    pub embedding_path: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key = value", i + 1);
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                bail!("line {}: unknown key {key:?}", i + 1);
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }

        let number = |key: &str| -> Result<Option<f64>> {
            entries
                .get(key)
                .map(|v| v.parse::<f64>().with_context(|| format!("{key} must be a number")))
                .transpose()
        };
        let parsed = |key: &str| entries.get(key).map(String::as_str);

        Ok(FileConfig {
            alpha: number("alpha")?,
            beta: number("beta")?,
            gamma: number("gamma")?,
            backend: parsed("backend").map(str::parse).transpose().map_err(anyhow::Error::msg)?,
            set_mode: parsed("set_mode").map(str::parse).transpose().map_err(anyhow::Error::msg)?,
            numeric_mode: parsed("numeric_mode")
                .map(str::parse)
                .transpose()
                .map_err(anyhow::Error::msg)?,
            embedding_path: parsed("embedding_path").map(PathBuf::from),
        })
    }

    pub fn weights(&self) -> Option<(f64, f64, f64)> {
        if self.alpha.is_none() && self.beta.is_none() && self.gamma.is_none() {
            return None;
        }
        Some((
            self.alpha.unwrap_or(1.0),
            self.beta.unwrap_or(1.0),
            self.gamma.unwrap_or(1.0),
        ))
    }
}

/// Parses `a,b,g`.
pub fn parse_weights(text: &str) -> std::result::Result<(f64, f64, f64), String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format!("bad weight: {e}"))?;
    match parts[..] {
        [a, b, g] => Ok((a, b, g)),
        _ => Err(format!("expected three weights a,b,g, got {}", parts.len())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let cfg = FileConfig::parse(
            "# run settings\nalpha = 0\nbeta=1.5\ngamma = 1.5\nbackend = tfidf\nset_mode = literal\nnumeric_mode = minmax\nembedding_path = emb.vec\n",
        )
        .unwrap();
        assert_eq!(cfg.weights(), Some((0.0, 1.5, 1.5)));
        assert_eq!(cfg.backend, Some(Backend::TfIdf));
        assert_eq!(cfg.set_mode, Some(SetMode::Literal));
        assert_eq!(cfg.numeric_mode, Some(NumericMode::MinMax));
        assert_eq!(cfg.embedding_path, Some(PathBuf::from("emb.vec")));
    }

    #[test]
    fn partial_weights_default_to_one() {
        let cfg = FileConfig::parse("gamma = 2").unwrap();
        assert_eq!(cfg.weights(), Some((1.0, 1.0, 2.0)));
        assert_eq!(FileConfig::parse("").unwrap().weights(), None);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(FileConfig::parse("colour = red").is_err());
        assert!(FileConfig::parse("alpha").is_err());
        assert!(FileConfig::parse("alpha = x").is_err());
        assert!(FileConfig::parse("backend = word2vec").is_err());
    }

    #[test]
    fn weight_flag() {
        assert_eq!(parse_weights("1,1,1"), Ok((1.0, 1.0, 1.0)));
        assert_eq!(parse_weights("0, 1.5, 1.5"), Ok((0.0, 1.5, 1.5)));
        assert!(parse_weights("1,1").is_err());
        assert!(parse_weights("a,b,c").is_err());
    }
}
