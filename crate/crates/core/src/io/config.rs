//! Flat `key=value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::trainer::TrainConfig;
use crate::vocab::{Orders, VocabPolicy};

/// Keys a run configuration may contain.
pub const KNOWN_KEYS: &[&str] = &[
    "activation",
    "adam_beta1",
    "adam_beta2",
    "adam_epsilon",
    "batch",
    "case",
    "curriculum",
    "curve",
    "dim",
    "epochs",
    "eval_every",
    "eval_pairs",
    "input",
    "lambda",
    "learning_rate",
    "margin",
    "orders",
    "out",
    "pairs",
    "policy",
    "pool",
    "sampling",
    "seed",
    "vocab",
];

/// Ordered key → value map restricted to [`KNOWN_KEYS`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Parses `key=value` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or((i + 1, format!("expected key=value, got {line:?}")))?;
            cfg.set(k.trim(), v.trim()).map_err(|e| (i + 1, e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text).map_err(|(line, msg)| Error::Parse { path: path.to_path_buf(), line, msg })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::InvalidConfig(format!("unknown key {key:?}")));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Values in `other` replace ours.
    pub fn merge(&mut self, other: &RunConfig) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::InvalidConfig(format!("bad value {v:?} for {key}"))))
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(Error::InvalidConfig(format!("bad boolean {other:?} for {key}"))),
            })
            .transpose()
    }

    /// Overlays every training key present onto `base`.
    pub fn train_config(&self, mut base: TrainConfig) -> Result<TrainConfig> {
        macro_rules! take {
            ($field:ident, $key:literal) => {
                if let Some(v) = self.parsed($key)? {
                    base.$field = v;
                }
            };
        }
        if let Some(a) = self.get("activation") {
            base.activation = a.parse()?;
        }
        if let Some(c) = self.get("case") {
            base.case = c.parse()?;
        }
        if let Some(s) = self.get("sampling") {
            base.sampling = s.parse()?;
        }
        if let Some(p) = self.get("pool") {
            base.pool = p.parse()?;
        }
        take!(dim, "dim");
        take!(margin, "margin");
        take!(lambda, "lambda");
        take!(learning_rate, "learning_rate");
        take!(batch_size, "batch");
        take!(epochs, "epochs");
        take!(seed, "seed");
        take!(adam_beta1, "adam_beta1");
        take!(adam_beta2, "adam_beta2");
        take!(adam_epsilon, "adam_epsilon");
        take!(eval_every, "eval_every");
        if let Some(c) = self.flag("curriculum")? {
            base.curriculum = c;
        }
        base.validate()?;
        Ok(base)
    }

    pub fn orders(&self) -> Result<Option<Orders>> {
        self.get("orders").map(str::parse).transpose()
    }

    pub fn policy(&self) -> Result<Option<VocabPolicy>> {
        self.get("policy").map(str::parse).transpose()
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.values {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Key/value view of a complete training configuration.
pub fn describe(config: &TrainConfig) -> RunConfig {
    let mut rc = RunConfig::default();
    let pairs: [(&str, String); 16] = [
        ("dim", config.dim.to_string()),
        ("activation", config.activation.to_string()),
        ("case", config.case.to_string()),
        ("margin", config.margin.to_string()),
        ("lambda", config.lambda.to_string()),
        ("learning_rate", config.learning_rate.to_string()),
        ("batch", config.batch_size.to_string()),
        ("sampling", config.sampling.to_string()),
        ("pool", config.pool.to_string()),
        ("epochs", config.epochs.to_string()),
        ("seed", config.seed.to_string()),
        ("curriculum", config.curriculum.to_string()),
        ("adam_beta1", config.adam_beta1.to_string()),
        ("adam_beta2", config.adam_beta2.to_string()),
        ("adam_epsilon", config.adam_epsilon.to_string()),
        ("eval_every", config.eval_every.to_string()),
    ];
    for (k, v) in pairs {
        rc.set(k, v).expect("describe only emits known keys");
    }
    rc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Activation;
    use crate::trainer::Sampling;

    #[test]
    fn parses_and_overlays() {
        let rc = RunConfig::parse("# tuned\ndim = 50\nactivation=linear\nsampling=mix\ncurriculum=true\nlambda=1e-5\n").unwrap();
        let c = rc.train_config(TrainConfig::default()).unwrap();
        assert_eq!(c.dim, 50);
        assert_eq!(c.activation, Activation::Linear);
        assert_eq!(c.sampling, Sampling::Mix);
        assert!(c.curriculum);
        assert_eq!(c.lambda, 1e-5);
        assert_eq!(c.margin, 0.4);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert_eq!(RunConfig::parse("dim=3\nfoo=1\n").unwrap_err().0, 2);
        assert!(RunConfig::parse("dim\n").is_err());
        let rc = RunConfig::parse("dim=abc\n").unwrap();
        assert!(rc.train_config(TrainConfig::default()).is_err());
        let rc = RunConfig::parse("activation=relu\n").unwrap();
        assert!(rc.train_config(TrainConfig::default()).is_err());
    }

    #[test]
    fn later_values_win() {
        let mut file = RunConfig::parse("dim=10\nseed=1\n").unwrap();
        let flags = RunConfig::parse("seed=2\n").unwrap();
        file.merge(&flags);
        assert_eq!(file.get("seed"), Some("2"));
        assert_eq!(file.get("dim"), Some("10"));
    }

    #[test]
    fn describe_round_trips() {
        let c = TrainConfig { dim: 7, seed: 99, curriculum: true, ..Default::default() };
        let text = describe(&c).to_string();
        let back = RunConfig::parse(&text).unwrap().train_config(TrainConfig::default()).unwrap();
        assert_eq!(back, c);
    }
}
