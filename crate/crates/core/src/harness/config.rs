//! Experiment and prior configuration files.
//!
//! A prior file holds one arm per line as `m xi sigma` (whitespace or comma
//! separated); blank lines and `#` comments are ignored.
//!
//! An experiment file is TOML whose keys mirror [`ExperimentConfig`]. The
//! `prior` key is either a path to a prior file (relative paths resolve
//! against the experiment file's directory) or an inline array of
//! `{ m, xi, sigma }` tables.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{PolicyKind, DEFAULT_PULL_CAP};
use crate::error::{Error, Result};
use crate::prior::{check_delta, ArmPrior, Prior};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub prior: Prior,
    pub delta: f64,
    pub policy: PolicyKind,
    pub n_trials: u64,
    pub master_seed: u64,
    pub pull_cap: u64,
    /// Reuse the same model draw for trial i across policies.
    pub paired: bool,
}

impl ExperimentConfig {
    pub fn new(prior: Prior, delta: f64, policy: PolicyKind, n_trials: u64, master_seed: u64) -> Self {
        Self {
            prior,
            delta,
            policy,
            n_trials,
            master_seed,
            pull_cap: DEFAULT_PULL_CAP,
            paired: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", "must be at least 1"));
        }
        if self.pull_cap == 0 {
            return Err(Error::invalid("pull_cap", "must be at least 1"));
        }
        Ok(())
    }

    /// Same experiment with a different policy.
    pub fn with_policy(&self, policy: PolicyKind) -> Self {
        Self { policy, ..self.clone() }
    }

    /// Reads and validates an experiment file.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let cfg = Self::from_toml_str(&text, base).map_err(|e| match e {
            Error::Config { reason, .. } => Error::Config {
                path: path.to_path_buf(),
                reason,
            },
            other => other,
        })?;
        Ok(cfg)
    }

    /// Parses an experiment description; prior paths resolve against `base`.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config {
            path: PathBuf::from("<config>"),
            reason: e.to_string(),
        })?;
        let prior = match raw.prior {
            PriorSource::Path(p) => {
                let p = PathBuf::from(p);
                read_prior_file(if p.is_absolute() { p } else { base.join(p) })?
            }
            PriorSource::Inline(arms) => Prior::new(arms)?,
        };
        let cfg = Self {
            prior,
            delta: raw.delta,
            policy: raw.policy,
            n_trials: raw.n_trials,
            master_seed: raw.master_seed,
            pull_cap: raw.pull_cap,
            paired: raw.paired,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PriorSource {
    Path(String),
    Inline(Vec<ArmPrior>),
}

fn default_pull_cap() -> u64 {
    DEFAULT_PULL_CAP
}

fn default_paired() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    prior: PriorSource,
    delta: f64,
    policy: PolicyKind,
    n_trials: u64,
    #[serde(default)]
    master_seed: u64,
    #[serde(default = "default_pull_cap")]
    pull_cap: u64,
    #[serde(default = "default_paired")]
    paired: bool,
}

/// Parses prior-file text.
pub fn parse_prior(text: &str) -> std::result::Result<Prior, String> {
    let mut arms = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 3 {
            return Err(format!(
                "line {}: expected `m xi sigma`, found {} fields",
                n + 1,
                fields.len()
            ));
        }
        let mut values = [0.0; 3];
        for (v, f) in values.iter_mut().zip(&fields) {
            *v = f
                .parse()
                .map_err(|_| format!("line {}: `{f}` is not a number", n + 1))?;
        }
        let arm = ArmPrior::new(values[0], values[1], values[2]).map_err(|e| format!("line {}: {e}", n + 1))?;
        arms.push(arm);
    }
    Prior::new(arms).map_err(|e| e.to_string())
}

pub fn read_prior_file(path: impl AsRef<Path>) -> Result<Prior> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_prior(&text).map_err(|reason| Error::Config {
        path: path.to_path_buf(),
        reason,
    })
}

/// Renders a prior in the prior-file format.
pub fn format_prior(prior: &Prior) -> String {
    let mut out = String::from("# m xi sigma\n");
    for a in prior.arms() {
        out.push_str(&format!("{} {} {}\n", a.m, a.xi, a.sigma));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_prior_text() {
        let p = parse_prior("# header\n0 1 1\n\n2.5, 0.5, 2 # trailing\n").unwrap();
        assert_eq!(p.k(), 2);
        assert_eq!(p.arms()[1], ArmPrior::new(2.5, 0.5, 2.0).unwrap());
        assert_eq!(parse_prior(&format_prior(&p)).unwrap(), p);
    }

    #[test]
    fn rejects_bad_prior_text() {
        assert!(parse_prior("0 1\n0 1 1\n").unwrap_err().contains("line 1"));
        assert!(parse_prior("0 1 x\n0 1 1\n").unwrap_err().contains("not a number"));
        assert!(parse_prior("0 -1 1\n0 1 1\n").is_err());
        assert!(parse_prior("0 1 1\n").is_err());
    }

    #[test]
    fn inline_prior_config() {
        let text = r#"
            delta = 0.1
            policy = "ttucb"
            n_trials = 10
            master_seed = 3
            prior = [{ m = 0.0, xi = 1.0, sigma = 1.0 }, { m = 1.0, xi = 2.0, sigma = 0.5 }]
        "#;
        let cfg = ExperimentConfig::from_toml_str(text, Path::new(".")).unwrap();
        assert_eq!(cfg.policy, PolicyKind::Ttucb);
        assert_eq!(cfg.pull_cap, DEFAULT_PULL_CAP);
        assert!(cfg.paired);
        assert_eq!(cfg.prior.k(), 2);
    }

    #[test]
    fn zero_trials_rejected() {
        let text = r#"
            delta = 0.1
            policy = "elim"
            n_trials = 0
            prior = [{ m = 0.0, xi = 1.0, sigma = 1.0 }, { m = 0.0, xi = 1.0, sigma = 1.0 }]
        "#;
        assert!(matches!(
            ExperimentConfig::from_toml_str(text, Path::new(".")),
            Err(Error::InvalidParameter { name: "n_trials", .. })
        ));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"
            delta = 0.1
            policy = "elim"
            n_trials = 1
            trials = 4
            prior = [{ m = 0.0, xi = 1.0, sigma = 1.0 }, { m = 0.0, xi = 1.0, sigma = 1.0 }]
        "#;
        assert!(ExperimentConfig::from_toml_str(text, Path::new(".")).is_err());
    }

    #[test]
    fn prior_path_resolves_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("two.prior"), "0 1 1\n0 1 1\n").unwrap();
        let cfg_path = dir.path().join("exp.toml");
        std::fs::write(
            &cfg_path,
            "prior = \"two.prior\"\ndelta = 0.2\npolicy = \"noelim\"\nn_trials = 5\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::from_file(&cfg_path).unwrap();
        assert_eq!(cfg.prior, Prior::standard(2).unwrap());
        assert_eq!(cfg.policy, PolicyKind::NoElim);
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_prior_file("/nonexistent/dir/h.prior").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/h.prior"));
    }
}
