//! Run configuration: an optional JSON file merged with command-line
//! overrides into the library config types.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use steerfid_core::oracle::OracleConfig;
use steerfid_core::vqsa::{RewardKind, Shots, SpsaGains, VqsaConfig};

use crate::fail::Failure;

/// Shot budget as it appears in JSON and on the command line: a count or
/// the word `exact`.
#[derive(Deserialize)]
#[serde(untagged)]
pub enum ShotsField {
    Count(usize),
    Mode(String),
}

impl ShotsField {
    pub fn resolve(&self) -> Result<Shots, Failure> {
        match self {
            ShotsField::Count(n) => Ok(Shots::Count(*n)),
            ShotsField::Mode(word) if word == "exact" => Ok(Shots::Exact),
            ShotsField::Mode(word) => Err(Failure::config(format!(
                "shots must be a count or \"exact\", got {word:?}"
            ))),
        }
    }

    pub fn parse(text: &str) -> Result<Shots, Failure> {
        if text == "exact" {
            return Ok(Shots::Exact);
        }
        text.parse()
            .map(Shots::Count)
            .map_err(|_| Failure::config(format!("shots must be a count or \"exact\", got {text:?}")))
    }
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpsaSection {
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub big_a: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqsaSection {
    pub layers_w: Option<usize>,
    pub layers_u: Option<usize>,
    pub shots: Option<ShotsField>,
    pub iterations: Option<usize>,
    pub spsa: Option<SpsaSection>,
    pub seed: Option<u64>,
    pub reward: Option<String>,
    pub ref_dim: Option<usize>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub restarts: Option<usize>,
    pub inner_tol: Option<f64>,
    pub max_inner_iter: Option<usize>,
    pub decomposition_dim: Option<usize>,
    pub seed: Option<u64>,
}

/// Top-level configuration file. Every field is optional; missing sections
/// fall back to library defaults.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub partitions: Option<Vec<Vec<String>>>,
    pub k: Option<usize>,
    pub vqsa: Option<VqsaSection>,
    pub oracle: Option<OracleSection>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("{} is not a valid config: {e}", path.display())))
    }
}

/// Command-line overrides that take precedence over the file.
#[derive(Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shots: Option<Shots>,
    pub reward: Option<RewardKind>,
    pub ref_dim: Option<usize>,
    pub decomposition_dim: Option<usize>,
}

pub fn resolve_vqsa(section: Option<&VqsaSection>, over: &Overrides) -> Result<VqsaConfig, Failure> {
    let mut cfg = VqsaConfig::default();
    if let Some(s) = section {
        if let Some(v) = s.layers_w {
            cfg.layers_w = v;
        }
        if let Some(v) = s.layers_u {
            cfg.layers_u = v;
        }
        if let Some(v) = s.iterations {
            cfg.iterations = v;
        }
        cfg.spsa = SpsaGains::for_iterations(cfg.iterations);
        if let Some(g) = &s.spsa {
            if let Some(v) = g.a {
                cfg.spsa.a = v;
            }
            if let Some(v) = g.c {
                cfg.spsa.c = v;
            }
            if let Some(v) = g.big_a {
                cfg.spsa.big_a = v;
            }
            if let Some(v) = g.alpha {
                cfg.spsa.alpha = v;
            }
            if let Some(v) = g.gamma {
                cfg.spsa.gamma = v;
            }
        }
        if let Some(field) = &s.shots {
            cfg.shots = field.resolve()?;
        }
        if let Some(v) = s.seed {
            cfg.seed = v;
        }
        if let Some(word) = &s.reward {
            cfg.reward = parse_reward(word)?;
        }
        cfg.ref_dim = s.ref_dim;
    }
    if let Some(v) = over.seed {
        cfg.seed = v;
    }
    if let Some(v) = over.shots {
        cfg.shots = v;
    }
    if let Some(v) = over.reward {
        cfg.reward = v;
    }
    if let Some(v) = over.ref_dim {
        cfg.ref_dim = Some(v);
    }
    Ok(cfg)
}

pub fn resolve_oracle(section: Option<&OracleSection>, over: &Overrides) -> OracleConfig {
    let mut cfg = OracleConfig::default();
    if let Some(s) = section {
        if let Some(v) = s.restarts {
            cfg.restarts = v;
        }
        if let Some(v) = s.inner_tol {
            cfg.inner_tol = v;
        }
        if let Some(v) = s.max_inner_iter {
            cfg.max_inner_iter = v;
        }
        if s.decomposition_dim.is_some() {
            cfg.decomposition_dim = s.decomposition_dim;
        }
        if let Some(v) = s.seed {
            cfg.seed = v;
        }
    }
    if let Some(v) = over.seed {
        cfg.seed = v;
    }
    if let Some(v) = over.decomposition_dim {
        cfg.decomposition_dim = Some(v);
    }
    cfg
}

pub fn parse_reward(word: &str) -> Result<RewardKind, Failure> {
    match word {
        "global" => Ok(RewardKind::Global),
        "local" => Ok(RewardKind::Local),
        other => Err(Failure::config(format!(
            "reward must be global or local, got {other:?}"
        ))),
    }
}

/// Worker cap from `STEERFID_THREADS`; unset means no cap.
pub fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var("STEERFID_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::config(format!("STEERFID_THREADS: {e}"))),
        Ok(text) => {
            let n: usize = text.parse().map_err(|_| {
                Failure::config(format!("STEERFID_THREADS must be a positive integer, got {text:?}"))
            })?;
            if n == 0 {
                return Err(Failure::config(
                    "STEERFID_THREADS must be a positive integer, got 0",
                ));
            }
            Ok(Some(n))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_beat_the_file_section() {
        let section = VqsaSection {
            seed: Some(5),
            iterations: Some(40),
            shots: Some(ShotsField::Mode("exact".to_string())),
            ..VqsaSection::default()
        };
        let over = Overrides {
            seed: Some(9),
            shots: Some(Shots::Count(64)),
            ..Overrides::default()
        };
        let cfg = resolve_vqsa(Some(&section), &over).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.shots, Shots::Count(64));
        assert_eq!(cfg.iterations, 40);
        assert_eq!(cfg.spsa.big_a, 4.0);
    }

    #[test]
    fn unknown_shot_words_are_rejected() {
        assert!(ShotsField::parse("exact").is_ok());
        assert!(ShotsField::parse("1024").is_ok());
        assert!(ShotsField::parse("sometimes").is_err());
    }
}
