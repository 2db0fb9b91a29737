//! Run configuration.
//!
//! Loaded from a TOML file. Every key is optional; missing keys take the
//! defaults below. Dotted top-level keys (`ast.add = 1.0`) and table syntax
//! (`[ast]` / `add = 1.0`) are equivalent.
//!
//! | key | default |
//! |-----|---------|
//! | `ast.add`, `ast.update` | 1.0 |
//! | `ast.move` | 0.1 |
//! | `ast.delete` | 0.01 |
//! | `ast.name_factor` | 0.01 |
//! | `diff.similarity_threshold` | 0.5 |
//! | `diff.min_height` | 2 |
//! | `graph.decay` | 0.5 |
//! | `graph.damping` | 0.85 |
//! | `graph.tol` | 1e-8 |
//! | `graph.max_iter` | 200 |
//! | `normalize.min_samples` | 30 |
//! | `normalize.lambda_min` / `lambda_max` / `lambda_step` | -5 / 5 / 0.01 |
//! | `normalize.post_mean` / `post_std` | 1 / 1/3 |
//! | `inflated.commit_share_min` | 0.01 |
//! | `inflated.ratio_max` | 0.20 |
//! | `blacklist.enabled` | true |
//! | `blacklist.patterns` | log, logger, print, println, System.out, System.err |
//! | `bots.patterns` | dependabot, \[bot\] |
//! | `pipeline.bulk_threshold` | 500 |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diff::DeltaWeights;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config value for {key}: {reason}")]
    Invalid { key: &'static str, reason: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub ast: AstConfig,
    pub diff: DiffConfig,
    pub graph: GraphConfig,
    pub normalize: NormalizeConfig,
    pub inflated: InflatedConfig,
    pub blacklist: BlacklistConfig,
    pub bots: BotConfig,
    pub pipeline: PipelineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AstConfig {
    pub add: f64,
    pub update: f64,
    #[serde(rename = "move")]
    pub move_: f64,
    pub delete: f64,
    pub name_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffConfig {
    /// Minimum dice similarity for bottom-up container matching.
    pub similarity_threshold: f64,
    /// Minimum subtree height considered by top-down matching.
    pub min_height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub decay: f64,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeConfig {
    pub min_samples: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_step: f64,
    pub post_mean: f64,
    pub post_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InflatedConfig {
    pub commit_share_min: f64,
    pub ratio_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlacklistConfig {
    pub enabled: bool,
    pub patterns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BotConfig {
    pub patterns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Commits touching more files than this are flagged `bulk`.
    pub bulk_threshold: usize,
}

impl Default for AstConfig {
    fn default() -> Self {
        Self {
            add: 1.0,
            update: 1.0,
            move_: 0.1,
            delete: 0.01,
            name_factor: 0.01,
        }
    }
}

impl Default for DiffConfig {
    fn default() -> Self {
        Self {
            similarity_threshold: 0.5,
            min_height: 2,
        }
    }
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            decay: 0.5,
            damping: 0.85,
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        Self {
            min_samples: 30,
            lambda_min: -5.0,
            lambda_max: 5.0,
            lambda_step: 0.01,
            post_mean: 1.0,
            post_std: 1.0 / 3.0,
        }
    }
}

impl Default for InflatedConfig {
    fn default() -> Self {
        Self {
            commit_share_min: 0.01,
            ratio_max: 0.20,
        }
    }
}

impl Default for BlacklistConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            patterns: ["log", "logger", "print", "println", "System.out", "System.err"]
                .into_iter()
                .map(String::from)
                .collect(),
        }
    }
}

impl Default for BotConfig {
    fn default() -> Self {
        Self {
            patterns: vec!["dependabot".into(), "[bot]".into()],
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { bulk_threshold: 500 }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |key: &'static str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(ConfigError::Invalid {
                    key,
                    reason: format!("{v} is outside (0, 1]"),
                })
            }
        };
        unit("ast.add", self.ast.add)?;
        unit("ast.update", self.ast.update)?;
        unit("ast.move", self.ast.move_)?;
        unit("ast.delete", self.ast.delete)?;
        unit("ast.name_factor", self.ast.name_factor)?;
        if !(0.0..=1.0).contains(&self.graph.decay) {
            return Err(ConfigError::Invalid {
                key: "graph.decay",
                reason: format!("{} is outside [0, 1]", self.graph.decay),
            });
        }
        if !(self.graph.damping > 0.0 && self.graph.damping < 1.0) {
            return Err(ConfigError::Invalid {
                key: "graph.damping",
                reason: format!("{} is outside (0, 1)", self.graph.damping),
            });
        }
        if !(self.normalize.lambda_step > 0.0 && self.normalize.lambda_min <= self.normalize.lambda_max) {
            return Err(ConfigError::Invalid {
                key: "normalize.lambda_step",
                reason: "empty lambda grid".into(),
            });
        }
        if self.normalize.post_std.is_nan() || self.normalize.post_std <= 0.0 {
            return Err(ConfigError::Invalid {
                key: "normalize.post_std",
                reason: "must be positive".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.diff.similarity_threshold) {
            return Err(ConfigError::Invalid {
                key: "diff.similarity_threshold",
                reason: "must lie in [0, 1]".into(),
            });
        }
        Ok(())
    }

    pub fn delta_weights(&self) -> DeltaWeights<f64> {
        DeltaWeights {
            add: self.ast.add,
            update: self.ast.update,
            move_: self.ast.move_,
            delete: self.ast.delete,
            name_only_factor: self.ast.name_factor,
        }
    }

    /// Blacklist patterns in effect (empty when disabled).
    pub fn active_blacklist(&self) -> Vec<String> {
        if self.blacklist.enabled {
            self.blacklist.patterns.clone()
        } else {
            Vec::new()
        }
    }
}
