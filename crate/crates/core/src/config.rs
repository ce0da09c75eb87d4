//! Generation config.
//!
//! Configs are flat `key = value` files (TOML syntax, no tables). Every key
//! mirrors a [`GenConfig`] field; unknown keys are rejected. An optional
//! `preset` key selects the starting point before the file's own keys apply.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pools::PoolPaths;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown preset {0:?} (expected all, properties, temporal or geometric)")]
    UnknownPreset(String),
    #[error("reading config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    /// Cells per axis.
    pub world_size: i32,
    /// NPCs besides the player and the agent.
    pub n_npcs: usize,
    pub min_blocks: usize,
    pub max_blocks: usize,
    pub world_steps: u64,
    pub n_snapshots: usize,
    pub weight_property: f64,
    pub weight_temporal: f64,
    pub weight_geometric: f64,
    /// Probability that a combinable clause gets a conjoined sibling.
    pub two_clause_prob: f64,
    /// Probability that each combinable clause is negated.
    pub negation_prob: f64,
    /// Probability that the agent executes a command in an episode.
    pub command_prob: f64,
    pub npc_move_prob: f64,
    /// Longest NPC displacement per step.
    pub npc_step: f64,
    /// Agent displacement per step while executing a task.
    pub agent_speed: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub split_train: f64,
    pub split_valid: f64,
    pub split_test: f64,
    pub output_dir: PathBuf,
    pub names_file: Option<PathBuf>,
    pub npc_types_file: Option<PathBuf>,
    pub colors_file: Option<PathBuf>,
    pub shapes_file: Option<PathBuf>,
    pub max_query_attempts: usize,
    pub max_scene_attempts: usize,
    /// Worker threads; 0 picks the number of cores. Does not affect output.
    pub workers: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            world_size: 15,
            n_npcs: 4,
            min_blocks: 1,
            max_blocks: 3,
            world_steps: 50,
            n_snapshots: 2,
            weight_property: 1.0,
            weight_temporal: 1.0,
            weight_geometric: 1.0,
            two_clause_prob: 0.5,
            negation_prob: 0.25,
            command_prob: 0.5,
            npc_move_prob: 0.8,
            npc_step: 0.5,
            agent_speed: 0.5,
            n_samples: 1000,
            seed: 0,
            split_train: 0.8,
            split_valid: 0.1,
            split_test: 0.1,
            output_dir: PathBuf::from("out"),
            names_file: None,
            npc_types_file: None,
            colors_file: None,
            shapes_file: None,
            max_query_attempts: 200,
            max_scene_attempts: 10,
            workers: 0,
        }
    }
}

impl GenConfig {
    /// Named starting points: `all` (the default mix), and the single-class
    /// `properties`, `temporal` and `geometric` datasets. Properties use one
    /// snapshot and no world steps.
    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let base = GenConfig::default();
        Ok(match name {
            "all" => base,
            "properties" => GenConfig {
                world_steps: 0,
                n_snapshots: 1,
                weight_temporal: 0.0,
                weight_geometric: 0.0,
                ..base
            },
            "temporal" => GenConfig {
                weight_property: 0.0,
                weight_geometric: 0.0,
                ..base
            },
            "geometric" => GenConfig {
                weight_property: 0.0,
                weight_temporal: 0.0,
                ..base
            },
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parse `text`, then apply `key=value` overrides on top. Override values
    /// are parsed as TOML scalars, falling back to a bare string.
    pub fn from_toml_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        for (key, raw) in overrides {
            let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.clone()));
            table.insert(key.clone(), value);
        }
        let preset = match table.remove("preset") {
            Some(toml::Value::String(p)) => p,
            Some(_) => return Err(field_err("preset", "must be a string")),
            None => "all".to_string(),
        };
        let mut merged = toml::Table::try_from(GenConfig::preset(&preset)?)
            .map_err(|e| ConfigError::Syntax(e.to_string()))?;
        for (k, v) in table {
            if matches!(v, toml::Value::Table(_)) {
                return Err(field_err(&k, "nested tables are not allowed"));
            }
            merged.insert(k, v);
        }
        let cfg: GenConfig = toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| {
            let msg = e.message().to_string();
            match msg.split('`').nth(1) {
                Some(field) if msg.starts_with("unknown field") => field_err(field, "unknown key"),
                _ => ConfigError::Syntax(msg),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(4..=256).contains(&self.world_size) {
            return Err(field_err("world_size", "must be in 4..=256"));
        }
        if self.min_blocks > self.max_blocks {
            return Err(field_err("min_blocks", "must not exceed max_blocks"));
        }
        if self.n_snapshots == 0 {
            return Err(field_err("n_snapshots", "must be at least 1"));
        }
        if self.n_snapshots as u64 > self.world_steps + 1 {
            return Err(field_err("n_snapshots", "must not exceed world_steps + 1"));
        }
        let weights = [
            ("weight_property", self.weight_property),
            ("weight_temporal", self.weight_temporal),
            ("weight_geometric", self.weight_geometric),
        ];
        for (name, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(field_err(name, "must be a finite non-negative number"));
            }
        }
        if weights.iter().all(|(_, w)| *w == 0.0) {
            return Err(field_err("weight_property", "query class weights are all zero"));
        }
        if self.weight_temporal > 0.0 && self.n_snapshots < 2 {
            return Err(field_err("weight_temporal", "temporal queries need n_snapshots >= 2"));
        }
        for (name, p) in [
            ("two_clause_prob", self.two_clause_prob),
            ("negation_prob", self.negation_prob),
            ("command_prob", self.command_prob),
            ("npc_move_prob", self.npc_move_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(field_err(name, "must be a probability in [0, 1]"));
            }
        }
        for (name, v) in [("npc_step", self.npc_step), ("agent_speed", self.agent_speed)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(field_err(name, "must be positive"));
            }
        }
        let splits = [
            ("split_train", self.split_train),
            ("split_valid", self.split_valid),
            ("split_test", self.split_test),
        ];
        for (name, f) in splits {
            if !(0.0..=1.0).contains(&f) {
                return Err(field_err(name, "must be in [0, 1]"));
            }
        }
        if (splits.iter().map(|(_, f)| f).sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(field_err("split_train", "split fractions must sum to 1"));
        }
        if self.max_query_attempts == 0 {
            return Err(field_err("max_query_attempts", "must be at least 1"));
        }
        if self.max_scene_attempts == 0 {
            return Err(field_err("max_scene_attempts", "must be at least 1"));
        }
        Ok(())
    }

    pub fn pool_paths(&self) -> PoolPaths {
        PoolPaths {
            names: self.names_file.clone(),
            npc_types: self.npc_types_file.clone(),
            colors: self.colors_file.clone(),
            shapes: self.shapes_file.clone(),
        }
    }

    /// SHA-256 over every field that influences sample content.
    pub fn digest(&self) -> String {
        let canonical = GenConfig {
            output_dir: PathBuf::new(),
            workers: 0,
            n_samples: 0,
            ..self.clone()
        };
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }
}
