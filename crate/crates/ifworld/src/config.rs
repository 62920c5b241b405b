//! Run configuration: a TOML file, then `key=value` overrides from flags.

use std::path::{Path, PathBuf};

use ifworld_core::agents::{AgentKind, TrainConfig};
use ifworld_core::bench::Aggregation;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("override `{0}` must look like key=value")]
    Override(String),
    #[error("no game given (set `game` in the config or pass --game)")]
    NoGame,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Game file path or bundled game name.
    pub game: Option<String>,
    pub agent: AgentKind,
    /// Independent training runs, seeded `train.seed`, `train.seed + 1`, ...
    pub runs: u32,
    /// Episodes played by `eval` per run.
    pub eval_episodes: u64,
    /// Worker threads for stepping environments; 0 uses every core.
    pub threads: usize,
    pub out_dir: PathBuf,
    pub aggregation: Aggregation,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            game: None,
            agent: AgentKind::Drrn,
            runs: 5,
            eval_episodes: 100,
            threads: 0,
            out_dir: PathBuf::from("runs"),
            aggregation: Aggregation::default(),
            train: TrainConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))
    }

    /// Optional file plus dotted overrides such as `train.lr=0.0005` or
    /// `agent="tdqn"`. Values are TOML; bare words are taken as strings.
    pub fn resolve(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io { path: p.into(), source })?;
                text.parse::<toml::Table>().map_err(|e| ConfigError::Parse(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.train.validate().map_err(|e| ConfigError::Parse(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key was just written"),
        Err(_) => toml::Value::String(raw.into()),
    }
}

pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| ConfigError::Override(spec.into()))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(spec.into()));
    }
    let mut t = table;
    for p in &parts[..parts.len() - 1] {
        let entry = t.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = entry.as_table_mut().ok_or_else(|| ConfigError::Override(spec.into()))?;
    }
    t.insert(parts[parts.len() - 1].into(), parse_value(raw.trim()));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert_eq!(c.runs, 5);
    }

    #[test]
    fn overrides_win() {
        let c = RunConfig::resolve(None, &["agent=tdqn".into(), "train.lr=0.01".into(), "train.stop_at_score=4.5".into()])
            .unwrap();
        assert_eq!(c.agent, AgentKind::Tdqn);
        assert_eq!(c.train.lr, 0.01);
        assert_eq!(c.train.stop_at_score, Some(4.5));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::from_toml("[train]\nlearning_rate = 0.1\n").is_err());
        assert!(RunConfig::resolve(None, &["nokey".into()]).is_err());
        assert!(RunConfig::resolve(None, &["train.gamma=3".into()]).is_err());
    }
}
