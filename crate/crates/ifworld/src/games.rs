//! Reading, writing and bundling `.game.json` files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ifworld_core::world::{Game, GameDef, ValidationError};
use thiserror::Error;

/// Games shipped with the crate, by name.
pub const BUNDLED: [(&str, &str); 5] = [
    ("mailhouse", include_str!("../../../games/mailhouse.game.json")),
    ("keyring", include_str!("../../../games/keyring.game.json")),
    ("cellarlight", include_str!("../../../games/cellarlight.game.json")),
    ("packmule", include_str!("../../../games/packmule.game.json")),
    ("sparsereward", include_str!("../../../games/sparsereward.game.json")),
];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{origin}:{line}:{column}: {message}")]
    Schema { origin: String, line: usize, column: usize, message: String },
    #[error("{origin}: {source}")]
    Invalid { origin: String, source: ValidationError },
    #[error("no game file or bundled game named `{0}`")]
    Unknown(String),
}

/// Parses JSON into a definition without semantic validation.
pub fn parse_def(text: &str, origin: &str) -> Result<GameDef, LoadError> {
    serde_json::from_str(text).map_err(|e| LoadError::Schema {
        origin: origin.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parses and validates.
pub fn parse_game(text: &str, origin: &str) -> Result<Game, LoadError> {
    let def = parse_def(text, origin)?;
    Game::new(def).map_err(|source| LoadError::Invalid { origin: origin.into(), source })
}

pub fn load_game(path: &Path) -> Result<Arc<Game>, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.into(), source })?;
    parse_game(&text, &path.display().to_string()).map(Arc::new)
}

pub fn bundled(name: &str) -> Option<Arc<Game>> {
    let (_, text) = BUNDLED.iter().find(|(n, _)| *n == name)?;
    Some(Arc::new(parse_game(text, name).expect("bundled game is valid")))
}

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// A path to a game file if one exists, otherwise a bundled game name.
pub fn resolve(spec: &str) -> Result<Arc<Game>, LoadError> {
    let path = Path::new(spec);
    if path.exists() {
        return load_game(path);
    }
    bundled(spec).ok_or_else(|| LoadError::Unknown(spec.into()))
}

pub fn to_json(def: &GameDef) -> String {
    serde_json::to_string_pretty(def).expect("game definitions always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_game_parses() {
        for name in bundled_names() {
            let g = bundled(name).unwrap();
            assert!(g.warnings().is_empty(), "{name}: {:?}", g.warnings());
        }
    }

    #[test]
    fn schema_error_has_position() {
        match parse_def("{\n  \"format_version\": 1,\n  \"metadata\": 7\n}", "x.json") {
            Err(LoadError::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
