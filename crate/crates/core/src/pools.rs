//! Word pools for scene generation.
//!
//! Pools are newline-delimited word lists. Blank lines and lines starting
//! with `#` are skipped. The defaults are compiled in from `data/`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::shapes::{Shape, ShapeError};

const DEFAULT_NAMES: &str = include_str!("../data/names.txt");
const DEFAULT_NPC_TYPES: &str = include_str!("../data/npc_types.txt");
const DEFAULT_COLORS: &str = include_str!("../data/colors.txt");
const DEFAULT_SHAPES: &str = include_str!("../data/shapes.txt");

/// Words the query grammar uses in positions where a name or property may
/// appear. Pool words must avoid them so query text stays parseable.
pub const RESERVED_WORDS: &[&str] = &[
    "a", "and", "at", "be", "beginning", "did", "do", "from", "i", "if", "is", "me", "most",
    "my", "not", "now", "of", "or", "the", "to", "where", "you", "your",
];

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("reading pool file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{pool} pool is empty")]
    Empty { pool: &'static str },
    #[error("{pool} pool: invalid word {word:?} (lowercase letters and underscores only, not a reserved word)")]
    InvalidWord { pool: &'static str, word: String },
    #[error("{pool} pool: duplicate word {word:?}")]
    Duplicate { pool: &'static str, word: String },
    #[error("shapes pool: {0}")]
    Shape(#[from] ShapeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenePools {
    pub names: Vec<String>,
    pub npc_types: Vec<String>,
    pub colors: Vec<String>,
    pub shapes: Vec<Shape>,
}

/// Optional pool file overrides. Missing entries fall back to the defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PoolPaths {
    pub names: Option<PathBuf>,
    pub npc_types: Option<PathBuf>,
    pub colors: Option<PathBuf>,
    pub shapes: Option<PathBuf>,
}

impl PoolPaths {
    /// Fill unset entries from `dir/{names,npc_types,colors,shapes}.txt`
    /// where such files exist.
    pub fn with_default_dir(mut self, dir: &Path) -> Self {
        let pick = |slot: &mut Option<PathBuf>, file: &str| {
            let p = dir.join(file);
            if slot.is_none() && p.is_file() {
                *slot = Some(p);
            }
        };
        pick(&mut self.names, "names.txt");
        pick(&mut self.npc_types, "npc_types.txt");
        pick(&mut self.colors, "colors.txt");
        pick(&mut self.shapes, "shapes.txt");
        self
    }
}

fn split_words(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn check_words(pool: &'static str, words: Vec<String>) -> Result<Vec<String>, PoolError> {
    if words.is_empty() {
        return Err(PoolError::Empty { pool });
    }
    let mut seen = BTreeSet::new();
    for w in &words {
        let ok = !w.is_empty()
            && w.bytes().all(|b| b.is_ascii_lowercase() || b == b'_')
            && !RESERVED_WORDS.contains(&w.as_str());
        if !ok {
            return Err(PoolError::InvalidWord { pool, word: w.clone() });
        }
        if !seen.insert(w.as_str()) {
            return Err(PoolError::Duplicate { pool, word: w.clone() });
        }
    }
    Ok(words)
}

fn read_pool(pool: &'static str, path: Option<&Path>, default: &str) -> Result<Vec<String>, PoolError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|source| PoolError::Io {
            path: p.to_path_buf(),
            source,
        })?,
        None => default.to_string(),
    };
    check_words(pool, split_words(&text))
}

impl ScenePools {
    pub fn load(paths: &PoolPaths) -> Result<Self, PoolError> {
        let names = read_pool("names", paths.names.as_deref(), DEFAULT_NAMES)?;
        let npc_types = read_pool("npc_types", paths.npc_types.as_deref(), DEFAULT_NPC_TYPES)?;
        let colors = read_pool("colors", paths.colors.as_deref(), DEFAULT_COLORS)?;
        let shapes = read_pool("shapes", paths.shapes.as_deref(), DEFAULT_SHAPES)?
            .iter()
            .map(|w| w.parse::<Shape>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            names,
            npc_types,
            colors,
            shapes,
        })
    }
}

impl Default for ScenePools {
    fn default() -> Self {
        Self::load(&PoolPaths::default()).expect("built-in pools are valid")
    }
}
