use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Handicap {
    FixedSeed,
    LoadSave,
    TemplatesVocab,
    ObjectTree,
    ValidActionDetection,
}

impl Handicap {
    pub const ALL: [Handicap; 5] = [
        Handicap::FixedSeed,
        Handicap::LoadSave,
        Handicap::TemplatesVocab,
        Handicap::ObjectTree,
        Handicap::ValidActionDetection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Handicap::FixedSeed => "fixed_seed",
            Handicap::LoadSave => "load_save",
            Handicap::TemplatesVocab => "templates_vocab",
            Handicap::ObjectTree => "object_tree",
            Handicap::ValidActionDetection => "valid_action_detection",
        }
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for Handicap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of capabilities granted to an agent. Serialized as a list of names.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Handicap>", into = "Vec<Handicap>")]
pub struct Handicaps(u8);

impl Handicaps {
    pub const NONE: Handicaps = Handicaps(0);
    pub const ALL: Handicaps = Handicaps(0b11111);

    pub fn with(mut self, h: Handicap) -> Self {
        self.0 |= h.bit();
        self
    }

    pub fn without(mut self, h: Handicap) -> Self {
        self.0 &= !h.bit();
        self
    }

    pub fn contains(self, h: Handicap) -> bool {
        self.0 & h.bit() != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Handicap> {
        Handicap::ALL.into_iter().filter(move |h| self.contains(*h))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Valid-action detection restores state after every probe, so it
    /// cannot be granted without load/save.
    pub fn is_consistent(self) -> bool {
        !self.contains(Handicap::ValidActionDetection) || self.contains(Handicap::LoadSave)
    }
}

impl From<Vec<Handicap>> for Handicaps {
    fn from(v: Vec<Handicap>) -> Self {
        v.into_iter().fold(Handicaps::NONE, Handicaps::with)
    }
}

impl From<Handicaps> for Vec<Handicap> {
    fn from(h: Handicaps) -> Self {
        h.iter().collect()
    }
}

impl FromIterator<Handicap> for Handicaps {
    fn from_iter<I: IntoIterator<Item = Handicap>>(iter: I) -> Self {
        iter.into_iter().fold(Handicaps::NONE, Handicaps::with)
    }
}

impl fmt::Display for Handicaps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("none");
        }
        for (i, h) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(h.name())?;
        }
        Ok(())
    }
}
