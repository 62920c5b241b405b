//! Declarative game definition, as authored in `.game.json` files.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::grammar::{Condition, GrammarRule};

pub const FORMAT_VERSION: u32 = 1;

/// Object identifier as written in the game file. `0` is reserved for the
/// synthetic universe root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl ObjectId {
    pub const UNIVERSE: ObjectId = ObjectId(0);
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    Room,
    Item,
    Player,
    Scenery,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attribute {
    Takeable,
    Container,
    Openable,
    Open,
    Locked,
    Lightsource,
    Lit,
    Edible,
    Readable,
    Fixed,
}

impl Attribute {
    pub const ALL: [Attribute; 10] = [
        Attribute::Takeable,
        Attribute::Container,
        Attribute::Openable,
        Attribute::Open,
        Attribute::Locked,
        Attribute::Lightsource,
        Attribute::Lit,
        Attribute::Edible,
        Attribute::Readable,
        Attribute::Fixed,
    ];

    #[inline]
    fn bit(self) -> u16 {
        1 << (self as u16)
    }

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Takeable => "takeable",
            Attribute::Container => "container",
            Attribute::Openable => "openable",
            Attribute::Open => "open",
            Attribute::Locked => "locked",
            Attribute::Lightsource => "lightsource",
            Attribute::Lit => "lit",
            Attribute::Edible => "edible",
            Attribute::Readable => "readable",
            Attribute::Fixed => "fixed",
        }
    }
}

/// Bit set over [`Attribute`]. Serialized as a list of names.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Attribute>", into = "Vec<Attribute>")]
pub struct AttrSet(u16);

impl AttrSet {
    pub const fn empty() -> Self {
        AttrSet(0)
    }

    pub const fn from_bits(bits: u16) -> Self {
        AttrSet(bits & 0x03ff)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    pub fn has(self, a: Attribute) -> bool {
        self.0 & a.bit() != 0
    }

    pub fn insert(&mut self, a: Attribute) {
        self.0 |= a.bit();
    }

    pub fn remove(&mut self, a: Attribute) {
        self.0 &= !a.bit();
    }

    pub fn iter(self) -> impl Iterator<Item = Attribute> {
        Attribute::ALL.into_iter().filter(move |a| self.has(*a))
    }
}

impl From<Vec<Attribute>> for AttrSet {
    fn from(v: Vec<Attribute>) -> Self {
        let mut s = AttrSet::empty();
        for a in v {
            s.insert(a);
        }
        s
    }
}

impl From<AttrSet> for Vec<Attribute> {
    fn from(s: AttrSet) -> Self {
        s.iter().collect()
    }
}

impl FromIterator<Attribute> for AttrSet {
    fn from_iter<I: IntoIterator<Item = Attribute>>(iter: I) -> Self {
        let mut s = AttrSet::empty();
        for a in iter {
            s.insert(a);
        }
        s
    }
}

impl fmt::Debug for AttrSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(Attribute::name)).finish()
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectNode {
    pub id: ObjectId,
    /// Surface nouns; the first is canonical.
    pub names: Vec<String>,
    pub kind: ObjectKind,
    /// Display name ("brass lantern"); falls back to the canonical noun.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "is_empty_attrs")]
    pub attributes: AttrSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_id: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u32>,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub read_text: Option<String>,
    /// Initial parent. Absent means the universe root; the player is always
    /// placed in the start room.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<ObjectId>,
}

fn is_empty_attrs(a: &AttrSet) -> bool {
    a.bits() == 0
}

impl ObjectNode {
    pub fn canonical(&self) -> &str {
        &self.names[0]
    }

    pub fn display(&self) -> &str {
        self.title.as_deref().unwrap_or(&self.names[0])
    }
}

/// A directional connection. `door`, when set, must be open to pass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exit {
    pub from: ObjectId,
    pub direction: String,
    pub to: ObjectId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub door: Option<ObjectId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameTrait {
    Darkness,
    InventoryLimit,
    LockAndKey,
    SparseReward,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "on", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Trigger {
    EnterRoom { room: ObjectId },
    Acquire { object: ObjectId },
    StateReached { all: Vec<Condition> },
    ActionPattern { rule: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRule {
    pub trigger: Trigger,
    pub points: i64,
    #[serde(default = "yes")]
    pub once: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub title: String,
    pub max_score: i64,
    #[serde(default)]
    pub traits: Vec<GameTrait>,
    pub expected_template_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDef {
    pub format_version: u32,
    pub metadata: Metadata,
    pub start_room: ObjectId,
    #[serde(default)]
    pub intro_text: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub win_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inventory_limit: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dark_rooms: Vec<ObjectId>,
    pub objects: Vec<ObjectNode>,
    #[serde(default)]
    pub exits: Vec<Exit>,
    pub grammar: Vec<GrammarRule>,
    #[serde(default)]
    pub score_rules: Vec<ScoreRule>,
    #[serde(default)]
    pub walkthrough: Vec<String>,
    /// Game ends automatically once the score reaches `max_score`.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub end_at_max_score: bool,
}

fn is_true(b: &bool) -> bool {
    *b
}
