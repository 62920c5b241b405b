use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::world::def::{Attribute, ObjectId};

/// What a condition or effect acts on: the object bound to a pattern slot
/// (`"$1"`, `"$2"` in game files) or a fixed object id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Slot(u8),
    Object(ObjectId),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TargetRepr {
    Slot(String),
    Object(u32),
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Target::Slot(n) => TargetRepr::Slot(format!("${n}")),
            Target::Object(id) => TargetRepr::Object(id.0),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match TargetRepr::deserialize(d)? {
            TargetRepr::Object(id) => Ok(Target::Object(ObjectId(id))),
            TargetRepr::Slot(s) => match s.strip_prefix('$').and_then(|n| n.parse::<u8>().ok()) {
                Some(n @ 1..=2) => Ok(Target::Slot(n)),
                _ => Err(serde::de::Error::custom(format!(
                    "invalid target `{s}`, expected \"$1\", \"$2\" or an object id"
                ))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Condition {
    PlayerIn { room: ObjectId },
    Carried { target: Target },
    NotCarried { target: Target },
    Has { target: Target, attr: Attribute },
    Lacks { target: Target, attr: Attribute },
    /// Slot is bound to exactly this object.
    Is { target: Target, object: ObjectId },
    In { target: Target, parent: ObjectId },
    GlobalEq { name: String, value: i64 },
    GlobalAtLeast { name: String, value: i64 },
    NotDark,
    InventoryUnderLimit,
}

impl Condition {
    pub fn targets(&self) -> impl Iterator<Item = Target> {
        let t = match self {
            Condition::Carried { target }
            | Condition::NotCarried { target }
            | Condition::Has { target, .. }
            | Condition::Lacks { target, .. }
            | Condition::Is { target, .. }
            | Condition::In { target, .. } => Some(*target),
            _ => None,
        };
        t.into_iter()
    }
}

/// Engine effect applied when a rule fires. Effects run in order after all
/// of the rule's conditions and the effects' own implicit checks pass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Effect {
    /// Follow an exit from the current room.
    Go { direction: String },
    MovePlayer { room: ObjectId },
    ReparentToPlayer { target: Target },
    ReparentToFloor { target: Target },
    TakeAll,
    PutIn { item: Target, container: Target },
    /// Move any object anywhere; `to: 0` removes it from play.
    Reparent { target: Target, to: ObjectId },
    SetAttribute { target: Target, attr: Attribute },
    ClearAttribute { target: Target, attr: Attribute },
    UnlockWith { target: Target, key: Target },
    ToggleLight { target: Target },
    EmitText { text: String },
    /// Pick one line with the world generator.
    EmitRandom { texts: Vec<String> },
    Look,
    Inventory,
    Examine { target: Target },
    Read { target: Target },
    SetGlobal { name: String, value: i64 },
    EndGame { text: String },
}

impl Effect {
    pub fn name(&self) -> &'static str {
        match self {
            Effect::Go { .. } => "go",
            Effect::MovePlayer { .. } => "move-player",
            Effect::ReparentToPlayer { .. } => "reparent-to-player",
            Effect::ReparentToFloor { .. } => "reparent-to-floor",
            Effect::TakeAll => "take-all",
            Effect::PutIn { .. } => "put-in",
            Effect::Reparent { .. } => "reparent",
            Effect::SetAttribute { .. } => "set-attribute",
            Effect::ClearAttribute { .. } => "clear-attribute",
            Effect::UnlockWith { .. } => "unlock-with",
            Effect::ToggleLight { .. } => "toggle-light",
            Effect::EmitText { .. } => "emit-text",
            Effect::EmitRandom { .. } => "emit-random",
            Effect::Look => "look",
            Effect::Inventory => "inventory",
            Effect::Examine { .. } => "examine",
            Effect::Read { .. } => "read",
            Effect::SetGlobal { .. } => "set-global",
            Effect::EndGame { .. } => "end-game",
        }
    }

    pub fn targets(&self) -> Vec<Target> {
        match self {
            Effect::ReparentToPlayer { target }
            | Effect::ReparentToFloor { target }
            | Effect::Reparent { target, .. }
            | Effect::SetAttribute { target, .. }
            | Effect::ClearAttribute { target, .. }
            | Effect::ToggleLight { target }
            | Effect::Examine { target }
            | Effect::Read { target } => alloc::vec![*target],
            Effect::PutIn { item, container } => alloc::vec![*item, *container],
            Effect::UnlockWith { target, key } => alloc::vec![*target, *key],
            _ => Vec::new(),
        }
    }
}

/// One command pattern with its conditions and effects. Several rules may
/// share a pattern; the first whose conditions hold is applied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrammarRule {
    pub id: String,
    /// Literal words and up to two `_` object slots, e.g. `"put _ in _"`.
    pub pattern: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub when: Vec<Condition>,
    pub effects: Vec<Effect>,
    /// Success text; replaces the effects' default messages when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_text: Option<String>,
}

/// A token of a compiled pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternToken {
    Word(String),
    Slot,
}

pub fn compile_pattern(pattern: &str) -> Vec<PatternToken> {
    pattern
        .split_whitespace()
        .map(|w| {
            if w == "_" {
                PatternToken::Slot
            } else {
                PatternToken::Word(w.to_lowercase())
            }
        })
        .collect()
}

/// Canonical surface for a pattern: lowercased, single-spaced.
pub fn normalize_pattern(pattern: &str) -> String {
    let mut out = String::new();
    for (i, w) in pattern.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&w.to_lowercase());
    }
    out
}

pub fn slot_count(pattern: &[PatternToken]) -> usize {
    pattern.iter().filter(|t| **t == PatternToken::Slot).count()
}

impl GrammarRule {
    pub fn surface(&self) -> String {
        normalize_pattern(&self.pattern)
    }

    pub fn literal_words(&self) -> impl Iterator<Item = String> + '_ {
        self.pattern
            .split_whitespace()
            .filter(|w| *w != "_")
            .map(|w| w.to_lowercase())
    }
}
