//! Differences between two states of the same game, split into three
//! channels: object tree, globals, and status counters.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::def::{AttrSet, ObjectId};
use super::state::{fnv1a, WorldState, FNV_OFFSET};
use super::tree::NodeIdx;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TreeChange {
    Attributes { object: ObjectId, before: AttrSet, after: AttrSet },
    Parent { object: ObjectId, before: Option<ObjectId>, after: Option<ObjectId> },
}

impl TreeChange {
    pub fn object(&self) -> ObjectId {
        match self {
            TreeChange::Attributes { object, .. } | TreeChange::Parent { object, .. } => *object,
        }
    }

    pub fn field(&self) -> &'static str {
        match self {
            TreeChange::Attributes { .. } => "attributes",
            TreeChange::Parent { .. } => "parent",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobalChange {
    pub name: String,
    pub before: Option<i64>,
    pub after: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct StatusChange {
    pub score: Option<(i64, i64)>,
    pub moves: Option<(u64, u64)>,
    pub done: Option<(bool, bool)>,
}

impl StatusChange {
    pub fn is_empty(&self) -> bool {
        self.score.is_none() && self.moves.is_none() && self.done.is_none()
    }
}

/// Canonical difference: tree entries sorted by object id then field name,
/// globals by name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Diff {
    pub tree: Vec<TreeChange>,
    pub globals: Vec<GlobalChange>,
    pub status: StatusChange,
}

impl Diff {
    pub fn is_empty(&self) -> bool {
        self.tree.is_empty() && self.globals.is_empty() && self.status.is_empty()
    }

    /// The tree channel alone, as used for valid-action detection.
    pub fn tree_changed(&self) -> bool {
        !self.tree.is_empty()
    }

    /// Tree, globals, score or done changed. The move counter alone does
    /// not count.
    pub fn exact_changed(&self) -> bool {
        !self.tree.is_empty()
            || !self.globals.is_empty()
            || self.status.score.is_some()
            || self.status.done.is_some()
    }

    /// Stable 64-bit hash of the canonical encoding.
    pub fn digest(&self) -> u64 {
        let mut h = FNV_OFFSET;
        for c in &self.tree {
            match c {
                TreeChange::Attributes { object, before, after } => {
                    h = fnv1a(h, &[0]);
                    h = fnv1a(h, &object.0.to_le_bytes());
                    h = fnv1a(h, &before.bits().to_le_bytes());
                    h = fnv1a(h, &after.bits().to_le_bytes());
                }
                TreeChange::Parent { object, before, after } => {
                    h = fnv1a(h, &[1]);
                    h = fnv1a(h, &object.0.to_le_bytes());
                    h = fnv1a(h, &before.map_or(u32::MAX, |p| p.0).to_le_bytes());
                    h = fnv1a(h, &after.map_or(u32::MAX, |p| p.0).to_le_bytes());
                }
            }
        }
        for g in &self.globals {
            h = fnv1a(h, &[2]);
            h = fnv1a(h, &(g.name.len() as u16).to_le_bytes());
            h = fnv1a(h, g.name.as_bytes());
            for v in [g.before, g.after] {
                match v {
                    Some(v) => {
                        h = fnv1a(h, &[1]);
                        h = fnv1a(h, &v.to_le_bytes());
                    }
                    None => h = fnv1a(h, &[0]),
                }
            }
        }
        if let Some((a, b)) = self.status.score {
            h = fnv1a(h, &[3]);
            h = fnv1a(h, &a.to_le_bytes());
            h = fnv1a(h, &b.to_le_bytes());
        }
        if let Some((a, b)) = self.status.moves {
            h = fnv1a(h, &[4]);
            h = fnv1a(h, &a.to_le_bytes());
            h = fnv1a(h, &b.to_le_bytes());
        }
        if let Some((a, b)) = self.status.done {
            h = fnv1a(h, &[5, a as u8, b as u8]);
        }
        h
    }
}

impl WorldState {
    /// Same as `state_diff(self, other).tree_changed()` without building the diff.
    pub fn tree_differs(&self, other: &WorldState) -> bool {
        self.attrs != other.attrs
            || (0..self.attrs.len()).any(|i| self.tree.parent(NodeIdx(i as u32)) != other.tree.parent(NodeIdx(i as u32)))
    }

    /// Same as `state_diff(self, other).exact_changed()`.
    pub fn exact_differs(&self, other: &WorldState) -> bool {
        self.tree_differs(other) || self.globals != other.globals || self.score != other.score || self.done != other.done
    }
}

/// Differences from `a` to `b`. Both states must come from the same game.
pub fn state_diff(a: &WorldState, b: &WorldState) -> Diff {
    debug_assert_eq!(a.attrs.len(), b.attrs.len());
    let game = &a.game;
    let mut tree = Vec::new();
    for i in 0..a.attrs.len() {
        let idx = NodeIdx(i as u32);
        let object = game.id_of(idx);
        if a.attrs[i] != b.attrs[i] {
            tree.push(TreeChange::Attributes { object, before: a.attrs[i], after: b.attrs[i] });
        }
        let (pa, pb) = (a.tree.parent(idx), b.tree.parent(idx));
        if pa != pb {
            tree.push(TreeChange::Parent {
                object,
                before: pa.map(|p| game.id_of(p)),
                after: pb.map(|p| game.id_of(p)),
            });
        }
    }
    tree.sort_by(|x, y| x.object().cmp(&y.object()).then(x.field().cmp(y.field())));

    let names: BTreeSet<&String> = a.globals.keys().chain(b.globals.keys()).collect();
    let globals = names
        .into_iter()
        .filter_map(|k| {
            let (before, after) = (a.globals.get(k).copied(), b.globals.get(k).copied());
            (before != after).then(|| GlobalChange { name: k.clone(), before, after })
        })
        .collect();

    let status = StatusChange {
        score: (a.score != b.score).then_some((a.score, b.score)),
        moves: (a.moves != b.moves).then_some((a.moves, b.moves)),
        done: (a.done != b.done).then_some((a.done, b.done)),
    };
    Diff { tree, globals, status }
}
