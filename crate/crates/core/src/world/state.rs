use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

use super::def::{AttrSet, Attribute, ObjectId, ObjectKind};
use super::game::Game;
use super::tree::{NodeIdx, ObjectTree, TreeError};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("the game is over")]
    GameOver,
}

/// Complete mutable game state. Cheap to clone; the static game data is
/// shared behind an `Arc`.
#[derive(Clone, Debug)]
pub struct WorldState {
    pub(crate) game: Arc<Game>,
    pub(crate) tree: ObjectTree,
    pub(crate) attrs: Vec<AttrSet>,
    pub(crate) globals: BTreeMap<String, i64>,
    pub(crate) score: i64,
    pub(crate) moves: u64,
    pub(crate) done: bool,
    pub(crate) rng: SplitMix64,
}

pub(crate) const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over `bytes`, continuing from `h`.
pub(crate) fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

impl WorldState {
    /// Fresh state: objects at their declared locations, player in the start
    /// room, score and moves zero.
    pub fn new(game: Arc<Game>, seed: u64) -> Self {
        let attrs = game.nodes.iter().map(|n| n.attributes).collect();
        WorldState {
            tree: game.initial_tree.clone(),
            attrs,
            globals: BTreeMap::new(),
            score: 0,
            moves: 0,
            done: false,
            rng: SplitMix64::new(seed),
            game,
        }
    }

    pub fn game(&self) -> &Arc<Game> {
        &self.game
    }

    pub fn tree(&self) -> &ObjectTree {
        &self.tree
    }

    pub fn score(&self) -> i64 {
        self.score
    }

    pub fn moves(&self) -> u64 {
        self.moves
    }

    pub fn done(&self) -> bool {
        self.done
    }

    pub fn rng(&self) -> SplitMix64 {
        self.rng
    }

    pub fn globals(&self) -> &BTreeMap<String, i64> {
        &self.globals
    }

    pub fn global(&self, name: &str) -> i64 {
        self.globals.get(name).copied().unwrap_or(0)
    }

    pub fn attributes(&self, id: ObjectId) -> Option<AttrSet> {
        self.game.idx(id).map(|i| self.attrs[i.get()])
    }

    pub(crate) fn has(&self, i: NodeIdx, a: Attribute) -> bool {
        self.attrs[i.get()].has(a)
    }

    pub fn parent_of(&self, id: ObjectId) -> Option<ObjectId> {
        let i = self.game.idx(id)?;
        self.tree.parent(i).map(|p| self.game.id_of(p))
    }

    pub fn children_of(&self, id: ObjectId) -> Vec<ObjectId> {
        match self.game.idx(id) {
            Some(i) => self.tree.children(i).map(|c| self.game.id_of(c)).collect(),
            None => Vec::new(),
        }
    }

    pub fn player_room(&self) -> ObjectId {
        self.game.id_of(self.room_idx())
    }

    pub(crate) fn room_idx(&self) -> NodeIdx {
        // The player is only ever moved directly into rooms.
        self.tree.parent(self.game.player).unwrap_or(NodeIdx::ROOT)
    }

    /// Objects held directly by the player, in tree order.
    pub fn inventory(&self) -> Vec<ObjectId> {
        self.tree.children(self.game.player).map(|c| self.game.id_of(c)).collect()
    }

    pub(crate) fn is_carried(&self, i: NodeIdx) -> bool {
        i != self.game.player && self.tree.is_within(i, self.game.player)
    }

    pub fn carries(&self, id: ObjectId) -> bool {
        self.game.idx(id).is_some_and(|i| self.is_carried(i))
    }

    /// Moves `obj` under `new_parent`. On error the state is unchanged.
    pub fn reparent(&mut self, obj: ObjectId, new_parent: ObjectId) -> Result<(), WorldError> {
        let o = self.game.idx(obj).ok_or(WorldError::UnknownObject(obj))?;
        let p = self.game.idx(new_parent).ok_or(WorldError::UnknownObject(new_parent))?;
        self.tree.reparent(o, p)?;
        Ok(())
    }

    pub fn set_attribute(&mut self, obj: ObjectId, a: Attribute, on: bool) -> Result<(), WorldError> {
        let o = self.game.idx(obj).ok_or(WorldError::UnknownObject(obj))?;
        if on {
            self.attrs[o.get()].insert(a);
        } else {
            self.attrs[o.get()].remove(a);
        }
        Ok(())
    }

    pub fn set_global(&mut self, name: &str, value: i64) {
        self.globals.insert(name.into(), value);
    }

    /// Contents visible through `i`: children of open (or lidless) containers.
    fn push_contents(&self, i: NodeIdx, out: &mut Vec<NodeIdx>) {
        if self.see_inside(i) {
            for c in self.tree.children(i) {
                out.push(c);
                self.push_contents(c, out);
            }
        }
    }

    pub(crate) fn see_inside(&self, i: NodeIdx) -> bool {
        let a = self.attrs[i.get()];
        a.has(Attribute::Container) && (a.has(Attribute::Open) || !a.has(Attribute::Openable))
    }

    /// Objects in scope: room contents (unless dark), then inventory, each
    /// followed by the visible contents of containers.
    pub(crate) fn visible_idx(&self) -> Vec<NodeIdx> {
        let room = self.room_idx();
        let mut out = Vec::new();
        if !self.is_dark_idx(room) {
            for c in self.tree.children(room) {
                if c == self.game.player {
                    continue;
                }
                out.push(c);
                self.push_contents(c, &mut out);
            }
        }
        for c in self.tree.children(self.game.player) {
            out.push(c);
            self.push_contents(c, &mut out);
        }
        out
    }

    pub fn visible(&self) -> Vec<ObjectId> {
        self.visible_idx().into_iter().map(|i| self.game.id_of(i)).collect()
    }

    /// Canonical names of visible objects, sorted and de-duplicated.
    pub fn visible_names(&self) -> Vec<String> {
        let mut names: Vec<String> =
            self.visible_idx().into_iter().map(|i| self.game.node(i).canonical().into()).collect();
        names.sort();
        names.dedup();
        names
    }

    /// True iff the room is flagged dark and no lit light source is in it,
    /// either loose, carried, or inside an open container.
    pub fn is_dark(&self, room: ObjectId) -> bool {
        self.game.idx(room).is_some_and(|r| self.is_dark_idx(r))
    }

    pub(crate) fn is_dark_idx(&self, room: NodeIdx) -> bool {
        if !self.game.is_dark_room(room) {
            return false;
        }
        !(1..self.attrs.len()).any(|n| {
            let n = NodeIdx(n as u32);
            self.has(n, Attribute::Lit) && self.has(n, Attribute::Lightsource) && self.light_reaches(n, room)
        })
    }

    fn light_reaches(&self, source: NodeIdx, room: NodeIdx) -> bool {
        let mut cur = self.tree.parent(source);
        while let Some(c) = cur {
            if c == room {
                return true;
            }
            if c != self.game.player && !self.see_inside(c) {
                return false;
            }
            cur = self.tree.parent(c);
        }
        false
    }

    pub(crate) fn kind(&self, i: NodeIdx) -> ObjectKind {
        self.game.node(i).kind
    }

    /// Canonical byte encoding of everything that defines the state for
    /// equality: parent and attributes of every node, globals, score, moves
    /// and the done flag. Child order and the generator are excluded.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.attrs.len() * 10 + 64);
        self.write_canonical(&mut out);
        out
    }

    pub(crate) fn write_canonical(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.attrs.len() as u32).to_le_bytes());
        for i in 0..self.attrs.len() {
            let idx = NodeIdx(i as u32);
            out.extend_from_slice(&self.game.id_of(idx).0.to_le_bytes());
            let parent = self.tree.parent(idx).map_or(u32::MAX, |p| self.game.id_of(p).0);
            out.extend_from_slice(&parent.to_le_bytes());
            out.extend_from_slice(&self.attrs[i].bits().to_le_bytes());
        }
        out.extend_from_slice(&(self.globals.len() as u32).to_le_bytes());
        for (k, v) in &self.globals {
            out.extend_from_slice(&(k.len() as u16).to_le_bytes());
            out.extend_from_slice(k.as_bytes());
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.score.to_le_bytes());
        out.extend_from_slice(&self.moves.to_le_bytes());
        out.push(self.done as u8);
    }

    /// 64-bit FNV-1a over [`canonical_bytes`](Self::canonical_bytes).
    pub fn state_hash(&self) -> u64 {
        fnv1a(FNV_OFFSET, &self.canonical_bytes())
    }

    /// As [`state_hash`](Self::state_hash) but blind to the move counter, so
    /// positions reached by different routes hash alike.
    pub fn position_hash(&self) -> u64 {
        let mut bytes = self.canonical_bytes();
        let n = bytes.len();
        bytes[n - 9..n - 1].fill(0);
        fnv1a(FNV_OFFSET, &bytes)
    }

    /// Hash of the object tree alone (parents and attributes).
    pub fn tree_hash(&self) -> u64 {
        let mut h = FNV_OFFSET;
        for i in 0..self.attrs.len() {
            let idx = NodeIdx(i as u32);
            let parent = self.tree.parent(idx).map_or(u32::MAX, |p| p.0);
            h = fnv1a(h, &parent.to_le_bytes());
            h = fnv1a(h, &self.attrs[i].bits().to_le_bytes());
        }
        h
    }
}

impl PartialEq for WorldState {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_bytes() == other.canonical_bytes()
    }
}
