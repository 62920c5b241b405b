//! Versioned binary snapshots of a [`WorldState`].
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        4 bytes  "IFWS"
//! version      u16      SNAPSHOT_VERSION
//! payload_len  u32      byte length of everything that follows
//! node_count   u32
//! per node     object_id u32, parent u32, first_child u32, sibling u32, attributes u16
//!              (links are dense node indices, u32::MAX for none)
//! global_count u32
//! per global   name_len u16, name (UTF-8), value i64     (sorted by name)
//! score        i64
//! moves        u64
//! done         u8
//! rng_state    u64
//! ```

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

use super::def::AttrSet;
use super::game::Game;
use super::state::WorldState;
use super::tree::{NodeIdx, ObjectTree};
use crate::rng::SplitMix64;

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"IFWS";
pub const SNAPSHOT_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("not a snapshot (bad magic)")]
    BadMagic,
    #[error("snapshot version {found} is not supported (expected {expected})")]
    Version { found: u16, expected: u16 },
    #[error("snapshot truncated")]
    Truncated,
    #[error("snapshot has {0} trailing bytes")]
    Trailing(usize),
    #[error("snapshot does not belong to this game")]
    GameMismatch,
    #[error("snapshot object links are inconsistent")]
    Corrupt,
}

/// Immutable encoded state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Snapshot {
    bytes: Arc<[u8]>,
}

impl Snapshot {
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Snapshot { bytes: bytes.into() }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SnapshotError> {
        let end = self.pos.checked_add(n).ok_or(SnapshotError::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(SnapshotError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, SnapshotError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, SnapshotError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, SnapshotError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, SnapshotError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> Result<i64, SnapshotError> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

impl WorldState {
    pub fn snapshot(&self) -> Snapshot {
        let n = self.attrs.len();
        let mut payload = Vec::with_capacity(n * 18 + 64);
        payload.extend_from_slice(&(n as u32).to_le_bytes());
        let (parent, first, sib) = self.tree.raw_links();
        for i in 0..n {
            payload.extend_from_slice(&self.game.id_of(NodeIdx(i as u32)).0.to_le_bytes());
            payload.extend_from_slice(&parent[i].to_le_bytes());
            payload.extend_from_slice(&first[i].to_le_bytes());
            payload.extend_from_slice(&sib[i].to_le_bytes());
            payload.extend_from_slice(&self.attrs[i].bits().to_le_bytes());
        }
        payload.extend_from_slice(&(self.globals.len() as u32).to_le_bytes());
        for (k, v) in &self.globals {
            payload.extend_from_slice(&(k.len() as u16).to_le_bytes());
            payload.extend_from_slice(k.as_bytes());
            payload.extend_from_slice(&v.to_le_bytes());
        }
        payload.extend_from_slice(&self.score.to_le_bytes());
        payload.extend_from_slice(&self.moves.to_le_bytes());
        payload.push(self.done as u8);
        payload.extend_from_slice(&self.rng.state().to_le_bytes());

        let mut bytes = Vec::with_capacity(payload.len() + 10);
        bytes.extend_from_slice(&SNAPSHOT_MAGIC);
        bytes.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        bytes.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        bytes.extend_from_slice(&payload);
        Snapshot { bytes: bytes.into() }
    }

    pub fn restore(game: &Arc<Game>, snapshot: &Snapshot) -> Result<WorldState, SnapshotError> {
        let mut r = Reader { buf: snapshot.as_bytes(), pos: 0 };
        if r.take(4)? != SNAPSHOT_MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let version = r.u16()?;
        if version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Version { found: version, expected: SNAPSHOT_VERSION });
        }
        let len = r.u32()? as usize;
        let rest = r.buf.len() - r.pos;
        if rest < len {
            return Err(SnapshotError::Truncated);
        }
        if rest > len {
            return Err(SnapshotError::Trailing(rest - len));
        }

        let n = r.u32()? as usize;
        if n != game.node_count() {
            return Err(SnapshotError::GameMismatch);
        }
        let mut parent = Vec::with_capacity(n);
        let mut first = Vec::with_capacity(n);
        let mut sib = Vec::with_capacity(n);
        let mut attrs = Vec::with_capacity(n);
        for i in 0..n {
            if r.u32()? != game.id_of(NodeIdx(i as u32)).0 {
                return Err(SnapshotError::GameMismatch);
            }
            parent.push(r.u32()?);
            first.push(r.u32()?);
            sib.push(r.u32()?);
            attrs.push(AttrSet::from_bits(r.u16()?));
        }
        let tree = ObjectTree::from_links(parent, first, sib).ok_or(SnapshotError::Corrupt)?;
        let g = r.u32()? as usize;
        let mut globals = BTreeMap::new();
        for _ in 0..g {
            let klen = r.u16()? as usize;
            let k = String::from_utf8(r.take(klen)?.to_vec()).map_err(|_| SnapshotError::Corrupt)?;
            globals.insert(k, r.i64()?);
        }
        let score = r.i64()?;
        let moves = r.u64()?;
        let done = match r.u8()? {
            0 => false,
            1 => true,
            _ => return Err(SnapshotError::Corrupt),
        };
        let rng = SplitMix64::new(r.u64()?);
        Ok(WorldState { game: game.clone(), tree, attrs, globals, score, moves, done, rng })
    }
}
