//! Binary checkpoint of an agent: model shape, parameters, target copy,
//! optimiser moments and generator state.
//!
//! Little-endian throughout. Layout:
//! magic `IFCK`, u32 version, u8 agent kind, six u32 shape fields,
//! u64 updates, u64 generator state, u32 tensor count, then per tensor a
//! u32-prefixed name and u32 rows and cols, then u64 parameter count and
//! the parameters, the target copy, Adam's first and second moments (all
//! f64), u64 Adam step count and four f64 Adam settings.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use super::adam::{Adam, AdamConfig};
use super::params::ParamStore;
use super::trainer::AgentKind;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"IFCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("checkpoint is corrupt: {0}")]
    Corrupt(&'static str),
    #[error("checkpoint does not match: {0}")]
    Mismatch(&'static str),
}

/// Sizes that fix the tensor layout of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelSpec {
    pub tokens: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub templates: usize,
    pub words: usize,
    pub max_len: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub kind: AgentKind,
    pub spec: ModelSpec,
    pub params: ParamStore,
    pub target: Vec<f64>,
    pub adam: Adam,
    pub rng: u64,
    pub updates: u64,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + self.params.len() * 32);
        out.extend_from_slice(&CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.push(self.kind.to_code());
        let s = &self.spec;
        for v in [s.tokens, s.embed_dim, s.hidden, s.templates, s.words, s.max_len] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.updates.to_le_bytes());
        out.extend_from_slice(&self.rng.to_le_bytes());
        let tensors: Vec<_> = self.params.tensors().collect();
        out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for (name, t) in tensors {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(t.rows as u32).to_le_bytes());
            out.extend_from_slice(&(t.cols as u32).to_le_bytes());
        }
        out.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for xs in [&self.params.data, &self.target, &self.adam.m, &self.adam.v] {
            for x in xs.iter() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out.extend_from_slice(&self.adam.t.to_le_bytes());
        let c = self.adam.config;
        for x in [c.lr, c.beta1, c.beta2, c.eps] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != CHECKPOINT_MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(version));
        }
        let kind = AgentKind::from_code(r.take(1)?[0]).ok_or(CheckpointError::Corrupt("agent kind"))?;
        let mut dims = [0usize; 6];
        for d in &mut dims {
            *d = r.u32()? as usize;
        }
        let [tokens, embed_dim, hidden, templates, words, max_len] = dims;
        let spec = ModelSpec { tokens, embed_dim, hidden, templates, words, max_len };
        let updates = r.u64()?;
        let rng = r.u64()?;
        let count = r.u32()? as usize;
        let mut layout = Vec::new();
        for _ in 0..count {
            let n = r.u32()? as usize;
            let name = core::str::from_utf8(r.take(n)?).map_err(|_| CheckpointError::Corrupt("tensor name"))?;
            let name = String::from(name);
            layout.push((name, r.u32()? as usize, r.u32()? as usize));
        }
        let len = r.u64()? as usize;
        if len.checked_mul(32).is_none_or(|b| b > bytes.len()) {
            return Err(CheckpointError::Truncated);
        }
        let data = r.f64s(len)?;
        let target = r.f64s(len)?;
        let m = r.f64s(len)?;
        let v = r.f64s(len)?;
        let t = r.u64()?;
        let config = AdamConfig { lr: r.f64()?, beta1: r.f64()?, beta2: r.f64()?, eps: r.f64()? };
        if r.pos != bytes.len() {
            return Err(CheckpointError::Corrupt("trailing bytes"));
        }
        let params = ParamStore::from_layout(layout, data).ok_or(CheckpointError::Corrupt("tensor sizes"))?;
        Ok(Checkpoint { kind, spec, params, target, adam: Adam { config, m, v, t }, rng, updates })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len()).ok_or(CheckpointError::Truncated)?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, CheckpointError> {
        (0..n).map(|_| self.f64()).collect()
    }
}
