//! Observation and action encoders: a shared embedding table feeding one
//! recurrent cell per text channel.

use alloc::vec::Vec;

use super::nn::{Embedding, Gru, GruTrace};
use super::params::ParamStore;
use super::tokenizer::Tokenizer;
use crate::env::AugmentedObservation;
use crate::rng::SplitMix64;

/// Token sequences for the four observation channels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ObsTokens {
    pub narrative: Vec<u32>,
    pub inventory: Vec<u32>,
    pub description: Vec<u32>,
    pub prev_action: Vec<u32>,
}

impl ObsTokens {
    pub fn new(tok: &Tokenizer, obs: &AugmentedObservation) -> Self {
        ObsTokens {
            narrative: tok.encode(&obs.narrative),
            inventory: tok.encode(&obs.inventory),
            description: tok.encode(&obs.description),
            prev_action: tok.encode(&obs.prev_action),
        }
    }

    fn channels(&self) -> [&[u32]; 4] {
        [&self.narrative, &self.inventory, &self.description, &self.prev_action]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Encoder {
    pub embedding: Embedding,
    /// Narrative, inventory, description and action cells. The action cell
    /// also encodes the previous command.
    pub cells: [Gru; 4],
    pub hidden: usize,
}

pub const ACTION_CELL: usize = 3;

#[derive(Clone, Debug, Default)]
pub struct ObsTrace {
    cells: [GruTrace; 4],
}

impl Encoder {
    pub fn new(p: &mut ParamStore, tokens: usize, embed_dim: usize, hidden: usize, rng: &mut SplitMix64) -> Self {
        let embedding = Embedding::new(p, "embedding", tokens, embed_dim, rng);
        let cells = ["gru_narrative", "gru_inventory", "gru_description", "gru_action"]
            .map(|n| Gru::new(p, n, embed_dim, hidden, rng));
        Encoder { embedding, cells, hidden }
    }

    /// `4 * hidden` vector: the final state of each channel, concatenated.
    pub fn encode_obs(&self, p: &[f64], obs: &ObsTokens, mut trace: Option<&mut ObsTrace>) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.hidden);
        for (c, toks) in obs.channels().into_iter().enumerate() {
            let xs = self.embedding.lookup(p, toks);
            let t = trace.as_deref_mut().map(|t| &mut t.cells[c]);
            out.extend(self.cells[c].forward(p, &xs, t));
        }
        out
    }

    pub fn backward_obs(&self, p: &[f64], g: &mut [f64], obs: &ObsTokens, trace: &ObsTrace, d_out: &[f64]) {
        let h = self.hidden;
        for (c, toks) in obs.channels().into_iter().enumerate() {
            let dxs = self.cells[c].backward(p, g, &trace.cells[c], &d_out[c * h..(c + 1) * h]);
            self.embedding.backward(g, toks, &dxs);
        }
    }

    pub fn encode_action(&self, p: &[f64], action: &[u32], trace: Option<&mut GruTrace>) -> Vec<f64> {
        let xs = self.embedding.lookup(p, action);
        self.cells[ACTION_CELL].forward(p, &xs, trace)
    }

    pub fn backward_action(&self, p: &[f64], g: &mut [f64], action: &[u32], trace: &GruTrace, d_out: &[f64]) {
        let dxs = self.cells[ACTION_CELL].backward(p, g, trace, d_out);
        self.embedding.backward(g, action, &dxs);
    }
}
