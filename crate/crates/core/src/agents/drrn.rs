//! Joint observation/action scorer over valid actions.

use alloc::vec::Vec;

use super::encoder::{Encoder, ObsTokens, ObsTrace};
use super::nn::{relu, GruTrace, Linear};
use super::params::ParamStore;
use super::select::max_value;
use super::AgentError;
use crate::rng::SplitMix64;

/// `(o, a, r, o', A_valid(s'), done)` in token form.
#[derive(Clone, Debug, PartialEq)]
pub struct DrrnTransition {
    pub obs: ObsTokens,
    pub action: Vec<u32>,
    pub reward: f64,
    pub next_obs: ObsTokens,
    pub next_actions: Vec<Vec<u32>>,
    pub done: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrrnLoss {
    pub loss: f64,
    /// One TD error per batch entry.
    pub td_errors: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Drrn {
    pub encoder: Encoder,
    /// `5h -> h` over `concat(nu_o, nu_a)`.
    pub hidden_layer: Linear,
    pub output: Linear,
}

impl Drrn {
    pub fn new(p: &mut ParamStore, tokens: usize, embed_dim: usize, hidden: usize, rng: &mut SplitMix64) -> Self {
        let encoder = Encoder::new(p, tokens, embed_dim, hidden, rng);
        let hidden_layer = Linear::new(p, "drrn.hidden", 5 * hidden, hidden, rng);
        let output = Linear::new(p, "drrn.output", hidden, 1, rng);
        Drrn { encoder, hidden_layer, output }
    }

    pub fn hidden(&self) -> usize {
        self.encoder.hidden
    }

    fn head(&self, p: &[f64], x: &[f64]) -> (f64, Vec<f64>) {
        let pre = self.hidden_layer.forward(p, x);
        let q = self.output.forward(p, &relu(&pre))[0];
        (q, pre)
    }

    /// Scores one action with a full forward pass of both encoders.
    pub fn q_value(&self, p: &[f64], obs: &ObsTokens, action: &[u32]) -> f64 {
        let mut x = self.encoder.encode_obs(p, obs, None);
        x.extend(self.encoder.encode_action(p, action, None));
        self.head(p, &x).0
    }

    /// Scores every action against one observation. The observation is
    /// encoded once and its share of the first layer computed once.
    pub fn q_values(&self, p: &[f64], obs: &ObsTokens, actions: &[Vec<u32>]) -> Result<Vec<f64>, AgentError> {
        if actions.is_empty() {
            return Err(AgentError::EmptyActions);
        }
        let nu_o = self.encoder.encode_obs(p, obs, None);
        Ok(self.q_values_encoded(p, &nu_o, actions))
    }

    pub fn q_values_encoded(&self, p: &[f64], nu_o: &[f64], actions: &[Vec<u32>]) -> Vec<f64> {
        let h = self.hidden();
        let l = self.hidden_layer;
        let cols = l.inputs();
        let w = &p[l.w.range()];
        let b = &p[l.b.range()];
        let shared: Vec<f64> = (0..h).map(|i| b[i] + super::nn::dot(&w[i * cols..i * cols + 4 * h], nu_o)).collect();
        let w2 = &p[self.output.w.range()];
        let b2 = p[self.output.b.offset];
        actions
            .iter()
            .map(|a| {
                let nu_a = self.encoder.encode_action(p, a, None);
                let mut q = b2;
                for i in 0..h {
                    let v = shared[i] + super::nn::dot(&w[i * cols + 4 * h..(i + 1) * cols], &nu_a);
                    if v > 0.0 {
                        q += w2[i] * v;
                    }
                }
                q
            })
            .collect()
    }

    /// `r + gamma * max_a' Q_target(o', a')`, with no bootstrap on terminal
    /// transitions or when no next action is known.
    pub fn target(&self, target: &[f64], t: &DrrnTransition, gamma: f64) -> f64 {
        if t.done || t.next_actions.is_empty() {
            return t.reward;
        }
        let nu = self.encoder.encode_obs(target, &t.next_obs, None);
        t.reward + gamma * max_value(&self.q_values_encoded(target, &nu, &t.next_actions))
    }

    /// Weighted mean of `0.5 * w * delta^2`.
    pub fn loss(&self, p: &[f64], target: &[f64], batch: &[&DrrnTransition], weights: &[f64], gamma: f64) -> DrrnLoss {
        let n = batch.len() as f64;
        let mut loss = 0.0;
        let mut td_errors = Vec::with_capacity(batch.len());
        for (t, w) in batch.iter().zip(weights) {
            let d = self.target(target, t, gamma) - self.q_value(p, &t.obs, &t.action);
            loss += 0.5 * w * d * d / n;
            td_errors.push(d);
        }
        DrrnLoss { loss, td_errors }
    }

    /// As [`Drrn::loss`], accumulating the gradient with respect to `p` into
    /// `grad`. `target` is treated as a constant.
    pub fn loss_and_grad(
        &self,
        p: &[f64],
        target: &[f64],
        batch: &[&DrrnTransition],
        weights: &[f64],
        gamma: f64,
        grad: &mut [f64],
    ) -> DrrnLoss {
        let n = batch.len() as f64;
        let h = self.hidden();
        let mut loss = 0.0;
        let mut td_errors = Vec::with_capacity(batch.len());
        for (t, &w) in batch.iter().zip(weights) {
            let y = self.target(target, t, gamma);
            let mut obs_trace = ObsTrace::default();
            let mut act_trace = GruTrace::default();
            let mut x = self.encoder.encode_obs(p, &t.obs, Some(&mut obs_trace));
            x.extend(self.encoder.encode_action(p, &t.action, Some(&mut act_trace)));
            let (q, pre) = self.head(p, &x);
            let d = y - q;
            loss += 0.5 * w * d * d / n;
            td_errors.push(d);

            let dq = -w * d / n;
            let hid = relu(&pre);
            let mut dpre = self.output.backward(p, grad, &hid, &[dq]);
            for (g, v) in dpre.iter_mut().zip(&pre) {
                if *v <= 0.0 {
                    *g = 0.0;
                }
            }
            let dx = self.hidden_layer.backward(p, grad, &x, &dpre);
            self.encoder.backward_obs(p, grad, &t.obs, &obs_trace, &dx[..4 * h]);
            self.encoder.backward_action(p, grad, &t.action, &act_trace, &dx[4 * h..]);
        }
        DrrnLoss { loss, td_errors }
    }
}
