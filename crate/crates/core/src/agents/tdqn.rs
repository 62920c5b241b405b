//! Template/word Q-heads with a supervised valid-action loss.

use alloc::string::String;
use alloc::vec::Vec;

use super::encoder::{Encoder, ObsTokens, ObsTrace};
use super::nn::{relu, sigmoid, softplus, Linear};
use super::params::ParamStore;
use super::select::{argmax, epsilon_greedy, max_value};
use crate::grammar::{fill_template, ActionCandidate, Template, Vocabulary};
use crate::rng::SplitMix64;

#[derive(Clone, Debug, PartialEq)]
pub struct QHeads {
    pub template: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

impl QHeads {
    fn get(&self, head: usize) -> &[f64] {
        match head {
            0 => &self.template,
            1 => &self.p1,
            _ => &self.p2,
        }
    }
}

/// Indices chosen by each head. Word slots are `None` past the template's
/// blank count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TdqnAction {
    pub template: usize,
    pub p1: Option<usize>,
    pub p2: Option<usize>,
}

impl TdqnAction {
    fn indices(&self) -> [Option<usize>; 3] {
        [Some(self.template), self.p1, self.p2]
    }

    pub fn text(&self, templates: &[Template], vocab: &Vocabulary) -> String {
        let w = |i: Option<usize>| i.map(|i| vocab.words()[i].as_str());
        fill_template(templates, self.template, w(self.p1), w(self.p2))
            .map(|c| c.surface)
            .unwrap_or_else(|e| e.surface)
    }
}

fn with_blanks(template: usize, blanks: usize, p1: usize, p2: usize) -> TdqnAction {
    TdqnAction {
        template,
        p1: (blanks >= 1).then_some(p1),
        p2: (blanks >= 2).then_some(p2),
    }
}

/// Highest-valued template filled with the highest-valued words.
pub fn greedy_action(q: &QHeads, templates: &[Template]) -> TdqnAction {
    let t = argmax(&q.template);
    with_blanks(t, templates[t].blanks, argmax(&q.p1), argmax(&q.p2))
}

/// Independent epsilon-greedy choice per head.
pub fn select_action(q: &QHeads, templates: &[Template], epsilon: f64, rng: &mut SplitMix64) -> TdqnAction {
    let t = epsilon_greedy(&q.template, epsilon, rng);
    let p1 = epsilon_greedy(&q.p1, epsilon, rng);
    let p2 = epsilon_greedy(&q.p2, epsilon, rng);
    with_blanks(t, templates[t].blanks, p1, p2)
}

/// Multi-hot targets, stored as sorted index lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BceTargets {
    pub templates: Vec<usize>,
    pub p1: Vec<usize>,
    pub p2: Vec<usize>,
}

impl BceTargets {
    /// Template `t` is positive if some valid action uses it; word `w` is
    /// positive in slot `k` if it fills slot `k` of some valid action.
    /// Fillers missing from `vocab` are skipped.
    pub fn from_valid(vocab: &Vocabulary, valid: &[ActionCandidate]) -> Self {
        let mut out = BceTargets::default();
        for a in valid {
            out.templates.push(a.template);
            let slots = [&mut out.p1, &mut out.p2];
            for (slot, f) in slots.into_iter().zip(&a.fillers) {
                if let Some(i) = vocab.index_of(f) {
                    slot.push(i);
                }
            }
        }
        for v in [&mut out.templates, &mut out.p1, &mut out.p2] {
            v.sort_unstable();
            v.dedup();
        }
        out
    }

    fn get(&self, head: usize) -> &[usize] {
        match head {
            0 => &self.templates,
            1 => &self.p1,
            _ => &self.p2,
        }
    }

    /// 0/1 vectors of the given sizes.
    pub fn dense(&self, templates: usize, words: usize) -> [Vec<f64>; 3] {
        let mk = |n: usize, on: &[usize]| {
            let mut v = alloc::vec![0.0; n];
            for &i in on {
                v[i] = 1.0;
            }
            v
        };
        [mk(templates, &self.templates), mk(words, &self.p1), mk(words, &self.p2)]
    }
}

/// Mean over all `|T| + 2|V|` entries of the logistic loss
/// `softplus(q) - y * q`.
pub fn bce(q: &QHeads, y: &BceTargets) -> f64 {
    let mut sum = 0.0;
    let mut count = 0;
    for head in 0..3 {
        let qs = q.get(head);
        let on = y.get(head);
        count += qs.len();
        for (i, v) in qs.iter().enumerate() {
            sum += softplus(*v);
            if on.binary_search(&i).is_ok() {
                sum -= v;
            }
        }
    }
    sum / count as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct TdqnTransition {
    pub obs: ObsTokens,
    pub action: TdqnAction,
    pub reward: f64,
    pub next_obs: ObsTokens,
    pub done: bool,
    /// Targets from the valid actions at `obs`.
    pub targets: BceTargets,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TdqnLoss {
    pub td: f64,
    pub bce: f64,
    pub total: f64,
    /// Mean absolute TD error over the active heads, per batch entry.
    pub td_errors: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tdqn {
    pub encoder: Encoder,
    pub trunk: Linear,
    pub heads: [Linear; 3],
}

impl Tdqn {
    pub fn new(
        p: &mut ParamStore,
        tokens: usize,
        templates: usize,
        words: usize,
        embed_dim: usize,
        hidden: usize,
        rng: &mut SplitMix64,
    ) -> Self {
        let encoder = Encoder::new(p, tokens, embed_dim, hidden, rng);
        let trunk = Linear::new(p, "tdqn.trunk", 4 * hidden, hidden, rng);
        let heads = [
            Linear::new(p, "tdqn.template", hidden, templates, rng),
            Linear::new(p, "tdqn.p1", hidden, words, rng),
            Linear::new(p, "tdqn.p2", hidden, words, rng),
        ];
        Tdqn { encoder, trunk, heads }
    }

    pub fn q_heads(&self, p: &[f64], obs: &ObsTokens) -> QHeads {
        let nu = self.encoder.encode_obs(p, obs, None);
        self.heads_from(p, &nu).0
    }

    fn heads_from(&self, p: &[f64], nu: &[f64]) -> (QHeads, Vec<f64>) {
        let pre = self.trunk.forward(p, nu);
        let u = relu(&pre);
        let [a, b, c] = self.heads.map(|l| l.forward(p, &u));
        (QHeads { template: a, p1: b, p2: c }, pre)
    }

    /// Per-head TD errors for the heads `t.action` uses.
    fn deltas(&self, q: &QHeads, next: Option<&QHeads>, t: &TdqnTransition, gamma: f64) -> [Option<f64>; 3] {
        let mut out = [None; 3];
        for (head, idx) in t.action.indices().into_iter().enumerate() {
            if let Some(i) = idx {
                let boot = next.map_or(0.0, |n| gamma * max_value(n.get(head)));
                out[head] = Some(t.reward + boot - q.get(head)[i]);
            }
        }
        out
    }

    fn next_heads(&self, target: &[f64], t: &TdqnTransition) -> Option<QHeads> {
        (!t.done).then(|| self.q_heads(target, &t.next_obs))
    }

    /// `lambda * BCE + (1 - lambda) * TD`. The TD term of one entry is the
    /// mean of `0.5 * delta^2` over its active heads, weighted by its
    /// importance weight; BCE is unweighted. Both are batch means.
    pub fn loss(
        &self,
        p: &[f64],
        target: &[f64],
        batch: &[&TdqnTransition],
        weights: &[f64],
        gamma: f64,
        lambda: f64,
    ) -> TdqnLoss {
        self.run(p, target, batch, weights, gamma, lambda, None)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn loss_and_grad(
        &self,
        p: &[f64],
        target: &[f64],
        batch: &[&TdqnTransition],
        weights: &[f64],
        gamma: f64,
        lambda: f64,
        grad: &mut [f64],
    ) -> TdqnLoss {
        self.run(p, target, batch, weights, gamma, lambda, Some(grad))
    }

    #[allow(clippy::too_many_arguments)]
    fn run(
        &self,
        p: &[f64],
        target: &[f64],
        batch: &[&TdqnTransition],
        weights: &[f64],
        gamma: f64,
        lambda: f64,
        mut grad: Option<&mut [f64]>,
    ) -> TdqnLoss {
        let n = batch.len() as f64;
        let (mut td, mut bce_sum) = (0.0, 0.0);
        let mut td_errors = Vec::with_capacity(batch.len());
        for (t, &w) in batch.iter().zip(weights) {
            let mut trace = ObsTrace::default();
            let nu = self.encoder.encode_obs(p, &t.obs, grad.is_some().then_some(&mut trace));
            let (q, pre) = self.heads_from(p, &nu);
            let next = self.next_heads(target, t);
            let deltas = self.deltas(&q, next.as_ref(), t, gamma);
            let active = deltas.iter().flatten().count() as f64;
            td += w * deltas.iter().flatten().map(|d| 0.5 * d * d).sum::<f64>() / active / n;
            td_errors.push(deltas.iter().flatten().map(|d| libm::fabs(*d)).sum::<f64>() / active);
            bce_sum += bce(&q, &t.targets) / n;

            let Some(g) = grad.as_deref_mut() else { continue };
            let count = (q.template.len() + 2 * q.p1.len()) as f64;
            let u = relu(&pre);
            let mut du = alloc::vec![0.0; u.len()];
            for head in 0..3 {
                let qs = q.get(head);
                let on = t.targets.get(head);
                let mut dq: Vec<f64> = qs
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let y = if on.binary_search(&i).is_ok() { 1.0 } else { 0.0 };
                        lambda * (sigmoid(*v) - y) / (count * n)
                    })
                    .collect();
                if let (Some(i), Some(d)) = (t.action.indices()[head], deltas[head]) {
                    dq[i] -= (1.0 - lambda) * w * d / (active * n);
                }
                let dx = self.heads[head].backward(p, g, &u, &dq);
                for (a, b) in du.iter_mut().zip(dx) {
                    *a += b;
                }
            }
            for (d, v) in du.iter_mut().zip(&pre) {
                if *v <= 0.0 {
                    *d = 0.0;
                }
            }
            let dnu = self.trunk.backward(p, g, &nu, &du);
            self.encoder.backward_obs(p, g, &t.obs, &trace, &dnu);
        }
        TdqnLoss { td, bce: bce_sum, total: lambda * bce_sum + (1.0 - lambda) * td, td_errors }
    }
}
