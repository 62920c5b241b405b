use alloc::vec::Vec;

use crate::rng::SplitMix64;

/// Softmax of `q / temperature`, computed relative to the maximum.
pub fn softmax_probs(q: &[f64], temperature: f64) -> Vec<f64> {
    debug_assert!(temperature > 0.0);
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = q.iter().map(|v| libm::exp((v - max) / temperature)).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|x| x / sum).collect()
}

/// Samples an index with probability proportional to `exp(q_i / temperature)`.
pub fn softmax_select(q: &[f64], temperature: f64, rng: &mut SplitMix64) -> usize {
    let probs = softmax_probs(q, temperature);
    let u = rng.next_f64();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left `acc` just below one
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// `r + gamma * q_next_max - q_taken`. Terminal transitions pass 0 for
/// `q_next_max`.
pub fn td_error(reward: f64, gamma: f64, q_next_max: f64, q_taken: f64) -> f64 {
    reward + gamma * q_next_max - q_taken
}

/// First index of the maximum.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in q.iter().enumerate() {
        if *v > q[best] {
            best = i;
        }
    }
    best
}

pub fn max_value(q: &[f64]) -> f64 {
    q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Uniform index with probability `epsilon`, argmax otherwise.
pub fn epsilon_greedy(q: &[f64], epsilon: f64, rng: &mut SplitMix64) -> usize {
    if rng.next_f64() < epsilon {
        rng.below(q.len())
    } else {
        argmax(q)
    }
}

/// Linear schedule from `start` to `end` over `steps`, then constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Linear {
    pub start: f64,
    pub end: f64,
    pub steps: u64,
}

impl Linear {
    pub fn at(&self, t: u64) -> f64 {
        if self.steps == 0 || t >= self.steps {
            return self.end;
        }
        self.start + (self.end - self.start) * (t as f64 / self.steps as f64)
    }
}
