//! Central finite differences against the analytic gradients of both agents.

use alloc::vec;
use alloc::vec::Vec;

use super::drrn::{Drrn, DrrnTransition};
use super::encoder::ObsTokens;
use super::params::ParamStore;
use super::tdqn::{BceTargets, Tdqn, TdqnAction, TdqnTransition};
use crate::rng::SplitMix64;

const H: f64 = 1e-4;
const TOKENS: usize = 12;
/// Denominator floor: below this the central difference is dominated by
/// rounding in the loss, not by the gradient.
const FLOOR: f64 = 1e-8;

fn tokens(rng: &mut SplitMix64, n: usize) -> Vec<u32> {
    (0..n).map(|_| rng.below(TOKENS) as u32).collect()
}

fn obs(rng: &mut SplitMix64) -> ObsTokens {
    ObsTokens {
        narrative: tokens(rng, 4),
        inventory: tokens(rng, 2),
        description: tokens(rng, 3),
        prev_action: tokens(rng, 2),
    }
}

/// Largest `|a - n| / max(|a|, |n|, floor)` over all parameters, with the
/// name of the tensor where it occurs.
fn worst(p: &ParamStore, analytic: &[f64], mut loss: impl FnMut(&[f64]) -> f64) -> (f64, alloc::string::String) {
    let mut data = p.data.clone();
    let mut worst = (0.0, alloc::string::String::new());
    for (name, t) in p.tensors() {
        for i in t.range() {
            let x = data[i];
            data[i] = x + H;
            let up = loss(&data);
            data[i] = x - H;
            let down = loss(&data);
            data[i] = x;
            let n = (up - down) / (2.0 * H);
            let a = analytic[i];
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(FLOOR);
            if rel > worst.0 {
                worst = (rel, name.into());
            }
        }
    }
    worst
}

fn drrn_case(seed: u64) -> (f64, alloc::string::String) {
    let mut rng = SplitMix64::new(seed);
    let mut p = ParamStore::new();
    let m = Drrn::new(&mut p, TOKENS, 4, 5, &mut rng);
    let mut t = ParamStore::new();
    Drrn::new(&mut t, TOKENS, 4, 5, &mut rng);
    let batch: Vec<DrrnTransition> = (0..3)
        .map(|i| DrrnTransition {
            obs: obs(&mut rng),
            action: tokens(&mut rng, 2),
            reward: rng.uniform(-1.0, 3.0),
            next_obs: obs(&mut rng),
            next_actions: vec![tokens(&mut rng, 1), tokens(&mut rng, 3)],
            done: i == 2,
        })
        .collect();
    let refs: Vec<&DrrnTransition> = batch.iter().collect();
    let w = [1.0, 0.6, 0.3];
    let mut g = p.zeros_like();
    m.loss_and_grad(&p.data, &t.data, &refs, &w, 0.9, &mut g);
    worst(&p, &g, |d| m.loss(d, &t.data, &refs, &w, 0.9).loss)
}

fn tdqn_case(seed: u64) -> (f64, alloc::string::String) {
    let mut rng = SplitMix64::new(seed);
    let (templates, words) = (4, 6);
    let mut p = ParamStore::new();
    let m = Tdqn::new(&mut p, TOKENS, templates, words, 4, 5, &mut rng);
    let mut t = ParamStore::new();
    Tdqn::new(&mut t, TOKENS, templates, words, 4, 5, &mut rng);
    let actions = [
        TdqnAction { template: 0, p1: None, p2: None },
        TdqnAction { template: 2, p1: Some(3), p2: None },
        TdqnAction { template: 3, p1: Some(1), p2: Some(5) },
    ];
    let batch: Vec<TdqnTransition> = actions
        .iter()
        .enumerate()
        .map(|(i, a)| TdqnTransition {
            obs: obs(&mut rng),
            action: *a,
            reward: rng.uniform(-1.0, 3.0),
            next_obs: obs(&mut rng),
            done: i == 0,
            targets: BceTargets { templates: vec![0, 3], p1: vec![1, 3], p2: vec![5] },
        })
        .collect();
    let refs: Vec<&TdqnTransition> = batch.iter().collect();
    let w = [0.4, 1.0, 0.7];
    let mut g = p.zeros_like();
    m.loss_and_grad(&p.data, &t.data, &refs, &w, 0.9, 0.5, &mut g);
    worst(&p, &g, |d| m.loss(d, &t.data, &refs, &w, 0.9, 0.5).total)
}

#[test]
fn drrn_gradients() {
    for seed in [1, 2, 3] {
        let (rel, name) = drrn_case(seed);
        assert!(rel < 1e-4, "seed {seed}: {name} relative error {rel:e}");
    }
}

#[test]
fn tdqn_gradients() {
    for seed in [1, 2, 3] {
        let (rel, name) = tdqn_case(seed);
        assert!(rel < 1e-4, "seed {seed}: {name} relative error {rel:e}");
    }
}
