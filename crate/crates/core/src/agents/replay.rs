//! Proportional prioritized replay over a ring buffer.

use alloc::vec::Vec;

use super::AgentError;
use crate::rng::SplitMix64;

/// Binary tree of partial sums over `capacity` leaves.
#[derive(Clone, Debug, PartialEq)]
pub struct SumTree {
    capacity: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1).next_power_of_two();
        SumTree { capacity, nodes: alloc::vec![0.0; 2 * capacity] }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.nodes[self.capacity + i]
    }

    pub fn set(&mut self, i: usize, value: f64) {
        let mut k = self.capacity + i;
        self.nodes[k] = value;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    /// Leaf whose cumulative range contains `mass`, for `0 <= mass < total`.
    pub fn find(&self, mut mass: f64) -> usize {
        let mut k = 1;
        while k < self.capacity {
            let left = self.nodes[2 * k];
            if mass < left || self.nodes[2 * k + 1] <= 0.0 {
                k *= 2;
            } else {
                mass -= left;
                k = 2 * k + 1;
            }
        }
        k - self.capacity
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReplayConfig {
    pub capacity: usize,
    pub alpha: f64,
    pub beta_start: f64,
    pub beta_end: f64,
    /// Updates over which beta is annealed.
    pub beta_steps: u64,
    pub eps: f64,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        ReplayConfig { capacity: 100_000, alpha: 0.6, beta_start: 0.4, beta_end: 1.0, beta_steps: 100_000, eps: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub indices: Vec<usize>,
    /// Importance weights, normalised so the largest is 1.
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PrioritizedReplay<T> {
    pub config: ReplayConfig,
    items: Vec<T>,
    next: usize,
    tree: SumTree,
    max_priority: f64,
}

impl<T> PrioritizedReplay<T> {
    pub fn new(config: ReplayConfig) -> Self {
        PrioritizedReplay {
            items: Vec::new(),
            next: 0,
            tree: SumTree::new(config.capacity),
            max_priority: 1.0,
            config,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, i: usize) -> &T {
        &self.items[i]
    }

    /// Stores `item` with the largest priority seen so far, evicting the
    /// oldest entry when full. Returns its slot.
    pub fn push(&mut self, item: T) -> usize {
        let slot = self.next;
        if self.items.len() < self.config.capacity {
            self.items.push(item);
        } else {
            self.items[slot] = item;
        }
        self.tree.set(slot, libm::pow(self.max_priority, self.config.alpha));
        self.next = (self.next + 1) % self.config.capacity;
        slot
    }

    /// Stores `item` with an explicit priority.
    pub fn push_with_priority(&mut self, item: T, priority: f64) -> usize {
        let slot = self.push(item);
        self.set_priority(slot, priority);
        slot
    }

    fn set_priority(&mut self, slot: usize, priority: f64) {
        self.max_priority = self.max_priority.max(priority);
        self.tree.set(slot, libm::pow(priority, self.config.alpha));
    }

    /// Sets each priority to `|td| + eps`.
    pub fn update_priorities(&mut self, indices: &[usize], td_errors: &[f64]) {
        for (&i, &d) in indices.iter().zip(td_errors) {
            self.set_priority(i, libm::fabs(d) + self.config.eps);
        }
    }

    /// Sampling probability of slot `i`.
    pub fn probability(&self, i: usize) -> f64 {
        self.tree.get(i) / self.tree.total()
    }

    pub fn beta(&self, update: u64) -> f64 {
        let c = &self.config;
        if c.beta_steps == 0 || update >= c.beta_steps {
            return c.beta_end;
        }
        c.beta_start + (c.beta_end - c.beta_start) * update as f64 / c.beta_steps as f64
    }

    /// Draws `batch` slots independently, with replacement.
    pub fn sample(&self, batch: usize, beta: f64, rng: &mut SplitMix64) -> Result<Batch, AgentError> {
        if self.items.len() < batch || batch == 0 {
            return Err(AgentError::UnderfullReplay { have: self.items.len(), need: batch.max(1) });
        }
        let total = self.tree.total();
        let n = self.items.len() as f64;
        let mut indices = Vec::with_capacity(batch);
        let mut weights = Vec::with_capacity(batch);
        for _ in 0..batch {
            let mut i = self.tree.find(rng.next_f64() * total);
            if i >= self.items.len() {
                i = self.items.len() - 1;
            }
            indices.push(i);
            weights.push(libm::pow(n * self.probability(i), -beta));
        }
        let max = weights.iter().copied().fold(0.0, f64::max);
        for w in &mut weights {
            *w /= max;
        }
        Ok(Batch { indices, weights })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn cfg(alpha: f64, capacity: usize) -> ReplayConfig {
        ReplayConfig { capacity, alpha, ..Default::default() }
    }

    #[test]
    fn probabilities_follow_priorities() {
        let mut r = PrioritizedReplay::new(cfg(1.0, 8));
        r.push_with_priority('a', 1.0);
        r.push_with_priority('b', 3.0);
        assert!((r.probability(0) - 0.25).abs() < 1e-15);
        assert!((r.probability(1) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn alpha_zero_is_uniform() {
        let mut r = PrioritizedReplay::new(cfg(0.0, 8));
        for (i, p) in [1.0, 5.0, 0.01, 100.0].into_iter().enumerate() {
            r.push_with_priority(i, p);
        }
        for i in 0..4 {
            assert!((r.probability(i) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn underfull_is_an_error() {
        let mut r = PrioritizedReplay::new(cfg(0.6, 8));
        r.push(1);
        let err = r.sample(2, 0.4, &mut SplitMix64::new(0)).unwrap_err();
        assert_eq!(err, AgentError::UnderfullReplay { have: 1, need: 2 });
    }

    #[test]
    fn eviction_drops_oldest() {
        let mut r = PrioritizedReplay::new(cfg(0.6, 3));
        for i in 0..5 {
            r.push(i);
        }
        let mut seen: Vec<i32> = (0..r.len()).map(|i| *r.get(i)).collect();
        seen.sort();
        assert_eq!(seen, alloc::vec![2, 3, 4]);
        let mut rng = SplitMix64::new(3);
        for _ in 0..100 {
            let b = r.sample(3, 1.0, &mut rng).unwrap();
            assert!(b.indices.iter().all(|&i| *r.get(i) >= 2));
        }
    }

    #[test]
    fn new_items_get_max_priority() {
        let mut r = PrioritizedReplay::new(cfg(1.0, 4));
        r.push(0);
        r.update_priorities(&[0], &[4.0]);
        r.push(1);
        assert!((r.probability(0) - r.probability(1)).abs() < 1e-12);
    }

    #[test]
    fn weights_normalised_by_max() {
        let mut r = PrioritizedReplay::new(cfg(1.0, 4));
        r.push_with_priority(0, 1.0);
        r.push_with_priority(1, 3.0);
        let mut rng = SplitMix64::new(8);
        for _ in 0..50 {
            let b = r.sample(2, 1.0, &mut rng).unwrap();
            // (N P)^-1 is 2 for slot 0 and 2/3 for slot 1
            let raw: Vec<f64> = b.indices.iter().map(|&i| if i == 0 { 2.0 } else { 2.0 / 3.0 }).collect();
            let max = raw.iter().copied().fold(0.0, f64::max);
            for (w, x) in b.weights.iter().zip(&raw) {
                assert!((w - x / max).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampling_frequencies_match_law() {
        let mut r = PrioritizedReplay::new(cfg(0.6, 16));
        let pri = [0.5, 1.0, 2.0, 3.0, 0.1, 4.0, 1.5, 2.5, 0.7, 5.0];
        for (i, p) in pri.iter().enumerate() {
            r.push_with_priority(i, *p);
        }
        let total: f64 = pri.iter().map(|p| libm::pow(*p, 0.6)).sum();
        let expect: Vec<f64> = pri.iter().map(|p| libm::pow(*p, 0.6) / total).collect();
        let mut counts = [0u64; 10];
        let mut rng = SplitMix64::new(42);
        for _ in 0..10_000 {
            for i in r.sample(10, 0.4, &mut rng).unwrap().indices {
                counts[i] += 1;
            }
        }
        let stat: f64 = counts
            .iter()
            .zip(&expect)
            .map(|(&c, &p)| (c as f64 - p * 1e5).powi(2) / (p * 1e5))
            .sum();
        let p = 1.0 - ChiSquared::new(9.0).unwrap().cdf(stat);
        assert!(p > 0.01, "p = {p}, counts {counts:?}");
    }

    #[test]
    fn beta_anneals() {
        let r: PrioritizedReplay<()> = PrioritizedReplay::new(ReplayConfig { beta_steps: 10, ..Default::default() });
        assert_eq!(r.beta(0), 0.4);
        assert!((r.beta(5) - 0.7).abs() < 1e-12);
        assert_eq!(r.beta(10), 1.0);
    }
}
