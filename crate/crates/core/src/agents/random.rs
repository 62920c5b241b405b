use crate::rng::SplitMix64;

/// Commands available to the random baseline.
pub const CANONICAL_ACTIONS: [&str; 11] =
    ["north", "south", "east", "west", "up", "down", "look", "inventory", "take all", "drop", "yes"];

#[derive(Clone, Debug)]
pub struct RandomAgent {
    rng: SplitMix64,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        RandomAgent { rng: SplitMix64::new(seed) }
    }

    pub fn act(&mut self) -> &'static str {
        CANONICAL_ACTIONS[self.rng.below(CANONICAL_ACTIONS.len())]
    }

    pub fn rng(&self) -> SplitMix64 {
        self.rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn uniform_over_canonical_set() {
        let mut a = RandomAgent::new(17);
        let mut counts = [0u64; 11];
        let n = 100_000;
        for _ in 0..n {
            let cmd = a.act();
            let i = CANONICAL_ACTIONS.iter().position(|c| *c == cmd).expect("closed set");
            counts[i] += 1;
        }
        let e = n as f64 / 11.0;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        let p = 1.0 - ChiSquared::new(10.0).unwrap().cdf(stat);
        assert!(p > 0.01, "{counts:?}");
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 11.0).abs() < 0.005);
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let (mut a, mut b) = (RandomAgent::new(4), RandomAgent::new(4));
        for _ in 0..100 {
            assert_eq!(a.act(), b.act());
        }
    }
}
