use alloc::string::String;
use alloc::vec::Vec;

use super::params::ParamStore;
use super::AgentError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, len: usize) -> Self {
        Adam { config, m: alloc::vec![0.0; len], v: alloc::vec![0.0; len], t: 0 }
    }

    /// Applies one update. Rejects the whole step if any gradient is not
    /// finite, naming the first offending tensor.
    pub fn step(&mut self, params: &mut ParamStore, grads: &[f64]) -> Result<(), AgentError> {
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            let name = params
                .tensors()
                .find(|(_, t)| t.range().contains(&i))
                .map(|(n, _)| String::from(n))
                .unwrap_or_default();
            return Err(AgentError::NonFiniteGradient { tensor: name, index: i });
        }
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        self.t += 1;
        let c1 = 1.0 - libm::pow(beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(beta2, self.t as f64);
        for (i, (p, g)) in params.data.iter_mut().zip(grads).enumerate() {
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            *p -= lr * mh / (libm::sqrt(vh) + eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn store() -> ParamStore {
        let mut p = ParamStore::new();
        p.add("w", 2, 2, 1.0, &mut SplitMix64::new(1));
        p
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = store();
        let before = p.data.clone();
        let mut opt = Adam::new(AdamConfig::default(), p.len());
        opt.step(&mut p, &[1.0, -2.0, 0.5, 0.0]).unwrap();
        let d: Vec<f64> = p.data.iter().zip(&before).map(|(a, b)| a - b).collect();
        assert!((d[0] + 1e-3).abs() < 1e-9);
        assert!((d[1] - 1e-3).abs() < 1e-9);
        assert_eq!(d[3], 0.0, "zero gradient leaves the weight");
    }

    #[test]
    fn identical_updates_are_deterministic() {
        let (mut a, mut b) = (store(), store());
        let (mut oa, mut ob) = (Adam::new(AdamConfig::default(), 4), Adam::new(AdamConfig::default(), 4));
        for _ in 0..3 {
            oa.step(&mut a, &[0.1, 0.2, 0.3, 0.4]).unwrap();
            ob.step(&mut b, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let mut p = store();
        let before = p.clone();
        let mut opt = Adam::new(AdamConfig::default(), 4);
        let err = opt.step(&mut p, &[0.0, f64::NAN, 0.0, 0.0]).unwrap_err();
        assert_eq!(err, AgentError::NonFiniteGradient { tensor: "w".into(), index: 1 });
        assert_eq!(p, before);
        assert_eq!(opt.t, 0);
    }
}
