//! Dense layers and a gated recurrent cell with hand-written backward passes.
//!
//! All functions read parameters from a flat slice and accumulate gradients
//! into a slice of the same layout.

use alloc::vec::Vec;

use super::params::{ParamStore, Tensor};
use crate::rng::SplitMix64;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

/// `y = W x + b` with `W` of shape `out x in`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Linear {
    pub w: Tensor,
    pub b: Tensor,
}

impl Linear {
    pub fn new(p: &mut ParamStore, name: &str, inputs: usize, outputs: usize, rng: &mut SplitMix64) -> Self {
        let scale = 1.0 / libm::sqrt(inputs as f64);
        let w = p.add(&alloc::format!("{name}.weight"), outputs, inputs, scale, rng);
        let b = p.add(&alloc::format!("{name}.bias"), outputs, 1, scale, rng);
        Linear { w, b }
    }

    pub fn inputs(&self) -> usize {
        self.w.cols
    }

    pub fn outputs(&self) -> usize {
        self.w.rows
    }

    pub fn forward(&self, p: &[f64], x: &[f64]) -> Vec<f64> {
        let (n, m) = (self.w.rows, self.w.cols);
        debug_assert_eq!(x.len(), m);
        let w = &p[self.w.range()];
        let b = &p[self.b.range()];
        (0..n).map(|i| b[i] + dot(&w[i * m..(i + 1) * m], x)).collect()
    }

    /// Accumulates parameter gradients and returns `dL/dx`.
    pub fn backward(&self, p: &[f64], g: &mut [f64], x: &[f64], dy: &[f64]) -> Vec<f64> {
        let (n, m) = (self.w.rows, self.w.cols);
        let w = &p[self.w.range()];
        let mut dx = alloc::vec![0.0; m];
        for i in 0..n {
            let d = dy[i];
            if d == 0.0 {
                continue;
            }
            g[self.b.offset + i] += d;
            let row = self.w.offset + i * m;
            for j in 0..m {
                g[row + j] += d * x[j];
                dx[j] += d * w[i * m + j];
            }
        }
        dx
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.max(0.0)).collect()
}

/// Single-layer gated recurrent cell, gates ordered (reset, update, new):
///
/// ```text
/// r  = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
/// z  = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
/// n  = tanh(W_in x + b_in + r * (W_hn h + b_hn))
/// h' = (1 - z) * n + z * h
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gru {
    pub w_ih: Tensor,
    pub w_hh: Tensor,
    pub b_ih: Tensor,
    pub b_hh: Tensor,
    pub hidden: usize,
}

/// Per-step values kept for the backward pass.
#[derive(Clone, Debug, Default)]
pub struct GruTrace {
    xs: Vec<Vec<f64>>,
    hs: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    n: Vec<Vec<f64>>,
    hn: Vec<Vec<f64>>,
}

impl GruTrace {
    pub fn steps(&self) -> usize {
        self.xs.len()
    }
}

impl Gru {
    pub fn new(p: &mut ParamStore, name: &str, input: usize, hidden: usize, rng: &mut SplitMix64) -> Self {
        let k = 1.0 / libm::sqrt(hidden as f64);
        Gru {
            w_ih: p.add(&alloc::format!("{name}.weight_ih"), 3 * hidden, input, k, rng),
            w_hh: p.add(&alloc::format!("{name}.weight_hh"), 3 * hidden, hidden, k, rng),
            b_ih: p.add(&alloc::format!("{name}.bias_ih"), 3 * hidden, 1, k, rng),
            b_hh: p.add(&alloc::format!("{name}.bias_hh"), 3 * hidden, 1, k, rng),
            hidden,
        }
    }

    fn affine(p: &[f64], w: Tensor, b: Tensor, x: &[f64]) -> Vec<f64> {
        let m = w.cols;
        let ws = &p[w.range()];
        let bs = &p[b.range()];
        (0..w.rows).map(|i| bs[i] + dot(&ws[i * m..(i + 1) * m], x)).collect()
    }

    /// Runs the cell over `xs` from a zero state; returns the final state.
    pub fn forward(&self, p: &[f64], xs: &[Vec<f64>], trace: Option<&mut GruTrace>) -> Vec<f64> {
        let hd = self.hidden;
        let mut h = alloc::vec![0.0; hd];
        let mut tr = trace;
        for x in xs {
            let gi = Self::affine(p, self.w_ih, self.b_ih, x);
            let gh = Self::affine(p, self.w_hh, self.b_hh, &h);
            let mut r = alloc::vec![0.0; hd];
            let mut z = alloc::vec![0.0; hd];
            let mut n = alloc::vec![0.0; hd];
            let mut next = alloc::vec![0.0; hd];
            for k in 0..hd {
                r[k] = sigmoid(gi[k] + gh[k]);
                z[k] = sigmoid(gi[hd + k] + gh[hd + k]);
                n[k] = libm::tanh(gi[2 * hd + k] + r[k] * gh[2 * hd + k]);
                next[k] = (1.0 - z[k]) * n[k] + z[k] * h[k];
            }
            if let Some(t) = tr.as_deref_mut() {
                t.xs.push(x.clone());
                t.hs.push(h.clone());
                t.hn.push(gh[2 * hd..].to_vec());
                t.r.push(r);
                t.z.push(z);
                t.n.push(n);
            }
            h = next;
        }
        h
    }

    /// Backpropagates `dh` (gradient of the final state) through time.
    /// Returns the gradient for each input vector.
    pub fn backward(&self, p: &[f64], g: &mut [f64], trace: &GruTrace, dh_final: &[f64]) -> Vec<Vec<f64>> {
        let hd = self.hidden;
        let din = self.w_ih.cols;
        let w_ih = &p[self.w_ih.range()];
        let w_hh = &p[self.w_hh.range()];
        let mut dh = dh_final.to_vec();
        let mut dxs = alloc::vec![Vec::new(); trace.steps()];
        for t in (0..trace.steps()).rev() {
            let (x, h, r, z, n, hn) = (&trace.xs[t], &trace.hs[t], &trace.r[t], &trace.z[t], &trace.n[t], &trace.hn[t]);
            // gate pre-activation gradients, input side and hidden side
            let mut di = alloc::vec![0.0; 3 * hd];
            let mut dhh = alloc::vec![0.0; 3 * hd];
            let mut dh_prev = alloc::vec![0.0; hd];
            for k in 0..hd {
                let dn = dh[k] * (1.0 - z[k]);
                let dz = dh[k] * (h[k] - n[k]);
                dh_prev[k] = dh[k] * z[k];
                let dn_pre = dn * (1.0 - n[k] * n[k]);
                let dr = dn_pre * hn[k];
                let dr_pre = dr * r[k] * (1.0 - r[k]);
                let dz_pre = dz * z[k] * (1.0 - z[k]);
                di[k] = dr_pre;
                di[hd + k] = dz_pre;
                di[2 * hd + k] = dn_pre;
                dhh[k] = dr_pre;
                dhh[hd + k] = dz_pre;
                dhh[2 * hd + k] = dn_pre * r[k];
            }
            let mut dx = alloc::vec![0.0; din];
            for i in 0..3 * hd {
                let (a, b) = (di[i], dhh[i]);
                g[self.b_ih.offset + i] += a;
                g[self.b_hh.offset + i] += b;
                let ri = self.w_ih.offset + i * din;
                for j in 0..din {
                    g[ri + j] += a * x[j];
                    dx[j] += a * w_ih[i * din + j];
                }
                let rh = self.w_hh.offset + i * hd;
                for j in 0..hd {
                    g[rh + j] += b * h[j];
                    dh_prev[j] += b * w_hh[i * hd + j];
                }
            }
            dxs[t] = dx;
            dh = dh_prev;
        }
        dxs
    }
}

/// Token embedding table, `tokens x dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub table: Tensor,
}

impl Embedding {
    pub fn new(p: &mut ParamStore, name: &str, tokens: usize, dim: usize, rng: &mut SplitMix64) -> Self {
        Embedding { table: p.add(name, tokens, dim, 0.5, rng) }
    }

    pub fn dim(&self) -> usize {
        self.table.cols
    }

    pub fn lookup(&self, p: &[f64], tokens: &[u32]) -> Vec<Vec<f64>> {
        let d = self.table.cols;
        tokens
            .iter()
            .map(|&t| {
                let t = (t as usize).min(self.table.rows - 1);
                let o = self.table.offset + t * d;
                p[o..o + d].to_vec()
            })
            .collect()
    }

    pub fn backward(&self, g: &mut [f64], tokens: &[u32], dxs: &[Vec<f64>]) {
        let d = self.table.cols;
        for (&t, dx) in tokens.iter().zip(dxs) {
            let t = (t as usize).min(self.table.rows - 1);
            let o = self.table.offset + t * d;
            for j in 0..d {
                g[o + j] += dx[j];
            }
        }
    }
}
