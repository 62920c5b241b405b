//! Flat parameter storage with named tensors.

use alloc::string::String;
use alloc::vec::Vec;

use crate::rng::SplitMix64;

/// Location of a row-major `rows x cols` tensor inside a [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tensor {
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Tensor {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> core::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
    pub data: Vec<f64>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a tensor initialised uniformly in `±scale`.
    pub fn add(&mut self, name: &str, rows: usize, cols: usize, scale: f64, rng: &mut SplitMix64) -> Tensor {
        let t = Tensor { offset: self.data.len(), rows, cols };
        self.data.extend((0..t.len()).map(|_| rng.uniform(-scale, scale)));
        self.names.push(name.into());
        self.tensors.push(t);
        t
    }

    /// Rebuilds a store from `(name, rows, cols)` entries laid out back to
    /// back. `None` if `data` has the wrong length.
    pub fn from_layout(layout: Vec<(String, usize, usize)>, data: Vec<f64>) -> Option<Self> {
        let mut p = ParamStore::new();
        let mut offset = 0;
        for (name, rows, cols) in layout {
            p.names.push(name);
            p.tensors.push(Tensor { offset, rows, cols });
            offset += rows * cols;
        }
        (offset == data.len()).then_some(ParamStore { data, ..p })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tensors(&self) -> impl Iterator<Item = (&str, Tensor)> {
        self.names.iter().map(String::as_str).zip(self.tensors.iter().copied())
    }

    pub fn get(&self, name: &str) -> Option<Tensor> {
        self.tensors().find(|(n, _)| *n == name).map(|(_, t)| t)
    }

    pub fn zeros_like(&self) -> Vec<f64> {
        alloc::vec![0.0; self.data.len()]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Same tensors and shapes.
    pub fn same_layout(&self, other: &ParamStore) -> bool {
        self.names == other.names && self.tensors == other.tensors
    }
}
