//! Binary tree mechanism for continual prefix sums.
//!
//! Level `j` partitions time into blocks of length `2^j`; block `m` covers
//! steps `(m−1)·2^j + 1 ..= m·2^j`. The prefix sum at `t` adds the blocks
//! `(j, t >> j)` for every set bit `j` of `t`. Only blocks with an odd index
//! are ever used, so noise is drawn when such a block completes and the
//! mechanism keeps one block per level.

use crate::error::{bad, Error, Result};
use crate::noise::NoiseSource;

/// Number of levels, `⌈log2 T⌉ + 1`.
pub fn tree_height(horizon: usize) -> usize {
    assert!(horizon >= 1);
    (usize::BITS - (horizon - 1).leading_zeros()) as usize + 1
}

/// Blocks `(level, index)` whose sum is the prefix sum at `t`.
pub fn dyadic_cover(t: usize) -> Vec<(usize, usize)> {
    (0..usize::BITS as usize)
        .filter(|j| t >> j & 1 == 1)
        .map(|j| (j, t >> j))
        .collect()
}

/// Blocks `(level, index)` that contain step `t`, one per level.
pub fn blocks_containing(t: usize, height: usize) -> Vec<(usize, usize)> {
    (0..height).map(|j| (j, (t - 1) / (1 << j) + 1)).collect()
}

#[derive(Clone, Debug)]
struct Block {
    index: usize,
    noisy: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TreeMechanism {
    horizon: usize,
    height: usize,
    dims: usize,
    gamma: f64,
    epsilon: f64,
    node_scale: f64,
    t: usize,
    running: Vec<Vec<f64>>,
    completed: Vec<Option<Block>>,
    draws: usize,
    noise: NoiseSource,
}

impl TreeMechanism {
    pub fn new(horizon: usize, dims: usize, gamma: f64, epsilon: f64, noise: NoiseSource) -> Result<Self> {
        if horizon == 0 {
            return Err(bad("tree horizon must be at least 1"));
        }
        if dims == 0 {
            return Err(bad("tree dimension must be at least 1"));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(bad(format!("sensitivity must be nonnegative, got {gamma}")));
        }
        if !(epsilon > 0.0) {
            return Err(bad(format!("tree epsilon must be positive, got {epsilon}")));
        }
        let height = tree_height(horizon);
        Ok(TreeMechanism {
            horizon,
            height,
            dims,
            gamma,
            epsilon,
            node_scale: gamma * height as f64 / epsilon,
            t: 0,
            running: vec![vec![0.0; dims]; height],
            completed: vec![None; height],
            draws: 0,
            noise,
        })
    }

    /// Consumes the next increment and releases the noisy prefix sum.
    pub fn step(&mut self, inc: &[f64]) -> Result<Vec<f64>> {
        if self.t == self.horizon {
            return Err(Error::HorizonExceeded(self.horizon));
        }
        if inc.len() != self.dims {
            return Err(bad(format!(
                "increment has {} entries, expected {}",
                inc.len(),
                self.dims
            )));
        }
        self.t += 1;
        let t = self.t;
        for j in 0..self.height {
            for (acc, x) in self.running[j].iter_mut().zip(inc) {
                *acc += x;
            }
            if !t.is_multiple_of(1 << j) {
                continue;
            }
            let index = t >> j;
            let exact = std::mem::replace(&mut self.running[j], vec![0.0; self.dims]);
            if index % 2 == 1 {
                let mut noisy = exact;
                for x in &mut noisy {
                    *x += self.noise.laplace(self.node_scale)?;
                }
                self.draws += self.dims;
                self.completed[j] = Some(Block { index, noisy });
            }
        }
        let mut out = vec![0.0; self.dims];
        for (j, index) in dyadic_cover(t) {
            let block = self.completed[j].as_ref().expect("cover block completed");
            debug_assert_eq!(block.index, index);
            for (o, x) in out.iter_mut().zip(&block.noisy) {
                *o += x;
            }
        }
        Ok(out)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Laplace scale of each block's noise.
    pub fn node_scale(&self) -> f64 {
        self.node_scale
    }

    /// Steps consumed so far.
    pub fn time(&self) -> usize {
        self.t
    }

    /// Noise samples drawn so far.
    pub fn draws(&self) -> usize {
        self.draws
    }
}
