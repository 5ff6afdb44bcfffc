//! Sparse vector technique over sensitivity-1 threshold queries.
//!
//! The budget is split evenly: the threshold is perturbed once by
//! `Lap(2/ε)` and each query by `Lap(4c/ε)`. A query whose noisy value reaches
//! the noisy threshold yields [`Verdict::Above`] until `c` such answers have
//! been given; every other query yields [`Verdict::Below`].
//!
//! In the transform, `Above` means the stream looks unsafe and releases stop.

use serde::{Deserialize, Serialize};

use crate::error::{bad, Result};
use crate::noise::NoiseSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// The query crossed the threshold.
    Above,
    /// The query stayed below the threshold (or the cutoff was reached).
    Below,
}

#[derive(Clone, Debug)]
pub struct SparseVector {
    epsilon: f64,
    threshold: f64,
    cutoff: usize,
    noisy_threshold: f64,
    query_scale: f64,
    count: usize,
    noise: NoiseSource,
}

impl SparseVector {
    pub fn new(epsilon: f64, threshold: f64, cutoff: usize, mut noise: NoiseSource) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(bad(format!("SVT epsilon must be positive, got {epsilon}")));
        }
        if cutoff == 0 {
            return Err(bad("SVT cutoff must be at least 1"));
        }
        if !threshold.is_finite() {
            return Err(bad("SVT threshold must be finite"));
        }
        let eps1 = epsilon / 2.0;
        let eps2 = epsilon / 2.0;
        let noisy_threshold = threshold + noise.laplace(1.0 / eps1)?;
        Ok(SparseVector {
            epsilon,
            threshold,
            cutoff,
            noisy_threshold,
            query_scale: 2.0 * cutoff as f64 / eps2,
            count: 0,
            noise,
        })
    }

    /// Answers one query. A fresh query noise is drawn on every call.
    pub fn step(&mut self, q: f64) -> Verdict {
        let z = self
            .noise
            .laplace(self.query_scale)
            .expect("scale is positive");
        if q + z >= self.noisy_threshold && self.count < self.cutoff {
            self.count += 1;
            Verdict::Above
        } else {
            Verdict::Below
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn noisy_threshold(&self) -> f64 {
        self.noisy_threshold
    }

    /// Scale of the per-query noise.
    pub fn query_scale(&self) -> f64 {
        self.query_scale
    }

    /// Number of `Above` answers so far.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
}
