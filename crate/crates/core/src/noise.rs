//! Seedable Laplace noise.
//!
//! Samples come from ChaCha20 seeded with the 64-bit run seed. Each component
//! (SVT, tree mechanism, ...) reads its own ChaCha stream, selected by the
//! FNV-1a hash of a component label, so components never share draws and a
//! seed reproduces the same samples on every platform. Uniforms are built
//! from the top 53 bits of a `u64` and mapped to the open interval
//! `(-1/2, 1/2)`; a Laplace sample is `-b·sgn(u)·ln(1 − 2|u|)`.
//!
//! Sampling uses double-precision floats. Floating-point side channels are
//! out of scope.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct NoiseSource {
    seed: u64,
    rng: ChaCha20Rng,
}

impl NoiseSource {
    /// Root source for a seed.
    pub fn new(seed: u64) -> Self {
        Self::component(seed, "")
    }

    /// Independent sub-stream for `(seed, label)`.
    pub fn component(seed: u64, label: &str) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(fnv1a(label.as_bytes()));
        NoiseSource { seed, rng }
    }

    /// Sub-stream of this source's seed for another component.
    pub fn derive(&self, label: &str) -> Self {
        Self::component(self.seed, label)
    }

    /// Seed drawn from the operating system; the choice is logged.
    pub fn entropy_seed() -> u64 {
        let seed = rand::random::<u64>();
        log::info!("no seed supplied; using seed {seed}");
        seed
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in the open interval `(-1/2, 1/2)`.
    pub fn centered_uniform(&mut self) -> f64 {
        let k = self.rng.next_u64() >> 11;
        (k as f64 + 0.5) / (1u64 << 53) as f64 - 0.5
    }

    /// One draw from `Lap(0, scale)`; exactly zero for `scale = 0`.
    pub fn laplace(&mut self, scale: f64) -> Result<f64> {
        if !(scale >= 0.0) {
            return Err(Error::NegativeScale(scale));
        }
        let u = self.centered_uniform();
        Ok(laplace_inverse_cdf(u, scale))
    }
}

/// Maps `u ∈ (-1/2, 1/2)` to the Laplace quantile of `u + 1/2`.
pub fn laplace_inverse_cdf(u: f64, scale: f64) -> f64 {
    if scale == 0.0 || u == 0.0 {
        return 0.0;
    }
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// CDF of `Lap(0, scale)` for `scale > 0`.
pub fn laplace_cdf(x: f64, scale: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / scale).exp()
    } else {
        1.0 - 0.5 * (-x / scale).exp()
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scale_and_median() {
        let mut src = NoiseSource::new(1);
        assert_eq!(src.laplace(0.0).unwrap(), 0.0);
        assert_eq!(laplace_inverse_cdf(0.0, 3.0), 0.0);
        assert!(matches!(src.laplace(-1.0), Err(Error::NegativeScale(_))));
        assert!(src.laplace(f64::NAN).is_err());
    }

    #[test]
    fn equal_seeds_replay_bitwise() {
        let mut a = NoiseSource::new(42);
        let mut b = NoiseSource::new(42);
        for _ in 0..1000 {
            assert_eq!(a.laplace(1.5).unwrap().to_bits(), b.laplace(1.5).unwrap().to_bits());
        }
    }

    #[test]
    fn components_do_not_share_draws() {
        let mut a = NoiseSource::component(7, "svt");
        let mut b = NoiseSource::component(7, "tree");
        let xs: Vec<f64> = (0..8).map(|_| a.centered_uniform()).collect();
        let ys: Vec<f64> = (0..8).map(|_| b.centered_uniform()).collect();
        assert_ne!(xs, ys);
        assert_eq!(NoiseSource::new(7).derive("svt").centered_uniform(), xs[0]);
    }

    #[test]
    fn uniforms_stay_open() {
        let mut src = NoiseSource::new(3);
        for _ in 0..100_000 {
            let u = src.centered_uniform();
            assert!(u > -0.5 && u < 0.5);
        }
    }

    #[test]
    fn moments_at_scale_two() {
        let mut src = NoiseSource::new(2024);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| src.laplace(2.0).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 8.0).abs() < 0.3, "variance {var}");
    }

    #[test]
    fn kolmogorov_smirnov_at_unit_scale() {
        let mut src = NoiseSource::new(99);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| src.laplace(1.0).unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = laplace_cdf(x, 1.0);
                (f - i as f64 / n as f64).abs().max((i + 1) as f64 / n as f64 - f)
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS distance {ks}");
    }
}
