//! Seeded random streams.
//!
//! Every stochastic draw in the crate goes through [`RngStream`], which wraps
//! the ChaCha8 generator from `rand_chacha`. A stream is fully determined by a
//! 64-bit seed and a 64-bit stream index; [`RngStream::for_run`] uses the run
//! index as the ChaCha stream id, so runs derived from one master seed are
//! independent and reproducible regardless of execution order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::for_run(seed, 0)
    }

    /// Stream for run `run_index` of an experiment seeded with `master_seed`.
    pub fn for_run(master_seed: u64, run_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(run_index);
        Self {
            seed: master_seed,
            stream: run_index,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform variate in `[0, 1)` with 53 bits of precision.
    pub fn uniform01(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform variate in the open interval `(0, 1)`; exact zeros are redrawn.
    pub fn uniform_open01(&mut self) -> f64 {
        loop {
            let u = self.uniform01();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Standard Cauchy variate via the inverse CDF.
    pub fn cauchy_standard(&mut self) -> f64 {
        cauchy_from_uniform(self.uniform_open01())
    }

    /// Uniform variate in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "uniform_in requires finite lo < hi, got [{lo}, {hi})"
            )));
        }
        let v = lo + (hi - lo) * self.uniform01();
        // lo + (hi - lo) * u can round up to hi for u close to 1.
        Ok(if v < hi { v } else { lo.max(prev_float(hi)) })
    }
}

/// Maps `u` in `(0, 1)` to the standard Cauchy quantile `tan(pi (u - 1/2))`.
pub fn cauchy_from_uniform(u: f64) -> f64 {
    if u == 0.5 {
        return 0.0;
    }
    (PI * (u - 0.5)).tan()
}

fn prev_float(x: f64) -> f64 {
    if x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else if x < 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        -f64::from_bits(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_draws_are_distinct_and_in_range() {
        let mut s = RngStream::new(42);
        let a = s.uniform01();
        let b = s.uniform01();
        assert_ne!(a, b);
        assert!((0.0..1.0).contains(&a) && (0.0..1.0).contains(&b));
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(7);
        let mut b = RngStream::new(7);
        for _ in 0..100 {
            assert_eq!(a.uniform01().to_bits(), b.uniform01().to_bits());
        }
    }

    #[test]
    fn run_streams_differ() {
        let mut a = RngStream::for_run(7, 0);
        let mut b = RngStream::for_run(7, 1);
        let xa: Vec<f64> = (0..8).map(|_| a.uniform01()).collect();
        let xb: Vec<f64> = (0..8).map(|_| b.uniform01()).collect();
        assert_ne!(xa, xb);
    }

    #[test]
    fn uniform_mean_converges() {
        let mut s = RngStream::new(1);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = s.uniform01();
            assert!(u < 1.0);
            sum += u;
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.005);
    }

    #[test]
    fn cauchy_median_at_half() {
        assert_eq!(cauchy_from_uniform(0.5), 0.0);
    }

    #[test]
    fn cauchy_cdf_checkpoints() {
        let mut s = RngStream::new(3);
        let n = 1_000_000;
        let (mut inside, mut below) = (0usize, 0usize);
        for _ in 0..n {
            let x = s.cauchy_standard();
            if x.abs() <= 1.0 {
                inside += 1;
            }
            if x <= 1.0 {
                below += 1;
            }
        }
        assert!((inside as f64 / n as f64 - 0.5).abs() < 0.01);
        assert!((below as f64 / n as f64 - 0.75).abs() < 0.01);
    }

    #[test]
    fn cauchy_quantiles_within_two_percent() {
        let mut s = RngStream::new(11);
        let n = 1_000_000;
        let mut xs: Vec<f64> = (0..n).map(|_| s.cauchy_standard()).collect();
        xs.sort_by(f64::total_cmp);
        for q in [0.6, 0.75, 0.9] {
            let emp = xs[(q * n as f64) as usize];
            let exact = (PI * (q - 0.5)).tan();
            assert!(
                ((emp - exact) / exact).abs() < 0.02,
                "q={q}: {emp} vs {exact}"
            );
        }
    }

    #[test]
    fn uniform_in_unit_matches_uniform01() {
        let mut a = RngStream::new(5);
        let mut b = RngStream::new(5);
        for _ in 0..50 {
            assert_eq!(a.uniform_in(0.0, 1.0).unwrap(), b.uniform01());
        }
    }

    #[test]
    fn uniform_in_range_and_symmetry() {
        let mut s = RngStream::new(9);
        for _ in 0..100_000 {
            let v = s.uniform_in(-100.0, 100.0).unwrap();
            assert!((-100.0..100.0).contains(&v));
        }
        let n = 1_000_000;
        let mean: f64 = (0..n)
            .map(|_| s.uniform_in(-5.12, 5.12).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 0.05);
    }

    #[test]
    fn uniform_in_rejects_empty_interval() {
        let mut s = RngStream::new(0);
        assert!(s.uniform_in(1.0, 1.0).is_err());
        assert!(s.uniform_in(2.0, 1.0).is_err());
    }
}
