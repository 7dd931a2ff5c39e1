//! Monte Carlo driver: per-path work in parallel, reductions in index order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quadrature::pairwise_sum;
use crate::rng::path_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MCConfig {
    pub n_paths: usize,
    pub base_seed: u64,
}

impl MCConfig {
    pub fn new(n_paths: usize, base_seed: u64) -> Self {
        Self { n_paths, base_seed }
    }

    /// Seed of path `index`.
    pub fn seed(&self, index: usize) -> u64 {
        path_seed(self.base_seed, index as u64)
    }

    /// Runs `work(index, seed)` for every path and returns the outputs in path order.
    ///
    /// The result is independent of how rayon schedules the work.
    pub fn map<T, F>(&self, work: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, u64) -> T + Sync + Send,
    {
        (0..self.n_paths)
            .into_par_iter()
            .map(|i| work(i, self.seed(i)))
            .collect()
    }
}

/// Sample mean and standard error, both accumulated by pairwise summation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                n,
            };
        }
        let mean = pairwise_sum(xs) / n as f64;
        if n < 2 {
            return Self {
                mean,
                stderr: 0.0,
                n,
            };
        }
        let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&sq) / (n - 1) as f64;
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        }
    }
}
