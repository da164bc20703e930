#![allow(dead_code)]

use rayon::prelude::*;
use stablevar::{RandomStream, StableParams};

/// Mean and standard error of `f(X)` over `draws` samples of `params`.
pub fn monte_carlo<F>(params: &StableParams, draws: usize, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(f64) -> f64 + Sync,
{
    const CHUNKS: usize = 100;
    let per = draws / CHUNKS;
    let (s, s2) = (0..CHUNKS as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::new(seed, i).rng();
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..per {
                let v = f(params.sample(&mut rng));
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = (per * CHUNKS) as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `count` draws of `params` from one stream.
pub fn draws(params: &StableParams, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = RandomStream::new(seed, 0).rng();
    (0..count).map(|_| params.sample(&mut rng)).collect()
}
