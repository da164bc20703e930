//! Sample paths on the uniform grid `{k/n : k = 0..floor(nT)}`.
//!
//! Lévy paths are exact in law on the grid: the increment over a step of
//! length `1/n` is `S_alpha(C n^{-1/alpha}, beta, 0)`. SDE paths
//! `X_t = x0 + int_0^t f(s, X_s) ds + L_t` use explicit Euler on a fine grid
//! and are then restricted to the observation grid.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::stable_law::StableParams;

/// Default ratio between the Euler grid and the observation grid.
pub const DEFAULT_FINE_MULTIPLIER: usize = 16;

/// Number of steps `floor(n T)` of a grid, tolerant of `n T` landing a few
/// ulps below an integer.
pub fn grid_steps(n: usize, horizon: f64) -> usize {
    let nt = n as f64 * horizon;
    (nt * (1.0 + 4.0 * f64::EPSILON)).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    n: usize,
    horizon: f64,
    values: Vec<f64>,
}

impl PathSample {
    pub fn new(n: usize, horizon: f64, values: Vec<f64>) -> Result<Self> {
        if n == 0 || !(horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid n = {n}, T = {horizon}"
            )));
        }
        let expected = grid_steps(n, horizon) + 1;
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "path has {} values, grid needs {expected}",
                values.len()
            )));
        }
        Ok(Self { n, horizon, values })
    }

    /// A path on `[0, 1]` with grid `1/n` from its `n + 1` levels.
    pub fn unit(values: Vec<f64>) -> Result<Self> {
        let n = values.len().saturating_sub(1);
        Self::new(n, 1.0, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Number of grid steps, `floor(n T)`.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Drift `f(s, x)` of the SDE.
#[derive(Clone, Default)]
pub enum DriftSpec {
    #[default]
    Zero,
    /// `f(s, x) = cos x`
    Cosine,
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl DriftSpec {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        DriftSpec::Custom(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, s: f64, x: f64) -> f64 {
        match self {
            DriftSpec::Zero => 0.0,
            DriftSpec::Cosine => x.cos(),
            DriftSpec::Custom(f) => f(s, x),
        }
    }
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftSpec::Zero => f.write_str("Zero"),
            DriftSpec::Cosine => f.write_str("Cosine"),
            DriftSpec::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

fn check_grid(n: usize, horizon: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon T = {horizon} must be positive"
        )));
    }
    Ok(grid_steps(n, horizon))
}

/// Law of one grid increment `L_{1/n}`.
pub fn increment_law(params: &StableParams, n: usize) -> Result<StableParams> {
    params.with_scale(params.scale() * (n as f64).powf(-1.0 / params.alpha()))
}

/// `L` on the grid `k/n`, `0 <= k <= floor(nT)`, with `L_0 = 0`.
pub fn simulate_levy(
    params: &StableParams,
    n: usize,
    horizon: f64,
    stream: &RandomStream,
) -> Result<PathSample> {
    let steps = check_grid(n, horizon)?;
    let law = increment_law(params, n)?;
    let mut rng = stream.rng();
    let mut values = Vec::with_capacity(steps + 1);
    let mut level = 0.0;
    values.push(level);
    for _ in 0..steps {
        level += law.sample(&mut rng);
        values.push(level);
    }
    PathSample::new(n, horizon, values)
}

/// Euler scheme for `X_t = x0 + int_0^t f(s, X_s) ds + L_t`, observed every
/// `1/n_obs`.
pub fn simulate_sde(
    x0: f64,
    drift: &DriftSpec,
    params: &StableParams,
    n_fine: usize,
    n_obs: usize,
    horizon: f64,
    stream: &RandomStream,
) -> Result<PathSample> {
    simulate_sde_from(0.0, x0, drift, params, n_fine, n_obs, horizon, stream)
}

/// [`simulate_sde`] started at time `t0` (the drift sees `t0 + s`).
#[allow(clippy::too_many_arguments)]
pub fn simulate_sde_from(
    t0: f64,
    x0: f64,
    drift: &DriftSpec,
    params: &StableParams,
    n_fine: usize,
    n_obs: usize,
    horizon: f64,
    stream: &RandomStream,
) -> Result<PathSample> {
    Ok(run_euler(t0, x0, drift, params, n_fine, n_obs, horizon, stream, false)?.0)
}

/// The SDE path and its driving Lévy path `L` (from the same draws), both on
/// the observation grid.
pub fn simulate_sde_coupled(
    x0: f64,
    drift: &DriftSpec,
    params: &StableParams,
    n_fine: usize,
    n_obs: usize,
    horizon: f64,
    stream: &RandomStream,
) -> Result<(PathSample, PathSample)> {
    let (sde, levy) = run_euler(0.0, x0, drift, params, n_fine, n_obs, horizon, stream, true)?;
    Ok((sde, levy.expect("requested")))
}

#[allow(clippy::too_many_arguments)]
fn run_euler(
    t0: f64,
    x0: f64,
    drift: &DriftSpec,
    params: &StableParams,
    n_fine: usize,
    n_obs: usize,
    horizon: f64,
    stream: &RandomStream,
    keep_noise: bool,
) -> Result<(PathSample, Option<PathSample>)> {
    if n_obs == 0 || n_fine == 0 || !n_fine.is_multiple_of(n_obs) {
        return Err(Error::InvalidArgument(format!(
            "n_fine = {n_fine} must be a positive multiple of n_obs = {n_obs}"
        )));
    }
    let obs_steps = check_grid(n_obs, horizon)?;
    let ratio = n_fine / n_obs;
    let law = increment_law(params, n_fine)?;
    let h = 1.0 / n_fine as f64;
    let mut rng = stream.rng();

    let mut x = x0;
    let mut l = 0.0;
    let mut xs = Vec::with_capacity(obs_steps + 1);
    let mut ls = Vec::with_capacity(if keep_noise { obs_steps + 1 } else { 0 });
    xs.push(x);
    if keep_noise {
        ls.push(l);
    }
    let mut k = 0usize;
    for _ in 0..obs_steps {
        for _ in 0..ratio {
            let s = t0 + k as f64 * h;
            let dl = law.sample(&mut rng);
            x = x + drift.eval(s, x) * h + dl;
            l += dl;
            k += 1;
        }
        xs.push(x);
        if keep_noise {
            ls.push(l);
        }
    }
    let sde = PathSample::new(n_obs, horizon, xs)?;
    let levy = if keep_noise {
        Some(PathSample::new(n_obs, horizon, ls)?)
    } else {
        None
    };
    Ok((sde, levy))
}

/// `X = base + Y` on the grid of `base`, `Y` given as a function of time.
pub fn add_perturbation<Y: Fn(f64) -> f64>(base: &PathSample, y: Y) -> PathSample {
    let values = base
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| v + y(base.time(k)))
        .collect();
    PathSample {
        values,
        ..base.clone()
    }
}

/// `m` Lévy paths on streams `first.nth(0..m)`, generated in parallel.
pub fn simulate_levy_batch(
    params: &StableParams,
    n: usize,
    horizon: f64,
    first: &RandomStream,
    m: usize,
) -> Result<Vec<PathSample>> {
    (0..m as u64)
        .into_par_iter()
        .map(|i| simulate_levy(params, n, horizon, &first.nth(i)))
        .collect()
}
