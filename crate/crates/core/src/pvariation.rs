//! Equidistant p-variation `V_p^n(X)_t = sum_{i <= floor(nt)} |X_{i/n} - X_{(i-1)/n}|^p`
//! and its compensated form `V_p^n(X)_t - floor(nt) B_n(alpha, p)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path_sim::PathSample;
use crate::stable_law::StableParams;

/// `|x|^p` as `exp(p ln|x|)`, exactly zero at zero.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (p * x.abs().ln()).exp()
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `sum |d|^p` over a slice of increments.
pub fn power_sum(increments: &[f64], p: f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for &d in increments {
        acc.add(abs_pow(d, p));
    }
    acc.value()
}

fn check_power(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "power p = {p} must be positive"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationSeries {
    pub n: usize,
    pub p: f64,
    /// `V_p^n(X)_{k/n}` for `k = 0..=floor(nT)`.
    pub raw: Vec<f64>,
    /// `B_n(alpha, p)`, zero when no compensator was attached.
    pub compensator_per_step: f64,
}

impl VariationSeries {
    pub fn terminal(&self) -> f64 {
        *self.raw.last().expect("raw always holds V at time 0")
    }

    /// `V_p^n(X)_{k/n} - k B_n` for every grid index `k`.
    pub fn compensated(&self) -> Vec<f64> {
        self.raw
            .iter()
            .enumerate()
            .map(|(k, v)| v - k as f64 * self.compensator_per_step)
            .collect()
    }

    pub fn with_compensator(mut self, b_n: f64) -> Self {
        self.compensator_per_step = b_n;
        self
    }
}

/// Raw p-variation partial sums of `path`.
pub fn pvariation(path: &PathSample, p: f64) -> Result<VariationSeries> {
    check_power(p)?;
    let values = path.values();
    if values.len() < 2 {
        return Err(Error::InvalidArgument(
            "path needs at least two points".into(),
        ));
    }
    let mut raw = Vec::with_capacity(values.len());
    raw.push(0.0);
    let mut acc = CompensatedSum::default();
    let mut last = 0.0f64;
    for w in values.windows(2) {
        acc.add(abs_pow(w[1] - w[0], p));
        // the compensated value can dip an ulp below its predecessor
        last = last.max(acc.value());
        raw.push(last);
    }
    Ok(VariationSeries {
        n: path.n(),
        p,
        raw,
        compensator_per_step: 0.0,
    })
}

/// `B_n(alpha, p)`: `n^{-p/alpha} E|L_1|^p` for `alpha/2 < p < alpha`,
/// `E sin(|L_1|^alpha / n)` for `p = alpha` and zero for `p > alpha`.
pub fn compensator(params: &StableParams, p: f64, n: usize) -> Result<f64> {
    let a = params.alpha();
    if !(p > 0.5 * a) || !p.is_finite() {
        return Err(Error::BelowHalfAlpha {
            p,
            half_alpha: 0.5 * a,
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if p > a {
        Ok(0.0)
    } else if p == a {
        params.sin_moment(n as u64)
    } else {
        Ok((n as f64).powf(-p / a) * params.abs_moment(p)?)
    }
}

/// `V_p^n(X)_T - floor(nT) B_n(alpha, p)`.
pub fn compensated_terminal(path: &PathSample, p: f64, params: &StableParams) -> Result<f64> {
    let b_n = compensator(params, p, path.n())?;
    let v = pvariation(path, p)?;
    Ok(v.terminal() - path.steps() as f64 * b_n)
}

/// [`pvariation`] over many paths in parallel, results in input order.
pub fn pvariation_batch(paths: &[PathSample], p: f64) -> Result<Vec<VariationSeries>> {
    paths.par_iter().map(|path| pvariation(path, p)).collect()
}
