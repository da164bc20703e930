//! Limit objects for the p-variation of a stable process.
//!
//! For `p > alpha / 2` the compensated p-variation of `L ~ S_alpha(C, beta, 0)`
//! converges to a totally skewed stable process with index `alpha / p` and
//! scale
//!
//! ```text
//! C' = C^p * ( cos(pi a / 2p) Gamma(1 - a/p) / (cos(pi a / 2) Gamma(1 - a)) )^(p/a),   a != p
//! C' = C,                                                                             a == p
//! ```
//!
//! With `p = 2 alpha` the limit is the 1/2-stable subordinator (Lévy
//! distribution), whose CDF has the closed form `erfc(sqrt(C' / 2x))`.

use std::f64::consts::{FRAC_PI_2, PI};

use libm::erfc;
use libm::tgamma as gamma;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::stable_law::StableParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitScale {
    pub c_prime: f64,
    pub alpha_over_p: f64,
}

impl LimitScale {
    /// The limit law `S_{alpha/p}(C', 1, 0)`.
    pub fn law(&self) -> Result<StableParams> {
        StableParams::new(self.alpha_over_p, self.c_prime, 1.0)
    }
}

/// `Gamma(1 - z) cos(pi z / 2)` for `z` in `(0, 2)`.
///
/// Uses `Gamma(1-z) Gamma(z) = pi / sin(pi z)`, which turns the product into
/// `pi / (2 Gamma(z) sin(pi z / 2))`; both original factors blow up at
/// `z = 1` but this form is regular there (value `pi / 2`).
pub fn gamma_cos_product(z: f64) -> f64 {
    PI / (2.0 * gamma(z) * (FRAC_PI_2 * z).sin())
}

/// Scale `C'` of the p-variation limit and its index `alpha / p`.
pub fn limit_scale(params: &StableParams, p: f64) -> Result<LimitScale> {
    let a = params.alpha();
    if !(p > 0.5 * a) || !p.is_finite() {
        return Err(Error::BelowHalfAlpha {
            p,
            half_alpha: 0.5 * a,
        });
    }
    if params.is_gaussian() {
        return Err(Error::GaussianLimit);
    }
    let c = params.scale();
    let c_prime = if a == p {
        c
    } else {
        let ratio = gamma_cos_product(a / p) / gamma_cos_product(a);
        c.powf(p) * ratio.powf(p / a)
    };
    Ok(LimitScale {
        c_prime,
        alpha_over_p: a / p,
    })
}

/// CDF of the 1/2-stable subordinator with scale `c_prime`:
/// `sqrt(C'/2pi) int_0^x exp(-C'/2y) y^{-3/2} dy = erfc(sqrt(C'/(2x)))`.
pub fn ref_cdf_half_stable(c_prime: f64, x: f64) -> Result<f64> {
    if !(c_prime > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "c_prime = {c_prime} must be positive"
        )));
    }
    Ok(half_stable_cdf(c_prime, x))
}

/// Unchecked form of [`ref_cdf_half_stable`] for hot loops; `c_prime > 0`.
#[inline]
pub fn half_stable_cdf(c_prime: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    erfc((c_prime / (2.0 * x)).sqrt())
}

/// One draw of `S_{alpha/p}(C', 1, 0)`.
pub fn sample_limit<R: Rng + ?Sized>(scale: &LimitScale, rng: &mut R) -> Result<f64> {
    Ok(scale.law()?.sample(rng))
}

/// `count` draws of the limit law from one stream.
pub fn sample_limit_batch(
    scale: &LimitScale,
    stream: &RandomStream,
    count: usize,
) -> Result<Vec<f64>> {
    let law = scale.law()?;
    let mut rng = stream.rng();
    Ok((0..count).map(|_| law.sample(&mut rng)).collect())
}
