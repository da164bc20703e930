//! The stable laws `S_alpha(C, beta, 0)`.
//!
//! Parametrization: for `alpha != 1`
//!
//! ```text
//! ln E exp(i l X) = -C^alpha |l|^alpha (1 - i beta sgn(l) tan(pi alpha / 2))
//! ```
//!
//! and for `alpha == 1`
//!
//! ```text
//! ln E exp(i l X) = -C |l| (1 - i beta (2/pi) sgn(l) log|l|).
//! ```
//!
//! The `alpha == 1` branch carries a minus sign in front of the log term, so
//! `S_1(C, beta, 0)` here is `S_1(C, -beta, 0)` in the Samorodnitsky–Taqqu
//! convention. For `alpha == 2` the law is `N(0, 2 C^2)` and `beta` is ignored.
//!
//! Besides sampling, the module evaluates the two moment functionals the
//! p-variation compensators need, `E|X|^p` and `E sin(|X|^alpha / n)`, and
//! the survival function of `|X|` they are built on.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use libm::erfc;
use libm::{lgamma as ln_gamma, tgamma as gamma};
use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    alpha: f64,
    scale: f64,
    beta: f64,
}

impl StableParams {
    pub fn new(alpha: f64, scale: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParams(format!(
                "alpha = {alpha} outside (0, 2]"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "scale = {scale} must be positive"
            )));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParams(format!(
                "beta = {beta} outside [-1, 1]"
            )));
        }
        Ok(Self { alpha, scale, beta })
    }

    /// Symmetric law `S_alpha(C, 0, 0)`.
    pub fn symmetric(alpha: f64, scale: f64) -> Result<Self> {
        Self::new(alpha, scale, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_gaussian(&self) -> bool {
        self.alpha == 2.0
    }

    /// Same law with a different scale.
    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        Self::new(self.alpha, scale, self.beta)
    }

    fn is_cauchy_like(&self) -> bool {
        self.alpha == 1.0
    }

    /// One Chambers–Mallows–Stuck draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = Open01.sample(rng);
        let v = PI * (u - 0.5);
        let w: f64 = Exp1.sample(rng);
        self.transform(v, w)
    }

    /// Maps a uniform angle `v` in `(-pi/2, pi/2)` and a unit exponential `w`
    /// to a draw of this law.
    pub fn transform(&self, v: f64, w: f64) -> f64 {
        let a = self.alpha;
        if self.is_cauchy_like() {
            // Samorodnitsky–Taqqu skewness for the log-sign used here
            let b = -self.beta;
            let hb = FRAC_PI_2 + b * v;
            let x = FRAC_2_PI * (hb * v.tan() - b * ((FRAC_PI_2 * w * v.cos()) / hb).ln());
            return self.scale * x + FRAC_2_PI * b * self.scale * self.scale.ln();
        }
        let beta = if self.is_gaussian() { 0.0 } else { self.beta };
        let tan_a = (FRAC_PI_2 * a).tan();
        let b = (beta * tan_a).atan() / a;
        let s = (1.0 + beta * beta * tan_a * tan_a).powf(0.5 / a);
        let av = a * (v + b);
        let x = s * av.sin() / v.cos().powf(1.0 / a) * ((v - av).cos() / w).powf((1.0 - a) / a);
        self.scale * x
    }

    /// Real part of the characteristic function at `t >= 0`.
    pub fn char_fn_re(&self, t: f64) -> f64 {
        let c = self.scale;
        if self.is_gaussian() {
            return (-(c * t).powi(2)).exp();
        }
        if self.is_cauchy_like() {
            if t == 0.0 {
                return 1.0;
            }
            return (-c * t).exp() * (c * t * self.beta * FRAC_2_PI * t.ln()).cos();
        }
        let v = (c * t).powf(self.alpha);
        (-v).exp() * (v * self.beta * (FRAC_PI_2 * self.alpha).tan()).cos()
    }

    /// `1 - Re phi(t)` without cancellation near `t = 0`.
    pub fn one_minus_char_fn_re(&self, t: f64) -> f64 {
        let c = self.scale;
        let (v, w) = if self.is_gaussian() {
            ((c * t).powi(2), 0.0)
        } else if self.is_cauchy_like() {
            if t == 0.0 {
                return 0.0;
            }
            (c * t, c * t * self.beta * FRAC_2_PI * t.ln())
        } else {
            let v = (c * t).powf(self.alpha);
            (v, v * self.beta * (FRAC_PI_2 * self.alpha).tan())
        };
        let half = (0.5 * w).sin();
        -(-v).exp_m1() + 2.0 * (-v).exp() * half * half
    }

    /// `lim x^alpha P(|X| > x)` for `alpha < 2`; zero for the Gaussian case.
    pub fn tail_constant(&self) -> f64 {
        if self.is_gaussian() {
            return 0.0;
        }
        let a = self.alpha;
        FRAC_2_PI * gamma(a) * (FRAC_PI_2 * a).sin() * self.scale.powf(a)
    }

    /// `E|X|^p` for `0 < p < alpha` (any `p > 0` when `alpha == 2`).
    pub fn abs_moment(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) || (!self.is_gaussian() && p >= self.alpha) {
            return Err(Error::MomentOrder {
                p,
                alpha: self.alpha,
            });
        }
        if self.is_gaussian() {
            // |N(0, 2C^2)|^p
            let sd = std::f64::consts::SQRT_2 * self.scale;
            return Ok(sd.powf(p) * 2f64.powf(0.5 * p) * gamma(0.5 * (1.0 + p)) / PI.sqrt());
        }
        if self.beta == 0.0 {
            return Ok(symmetric_abs_moment(self.alpha, p) * self.scale.powf(p));
        }
        self.abs_moment_fourier(p)
    }

    /// `E|X|^p = c_p * int_0^inf (1 - Re phi(t)) t^{-1-p} dt` with
    /// `c_p = (2/pi) Gamma(1+p) sin(pi p / 2)`, valid for any skewness.
    pub fn abs_moment_fourier(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < self.alpha.min(2.0)) {
            return Err(Error::MomentOrder {
                p,
                alpha: self.alpha,
            });
        }
        let a = self.alpha;
        let c = self.scale;
        // integrate over s = ln(C t); below s_lo 1 - Re phi ~ (Ct)^alpha,
        // above s_hi Re phi is below 1e-18
        let s_lo = (1e-12f64).ln() / a;
        let s_hi = (45f64).ln() / a;
        let g = |s: f64| {
            let t = s.exp() / c;
            self.one_minus_char_fn_re(t) * (-p * s).exp()
        };
        let left = (((a - p) * s_lo).exp()) / (a - p);
        let right = (-p * s_hi).exp() / p;
        let mid = quad::integrate(g, s_lo, s_hi, 1e-14, 1e-12)?;
        let cp = FRAC_2_PI * gamma(1.0 + p) * (FRAC_PI_2 * p).sin();
        Ok(cp * c.powf(p) * (left + mid + right))
    }

    /// `P(|X| > x)`.
    pub fn abs_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if self.is_gaussian() {
            return erfc(x / (2.0 * self.scale));
        }
        if let Some(v) = self.survival_series(x) {
            return v;
        }
        self.survival_fourier(x)
    }

    /// Large-`x` expansion of `P(|X| > x)`; `None` when it cannot be summed to
    /// about 1e-13 at this `x` (asymptotic regime not reached, heavy
    /// cancellation, or `alpha == 1` with skew).
    fn survival_series(&self, x: f64) -> Option<f64> {
        let a = self.alpha;
        if self.is_cauchy_like() && self.beta != 0.0 {
            return None;
        }
        let theta = if self.is_cauchy_like() {
            0.0
        } else {
            (self.beta * (FRAC_PI_2 * a).tan()).atan()
        };
        let ln_lambda = -theta.cos().ln();
        let ln_y = (x / self.scale).ln();
        let mut sum = 0.0;
        let mut max_term: f64 = 0.0;
        let mut prev = f64::INFINITY;
        for k in 1..400 {
            let kf = k as f64;
            let trig = (kf * FRAC_PI_2 * a).sin() * (kf * theta).cos();
            let ln_mag = kf * ln_lambda + ln_gamma(kf * a) - ln_gamma(kf + 1.0) - kf * a * ln_y;
            let mag = ln_mag.exp();
            if mag > prev && a > 1.0 {
                // asymptotic series started to diverge
                return None;
            }
            prev = mag;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let term = sign * mag * trig;
            sum += term;
            max_term = max_term.max(mag);
            if mag < 1e-15 * sum.abs().max(1e-300) || mag < 1e-16 {
                let s = FRAC_2_PI * sum;
                let cancel = FRAC_2_PI * max_term * 1e-15;
                if cancel > 1e-13 || !(0.0..=1.0).contains(&s) {
                    return None;
                }
                return Some(s);
            }
        }
        None
    }

    /// Gil-Pelaez inversion: `P(|X| <= x) = (2/pi) int_0^inf Re phi(t) sin(tx)/t dt`.
    pub fn survival_fourier(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let c = self.scale;
        let a = self.alpha;
        // u = C t; the envelope exp(-u^alpha) is below 1e-18 past u_max
        let u_max = 42f64.powf(1.0 / a);
        let y = x / c;
        let f = |u: f64| {
            if u == 0.0 {
                return y;
            }
            self.char_fn_re(u / c) * (u * y).sin() / u
        };
        let width = (PI / y).min(u_max / 16.0);
        let chunks = (u_max / width).ceil() as usize;
        let mut total = 0.0;
        for j in 0..chunks {
            let lo = j as f64 * width;
            let hi = ((j + 1) as f64 * width).min(u_max);
            total += quad::integrate(f, lo, hi, 1e-14, 1e-12)
                .unwrap_or_else(|_| quad::gk15(&f, lo, hi).0);
        }
        (1.0 - FRAC_2_PI * total).clamp(0.0, 1.0)
    }

    /// Smallest `x` (on a doubling grid, in units of the scale) from which
    /// the tail expansion is used.
    fn series_switch(&self) -> Option<f64> {
        let mut y = 0.5;
        while y < 1e4 {
            if self.survival_series(y * self.scale).is_some() {
                return Some(y * self.scale);
            }
            y *= 2.0;
        }
        None
    }

    /// `E sin(|X|^alpha / n)` to about 1e-7 absolute accuracy.
    ///
    /// Written as `int_0^inf cos(u) P(|X| > (n u)^{1/alpha}) du`; the survival
    /// function is inverted numerically near the origin and replaced by its
    /// tail expansion further out, and the oscillatory remainder beyond a
    /// multiple of `2 pi` uses the leading `1/u` term in closed form.
    pub fn sin_moment(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let a = self.alpha;
        let nf = n as f64;
        let x_of = |u: f64| (nf * u).powf(1.0 / a);
        let integrand = |u: f64| u.cos() * self.abs_survival(x_of(u));
        let two_pi = 2.0 * PI;

        if self.is_gaussian() {
            // survival is erfc; stop once it is below 1e-17
            let mut x_end = 2.0 * self.scale;
            while erfc(x_end / (2.0 * self.scale)) > 1e-17 {
                x_end *= 1.5;
            }
            let u_end = x_end.powf(a) / nf;
            return integrate_periods(&integrand, 0.0, u_end, two_pi);
        }

        let (x1, tail_terms) = match self.series_switch() {
            Some(x1) => (x1, true),
            None => (1e3 * self.scale, false),
        };
        let u1 = x1.powf(a) / nf;
        let mut total = integrate_periods(
            &|u: f64| u.cos() * self.survival_fourier(x_of(u)),
            0.0,
            u1,
            two_pi,
        )?;

        let lead = self.tail_constant() / nf;
        let big_u = (two_pi * 400.0).max((u1 / two_pi).ceil() * two_pi + two_pi);
        let far = |u: f64| {
            let x = x_of(u);
            let s = if tail_terms {
                self.survival_series(x)
                    .unwrap_or_else(|| self.tail_constant() * x.powf(-a))
            } else {
                self.tail_constant() * x.powf(-a)
            };
            u.cos() * s
        };
        total += integrate_periods(&far, u1, big_u, two_pi)?;
        // int_U^inf cos(u)/u du = -Ci(U) = g(U) when sin U = 0
        let uu = big_u * big_u;
        total += lead * (1.0 - 6.0 / uu + 120.0 / (uu * uu)) / uu;
        Ok(total)
    }
}

fn integrate_periods<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, period: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut total = 0.0;
    let mut lo = a;
    while lo < b {
        let mut next = ((lo / period).floor() + 1.0) * period;
        if next <= lo * (1.0 + 1e-12) {
            next += period;
        }
        let hi = next.min(b);
        total += quad::integrate(f, lo, hi, 1e-11, 1e-10)?;
        lo = hi;
    }
    Ok(total)
}

/// `E|X|^p` for `X ~ S_alpha(1, 0, 0)`:
/// `2^p Gamma((1+p)/2) Gamma(1 - p/alpha) / (Gamma(1 - p/2) sqrt(pi))`.
pub fn symmetric_abs_moment(alpha: f64, p: f64) -> f64 {
    2f64.powf(p) * gamma(0.5 * (1.0 + p)) * gamma(1.0 - p / alpha)
        / (gamma(1.0 - 0.5 * p) * PI.sqrt())
}

/// One draw of `params` from the start of `stream`.
pub fn sample_stable(params: &StableParams, stream: &RandomStream) -> f64 {
    params.sample(&mut stream.rng())
}
