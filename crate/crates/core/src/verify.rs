//! Monte Carlo convergence checks for the p-variation limit theorems.
//!
//! Each scenario builds two samples of size `m` and compares them with the
//! two-sample Kolmogorov–Smirnov statistic against `1.52 sqrt(2/m)` (level
//! about 0.02).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ks::{kolmogorov_sf, ks_two_sample};
use crate::limit_law::{limit_scale, sample_limit_batch};
use crate::path_sim::{
    add_perturbation, simulate_levy, simulate_sde_coupled, DriftSpec, PathSample,
    DEFAULT_FINE_MULTIPLIER,
};
use crate::pvariation::{compensated_terminal, pvariation};
use crate::rng::RandomStream;
use crate::stable_law::StableParams;

/// Kolmogorov quantile used by every scenario.
pub const KS_LAMBDA: f64 = 1.52;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// `p > alpha`: raw p-variation vs the subordinator limit.
    Thm1Sub,
    /// `alpha/2 < p < alpha`: compensated p-variation vs its stable limit.
    Thm1Centered,
    /// `L` vs `L + sin(t)`.
    Thm3Lipschitz,
    /// Cosine-drift SDE vs its driving Lévy process.
    CorSde,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Thm1Sub,
        Scenario::Thm1Centered,
        Scenario::Thm3Lipschitz,
        Scenario::CorSde,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Thm1Sub => "thm1-sub",
            Scenario::Thm1Centered => "thm1-centered",
            Scenario::Thm3Lipschitz => "thm3-lipschitz",
            Scenario::CorSde => "cor-sde",
        }
    }

    /// Parameters `(alpha, C, p)` of the scenario.
    pub fn setup(&self) -> (f64, f64, f64) {
        match self {
            Scenario::Thm1Sub => (1.5, 1.0, 2.0),
            Scenario::Thm1Centered | Scenario::Thm3Lipschitz => (1.5, 1.0, 1.0),
            Scenario::CorSde => (0.75, 6.35, 1.5),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    /// Euler steps per observation step (SDE scenario only).
    pub fine_multiplier: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n: 10_000,
            m: 2000,
            fine_multiplier: DEFAULT_FINE_MULTIPLIER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub statistic: f64,
    pub threshold: f64,
    /// Asymptotic p-value `Q(sqrt(m/2) D)`.
    pub p_value: f64,
    pub passed: bool,
    pub m: usize,
    pub n: usize,
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: n={} m={} D={:.5} threshold={:.5} p={:.3} {}",
            self.scenario,
            self.n,
            self.m,
            self.statistic,
            self.threshold,
            self.p_value,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// `KS_LAMBDA sqrt(2/m)`.
pub fn threshold(m: usize) -> f64 {
    KS_LAMBDA * (2.0 / m as f64).sqrt()
}

fn report(scenario: Scenario, cfg: &ScenarioConfig, a: &[f64], b: &[f64]) -> ScenarioReport {
    let statistic = ks_two_sample(a, b);
    let t = threshold(cfg.m);
    ScenarioReport {
        scenario,
        statistic,
        threshold: t,
        p_value: kolmogorov_sf(statistic * (cfg.m as f64 / 2.0).sqrt()),
        passed: statistic < t,
        m: cfg.m,
        n: cfg.n,
    }
}

/// `stat` of `m` independent Lévy paths on `[0, 1]`, path `i` on `family.nth(i)`.
fn levy_statistics<F>(
    params: &StableParams,
    cfg: &ScenarioConfig,
    family: RandomStream,
    stat: F,
) -> Result<Vec<f64>>
where
    F: Fn(&PathSample) -> Result<f64> + Sync,
{
    (0..cfg.m as u64)
        .into_par_iter()
        .map(|i| {
            let path = simulate_levy(params, cfg.n, 1.0, &family.nth(i))?;
            stat(&path)
        })
        .collect()
}

pub fn run_scenario(scenario: Scenario, cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    if cfg.m == 0 || cfg.n == 0 {
        return Err(Error::InvalidArgument("n and m must be positive".into()));
    }
    let (alpha, c, p) = scenario.setup();
    let params = StableParams::symmetric(alpha, c)?;
    let paths = RandomStream::new(cfg.seed, 0);
    let reference = paths.reseed(1);
    let second = paths.reseed(2);

    let (a, b) = match scenario {
        Scenario::Thm1Sub | Scenario::Thm1Centered => {
            let a = levy_statistics(&params, cfg, paths, |x| compensated_terminal(x, p, &params))?;
            let b = sample_limit_batch(&limit_scale(&params, p)?, &reference, cfg.m)?;
            (a, b)
        }
        Scenario::Thm3Lipschitz => {
            let a = levy_statistics(&params, cfg, paths, |x| compensated_terminal(x, p, &params))?;
            let b = levy_statistics(&params, cfg, second, |x| {
                compensated_terminal(&add_perturbation(x, f64::sin), p, &params)
            })?;
            (a, b)
        }
        Scenario::CorSde => {
            let n_fine = cfg.n * cfg.fine_multiplier.max(1);
            let pairs: Vec<(f64, f64)> = (0..cfg.m as u64)
                .into_par_iter()
                .map(|i| {
                    let (x, l) = simulate_sde_coupled(
                        0.0,
                        &DriftSpec::Cosine,
                        &params,
                        n_fine,
                        cfg.n,
                        1.0,
                        &paths.nth(i),
                    )?;
                    Ok((pvariation(&x, p)?.terminal(), pvariation(&l, p)?.terminal()))
                })
                .collect::<Result<_>>()?;
            pairs.into_iter().unzip()
        }
    };
    Ok(report(scenario, cfg, &a, &b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!("thm9".parse::<Scenario>().is_err());
    }

    #[test]
    fn small_runs_are_deterministic() {
        let cfg = ScenarioConfig {
            seed: 3,
            n: 50,
            m: 40,
            fine_multiplier: 2,
        };
        for s in Scenario::ALL {
            let a = run_scenario(s, &cfg).unwrap();
            let b = run_scenario(s, &cfg).unwrap();
            assert_eq!(a, b);
            assert!((0.0..=1.0).contains(&a.statistic));
        }
    }
}
