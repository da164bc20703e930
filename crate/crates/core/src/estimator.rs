//! Minimum-distance estimation of the stability index and scale.
//!
//! The series is cut into `m` adjacent blocks of `n` increments. For a power
//! `p`, every block yields its terminal p-variation; when the driving noise is
//! `alpha`-stable these values are approximately `S_{alpha/p}(C', 1, 0)`, and
//! they are 1/2-stable exactly when `p = 2 alpha`. The estimator therefore
//! compares their empirical CDF with the 1/2-stable reference whose scale
//! `C'` is computed from a candidate `(C, alpha = p/2)`:
//!
//! ```text
//! D_n(C, p) = sup_{x >= 0} | G_{p,n}(x) - F_{1/2, C'(C)}(x) |
//! ```
//!
//! and reports the minimizer as `C* = C`, `alpha* = p*/2`. The minimum is
//! located by an exhaustive grid followed by Nelder–Mead from the best cell.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ks::{ks_sorted, EmpiricalCdf};
use crate::limit_law::{half_stable_cdf, limit_scale};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::pvariation::power_sum;
use crate::stable_law::StableParams;

/// Fewest blocks for which the empirical CDF is considered informative.
pub const M_MIN: usize = 20;

/// `m` equal blocks of `n` increments, in source order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockedSeries {
    n: usize,
    blocks: Vec<Vec<f64>>,
}

impl BlockedSeries {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    /// Builds blocks from a level series: the series is differenced once and
    /// the increments split, so block `i` holds the `n` increments ending at
    /// its levels (its first increment starts from the last level of block
    /// `i - 1`).
    pub fn from_levels(levels: &[f64], n: usize) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::SeriesTooShort {
                len: levels.len(),
                n,
                needed: 2 * n + 1,
            });
        }
        let increments: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
        block_split(&increments, n).map_err(|e| match e {
            Error::SeriesTooShort { n, .. } => Error::SeriesTooShort {
                len: levels.len(),
                n,
                needed: 2 * n + 1,
            },
            other => other,
        })
    }

    pub fn from_blocks(blocks: Vec<Vec<f64>>) -> Result<Self> {
        let n = blocks.first().map(Vec::len).unwrap_or(0);
        if n == 0 || blocks.iter().any(|b| b.len() != n) {
            return Err(Error::InvalidArgument(
                "blocks must be non-empty and of equal length".into(),
            ));
        }
        Ok(Self { n, blocks })
    }

    /// Subtracts each block's mean increment (removes a linear trend from
    /// each block's level path).
    pub fn demeaned(&self) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mean = b.iter().sum::<f64>() / b.len() as f64;
                b.iter().map(|d| d - mean).collect()
            })
            .collect();
        Self { n: self.n, blocks }
    }

    /// Same blocks in a different order; `order` is a permutation of `0..m`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            n: self.n,
            blocks: order.iter().map(|&i| self.blocks[i].clone()).collect(),
        }
    }

    /// All data multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|d| d * factor).collect())
                .collect(),
        }
    }
}

/// Splits increments into `floor(len / n)` adjacent blocks of `n`, dropping
/// the remainder.
pub fn block_split(increments: &[f64], n: usize) -> Result<BlockedSeries> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "block length n must be at least 1".into(),
        ));
    }
    if increments.len() < 2 * n {
        return Err(Error::SeriesTooShort {
            len: increments.len(),
            n,
            needed: 2 * n,
        });
    }
    let blocks = increments.chunks_exact(n).map(<[f64]>::to_vec).collect();
    Ok(BlockedSeries { n, blocks })
}

/// Terminal p-variation `V_p^n(X^{(i)})_1` of every block.
pub fn block_statistics(blocked: &BlockedSeries, p: f64) -> Result<Vec<f64>> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "power p = {p} must be positive"
        )));
    }
    Ok(blocked.blocks.par_iter().map(|b| power_sum(b, p)).collect())
}

/// Right-continuous empirical CDF of `values`.
pub fn empirical_cdf(values: &[f64]) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(values)
        .ok_or_else(|| Error::InvalidArgument("empirical CDF of an empty sample".into()))
}

/// `sup_{x >= 0} |G(x) - F_{1/2, c'}(x)|`.
pub fn ks_distance(values: &[f64], c_prime: f64) -> Result<f64> {
    if !(c_prime > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "c_prime = {c_prime} must be positive"
        )));
    }
    let g = empirical_cdf(values)?;
    Ok(g.distance_to(|x| half_stable_cdf(c_prime, x)))
}

/// `C'` of the 1/2-stable reference for a candidate `(C, p)`, i.e. with
/// `alpha = p/2` and `beta = 0`.
pub fn reference_scale(c: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 4.0) {
        return Err(Error::InfeasibleGrid(format!("p = {p} outside (0, 4)")));
    }
    let params =
        StableParams::symmetric(0.5 * p, c).map_err(|e| Error::InfeasibleGrid(e.to_string()))?;
    Ok(limit_scale(&params, p)?.c_prime)
}

/// Inclusive arithmetic grid `min, min + step, ..., <= max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, step: f64) -> Self {
        Self { min, max, step }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.min.is_finite() && self.max >= self.min) {
            return Err(Error::InfeasibleGrid(format!(
                "grid [{}, {}] step {}",
                self.min, self.max, self.step
            )));
        }
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| self.min + i as f64 * self.step)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub c: f64,
    pub p: f64,
    pub d: f64,
}

/// `D_n(C, p)` on a grid, stored p-major (`d[ip * c_grid.len() + ic]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsSurface {
    pub c_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub d_values: Vec<f64>,
    pub argmin: SurfacePoint,
    /// Grid indices `(ip, ic)` of the argmin.
    pub argmin_index: (usize, usize),
    /// How many cells share the minimal value; the first in grid order wins.
    pub tie_count: usize,
    /// Cells strictly below all of their (up to 8) neighbours.
    pub local_minima: Vec<SurfacePoint>,
}

impl KsSurface {
    pub fn d(&self, ip: usize, ic: usize) -> f64 {
        self.d_values[ip * self.c_grid.len() + ic]
    }

    /// For every `p`, the smallest distance over `C` and the `C` attaining it.
    pub fn per_p_best(&self) -> Vec<SurfacePoint> {
        (0..self.p_grid.len())
            .map(|ip| {
                let mut best = SurfacePoint {
                    c: self.c_grid[0],
                    p: self.p_grid[ip],
                    d: self.d(ip, 0),
                };
                for ic in 1..self.c_grid.len() {
                    let d = self.d(ip, ic);
                    if d < best.d {
                        best = SurfacePoint {
                            c: self.c_grid[ic],
                            p: self.p_grid[ip],
                            d,
                        };
                    }
                }
                best
            })
            .collect()
    }

    /// CSV with columns `C,p,D`, p-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "C,p,D")?;
        for (ip, p) in self.p_grid.iter().enumerate() {
            for (ic, c) in self.c_grid.iter().enumerate() {
                writeln!(out, "{c},{p},{}", self.d(ip, ic))?;
            }
        }
        Ok(())
    }
}

/// Sorted block statistics for every `p`, in grid order.
fn sorted_statistics(blocked: &BlockedSeries, p_grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    p_grid
        .par_iter()
        .map(|&p| {
            let mut s = block_statistics(blocked, p)?;
            s.sort_by(f64::total_cmp);
            Ok(s)
        })
        .collect()
}

fn check_grids(c_grid: &[f64], p_grid: &[f64]) -> Result<()> {
    if c_grid.is_empty() || p_grid.is_empty() {
        return Err(Error::InfeasibleGrid("empty grid".into()));
    }
    if let Some(c) = c_grid.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
        return Err(Error::InfeasibleGrid(format!("C = {c} must be positive")));
    }
    if let Some(p) = p_grid.iter().find(|&&p| !(p > 0.0 && p < 4.0)) {
        return Err(Error::InfeasibleGrid(format!(
            "p = {p} outside (0, 4); alpha = p/2 must lie in (0, 2)"
        )));
    }
    Ok(())
}

/// Evaluates `D_n(C, p)` on `c_grid x p_grid`.
pub fn ks_surface(blocked: &BlockedSeries, c_grid: &[f64], p_grid: &[f64]) -> Result<KsSurface> {
    check_grids(c_grid, p_grid)?;
    let stats = sorted_statistics(blocked, p_grid)?;
    let rows: Vec<Vec<f64>> = p_grid
        .par_iter()
        .zip(stats.par_iter())
        .map(|(&p, sorted)| {
            c_grid
                .iter()
                .map(|&c| {
                    let cp = reference_scale(c, p)?;
                    let d = ks_sorted(sorted, |x| half_stable_cdf(cp, x));
                    if !d.is_finite() || !cp.is_finite() {
                        return Err(Error::NonFiniteSurface { c, p });
                    }
                    Ok(d)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let d_values: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(assemble_surface(c_grid.to_vec(), p_grid.to_vec(), d_values))
}

fn assemble_surface(c_grid: Vec<f64>, p_grid: Vec<f64>, d_values: Vec<f64>) -> KsSurface {
    let nc = c_grid.len();
    let np = p_grid.len();
    let mut best = 0usize;
    for (i, &d) in d_values.iter().enumerate() {
        if d < d_values[best] {
            best = i;
        }
    }
    let d_min = d_values[best];
    let tie_count = d_values.iter().filter(|&&d| d == d_min).count();
    let (ip, ic) = (best / nc, best % nc);

    let mut local_minima = Vec::new();
    for ip in 0..np {
        for ic in 0..nc {
            let d = d_values[ip * nc + ic];
            let mut is_min = true;
            'nb: for dp in -1i64..=1 {
                for dc in -1i64..=1 {
                    if dp == 0 && dc == 0 {
                        continue;
                    }
                    let (jp, jc) = (ip as i64 + dp, ic as i64 + dc);
                    if jp < 0 || jc < 0 || jp >= np as i64 || jc >= nc as i64 {
                        continue;
                    }
                    if d_values[jp as usize * nc + jc as usize] <= d {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min && (np > 1 || nc > 1) {
                local_minima.push(SurfacePoint {
                    c: c_grid[ic],
                    p: p_grid[ip],
                    d,
                });
            }
        }
    }

    KsSurface {
        argmin: SurfacePoint {
            c: c_grid[ic],
            p: p_grid[ip],
            d: d_min,
        },
        argmin_index: (ip, ic),
        tie_count,
        local_minima,
        c_grid,
        p_grid,
        d_values,
    }
}

/// `D_n(C, p)` at a single point.
pub fn distance_at(blocked: &BlockedSeries, c: f64, p: f64) -> Result<f64> {
    let cp = reference_scale(c, p)?;
    let mut stats = block_statistics(blocked, p)?;
    stats.sort_by(f64::total_cmp);
    Ok(ks_sorted(&stats, |x| half_stable_cdf(cp, x)))
}

/// `p -> D_n(C, p)` at fixed `C` over `p_grid`.
pub fn fixed_c_slice(blocked: &BlockedSeries, c: f64, p_grid: &[f64]) -> Result<Vec<SurfacePoint>> {
    check_grids(&[c], p_grid)?;
    p_grid
        .par_iter()
        .map(|&p| {
            Ok(SurfacePoint {
                c,
                p,
                d: distance_at(blocked, c, p)?,
            })
        })
        .collect()
}

/// Interior points of a 1-D slice strictly below both neighbours.
pub fn slice_local_minima(slice: &[SurfacePoint]) -> Vec<SurfacePoint> {
    slice
        .windows(3)
        .filter(|w| w[1].d < w[0].d && w[1].d < w[2].d)
        .map(|w| w[1])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub c_grid: GridSpec,
    pub p_grid: GridSpec,
    /// Run Nelder–Mead from the best grid cell.
    pub refine: bool,
    /// Subtract each block's mean increment first.
    pub demean: bool,
    pub m_min: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            c_grid: GridSpec::new(0.5, 20.0, 0.25),
            p_grid: GridSpec::new(0.8, 3.6, 0.05),
            refine: true,
            demean: false,
            m_min: M_MIN,
        }
    }
}

/// Which edges of the search box the estimate sits on (within half a step).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFlags {
    pub p_low: bool,
    pub p_high: bool,
    pub c_low: bool,
    pub c_high: bool,
}

impl BoundaryFlags {
    pub fn any(&self) -> bool {
        self.p_low || self.p_high || self.c_low || self.c_high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub alpha_star: f64,
    pub c_star: f64,
    pub p_star: f64,
    pub d_min: f64,
    /// Best cell of the grid search (before refinement).
    pub grid_best: SurfacePoint,
    pub boundary: BoundaryFlags,
    pub m: usize,
    pub n: usize,
    /// Best `C` and distance for each `p` of the grid.
    pub per_p_best: Vec<SurfacePoint>,
    #[serde(skip)]
    pub surface: Option<KsSurface>,
}

/// Grid search over `config`'s box, then optional Nelder–Mead refinement.
pub fn estimate(blocked: &BlockedSeries, config: &EstimatorConfig) -> Result<EstimationResult> {
    if blocked.m() < config.m_min {
        return Err(Error::TooFewBlocks {
            m: blocked.m(),
            min: config.m_min,
        });
    }
    let demeaned;
    let data = if config.demean {
        demeaned = blocked.demeaned();
        &demeaned
    } else {
        blocked
    };
    let c_grid = config.c_grid.values()?;
    let p_grid = config.p_grid.values()?;
    let surface = ks_surface(data, &c_grid, &p_grid)?;
    let grid_best = surface.argmin;

    let mut best = grid_best;
    if config.refine {
        let lo = [c_grid[0], p_grid[0]];
        let hi = [*c_grid.last().unwrap(), *p_grid.last().unwrap()];
        let step = [0.5 * config.c_grid.step, 0.5 * config.p_grid.step];
        let m = nelder_mead(
            |x: &[f64; 2]| distance_at(data, x[0], x[1]).unwrap_or(f64::INFINITY),
            [grid_best.c, grid_best.p],
            step,
            lo,
            hi,
            NelderMeadOptions {
                max_evals: 300,
                f_tol: 1e-10,
                x_tol: 1e-3,
            },
        );
        if m.value < best.d {
            best = SurfacePoint {
                c: m.x[0],
                p: m.x[1],
                d: m.value,
            };
        }
    }

    let near = |x: f64, edge: f64, step: f64| (x - edge).abs() <= 0.5 * step;
    let boundary = BoundaryFlags {
        p_low: near(best.p, p_grid[0], config.p_grid.step),
        p_high: near(best.p, *p_grid.last().unwrap(), config.p_grid.step),
        c_low: near(best.c, c_grid[0], config.c_grid.step),
        c_high: near(best.c, *c_grid.last().unwrap(), config.c_grid.step),
    };

    Ok(EstimationResult {
        alpha_star: best.p / 2.0,
        c_star: best.c,
        p_star: best.p,
        d_min: best.d,
        grid_best,
        boundary,
        m: data.m(),
        n: data.n(),
        per_p_best: surface.per_p_best(),
        surface: Some(surface),
    })
}
