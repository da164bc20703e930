//! Distributional checks of the sampler, path simulation, limit law and
//! estimator against independent oracles.

mod common;

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use libm::erfc;
use rayon::prelude::*;

use stablevar::estimator::{
    block_split, block_statistics, distance_at, estimate, fixed_c_slice, ks_distance,
    slice_local_minima, BlockedSeries, EstimatorConfig, GridSpec,
};
use stablevar::ks::{kolmogorov_critical, ks_one_sample, ks_two_sample, two_sample_threshold};
use stablevar::limit_law::{limit_scale, ref_cdf_half_stable, sample_limit_batch, LimitScale};
use stablevar::path_sim::{simulate_levy, simulate_levy_batch, simulate_sde, DriftSpec};
use stablevar::pvariation::pvariation;
use stablevar::{RandomStream, StableParams};

fn one_sample_threshold(level: f64, m: usize) -> f64 {
    kolmogorov_critical(level) / (m as f64).sqrt()
}

fn increments_of(params: &StableParams, n: usize, m: usize, seed: u64) -> Vec<f64> {
    let paths = simulate_levy_batch(params, n, 1.0, &RandomStream::new(seed, 0), m).unwrap();
    paths.iter().flat_map(|p| p.increments()).collect()
}

#[test]
fn tail_constant_matches_monte_carlo() {
    let params = StableParams::symmetric(0.75, 6.35).unwrap();
    let x = 1e5;
    let exact = params.abs_survival(x);
    let (mean, se) = common::monte_carlo(&params, 10_000_000, 11, |v| (v.abs() > x) as u8 as f64);
    assert!(
        ((mean - exact) / se).abs() < 3.0,
        "{mean} vs {exact} (se {se})"
    );
    let ratio = exact * x.powf(0.75) / params.tail_constant();
    assert!((ratio - 1.0).abs() < 1e-2, "{ratio}");
    let far = 1e12;
    let ratio = params.abs_survival(far) * far.powf(0.75) / params.tail_constant();
    assert!((ratio - 1.0).abs() < 1e-6, "{ratio}");
}

#[test]
fn empirical_characteristic_function() {
    for params in [
        StableParams::new(1.0, 1.5, 0.8).unwrap(),
        StableParams::new(1.0, 0.7, -0.5).unwrap(),
        StableParams::new(1.4, 1.2, 0.6).unwrap(),
        StableParams::new(0.6, 0.5, -0.9).unwrap(),
    ] {
        let xs = common::draws(&params, 1_000_000, 21);
        for &t in &[0.3, 1.0, 2.5] {
            let n = xs.len() as f64;
            let re = xs.iter().map(|x| (t * x).cos()).sum::<f64>() / n;
            let im = xs.iter().map(|x| (t * x).sin()).sum::<f64>() / n;
            let (c, a, b) = (params.scale(), params.alpha(), params.beta());
            let (modulus, phase) = if a == 1.0 {
                ((-c * t).exp(), b * FRAC_2_PI * c * t * t.ln())
            } else {
                let v = (c * t).powf(a);
                ((-v).exp(), v * b * (FRAC_PI_2 * a).tan())
            };
            assert!(
                (re - modulus * phase.cos()).abs() < 4e-3,
                "{params:?} t={t} re {re}"
            );
            assert!(
                (im - modulus * phase.sin()).abs() < 4e-3,
                "{params:?} t={t} im {im}"
            );
            assert!((params.char_fn_re(t) - modulus * phase.cos()).abs() < 1e-14);
        }
    }
}

#[test]
fn symmetric_law_is_symmetric() {
    let params = StableParams::symmetric(1.3, 2.0).unwrap();
    let xs = common::draws(&params, 100_000, 31);
    let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
    let ys = common::draws(&params, 100_000, 32);
    assert!(ks_two_sample(&ys, &neg) < two_sample_threshold(0.01, 100_000, 100_000));
}

#[test]
fn stable_under_convolution() {
    for alpha in [0.7, 1.6] {
        let params = StableParams::symmetric(alpha, 1.3).unwrap();
        let k = 4;
        let xs = common::draws(&params, 100_000 * k, 41);
        let sums: Vec<f64> = xs
            .chunks(k)
            .map(|c| c.iter().sum::<f64>() / (k as f64).powf(1.0 / alpha))
            .collect();
        let single = common::draws(&params, 100_000, 42);
        assert!(
            ks_two_sample(&sums, &single) < two_sample_threshold(0.01, 100_000, 100_000),
            "alpha {alpha}"
        );
    }
}

#[test]
fn cauchy_scaling_is_distributional() {
    let unit = StableParams::new(1.0, 1.0, 0.7).unwrap();
    let scaled = unit.with_scale(3.0).unwrap();
    // S_1(3, b) = 3 S_1(1, b) + (2/pi) b' 3 ln 3 with b' = -b
    let shift = FRAC_2_PI * -0.7 * 3.0 * 3f64.ln();
    let a: Vec<f64> = common::draws(&unit, 100_000, 51)
        .iter()
        .map(|x| 3.0 * x + shift)
        .collect();
    let b = common::draws(&scaled, 100_000, 52);
    assert!(ks_two_sample(&a, &b) < two_sample_threshold(0.01, 100_000, 100_000));
}

#[test]
fn gaussian_increments() {
    let params = StableParams::symmetric(2.0, 1.0).unwrap();
    let n = 100;
    let incs = increments_of(&params, n, 1000, 61);
    let sd = (2.0 / n as f64).sqrt();
    let d = ks_one_sample(&incs, |x| 0.5 * erfc(-x / (sd * std::f64::consts::SQRT_2)));
    assert!(d < one_sample_threshold(0.01, incs.len()), "{d}");
}

#[test]
fn increments_are_stationary() {
    let params = StableParams::new(0.9, 1.0, 0.3).unwrap();
    let path = simulate_levy(&params, 200_000, 1.0, &RandomStream::new(71, 0)).unwrap();
    let incs = path.increments();
    let (a, b) = incs.split_at(incs.len() / 2);
    assert!(ks_two_sample(a, b) < two_sample_threshold(0.01, a.len(), b.len()));
}

#[test]
fn euler_refinement_is_consistent() {
    let params = StableParams::symmetric(1.2, 1.0).unwrap();
    let m = 1000;
    let terminal = |mult: usize, seed: u64| -> Vec<f64> {
        (0..m as u64)
            .into_par_iter()
            .map(|i| {
                let p = simulate_sde(
                    0.3,
                    &DriftSpec::Cosine,
                    &params,
                    50 * mult,
                    50,
                    2.0,
                    &RandomStream::new(seed, i),
                )
                .unwrap();
                *p.values().last().unwrap()
            })
            .collect()
    };
    let a = terminal(4, 81);
    let b = terminal(8, 82);
    assert!(ks_two_sample(&a, &b) < two_sample_threshold(0.01, m, m));
}

#[test]
fn pvariation_median_scales_with_horizon() {
    // V_p^n(L)_T behaves like a (alpha/p)-stable subordinator at time T, whose
    // quantiles grow like T^{p/alpha}
    let params = StableParams::symmetric(0.75, 1.0).unwrap();
    let p = 1.5;
    let medians: Vec<f64> = (1..=8)
        .map(|t| {
            let mut v: Vec<f64> = (0..400u64)
                .into_par_iter()
                .map(|i| {
                    let path =
                        simulate_levy(&params, 200, t as f64, &RandomStream::new(91, i)).unwrap();
                    pvariation(&path, p).unwrap().terminal()
                })
                .collect();
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        })
        .collect();
    let xs: Vec<f64> = (1..=8).map(|t| (t as f64).ln()).collect();
    let ys: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 8.0, ys.iter().sum::<f64>() / 8.0);
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!(medians.iter().all(|m| m.is_finite()));
    assert!((slope - 2.0).abs() < 0.25, "slope {slope}");
}

#[test]
fn skewness_does_not_change_variation() {
    let up = StableParams::new(1.3, 1.0, 1.0).unwrap();
    let down = StableParams::new(1.3, 1.0, -1.0).unwrap();
    let p = 1.8;
    let stat = |params: &StableParams, seed: u64| -> Vec<f64> {
        (0..1000u64)
            .into_par_iter()
            .map(|i| {
                pvariation(
                    &simulate_levy(params, 500, 1.0, &RandomStream::new(seed, i)).unwrap(),
                    p,
                )
                .unwrap()
                .terminal()
            })
            .collect()
    };
    let a = stat(&up, 101);
    let b = stat(&down, 102);
    assert!(ks_two_sample(&a, &b) < two_sample_threshold(0.01, 1000, 1000));
}

#[test]
fn limit_scale_is_continuous() {
    // across alpha = 1 with p != alpha, and across alpha = p = 1
    for &p in &[1.5, 1.8, 1.0] {
        let at = |a: f64| {
            limit_scale(&StableParams::symmetric(a, 2.0).unwrap(), p)
                .unwrap()
                .c_prime
        };
        let (l, r) = (at(1.0 - 1e-7), at(1.0 + 1e-7));
        assert!(((l - r) / l).abs() < 1e-6, "p={p}: {l} vs {r}");
        let mut prev = at(0.9);
        let mut a = 0.9 + 1e-3;
        while a < 1.1 {
            if (a - p).abs() > 1e-9 {
                let v = at(a);
                assert!(((v - prev) / prev).abs() < 5e-3, "jump at alpha={a}");
                prev = v;
            }
            a += 1e-3;
        }
    }
    // towards the Gaussian boundary
    let vals: Vec<f64> = (0..=49)
        .map(|k| {
            limit_scale(
                &StableParams::symmetric(1.95 + k as f64 * 1e-3, 1.0).unwrap(),
                1.2,
            )
            .unwrap()
            .c_prime
        })
        .collect();
    // C' decreases smoothly to 0 as alpha -> 2
    assert!(vals.iter().all(|v| v.is_finite() && *v > 0.0));
    assert!(
        vals.windows(2).all(|w| w[1] < w[0] && w[0] - w[1] < 0.05),
        "{vals:?}"
    );
}

#[test]
fn reference_cdf_is_a_distribution() {
    let c = 3.3;
    let mut prev = 0.0;
    for k in 0..100 {
        let x = c * 10f64.powf(-3.0 + 9.0 * k as f64 / 99.0);
        let f = ref_cdf_half_stable(c, x).unwrap();
        assert!((0.0..=1.0).contains(&f) && f >= prev);
        prev = f;
    }
    assert!((ref_cdf_half_stable(c, c).unwrap() - 0.317_310_507_862_914).abs() < 1e-14);
}

#[test]
fn half_stable_draws_follow_reference_cdf() {
    let scale = LimitScale {
        c_prime: 13.056_867_402_709_137,
        alpha_over_p: 0.5,
    };
    let xs = sample_limit_batch(&scale, &RandomStream::new(111, 0), 100_000).unwrap();
    assert!(ks_distance(&xs, scale.c_prime).unwrap() < one_sample_threshold(0.01, xs.len()));
    let m = 10_000;
    assert!(ks_distance(&xs[..m], scale.c_prime).unwrap() < 1.95 / (m as f64).sqrt());
}

#[test]
fn block_statistics_are_approximately_half_stable() {
    let params = StableParams::symmetric(0.75, 6.35).unwrap();
    let m = 1000;
    let incs = increments_of(&params, 200, m, 121);
    let blocked = block_split(&incs, 200).unwrap();
    let stats = block_statistics(&blocked, 1.5).unwrap();
    let cp = limit_scale(&params, 1.5).unwrap().c_prime;
    let d = ks_distance(&stats, cp).unwrap();
    assert!(d < one_sample_threshold(0.01, m), "{d}");
}

#[test]
fn distance_at_truth_shrinks_with_m() {
    let params = StableParams::symmetric(0.75, 6.35).unwrap();
    let median_d = |m: usize| {
        let mut ds: Vec<f64> = (0..9u64)
            .map(|seed| {
                let incs = increments_of(&params, 200, m, 130 + seed);
                distance_at(&block_split(&incs, 200).unwrap(), 6.35, 1.5).unwrap()
            })
            .collect();
        ds.sort_by(f64::total_cmp);
        ds[4]
    };
    let d: Vec<f64> = [100, 400, 1600].iter().map(|&m| median_d(m)).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn grid_minimum_in_c_recovers_scale() {
    let (p, c0) = (1.5, 3.0);
    let params = StableParams::symmetric(p / 2.0, c0).unwrap();
    let c_grid = GridSpec::new(0.5, 8.0, 0.25).values().unwrap();
    let mut hits = 0;
    for seed in 0..20 {
        let incs = increments_of(&params, 200, 400, 140 + seed);
        let surface =
            stablevar::estimator::ks_surface(&block_split(&incs, 200).unwrap(), &c_grid, &[p])
                .unwrap();
        hits += ((surface.argmin.c - c0).abs() <= 0.25 + 1e-9) as usize;
    }
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn gaussian_input_hits_the_p_boundary() {
    let params = StableParams::symmetric(2.0, 1.0).unwrap();
    let incs = increments_of(&params, 200, 200, 151);
    let r = estimate(
        &block_split(&incs, 200).unwrap(),
        &EstimatorConfig::default(),
    )
    .unwrap();
    assert!(r.boundary.p_high, "{:?} p*={}", r.boundary, r.p_star);
    assert!(r.alpha_star > 1.7);
}

#[test]
fn fixed_c_slice_can_have_two_minima() {
    // blocks from two regimes, alpha 1.0 and 1.76, sharing one scale
    let mut blocks = Vec::new();
    for (k, alpha) in [1.0, 1.76].into_iter().enumerate() {
        let params = StableParams::symmetric(alpha, 3.28).unwrap();
        let incs = increments_of(&params, 282, 141, 160 + k as u64);
        blocks.extend(block_split(&incs, 282).unwrap().blocks().to_vec());
    }
    let blocked = BlockedSeries::from_blocks(blocks).unwrap();
    let p_grid = GridSpec::new(1.2, 3.9, 0.05).values().unwrap();
    let slice = fixed_c_slice(&blocked, 4.0, &p_grid).unwrap();
    let minima = slice_local_minima(&slice);
    let spread = minima.last().unwrap().p - minima[0].p;
    assert!(minima.len() >= 2 && spread > 0.5, "{minima:?}");
}
