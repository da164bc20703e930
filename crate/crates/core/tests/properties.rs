use proptest::prelude::*;

use stablevar::csv_io::{read_series, write_series};
use stablevar::estimator::{block_split, ks_distance, ks_surface};
use stablevar::ks::{ks_one_sample, EmpiricalCdf};
use stablevar::limit_law::half_stable_cdf;
use stablevar::path_sim::PathSample;
use stablevar::pvariation::{abs_pow, pvariation};

fn finite() -> impl Strategy<Value = f64> {
    -1e3..1e3f64
}

fn path() -> impl Strategy<Value = PathSample> {
    prop::collection::vec(finite(), 2..300).prop_map(|v| PathSample::unit(v).unwrap())
}

proptest! {
    #[test]
    fn raw_variation_is_monotone_from_zero(path in path(), p in 0.1..4.0f64) {
        let v = pvariation(&path, p).unwrap();
        prop_assert_eq!(v.raw[0], 0.0);
        prop_assert!(v.raw.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(v.raw.len(), path.values().len());
    }

    #[test]
    fn unit_power_is_total_variation(path in path()) {
        let v = pvariation(&path, 1.0).unwrap();
        let mut naive = 0.0;
        for w in path.values().windows(2) {
            naive += (w[1] - w[0]).abs();
        }
        prop_assert!((v.terminal() - naive).abs() <= 1e-9 * naive.max(1.0));
    }

    #[test]
    fn variation_is_additive(values in prop::collection::vec(finite(), 3..200), p in 0.3..3.0f64) {
        let n = (values.len() - 1) / 2 * 2;
        let values = values[..=n].to_vec();
        let full = pvariation(&PathSample::new(n, 1.0, values.clone()).unwrap(), p).unwrap();
        let first = pvariation(&PathSample::new(n, 0.5, values[..=n / 2].to_vec()).unwrap(), p).unwrap();
        let second = pvariation(&PathSample::new(n, 0.5, values[n / 2..].to_vec()).unwrap(), p).unwrap();
        prop_assert_eq!(&full.raw[..=n / 2], &first.raw[..]);
        let total = first.terminal() + second.terminal();
        prop_assert!((full.terminal() - total).abs() <= 1e-10 * total.max(1.0));
    }

    #[test]
    fn abs_pow_matches_powf(x in -1e6..1e6f64, p in 0.05..5.0f64) {
        let expected = x.abs().powf(p);
        prop_assert!((abs_pow(x, p) - expected).abs() <= 1e-13 * expected.max(1e-300));
    }

    #[test]
    fn ecdf_is_a_distribution(values in prop::collection::vec(finite(), 1..100), xs in prop::collection::vec(finite(), 1..20)) {
        let g = EmpiricalCdf::new(&values).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let evals: Vec<f64> = xs.iter().map(|&x| g.eval(x)).collect();
        prop_assert!(evals.iter().all(|e| (0.0..=1.0).contains(e)));
        prop_assert!(evals.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(g.eval(f64::INFINITY), 1.0);
    }

    #[test]
    fn ks_distance_is_bounded(values in prop::collection::vec(-10.0..1e4f64, 1..100), c in 0.01..100.0f64) {
        let d = ks_distance(&values, c).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        // order of the sample is irrelevant
        let mut rev = values.clone();
        rev.reverse();
        prop_assert_eq!(d, ks_one_sample(&rev, |x| half_stable_cdf(c, x)));
    }

    #[test]
    fn blocks_partition_the_series(values in prop::collection::vec(finite(), 2..400), n in 1usize..50) {
        prop_assume!(values.len() >= 2 * n);
        let b = block_split(&values, n).unwrap();
        prop_assert_eq!(b.m(), values.len() / n);
        prop_assert_eq!(b.blocks().concat(), values[..b.m() * n].to_vec());
    }

    #[test]
    fn surface_ignores_block_order(values in prop::collection::vec(finite(), 100..200), seed in any::<u64>()) {
        let b = block_split(&values, 5).unwrap();
        let mut order: Vec<usize> = (0..b.m()).collect();
        // deterministic shuffle driven by the seed
        let mut s = seed | 1;
        for i in (1..order.len()).rev() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            order.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let grid_c = [0.5, 2.0, 8.0];
        let grid_p = [0.8, 1.5, 2.4];
        let a = ks_surface(&b, &grid_c, &grid_p).unwrap();
        let c = ks_surface(&b.permuted(&order), &grid_c, &grid_p).unwrap();
        prop_assert_eq!(a.d_values, c.d_values);
    }

    #[test]
    fn series_files_round_trip(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..100)) {
        let mut buf = Vec::new();
        write_series(&mut buf, &serde_json::json!({"k": 1}), &values).unwrap();
        let back = read_series(&buf[..]).unwrap();
        prop_assert_eq!(back.values, values);
    }
}
