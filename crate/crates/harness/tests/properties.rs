use hwarch::config::ExperimentConfig;
use hwarch::records::{read_csv, summarize, write_csv, ResultRecord};
use hwarch::stats::{kendall, percentile};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    -1e6..1e6f64
}

proptest! {
    #[test]
    fn percentile_is_a_sample_member_and_monotone(
        values in prop::collection::vec(finite(), 1..40),
        p in 1.0..=100.0f64,
        q in 1.0..=100.0f64,
    ) {
        let a = percentile(&values, p).unwrap();
        prop_assert!(values.contains(&a));
        let below = values.iter().filter(|&&v| v <= a).count() as f64;
        prop_assert!(below / values.len() as f64 * 100.0 >= p - 1e-9);
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(percentile(&values, lo).unwrap() <= percentile(&values, hi).unwrap());
    }

    #[test]
    fn kendall_flips_with_the_sign_of_y(
        pairs in prop::collection::vec((0u8..6, finite()), 3..30),
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        if let (Some(a), Some(b)) = (kendall(&x, &y), kendall(&x, &neg)) {
            prop_assert!((a.tau_b + b.tau_b).abs() < 1e-12);
            prop_assert!((a.p_decreasing - b.p_increasing).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a.tau_b));
        }
    }

    #[test]
    fn kendall_is_symmetric_in_its_arguments(
        pairs in prop::collection::vec((finite(), finite()), 3..30),
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        match (kendall(&x, &y), kendall(&y, &x)) {
            (Some(a), Some(b)) => prop_assert!((a.tau_b - b.tau_b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a.is_none(), b.is_none()),
        }
    }

    #[test]
    fn csv_round_trips(
        rows in prop::collection::vec(
            (finite(), prop::option::of(0usize..50), any::<u64>(), "[a-z ,\"]{1,8}", prop::option::of(finite())),
            1..20,
        ),
    ) {
        let records: Vec<ResultRecord> = rows
            .iter()
            .map(|(value, rep, seed, label, q)| {
                let mut r = ResultRecord::new("exp", "metric", *value, *rep, *seed).param("label", label);
                r.p25 = *q;
                r.p75 = q.map(|v| v + 1.0);
                r
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_csv(&path, &records).unwrap();
        prop_assert_eq!(read_csv(&path).unwrap(), records);
    }

    #[test]
    fn summary_median_lies_between_quartiles(values in prop::collection::vec(finite(), 1..30)) {
        let records: Vec<ResultRecord> = values
            .iter()
            .enumerate()
            .map(|(i, v)| ResultRecord::new("exp", "m", *v, Some(i), i as u64))
            .collect();
        let s = summarize(&records, 7);
        prop_assert_eq!(s.len(), 1);
        prop_assert!(s[0].p25.unwrap() <= s[0].value && s[0].value <= s[0].p75.unwrap());
        prop_assert_eq!(s[0].seed, 7);
    }

    #[test]
    fn config_toml_round_trips(seed in any::<u64>(), reps in 1usize..100, noise in 0.0..2.0f64, rank in 1usize..64) {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = seed;
        cfg.reps = reps;
        cfg.ventral.noise = noise;
        cfg.mtl.cortex_rank = Some(rank);
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
