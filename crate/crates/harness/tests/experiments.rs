use hwarch::config::{CortexLearning, ExperimentConfig};
use hwarch::{equiv, mtl, oja_demo, ventral, HarnessError};
use hwarch_core::BackendKind;

fn small_ventral() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.reps = 2;
    cfg.ventral.n_train = 12;
    cfg.ventral.n_test = 6;
    cfg.ventral.dim = 32;
    cfg
}

fn small_mtl() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.reps = 2;
    cfg.mtl.dim_a = 12;
    cfg.mtl.dim_b = 12;
    cfg.mtl.cortex_faces = vec![6];
    cfg.mtl.cortex_names = 6;
    cfg.mtl.study_sizes = vec![1, 4];
    cfg.backend.s = 8;
    cfg
}

fn value(records: &[hwarch::ResultRecord], metric: &str) -> f64 {
    records.iter().find(|r| r.rep.is_none() && r.metric == metric).unwrap().value
}

#[test]
fn noiseless_full_orbits_are_matched_perfectly() {
    for backend in [BackendKind::Exact, BackendKind::Svd] {
        let mut cfg = small_ventral();
        cfg.ventral.backend = backend;
        cfg.ventral.noise = 0.0;
        // Full rank keeps the orbit invariance exact.
        cfg.backend.rank = cfg.ventral.dim;
        let records = ventral::run(&cfg).unwrap();
        assert_eq!(value(&records, "hw_accuracy"), 1.0, "{backend:?}");
    }
}

#[test]
fn oja_cortex_runs() {
    let mut cfg = small_ventral();
    cfg.reps = 1;
    cfg.ventral.learning = CortexLearning::Oja;
    cfg.ventral.oja_epochs = 3;
    let records = ventral::run(&cfg).unwrap();
    let acc = value(&records, "hw_accuracy");
    assert!((0.0..=1.0).contains(&acc));
    assert!(records.iter().all(|r| r.params.get("learning").map(String::as_str) == Some("oja")));
}

#[test]
fn any_row_reruns_from_its_seed() {
    let cfg = small_ventral();
    let records = ventral::run(&cfg).unwrap();
    let row = records.iter().find(|r| r.rep == Some(1) && r.metric == "hw_minus_baseline").unwrap();
    let again = ventral::run_rep(&cfg, 1, row.seed).unwrap();
    let twin = again.iter().find(|r| r.metric == row.metric).unwrap();
    assert_eq!(twin.value.to_bits(), row.value.to_bits());

    let cfg = small_mtl();
    let records = mtl::run(&cfg).unwrap();
    let row = records.iter().find(|r| r.rep == Some(1) && r.metric == mtl::TREND_METRIC).unwrap();
    let again = mtl::run_rep(&cfg, 1, row.seed).unwrap();
    assert!(again.iter().any(|r| r.metric == row.metric && r.params == row.params && r.value == row.value));
}

#[test]
fn rep_seeds_are_distinct() {
    let cfg = ExperimentConfig::default();
    let seeds: std::collections::BTreeSet<u64> = (0..cfg.reps).map(|rep| ventral::rep_seed(&cfg, rep)).collect();
    assert_eq!(seeds.len(), cfg.reps);
}

#[test]
fn single_studied_item_is_always_recalled() {
    for backend in [BackendKind::Exact, BackendKind::Svd, BackendKind::Rp, BackendKind::Wta] {
        let mut cfg = small_mtl();
        cfg.mtl.backend = backend;
        cfg.mtl.study_sizes = vec![1];
        let records = mtl::run(&cfg).unwrap();
        for metric in mtl::METRICS {
            let v: Vec<f64> = records.iter().filter(|r| r.rep.is_some() && r.metric == metric).map(|r| r.value).collect();
            assert!(!v.is_empty());
            assert!(v.iter().all(|&x| x == 1.0), "{backend:?} {metric}: {v:?}");
        }
    }
}

#[test]
fn summaries_carry_quartiles() {
    let records = mtl::run(&small_mtl()).unwrap();
    for r in records.iter().filter(|r| r.rep.is_none() && mtl::METRICS.contains(&r.metric.as_str())) {
        let (lo, hi) = (r.p25.unwrap(), r.p75.unwrap());
        assert!(lo <= r.value && r.value <= hi);
    }
    assert!(records.iter().any(|r| r.metric == "recall_heldout_kendall_tau"));
}

#[test]
fn invalid_configs_are_config_errors() {
    let mut cfg = small_ventral();
    cfg.ventral.n_test = 0;
    let err = ventral::run(&cfg).unwrap_err();
    assert!(matches!(err, HarnessError::Config(_)));
    assert_eq!(err.exit_code(), 1);

    let mut cfg = small_mtl();
    cfg.mtl.study_sizes = vec![];
    assert!(matches!(mtl::run(&cfg), Err(HarnessError::Config(_))));

    let mut cfg = ExperimentConfig::default();
    cfg.reps = 0;
    assert!(matches!(oja_demo::run(&cfg), Err(HarnessError::Config(_))));
}

#[test]
fn equivalence_rows_within_tolerance() {
    let records = equiv::run(&ExperimentConfig::default(), None).unwrap();
    let mut seen = [0usize; 4];
    for r in records.iter().filter(|r| r.metric == "max_abs_deviation") {
        let dim: usize = r.params["dim"].parse().unwrap();
        match r.params["backend"].as_str() {
            "exact" => {
                seen[0] += 1;
                assert!(r.value <= 1e-12);
            }
            "svd" if r.params["full_rank"] == "true" => {
                seen[1] += 1;
                assert!(r.value <= 1e-9);
            }
            "rp" if r.params["s"] == dim.to_string() => {
                seen[2] += 1;
                assert!(r.value <= 1e-10);
            }
            _ => {}
        }
    }
    for r in records.iter().filter(|r| r.metric == "one_sided_violations") {
        seen[3] += 1;
        assert_eq!(r.value, 0.0, "{:?}", r.params);
    }
    assert!(seen.iter().all(|&n| n > 0), "{seen:?}");
}

#[test]
fn oja_demo_recovers_the_subspace() {
    let mut cfg = ExperimentConfig::default();
    cfg.reps = 2;
    let records = oja_demo::run(&cfg).unwrap();
    assert!(value(&records, "oja_max_angle_vs_batch") <= 0.1);
    assert!(value(&records, "oja_top_abs_cosine_vs_batch") >= 0.99);
}
