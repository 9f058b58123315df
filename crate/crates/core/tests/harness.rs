use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shc_core::ce::CeParams;
use shc_core::colouring::Colouring;
use shc_core::harness::{
    acd, aggregate, read_ledger, run_suite, Algo, ExperimentRecord, GroupBy, GroupKey, RunOptions,
    SolverConfig, SuiteSpec,
};
use shc_core::Regime;

/// All permutations of `0..k` (Heap's algorithm).
fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn heap(m: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if m <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..m {
            heap(m - 1, a, out);
            let j = if m.is_multiple_of(2) { i } else { 0 };
            a.swap(j, m - 1);
        }
    }
    let mut out = Vec::new();
    heap(k, &mut (0..k).collect(), &mut out);
    out
}

fn small_suite(per_n: usize) -> SuiteSpec {
    SuiteSpec {
        n_min: 60,
        n_max: 100,
        n_step: 20,
        instances_per_n: per_n,
        master_seed: 8,
        ..SuiteSpec::default()
    }
}

fn options(resume: bool) -> RunOptions {
    RunOptions {
        config: SolverConfig {
            ce: CeParams {
                max_generations: Some(4),
                ..CeParams::default()
            },
            ..SolverConfig::default()
        },
        resume,
        jobs: 1,
    }
}

fn strip_time(mut rs: Vec<ExperimentRecord>) -> Vec<ExperimentRecord> {
    for r in &mut rs {
        r.wall_time = 0.0;
    }
    rs.sort_by(|a, b| (&a.instance, &a.algo).cmp(&(&b.instance, &b.algo)));
    rs
}

#[test]
fn one_instance_two_algorithms_two_records() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("ledger.jsonl");
    let inst = small_suite(1).instances().unwrap().remove(0);
    let recs = run_suite(&[inst], &[Algo::Ce, Algo::Cels], &ledger, &options(false)).unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(read_ledger(&ledger).unwrap().len(), 2);
    assert_eq!(fs::read_to_string(&ledger).unwrap().lines().count(), 2);
}

#[test]
fn resumed_run_matches_one_shot() {
    let dir = tempfile::tempdir().unwrap();
    let instances = small_suite(2).instances().unwrap();
    let algos = Algo::ALL;

    let once = dir.path().join("once.jsonl");
    let full = strip_time(run_suite(&instances, &algos, &once, &options(false)).unwrap());
    assert_eq!(full.len(), instances.len() * algos.len());

    let split = dir.path().join("split.jsonl");
    run_suite(&instances[..2], &algos[..2], &split, &options(false)).unwrap();
    run_suite(&instances[..3], &algos, &split, &options(true)).unwrap();
    let resumed = strip_time(run_suite(&instances, &algos, &split, &options(true)).unwrap());
    assert_eq!(resumed, full);

    // resuming a finished ledger is a no-op
    let before = fs::read_to_string(&split).unwrap();
    run_suite(&instances, &algos, &split, &options(true)).unwrap();
    assert_eq!(fs::read_to_string(&split).unwrap(), before);
}

#[test]
fn acd_matches_brute_force_over_bijections() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let k = rng.random_range(1..=6);
        let n = rng.random_range(1..40);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(1..=k)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(1..=k)).collect();
        let ca = Colouring::from_labels(k, &a).unwrap();
        let cb = Colouring::from_labels(k, &b).unwrap();
        let best = permutations(k)
            .iter()
            .map(|pi| (0..n).filter(|&v| pi[a[v] - 1] == b[v] - 1).count())
            .max()
            .unwrap();
        let got = acd(&ca, &cb, k);
        assert!((got - best as f64 / n as f64).abs() < 1e-12);
        assert!(got >= 1.0 / k as f64 - 1e-12);
    }
}

fn record(instance: &str, algo: &str, regime: Regime, alpha: f64, acd: f64) -> ExperimentRecord {
    let n = 10;
    ExperimentRecord {
        instance: instance.into(),
        n,
        k: 2,
        p: 0.5,
        q: 0.1,
        rho: 0.5,
        seed: 0,
        mu: 0.1,
        xi_tilde: 0.8,
        regime,
        algo: algo.into(),
        alpha,
        happy: (alpha * n as f64).round() as usize,
        acd,
        wall_time: 0.0,
        generations: 1,
        converged: alpha == 1.0,
    }
}

#[test]
fn regime_summary_includes_marker_rows() {
    let records = vec![
        record("a", "ce", Regime::Mild, 1.0, 0.9),
        record("b", "ce", Regime::Mild, 0.5, 0.7),
        record("a", "cels", Regime::Mild, 1.0, 1.0),
        record("b", "cels", Regime::Tight, 0.8, 0.6),
    ];
    let rows = aggregate(&records, GroupBy::Regime).unwrap();
    assert_eq!(rows.len(), 6);
    let find = |algo: &str, r: Regime| {
        rows.iter()
            .find(|s| s.algo == algo && s.key == GroupKey::Regime(r))
            .unwrap()
    };
    let ce_mild = find("ce", Regime::Mild);
    assert_eq!(ce_mild.count, 2);
    assert!((ce_mild.mean_alpha.unwrap() - 0.75).abs() < 1e-12);
    assert!((ce_mild.mean_acd.unwrap() - 0.8).abs() < 1e-12);
    assert!((ce_mild.mean_acd_complete.unwrap() - 0.9).abs() < 1e-12);
    assert_eq!(ce_mild.histogram[99], 1);
    assert_eq!(ce_mild.histogram[50], 1);

    let marker = find("ce", Regime::Tight);
    assert!(marker.is_marker());
    assert_eq!(marker.mean_alpha, None);
    assert_eq!(find("cels", Regime::Tight).mean_acd_complete, None);
}
