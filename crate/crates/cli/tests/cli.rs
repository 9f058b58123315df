use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn shc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn shc")
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn gen_suite(dir: &Path) {
    ok(shc(
        &[
            "gen",
            "--out-dir",
            "suite",
            "--n-min",
            "40",
            "--n-max",
            "60",
            "--n-step",
            "10",
            "--per-n",
            "2",
            "--seed",
            "3",
        ],
        dir,
    ));
}

#[test]
fn gen_writes_instances_sidecars_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    gen_suite(tmp.path());
    let suite = tmp.path().join("suite");
    let manifest = fs::read_to_string(suite.join("manifest.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = manifest
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    for line in &lines {
        let file = line["file"].as_str().unwrap();
        let text = fs::read_to_string(suite.join(file)).unwrap();
        assert!(text.lines().any(|l| l.starts_with("p edge ")));
        assert!(suite.join(line["gt"].as_str().unwrap()).exists());
        assert!(line["rho"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn single_instance_gen_and_solve() {
    let tmp = tempfile::tempdir().unwrap();
    ok(shc(
        &[
            "gen",
            "--out-dir",
            ".",
            "--n",
            "60",
            "--k",
            "3",
            "--p",
            "0.4",
            "--q",
            "0.05",
            "--rho",
            "0.3",
            "--stem",
            "g",
        ],
        tmp.path(),
    ));
    for algo in ["ce", "cels", "lmc", "ls", "rls"] {
        let out = ok(shc(
            &[
                "solve",
                "g.col",
                "--algo",
                algo,
                "--max-gens",
                "5",
                "--seed",
                "1",
            ],
            tmp.path(),
        ));
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["algo"], algo);
        assert_eq!(v["n"], 60);
        assert_eq!(v["rho"], 0.3);
        assert_eq!(v["colouring"].as_array().unwrap().len(), 60);
        // the .gt sidecar is picked up automatically
        assert!(v["acd"].as_f64().unwrap() >= 1.0 / 3.0 - 1e-12);
        assert!(v.get("wall_time").is_none());
    }
    let timed = ok(shc(
        &["solve", "g.col", "--algo", "lmc", "--with-timing"],
        tmp.path(),
    ));
    assert!(timed.contains("\"wall_time\""));
}

#[test]
fn oracle_on_hand_written_instance() {
    let tmp = tempfile::tempdir().unwrap();
    // path 1-2-3 with both ends precoloured 1
    fs::write(
        tmp.path().join("p3.col"),
        "p edge 3 2\ne 1 2\ne 2 3\nv 1 1\nv 3 1\n",
    )
    .unwrap();
    let out = ok(shc(&["oracle", "p3.col", "--rho", "1"], tmp.path()));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["happy"], 3);
    assert_eq!(v["colouring"], serde_json::json!([1, 1, 1]));
}

#[test]
fn solve_reports_bad_input() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.col"), "p edge 3 1\ne 1 4\n").unwrap();
    let out = shc(&["solve", "bad.col", "--rho", "0.5"], tmp.path());
    assert!(!out.status.success());
    fs::write(tmp.path().join("norho.col"), "p edge 2 1\ne 1 2\nv 1 1\n").unwrap();
    let out = shc(&["solve", "norho.col"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho"));
}

#[test]
fn bench_resume_and_stats() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen_suite(d);
    let bench = |algos: &str, resume: bool| {
        let mut args = vec![
            "bench",
            "--suite",
            "suite",
            "--algos",
            algos,
            "--max-gens",
            "3",
            "--out",
            "ledger.jsonl",
        ];
        if resume {
            args.push("--resume");
        }
        ok(shc(&args, d));
    };
    bench("ce", false);
    bench("ce,cels,lmc", true);
    bench("ce,cels,lmc", true);
    let ledger = fs::read_to_string(d.join("ledger.jsonl")).unwrap();
    assert_eq!(ledger.lines().count(), 12);

    ok(shc(
        &[
            "stats",
            "--ledger",
            "ledger.jsonl",
            "--group-by",
            "regime",
            "--hist",
            "--csv",
            "summary.csv",
            "--welch",
            "welch.csv",
        ],
        d,
    ));
    let summary = fs::read_to_string(d.join("summary.csv")).unwrap();
    let header: Vec<&str> = summary.lines().next().unwrap().split(',').collect();
    assert_eq!(
        &header[..6],
        [
            "algo",
            "regime",
            "count",
            "mean_alpha",
            "mean_acd",
            "mean_acd_complete"
        ]
    );
    assert_eq!(header.len(), 6 + 100);
    assert_eq!(header[6], "hist_0");
    assert_eq!(header[105], "hist_99");
    // 3 algorithms × 3 regimes, marker rows included
    assert_eq!(summary.lines().count(), 1 + 9);

    let welch = fs::read_to_string(d.join("welch.csv")).unwrap();
    assert_eq!(welch.lines().count(), 1 + 3);

    let by_algo = ok(shc(&["stats", "--ledger", "ledger.jsonl"], d));
    assert!(by_algo.starts_with("algo,count,mean_alpha,mean_acd,mean_acd_complete\n"));
    assert_eq!(by_algo.lines().count(), 4);
}
