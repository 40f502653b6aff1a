use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn enfnet(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enfnet"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_estimate_detect_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = tmp.path().join("gen");
    let o = enfnet(&["generate", "--duration", "150", "--forge", "60:90", "--seed", "3"], &gen);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["stream.json", "stream.f32", "truth.csv"] {
        assert!(gen.join(f).exists(), "{f}");
    }
    let header = json(&gen.join("stream.json"));
    assert_eq!(header["kind"], "audio");

    let est = tmp.path().join("est");
    let o = enfnet(
        &["estimate", "--input", gen.join("stream.json").to_str().unwrap(), "--window", "2"],
        &est,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let det = tmp.path().join("det");
    let o = enfnet(
        &[
            "detect",
            "--local",
            est.join("enf.csv").to_str().unwrap(),
            "--truth",
            gen.join("truth.csv").to_str().unwrap(),
        ],
        &det,
    );
    // the truth is on a 1 s grid starting at 0, the estimate on frame centres
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stdout));

    let o = enfnet(
        &[
            "detect",
            "--local",
            est.join("enf.csv").to_str().unwrap(),
            "--truth",
            est.join("enf.csv").to_str().unwrap(),
        ],
        &det,
    );
    assert_eq!(code(&o), 0);
    let report = json(&det.join("report.json"));
    assert_eq!(report["overall_verdict"], "Genuine");
    assert!(det.join("windows.csv").exists());
}

#[test]
fn forged_device_is_flagged_against_a_second_device() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let dir = tmp.path().join(name);
        let mut args = vec!["generate", "--duration", "150", "--seed", "9", "--snr", "30"];
        args.extend_from_slice(extra);
        assert_eq!(code(&enfnet(&args, &dir)), 0);
        let est = tmp.path().join(format!("{name}-enf"));
        let o = enfnet(
            &["estimate", "--input", dir.join("stream.json").to_str().unwrap(), "--window", "2"],
            &est,
        );
        assert_eq!(code(&o), 0);
        est.join("enf.csv")
    };
    let reference = run("ref", &["--device", "1"]);
    let local = run("local", &["--forge", "60:100"]);
    let det = tmp.path().join("det");
    let o = enfnet(
        &["detect", "--local", local.to_str().unwrap(), "--truth", reference.to_str().unwrap()],
        &det,
    );
    assert_eq!(code(&o), 0);
    let report = json(&det.join("report.json"));
    assert_eq!(report["overall_verdict"], "Fake");
    let intervals = report["forged_intervals"].as_array().unwrap();
    assert_eq!(intervals.len(), 1);
    assert!((intervals[0]["start_s"].as_f64().unwrap() - 60.0).abs() <= 5.0);
    assert!((intervals[0]["end_s"].as_f64().unwrap() - 100.0).abs() <= 5.0);
}

#[test]
fn csv_samples_estimate_like_the_stream() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = tmp.path().join("gen");
    assert_eq!(code(&enfnet(&["generate", "--duration", "60", "--csv"], &gen)), 0);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(code(&enfnet(&["estimate", "--input", gen.join("stream.json").to_str().unwrap()], &a)), 0);
    let o = enfnet(
        &["estimate", "--input", gen.join("samples.csv").to_str().unwrap(), "--rate", "1000"],
        &b,
    );
    assert_eq!(code(&o), 0);
    let (ea, eb) = (json(&a.join("enf.json")), json(&b.join("enf.json")));
    let (va, vb) = (ea["values_hz"].as_array().unwrap(), eb["values_hz"].as_array().unwrap());
    assert_eq!(va.len(), vb.len());
    for (x, y) in va.iter().zip(vb) {
        assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-4);
    }
}

#[test]
fn consensus_and_scenario_write_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let cs = tmp.path().join("cs");
    let o = enfnet(&["consensus-sim", "--rounds", "10", "--dim", "60"], &cs);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(cs.join("rounds.jsonl")).unwrap().lines().count(), 10);
    assert_eq!(json(&cs.join("summary.json"))["agreement_rate"], 1.0);

    let cfg = tmp.path().join("scenario.json");
    fs::write(&cfg, r#"{"participants": 10, "rounds": 2}"#).unwrap();
    let sc = tmp.path().join("sc");
    let o = enfnet(&["scenario", "--config", cfg.to_str().unwrap()], &sc);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["scenario.json", "summary.json", "reference.csv"] {
        assert!(sc.join(f).exists(), "{f}");
    }
}

#[test]
fn bench_and_roc_produce_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let b = tmp.path().join("bench");
    assert_eq!(code(&enfnet(&["bench", "--ks", "5,10", "--dim", "32", "--trials", "3"], &b)), 0);
    assert_eq!(fs::read_to_string(b.join("bench.csv")).unwrap().lines().count(), 3);

    let r = tmp.path().join("roc");
    let o = enfnet(
        &["roc", "--windows", "16", "--streams", "4", "--forged", "2", "--duration", "150"],
        &r,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(r.join("roc_stream_16.csv").exists());
    assert!(r.join("roc.json").exists());
}

#[test]
fn invalid_configuration_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let cases: &[&[&str]] = &[
        &["generate", "--forge", "90:60"],
        &["generate", "--duration", "-5"],
        &["consensus-sim", "--committee", "4"],
        &["consensus-sim", "--byzantine", "11"],
        &["bench", "--ks", "10"],
        &["roc", "--streams", "2", "--forged", "3"],
        &["detect", "--local", "a.csv", "--truth", "b.csv", "--threshold", "2"],
        &["frobnicate"],
        &["generate", "--snr", "loud"],
    ];
    for args in cases {
        let o = enfnet(args, &out);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&enfnet(&["scenario", "--config", bad.to_str().unwrap()], &out)), 2);
    fs::write(&bad, r#"{"participants": 10, "byzantine": 20}"#).unwrap();
    assert_eq!(code(&enfnet(&["scenario", "--config", bad.to_str().unwrap()], &out)), 2);
}

#[test]
fn pipeline_failures_exit_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let missing = tmp.path().join("missing.json");
    let o = enfnet(&["estimate", "--input", missing.to_str().unwrap()], &out);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));

    let gen = tmp.path().join("gen");
    assert_eq!(code(&enfnet(&["generate", "--duration", "30"], &gen)), 0);
    fs::remove_file(gen.join("stream.f32")).unwrap();
    let o = enfnet(&["estimate", "--input", gen.join("stream.json").to_str().unwrap()], &out);
    assert_eq!(code(&o), 3);
}
