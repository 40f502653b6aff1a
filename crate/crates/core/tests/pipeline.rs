use enfnet_core::detection::{sliding_window_detect, DetectorConfig, Verdict};
use enfnet_core::enf_estimation::{estimate_enf, EstimatorConfig};
use enfnet_core::harness::{roc_sweep, run_scenario, CorpusConfig, MediaSpec, ScenarioConfig};
use enfnet_core::media_synth::{forge_segments, gen_enf_truth, ForgeMode, GridConfig, Interval, Shutter};
use enfnet_core::stream_io::{read_stream, write_stream};

#[test]
fn longer_windows_separate_better_at_10_db() {
    let cfg = CorpusConfig {
        streams: 40,
        forged_streams: 20,
        ..CorpusConfig::default()
    };
    let sweep = roc_sweep(&[8.0, 16.0, 32.0], &cfg).unwrap();
    let auc: Vec<f64> = sweep.entries.iter().map(|e| e.window_roc.as_ref().unwrap().auc).collect();
    assert!(auc[2] >= auc[0], "{auc:?}");
    let best = sweep.entries.iter().map(|e| e.stream_roc.auc).fold(0.0, f64::max);
    assert!(best >= 0.95, "{best}");
}

#[test]
fn forged_video_is_localized_through_a_file_round_trip() {
    let grid = GridConfig::default();
    let truth = gen_enf_truth(&grid.with_seed(21), 240.0, 1.0).unwrap();
    let media = MediaSpec::Video {
        fps: 29.97,
        frame_height: 240,
        shutter: Shutter::RollingCmos,
    };
    let reference = media.record(&truth, 40.0, 1).unwrap();
    let local = media.record(&truth, 20.0, 2).unwrap();
    let seg = Interval::new(100.0, 140.0);
    let local = forge_segments(&local, &[seg], &ForgeMode::ReplaceEnf { grid: grid.with_seed(99) }).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("local.json");
    write_stream(&local, &path).unwrap();
    let local = read_stream(&path).unwrap();
    assert_eq!(local.forged_intervals(), &[seg]);

    let cfg = EstimatorConfig::video_default().short_frames();
    let report = sliding_window_detect(
        &estimate_enf(&local, &cfg).unwrap(),
        &estimate_enf(&reference, &cfg).unwrap(),
        &DetectorConfig::default(),
    )
    .unwrap();
    assert_eq!(report.overall_verdict, Verdict::Fake);
    assert_eq!(report.forged_intervals.len(), 1);
    let got = report.forged_intervals[0];
    assert!((got.start_s - seg.start_s).abs() <= 5.0 && (got.end_s - seg.end_s).abs() <= 5.0, "{got:?}");
}

#[test]
fn scenario_counts_cover_every_participant() {
    for (seed, fakes, byzantine) in [(1, vec![], 0), (2, vec![0, 5], 0), (3, vec![1, 2, 3], 3)] {
        let cfg = ScenarioConfig {
            deepfaked_participants: fakes,
            byzantine,
            rounds: 3,
            seed,
            ..ScenarioConfig::default()
        };
        let r = run_scenario(&cfg).unwrap();
        let s = &r.summary;
        assert_eq!(s.tp + s.fp + s.tn + s.fn_, cfg.participants);
        assert_eq!(r.participants.len(), cfg.participants);
    }
}

#[test]
fn scenario_json_is_reproducible() {
    let cfg = ScenarioConfig {
        deepfaked_participants: vec![4],
        rounds: 2,
        seed: 17,
        ..ScenarioConfig::default()
    };
    let a = serde_json::to_string(&run_scenario(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run_scenario(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let text = serde_json::to_string(&cfg).unwrap();
    let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
}
