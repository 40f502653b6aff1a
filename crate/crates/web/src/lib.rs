//! Browser bindings for the ENF pipeline. Every export returns a JSON
//! document; failures come back as `{"error": "..."}` so the page never has
//! to catch exceptions.

use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

use enfnet_core::consensus::{run_round_with_proofs, Behavior, CommitteeConfig};
use enfnet_core::detection::{sliding_window_detect, DetectorConfig};
use enfnet_core::enf_estimation::{estimate_enf, EstimatorConfig};
use enfnet_core::harness::MediaSpec;
use enfnet_core::media_synth::{forge_segments, gen_enf_truth, ForgeMode, GridConfig, Interval, Shutter};
use enfnet_core::seed::{derive_seed, rng_for};
use enfnet_core::{EnfSeries, Result};

#[derive(Serialize)]
struct Trace {
    t: Vec<f64>,
    hz: Vec<f64>,
}

impl From<&EnfSeries> for Trace {
    fn from(s: &EnfSeries) -> Self {
        Trace {
            t: (0..s.len()).map(|i| s.time_at(i)).collect(),
            hz: s.values_hz.clone(),
        }
    }
}

fn respond(r: Result<serde_json::Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn media(kind: &str) -> MediaSpec {
    match kind {
        "video" => MediaSpec::Video {
            fps: 29.97,
            frame_height: 240,
            shutter: Shutter::RollingCmos,
        },
        _ => MediaSpec::default(),
    }
}

fn estimator(kind: &str) -> EstimatorConfig {
    match kind {
        "video" => EstimatorConfig::video_default().short_frames(),
        _ => EstimatorConfig::audio_default().short_frames(),
    }
}

fn estimate_inner(seed: u64, kind: &str, duration_s: f64, snr_db: f64) -> Result<serde_json::Value> {
    let truth = gen_enf_truth(&GridConfig::default().with_seed(derive_seed(seed, &[1])), duration_s, 1.0)?;
    let stream = media(kind).record(&truth, snr_db, derive_seed(seed, &[2]))?;
    let est = estimate_enf(&stream, &estimator(kind))?;
    let err: Vec<f64> = (0..est.len()).map(|i| est.values_hz[i] - truth.value_at(est.time_at(i))).collect();
    let rmse = (err.iter().map(|e| e * e).sum::<f64>() / err.len() as f64).sqrt();
    Ok(json!({
        "truth": Trace::from(&truth),
        "estimate": Trace::from(&est),
        "rmse_hz": rmse,
    }))
}

fn detect_inner(seed: u64, kind: &str, duration_s: f64, snr_db: f64, forge_start_s: f64, forge_end_s: f64) -> Result<serde_json::Value> {
    let grid = GridConfig::default();
    let truth = gen_enf_truth(&grid.with_seed(derive_seed(seed, &[1])), duration_s, 1.0)?;
    let spec = media(kind);
    let reference = spec.record(&truth, 40.0, derive_seed(seed, &[3]))?;
    let mut local = spec.record(&truth, snr_db, derive_seed(seed, &[2]))?;
    if forge_end_s > forge_start_s {
        let mode = ForgeMode::ReplaceEnf {
            grid: grid.with_seed(derive_seed(seed, &[4])),
        };
        local = forge_segments(&local, &[Interval::new(forge_start_s, forge_end_s)], &mode)?;
    }
    let cfg = estimator(kind);
    let (local, reference) = (estimate_enf(&local, &cfg)?, estimate_enf(&reference, &cfg)?);
    let report = sliding_window_detect(&local, &reference, &DetectorConfig::default())?;
    Ok(json!({
        "local": Trace::from(&local),
        "reference": Trace::from(&reference),
        "windows": report.windows,
        "forged_intervals": report.forged_intervals,
        "verdict": report.overall_verdict,
        "min_corr": report.min_corr(),
    }))
}

fn consensus_inner(seed: u64, k: usize, byzantine: usize, behavior: &str, d: usize) -> Result<serde_json::Value> {
    let cfg = CommitteeConfig {
        k,
        f: (k.max(3) - 3) / 2,
        d,
        round_duration_s: d as f64,
        ..CommitteeConfig::default()
    };
    cfg.validate()?;
    let bad: Behavior = behavior.parse()?;
    bad.validate()?;
    let bad = bad.resized(d);
    let truth = gen_enf_truth(&GridConfig::default().with_seed(derive_seed(seed, &[11])), (d - 1) as f64, 1.0)?;
    let behaviors: Vec<Behavior> = (0..k)
        .map(|i| if i < byzantine.min(k) { bad.clone() } else { Behavior::Honest(0.001) })
        .collect();
    let proofs: Vec<Option<Vec<f64>>> = behaviors
        .iter()
        .enumerate()
        .map(|(i, b)| b.proof(&truth.values_hz, cfg.nominal_hz, &mut rng_for(seed, &[12, i as u64])))
        .collect();
    let honest: Vec<bool> = behaviors.iter().map(Behavior::is_honest).collect();
    let r = run_round_with_proofs(&cfg, 0, &proofs, &honest, 0.0, 1.0, seed)?;
    Ok(json!({
        "truth": Trace::from(&truth),
        "proofs": proofs,
        "honest": honest,
        "scores": r.scores.scores,
        "quorum": cfg.quorum(),
        "f": cfg.f,
        "winner": r.ground_truth_id,
        "winner_honest": r.winner_honest,
        "agreement": r.honest_agreement,
    }))
}

/// Synthesizes a recording and estimates its ENF: returns the truth, the
/// estimate and their RMSE. `kind` is `audio` or `video`.
#[wasm_bindgen]
pub fn estimate_demo(seed: u64, kind: &str, duration_s: f64, snr_db: f64) -> String {
    respond(estimate_inner(seed, kind, duration_s, snr_db))
}

/// Records the same grid twice, replaces `[forge_start_s, forge_end_s]` of
/// the local copy with a foreign grid and runs the sliding-window detector.
/// An empty interval leaves the recording genuine.
#[wasm_bindgen]
pub fn detect_demo(seed: u64, kind: &str, duration_s: f64, snr_db: f64, forge_start_s: f64, forge_end_s: f64) -> String {
    respond(detect_inner(seed, kind, duration_s, snr_db, forge_start_s, forge_end_s))
}

/// One committee round with the lowest `byzantine` ids following `behavior`
/// (`random`, `offset:<hz>`, `clone:<hz>`, `silent`).
#[wasm_bindgen]
pub fn consensus_demo(seed: u64, k: usize, byzantine: usize, behavior: &str, d: usize) -> String {
    respond(consensus_inner(seed, k, byzantine, behavior, d))
}
