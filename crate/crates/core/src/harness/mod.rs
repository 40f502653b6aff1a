//! End-to-end drivers: conference scenarios, the consensus latency
//! benchmark and the labelled detection corpora behind the ROC and
//! localization figures.

mod bench;
mod corpus;
mod scenario;

use serde::{Deserialize, Serialize};

pub use bench::{bench_consensus, fit_log_log_slope, BenchResult};
pub use corpus::{localization_trial, roc_sweep, CorpusConfig, LocalizationResult, RocEntry, RocSweep, SegmentOutcome};
pub use scenario::{run_scenario, ParticipantOutcome, ScenarioConfig, ScenarioResult, ScenarioSummary};

use crate::error::{Error, Result};
use crate::media_synth::{embed_audio, embed_video, AudioSpec, Harmonic, MediaStream, Shutter, VideoSpec};
use crate::series::EnfSeries;

/// Capture device used for every recording in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MediaSpec {
    Audio {
        sample_rate_hz: f64,
    },
    Video {
        fps: f64,
        frame_height: usize,
        shutter: Shutter,
    },
}

impl Default for MediaSpec {
    fn default() -> Self {
        MediaSpec::Audio { sample_rate_hz: 1000.0 }
    }
}

impl MediaSpec {
    pub fn record(&self, truth: &EnfSeries, snr_db: f64, seed: u64) -> Result<MediaStream> {
        Ok(match *self {
            MediaSpec::Audio { sample_rate_hz } => {
                embed_audio(truth, &AudioSpec::new(sample_rate_hz, Harmonic::mains_hum(), snr_db, seed))?.into()
            }
            MediaSpec::Video {
                fps,
                frame_height,
                shutter,
            } => embed_video(truth, &VideoSpec::new(fps, frame_height, shutter, snr_db, seed))?.into(),
        })
    }
}

/// Values of `est` at `n` instants `t0, t0 + step, ...`, linearly
/// interpolated. Every instant must fall inside the estimate's span.
pub(crate) fn sample_on_grid(est: &EnfSeries, t0: f64, step: f64, n: usize) -> Result<Vec<f64>> {
    let last = t0 + (n.saturating_sub(1)) as f64 * step;
    let slack = 1e-6 * est.step_s;
    if t0 < est.start_time_s - slack || last > est.end_time_s() + slack {
        return Err(Error::invalid(format!(
            "grid [{t0}, {last}] s is not covered by the estimate span [{}, {}] s",
            est.start_time_s,
            est.end_time_s()
        )));
    }
    Ok((0..n).map(|i| est.value_at(t0 + i as f64 * step)).collect())
}
