//! ENF recovery from audio or video.
//!
//! Three steps: a power spectrum matrix from the short-time transform, a
//! weight per harmonic from its in-band SNR, and a weighted combination of
//! the harmonic slices folded to base band whose peak is tracked over time.

mod resample;
mod spectrogram;
mod tracking;

use serde::{Deserialize, Serialize};

pub use resample::resample_to;
pub use spectrogram::{hann, spectrogram, PowerSpectrumMatrix};
pub use tracking::{band_snr, combine_and_track, harmonic_weights, HarmonicWeights};

use crate::error::{Error, Result};
use crate::media_synth::{AudioStream, MediaStream, Shutter, VideoLumaStream};
use crate::series::EnfSeries;

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    pub rate_hz: f64,
    pub start_time_s: f64,
    pub samples: Vec<f64>,
}

impl SampleSeries {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate_hz
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub nominal_hz: f64,
    pub harmonics: Vec<u32>,
    /// Base-band half-width; the band around harmonic `k` is `k` times wider.
    pub band_halfwidth_hz: f64,
    pub stft_window_s: f64,
    pub stft_overlap_frac: f64,
    /// FFT length; `None` picks four times the next power of two above the
    /// window length.
    pub fft_size: Option<usize>,
    pub audio_target_rate_hz: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self::audio_default()
    }
}

impl EstimatorConfig {
    pub fn audio_default() -> Self {
        Self {
            nominal_hz: 60.0,
            harmonics: vec![1, 2, 3],
            band_halfwidth_hz: 0.5,
            stft_window_s: 8.0,
            stft_overlap_frac: 0.5,
            fft_size: None,
            audio_target_rate_hz: 1000.0,
        }
    }

    pub fn video_default() -> Self {
        Self {
            harmonics: vec![2],
            ..Self::audio_default()
        }
    }

    /// 2 s frames at a 1 s hop. Resolves second-scale fluctuations, which
    /// sliding-window detection needs to localise edits.
    pub fn short_frames(self) -> Self {
        Self {
            stft_window_s: 2.0,
            stft_overlap_frac: 0.5,
            ..self
        }
    }

    pub fn halfwidth_for(&self, order: u32) -> f64 {
        self.band_halfwidth_hz * order as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nominal_hz > 0.0 && self.nominal_hz.is_finite()) {
            return Err(Error::invalid("estimator nominal_hz must be positive"));
        }
        if self.harmonics.is_empty() || self.harmonics.contains(&0) {
            return Err(Error::invalid("estimator harmonics must be non-empty and positive"));
        }
        if !(self.band_halfwidth_hz > 0.0 && self.band_halfwidth_hz.is_finite()) {
            return Err(Error::invalid("band_halfwidth_hz must be positive"));
        }
        if !(self.stft_window_s > 0.0 && self.stft_window_s.is_finite()) {
            return Err(Error::invalid("stft_window_s must be positive"));
        }
        if !(0.0..1.0).contains(&self.stft_overlap_frac) {
            return Err(Error::invalid(format!(
                "stft_overlap_frac must lie in [0, 1), got {}",
                self.stft_overlap_frac
            )));
        }
        if !(self.audio_target_rate_hz > 0.0 && self.audio_target_rate_hz.is_finite()) {
            return Err(Error::invalid("audio_target_rate_hz must be positive"));
        }
        Ok(())
    }

    pub(crate) fn fft_size_for(&self, window: usize) -> Result<usize> {
        match self.fft_size {
            None => Ok(window.next_power_of_two() * 4),
            Some(n) if n >= window && n.is_power_of_two() => Ok(n),
            Some(n) => Err(Error::invalid(format!(
                "fft_size {n} must be a power of two no smaller than the {window}-sample window"
            ))),
        }
    }

    /// Hop between ENF estimates, in seconds, at the given analysis rate.
    pub fn hop_s(&self, rate_hz: f64) -> Result<f64> {
        let (_, hop, _) = spectrogram::frame_geometry(self, rate_hz)?;
        Ok(hop as f64 / rate_hz)
    }
}

fn audio_series(a: &AudioStream) -> SampleSeries {
    SampleSeries {
        rate_hz: a.sample_rate_hz,
        start_time_s: a.truth.start_time_s,
        samples: a.samples.iter().map(|&s| s as f64).collect(),
    }
}

/// Anti-alias filter and resample to `cfg.audio_target_rate_hz`. Streams
/// already at the target rate pass through unchanged.
pub fn preprocess_audio(a: &AudioStream, cfg: &EstimatorConfig) -> Result<SampleSeries> {
    cfg.validate()?;
    resample_to(&audio_series(a), cfg.audio_target_rate_hz)
}

/// Illumination samples from row means.
///
/// Rolling shutter: each row's mean over time (the static scene) is removed
/// and the rows are concatenated in exposure order at `fps · frame_height`
/// samples per second. Global shutter: one mean per frame at `fps`.
pub fn video_row_signal(v: &VideoLumaStream) -> SampleSeries {
    let start = v.truth.start_time_s;
    match v.shutter {
        Shutter::RollingCmos => {
            let h = v.frame_height;
            let n = v.frames.len().max(1) as f64;
            let mut row_mean = vec![0.0f64; h];
            for f in &v.frames {
                for (m, &x) in row_mean.iter_mut().zip(f) {
                    *m += x as f64;
                }
            }
            row_mean.iter_mut().for_each(|m| *m /= n);
            let samples = v
                .frames
                .iter()
                .flat_map(|f| f.iter().zip(&row_mean).map(|(&x, &m)| x as f64 - m))
                .collect();
            SampleSeries {
                rate_hz: v.fps * h as f64,
                start_time_s: start,
                samples,
            }
        }
        Shutter::GlobalCcd => SampleSeries {
            rate_hz: v.fps,
            start_time_s: start,
            samples: v
                .frames
                .iter()
                .map(|f| f.iter().map(|&x| x as f64).sum::<f64>() / f.len().max(1) as f64)
                .collect(),
        },
    }
}

/// Runs the three estimation steps on an already prepared sample series.
pub fn estimate_from_series(series: &SampleSeries, cfg: &EstimatorConfig) -> Result<EnfSeries> {
    let psm = spectrogram(series, cfg)?;
    let weights = harmonic_weights(&psm, cfg)?;
    combine_and_track(&psm, &weights, cfg)
}

/// Estimates from raw samples, first bringing anything faster than the
/// audio target rate down to it; slower signals are analysed as they are.
pub fn estimate_samples(series: &SampleSeries, cfg: &EstimatorConfig) -> Result<EnfSeries> {
    cfg.validate()?;
    if series.rate_hz > cfg.audio_target_rate_hz {
        estimate_from_series(&resample_to(series, cfg.audio_target_rate_hz)?, cfg)
    } else {
        estimate_from_series(series, cfg)
    }
}

/// Full pipeline for a synthesized stream.
pub fn estimate_enf(stream: &MediaStream, cfg: &EstimatorConfig) -> Result<EnfSeries> {
    match stream {
        MediaStream::Audio(a) => {
            cfg.validate()?;
            estimate_from_series(&preprocess_audio(a, cfg)?, cfg)
        }
        MediaStream::Video(v) => estimate_samples(&video_row_signal(v), cfg),
    }
}
