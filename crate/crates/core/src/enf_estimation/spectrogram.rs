use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{EstimatorConfig, SampleSeries};

/// Short-time power spectrum, one row per analysis window.
///
/// Rows hold the one-sided power `|X_k|² / N` with interior bins doubled, so
/// each row sums to the energy of its windowed segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrumMatrix {
    /// Window centres in seconds.
    pub time_bins: Vec<f64>,
    pub freq_bins: Vec<f64>,
    pub power: Vec<Vec<f64>>,
    /// Seconds between consecutive windows.
    pub hop_s: f64,
}

impl PowerSpectrumMatrix {
    pub fn bin_width_hz(&self) -> f64 {
        self.freq_bins[1] - self.freq_bins[0]
    }

    pub fn nyquist_hz(&self) -> f64 {
        *self.freq_bins.last().expect("non-empty frequency axis")
    }
}

/// Symmetric Hann window.
pub fn hann(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
        .collect()
}

/// Window and hop lengths in samples for `rate_hz`.
pub(crate) fn frame_geometry(cfg: &EstimatorConfig, rate_hz: f64) -> Result<(usize, usize, usize)> {
    let window = (cfg.stft_window_s * rate_hz).round() as usize;
    if window < 4 {
        return Err(Error::invalid(format!(
            "STFT window of {} s holds only {window} samples at {rate_hz} Hz",
            cfg.stft_window_s
        )));
    }
    let hop = ((window as f64 * (1.0 - cfg.stft_overlap_frac)).round() as usize).max(1);
    let fft = cfg.fft_size_for(window)?;
    Ok((window, hop, fft))
}

pub fn spectrogram(series: &SampleSeries, cfg: &EstimatorConfig) -> Result<PowerSpectrumMatrix> {
    cfg.validate()?;
    let rate = series.rate_hz;
    let (window, hop, nfft) = frame_geometry(cfg, rate)?;
    let x = &series.samples;
    if x.len() < window {
        return Err(Error::invalid(format!(
            "series of {} samples is shorter than one {window}-sample window",
            x.len()
        )));
    }
    let frames = (x.len() - window) / hop + 1;
    let taper = hann(window);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);
    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let n_bins = nfft / 2 + 1;
    let scale = 1.0 / nfft as f64;

    let mut power = Vec::with_capacity(frames);
    let mut time_bins = Vec::with_capacity(frames);
    for f in 0..frames {
        let start = f * hop;
        for (b, (s, w)) in buf.iter_mut().zip(x[start..start + window].iter().zip(&taper)) {
            *b = Complex::new(s * w, 0.0);
        }
        buf[window..].fill(Complex::new(0.0, 0.0));
        fft.process_with_scratch(&mut buf, &mut scratch);
        let row: Vec<f64> = (0..n_bins)
            .map(|k| {
                let p = buf[k].norm_sqr() * scale;
                if k == 0 || 2 * k == nfft {
                    p
                } else {
                    2.0 * p
                }
            })
            .collect();
        power.push(row);
        time_bins.push(series.start_time_s + (start as f64 + 0.5 * window as f64) / rate);
    }
    let df = rate / nfft as f64;
    Ok(PowerSpectrumMatrix {
        time_bins,
        freq_bins: (0..n_bins).map(|k| k as f64 * df).collect(),
        power,
        hop_s: hop as f64 / rate,
    })
}
