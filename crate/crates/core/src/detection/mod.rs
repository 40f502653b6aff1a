//! Deepfake detection against a consensus ENF reference.

mod azimuthal;
mod roc;

use serde::{Deserialize, Serialize};

pub use azimuthal::{azimuthal_spectrum, Frame2D};
pub use roc::{roc_curve, RocCurve, RocPoint};

use crate::error::{Error, Result};
use crate::media_synth::Interval;
use crate::series::EnfSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub window_s: f64,
    pub shift_s: f64,
    pub threshold: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window_s: 16.0,
            shift_s: 5.0,
            threshold: 0.8,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.shift_s > 0.0 && self.window_s > self.shift_s && self.window_s.is_finite()) {
            return Err(Error::invalid(format!(
                "detector needs window_s > shift_s > 0, got window {} shift {}",
                self.window_s, self.shift_s
            )));
        }
        if !(-1.0..=1.0).contains(&self.threshold) {
            return Err(Error::invalid(format!(
                "threshold must lie in [-1, 1], got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Genuine,
    Fake,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub start_s: f64,
    pub end_s: f64,
    pub corr: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub windows: Vec<WindowResult>,
    pub forged_intervals: Vec<Interval>,
    pub overall_verdict: Verdict,
}

impl DetectionReport {
    /// Lowest window correlation; the stream-level authenticity score.
    pub fn min_corr(&self) -> f64 {
        self.windows.iter().map(|w| w.corr).fold(f64::INFINITY, f64::min)
    }

    /// One row per window: `start_s,end_s,corr,verdict`.
    pub fn windows_csv(&self) -> String {
        let mut out = String::from("start_s,end_s,corr,verdict\n");
        for w in &self.windows {
            let v = match w.verdict {
                Verdict::Genuine => "genuine",
                Verdict::Fake => "fake",
            };
            out.push_str(&format!("{},{},{},{}\n", w.start_s, w.end_s, w.corr, v));
        }
        out
    }
}

/// Pearson correlation of two equal-length segments.
///
/// A constant segment carries no fingerprint, so any pair involving one
/// scores 0.
pub fn correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "correlation needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 3 {
        return Err(Error::invalid(format!("correlation needs at least 3 points, got {}", a.len())));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(0.0);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Slides a `window_s` window in `shift_s` steps over two time-aligned ENF
/// series and flags windows whose correlation falls below the threshold.
pub fn sliding_window_detect(local: &EnfSeries, truth: &EnfSeries, cfg: &DetectorConfig) -> Result<DetectionReport> {
    cfg.validate()?;
    let step = truth.step_s;
    if (local.step_s - step).abs() > 1e-9 * step {
        return Err(Error::invalid(format!(
            "series steps differ: {} s vs {} s",
            local.step_s, step
        )));
    }
    if (local.start_time_s - truth.start_time_s).abs() > 1e-6 * step {
        return Err(Error::invalid(format!(
            "series are misaligned: start {} s vs {} s",
            local.start_time_s, truth.start_time_s
        )));
    }
    let n = local.len().min(truth.len());
    let per_window = (cfg.window_s / step).round() as usize;
    if per_window < 3 {
        return Err(Error::invalid(format!(
            "window of {} s holds fewer than 3 estimates at {step} s spacing",
            cfg.window_s
        )));
    }
    if per_window > n {
        return Err(Error::invalid(format!(
            "series span {} s is shorter than the {} s window",
            n as f64 * step,
            cfg.window_s
        )));
    }
    let t0 = truth.start_time_s;
    let mut windows = Vec::new();
    for i in 0.. {
        let offset = i as f64 * cfg.shift_s;
        let from = (offset / step).round() as usize;
        if from + per_window > n {
            break;
        }
        let corr = correlation(
            &local.values_hz[from..from + per_window],
            &truth.values_hz[from..from + per_window],
        )?;
        let verdict = if corr < cfg.threshold { Verdict::Fake } else { Verdict::Genuine };
        windows.push(WindowResult {
            start_s: t0 + offset,
            end_s: t0 + offset + cfg.window_s,
            corr,
            verdict,
        });
    }
    let forged_intervals = derive_intervals(&windows);
    let overall_verdict = if windows.iter().any(|w| w.verdict == Verdict::Fake) {
        Verdict::Fake
    } else {
        Verdict::Genuine
    };
    Ok(DetectionReport {
        windows,
        forged_intervals,
        overall_verdict,
    })
}

/// Turns each maximal run of consecutive fake windows into one interval.
///
/// A run is trimmed to the span no neighbouring genuine window covers: it
/// starts where the preceding genuine window ends and ends where the
/// following genuine window starts. Runs at either end of the stream keep
/// the outer window edge. A run too short to leave an uncovered span
/// collapses to a one-shift interval centred between the neighbours.
pub fn derive_intervals(windows: &[WindowResult]) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < windows.len() {
        if windows[i].verdict != Verdict::Fake {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < windows.len() && windows[j + 1].verdict == Verdict::Fake {
            j += 1;
        }
        let start = if i == 0 { windows[0].start_s } else { windows[i - 1].end_s };
        let end = if j + 1 == windows.len() { windows[j].end_s } else { windows[j + 1].start_s };
        if start <= end {
            out.push(Interval::new(start, end));
        } else {
            let shift = if windows.len() > 1 {
                windows[1].start_s - windows[0].start_s
            } else {
                windows[0].end_s - windows[0].start_s
            };
            let centre = 0.5 * (start + end);
            out.push(Interval::new(centre - 0.5 * shift, centre + 0.5 * shift));
        }
        i = j + 1;
    }
    out
}
