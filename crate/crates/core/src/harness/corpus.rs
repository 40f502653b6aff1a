use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MediaSpec;
use crate::detection::{roc_curve, sliding_window_detect, DetectorConfig, RocCurve, WindowResult};
use crate::enf_estimation::{estimate_enf, EstimatorConfig};
use crate::error::{Error, Result};
use crate::media_synth::{forge_segments, gen_enf_truth, ForgeMode, GridConfig, Interval};
use crate::seed::{derive_seed, rng_for};
use crate::series::EnfSeries;

const TAG_TRUTH: u64 = 41;
const TAG_REFERENCE: u64 = 42;
const TAG_LOCAL: u64 = 43;
const TAG_SEGMENTS: u64 = 44;
const TAG_FAKE_GRID: u64 = 45;

/// A labelled set of streams. Stream `i` and its reference record the same
/// grid; the first `forged_streams` streams carry `segments_per_stream`
/// ReplaceEnf segments each. The reference stands for a validator's
/// dedicated mains sensor and is recorded at `reference_snr_db`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub streams: usize,
    pub forged_streams: usize,
    pub duration_s: f64,
    pub snr_db: f64,
    pub reference_snr_db: f64,
    pub segments_per_stream: usize,
    pub segment_min_s: f64,
    pub segment_max_s: f64,
    pub media: MediaSpec,
    pub grid: GridConfig,
    pub estimator: EstimatorConfig,
    pub detector: DetectorConfig,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            streams: 100,
            forged_streams: 50,
            duration_s: 300.0,
            snr_db: 10.0,
            reference_snr_db: 40.0,
            segments_per_stream: 1,
            segment_min_s: 40.0,
            segment_max_s: 60.0,
            media: MediaSpec::default(),
            grid: GridConfig::default(),
            estimator: EstimatorConfig::default().short_frames(),
            detector: DetectorConfig::default(),
            seed: 0,
        }
    }
}

impl CorpusConfig {
    /// 50 streams with four 30-40 s segments each at 20 dB: 200 segments.
    pub fn localization_default() -> Self {
        Self {
            streams: 50,
            forged_streams: 50,
            snr_db: 20.0,
            segments_per_stream: 4,
            segment_min_s: 30.0,
            segment_max_s: 40.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.estimator.validate()?;
        self.detector.validate()?;
        if self.streams == 0 || self.forged_streams > self.streams {
            return Err(Error::config(format!(
                "corpus of {} streams cannot hold {} forged ones",
                self.streams, self.forged_streams
            )));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::config("corpus duration must be positive"));
        }
        if self.snr_db.is_nan() || self.reference_snr_db.is_nan() {
            return Err(Error::config("corpus SNRs must be numbers"));
        }
        if self.forged_streams > 0 {
            if self.segments_per_stream == 0 {
                return Err(Error::config("forged streams need at least one segment"));
            }
            if !(self.segment_min_s > 0.0 && self.segment_min_s <= self.segment_max_s) {
                return Err(Error::config("segment lengths need 0 < min <= max"));
            }
            if self.slot_s() < self.segment_max_s {
                return Err(Error::config(format!(
                    "{} segments of up to {} s do not fit a {} s stream with {} s guards",
                    self.segments_per_stream, self.segment_max_s, self.duration_s, self.guard_s()
                )));
            }
        }
        Ok(())
    }

    /// Clear span kept before, between and after segments, so that at least
    /// one detector window on the shift grid sees only genuine content on
    /// each side.
    fn guard_s(&self) -> f64 {
        self.detector.window_s + self.detector.shift_s
    }

    fn slot_s(&self) -> f64 {
        let n = self.segments_per_stream.max(1) as f64;
        (self.duration_s - (n + 1.0) * self.guard_s()) / n
    }

    /// One segment per equal slot, slots separated by guard spans, with
    /// seeded length and placement on whole seconds.
    fn segments_for(&self, stream: usize) -> Vec<Interval> {
        let mut rng = rng_for(self.seed, &[TAG_SEGMENTS, stream as u64]);
        let slot = self.slot_s();
        (0..self.segments_per_stream)
            .map(|j| {
                let len = rng.random_range(self.segment_min_s..=self.segment_max_s).round();
                let lo = self.guard_s() + j as f64 * (slot + self.guard_s());
                let slack = (slot - len).max(0.0).floor() as u64;
                let start = lo.ceil() + rng.random_range(0..=slack) as f64;
                Interval::new(start, start + len)
            })
            .collect()
    }
}

/// ENF estimates for one labelled stream.
struct CorpusStream {
    reference: EnfSeries,
    local: EnfSeries,
    segments: Vec<Interval>,
}

fn build_stream(cfg: &CorpusConfig, i: usize, forged: bool) -> Result<CorpusStream> {
    let grid = cfg.grid.with_seed(derive_seed(cfg.seed, &[TAG_TRUTH, i as u64]));
    let truth = gen_enf_truth(&grid, cfg.duration_s, 1.0)?;
    let reference = cfg.media.record(&truth, cfg.reference_snr_db, derive_seed(cfg.seed, &[TAG_REFERENCE, i as u64]))?;
    let mut local = cfg.media.record(&truth, cfg.snr_db, derive_seed(cfg.seed, &[TAG_LOCAL, i as u64]))?;
    let segments = if forged { cfg.segments_for(i) } else { Vec::new() };
    if forged {
        let fake = cfg.grid.with_seed(derive_seed(cfg.seed, &[TAG_FAKE_GRID, i as u64]));
        local = forge_segments(&local, &segments, &ForgeMode::ReplaceEnf { grid: fake })?;
    }
    Ok(CorpusStream {
        reference: estimate_enf(&reference, &cfg.estimator)?,
        local: estimate_enf(&local, &cfg.estimator)?,
        segments,
    })
}

fn build_corpus(cfg: &CorpusConfig, forged_streams: usize) -> Result<Vec<CorpusStream>> {
    cfg.validate()?;
    (0..cfg.streams).map(|i| build_stream(cfg, i, i < forged_streams)).collect()
}

enum WindowLabel {
    Genuine,
    Fake,
    Mixed,
}

fn label(w: &WindowResult, segments: &[Interval]) -> WindowLabel {
    if segments.iter().any(|s| w.start_s >= s.start_s && w.end_s <= s.end_s) {
        WindowLabel::Fake
    } else if segments.iter().all(|s| w.end_s <= s.start_s || w.start_s >= s.end_s) {
        WindowLabel::Genuine
    } else {
        WindowLabel::Mixed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocEntry {
    pub window_s: f64,
    /// Streams scored by their lowest window correlation.
    pub stream_roc: RocCurve,
    /// Windows wholly inside a forged segment against windows touching none;
    /// `None` when no window fits inside a segment.
    pub window_roc: Option<RocCurve>,
    pub genuine_windows: usize,
    pub fake_windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocSweep {
    pub entries: Vec<RocEntry>,
}

/// Builds the corpus once and scores it with every window length.
pub fn roc_sweep(windows: &[f64], cfg: &CorpusConfig) -> Result<RocSweep> {
    if windows.is_empty() {
        return Err(Error::invalid("ROC sweep needs at least one window length"));
    }
    if cfg.forged_streams == 0 || cfg.forged_streams == cfg.streams {
        return Err(Error::invalid("ROC needs both genuine and forged streams"));
    }
    let longest = windows.iter().cloned().fold(f64::MIN, f64::max);
    if longest + cfg.estimator.stft_window_s > cfg.duration_s {
        return Err(Error::invalid(format!(
            "{} s streams are too short for a {longest} s window",
            cfg.duration_s
        )));
    }
    let corpus = build_corpus(cfg, cfg.forged_streams)?;
    let mut entries = Vec::with_capacity(windows.len());
    for &w in windows {
        let det = DetectorConfig {
            window_s: w,
            ..cfg.detector.clone()
        };
        let (mut g_stream, mut f_stream, mut g_win, mut f_win) = (vec![], vec![], vec![], vec![]);
        for s in &corpus {
            let rep = sliding_window_detect(&s.local, &s.reference, &det)?;
            if s.segments.is_empty() {
                g_stream.push(rep.min_corr());
            } else {
                f_stream.push(rep.min_corr());
            }
            for win in &rep.windows {
                match label(win, &s.segments) {
                    WindowLabel::Genuine => g_win.push(win.corr),
                    WindowLabel::Fake => f_win.push(win.corr),
                    WindowLabel::Mixed => {}
                }
            }
        }
        entries.push(RocEntry {
            window_s: w,
            stream_roc: roc_curve(&g_stream, &f_stream)?,
            window_roc: if f_win.is_empty() { None } else { Some(roc_curve(&g_win, &f_win)?) },
            genuine_windows: g_win.len(),
            fake_windows: f_win.len(),
        });
    }
    Ok(RocSweep { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentOutcome {
    pub stream: usize,
    pub injected: Interval,
    /// The reported interval overlapping the segment most, if any.
    pub reported: Option<Interval>,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationResult {
    pub tolerance_s: f64,
    pub segments: Vec<SegmentOutcome>,
    pub hits: usize,
    pub rate: f64,
}

/// Forges every stream and checks, segment by segment, that the best
/// matching reported interval has both edges within one shift.
pub fn localization_trial(cfg: &CorpusConfig) -> Result<LocalizationResult> {
    let corpus = build_corpus(cfg, cfg.streams)?;
    let tol = cfg.detector.shift_s;
    let mut segments = Vec::new();
    for (i, s) in corpus.iter().enumerate() {
        let rep = sliding_window_detect(&s.local, &s.reference, &cfg.detector)?;
        for seg in &s.segments {
            let reported = rep
                .forged_intervals
                .iter()
                .filter(|r| r.overlap(seg) > 0.0)
                .max_by(|a, b| a.overlap(seg).total_cmp(&b.overlap(seg)))
                .copied();
            let hit = reported.is_some_and(|r| {
                (r.start_s - seg.start_s).abs() <= tol + 1e-9 && (r.end_s - seg.end_s).abs() <= tol + 1e-9
            });
            segments.push(SegmentOutcome {
                stream: i,
                injected: *seg,
                reported,
                hit,
            });
        }
    }
    let hits = segments.iter().filter(|s| s.hit).count();
    let rate = hits as f64 / segments.len().max(1) as f64;
    Ok(LocalizationResult {
        tolerance_s: tol,
        segments,
        hits,
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CorpusConfig {
        CorpusConfig {
            streams: 8,
            forged_streams: 4,
            duration_s: 120.0,
            segment_min_s: 35.0,
            segment_max_s: 40.0,
            ..CorpusConfig::default()
        }
    }

    #[test]
    fn segments_respect_margins_and_slots() {
        let cfg = CorpusConfig::localization_default();
        for i in 0..50 {
            let segs = cfg.segments_for(i);
            assert_eq!(segs.len(), 4);
            for w in segs.windows(2) {
                assert!(w[1].start_s - w[0].end_s >= 21.0, "{w:?}");
            }
            for s in &segs {
                assert!(s.start_s >= 21.0 && s.end_s <= 279.0, "{s:?}");
                assert!((30.0..=40.0).contains(&s.len()));
            }
        }
    }

    #[test]
    fn window_labels() {
        let segs = [Interval::new(50.0, 80.0)];
        let w = |s: f64| WindowResult {
            start_s: s,
            end_s: s + 16.0,
            corr: 0.0,
            verdict: crate::detection::Verdict::Fake,
        };
        assert!(matches!(label(&w(30.0), &segs), WindowLabel::Genuine));
        assert!(matches!(label(&w(34.0), &segs), WindowLabel::Genuine));
        assert!(matches!(label(&w(40.0), &segs), WindowLabel::Mixed));
        assert!(matches!(label(&w(50.0), &segs), WindowLabel::Fake));
        assert!(matches!(label(&w(64.0), &segs), WindowLabel::Fake));
        assert!(matches!(label(&w(65.0), &segs), WindowLabel::Mixed));
        assert!(matches!(label(&w(80.0), &segs), WindowLabel::Genuine));
    }

    #[test]
    fn small_sweep_separates_classes() {
        let sweep = roc_sweep(&[8.0, 16.0], &small()).unwrap();
        assert_eq!(sweep.entries.len(), 2);
        for e in &sweep.entries {
            assert!(e.stream_roc.auc > 0.9, "window {}: {}", e.window_s, e.stream_roc.auc);
            assert!(e.window_roc.is_some() && e.fake_windows > 0);
        }
    }

    #[test]
    fn sweep_rejects_degenerate_corpora() {
        let single = CorpusConfig {
            forged_streams: 0,
            ..small()
        };
        assert!(roc_sweep(&[16.0], &single).is_err());
        let all = CorpusConfig {
            forged_streams: 8,
            ..small()
        };
        assert!(roc_sweep(&[16.0], &all).is_err());
        assert!(roc_sweep(&[200.0], &small()).is_err());
        assert!(roc_sweep(&[], &small()).is_err());
        let crowded = CorpusConfig {
            segments_per_stream: 3,
            ..small()
        };
        assert!(roc_sweep(&[16.0], &crowded).unwrap_err().is_config_error());
    }

    #[test]
    fn small_localization_trial() {
        let cfg = CorpusConfig {
            streams: 3,
            forged_streams: 3,
            ..CorpusConfig::localization_default()
        };
        let r = localization_trial(&cfg).unwrap();
        assert_eq!(r.segments.len(), 12);
        assert!(r.hits >= 9, "{} of 12", r.hits);
    }
}
