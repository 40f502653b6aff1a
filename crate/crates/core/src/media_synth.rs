//! Synthetic ENF-bearing media.
//!
//! The grid frequency is modelled as a seeded random walk around the nominal
//! frequency. Audio picks it up as mains hum at integer harmonics, video as
//! lamp flicker at twice the grid frequency, sampled either once per sensor
//! row (rolling shutter) or once per frame (global shutter).

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;
use crate::series::EnfSeries;

const TAG_TRUTH: u64 = 1;
const TAG_PHASE: u64 = 2;
const TAG_NOISE: u64 = 3;
const TAG_FORGE: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub nominal_hz: f64,
    /// Standard deviation of the frequency change over one second.
    pub drift_std_hz: f64,
    pub max_dev_hz: f64,
    /// Fraction of the deviation retained after one second; 1 gives a pure
    /// random walk.
    pub reversion: f64,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nominal_hz: 60.0,
            drift_std_hz: 0.005,
            max_dev_hz: 0.05,
            reversion: 0.5,
            seed: 0,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nominal_hz > 0.0 && self.nominal_hz.is_finite()) {
            return Err(Error::invalid("grid nominal_hz must be positive"));
        }
        if !(self.drift_std_hz >= 0.0 && self.drift_std_hz.is_finite()) {
            return Err(Error::invalid("grid drift_std_hz must be non-negative"));
        }
        if !(self.max_dev_hz > 0.0 && self.max_dev_hz.is_finite()) {
            return Err(Error::invalid("grid max_dev_hz must be positive"));
        }
        if !(self.reversion > 0.0 && self.reversion <= 1.0) {
            return Err(Error::invalid("grid reversion must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Generates the grid's frequency over `[0, duration_s]` at `step_s`
/// resolution.
///
/// Each step shrinks the deviation by `reversion^step_s` and adds
/// `N(0, drift_std_hz² · step_s)`; excursions past
/// `nominal ± max_dev_hz` are folded back at the bound so the walk keeps its
/// step statistics and never sits flat against the limit.
pub fn gen_enf_truth(cfg: &GridConfig, duration_s: f64, step_s: f64) -> Result<EnfSeries> {
    cfg.validate()?;
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(Error::invalid(format!("duration must be positive, got {duration_s}")));
    }
    if !(step_s > 0.0 && step_s.is_finite()) {
        return Err(Error::invalid(format!("step must be positive, got {step_s}")));
    }
    let n = (duration_s / step_s + 1e-9).floor() as usize + 1;
    let step_std = cfg.drift_std_hz * step_s.sqrt();
    let keep = cfg.reversion.powf(step_s);
    let mut rng = rng_for(cfg.seed, &[TAG_TRUTH]);
    let mut dev = 0.0_f64;
    let mut values = Vec::with_capacity(n);
    values.push(cfg.nominal_hz);
    for _ in 1..n {
        if step_std > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            dev = reflect(keep * dev + step_std * z, cfg.max_dev_hz);
        }
        values.push(cfg.nominal_hz + dev);
    }
    EnfSeries::new(0.0, step_s, values)
}

fn reflect(mut x: f64, bound: f64) -> f64 {
    loop {
        if x > bound {
            x = 2.0 * bound - x;
        } else if x < -bound {
            x = -2.0 * bound - x;
        } else {
            return x;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub order: u32,
    pub amplitude: f64,
}

impl Harmonic {
    /// Fundamental plus the second and third harmonics at falling strength.
    pub fn mains_hum() -> Vec<Harmonic> {
        [(1, 1.0), (2, 0.6), (3, 0.4)]
            .into_iter()
            .map(|(order, amplitude)| Harmonic { order, amplitude })
            .collect()
    }
}

/// Closed time interval in stream seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start_s: f64,
    pub end_s: f64,
}

impl Interval {
    pub fn new(start_s: f64, end_s: f64) -> Self {
        Self { start_s, end_s }
    }

    pub fn len(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start_s && t < self.end_s
    }

    pub fn overlap(&self, other: &Interval) -> f64 {
        (self.end_s.min(other.end_s) - self.start_s.max(other.start_s)).max(0.0)
    }
}

/// How an audio stream was synthesized. Kept on the stream so forgeries can be
/// re-synthesized with matching parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioSpec {
    pub sample_rate_hz: f64,
    pub harmonics: Vec<Harmonic>,
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub nominal_hz: f64,
    pub seed: u64,
}

impl AudioSpec {
    pub fn new(sample_rate_hz: f64, harmonics: Vec<Harmonic>, snr_db: f64, seed: u64) -> Self {
        Self {
            sample_rate_hz,
            harmonics,
            snr_db,
            nominal_hz: 60.0,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AudioStream {
    pub sample_rate_hz: f64,
    pub samples: Vec<f32>,
    pub truth: EnfSeries,
    pub forged_intervals: Vec<Interval>,
    pub spec: AudioSpec,
    /// Standard deviation of the additive noise actually applied.
    pub noise_std: f64,
}

impl AudioStream {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    fn time_of(&self, n: usize) -> f64 {
        self.truth.start_time_s + n as f64 / self.sample_rate_hz
    }
}

fn noise_std_for(signal_power: f64, snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() {
        return Err(Error::invalid("snr_db must not be NaN"));
    }
    if snr_db == f64::INFINITY || signal_power <= 0.0 {
        return Ok(0.0);
    }
    Ok((signal_power / 10f64.powf(snr_db / 10.0)).sqrt())
}

fn add_noise(samples: &mut [f32], std: f64, rng: &mut impl Rng) {
    if std <= 0.0 {
        return;
    }
    let normal = Normal::new(0.0, std).expect("finite positive std");
    for s in samples {
        *s = (*s as f64 + normal.sample(rng)) as f32;
    }
}

fn frac_turn(cycles: f64) -> f64 {
    TAU * (cycles - cycles.floor())
}

/// Mains hum: `Σ a_k sin(2π k ∫f + φ_k)` plus white noise at `snr_db`
/// relative to the measured hum power.
pub fn embed_audio(truth: &EnfSeries, spec: &AudioSpec) -> Result<AudioStream> {
    if spec.harmonics.is_empty() {
        return Err(Error::invalid("at least one harmonic is required"));
    }
    if let Some(h) = spec.harmonics.iter().find(|h| h.order == 0) {
        return Err(Error::invalid(format!("harmonic order must be positive, got {}", h.order)));
    }
    let max_order = spec.harmonics.iter().map(|h| h.order).max().unwrap_or(1) as f64;
    let max_f = truth.values_hz.iter().cloned().fold(f64::MIN, f64::max);
    if !(spec.sample_rate_hz > 2.0 * max_order * max_f) {
        return Err(Error::invalid(format!(
            "sample rate {} Hz violates Nyquist for harmonic order {} at {:.4} Hz",
            spec.sample_rate_hz, max_order, max_f
        )));
    }
    let duration = truth.end_time_s() - truth.start_time_s;
    let n = (duration * spec.sample_rate_hz).round() as usize;
    if n == 0 {
        return Err(Error::invalid("ENF truth too short to synthesize any sample"));
    }

    let mut rng = rng_for(spec.seed, &[TAG_PHASE]);
    let phases: Vec<f64> = spec
        .harmonics
        .iter()
        .map(|_| rng.random_range(0.0..TAU))
        .collect();
    let samples = synth_hum(truth, &spec.harmonics, &phases, spec.sample_rate_hz, 0..n);

    let power = mean_square(&samples);
    let noise_std = noise_std_for(power, spec.snr_db)?;
    let mut samples = samples;
    add_noise(&mut samples, noise_std, &mut rng_for(spec.seed, &[TAG_NOISE]));

    Ok(AudioStream {
        sample_rate_hz: spec.sample_rate_hz,
        samples,
        truth: truth.clone(),
        forged_intervals: Vec::new(),
        spec: spec.clone(),
        noise_std,
    })
}

fn synth_hum(
    truth: &EnfSeries,
    harmonics: &[Harmonic],
    phases: &[f64],
    rate: f64,
    range: std::ops::Range<usize>,
) -> Vec<f32> {
    let integ = truth.phase_integrator();
    range
        .map(|i| {
            let t = truth.start_time_s + i as f64 / rate;
            let cycles = integ.cycles_at(t);
            harmonics
                .iter()
                .zip(phases)
                .map(|(h, &phi)| h.amplitude * (frac_turn(h.order as f64 * cycles) + phi).sin())
                .sum::<f64>() as f32
        })
        .collect()
}

fn mean_square(x: &[f32]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>() / x.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shutter {
    GlobalCcd,
    RollingCmos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoSpec {
    pub fps: f64,
    pub frame_height: usize,
    pub shutter: Shutter,
    pub snr_db: f64,
    /// Peak-to-peak luminance swing of the lamp flicker.
    pub flicker_depth: f64,
    pub nominal_hz: f64,
    pub seed: u64,
}

impl VideoSpec {
    pub fn new(fps: f64, frame_height: usize, shutter: Shutter, snr_db: f64, seed: u64) -> Self {
        Self {
            fps,
            frame_height,
            shutter,
            snr_db,
            flicker_depth: 0.05,
            nominal_hz: 60.0,
            seed,
        }
    }
}

/// Video reduced to the mean luminance of each sensor row, frame by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoLumaStream {
    pub fps: f64,
    pub frame_height: usize,
    pub shutter: Shutter,
    pub frames: Vec<Vec<f32>>,
    pub truth: EnfSeries,
    pub forged_intervals: Vec<Interval>,
    pub spec: VideoSpec,
    pub noise_std: f64,
}

impl VideoLumaStream {
    pub fn duration_s(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }

    /// Exposure instant of `row` in `frame`.
    pub fn row_time(&self, frame: usize, row: usize) -> f64 {
        row_time(&self.spec, self.truth.start_time_s, frame, row)
    }
}

fn row_time(spec: &VideoSpec, start: f64, frame: usize, row: usize) -> f64 {
    match spec.shutter {
        Shutter::RollingCmos => {
            start + (frame * spec.frame_height + row) as f64 / (spec.fps * spec.frame_height as f64)
        }
        Shutter::GlobalCcd => start + frame as f64 / spec.fps,
    }
}

/// Static scene brightness per row, removed again by the estimator.
pub fn scene_profile(frame_height: usize) -> Vec<f64> {
    (0..frame_height)
        .map(|r| {
            let y = r as f64 / frame_height as f64;
            0.45 + 0.25 * (TAU * 1.5 * y).sin() + 0.1 * y
        })
        .collect()
}

/// Raised-cosine lamp output, oscillating at twice the grid frequency.
fn illumination(cycles: f64) -> f64 {
    0.5 * (1.0 - frac_turn(2.0 * cycles).cos())
}

/// Lamp flicker seen through the given shutter. Rolling shutters sample the
/// flicker once per row at `1 / (fps · frame_height)` spacing; global shutters
/// sample it once per frame and copy the value to every row.
pub fn embed_video(truth: &EnfSeries, spec: &VideoSpec) -> Result<VideoLumaStream> {
    if !(spec.fps > 0.0 && spec.fps.is_finite()) {
        return Err(Error::invalid(format!("fps must be positive, got {}", spec.fps)));
    }
    if spec.frame_height == 0 {
        return Err(Error::invalid("frame_height must be at least 1"));
    }
    if !(spec.flicker_depth >= 0.0 && spec.flicker_depth.is_finite()) {
        return Err(Error::invalid("flicker_depth must be non-negative"));
    }
    let duration = truth.end_time_s() - truth.start_time_s;
    let n_frames = (duration * spec.fps).round() as usize;
    if n_frames == 0 {
        return Err(Error::invalid("ENF truth too short to synthesize any frame"));
    }
    let scene = scene_profile(spec.frame_height);
    let flicker = flicker_rows(truth, spec, 0..n_frames);
    let power = variance(flicker.iter().flatten());
    let noise_std = noise_std_for(power, spec.snr_db)?;

    let mut rng = rng_for(spec.seed, &[TAG_NOISE]);
    let frames = flicker
        .into_iter()
        .map(|rows| {
            let mut frame: Vec<f32> = rows
                .iter()
                .zip(&scene)
                .map(|(&f, &s)| (s + f as f64) as f32)
                .collect();
            add_noise(&mut frame, noise_std, &mut rng);
            frame
        })
        .collect();

    Ok(VideoLumaStream {
        fps: spec.fps,
        frame_height: spec.frame_height,
        shutter: spec.shutter,
        frames,
        truth: truth.clone(),
        forged_intervals: Vec::new(),
        spec: spec.clone(),
        noise_std,
    })
}

fn flicker_rows(truth: &EnfSeries, spec: &VideoSpec, frames: std::ops::Range<usize>) -> Vec<Vec<f32>> {
    let integ = truth.phase_integrator();
    frames
        .map(|m| match spec.shutter {
            Shutter::RollingCmos => (0..spec.frame_height)
                .map(|r| {
                    let t = row_time(spec, truth.start_time_s, m, r);
                    (spec.flicker_depth * illumination(integ.cycles_at(t))) as f32
                })
                .collect(),
            Shutter::GlobalCcd => {
                let t = row_time(spec, truth.start_time_s, m, 0);
                let v = (spec.flicker_depth * illumination(integ.cycles_at(t))) as f32;
                vec![v; spec.frame_height]
            }
        })
        .collect()
}

fn variance<'a>(xs: impl Iterator<Item = &'a f32> + Clone) -> f64 {
    let (n, sum) = xs.clone().fold((0usize, 0.0), |(n, s), &x| (n + 1, s + x as f64));
    if n == 0 {
        return 0.0;
    }
    let mean = sum / n as f64;
    xs.map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n as f64
}

/// Either kind of synthetic stream.
#[derive(Debug, Clone, PartialEq)]
pub enum MediaStream {
    Audio(AudioStream),
    Video(VideoLumaStream),
}

impl MediaStream {
    pub fn truth(&self) -> &EnfSeries {
        match self {
            MediaStream::Audio(a) => &a.truth,
            MediaStream::Video(v) => &v.truth,
        }
    }

    pub fn forged_intervals(&self) -> &[Interval] {
        match self {
            MediaStream::Audio(a) => &a.forged_intervals,
            MediaStream::Video(v) => &v.forged_intervals,
        }
    }

    pub fn duration_s(&self) -> f64 {
        match self {
            MediaStream::Audio(a) => a.duration_s(),
            MediaStream::Video(v) => v.duration_s(),
        }
    }
}

impl From<AudioStream> for MediaStream {
    fn from(a: AudioStream) -> Self {
        MediaStream::Audio(a)
    }
}

impl From<VideoLumaStream> for MediaStream {
    fn from(v: VideoLumaStream) -> Self {
        MediaStream::Video(v)
    }
}

impl Forgeable for MediaStream {
    fn duration_s(&self) -> f64 {
        MediaStream::duration_s(self)
    }

    fn start_time_s(&self) -> f64 {
        self.truth().start_time_s
    }

    fn forged_intervals_mut(&mut self) -> &mut Vec<Interval> {
        match self {
            MediaStream::Audio(a) => &mut a.forged_intervals,
            MediaStream::Video(v) => &mut v.forged_intervals,
        }
    }

    fn forge_segment(&mut self, seg: Interval, mode: &ForgeMode, index: u64) -> Result<()> {
        match self {
            MediaStream::Audio(a) => a.forge_segment(seg, mode, index),
            MediaStream::Video(v) => v.forge_segment(seg, mode, index),
        }
    }
}

/// How forged segments are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ForgeMode {
    /// Re-synthesize the segment from an independent grid walk generated with
    /// `grid` (whose seed should differ from the original).
    ReplaceEnf { grid: GridConfig },
    /// Replace the segment by white noise of the same power.
    StripEnf { seed: u64 },
}

impl ForgeMode {
    fn seed(&self) -> u64 {
        match self {
            ForgeMode::ReplaceEnf { grid } => grid.seed,
            ForgeMode::StripEnf { seed } => *seed,
        }
    }
}

/// Streams that can carry injected forgeries.
pub trait Forgeable: Clone {
    fn duration_s(&self) -> f64;
    fn start_time_s(&self) -> f64;
    fn forged_intervals_mut(&mut self) -> &mut Vec<Interval>;
    fn forge_segment(&mut self, seg: Interval, mode: &ForgeMode, index: u64) -> Result<()>;
}

/// Applies `mode` to every segment. Samples outside the segments are left
/// untouched and the segments are merged into `forged_intervals`.
pub fn forge_segments<S: Forgeable>(stream: &S, segments: &[Interval], mode: &ForgeMode) -> Result<S> {
    let start = stream.start_time_s();
    let end = start + stream.duration_s();
    let mut sorted = segments.to_vec();
    sorted.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
    for seg in &sorted {
        if !(seg.start_s.is_finite() && seg.end_s.is_finite() && seg.start_s < seg.end_s) {
            return Err(Error::invalid(format!(
                "segment [{}, {}] is empty or not finite",
                seg.start_s, seg.end_s
            )));
        }
        if seg.start_s < start || seg.end_s > end + 1e-9 {
            return Err(Error::invalid(format!(
                "segment [{}, {}] outside stream span [{start}, {end}]",
                seg.start_s, seg.end_s
            )));
        }
    }
    if let Some(w) = sorted.windows(2).find(|w| w[1].start_s < w[0].end_s) {
        return Err(Error::invalid(format!(
            "segments [{}, {}] and [{}, {}] overlap",
            w[0].start_s, w[0].end_s, w[1].start_s, w[1].end_s
        )));
    }
    if let ForgeMode::ReplaceEnf { grid } = mode {
        grid.validate()?;
    }

    let mut out = stream.clone();
    for (i, seg) in sorted.iter().enumerate() {
        out.forge_segment(*seg, mode, i as u64)?;
    }
    let merged = merge_intervals(out.forged_intervals_mut().iter().chain(&sorted).copied());
    *out.forged_intervals_mut() = merged;
    Ok(out)
}

fn merge_intervals(items: impl Iterator<Item = Interval>) -> Vec<Interval> {
    let mut v: Vec<Interval> = items.collect();
    v.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.start_s <= last.end_s => last.end_s = last.end_s.max(iv.end_s),
            _ => out.push(iv),
        }
    }
    out
}

/// Independent grid walk covering `seg`, re-timed to start at `seg.start_s`.
fn forged_truth(grid: &GridConfig, seg: Interval, step_s: f64, index: u64) -> Result<EnfSeries> {
    let seeded = grid.with_seed(crate::seed::derive_seed(grid.seed, &[TAG_FORGE, index]));
    let mut walk = gen_enf_truth(&seeded, seg.len() + step_s, step_s)?;
    walk.start_time_s = seg.start_s;
    Ok(walk)
}

fn sample_range(start: f64, rate: f64, count: usize, seg: Interval) -> std::ops::Range<usize> {
    let lo = ((seg.start_s - start) * rate).ceil().max(0.0) as usize;
    let hi = (((seg.end_s - start) * rate).ceil().max(0.0) as usize).min(count);
    lo.min(hi)..hi
}

impl Forgeable for AudioStream {
    fn duration_s(&self) -> f64 {
        AudioStream::duration_s(self)
    }

    fn start_time_s(&self) -> f64 {
        self.truth.start_time_s
    }

    fn forged_intervals_mut(&mut self) -> &mut Vec<Interval> {
        &mut self.forged_intervals
    }

    fn forge_segment(&mut self, seg: Interval, mode: &ForgeMode, index: u64) -> Result<()> {
        let range = sample_range(self.truth.start_time_s, self.sample_rate_hz, self.samples.len(), seg);
        if range.is_empty() {
            return Ok(());
        }
        let mut noise_rng = rng_for(mode.seed(), &[TAG_FORGE, TAG_NOISE, index]);
        let replacement = match mode {
            ForgeMode::ReplaceEnf { grid } => {
                let walk = forged_truth(grid, seg, self.truth.step_s, index)?;
                let mut rng = rng_for(grid.seed, &[TAG_FORGE, TAG_PHASE, index]);
                let phases: Vec<f64> = self
                    .spec
                    .harmonics
                    .iter()
                    .map(|_| rng.random_range(0.0..TAU))
                    .collect();
                // synth_hum indexes samples from the walk's own start time
                let first_t = self.time_of(range.start);
                let offset = ((first_t - walk.start_time_s) * self.sample_rate_hz).round() as usize;
                let mut seg_samples = synth_hum(
                    &walk,
                    &self.spec.harmonics,
                    &phases,
                    self.sample_rate_hz,
                    offset..offset + range.len(),
                );
                add_noise(&mut seg_samples, self.noise_std, &mut noise_rng);
                seg_samples
            }
            ForgeMode::StripEnf { .. } => {
                let power = mean_square(&self.samples[range.clone()]);
                let mut seg_samples = vec![0.0f32; range.len()];
                add_noise(&mut seg_samples, power.sqrt(), &mut noise_rng);
                seg_samples
            }
        };
        self.samples[range].copy_from_slice(&replacement);
        Ok(())
    }
}

impl Forgeable for VideoLumaStream {
    fn duration_s(&self) -> f64 {
        VideoLumaStream::duration_s(self)
    }

    fn start_time_s(&self) -> f64 {
        self.truth.start_time_s
    }

    fn forged_intervals_mut(&mut self) -> &mut Vec<Interval> {
        &mut self.forged_intervals
    }

    /// Frames whose first row is exposed inside the segment are replaced
    /// whole.
    fn forge_segment(&mut self, seg: Interval, mode: &ForgeMode, index: u64) -> Result<()> {
        let range = sample_range(self.truth.start_time_s, self.fps, self.frames.len(), seg);
        if range.is_empty() {
            return Ok(());
        }
        let scene = scene_profile(self.frame_height);
        let mut noise_rng = rng_for(mode.seed(), &[TAG_FORGE, TAG_NOISE, index]);
        match mode {
            ForgeMode::ReplaceEnf { grid } => {
                let walk = forged_truth(grid, seg, self.truth.step_s, index)?;
                // The walk is timed in stream seconds, so the flicker phase is
                // evaluated at the original row instants.
                let integ = walk.phase_integrator();
                let spec = &self.spec;
                let start = self.truth.start_time_s;
                for m in range {
                    let mut frame: Vec<f32> = (0..self.frame_height)
                        .map(|r| {
                            let t = row_time(spec, start, m, if spec.shutter == Shutter::GlobalCcd { 0 } else { r });
                            let fl = spec.flicker_depth * illumination(integ.cycles_at(t));
                            (scene[r] + fl) as f32
                        })
                        .collect();
                    add_noise(&mut frame, self.noise_std, &mut noise_rng);
                    self.frames[m] = frame;
                }
            }
            ForgeMode::StripEnf { .. } => {
                let ac_power = variance(
                    self.frames[range.clone()]
                        .iter()
                        .flat_map(|f| f.iter().zip(&scene))
                        .map(|(&v, &s)| v - s as f32)
                        .collect::<Vec<f32>>()
                        .iter(),
                );
                let level = 0.5 * self.spec.flicker_depth;
                for m in range {
                    let mut frame: Vec<f32> = scene.iter().map(|&s| (s + level) as f32).collect();
                    add_noise(&mut frame, ac_power.sqrt(), &mut noise_rng);
                    self.frames[m] = frame;
                }
            }
        }
        Ok(())
    }
}
