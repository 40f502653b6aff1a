//! Stream files: a JSON header next to a little-endian `f32` payload, plus
//! one-column CSV for raw samples.
//!
//! Audio payloads hold the samples in order; video payloads hold row means
//! frame after frame.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::enf_estimation::SampleSeries;
use crate::error::{Error, Result};
use crate::media_synth::{AudioSpec, AudioStream, Harmonic, Interval, MediaStream, Shutter, VideoLumaStream, VideoSpec};
use crate::series::EnfSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StreamHeader {
    Audio {
        sample_rate_hz: f64,
        harmonics: Vec<Harmonic>,
        #[serde(flatten)]
        common: CommonHeader,
    },
    Video {
        fps: f64,
        frame_height: usize,
        shutter: Shutter,
        flicker_depth: f64,
        #[serde(flatten)]
        common: CommonHeader,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonHeader {
    pub nominal_hz: f64,
    pub seed: u64,
    /// `None` for a noiseless stream.
    pub snr_db: Option<f64>,
    pub noise_std: f64,
    pub forged_intervals: Vec<Interval>,
    pub truth: EnfSeries,
    pub sample_count: usize,
    /// Payload file name, relative to the header.
    pub payload: String,
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn payload_path(header_path: &Path) -> PathBuf {
    header_path.with_extension("f32")
}

/// Writes `<path>` (JSON header) and `<path>` with extension `.f32`.
pub fn write_stream(stream: &MediaStream, header_path: &Path) -> Result<()> {
    let bin = payload_path(header_path);
    let payload = bin
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::invalid(format!("bad stream path {}", header_path.display())))?
        .to_string();
    let (header, values): (StreamHeader, Vec<f32>) = match stream {
        MediaStream::Audio(a) => (
            StreamHeader::Audio {
                sample_rate_hz: a.sample_rate_hz,
                harmonics: a.spec.harmonics.clone(),
                common: CommonHeader {
                    nominal_hz: a.spec.nominal_hz,
                    seed: a.spec.seed,
                    snr_db: finite_or_none(a.spec.snr_db),
                    noise_std: a.noise_std,
                    forged_intervals: a.forged_intervals.clone(),
                    truth: a.truth.clone(),
                    sample_count: a.samples.len(),
                    payload,
                },
            },
            a.samples.clone(),
        ),
        MediaStream::Video(v) => (
            StreamHeader::Video {
                fps: v.fps,
                frame_height: v.frame_height,
                shutter: v.shutter,
                flicker_depth: v.spec.flicker_depth,
                common: CommonHeader {
                    nominal_hz: v.spec.nominal_hz,
                    seed: v.spec.seed,
                    snr_db: finite_or_none(v.spec.snr_db),
                    noise_std: v.noise_std,
                    forged_intervals: v.forged_intervals.clone(),
                    truth: v.truth.clone(),
                    sample_count: v.frames.len() * v.frame_height,
                    payload,
                },
            },
            v.frames.concat(),
        ),
    };
    let bytes: Vec<u8> = values.iter().flat_map(|x| x.to_le_bytes()).collect();
    fs::write(&bin, bytes)?;
    fs::write(header_path, serde_json::to_string_pretty(&header)? + "\n")?;
    Ok(())
}

pub fn read_stream(header_path: &Path) -> Result<MediaStream> {
    let header: StreamHeader = serde_json::from_str(&fs::read_to_string(header_path)?)?;
    let common = match &header {
        StreamHeader::Audio { common, .. } | StreamHeader::Video { common, .. } => common,
    };
    let bin = header_path.with_file_name(&common.payload);
    let bytes = fs::read(&bin)?;
    if bytes.len() != 4 * common.sample_count {
        return Err(Error::invalid(format!(
            "{} holds {} bytes, header promises {} samples",
            bin.display(),
            bytes.len(),
            common.sample_count
        )));
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let snr = common.snr_db.unwrap_or(f64::INFINITY);
    Ok(match header {
        StreamHeader::Audio {
            sample_rate_hz,
            harmonics,
            common,
        } => MediaStream::Audio(AudioStream {
            sample_rate_hz,
            samples: values,
            truth: common.truth,
            forged_intervals: common.forged_intervals,
            spec: AudioSpec {
                sample_rate_hz,
                harmonics,
                snr_db: snr,
                nominal_hz: common.nominal_hz,
                seed: common.seed,
            },
            noise_std: common.noise_std,
        }),
        StreamHeader::Video {
            fps,
            frame_height,
            shutter,
            flicker_depth,
            common,
        } => {
            if frame_height == 0 || values.len() % frame_height != 0 {
                return Err(Error::invalid(format!(
                    "{} row means do not split into frames of height {frame_height}",
                    values.len()
                )));
            }
            MediaStream::Video(VideoLumaStream {
                fps,
                frame_height,
                shutter,
                frames: values.chunks(frame_height).map(<[f32]>::to_vec).collect(),
                truth: common.truth,
                forged_intervals: common.forged_intervals,
                spec: VideoSpec {
                    fps,
                    frame_height,
                    shutter,
                    snr_db: snr,
                    flicker_depth,
                    nominal_hz: common.nominal_hz,
                    seed: common.seed,
                },
                noise_std: common.noise_std,
            })
        }
    })
}

/// Samples as one CSV column headed `sample`. Video rows are flattened in
/// exposure order.
pub fn samples_csv(stream: &MediaStream) -> String {
    let mut out = String::from("sample\n");
    let mut push = |x: f32| {
        out.push_str(&x.to_string());
        out.push('\n');
    };
    match stream {
        MediaStream::Audio(a) => a.samples.iter().copied().for_each(&mut push),
        MediaStream::Video(v) => v.frames.iter().flatten().copied().for_each(&mut push),
    }
    out
}

/// Parses a one-column CSV (an optional non-numeric header line is
/// skipped) into a series at `rate_hz` starting at time 0.
pub fn samples_from_csv(text: &str, rate_hz: f64) -> Result<SampleSeries> {
    if !(rate_hz > 0.0 && rate_hz.is_finite()) {
        return Err(Error::invalid(format!("sample rate must be positive, got {rate_hz}")));
    }
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => samples.push(v),
            Ok(_) => return Err(Error::invalid(format!("line {}: non-finite sample", i + 1))),
            Err(_) if i == 0 => {}
            Err(e) => return Err(Error::invalid(format!("line {}: {e}", i + 1))),
        }
    }
    if samples.is_empty() {
        return Err(Error::invalid("CSV holds no samples"));
    }
    Ok(SampleSeries {
        rate_hz,
        start_time_s: 0.0,
        samples,
    })
}
