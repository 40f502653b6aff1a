//! `enfnet`: synthesize ENF-bearing media, estimate ENF, run the proof-of-ENF
//! committee and detect forged segments from the command line.
//!
//! Exit codes: 0 success, 2 invalid configuration or arguments, 3 pipeline
//! failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use enfnet_core::consensus::{simulate, Behavior, CommitteeConfig};
use enfnet_core::detection::{sliding_window_detect, DetectorConfig, RocCurve};
use enfnet_core::enf_estimation::{estimate_enf, estimate_samples, EstimatorConfig};
use enfnet_core::harness::{bench_consensus, roc_sweep, run_scenario, CorpusConfig, MediaSpec, ScenarioConfig};
use enfnet_core::media_synth::{forge_segments, gen_enf_truth, ForgeMode, GridConfig, Interval, Shutter};
use enfnet_core::seed::derive_seed;
use enfnet_core::stream_io::{read_stream, samples_csv, samples_from_csv, write_stream};
use enfnet_core::{EnfSeries, Error, Result};

#[derive(Parser)]
#[command(name = "enfnet", version, about = "ENF fingerprinting and proof-of-ENF deepfake detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for every random stream the command draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize an ENF-bearing audio or video stream.
    Generate(GenerateArgs),
    /// Estimate the ENF of a stream file or a one-column sample CSV.
    Estimate(EstimateArgs),
    /// Simulate proof-of-ENF committee rounds.
    ConsensusSim(ConsensusArgs),
    /// Compare a local ENF series against a reference, window by window.
    Detect(DetectArgs),
    /// Run a full conference scenario.
    Scenario(ScenarioArgs),
    /// Time consensus scoring against committee size.
    Bench(BenchArgs),
    /// Sweep detection window lengths over a labelled corpus.
    Roc(RocArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Media {
    Audio,
    Video,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShutterArg {
    Rolling,
    Global,
}

#[derive(Clone, Copy, ValueEnum)]
enum ForgeArg {
    Replace,
    Strip,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "audio")]
    media: Media,
    #[arg(long, default_value_t = 300.0)]
    duration: f64,
    /// Signal-to-noise ratio in dB; `inf` disables noise.
    #[arg(long, default_value_t = 20.0)]
    snr: f64,
    /// Audio sample rate in Hz.
    #[arg(long, default_value_t = 1000.0)]
    rate: f64,
    #[arg(long, default_value_t = 29.97)]
    fps: f64,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, value_enum, default_value = "rolling")]
    shutter: ShutterArg,
    /// Forged segments as `start:end` pairs in seconds, comma separated.
    #[arg(long)]
    forge: Option<String>,
    #[arg(long, value_enum, default_value = "replace")]
    forge_mode: ForgeArg,
    /// Also write the samples as one-column CSV.
    #[arg(long)]
    csv: bool,
    /// Recording device index. Devices share the grid drawn from `--seed`
    /// but pick up independent noise.
    #[arg(long, default_value_t = 0)]
    device: u64,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: Common,
    /// Stream header (`.json`) or one-column sample CSV (`.csv`).
    #[arg(long)]
    input: PathBuf,
    /// Sample rate of a CSV input in Hz.
    #[arg(long)]
    rate: Option<f64>,
    /// Harmonic preset for CSV input: audio {1,2,3}, video {2}.
    #[arg(long, value_enum, default_value = "audio")]
    media: Media,
    #[arg(long, default_value_t = 8.0)]
    window: f64,
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    /// Comma-separated harmonic orders, overriding the preset.
    #[arg(long)]
    harmonics: Option<String>,
}

#[derive(Args)]
struct ConsensusArgs {
    #[command(flatten)]
    common: Common,
    /// Committee size K.
    #[arg(long, default_value_t = 10)]
    committee: usize,
    /// Number of byzantine members, taken from the lowest ids.
    #[arg(long, default_value_t = 3)]
    byzantine: usize,
    /// Byzantine tolerance f; defaults to the largest f with K >= 2f + 3.
    #[arg(long)]
    tolerance: Option<usize>,
    /// Proof vector length d.
    #[arg(long, default_value_t = 720)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    rounds: u64,
    /// honest:<std> | random | offset:<hz> | clone:<hz>[,...] | silent
    #[arg(long, default_value = "offset:1")]
    behavior: String,
    /// Observation noise std of honest members in Hz.
    #[arg(long, default_value_t = 0.001)]
    noise: f64,
    #[arg(long, default_value_t = 360.0)]
    round_duration: f64,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    common: Common,
    /// Local ENF series CSV (`time_s,freq_hz`).
    #[arg(long)]
    local: PathBuf,
    /// Reference ENF series CSV.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 16.0)]
    window: f64,
    #[arg(long, default_value_t = 5.0)]
    shift: f64,
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    threshold: f64,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    common: Common,
    /// Scenario JSON; omitted fields take their defaults. `--seed` replaces
    /// the file's seed.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Committee sizes, comma separated.
    #[arg(long, default_value = "10,20,50,100,200")]
    ks: String,
    #[arg(long, default_value_t = 720)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    trials: usize,
}

#[derive(Args)]
struct RocArgs {
    #[command(flatten)]
    common: Common,
    /// Detection window lengths in seconds, comma separated.
    #[arg(long, default_value = "8,16,32")]
    windows: String,
    #[arg(long, default_value_t = 100)]
    streams: usize,
    #[arg(long, default_value_t = 50)]
    forged: usize,
    #[arg(long, default_value_t = 10.0)]
    snr: f64,
    #[arg(long, default_value_t = 300.0)]
    duration: f64,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|e| invalid(format!("{what} '{x}': {e}"))))
        .collect()
}

fn parse_segments(s: &str) -> Result<Vec<Interval>> {
    s.split(',')
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| invalid(format!("segment '{pair}' is not start:end")))?;
            let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| invalid(format!("segment '{pair}': {e}")));
            Ok(Interval::new(parse(a)?, parse(b)?))
        })
        .collect()
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn roc_csv(roc: &RocCurve) -> String {
    let mut s = String::from("threshold,tpr,fpr\n");
    for p in &roc.points {
        s.push_str(&format!("{},{},{}\n", p.threshold, p.tpr, p.fpr));
    }
    s
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let seed = a.common.seed;
    let grid = GridConfig::default().with_seed(derive_seed(seed, &[1]));
    let truth = gen_enf_truth(&grid, a.duration, 1.0)?;
    let media = match a.media {
        Media::Audio => MediaSpec::Audio { sample_rate_hz: a.rate },
        Media::Video => MediaSpec::Video {
            fps: a.fps,
            frame_height: a.height,
            shutter: match a.shutter {
                ShutterArg::Rolling => Shutter::RollingCmos,
                ShutterArg::Global => Shutter::GlobalCcd,
            },
        },
    };
    let mut stream = media.record(&truth, a.snr, derive_seed(seed, &[2, a.device]))?;
    if let Some(spec) = &a.forge {
        let mode = match a.forge_mode {
            ForgeArg::Replace => ForgeMode::ReplaceEnf {
                grid: grid.with_seed(derive_seed(seed, &[3, a.device])),
            },
            ForgeArg::Strip => ForgeMode::StripEnf {
                seed: derive_seed(seed, &[4, a.device]),
            },
        };
        stream = forge_segments(&stream, &parse_segments(spec)?, &mode)?;
    }
    prepare(&a.common.out)?;
    write_stream(&stream, &a.common.out.join("stream.json"))?;
    fs::write(a.common.out.join("truth.csv"), truth.to_csv())?;
    if a.csv {
        fs::write(a.common.out.join("samples.csv"), samples_csv(&stream))?;
    }
    println!(
        "wrote {:.1} s stream with {} forged segment(s) to {}",
        stream.duration_s(),
        stream.forged_intervals().len(),
        a.common.out.display()
    );
    Ok(())
}

fn estimate(a: &EstimateArgs) -> Result<()> {
    let mut cfg = match a.media {
        Media::Audio => EstimatorConfig::audio_default(),
        Media::Video => EstimatorConfig::video_default(),
    };
    cfg.stft_window_s = a.window;
    cfg.stft_overlap_frac = a.overlap;
    let is_csv = a.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let enf = if is_csv {
        if let Some(h) = &a.harmonics {
            cfg.harmonics = parse_list(h, "harmonic")?;
        }
        let rate = a.rate.ok_or_else(|| invalid("--rate is required for CSV input"))?;
        estimate_samples(&samples_from_csv(&fs::read_to_string(&a.input)?, rate)?, &cfg)?
    } else {
        let stream = read_stream(&a.input)?;
        if matches!(stream, enfnet_core::media_synth::MediaStream::Video(_)) {
            cfg.harmonics = EstimatorConfig::video_default().harmonics;
        }
        if let Some(h) = &a.harmonics {
            cfg.harmonics = parse_list(h, "harmonic")?;
        }
        estimate_enf(&stream, &cfg)?
    };
    prepare(&a.common.out)?;
    fs::write(a.common.out.join("enf.csv"), enf.to_csv())?;
    write_json(&a.common.out.join("enf.json"), &enf)?;
    println!("estimated {} ENF points at {} s spacing", enf.len(), enf.step_s);
    Ok(())
}

fn consensus_sim(a: &ConsensusArgs) -> Result<()> {
    let cfg = CommitteeConfig {
        k: a.committee,
        f: a.tolerance.unwrap_or(a.committee.saturating_sub(3) / 2),
        d: a.dim,
        round_duration_s: a.round_duration,
        nominal_hz: 60.0,
    };
    if a.byzantine > a.committee {
        return Err(invalid(format!(
            "{} byzantine members in a committee of {}",
            a.byzantine, a.committee
        )));
    }
    let byz: Behavior = a.behavior.parse::<Behavior>()?.resized(a.dim);
    let behaviors: Vec<Behavior> = (0..a.committee)
        .map(|i| if i < a.byzantine { byz.clone() } else { Behavior::Honest(a.noise) })
        .collect();
    let (rounds, summary) = simulate(&GridConfig::default(), &behaviors, &cfg, a.rounds, a.common.seed)?;
    prepare(&a.common.out)?;
    let mut lines = String::new();
    for r in &rounds {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    fs::write(a.common.out.join("rounds.jsonl"), lines)?;
    write_json(&a.common.out.join("summary.json"), &summary)?;
    println!(
        "{} rounds: agreement {:.3}, honest winner {:.3}",
        summary.rounds, summary.agreement_rate, summary.honest_win_rate
    );
    Ok(())
}

fn detect(a: &DetectArgs) -> Result<()> {
    let cfg = DetectorConfig {
        window_s: a.window,
        shift_s: a.shift,
        threshold: a.threshold,
    };
    cfg.validate()?;
    let local = EnfSeries::from_csv(&fs::read_to_string(&a.local)?)?;
    let truth = EnfSeries::from_csv(&fs::read_to_string(&a.truth)?)?;
    let report = sliding_window_detect(&local, &truth, &cfg)?;
    prepare(&a.common.out)?;
    write_json(&a.common.out.join("report.json"), &report)?;
    fs::write(a.common.out.join("windows.csv"), report.windows_csv())?;
    println!(
        "{:?}: {} window(s), {} forged interval(s), min corr {:.3}",
        report.overall_verdict,
        report.windows.len(),
        report.forged_intervals.len(),
        report.min_corr()
    );
    Ok(())
}

fn scenario(a: &ScenarioArgs) -> Result<()> {
    let mut cfg: ScenarioConfig = match &a.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => ScenarioConfig::default(),
    };
    cfg.seed = a.common.seed;
    let result = run_scenario(&cfg)?;
    prepare(&a.common.out)?;
    write_json(&a.common.out.join("scenario.json"), &result)?;
    write_json(&a.common.out.join("summary.json"), &result.summary)?;
    fs::write(a.common.out.join("reference.csv"), result.reference.to_csv())?;
    let s = &result.summary;
    println!(
        "TP {} FP {} TN {} FN {}; agreement {:.3}{}",
        s.tp,
        s.fp,
        s.tn,
        s.fn_,
        s.agreement_rate,
        if s.quorum_of_fakes_warning { "; warning: honest members below quorum" } else { "" }
    );
    Ok(())
}

fn bench(a: &BenchArgs) -> Result<()> {
    let ks: Vec<usize> = parse_list(&a.ks, "committee size")?;
    let r = bench_consensus(&ks, a.dim, a.trials, a.common.seed)?;
    prepare(&a.common.out)?;
    write_json(&a.common.out.join("bench.json"), &r)?;
    let mut csv = String::from("k,latency_s,validation_s\n");
    for ((k, l), v) in r.ks.iter().zip(&r.latencies_s).zip(&r.validation_s) {
        csv.push_str(&format!("{k},{l},{v}\n"));
        println!("K = {k:4}: scoring {l:.6} s, admission {v:.6} s");
    }
    fs::write(a.common.out.join("bench.csv"), csv)?;
    println!("log-log slope {:.3} at d = {}", r.slope, r.d);
    Ok(())
}

fn roc(a: &RocArgs) -> Result<()> {
    let windows: Vec<f64> = parse_list(&a.windows, "window")?;
    let cfg = CorpusConfig {
        streams: a.streams,
        forged_streams: a.forged,
        snr_db: a.snr,
        duration_s: a.duration,
        seed: a.common.seed,
        ..CorpusConfig::default()
    };
    let sweep = roc_sweep(&windows, &cfg)?;
    prepare(&a.common.out)?;
    write_json(&a.common.out.join("roc.json"), &sweep)?;
    for e in &sweep.entries {
        fs::write(a.common.out.join(format!("roc_stream_{}.csv", e.window_s)), roc_csv(&e.stream_roc))?;
        if let Some(w) = &e.window_roc {
            fs::write(a.common.out.join(format!("roc_window_{}.csv", e.window_s)), roc_csv(w))?;
        }
        println!(
            "window {:5.1} s: stream AUC {:.4}, window AUC {}",
            e.window_s,
            e.stream_roc.auc,
            e.window_roc.as_ref().map_or("n/a".to_string(), |w| format!("{:.4}", w.auc))
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Estimate(a) => estimate(a),
        Command::ConsensusSim(a) => consensus_sim(a),
        Command::Detect(a) => detect(a),
        Command::Scenario(a) => scenario(a),
        Command::Bench(a) => bench(a),
        Command::Roc(a) => roc(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
