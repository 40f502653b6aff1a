use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sample_on_grid, MediaSpec};
use crate::consensus::{run_round_with_proofs, Behavior, CommitteeConfig, RoundResult};
use crate::detection::{sliding_window_detect, DetectionReport, DetectorConfig, Verdict};
use crate::enf_estimation::{estimate_enf, EstimatorConfig};
use crate::error::{Error, Result};
use crate::media_synth::{forge_segments, gen_enf_truth, ForgeMode, GridConfig, Interval};
use crate::seed::{derive_seed, rng_for};
use crate::series::EnfSeries;

const TAG_GRID: u64 = 21;
const TAG_RECORDING: u64 = 22;
const TAG_FORGERY: u64 = 23;
const TAG_BYZANTINE: u64 = 24;
const TAG_ROUND: u64 = 25;

/// One simulated conference. Participants `0..committee.k` form the
/// committee; its last `byzantine` members submit proofs per
/// `byzantine_behavior` instead of their own estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub participants: usize,
    pub byzantine: usize,
    pub deepfaked_participants: Vec<usize>,
    pub grid: GridConfig,
    pub estimator: EstimatorConfig,
    pub detector: DetectorConfig,
    pub committee: CommitteeConfig,
    pub rounds: usize,
    pub seed: u64,
    pub media: MediaSpec,
    pub snr_db: f64,
    /// Length of the single ReplaceEnf segment injected into each deepfaked
    /// stream.
    pub forged_segment_s: f64,
    pub byzantine_behavior: Behavior,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            participants: 10,
            byzantine: 0,
            deepfaked_participants: Vec::new(),
            grid: GridConfig::default(),
            estimator: EstimatorConfig::default().short_frames(),
            detector: DetectorConfig::default(),
            committee: CommitteeConfig {
                k: 10,
                f: 3,
                d: 60,
                round_duration_s: 60.0,
                nominal_hz: 60.0,
            },
            rounds: 5,
            seed: 0,
            media: MediaSpec::default(),
            snr_db: 20.0,
            forged_segment_s: 30.0,
            byzantine_behavior: Behavior::OffsetVector(1.0),
        }
    }
}

impl ScenarioConfig {
    /// Seconds of media each participant records.
    pub fn duration_s(&self) -> f64 {
        self.rounds as f64 * self.committee.round_duration_s + self.estimator.stft_window_s
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.estimator.validate()?;
        self.detector.validate()?;
        self.committee.validate()?;
        self.byzantine_behavior.validate()?;
        if self.participants == 0 {
            return Err(Error::config("a scenario needs at least one participant"));
        }
        if self.committee.k > self.participants {
            return Err(Error::config(format!(
                "committee of {} exceeds the {} participants",
                self.committee.k, self.participants
            )));
        }
        if self.byzantine > self.committee.f {
            return Err(Error::config(format!(
                "{} byzantine members exceed the tolerance f = {}",
                self.byzantine, self.committee.f
            )));
        }
        let unique: BTreeSet<usize> = self.deepfaked_participants.iter().copied().collect();
        if unique.len() != self.deepfaked_participants.len() {
            return Err(Error::config("deepfaked participant ids repeat"));
        }
        if let Some(&id) = unique.iter().find(|&&id| id >= self.participants) {
            return Err(Error::config(format!(
                "deepfaked participant {id} does not exist ({} participants)",
                self.participants
            )));
        }
        if self.rounds == 0 {
            return Err(Error::config("at least one round is required"));
        }
        if self.snr_db.is_nan() {
            return Err(Error::config("snr_db must be a number"));
        }
        if !self.deepfaked_participants.is_empty()
            && !(self.forged_segment_s > 0.0 && self.forged_segment_s + 20.0 <= self.duration_s())
        {
            return Err(Error::config(format!(
                "forged segment of {} s does not fit a {} s stream with 10 s margins",
                self.forged_segment_s,
                self.duration_s()
            )));
        }
        Ok(())
    }

    fn is_byzantine(&self, id: usize) -> bool {
        id < self.committee.k && id + self.byzantine >= self.committee.k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantOutcome {
    pub id: usize,
    pub deepfaked: bool,
    pub byzantine: bool,
    pub injected: Vec<Interval>,
    pub report: DetectionReport,
}

/// Stream-level confusion counts; deepfaked is the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub agreement_rate: f64,
    pub honest_win_rate: f64,
    /// Some round had fewer honest committee members than the scoring
    /// rule's quorum.
    pub quorum_of_fakes_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub rounds: Vec<RoundResult>,
    /// Per-round ground truths joined end to end.
    pub reference: EnfSeries,
    pub participants: Vec<ParticipantOutcome>,
    pub summary: ScenarioSummary,
}

/// Every participant records the shared grid, deepfaked ones have a segment
/// re-synthesized, committee members submit their estimates round by round,
/// and each stream is then checked against the joined ground truths.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let duration = cfg.duration_s();
    let grid = cfg.grid.with_seed(derive_seed(cfg.seed, &[TAG_GRID]));
    let truth = gen_enf_truth(&grid, duration, 1.0)?;
    let deepfaked: BTreeSet<usize> = cfg.deepfaked_participants.iter().copied().collect();

    let d = cfg.committee.d;
    let step = cfg.committee.round_duration_s / d as f64;
    let t0 = truth.start_time_s + 0.5 * cfg.estimator.stft_window_s;
    let total = cfg.rounds * d;

    let mut local = Vec::with_capacity(cfg.participants);
    let mut injected = Vec::with_capacity(cfg.participants);
    for id in 0..cfg.participants {
        let mut stream = cfg.media.record(&truth, cfg.snr_db, derive_seed(cfg.seed, &[TAG_RECORDING, id as u64]))?;
        let mut segs = Vec::new();
        if deepfaked.contains(&id) {
            let mut rng = rng_for(cfg.seed, &[TAG_FORGERY, id as u64]);
            let latest = (duration - cfg.forged_segment_s - 10.0).floor().max(10.0) as u64;
            let start = rng.random_range(10..=latest) as f64;
            let seg = Interval::new(start, start + cfg.forged_segment_s);
            let fake_grid = cfg.grid.with_seed(derive_seed(cfg.seed, &[TAG_FORGERY, id as u64, 1]));
            stream = forge_segments(&stream, &[seg], &ForgeMode::ReplaceEnf { grid: fake_grid })?;
            segs.push(seg);
        }
        let est = estimate_enf(&stream, &cfg.estimator)?;
        local.push(sample_on_grid(&est, t0, step, total)?);
        injected.push(segs);
    }

    let mut rounds = Vec::with_capacity(cfg.rounds);
    let mut reference = Vec::with_capacity(total);
    let mut min_honest = cfg.committee.k;
    for r in 0..cfg.rounds {
        let span = r * d..(r + 1) * d;
        // a deepfaked member's proof is honest in rounds its forgery misses
        let round_span = Interval::new(t0 + span.start as f64 * step, t0 + span.end as f64 * step);
        let honest: Vec<bool> = (0..cfg.committee.k)
            .map(|id| !cfg.is_byzantine(id) && injected[id].iter().all(|seg| seg.overlap(&round_span) <= 0.0))
            .collect();
        min_honest = min_honest.min(honest.iter().filter(|&&h| h).count());
        let proofs: Vec<Option<Vec<f64>>> = (0..cfg.committee.k)
            .map(|id| {
                let own = &local[id][span.clone()];
                if cfg.is_byzantine(id) {
                    let mut rng = rng_for(cfg.seed, &[TAG_BYZANTINE, r as u64, id as u64]);
                    cfg.byzantine_behavior
                        .clone()
                        .resized(d)
                        .proof(own, cfg.committee.nominal_hz, &mut rng)
                } else {
                    Some(own.to_vec())
                }
            })
            .collect();
        let result = run_round_with_proofs(
            &cfg.committee,
            r as u64,
            &proofs,
            &honest,
            t0 + span.start as f64 * step,
            step,
            derive_seed(cfg.seed, &[TAG_ROUND]),
        )?;
        reference.extend_from_slice(&result.ground_truth_enf.values_hz);
        rounds.push(result);
    }
    let reference = EnfSeries::new(t0, step, reference)?;

    let mut participants = Vec::with_capacity(cfg.participants);
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (id, (values, segs)) in local.into_iter().zip(injected).enumerate() {
        let series = EnfSeries::new(t0, step, values)?;
        let report = sliding_window_detect(&series, &reference, &cfg.detector)?;
        let flagged = report.overall_verdict == Verdict::Fake;
        let fake = deepfaked.contains(&id);
        match (fake, flagged) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fn_ += 1,
        }
        participants.push(ParticipantOutcome {
            id,
            deepfaked: fake,
            byzantine: cfg.is_byzantine(id),
            injected: segs,
            report,
        });
    }
    let n_rounds = rounds.len() as f64;
    let summary = ScenarioSummary {
        tp,
        fp,
        tn,
        fn_,
        agreement_rate: rounds.iter().filter(|r| r.honest_agreement).count() as f64 / n_rounds,
        honest_win_rate: rounds.iter().filter(|r| r.winner_honest).count() as f64 / n_rounds,
        quorum_of_fakes_warning: min_honest < cfg.committee.quorum(),
    };
    Ok(ScenarioResult {
        rounds,
        reference,
        participants,
        summary,
    })
}
