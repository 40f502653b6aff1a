//! Proof-of-ENF committee consensus.
//!
//! Every round, each committee validator broadcasts an ENF transaction
//! carrying its proof vector. Validators admit transactions into a
//! per-round pool, score every pooled proof by its squared distance to its
//! nearest peers and adopt the lowest-scoring proof as the round's ground
//! truth E*.

mod behavior;
mod network;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use behavior::Behavior;
pub use network::{run_round, run_round_with_proofs, simulate, SimulationSummary};

use crate::error::{Error, Result};
use crate::series::EnfSeries;

/// Half-width of the admissible proof range around the nominal frequency.
pub const PROOF_RANGE_HZ: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CommitteeConfig {
    /// Committee size.
    pub k: usize,
    /// Byzantine members tolerated.
    pub f: usize,
    /// Proof vector length.
    pub d: usize,
    pub round_duration_s: f64,
    pub nominal_hz: f64,
}

impl Default for CommitteeConfig {
    fn default() -> Self {
        Self {
            k: 10,
            f: 3,
            d: 720,
            round_duration_s: 360.0,
            nominal_hz: 60.0,
        }
    }
}

impl CommitteeConfig {
    /// Smallest pool the scoring rule accepts.
    pub fn quorum(&self) -> usize {
        2 * self.f + 3
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < self.quorum() {
            return Err(Error::config(format!(
                "committee of {} cannot tolerate f = {}: need K >= 2f + 3 = {}",
                self.k,
                self.f,
                self.quorum()
            )));
        }
        if self.d < 2 {
            return Err(Error::config(format!("proof length d must be at least 2, got {}", self.d)));
        }
        if !(self.round_duration_s > 0.0 && self.round_duration_s.is_finite()) {
            return Err(Error::config("round_duration_s must be positive"));
        }
        if !(self.nominal_hz > 0.0 && self.nominal_hz.is_finite()) {
            return Err(Error::config("committee nominal_hz must be positive"));
        }
        Ok(())
    }

    pub fn members(&self) -> BTreeSet<usize> {
        (0..self.k).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnfTransaction {
    pub validator_id: usize,
    pub round: u64,
    pub enf_vector: Vec<f64>,
    pub timestamp_s: f64,
    /// Stand-in for a signature: the sender echoes its own id.
    pub sig: usize,
}

impl EnfTransaction {
    pub fn new(validator_id: usize, round: u64, enf_vector: Vec<f64>, timestamp_s: f64) -> Self {
        Self {
            validator_id,
            round,
            enf_vector,
            timestamp_s,
            sig: validator_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransactionPool {
    pub round: u64,
    pub entries: BTreeMap<usize, EnfTransaction>,
}

impl TransactionPool {
    pub fn new(round: u64) -> Self {
        Self {
            round,
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Validates `tx` and pools it on acceptance.
    pub fn submit(&mut self, tx: EnfTransaction, members: &BTreeSet<usize>, cfg: &CommitteeConfig) -> Result<Admission> {
        let verdict = validate_transaction(&tx, members, self, self.round, cfg)?;
        if verdict == Admission::Accept {
            self.entries.insert(tx.validator_id, tx);
        }
        Ok(verdict)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RejectReason {
    NotMember,
    StaleRound,
    Duplicate,
    Malformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Admission {
    Accept,
    Reject(RejectReason),
}

/// Admission check for one transaction. Checks run in order: membership,
/// round, duplicate, then shape and range of the proof.
pub fn validate_transaction(
    tx: &EnfTransaction,
    members: &BTreeSet<usize>,
    pool: &TransactionPool,
    current_round: u64,
    cfg: &CommitteeConfig,
) -> Result<Admission> {
    if pool.round != current_round {
        return Err(Error::invalid(format!(
            "pool belongs to round {}, not the current round {current_round}",
            pool.round
        )));
    }
    let reject = |r| Ok(Admission::Reject(r));
    if !members.contains(&tx.validator_id) {
        return reject(RejectReason::NotMember);
    }
    if tx.round != current_round {
        return reject(RejectReason::StaleRound);
    }
    if pool.entries.contains_key(&tx.validator_id) {
        return reject(RejectReason::Duplicate);
    }
    let (lo, hi) = (cfg.nominal_hz - PROOF_RANGE_HZ, cfg.nominal_hz + PROOF_RANGE_HZ);
    let in_range = tx.enf_vector.iter().all(|v| v.is_finite() && (lo..=hi).contains(v));
    if tx.enf_vector.len() != cfg.d || !in_range || tx.sig != tx.validator_id || !tx.timestamp_s.is_finite() {
        return reject(RejectReason::Malformed);
    }
    Ok(Admission::Accept)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub round: u64,
    /// Squared distances in Hz².
    pub scores: BTreeMap<usize, f64>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Scores each pooled proof by the summed squared distance to its
/// `n - f - 2` nearest other proofs.
pub fn compute_scores(pool: &TransactionPool, cfg: &CommitteeConfig) -> Result<ScoreTable> {
    let n = pool.len();
    if n < cfg.quorum() {
        return Err(Error::InsufficientQuorum {
            have: n,
            need: cfg.quorum(),
        });
    }
    let proofs: Vec<&[f64]> = pool.entries.values().map(|tx| tx.enf_vector.as_slice()).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = squared_distance(proofs[i], proofs[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let neighbours = n - cfg.f - 2;
    let mut row = Vec::with_capacity(n - 1);
    let scores = pool
        .entries
        .keys()
        .enumerate()
        .map(|(i, &id)| {
            row.clear();
            row.extend((0..n).filter(|&j| j != i).map(|j| dist[i * n + j]));
            row.sort_by(f64::total_cmp);
            (id, row[..neighbours].iter().sum())
        })
        .collect();
    Ok(ScoreTable { round: pool.round, scores })
}

/// Lowest score wins; equal scores go to the lowest validator id.
pub fn select_ground_truth(scores: &ScoreTable, pool: &TransactionPool) -> Result<(usize, Vec<f64>)> {
    let (&id, _) = scores
        .scores
        .iter()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(b.0)))
        .ok_or_else(|| Error::invalid("cannot select a ground truth from an empty score table"))?;
    let tx = pool
        .entries
        .get(&id)
        .ok_or_else(|| Error::invalid(format!("validator {id} is scored but not pooled")))?;
    Ok((id, tx.enf_vector.clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub round: u64,
    pub ground_truth_id: usize,
    pub ground_truth_enf: EnfSeries,
    pub scores: ScoreTable,
    /// Every honest validator derived the same winner and E*.
    pub honest_agreement: bool,
    /// The winning proof came from an honest validator.
    pub winner_honest: bool,
    pub pool_size: usize,
}

#[cfg(test)]
mod tests;
