//! Deterministic in-process round driver.
//!
//! Each broadcast transaction reaches every validator twice (the original
//! and a gossip echo) in an order shuffled per validator, so admission
//! exercises duplicate rejection and scoring sees arbitrary arrival order.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{compute_scores, select_ground_truth, Behavior, CommitteeConfig, EnfTransaction, RoundResult, TransactionPool};
use crate::error::{Error, Result};
use crate::media_synth::{gen_enf_truth, GridConfig};
use crate::seed::{derive_seed, rng_for};
use crate::series::EnfSeries;

const TAG_TRUTH: u64 = 11;
const TAG_BEHAVIOR: u64 = 12;
const TAG_NET: u64 = 13;

fn check_behaviors(behaviors: &[Behavior], cfg: &CommitteeConfig) -> Result<()> {
    cfg.validate()?;
    if behaviors.len() != cfg.k {
        return Err(Error::config(format!(
            "{} behaviors given for a committee of {}",
            behaviors.len(),
            cfg.k
        )));
    }
    for b in behaviors {
        b.validate()?;
    }
    let byzantine = behaviors.iter().filter(|b| !b.is_honest()).count();
    if byzantine > cfg.f {
        return Err(Error::config(format!(
            "{byzantine} byzantine validators exceed the tolerance f = {}",
            cfg.f
        )));
    }
    Ok(())
}

/// Runs one round end to end: draws the round's true ENF at `d` points,
/// lets every validator act out its behavior, then has every validator
/// admit, score and select on its own. `grid.seed` is ignored; the truth is
/// keyed by `seed` and `round`.
pub fn run_round(grid: &GridConfig, behaviors: &[Behavior], cfg: &CommitteeConfig, round: u64, seed: u64) -> Result<RoundResult> {
    check_behaviors(behaviors, cfg)?;
    let step = cfg.round_duration_s / cfg.d as f64;
    let truth = gen_enf_truth(
        &grid.with_seed(derive_seed(seed, &[TAG_TRUTH, round])),
        step * (cfg.d - 1) as f64,
        step,
    )?;
    let proofs: Vec<Option<Vec<f64>>> = behaviors
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut rng = rng_for(seed, &[TAG_BEHAVIOR, round, i as u64]);
            b.proof(&truth.values_hz[..cfg.d], cfg.nominal_hz, &mut rng)
        })
        .collect();
    let honest: Vec<bool> = behaviors.iter().map(Behavior::is_honest).collect();
    run_round_with_proofs(cfg, round, &proofs, &honest, round as f64 * cfg.round_duration_s, step, seed)
}

/// Consensus over externally produced proofs. `proofs[i]` is validator
/// `i`'s submission (`None` when it withholds); E* is stamped with
/// `start_time_s` and `step_s`.
pub fn run_round_with_proofs(
    cfg: &CommitteeConfig,
    round: u64,
    proofs: &[Option<Vec<f64>>],
    honest: &[bool],
    start_time_s: f64,
    step_s: f64,
    seed: u64,
) -> Result<RoundResult> {
    cfg.validate()?;
    if proofs.len() != cfg.k || honest.len() != cfg.k {
        return Err(Error::config(format!(
            "round needs one proof slot and one honesty flag per validator ({})",
            cfg.k
        )));
    }
    let sent_at = start_time_s + cfg.round_duration_s;
    let broadcast: Vec<EnfTransaction> = proofs
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            p.as_ref()
                .map(|v| EnfTransaction::new(i, round, v.clone(), sent_at + 1e-3 * i as f64))
        })
        .collect();
    let members = cfg.members();

    let mut views = Vec::with_capacity(cfg.k);
    for v in 0..cfg.k {
        let mut inbox: Vec<&EnfTransaction> = broadcast.iter().chain(&broadcast).collect();
        inbox.shuffle(&mut rng_for(seed, &[TAG_NET, round, v as u64]));
        let mut pool = TransactionPool::new(round);
        for tx in inbox {
            pool.submit(tx.clone(), &members, cfg)?;
        }
        let scores = compute_scores(&pool, cfg)?;
        let (id, enf) = select_ground_truth(&scores, &pool)?;
        views.push((id, enf, scores, pool.len()));
    }

    let reporter = honest.iter().position(|&h| h).unwrap_or(0);
    let honest_agreement = views
        .iter()
        .zip(honest)
        .filter(|(_, &h)| h)
        .all(|(view, _)| view.0 == views[reporter].0 && view.1 == views[reporter].1);
    let (id, enf, scores, pool_size) = views.swap_remove(reporter);
    Ok(RoundResult {
        round,
        ground_truth_id: id,
        ground_truth_enf: EnfSeries::new(start_time_s, step_s, enf)?,
        scores,
        honest_agreement,
        winner_honest: honest[id],
        pool_size,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub rounds: u64,
    pub agreement_rate: f64,
    pub honest_win_rate: f64,
}

/// Runs `rounds` consecutive rounds with fixed behaviors.
pub fn simulate(
    grid: &GridConfig,
    behaviors: &[Behavior],
    cfg: &CommitteeConfig,
    rounds: u64,
    seed: u64,
) -> Result<(Vec<RoundResult>, SimulationSummary)> {
    if rounds == 0 {
        return Err(Error::config("at least one round is required"));
    }
    let results = (0..rounds)
        .map(|r| run_round(grid, behaviors, cfg, r, seed))
        .collect::<Result<Vec<_>>>()?;
    let rate = |pred: fn(&RoundResult) -> bool| results.iter().filter(|r| pred(r)).count() as f64 / rounds as f64;
    let summary = SimulationSummary {
        rounds,
        agreement_rate: rate(|r| r.honest_agreement),
        honest_win_rate: rate(|r| r.winner_honest),
    };
    Ok((results, summary))
}
