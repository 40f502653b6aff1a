use std::collections::BTreeSet;
use std::hint::black_box;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::consensus::{compute_scores, select_ground_truth, Behavior, CommitteeConfig, EnfTransaction, TransactionPool};
use crate::error::{Error, Result};
use crate::media_synth::{gen_enf_truth, GridConfig};
use crate::seed::{derive_seed, rng_for};

/// Each timed sample repeats the operation until at least this much time
/// has passed.
const MIN_SAMPLE: Duration = Duration::from_millis(20);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub ks: Vec<usize>,
    pub d: usize,
    pub trials: usize,
    /// Median seconds for scoring plus selection over a full pool, per K.
    pub latencies_s: Vec<f64>,
    /// Median seconds to admit all K transactions into an empty pool, per K.
    pub validation_s: Vec<f64>,
    pub slope: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("slope fit needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("slope fit needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit needs at least two distinct x values"));
    }
    Ok(sxy / sxx)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Seconds per call of `op`, averaged over enough calls to fill one sample.
fn time_per_call(mut op: impl FnMut()) -> f64 {
    let start = Instant::now();
    let mut calls = 0u64;
    while calls == 0 || start.elapsed() < MIN_SAMPLE {
        op();
        calls += 1;
    }
    start.elapsed().as_secs_f64() / calls as f64
}

fn honest_transactions(k: usize, d: usize, seed: u64) -> Result<Vec<EnfTransaction>> {
    let truth = gen_enf_truth(&GridConfig::default().with_seed(derive_seed(seed, &[31])), (d - 1) as f64 * 0.5, 0.5)?;
    (0..k)
        .map(|i| {
            let mut rng = rng_for(seed, &[32, i as u64]);
            let v = Behavior::Honest(0.001)
                .proof(&truth.values_hz, 60.0, &mut rng)
                .expect("honest validators always submit");
            Ok(EnfTransaction::new(i, 0, v, 0.0))
        })
        .collect()
}

/// Times scoring plus selection on a pre-filled pool for each committee
/// size, and admission separately; reports medians over `trials` and the
/// log-log slope of scoring latency against K.
pub fn bench_consensus(ks: &[usize], d: usize, trials: usize, seed: u64) -> Result<BenchResult> {
    let distinct: BTreeSet<usize> = ks.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(Error::config("benchmark needs at least two distinct committee sizes"));
    }
    if trials < 3 {
        return Err(Error::config(format!("benchmark needs at least 3 trials, got {trials}")));
    }
    let mut latencies = Vec::with_capacity(ks.len());
    let mut validation = Vec::with_capacity(ks.len());
    for &k in ks {
        let cfg = CommitteeConfig {
            k,
            f: (k.max(3) - 3) / 2,
            d,
            round_duration_s: d as f64 * 0.5,
            nominal_hz: 60.0,
        };
        cfg.validate()?;
        let txs = honest_transactions(k, d, seed)?;
        let members = cfg.members();
        let admit = || -> Result<TransactionPool> {
            let mut pool = TransactionPool::new(0);
            for tx in &txs {
                pool.submit(tx.clone(), &members, &cfg)?;
            }
            Ok(pool)
        };
        let pool = admit()?;
        let mut score_samples = Vec::with_capacity(trials);
        let mut admit_samples = Vec::with_capacity(trials);
        for _ in 0..trials {
            score_samples.push(time_per_call(|| {
                let scores = compute_scores(black_box(&pool), &cfg).expect("full pool meets quorum");
                black_box(select_ground_truth(&scores, &pool).expect("non-empty table"));
            }));
            admit_samples.push(time_per_call(|| {
                black_box(admit().expect("honest transactions are admissible"));
            }));
        }
        latencies.push(median(score_samples));
        validation.push(median(admit_samples));
    }
    let xs: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let slope = fit_log_log_slope(&xs, &latencies)?;
    Ok(BenchResult {
        ks: ks.to_vec(),
        d,
        trials,
        latencies_s: latencies,
        validation_s: validation,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_fit_recovers_power_laws() {
        let xs = [10.0, 20.0, 50.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3e-6 * x.powf(2.0)).collect();
        assert!((fit_log_log_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(fit_log_log_slope(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(fit_log_log_slope(&[1.0, 2.0], &[0.0, 3.0]).is_err());
    }

    #[test]
    fn bench_rejects_degenerate_requests() {
        assert!(bench_consensus(&[10], 16, 3, 0).is_err());
        assert!(bench_consensus(&[10, 10], 16, 3, 0).is_err());
        assert!(bench_consensus(&[10, 20], 16, 2, 0).is_err());
    }

    #[test]
    fn small_bench_runs() {
        let r = bench_consensus(&[5, 10], 32, 3, 1).unwrap();
        assert_eq!(r.latencies_s.len(), 2);
        assert!(r.latencies_s.iter().chain(&r.validation_s).all(|&t| t > 0.0));
        assert!(r.slope.is_finite());
    }
}
