use proptest::prelude::*;

use super::*;
use crate::media_synth::GridConfig;

fn cfg(k: usize, f: usize, d: usize) -> CommitteeConfig {
    CommitteeConfig {
        k,
        f,
        d,
        round_duration_s: d as f64,
        nominal_hz: 60.0,
    }
}

/// Pool built directly, bypassing admission, so tests may use any values.
fn pool_of(vectors: &[Vec<f64>]) -> TransactionPool {
    let mut pool = TransactionPool::new(0);
    for (i, v) in vectors.iter().enumerate() {
        pool.entries.insert(i, EnfTransaction::new(i, 0, v.clone(), 0.0));
    }
    pool
}

/// Minimum over every subset of `m` other proofs of the summed squared
/// distances, found by exhaustive enumeration.
fn brute_force_score(vectors: &[Vec<f64>], i: usize, m: usize) -> f64 {
    let others: Vec<f64> = (0..vectors.len())
        .filter(|&j| j != i)
        .map(|j| vectors[i].iter().zip(&vectors[j]).map(|(a, b)| (a - b).powi(2)).sum())
        .collect();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << others.len()) {
        if mask.count_ones() as usize == m {
            let s: f64 = (0..others.len()).filter(|b| mask >> b & 1 == 1).map(|b| others[b]).sum();
            best = best.min(s);
        }
    }
    best
}

fn tx(id: usize, round: u64) -> EnfTransaction {
    EnfTransaction::new(id, round, vec![60.0, 60.01, 59.99], 1.0)
}

#[test]
fn admission_rules() {
    let c = cfg(5, 1, 3);
    let members = c.members();
    let mut pool = TransactionPool::new(4);
    assert_eq!(validate_transaction(&tx(0, 4), &members, &pool, 4, &c).unwrap(), Admission::Accept);
    assert_eq!(pool.submit(tx(0, 4), &members, &c).unwrap(), Admission::Accept);
    assert_eq!(
        pool.submit(tx(0, 4), &members, &c).unwrap(),
        Admission::Reject(RejectReason::Duplicate)
    );
    assert_eq!(
        pool.submit(tx(1, 3), &members, &c).unwrap(),
        Admission::Reject(RejectReason::StaleRound)
    );
    assert_eq!(
        pool.submit(tx(1, 5), &members, &c).unwrap(),
        Admission::Reject(RejectReason::StaleRound)
    );
    assert_eq!(
        pool.submit(tx(5, 4), &members, &c).unwrap(),
        Admission::Reject(RejectReason::NotMember)
    );
    let malformed = [
        EnfTransaction::new(2, 4, vec![60.0, 60.0], 1.0),
        EnfTransaction::new(2, 4, vec![60.0, 61.5, 60.0], 1.0),
        EnfTransaction::new(2, 4, vec![60.0, f64::NAN, 60.0], 1.0),
        EnfTransaction { sig: 3, ..tx(2, 4) },
    ];
    for m in malformed {
        assert_eq!(
            pool.submit(m, &members, &c).unwrap(),
            Admission::Reject(RejectReason::Malformed)
        );
    }
    assert_eq!(pool.len(), 1);
    assert!(validate_transaction(&tx(1, 4), &members, &pool, 5, &c).is_err());
}

#[test]
fn membership_is_checked_before_round_and_duplicates() {
    let c = cfg(5, 1, 3);
    let mut pool = TransactionPool::new(1);
    pool.submit(tx(0, 1), &c.members(), &c).unwrap();
    let stale_duplicate = tx(0, 0);
    assert_eq!(
        validate_transaction(&stale_duplicate, &c.members(), &pool, 1, &c).unwrap(),
        Admission::Reject(RejectReason::StaleRound)
    );
    assert_eq!(
        validate_transaction(&tx(9, 0), &c.members(), &pool, 1, &c).unwrap(),
        Admission::Reject(RejectReason::NotMember)
    );
}

#[test]
fn identical_proofs_score_zero() {
    let pool = pool_of(&vec![vec![60.0, 60.02]; 6]);
    let t = compute_scores(&pool, &cfg(6, 1, 2)).unwrap();
    assert!(t.scores.values().all(|&s| s == 0.0));
    assert_eq!(select_ground_truth(&t, &pool).unwrap().0, 0);
}

#[test]
fn outlier_scores_above_every_inlier() {
    let vectors = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0], vec![10.0, 10.0]];
    let pool = pool_of(&vectors);
    let t = compute_scores(&pool, &cfg(5, 0, 2)).unwrap();
    for i in 0..5 {
        assert_eq!(t.scores[&i], brute_force_score(&vectors, i, 3));
    }
    assert!((0..4).all(|i| t.scores[&4] > t.scores[&i]));
    let (id, enf) = select_ground_truth(&t, &pool).unwrap();
    assert!(id < 4);
    assert_eq!(enf, vec![0.0, 0.0]);
}

#[test]
fn quorum_is_enforced() {
    let three = pool_of(&vec![vec![60.0, 60.0]; 3]);
    assert!(compute_scores(&three, &cfg(3, 0, 2)).is_ok());
    assert!(matches!(
        compute_scores(&three, &cfg(5, 1, 2)),
        Err(Error::InsufficientQuorum { have: 3, need: 5 })
    ));
    let four = pool_of(&vec![vec![60.0, 60.0]; 4]);
    assert!(compute_scores(&four, &cfg(5, 1, 2)).is_err());
    assert!(cfg(4, 1, 2).validate().is_err());
    assert!(cfg(5, 1, 1).validate().is_err());
}

#[test]
fn selection_tie_breaks_and_edge_cases() {
    let pool = pool_of(&[vec![60.0, 60.0], vec![60.1, 60.1]]);
    let mut t = ScoreTable {
        round: 0,
        scores: [(1, 0.5), (0, 0.5)].into_iter().collect(),
    };
    assert_eq!(select_ground_truth(&t, &pool).unwrap().0, 0);
    t.scores.remove(&0);
    assert_eq!(select_ground_truth(&t, &pool).unwrap(), (1, vec![60.1, 60.1]));
    t.scores.clear();
    assert!(select_ground_truth(&t, &pool).is_err());
}

proptest! {
    #[test]
    fn scores_match_brute_force(
        vectors in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 5..9),
        f in 0usize..3,
    ) {
        let n = vectors.len();
        prop_assume!(n >= 2 * f + 3);
        let t = compute_scores(&pool_of(&vectors), &cfg(n, f, 3)).unwrap();
        for i in 0..n {
            let expected = brute_force_score(&vectors, i, n - f - 2);
            prop_assert!((t.scores[&i] - expected).abs() <= 1e-9 * expected.max(1.0));
        }
    }

    #[test]
    fn insertion_order_and_labels_do_not_matter(
        vectors in prop::collection::vec(prop::collection::vec(59.5f64..60.5, 4), 7..10),
        perm_seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let n = vectors.len();
        let c = cfg(n, 2, 4);
        let reference = compute_scores(&pool_of(&vectors), &c).unwrap();

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut crate::seed::rng_for(perm_seed, &[]));
        let mut pool = TransactionPool::new(0);
        for &i in &order {
            pool.submit(EnfTransaction::new(i, 0, vectors[i].clone(), 0.0), &c.members(), &c).unwrap();
        }
        let shuffled = compute_scores(&pool, &c).unwrap();
        prop_assert_eq!(&shuffled, &reference);
        prop_assert_eq!(
            select_ground_truth(&shuffled, &pool).unwrap(),
            select_ground_truth(&reference, &pool_of(&vectors)).unwrap()
        );

        // relabel: validator order[i] now submits vectors[i]
        let mut relabeled = TransactionPool::new(0);
        for (i, &id) in order.iter().enumerate() {
            relabeled.entries.insert(id, EnfTransaction::new(id, 0, vectors[i].clone(), 0.0));
        }
        let r = compute_scores(&relabeled, &c).unwrap();
        for (i, &id) in order.iter().enumerate() {
            prop_assert_eq!(r.scores[&id], reference.scores[&i]);
        }
    }

    #[test]
    fn moving_away_never_lowers_the_score(
        vectors in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 5..8),
        dir in prop::collection::vec(-1.0f64..1.0, 2),
        step in 0.01f64..5.0,
    ) {
        let n = vectors.len();
        let c = cfg(n, 1, 2);
        let before = compute_scores(&pool_of(&vectors), &c).unwrap().scores[&0];
        let mut moved = vectors.clone();
        moved[0] = vec![vectors[0][0] + step * dir[0], vectors[0][1] + step * dir[1]];
        let dist = |a: &[f64], b: &[f64]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        prop_assume!((1..n).all(|j| dist(&moved[0], &vectors[j]) > dist(&vectors[0], &vectors[j])));
        let after = compute_scores(&pool_of(&moved), &c).unwrap().scores[&0];
        prop_assert!(after >= before);
    }
}

fn behaviors(byzantine: &[Behavior], k: usize, noise: f64) -> Vec<Behavior> {
    (0..k)
        .map(|i| byzantine.get(i).cloned().unwrap_or(Behavior::Honest(noise)))
        .collect()
}

#[test]
fn noiseless_committee_picks_validator_zero() {
    let c = CommitteeConfig::default();
    let r = run_round(&GridConfig::default(), &behaviors(&[], 10, 0.0), &c, 0, 5).unwrap();
    assert!(r.scores.scores.values().all(|&s| s == 0.0));
    assert_eq!(r.ground_truth_id, 0);
    assert!(r.honest_agreement && r.winner_honest);
    assert_eq!(r.pool_size, 10);
    assert_eq!(r.ground_truth_enf.len(), c.d);
    assert_eq!(r.ground_truth_enf.step_s, 0.5);
}

#[test]
fn offset_byzantines_never_win() {
    let c = CommitteeConfig::default();
    let b = behaviors(&vec![Behavior::OffsetVector(1.0); 3], 10, 0.001);
    let (results, summary) = simulate(&GridConfig::default(), &b, &c, 1000, 77).unwrap();
    assert_eq!(results.len(), 1000);
    assert_eq!(summary.agreement_rate, 1.0);
    assert_eq!(summary.honest_win_rate, 1.0);
    assert!(results.iter().all(|r| r.ground_truth_id >= 3));
}

#[test]
fn colluding_clones_far_from_the_honest_cluster_are_never_selected() {
    let c = cfg(10, 3, 120);
    let clone = Behavior::ColludingClone(vec![60.4; 120]);
    let b = behaviors(&vec![clone; 3], 10, 0.002);
    let grid = GridConfig::default();
    for seed in 0..1000 {
        let r = run_round(&grid, &b, &c, 0, seed).unwrap();
        assert!(r.winner_honest, "seed {seed}");
        assert!(r.honest_agreement);
    }
    // premise: the truth stays within max_dev of nominal, so the clone sits
    // at least this far from it; the honest spread is the expected pairwise
    // distance between two noisy proofs
    let far = (0.4 - grid.max_dev_hz) * (120.0f64).sqrt();
    let spread = 0.002 * (2.0 * 120.0f64).sqrt();
    assert!(far > 10.0 * spread);
}

#[test]
fn random_and_silent_byzantines_are_tolerated() {
    let c = CommitteeConfig::default();
    let b = behaviors(&[Behavior::Silent, Behavior::RandomVector, Behavior::RandomVector], 10, 0.001);
    for seed in 0..20 {
        let r = run_round(&GridConfig::default(), &b, &c, seed, seed).unwrap();
        assert_eq!(r.pool_size, 9);
        assert!(r.honest_agreement && r.winner_honest);
        assert!(!r.scores.scores.contains_key(&0));
    }
}

#[test]
fn malformed_clones_are_dropped() {
    let c = CommitteeConfig::default();
    let b = behaviors(&[Behavior::ColludingClone(vec![60.0; 3])], 10, 0.001);
    let r = run_round(&GridConfig::default(), &b, &c, 0, 1).unwrap();
    assert_eq!(r.pool_size, 9);
}

#[test]
fn too_many_byzantines_or_silences() {
    let c = CommitteeConfig::default();
    let grid = GridConfig::default();
    let four = behaviors(&vec![Behavior::RandomVector; 4], 10, 0.001);
    assert!(run_round(&grid, &four, &c, 0, 0).unwrap_err().is_config_error());
    assert!(run_round(&grid, &behaviors(&[], 9, 0.001), &c, 0, 0).is_err());
    // three silent members leave 7 proofs, short of the 9 the rule needs
    let silent = behaviors(&vec![Behavior::Silent; 3], 10, 0.001);
    assert!(matches!(
        run_round(&grid, &silent, &c, 0, 0),
        Err(Error::InsufficientQuorum { have: 7, need: 9 })
    ));
}

#[test]
fn rounds_are_deterministic_in_seed() {
    let c = cfg(7, 2, 50);
    let b = behaviors(&[Behavior::RandomVector, Behavior::OffsetVector(-0.5)], 7, 0.003);
    let grid = GridConfig::default();
    let a = simulate(&grid, &b, &c, 5, 9).unwrap();
    let again = simulate(&grid, &b, &c, 5, 9).unwrap();
    assert_eq!(serde_json::to_string(&a.0).unwrap(), serde_json::to_string(&again.0).unwrap());
    let other = simulate(&grid, &b, &c, 5, 10).unwrap();
    assert_ne!(a.0, other.0);
}
