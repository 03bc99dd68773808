//! Randomized invariant checks over the core data structures.

mod common;

use std::collections::{BinaryHeap, HashMap, HashSet};

use proptest::prelude::*;

use sigma::eval::{self, Commit};
use sigma::index::tokenize;
use sigma::kb::{EntityId, Literal, Matching};
use sigma::matcher::CandidateEntry;

proptest! {
    /// Tokenization is idempotent: re-tokenizing the joined tokens changes
    /// nothing, and every token is lowercase alphanumeric.
    #[test]
    fn tokenize_idempotent(raw in ".{0,60}") {
        let first = tokenize(&raw);
        for t in &first {
            prop_assert!(!t.is_empty());
            prop_assert!(t.chars().all(|c| c.is_alphanumeric() && !c.is_uppercase()));
        }
        let rejoined = first.join(" ");
        prop_assert_eq!(tokenize(&rejoined), first);
    }

    /// Tokens are distinct within one label.
    #[test]
    fn tokenize_deduplicates(raw in ".{0,60}") {
        let tokens = tokenize(&raw);
        let set: HashSet<&String> = tokens.iter().collect();
        prop_assert_eq!(set.len(), tokens.len());
    }

    /// A matching stays injective in both directions no matter the commit
    /// order; commits touching a used endpoint are rejected.
    #[test]
    fn matching_stays_one_to_one(pairs in prop::collection::vec((0u32..20, 0u32..20), 0..40)) {
        let mut m = Matching::new(20, 20);
        let mut used_left = HashSet::new();
        let mut used_right = HashSet::new();
        for (it, &(i, j)) in pairs.iter().enumerate() {
            let free = !used_left.contains(&i) && !used_right.contains(&j);
            let r = m.commit(EntityId(i), EntityId(j), 1.0, it);
            prop_assert_eq!(r.is_ok(), free);
            if free {
                used_left.insert(i);
                used_right.insert(j);
            }
        }
        prop_assert_eq!(m.len(), used_left.len());
        for (i, j) in m.pairs() {
            prop_assert_eq!(m.forward(i), Some(j));
            prop_assert_eq!(m.backward(j), Some(i));
        }
    }

    /// The candidate heap pops the highest key, breaking ties by the
    /// earliest insertion sequence.
    #[test]
    fn candidate_heap_order(keys in prop::collection::vec(0u32..8, 1..50)) {
        let mut heap = BinaryHeap::new();
        for (seq, &k) in keys.iter().enumerate() {
            heap.push(CandidateEntry {
                key: f64::from(k) / 8.0,
                pair: (EntityId(0), EntityId(0)),
                seq: seq as u64,
            });
        }
        let mut prev: Option<CandidateEntry> = None;
        while let Some(e) = heap.pop() {
            if let Some(p) = prev {
                prop_assert!(p.key >= e.key);
                if p.key == e.key {
                    prop_assert!(p.seq < e.seq);
                }
            }
            prev = Some(e);
        }
    }

    /// Precision, recall and F stay in [0,1]; the counts are consistent.
    #[test]
    fn eval_report_ranges(
        pred in prop::collection::hash_map(0u32..30, 0u32..30, 0..20),
        gt in prop::collection::hash_map(0u32..30, 0u32..30, 1..20),
    ) {
        let r = eval::evaluate(&pred, &gt).unwrap();
        for v in [r.precision, r.recall, r.f_measure] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(r.correct <= r.predicted.min(r.gt_size));
        prop_assert_eq!(r.gt_size, gt.len());
    }

    /// In the threshold sweep, recall never increases as the threshold
    /// rises, and every row stays in range.
    #[test]
    fn sweep_recall_monotone(
        scores in prop::collection::vec(0.0f64..1.0, 1..40),
        gt_keys in prop::collection::vec(0u32..40, 1..20),
    ) {
        let trace: Vec<Commit<u32, u32>> = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| Commit { left: i as u32, right: i as u32, score: s })
            .collect();
        let gt: HashMap<u32, u32> = gt_keys.iter().map(|&k| (k, k)).collect();
        let (rows, best) = eval::pr_sweep(&trace, &gt).unwrap();
        prop_assert!(best < rows.len());
        for w in rows.windows(2) {
            prop_assert!(w[0].threshold >= w[1].threshold);
            prop_assert!(w[0].recall <= w[1].recall);
        }
        for row in &rows {
            for v in [row.precision, row.recall, row.f_measure] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    /// Integer strings parse as integers, ISO dates as dates, everything
    /// else stays a plain string.
    #[test]
    fn literal_parse_cases(n in any::<i64>(), y in 1i32..3000, m in 1u8..13, d in 1u8..29) {
        prop_assert_eq!(Literal::parse(&n.to_string()), Literal::Int(n));
        prop_assert_eq!(
            Literal::parse(&format!("{y:04}-{m:02}-{d:02}")),
            Literal::Date { year: y, month: Some(m), day: Some(d) }
        );
        prop_assert_eq!(
            Literal::parse("not a number"),
            Literal::Str("not a number".to_string())
        );
    }
}

/// Neighbor compatibility is symmetric under swapping the committed pair
/// with the proposed one, on generated instances.
#[test]
fn compatible_neighbors_symmetry() {
    for seed in 0..10u64 {
        let inst = common::varied_instance(seed);
        let scorer = inst.scorer();
        for i in inst.kb1.entities().take(10) {
            for j in inst.kb2.entities().take(10) {
                for (k, l) in scorer.compatible_neighbors(i, j) {
                    assert!(
                        scorer.is_compatible_neighbor(i, j, k, l),
                        "seed {seed}: proposed pair not compatible"
                    );
                    assert!(
                        scorer.compatible_neighbors(k, l).contains(&(i, j)),
                        "seed {seed}: compatibility not symmetric"
                    );
                }
            }
        }
    }
}
