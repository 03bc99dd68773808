//! The greedy alignment loop: seed, candidate generation (compatible
//! neighbors plus the static inverted-index list S₀), max-priority queue
//! with lazy deletion, and the threshold stopping rule.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::config::{AlignmentConfig, SeedMode};
use crate::error::Result;
use crate::kb::{EntityId, KnowledgeBase, Matching};
use crate::index::WordIndex;
use crate::scoring::Scorer;

/// One element of the max-priority queue. Entries are never updated in
/// place; stale entries are skipped on pop.
#[derive(Debug, Clone, Copy)]
pub struct CandidateEntry {
    /// Score at insertion time.
    pub key: f64,
    pub pair: (EntityId, EntityId),
    /// Monotone insertion counter; ties on key break toward earlier seq.
    pub seq: u64,
}

impl PartialEq for CandidateEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for CandidateEntry {}

impl Ord for CandidateEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on key, then earlier insertion first.
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
impl PartialOrd for CandidateEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Threshold,
    QueueEmpty,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MatchStats {
    pub pops: u64,
    pub skips: u64,
    pub commits: u64,
    pub s0_suggestions: u64,
    pub neighbor_suggestions: u64,
}

#[derive(Debug)]
pub struct RunResult {
    pub matching: Matching,
    pub stopped_reason: StopReason,
    pub stats: MatchStats,
}

/// Seed pairs whose normalized full label is identical and borne by exactly
/// one entity in each KB.
pub fn exact_seed(
    kb1: &KnowledgeBase,
    kb2: &KnowledgeBase,
    idx1: &WordIndex,
    idx2: &WordIndex,
) -> Vec<(EntityId, EntityId)> {
    let unique_labels = |kb: &KnowledgeBase, idx: &WordIndex| {
        let mut map: HashMap<String, Option<EntityId>> = HashMap::new();
        for e in kb.entities() {
            let label = idx.normalized_label(e);
            if label.is_empty() {
                continue;
            }
            map.entry(label)
                .and_modify(|slot| *slot = None)
                .or_insert(Some(e));
        }
        map
    };
    let left = unique_labels(kb1, idx1);
    let right = unique_labels(kb2, idx2);
    let mut seed: Vec<(EntityId, EntityId)> = left
        .into_iter()
        .filter_map(|(label, e1)| {
            let e1 = e1?;
            let e2 = (*right.get(&label)?)?;
            Some((e1, e2))
        })
        .collect();
    seed.sort_unstable();
    seed
}

/// Cross-KB pairs sharing at least two non-stopword label words, found via
/// the inverted index. Unscored; the caller filters on the S₀ threshold.
pub fn s0_candidates(
    kb1: &KnowledgeBase,
    idx1: &WordIndex,
    idx2: &WordIndex,
) -> Vec<(EntityId, EntityId)> {
    let mut pairs = Vec::new();
    let mut shared: HashMap<EntityId, u32> = HashMap::new();
    for i in kb1.entities() {
        shared.clear();
        for word in idx1.tokens(i) {
            if idx1.is_stopword(word) || idx2.is_stopword(word) {
                continue;
            }
            for &j in idx2.entities_with_word(word) {
                *shared.entry(j).or_insert(0) += 1;
            }
        }
        for (&j, &count) in shared.iter() {
            if count >= 2 {
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Shared per-pair static score cache; static similarity is matching
/// independent so each pair is computed once.
struct StaticCache(HashMap<(EntityId, EntityId), f64>);

impl StaticCache {
    fn get(&mut self, scorer: &Scorer, i: EntityId, j: EntityId) -> f64 {
        *self
            .0
            .entry((i, j))
            .or_insert_with(|| scorer.static_sim(i, j).2)
    }
}

/// Runs the greedy loop. Deterministic given input order and the tie rule.
pub fn run(scorer: &Scorer, config: &AlignmentConfig) -> Result<RunResult> {
    run_with_seed(scorer, config, None)
}

/// Like [`run`] but with an explicit initial matching (seed_mode=file).
pub fn run_with_seed(
    scorer: &Scorer,
    config: &AlignmentConfig,
    seed_pairs: Option<&[(EntityId, EntityId)]>,
) -> Result<RunResult> {
    let mut matching = Matching::new(scorer.kb1.num_entities(), scorer.kb2.num_entities());
    let mut stats = MatchStats::default();
    let mut statics = StaticCache(HashMap::new());
    let neighbor_proposals = !config.linear;

    // Step 1: initial matching m₀, each pair scored against the matching
    // built so far, so the trace sums to the objective.
    let seed = match (config.seed_mode, seed_pairs) {
        (SeedMode::None, _) => Vec::new(),
        (SeedMode::File, Some(pairs)) => pairs.to_vec(),
        (SeedMode::File, None) => Vec::new(),
        (SeedMode::ExactString, _) => exact_seed(scorer.kb1, scorer.kb2, scorer.idx1, scorer.idx2),
    };
    for (i, j) in seed {
        if matching.is_left_matched(i) || matching.is_right_matched(j) {
            continue;
        }
        let s = statics.get(scorer, i, j);
        let score = scorer.pair_score_with_static(i, j, s, &matching);
        let iter = matching.len();
        matching.commit(i, j, score, iter)?;
        stats.commits += 1;
    }

    // Step 2: initialize the queue with S₀ and the compatible neighbors of
    // the seed pairs. Insertion order fixes the tie rule.
    let mut queue: BinaryHeap<CandidateEntry> = BinaryHeap::new();
    let mut seq: u64 = 0;

    if config.use_s0 {
        for (i, j) in s0_candidates(scorer.kb1, scorer.idx1, scorer.idx2) {
            if matching.is_left_matched(i) || matching.is_right_matched(j) {
                continue;
            }
            let s = statics.get(scorer, i, j);
            let score = scorer.pair_score_with_static(i, j, s, &matching);
            if score < config.s0_threshold {
                continue;
            }
            queue.push(CandidateEntry {
                key: score,
                pair: (i, j),
                seq,
            });
            seq += 1;
            stats.s0_suggestions += 1;
        }
    }

    if neighbor_proposals {
        let committed: Vec<(EntityId, EntityId)> =
            matching.pairs().collect();
        for (i, j) in committed {
            for (k, l) in scorer.compatible_neighbors(i, j) {
                if matching.is_left_matched(k) || matching.is_right_matched(l) {
                    continue;
                }
                let s = statics.get(scorer, k, l);
                let score = scorer.pair_score_with_static(k, l, s, &matching);
                queue.push(CandidateEntry {
                    key: score,
                    pair: (k, l),
                    seq,
                });
                seq += 1;
                stats.neighbor_suggestions += 1;
            }
        }
    }

    // Step 3: greedy loop with lazy deletion.
    let stopped_reason = loop {
        let Some(entry) = queue.pop() else {
            break StopReason::QueueEmpty;
        };
        stats.pops += 1;
        if entry.key <= config.stop_threshold {
            break StopReason::Threshold;
        }
        let (i, j) = entry.pair;
        if matching.is_left_matched(i) || matching.is_right_matched(j) {
            stats.skips += 1;
            continue;
        }
        let iter = matching.len();
        matching.commit(i, j, entry.key, iter)?;
        stats.commits += 1;
        if neighbor_proposals {
            for (k, l) in scorer.compatible_neighbors(i, j) {
                if matching.is_left_matched(k) || matching.is_right_matched(l) {
                    continue;
                }
                let s = statics.get(scorer, k, l);
                let score = scorer.pair_score_with_static(k, l, s, &matching);
                queue.push(CandidateEntry {
                    key: score,
                    pair: (k, l),
                    seq,
                });
                seq += 1;
                stats.neighbor_suggestions += 1;
            }
        }
    };

    Ok(RunResult {
        matching,
        stopped_reason,
        stats,
    })
}

/// Linear ablation: α forced to 0 and the neighbor proposal channel
/// disabled, so candidates come only from the seed and S₀.
pub fn run_linear(scorer_linear: &Scorer, config: &AlignmentConfig) -> Result<RunResult> {
    debug_assert_eq!(scorer_linear.alpha, 0.0, "build the scorer with linear=true");
    let mut cfg = config.clone();
    cfg.linear = true;
    run(scorer_linear, &cfg)
}
