//! Independent brute-force references that validate the fast path on small
//! instances: from-scratch objective evaluation, an exhaustive assignment
//! solver, and a queue-free reference greedy.

use std::collections::HashMap;

use crate::config::{AlignmentConfig, SeedMode};
use crate::error::{Result, SigmaError};
use crate::kb::{EntityId, Matching};
use crate::matcher::{exact_seed, s0_candidates, MatchStats, RunResult, StopReason};
use crate::scoring::Scorer;

/// Evaluates the global objective Σ y_ij [(1−α)s_ij + α g_ij(y)] from
/// scratch, with no incremental state.
pub fn objective(scorer: &Scorer, y: &Matching) -> f64 {
    y.pairs()
        .map(|(i, j)| {
            let (_, _, s) = scorer.static_sim(i, j);
            (1.0 - scorer.alpha) * s + scorer.alpha * scorer.graph_score(i, j, y)
        })
        .sum()
}

pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Maximizes the objective over all 1-1 partial mappings with at most
/// `r_bound` pairs, by full enumeration. Only feasible for tiny instances.
pub fn exhaustive_best(scorer: &Scorer, r_bound: usize) -> Result<(Matching, f64)> {
    let n1 = scorer.kb1.num_entities();
    let n2 = scorer.kb2.num_entities();
    if n1 > EXHAUSTIVE_LIMIT || n2 > EXHAUSTIVE_LIMIT {
        return Err(SigmaError::TooLarge(n1.max(n2), EXHAUSTIVE_LIMIT));
    }

    struct Search<'s, 'a> {
        scorer: &'s Scorer<'a>,
        n1: usize,
        n2: usize,
        r_bound: usize,
        used_right: Vec<bool>,
        assignment: Vec<Option<EntityId>>,
        best_value: f64,
        best: Vec<Option<EntityId>>,
    }

    impl Search<'_, '_> {
        fn recurse(&mut self, left: usize, size: usize) {
            if left == self.n1 {
                let y = self.materialize(&self.assignment);
                let v = objective(self.scorer, &y);
                if v > self.best_value {
                    self.best_value = v;
                    self.best = self.assignment.clone();
                }
                return;
            }
            self.assignment[left] = None;
            self.recurse(left + 1, size);
            if size < self.r_bound {
                for j in 0..self.n2 {
                    if self.used_right[j] {
                        continue;
                    }
                    self.used_right[j] = true;
                    self.assignment[left] = Some(EntityId(j as u32));
                    self.recurse(left + 1, size + 1);
                    self.assignment[left] = None;
                    self.used_right[j] = false;
                }
            }
        }

        fn materialize(&self, assignment: &[Option<EntityId>]) -> Matching {
            let mut y = Matching::new(self.n1, self.n2);
            for (i, j) in assignment.iter().enumerate() {
                if let Some(j) = j {
                    y.commit(EntityId(i as u32), *j, 0.0, 0).expect("injective");
                }
            }
            y
        }
    }

    let mut search = Search {
        scorer,
        n1,
        n2,
        r_bound,
        used_right: vec![false; n2],
        assignment: vec![None; n1],
        best_value: 0.0,
        best: vec![None; n1],
    };
    search.recurse(0, 0);
    let best = search.materialize(&search.best);
    let value = search.best_value;
    Ok((best, value))
}

/// Queue-free greedy: rescans and rescores every live candidate pair each
/// iteration. Same seed, suggestion events, and tie rule as the fast
/// matcher, so the commit traces must be identical; the point is that no
/// priority queue or staleness reasoning is involved.
pub fn reference_greedy(
    scorer: &Scorer,
    config: &AlignmentConfig,
    seed_pairs: Option<&[(EntityId, EntityId)]>,
) -> Result<RunResult> {
    let mut matching = Matching::new(scorer.kb1.num_entities(), scorer.kb2.num_entities());
    let mut stats = MatchStats::default();
    let neighbor_proposals = !config.linear;

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
        let score = scorer.pair_score(i, j, &matching).total;
        let iter = matching.len();
        matching.commit(i, j, score, iter)?;
        stats.commits += 1;
    }

    // Candidate set: pair → insertion seq of the suggestion event that
    // last raised its score (mirrors which queue entry would surface).
    let mut candidates: HashMap<(EntityId, EntityId), (f64, u64)> = HashMap::new();
    let mut seq: u64 = 0;
    let suggest = |cands: &mut HashMap<(EntityId, EntityId), (f64, u64)>,
                       seq: &mut u64,
                       pair: (EntityId, EntityId),
                       score: f64| {
        match cands.get_mut(&pair) {
            Some(slot) if score > slot.0 => *slot = (score, *seq),
            Some(_) => {}
            None => {
                cands.insert(pair, (score, *seq));
            }
        }
        *seq += 1;
    };

    if config.use_s0 {
        for (i, j) in s0_candidates(scorer.kb1, scorer.idx1, scorer.idx2) {
            if matching.is_left_matched(i) || matching.is_right_matched(j) {
                continue;
            }
            let score = scorer.pair_score(i, j, &matching).total;
            if score < config.s0_threshold {
                continue;
            }
            suggest(&mut candidates, &mut seq, (i, j), score);
            stats.s0_suggestions += 1;
        }
    }
    if neighbor_proposals {
        let committed: Vec<(EntityId, EntityId)> = matching.pairs().collect();
        for (i, j) in committed {
            for (k, l) in scorer.compatible_neighbors(i, j) {
                if matching.is_left_matched(k) || matching.is_right_matched(l) {
                    continue;
                }
                let score = scorer.pair_score(k, l, &matching).total;
                suggest(&mut candidates, &mut seq, (k, l), score);
                stats.neighbor_suggestions += 1;
            }
        }
    }

    let stopped_reason = loop {
        candidates.retain(|&(i, j), _| {
            !matching.is_left_matched(i) && !matching.is_right_matched(j)
        });
        if candidates.is_empty() {
            break StopReason::QueueEmpty;
        }
        // Rescore every live candidate from scratch.
        let mut best: Option<((EntityId, EntityId), f64, u64)> = None;
        for (&pair, &(_, pair_seq)) in candidates.iter() {
            let score = scorer.pair_score(pair.0, pair.1, &matching).total;
            let better = match best {
                None => true,
                Some((_, bs, bseq)) => {
                    score > bs || (score == bs && pair_seq < bseq)
                }
            };
            if better {
                best = Some((pair, score, pair_seq));
            }
        }
        let ((i, j), score, _) = best.expect("non-empty candidate set");
        if score <= config.stop_threshold {
            break StopReason::Threshold;
        }
        let iter = matching.len();
        matching.commit(i, j, score, iter)?;
        stats.commits += 1;
        candidates.remove(&(i, j));
        if neighbor_proposals {
            for (k, l) in scorer.compatible_neighbors(i, j) {
                if matching.is_left_matched(k) || matching.is_right_matched(l) {
                    continue;
                }
                let score = scorer.pair_score(k, l, &matching).total;
                suggest(&mut candidates, &mut seq, (k, l), score);
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
