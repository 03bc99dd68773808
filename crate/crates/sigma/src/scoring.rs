//! Similarity computations: static string and property scores, graph
//! normalizations, neighbor weights, and the incremental pair score.

use std::collections::HashMap;

use crate::config::{AlignmentConfig, NeighborWeightMode, ResolvedMapping, SimKind, Smoothing};
use crate::error::Result;
use crate::index::{auto_smoothing, tokenize, PropertyValueWeights, WordIndex};
use crate::kb::{EntityId, KnowledgeBase, Literal, Matching, PropertyId, RelationId};

/// Breakdown of one pair score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParts {
    pub string_sim: f64,
    pub prop_sim: f64,
    /// (1−β)·string + β·prop
    pub static_sim: f64,
    /// δg: matching-dependent increment, both directions.
    pub graph_inc: f64,
    /// (1−α)·static + α·δg
    pub total: f64,
}

/// Per-entity graph normalization for one KB: γ_e = ½·(1 + Σ_k w_ek)⁻¹ and
/// the collapsed per-neighbor weights w_ek.
///
/// Neighbors are distinct entities; when several relations link e to k the
/// weight enters once using the max rule.
#[derive(Debug)]
pub struct GraphNorms {
    gamma: Vec<f64>,
    /// Per entity: (neighbor, w_ek), sorted by neighbor id.
    weights: Vec<Vec<(EntityId, f64)>>,
}

impl GraphNorms {
    pub fn build(kb: &KnowledgeBase, mode: NeighborWeightMode) -> GraphNorms {
        // In inverse mode, w_ik = max over relations r linking i→k of
        // 1 / |{i' : (i',r,k) ∈ 𝓕_R}|.
        let in_count: HashMap<(RelationId, EntityId), u32> = match mode {
            NeighborWeightMode::Uniform => HashMap::new(),
            NeighborWeightMode::Inverse => {
                let mut counts = HashMap::new();
                for &(_, r, k) in kb.rel_facts() {
                    *counts.entry((r, k)).or_insert(0) += 1;
                }
                counts
            }
        };

        let n = kb.num_entities();
        let mut gamma = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for e in kb.entities() {
            let mut per_neighbor: Vec<(EntityId, f64)> = Vec::new();
            for &(r, k) in kb.adjacency(e) {
                let w = match mode {
                    NeighborWeightMode::Uniform => 1.0,
                    NeighborWeightMode::Inverse => 1.0 / f64::from(in_count[&(r, k)]),
                };
                per_neighbor.push((k, w));
            }
            per_neighbor.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
            per_neighbor.dedup_by_key(|p| p.0);
            let sum: f64 = per_neighbor.iter().map(|p| p.1).sum();
            gamma.push(0.5 / (1.0 + sum));
            weights.push(per_neighbor);
        }
        GraphNorms { gamma, weights }
    }

    pub fn gamma(&self, e: EntityId) -> f64 {
        self.gamma[e.0 as usize]
    }

    /// w_ek for a linked pair; `None` when k is not a neighbor of e.
    pub fn weight(&self, e: EntityId, k: EntityId) -> Option<f64> {
        let list = &self.weights[e.0 as usize];
        list.binary_search_by(|p| p.0.cmp(&k)).ok().map(|i| list[i].1)
    }
}

/// Literal similarity for the year and exact kinds. The string kind needs
/// property-local IDF weights and lives on [`Scorer`].
pub fn literal_sim_basic(v: &Literal, l: &Literal, kind: SimKind) -> f64 {
    match kind {
        SimKind::Year => match (v.year(), l.year()) {
            (Some(a), Some(b)) => {
                if a == b {
                    1.0
                } else {
                    0.0
                }
            }
            _ => {
                eprintln!("warning: unparseable year in {v:?} / {l:?}; scoring 0");
                0.0
            }
        },
        SimKind::Exact => {
            if v == l {
                1.0
            } else {
                0.0
            }
        }
        SimKind::String => unreachable!("string kind requires property context"),
    }
}

/// All pair-level similarity computations over two immutable KBs and their
/// indexes. Pure reads; safe to call concurrently as long as the matching
/// is not mutated underneath.
pub struct Scorer<'a> {
    pub kb1: &'a KnowledgeBase,
    pub kb2: &'a KnowledgeBase,
    pub idx1: &'a WordIndex,
    pub idx2: &'a WordIndex,
    pub pvw1: &'a PropertyValueWeights,
    pub pvw2: &'a PropertyValueWeights,
    pub mapping: &'a ResolvedMapping,
    pub norms1: GraphNorms,
    pub norms2: GraphNorms,
    pub alpha: f64,
    pub beta: f64,
    pub smoothing: f64,
}

impl<'a> Scorer<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kb1: &'a KnowledgeBase,
        kb2: &'a KnowledgeBase,
        idx1: &'a WordIndex,
        idx2: &'a WordIndex,
        pvw1: &'a PropertyValueWeights,
        pvw2: &'a PropertyValueWeights,
        mapping: &'a ResolvedMapping,
        config: &AlignmentConfig,
    ) -> Result<Scorer<'a>> {
        let smoothing = match config.smoothing {
            Smoothing::Auto => auto_smoothing(kb1, kb2)?,
            Smoothing::Fixed(s) => s,
        };
        let alpha = if config.linear { 0.0 } else { config.alpha };
        Ok(Scorer {
            kb1,
            kb2,
            idx1,
            idx2,
            pvw1,
            pvw2,
            mapping,
            norms1: GraphNorms::build(kb1, config.neighbor_weight_mode),
            norms2: GraphNorms::build(kb2, config.neighbor_weight_mode),
            alpha,
            beta: config.beta,
            smoothing,
        })
    }

    /// Smoothed weighted Jaccard over label words:
    /// Σ_{v∈𝓦_i∩𝓦_j}(w¹_v + w²_v) / (smoothing + Σ w¹ + Σ w²).
    pub fn string_sim(&self, i: EntityId, j: EntityId) -> f64 {
        let ti = self.idx1.tokens(i);
        let tj = self.idx2.tokens(j);
        let mut num = 0.0;
        let (mut a, mut b) = (0, 0);
        while a < ti.len() && b < tj.len() {
            match ti[a].cmp(&tj[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    num += self.idx1.weight(&ti[a]).unwrap_or(0.0)
                        + self.idx2.weight(&tj[b]).unwrap_or(0.0);
                    a += 1;
                    b += 1;
                }
            }
        }
        let den = self.smoothing + self.idx1.weight_sum(i) + self.idx2.weight_sum(j);
        if den <= 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// Literal similarity, dispatching on the configured kind. For the
    /// string kind, IDF weights come from the values of the two matched
    /// properties only.
    pub fn literal_sim(
        &self,
        p1: PropertyId,
        p2: PropertyId,
        v: &Literal,
        l: &Literal,
        kind: SimKind,
    ) -> f64 {
        match kind {
            SimKind::Year | SimKind::Exact => literal_sim_basic(v, l, kind),
            SimKind::String => {
                let tv = tokenize(&v.as_text());
                let tl = tokenize(&l.as_text());
                let n1 = self.pvw1.entities_with_property(p1);
                let n2 = self.pvw2.entities_with_property(p2);
                if n1 == 0 || n2 == 0 {
                    return 0.0;
                }
                let smoothing = (n1 as f64).log10() + (n2 as f64).log10();
                let w1 = |t: &str| self.pvw1.word_weight(p1, t).unwrap_or(0.0);
                let w2 = |t: &str| self.pvw2.word_weight(p2, t).unwrap_or(0.0);
                let mut num = 0.0;
                for t in &tv {
                    if tl.contains(t) {
                        num += w1(t) + w2(t);
                    }
                }
                let den = smoothing
                    + tv.iter().map(|t| w1(t)).sum::<f64>()
                    + tl.iter().map(|t| w2(t)).sum::<f64>();
                if den <= 0.0 {
                    0.0
                } else {
                    num / den
                }
            }
        }
    }

    /// Smoothed weighted Jaccard over matched property values. All value
    /// cross pairs of matched properties enter the numerator; the
    /// denominator sums every property-fact weight of both entities once.
    pub fn property_sim(&self, i: EntityId, j: EntityId) -> f64 {
        let facts1 = self.kb1.prop_facts_of(i);
        let facts2 = self.kb2.prop_facts_of(j);
        if facts1.is_empty() && facts2.is_empty() {
            return 0.0;
        }
        let mut num = 0.0;
        for &(p1, p2, kind) in &self.mapping.matched_properties {
            for (pa, va) in facts1.iter().filter(|(p, _)| *p == p1) {
                for (qb, lb) in facts2.iter().filter(|(q, _)| *q == p2) {
                    let sim = self.literal_sim(p1, p2, va, lb, kind);
                    if sim > 0.0 {
                        num += (self.pvw1.weight(*pa, va) + self.pvw2.weight(*qb, lb)) * sim;
                    }
                }
            }
        }
        let den = 2.0 + self.pvw1.weight_sum(i) + self.pvw2.weight_sum(j);
        num / den
    }

    /// s_ij = (1−β)·string + β·prop.
    pub fn static_sim(&self, i: EntityId, j: EntityId) -> (f64, f64, f64) {
        let s = self.string_sim(i, j);
        let p = self.property_sim(i, j);
        (s, p, (1.0 - self.beta) * s + self.beta * p)
    }

    pub fn gamma1(&self, e: EntityId) -> f64 {
        self.norms1.gamma(e)
    }

    pub fn gamma2(&self, e: EntityId) -> f64 {
        self.norms2.gamma(e)
    }

    /// Cross-KB neighbor pairs reachable via a matched relation pair,
    /// duplicate-free, sorted.
    pub fn compatible_neighbors(&self, i: EntityId, j: EntityId) -> Vec<(EntityId, EntityId)> {
        let mut out = Vec::new();
        for &(r, k) in self.kb1.adjacency(i) {
            for &s in self.mapping.partners_of(r) {
                for &(_, l) in self.kb2.neighbors_via(j, s) {
                    out.push((k, l));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// True iff (k, l) ∈ compatible-neighbors(i, j).
    fn linked(&self, i: EntityId, j: EntityId, k: EntityId, l: EntityId) -> bool {
        for &(r, k2) in self.kb1.adjacency(i) {
            if k2 != k {
                continue;
            }
            for &s in self.mapping.partners_of(r) {
                if self.kb2.has_rel_fact(j, s, l) {
                    return true;
                }
            }
        }
        false
    }

    /// Matched compatible-neighbor pairs of (i, j), duplicate-free. Walks
    /// the matching from i's side, so cost is O(deg(i)) probes.
    fn matched_neighbor_pairs(&self, i: EntityId, j: EntityId, y: &Matching) -> Vec<(EntityId, EntityId)> {
        let mut pairs = Vec::new();
        for &(r, k) in self.kb1.adjacency(i) {
            let Some(l) = y.forward(k) else { continue };
            for &s in self.mapping.partners_of(r) {
                if self.kb2.has_rel_fact(j, s, l) {
                    pairs.push((k, l));
                    break;
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// g_ij(y) = Σ_{(k,l)∈N_ij} y_kl (γ_i w_ik + γ_j w_jl), in [0,1].
    pub fn graph_score(&self, i: EntityId, j: EntityId, y: &Matching) -> f64 {
        let gi = self.norms1.gamma(i);
        let gj = self.norms2.gamma(j);
        self.matched_neighbor_pairs(i, j, y)
            .into_iter()
            .map(|(k, l)| {
                gi * self.norms1.weight(i, k).unwrap_or(0.0)
                    + gj * self.norms2.weight(j, l).unwrap_or(0.0)
            })
            .sum()
    }

    /// δg_ij(y): the full objective increment, counting both the new
    /// pair's own graph score and the increase it brings to its already
    /// matched neighbors.
    pub fn graph_increment(&self, i: EntityId, j: EntityId, y: &Matching) -> f64 {
        let gi = self.norms1.gamma(i);
        let gj = self.norms2.gamma(j);
        self.matched_neighbor_pairs(i, j, y)
            .into_iter()
            .map(|(k, l)| {
                gi * self.norms1.weight(i, k).unwrap_or(0.0)
                    + gj * self.norms2.weight(j, l).unwrap_or(0.0)
                    + self.norms1.gamma(k) * self.norms1.weight(k, i).unwrap_or(0.0)
                    + self.norms2.gamma(l) * self.norms2.weight(l, j).unwrap_or(0.0)
            })
            .sum()
    }

    /// score(i,j;y) = (1−α)·s_ij + α·δg_ij(y), with the full breakdown.
    pub fn pair_score(&self, i: EntityId, j: EntityId, y: &Matching) -> ScoreParts {
        let (string_sim, prop_sim, static_sim) = self.static_sim(i, j);
        let graph_inc = if self.alpha == 0.0 {
            0.0
        } else {
            self.graph_increment(i, j, y)
        };
        ScoreParts {
            string_sim,
            prop_sim,
            static_sim,
            graph_inc,
            total: (1.0 - self.alpha) * static_sim + self.alpha * graph_inc,
        }
    }

    /// Like `pair_score` but reusing a cached static similarity.
    pub fn pair_score_with_static(&self, i: EntityId, j: EntityId, static_sim: f64, y: &Matching) -> f64 {
        let graph_inc = if self.alpha == 0.0 {
            0.0
        } else {
            self.graph_increment(i, j, y)
        };
        (1.0 - self.alpha) * static_sim + self.alpha * graph_inc
    }

    /// Debug check used by tests: `linked` agrees with the cross-product
    /// definition of compatible-neighbors.
    pub fn is_compatible_neighbor(&self, i: EntityId, j: EntityId, k: EntityId, l: EntityId) -> bool {
        self.linked(i, j, k, l)
    }
}
