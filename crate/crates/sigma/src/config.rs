//! Cross-KB alignment configuration: matched relation and property pairs
//! plus all tunable parameters with their standard defaults.

use std::collections::HashSet;

use crate::error::{Result, SigmaError};
use crate::kb::{KnowledgeBase, PropertyId, RelationId};

/// Literal similarity dispatch for a matched property pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimKind {
    /// Equal iff the year components agree.
    Year,
    /// Equal after type-aware normalization.
    Exact,
    /// Weighted Jaccard on words with property-local IDF weights.
    String,
}

impl SimKind {
    pub fn parse(s: &str) -> Result<SimKind> {
        match s {
            "year" => Ok(SimKind::Year),
            "exact" => Ok(SimKind::Exact),
            "string" => Ok(SimKind::String),
            other => Err(SigmaError::Config(format!(
                "unknown literal similarity kind {other:?} (expected year|exact|string)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborWeightMode {
    Uniform,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    ExactString,
    File,
    None,
}

/// Smoothing constant for the string similarity denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    /// log₁₀|𝓔₁| + log₁₀|𝓔₂|, the sum of the maximum possible word weights.
    Auto,
    Fixed(f64),
}

/// A matched property pair by name, with its literal similarity kind.
#[derive(Debug, Clone)]
pub struct PropertyPair {
    pub left: String,
    pub right: String,
    pub kind: SimKind,
}

/// Matched relation/property mapping plus tunable parameters.
///
/// Relation pairs are kept by name; [`ResolvedMapping`] binds them to ids
/// once both KBs are loaded. The pair set is closed under inversion by
/// construction of the id scheme (see `ResolvedMapping::matched`).
#[derive(Debug, Clone)]
pub struct AlignmentConfig {
    pub matched_relations: Vec<(String, String)>,
    pub matched_properties: Vec<PropertyPair>,
    /// Label property name per KB.
    pub label_properties: Option<(String, String)>,

    pub alpha: f64,
    pub beta: f64,
    pub stop_threshold: f64,
    pub s0_threshold: f64,
    pub smoothing: Smoothing,
    pub neighbor_weight_mode: NeighborWeightMode,
    pub seed_mode: SeedMode,
    /// Disable the inverted-index candidate list S₀.
    pub use_s0: bool,
    /// Linear mode: α forced to 0 and neighbor proposals disabled.
    pub linear: bool,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        AlignmentConfig {
            matched_relations: Vec::new(),
            matched_properties: Vec::new(),
            label_properties: None,
            alpha: 1.0 / 3.0,
            beta: 0.25,
            stop_threshold: 0.25,
            s0_threshold: 0.75,
            smoothing: Smoothing::Auto,
            neighbor_weight_mode: NeighborWeightMode::Uniform,
            seed_mode: SeedMode::ExactString,
            use_s0: true,
            linear: false,
        }
    }
}

impl AlignmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(SigmaError::Config(format!("alpha {} not in [0,1]", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(SigmaError::Config(format!("beta {} not in [0,1]", self.beta)));
        }
        if self.stop_threshold < 0.0 {
            return Err(SigmaError::Config(format!(
                "stop_threshold {} must be ≥ 0",
                self.stop_threshold
            )));
        }
        if let Smoothing::Fixed(s) = self.smoothing {
            if s < 0.0 {
                return Err(SigmaError::Config(format!("smoothing {s} must be ≥ 0")));
            }
        }
        Ok(())
    }
}

/// Mapping resolved against two loaded KBs: relation pairs as id pairs
/// (closed under inversion), property pairs as id pairs with sim kinds.
#[derive(Debug)]
pub struct ResolvedMapping {
    /// (r₁, r₂) pairs including inverses.
    pairs: HashSet<(RelationId, RelationId)>,
    /// For each KB1 relation id, the KB2 relation ids it is matched to.
    pairs_by_left: Vec<Vec<RelationId>>,
    pub matched_properties: Vec<(PropertyId, PropertyId, SimKind)>,
}

impl ResolvedMapping {
    pub fn resolve(config: &AlignmentConfig, kb1: &KnowledgeBase, kb2: &KnowledgeBase) -> Self {
        let mut pairs = HashSet::new();
        for (n1, n2) in &config.matched_relations {
            if let (Some(r1), Some(r2)) = (kb1.relation(n1), kb2.relation(n2)) {
                pairs.insert((r1, r2));
                pairs.insert((r1.inverse(), r2.inverse()));
            }
        }
        let mut pairs_by_left = vec![Vec::new(); kb1.num_relations()];
        for &(r1, r2) in &pairs {
            pairs_by_left[r1.0 as usize].push(r2);
        }
        for v in &mut pairs_by_left {
            v.sort_unstable();
        }
        let mut matched_properties = Vec::new();
        for pp in &config.matched_properties {
            if let (Some(p1), Some(p2)) = (kb1.property(&pp.left), kb2.property(&pp.right)) {
                matched_properties.push((p1, p2, pp.kind));
            }
        }
        ResolvedMapping {
            pairs,
            pairs_by_left,
            matched_properties,
        }
    }

    pub fn matched(&self, r1: RelationId, r2: RelationId) -> bool {
        self.pairs.contains(&(r1, r2))
    }

    /// KB2 relations matched to a KB1 relation.
    pub fn partners_of(&self, r1: RelationId) -> &[RelationId] {
        &self.pairs_by_left[r1.0 as usize]
    }

    pub fn relation_pairs(&self) -> impl Iterator<Item = &(RelationId, RelationId)> {
        self.pairs.iter()
    }
}
