//! In-memory model of a knowledge base: interned entities, typed literals,
//! relation facts with inverse closure, property facts, and the mutable
//! 1-1 partial matching built by the aligner.

use std::collections::{HashMap, HashSet};

use crate::error::{Result, SigmaError};

/// Dense per-KB entity index. Indices are contiguous from 0 within one KB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(pub u32);

/// Relation id. Forward relations get even ids; the synthesized inverse of
/// relation `r` is always `r ^ 1`, so inversion is an involution by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationId(pub u32);

impl RelationId {
    pub fn inverse(self) -> RelationId {
        RelationId(self.0 ^ 1)
    }

    pub fn is_forward(self) -> bool {
        self.0.is_multiple_of(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropertyId(pub u32);

/// Typed literal value. Raw strings parse as integer first, then as an ISO
/// date (YYYY[-MM[-DD]]), else stay strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Int(i64),
    Date {
        year: i32,
        month: Option<u8>,
        day: Option<u8>,
    },
    Str(String),
}

impl Literal {
    pub fn parse(raw: &str) -> Literal {
        let trimmed = raw.trim();
        if let Ok(n) = trimmed.parse::<i64>() {
            return Literal::Int(n);
        }
        if let Some(date) = parse_iso_date(trimmed) {
            return date;
        }
        Literal::Str(trimmed.to_string())
    }

    /// Year component, when one can be extracted.
    pub fn year(&self) -> Option<i32> {
        match self {
            Literal::Int(n) => i32::try_from(*n).ok(),
            Literal::Date { year, .. } => Some(*year),
            Literal::Str(_) => None,
        }
    }

    pub fn as_text(&self) -> String {
        match self {
            Literal::Int(n) => n.to_string(),
            Literal::Date { year, month, day } => {
                let mut s = format!("{year:04}");
                if let Some(m) = month {
                    s.push_str(&format!("-{m:02}"));
                    if let Some(d) = day {
                        s.push_str(&format!("-{d:02}"));
                    }
                }
                s
            }
            Literal::Str(s) => s.clone(),
        }
    }
}

fn parse_iso_date(s: &str) -> Option<Literal> {
    let mut parts = s.splitn(3, '-');
    let year: i32 = parts.next()?.parse().ok()?;
    let month = match parts.next() {
        Some(m) => {
            let m: u8 = m.parse().ok()?;
            if !(1..=12).contains(&m) {
                return None;
            }
            Some(m)
        }
        None => None,
    };
    let day = match parts.next() {
        Some(d) => {
            let d: u8 = d.parse().ok()?;
            if !(1..=31).contains(&d) {
                return None;
            }
            Some(d)
        }
        None => None,
    };
    // A bare number without dashes is an integer, not a date.
    month?;
    Some(Literal::Date { year, month, day })
}

/// A knowledge base: entities, literals, relation facts (closed under
/// inversion), property facts, and per-entity adjacency.
///
/// Construction is single-writer; once built the structure is read-only and
/// shareable across threads.
#[derive(Debug, Default)]
pub struct KnowledgeBase {
    entity_ids: Vec<String>,
    entity_index: HashMap<String, u32>,

    /// Forward relation names; `relation_names[r]` is the declared name for
    /// even r and the synthesized `name⁻¹` for odd r.
    relation_names: Vec<String>,
    relation_index: HashMap<String, u32>,

    property_names: Vec<String>,
    property_index: HashMap<String, u32>,

    rel_facts: HashSet<(EntityId, RelationId, EntityId)>,
    /// Per-entity adjacency, both directions: `(relation, neighbor)`.
    adjacency: Vec<Vec<(RelationId, EntityId)>>,
    adjacency_sorted: bool,

    prop_fact_set: HashSet<(EntityId, PropertyId, Literal)>,
    prop_facts: Vec<Vec<(PropertyId, Literal)>>,

    /// Designated main string-representation property.
    label_property: Option<String>,
    /// First label value seen per entity.
    labels: Vec<Option<String>>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        KnowledgeBase::default()
    }

    pub fn num_entities(&self) -> usize {
        self.entity_ids.len()
    }

    /// Interns a surface identifier, returning the same dense id on repeats.
    pub fn intern_entity(&mut self, surface_id: &str) -> EntityId {
        if let Some(&idx) = self.entity_index.get(surface_id) {
            return EntityId(idx);
        }
        let idx = self.entity_ids.len() as u32;
        self.entity_ids.push(surface_id.to_string());
        self.entity_index.insert(surface_id.to_string(), idx);
        self.adjacency.push(Vec::new());
        self.prop_facts.push(Vec::new());
        self.labels.push(None);
        EntityId(idx)
    }

    pub fn entity(&self, surface_id: &str) -> Option<EntityId> {
        self.entity_index.get(surface_id).map(|&i| EntityId(i))
    }

    pub fn surface_id(&self, e: EntityId) -> &str {
        &self.entity_ids[e.0 as usize]
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> + '_ {
        (0..self.entity_ids.len() as u32).map(EntityId)
    }

    /// Declares a forward relation; the inverse id is reserved alongside it.
    pub fn declare_relation(&mut self, name: &str) -> RelationId {
        if let Some(&idx) = self.relation_index.get(name) {
            return RelationId(idx);
        }
        let idx = self.relation_names.len() as u32;
        debug_assert!(idx.is_multiple_of(2));
        self.relation_names.push(name.to_string());
        self.relation_names.push(format!("{name}⁻¹"));
        self.relation_index.insert(name.to_string(), idx);
        RelationId(idx)
    }

    pub fn relation(&self, name: &str) -> Option<RelationId> {
        self.relation_index.get(name).map(|&i| RelationId(i))
    }

    pub fn relation_name(&self, r: RelationId) -> &str {
        &self.relation_names[r.0 as usize]
    }

    pub fn num_relations(&self) -> usize {
        self.relation_names.len()
    }

    pub fn declare_property(&mut self, name: &str) -> PropertyId {
        if let Some(&idx) = self.property_index.get(name) {
            return PropertyId(idx);
        }
        let idx = self.property_names.len() as u32;
        self.property_names.push(name.to_string());
        self.property_index.insert(name.to_string(), idx);
        PropertyId(idx)
    }

    pub fn property(&self, name: &str) -> Option<PropertyId> {
        self.property_index.get(name).map(|&i| PropertyId(i))
    }

    pub fn property_name(&self, p: PropertyId) -> &str {
        &self.property_names[p.0 as usize]
    }

    pub fn num_properties(&self) -> usize {
        self.property_names.len()
    }

    /// Adds `(e, r, e2)` and its inverse `(e2, r⁻¹, e)`; duplicates are
    /// silently ignored. `r` must be a declared forward relation.
    pub fn add_rel_fact(&mut self, e: EntityId, r: RelationId, e2: EntityId) -> Result<()> {
        if !r.is_forward() || r.0 as usize >= self.relation_names.len() {
            return Err(SigmaError::Config(format!(
                "unknown or non-forward relation id {}",
                r.0
            )));
        }
        if !self.rel_facts.insert((e, r, e2)) {
            return Ok(());
        }
        self.rel_facts.insert((e2, r.inverse(), e));
        self.adjacency[e.0 as usize].push((r, e2));
        self.adjacency[e2.0 as usize].push((r.inverse(), e));
        self.adjacency_sorted = false;
        Ok(())
    }

    /// Adds a property fact; duplicates are silently ignored.
    pub fn add_prop_fact(&mut self, e: EntityId, p: PropertyId, value: Literal) {
        if self.prop_fact_set.insert((e, p, value.clone())) {
            self.prop_facts[e.0 as usize].push((p, value));
        }
    }

    pub fn set_label_property(&mut self, name: &str) {
        self.label_property = Some(name.to_string());
    }

    pub fn label_property(&self) -> Option<&str> {
        self.label_property.as_deref()
    }

    /// Records the label of `e`; the first value seen wins.
    pub fn set_label(&mut self, e: EntityId, value: &str) {
        let slot = &mut self.labels[e.0 as usize];
        if slot.is_none() {
            *slot = Some(value.to_string());
        }
    }

    pub fn label(&self, e: EntityId) -> Option<&str> {
        self.labels[e.0 as usize].as_deref()
    }

    pub fn has_rel_fact(&self, e: EntityId, r: RelationId, e2: EntityId) -> bool {
        self.rel_facts.contains(&(e, r, e2))
    }

    pub fn num_rel_facts(&self) -> usize {
        self.rel_facts.len()
    }

    pub fn rel_facts(&self) -> impl Iterator<Item = &(EntityId, RelationId, EntityId)> {
        self.rel_facts.iter()
    }

    /// Sorts adjacency lists so `neighbors_via` can binary-search. Called
    /// automatically by index construction.
    pub fn finalize(&mut self) {
        if !self.adjacency_sorted {
            for adj in &mut self.adjacency {
                adj.sort_unstable();
            }
            self.adjacency_sorted = true;
        }
        for facts in &mut self.prop_facts {
            facts.sort();
        }
    }

    pub fn adjacency(&self, e: EntityId) -> &[(RelationId, EntityId)] {
        &self.adjacency[e.0 as usize]
    }

    /// Neighbors of `e` reachable via relation `r`. Requires `finalize`.
    pub fn neighbors_via(&self, e: EntityId, r: RelationId) -> &[(RelationId, EntityId)] {
        debug_assert!(self.adjacency_sorted);
        let adj = &self.adjacency[e.0 as usize];
        let lo = adj.partition_point(|&(rel, _)| rel < r);
        let hi = adj.partition_point(|&(rel, _)| rel <= r);
        &adj[lo..hi]
    }

    pub fn prop_facts_of(&self, e: EntityId) -> &[(PropertyId, Literal)] {
        &self.prop_facts[e.0 as usize]
    }
}

/// Trace row: the committed pair with its score and iteration number.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub left: EntityId,
    pub right: EntityId,
    pub score: f64,
}

/// Mutable 1-1 partial mapping between the two entity sets. `forward` and
/// `backward` stay mutual inverses at all times.
#[derive(Debug, Clone)]
pub struct Matching {
    forward: Vec<Option<EntityId>>,
    backward: Vec<Option<EntityId>>,
    trace: Vec<TraceEntry>,
}

impl Matching {
    pub fn new(n1: usize, n2: usize) -> Self {
        Matching {
            forward: vec![None; n1],
            backward: vec![None; n2],
            trace: Vec::new(),
        }
    }

    pub fn forward(&self, i: EntityId) -> Option<EntityId> {
        self.forward[i.0 as usize]
    }

    pub fn backward(&self, j: EntityId) -> Option<EntityId> {
        self.backward[j.0 as usize]
    }

    pub fn is_left_matched(&self, i: EntityId) -> bool {
        self.forward[i.0 as usize].is_some()
    }

    pub fn is_right_matched(&self, j: EntityId) -> bool {
        self.backward[j.0 as usize].is_some()
    }

    pub fn contains(&self, i: EntityId, j: EntityId) -> bool {
        self.forward[i.0 as usize] == Some(j)
    }

    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trace.is_empty()
    }

    /// Commits `(i, j)`; rejected when either endpoint is already matched.
    pub fn commit(&mut self, i: EntityId, j: EntityId, score: f64, iteration: usize) -> Result<()> {
        if self.forward[i.0 as usize].is_some() || self.backward[j.0 as usize].is_some() {
            return Err(SigmaError::AlreadyMatched(format!("({}, {})", i.0, j.0)));
        }
        self.forward[i.0 as usize] = Some(j);
        self.backward[j.0 as usize] = Some(i);
        self.trace.push(TraceEntry {
            iteration,
            left: i,
            right: j,
            score,
        });
        Ok(())
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn pairs(&self) -> impl Iterator<Item = (EntityId, EntityId)> + '_ {
        self.trace.iter().map(|t| (t.left, t.right))
    }
}
