//! Tokenization, per-KB word inverted index with IDF weights and stop
//! words, and property-value IDF weights.

use std::collections::{HashMap, HashSet};

use unicode_normalization::UnicodeNormalization;

use crate::error::{Result, SigmaError};
use crate::kb::{EntityId, KnowledgeBase, Literal, PropertyId};

/// Ordered duplicate-free word list of a label.
pub type TokenSet = Vec<String>;

/// Normalizes a raw string into its word set: NFKD, casefolded, every
/// non-alphanumeric codepoint replaced by a space, split on whitespace,
/// duplicates removed preserving first occurrence.
pub fn tokenize(raw: &str) -> TokenSet {
    let mut normalized = String::with_capacity(raw.len());
    for c in raw.nfkd() {
        if c.is_alphanumeric() {
            for lc in c.to_lowercase() {
                normalized.push(lc);
            }
        } else {
            normalized.push(' ');
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for word in normalized.split_whitespace() {
        if seen.insert(word) {
            out.push(word.to_string());
        }
    }
    out
}

/// Word inverted index over entity labels of one KB.
///
/// Carries, per word, the posting list E_v and the IDF weight
/// w_v = log₁₀(|𝓔| / |E_v|), plus the automatic stop-word list (the
/// min(1000, vocabulary) most frequent words). Stop words are excluded from
/// candidate suggestion only, never from similarity scoring.
#[derive(Debug)]
pub struct WordIndex {
    postings: HashMap<String, Vec<EntityId>>,
    weights: HashMap<String, f64>,
    stopwords: HashSet<String>,
    /// Per entity: sorted token list of its label.
    tokens: Vec<Vec<String>>,
    /// Per entity: tokens in original order, for the normalized full label.
    tokens_ordered: Vec<TokenSet>,
    /// Per entity: Σ_v w_v over its tokens.
    weight_sums: Vec<f64>,
}

pub const STOPWORD_LIMIT: usize = 1000;

impl WordIndex {
    pub fn build(kb: &KnowledgeBase) -> WordIndex {
        let n = kb.num_entities();
        let mut postings: HashMap<String, Vec<EntityId>> = HashMap::new();
        let mut tokens_ordered = Vec::with_capacity(n);
        for e in kb.entities() {
            let toks = kb.label(e).map(tokenize).unwrap_or_default();
            for t in &toks {
                postings.entry(t.clone()).or_default().push(e);
            }
            tokens_ordered.push(toks);
        }

        let total = n.max(1) as f64;
        let mut weights = HashMap::with_capacity(postings.len());
        for (word, list) in &postings {
            weights.insert(word.clone(), (total / list.len() as f64).log10());
        }

        // Top min(1000, vocabulary) words by document frequency; ties at the
        // cutoff rank are all included.
        let mut by_freq: Vec<(&String, usize)> =
            postings.iter().map(|(w, l)| (w, l.len())).collect();
        by_freq.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let mut stopwords = HashSet::new();
        if !by_freq.is_empty() {
            let cutoff = by_freq[STOPWORD_LIMIT.min(by_freq.len()) - 1].1;
            for &(word, df) in &by_freq {
                if stopwords.len() < STOPWORD_LIMIT || df == cutoff {
                    if df >= cutoff {
                        stopwords.insert(word.clone());
                    }
                } else {
                    break;
                }
            }
        }

        let mut tokens = Vec::with_capacity(n);
        let mut weight_sums = Vec::with_capacity(n);
        for toks in &tokens_ordered {
            let mut sorted = toks.clone();
            sorted.sort_unstable();
            let sum = sorted.iter().map(|t| weights[t]).sum();
            tokens.push(sorted);
            weight_sums.push(sum);
        }

        WordIndex {
            postings,
            weights,
            stopwords,
            tokens,
            tokens_ordered,
            weight_sums,
        }
    }

    pub fn entities_with_word(&self, word: &str) -> &[EntityId] {
        self.postings.get(word).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn weight(&self, word: &str) -> Option<f64> {
        self.weights.get(word).copied()
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    pub fn num_stopwords(&self) -> usize {
        self.stopwords.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    /// Sorted label tokens of `e`.
    pub fn tokens(&self, e: EntityId) -> &[String] {
        &self.tokens[e.0 as usize]
    }

    /// Label tokens of `e` in original order.
    pub fn tokens_ordered(&self, e: EntityId) -> &[String] {
        &self.tokens_ordered[e.0 as usize]
    }

    /// Normalized full label: tokens joined by single spaces.
    pub fn normalized_label(&self, e: EntityId) -> String {
        self.tokens_ordered[e.0 as usize].join(" ")
    }

    pub fn weight_sum(&self, e: EntityId) -> f64 {
        self.weight_sums[e.0 as usize]
    }
}

/// Per-KB IDF weights for (property, value) pairs:
/// w_{p,v} = log₁₀(N_p / |E_{p,v}|) where N_p counts entities with any value
/// for p. Also carries per-property word weights for string-kind literal
/// similarity, derived from the values of that property only.
#[derive(Debug)]
pub struct PropertyValueWeights {
    weights: HashMap<(PropertyId, Literal), f64>,
    /// Number of entities with any value for each property.
    entity_counts: HashMap<PropertyId, usize>,
    /// Per property: word → IDF weight over that property's values.
    word_weights: HashMap<PropertyId, HashMap<String, f64>>,
    /// Per entity: Σ w over its property facts.
    weight_sums: Vec<f64>,
}

impl PropertyValueWeights {
    pub fn build(kb: &KnowledgeBase) -> PropertyValueWeights {
        let mut value_entities: HashMap<(PropertyId, Literal), usize> = HashMap::new();
        let mut prop_entities: HashMap<PropertyId, HashSet<EntityId>> = HashMap::new();
        let mut word_entities: HashMap<PropertyId, HashMap<String, HashSet<EntityId>>> =
            HashMap::new();

        for e in kb.entities() {
            for (p, v) in kb.prop_facts_of(e) {
                // prop_facts_of is duplicate-free, so each (e, p, v) counts once.
                *value_entities.entry((*p, v.clone())).or_insert(0) += 1;
                prop_entities.entry(*p).or_default().insert(e);
                let words = word_entities.entry(*p).or_default();
                for t in tokenize(&v.as_text()) {
                    words.entry(t).or_default().insert(e);
                }
            }
        }

        let entity_counts: HashMap<PropertyId, usize> = prop_entities
            .iter()
            .map(|(&p, es)| (p, es.len()))
            .collect();

        let weights = value_entities
            .into_iter()
            .map(|((p, v), df)| {
                let n_p = entity_counts[&p] as f64;
                ((p, v), (n_p / df as f64).log10())
            })
            .collect::<HashMap<_, _>>();

        let word_weights = word_entities
            .into_iter()
            .map(|(p, words)| {
                let n_p = entity_counts[&p] as f64;
                let ws = words
                    .into_iter()
                    .map(|(w, es)| (w, (n_p / es.len() as f64).log10()))
                    .collect();
                (p, ws)
            })
            .collect();

        let weight_sums = kb
            .entities()
            .map(|e| {
                kb.prop_facts_of(e)
                    .iter()
                    .map(|(p, v)| weights[&(*p, v.clone())])
                    .sum()
            })
            .collect();

        PropertyValueWeights {
            weights,
            entity_counts,
            word_weights,
            weight_sums,
        }
    }

    pub fn weight(&self, p: PropertyId, v: &Literal) -> f64 {
        self.weights.get(&(p, v.clone())).copied().unwrap_or(0.0)
    }

    pub fn entities_with_property(&self, p: PropertyId) -> usize {
        self.entity_counts.get(&p).copied().unwrap_or(0)
    }

    pub fn word_weight(&self, p: PropertyId, word: &str) -> Option<f64> {
        self.word_weights.get(&p).and_then(|m| m.get(word)).copied()
    }

    /// Σ of property-value weights over every property fact of `e`.
    pub fn weight_sum(&self, e: EntityId) -> f64 {
        self.weight_sums[e.0 as usize]
    }
}

/// Default smoothing constant: the sum of the maximum possible word weights
/// in each KB, log₁₀|𝓔₁| + log₁₀|𝓔₂|.
pub fn auto_smoothing(kb1: &KnowledgeBase, kb2: &KnowledgeBase) -> Result<f64> {
    if kb1.num_entities() == 0 || kb2.num_entities() == 0 {
        return Err(SigmaError::EmptyKb);
    }
    Ok((kb1.num_entities() as f64).log10() + (kb2.num_entities() as f64).log10())
}
