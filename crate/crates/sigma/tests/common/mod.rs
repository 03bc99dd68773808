//! Shared test scaffolding: builds fully indexed instances from the
//! synthetic generator so integration tests can construct scorers cheaply.

// Not every test target uses every helper.
#![allow(dead_code)]

use sigma::config::{AlignmentConfig, NeighborWeightMode};
use sigma::index::{PropertyValueWeights, WordIndex};
use sigma::config::ResolvedMapping;
use sigma::kb::KnowledgeBase;
use sigma::scoring::Scorer;
use sigma::synth::{self, SynthInstance, SynthParams};

/// Owns everything a [`Scorer`] borrows.
pub struct Instance {
    pub kb1: KnowledgeBase,
    pub kb2: KnowledgeBase,
    pub idx1: WordIndex,
    pub idx2: WordIndex,
    pub pvw1: PropertyValueWeights,
    pub pvw2: PropertyValueWeights,
    pub mapping: ResolvedMapping,
    pub config: AlignmentConfig,
    pub ground_truth: Vec<(String, String)>,
}

impl Instance {
    /// Generates, ingests and indexes a synthetic instance. `tweak` can
    /// adjust the alignment parameters before the scorer-side structures
    /// are resolved.
    pub fn synth(params: &SynthParams, tweak: impl FnOnce(&mut AlignmentConfig)) -> Instance {
        let inst = synth::generate(params).expect("generate");
        Instance::from_synth(&inst, tweak)
    }

    pub fn from_synth(
        inst: &SynthInstance,
        tweak: impl FnOnce(&mut AlignmentConfig),
    ) -> Instance {
        let mut config = inst.config().expect("config");
        tweak(&mut config);
        config.validate().expect("valid config");
        let (kb1, kb2) = inst.build_kbs(&config).expect("build kbs");
        let idx1 = WordIndex::build(&kb1);
        let idx2 = WordIndex::build(&kb2);
        let pvw1 = PropertyValueWeights::build(&kb1);
        let pvw2 = PropertyValueWeights::build(&kb2);
        let mapping = ResolvedMapping::resolve(&config, &kb1, &kb2);
        Instance {
            kb1,
            kb2,
            idx1,
            idx2,
            pvw1,
            pvw2,
            mapping,
            config,
            ground_truth: inst.ground_truth.clone(),
        }
    }

    pub fn scorer(&self) -> Scorer<'_> {
        Scorer::new(
            &self.kb1,
            &self.kb2,
            &self.idx1,
            &self.idx2,
            &self.pvw1,
            &self.pvw2,
            &self.mapping,
            &self.config,
        )
        .expect("scorer")
    }
}

/// Deterministic family of small instances with varied size, corruption
/// and alignment parameters, keyed by `seed`.
pub fn varied_instance(seed: u64) -> Instance {
    let params = varied_params(seed);
    Instance::synth(&params, |c| {
        c.alpha = [1.0 / 3.0, 0.2, 0.5][(seed % 3) as usize];
        c.beta = [0.25, 0.0, 0.4][(seed % 3) as usize];
        c.stop_threshold = [0.25, 0.15, 0.35][((seed / 3) % 3) as usize];
        if seed.is_multiple_of(4) {
            c.neighbor_weight_mode = NeighborWeightMode::Inverse;
        }
    })
}

pub fn varied_params(seed: u64) -> SynthParams {
    SynthParams {
        n_entities: 10 + (seed % 41) as usize,
        n_relations: 1 + (seed % 3) as usize,
        avg_degree: 1.5 + (seed % 4) as f64,
        vocab_size: 120 + (seed % 300) as usize,
        words_per_label: (2, 4 + (seed % 3) as usize),
        word_drop_prob: 0.05 * (seed % 4) as f64,
        word_swap_prob: 0.1 * (seed % 3) as f64,
        edge_drop_prob: 0.05 * (seed % 3) as f64,
        duplicate_label_frac: 0.05 * (seed % 2) as f64,
        prop_year_frac: 0.5,
        year_noise_prob: 0.1 * (seed % 2) as f64,
        rng_seed: seed,
    }
}
