//! Deterministic generator of KB pairs with a planted 1-1 ground truth and
//! controllable corruption. Powers property tests and recovery-rate runs.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::AlignmentConfig;
use crate::error::{Result, SigmaError};
use crate::ingest::{self, Side};
use crate::kb::KnowledgeBase;

#[derive(Debug, Clone)]
pub struct SynthParams {
    pub n_entities: usize,
    pub n_relations: usize,
    pub avg_degree: f64,
    pub vocab_size: usize,
    /// Inclusive range of words per label.
    pub words_per_label: (usize, usize),
    pub word_drop_prob: f64,
    /// Probability of swapping each adjacent word pair (reorder).
    pub word_swap_prob: f64,
    pub edge_drop_prob: f64,
    /// Fraction of entities whose label is copied from another entity, to
    /// defeat exact seeding.
    pub duplicate_label_frac: f64,
    pub prop_year_frac: f64,
    pub year_noise_prob: f64,
    pub rng_seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_entities: 200,
            n_relations: 3,
            avg_degree: 3.0,
            vocab_size: 600,
            words_per_label: (2, 5),
            word_drop_prob: 0.0,
            word_swap_prob: 0.0,
            edge_drop_prob: 0.0,
            duplicate_label_frac: 0.0,
            prop_year_frac: 0.5,
            year_noise_prob: 0.0,
            rng_seed: 1,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_entities == 0 {
            return Err(SigmaError::Config("n_entities must be ≥ 1".into()));
        }
        for (name, p) in [
            ("word_drop_prob", self.word_drop_prob),
            ("word_swap_prob", self.word_swap_prob),
            ("edge_drop_prob", self.edge_drop_prob),
            ("duplicate_label_frac", self.duplicate_label_frac),
            ("prop_year_frac", self.prop_year_frac),
            ("year_noise_prob", self.year_noise_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SigmaError::Config(format!("{name} {p} not in [0,1]")));
            }
        }
        if self.words_per_label.0 == 0 || self.words_per_label.0 > self.words_per_label.1 {
            return Err(SigmaError::Config(format!(
                "invalid words_per_label range {:?}",
                self.words_per_label
            )));
        }
        if self.vocab_size < self.words_per_label.1 {
            return Err(SigmaError::Config(
                "vocab_size smaller than the longest label".into(),
            ));
        }
        Ok(())
    }
}

/// A generated instance: triple lists for both KBs, the mapping lines, and
/// the planted ground truth.
#[derive(Debug)]
pub struct SynthInstance {
    pub rel1: Vec<(String, String, String)>,
    pub prop1: Vec<(String, String, String)>,
    pub rel2: Vec<(String, String, String)>,
    pub prop2: Vec<(String, String, String)>,
    pub mapping_lines: Vec<String>,
    pub ground_truth: Vec<(String, String)>,
}

/// Zipf-like word sampler: weight ∝ 1/(rank+1), so the generated word
/// frequency distribution has a heavy head like natural labels. The head
/// ends up in the stop-word list, the tail carries the signal.
struct WordSampler {
    cumulative: Vec<f64>,
}

impl WordSampler {
    fn new(vocab_size: usize) -> WordSampler {
        let mut cumulative = Vec::with_capacity(vocab_size);
        let mut total = 0.0;
        for rank in 0..vocab_size {
            total += 1.0 / (rank as f64 + 1.0);
            cumulative.push(total);
        }
        WordSampler { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocab");
        let x = rng.gen_range(0.0..total);
        self.cumulative.partition_point(|&c| c <= x)
    }
}

fn left_id(n: usize) -> String {
    format!("x{n:06}")
}

fn right_id(n: usize) -> String {
    format!("y{n:06}")
}

/// Generates a KB pair with planted identity alignment. KB1 is sampled;
/// KB2 is a per-entity corrupted copy. Deterministic in `rng_seed`.
pub fn generate(params: &SynthParams) -> Result<SynthInstance> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let n = params.n_entities;

    // Star-mix relation graph: a quarter of the entities act as hubs
    // (movies), the rest link into them (people).
    let hubs: Vec<usize> = (0..n).filter(|i| i % 4 == 0).collect();
    let spokes: Vec<usize> = (0..n).filter(|i| i % 4 != 0).collect();
    let target_edges = (params.avg_degree * n as f64 / 2.0).round() as usize;
    let capacity = spokes.len() * hubs.len() * params.n_relations.max(1);
    if target_edges > capacity {
        return Err(SigmaError::Config(format!(
            "avg_degree {} infeasible for {} entities ({} edges requested, {} possible)",
            params.avg_degree, n, target_edges, capacity
        )));
    }

    let mut edges: Vec<(usize, usize, usize)> = Vec::with_capacity(target_edges);
    {
        let mut seen = std::collections::HashSet::new();
        let mut attempts = 0usize;
        while edges.len() < target_edges {
            attempts += 1;
            if attempts > 100 * target_edges + 1000 {
                return Err(SigmaError::Config(
                    "edge sampling did not converge; lower avg_degree".into(),
                ));
            }
            let s = spokes[rng.gen_range(0..spokes.len().max(1))];
            let h = hubs[rng.gen_range(0..hubs.len())];
            let r = rng.gen_range(0..params.n_relations.max(1));
            if seen.insert((s, h, r)) {
                edges.push((s, h, r));
            }
        }
    }

    // Labels.
    let sampler = WordSampler::new(params.vocab_size);
    let mut labels1: Vec<Vec<usize>> = Vec::with_capacity(n);
    for _ in 0..n {
        let len = rng.gen_range(params.words_per_label.0..=params.words_per_label.1);
        let mut words = Vec::with_capacity(len);
        while words.len() < len {
            let w = sampler.sample(&mut rng);
            if !words.contains(&w) {
                words.push(w);
            }
        }
        labels1.push(words);
    }
    let duplicates = (params.duplicate_label_frac * n as f64).round() as usize;
    for _ in 0..duplicates {
        let dst = rng.gen_range(0..n);
        let src = rng.gen_range(0..n);
        if src != dst {
            labels1[dst] = labels1[src].clone();
        }
    }

    // Year properties.
    let years1: Vec<Option<i32>> = (0..n)
        .map(|_| {
            if rng.gen_bool(params.prop_year_frac) {
                Some(1920 + rng.gen_range(0..100))
            } else {
                None
            }
        })
        .collect();

    // KB2: corrupted copy.
    let mut labels2 = Vec::with_capacity(n);
    for words in &labels1 {
        let mut kept: Vec<usize> = words
            .iter()
            .copied()
            .filter(|_| !rng.gen_bool(params.word_drop_prob))
            .collect();
        if kept.is_empty() {
            kept.push(words[0]);
        }
        for idx in 1..kept.len() {
            if rng.gen_bool(params.word_swap_prob) {
                kept.swap(idx - 1, idx);
            }
        }
        labels2.push(kept);
    }
    let years2: Vec<Option<i32>> = years1
        .iter()
        .map(|y| {
            y.map(|y| {
                if rng.gen_bool(params.year_noise_prob) {
                    y + 1 + rng.gen_range(0..3)
                } else {
                    y
                }
            })
        })
        .collect();
    let edges2: Vec<&(usize, usize, usize)> = edges
        .iter()
        .filter(|_| !rng.gen_bool(params.edge_drop_prob))
        .collect();

    let label_text = |words: &[usize]| {
        words
            .iter()
            .map(|w| format!("w{w:05}"))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut prop1 = Vec::new();
    let mut prop2 = Vec::new();
    for i in 0..n {
        prop1.push((left_id(i), "label".to_string(), label_text(&labels1[i])));
        prop2.push((right_id(i), "name".to_string(), label_text(&labels2[i])));
    }
    for i in 0..n {
        if let Some(y) = years1[i] {
            prop1.push((left_id(i), "hasYear".to_string(), y.to_string()));
        }
        if let Some(y) = years2[i] {
            prop2.push((right_id(i), "prodYear".to_string(), y.to_string()));
        }
    }
    let rel1: Vec<(String, String, String)> = edges
        .iter()
        .map(|&(s, h, r)| (left_id(s), format!("r{r}"), left_id(h)))
        .collect();
    let rel2: Vec<(String, String, String)> = edges2
        .iter()
        .map(|&&(s, h, r)| (right_id(s), format!("r{r}"), right_id(h)))
        .collect();

    let mut mapping_lines = Vec::new();
    for r in 0..params.n_relations {
        mapping_lines.push(format!("rel\tr{r}\tr{r}"));
    }
    mapping_lines.push("prop\thasYear\tprodYear\tyear".to_string());
    mapping_lines.push("label\tlabel\tname".to_string());

    let ground_truth = (0..n).map(|i| (left_id(i), right_id(i))).collect();

    Ok(SynthInstance {
        rel1,
        prop1,
        rel2,
        prop2,
        mapping_lines,
        ground_truth,
    })
}

impl SynthInstance {
    /// Parses the mapping lines into a configuration.
    pub fn config(&self) -> Result<AlignmentConfig> {
        let mut config = AlignmentConfig::default();
        for line in &self.mapping_lines {
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[0] {
                "rel" => config
                    .matched_relations
                    .push((fields[1].into(), fields[2].into())),
                "prop" => config.matched_properties.push(crate::config::PropertyPair {
                    left: fields[1].into(),
                    right: fields[2].into(),
                    kind: crate::config::SimKind::parse(fields[3])?,
                }),
                "label" => {
                    config.label_properties = Some((fields[1].into(), fields[2].into()))
                }
                "param" => ingest::apply_param(&mut config, fields[1], fields[2])?,
                other => return Err(SigmaError::Config(format!("bad mapping line {other:?}"))),
            }
        }
        Ok(config)
    }

    /// Builds both KBs in memory.
    pub fn build_kbs(&self, config: &AlignmentConfig) -> Result<(KnowledgeBase, KnowledgeBase)> {
        let kb1 = ingest::build_kb(&self.rel1, &self.prop1, Side::Left, config)?;
        let kb2 = ingest::build_kb(&self.rel2, &self.prop2, Side::Right, config)?;
        Ok((kb1, kb2))
    }

    /// Writes the six standard files into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        let io_err = |source, path: &Path| SigmaError::Io {
            path: path.to_path_buf(),
            source,
        };
        fs::create_dir_all(dir).map_err(|e| io_err(e, dir))?;
        let write_triples = |name: &str, triples: &[(String, String, String)]| -> Result<()> {
            let path = dir.join(name);
            let mut f = fs::File::create(&path).map_err(|e| io_err(e, &path))?;
            for (a, b, c) in triples {
                writeln!(f, "{a}\t{b}\t{c}").map_err(|e| io_err(e, &path))?;
            }
            Ok(())
        };
        write_triples("kb1.rel.tsv", &self.rel1)?;
        write_triples("kb1.prop.tsv", &self.prop1)?;
        write_triples("kb2.rel.tsv", &self.rel2)?;
        write_triples("kb2.prop.tsv", &self.prop2)?;

        let map_path = dir.join("mapping.tsv");
        fs::write(&map_path, self.mapping_lines.join("\n") + "\n")
            .map_err(|e| io_err(e, &map_path))?;
        let gt_path = dir.join("gt.tsv");
        let gt_text: String = self
            .ground_truth
            .iter()
            .map(|(a, b)| format!("{a}\t{b}\n"))
            .collect();
        fs::write(&gt_path, gt_text).map_err(|e| io_err(e, &gt_path))?;
        Ok(())
    }
}
