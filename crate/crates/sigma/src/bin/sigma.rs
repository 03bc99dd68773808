//! Batch command-line entry point: align, eval, synth, check, and the
//! OAEI benchmark converter.
//!
//! Exit codes: 0 success, 1 invariant violation (`check`), 2 configuration
//! or usage error.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use sigma::config::{AlignmentConfig, NeighborWeightMode, ResolvedMapping, SeedMode, Smoothing};
use sigma::error::{Result, SigmaError};
use sigma::eval::{self, Commit};
use sigma::index::{PropertyValueWeights, WordIndex};
use sigma::ingest::{self, Side};
use sigma::kb::{EntityId, KnowledgeBase, Matching};
use sigma::matcher::{self, StopReason};
use sigma::oracle;
use sigma::scoring::Scorer;
use sigma::oaei;
use sigma::synth::{self, SynthParams};

#[derive(Parser)]
#[command(
    name = "sigma",
    version,
    about = "Greedy 1-1 instance alignment between two knowledge bases"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Cmd {
    /// Align two KBs and write the matched-pairs file.
    Align(AlignArgs),
    /// Score a matched-pairs file against ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic KB pair with planted ground truth.
    Synth(SynthArgs),
    /// Run the brute-force consistency checks on a small instance.
    Check(CheckArgs),
    /// Convert an OAEI benchmark (RDF/XML) into the triple format.
    ConvertOaei(ConvertArgs),
}

#[derive(Args)]
struct AlignArgs {
    #[arg(long, value_name = "FILE")]
    kb1_rel: PathBuf,
    #[arg(long, value_name = "FILE")]
    kb1_prop: PathBuf,
    #[arg(long, value_name = "FILE")]
    kb2_rel: PathBuf,
    #[arg(long, value_name = "FILE")]
    kb2_prop: PathBuf,
    /// Mapping file: matched relations/properties, label properties, params.
    #[arg(long, value_name = "FILE")]
    map: PathBuf,
    /// Output matched-pairs file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Optional per-commit score breakdown file.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,

    /// Graph score weight in [0,1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Property score weight in [0,1].
    #[arg(long)]
    beta: Option<f64>,
    /// Stop when the best candidate score drops to this value.
    #[arg(long)]
    threshold: Option<f64>,
    /// Minimum static score for inverted-index candidates.
    #[arg(long)]
    s0_threshold: Option<f64>,
    /// String similarity smoothing constant, or "auto".
    #[arg(long)]
    smoothing: Option<String>,
    #[arg(long, value_name = "uniform|inverse")]
    neighbor_weight: Option<String>,
    /// Disable the graph component and neighbor proposals.
    #[arg(long)]
    linear: bool,
    /// Disable the inverted-index candidate list.
    #[arg(long)]
    no_s0: bool,
    #[arg(long, value_name = "exact|file|none")]
    seed_mode: Option<String>,
    /// Initial matching pairs (ground-truth format), for --seed-mode file.
    #[arg(long, value_name = "FILE")]
    seed_file: Option<PathBuf>,
    /// Evaluate the result against this ground truth and print P/R/F.
    #[arg(long, value_name = "FILE")]
    eval_gt: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Matched-pairs file produced by `align`.
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    #[arg(long, value_name = "FILE")]
    gt: PathBuf,
    /// Write per-iteration rolling precision CSV here.
    #[arg(long, value_name = "FILE")]
    curve: Option<PathBuf>,
    /// Write precision/recall threshold sweep CSV here.
    #[arg(long, value_name = "FILE")]
    sweep: Option<PathBuf>,
    /// Rolling window for --curve.
    #[arg(long, default_value_t = 1000)]
    window: usize,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Entities per KB.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    rng_seed: u64,
    #[arg(long, default_value_t = 3)]
    n_relations: usize,
    #[arg(long, default_value_t = 3.0)]
    avg_degree: f64,
    #[arg(long, default_value_t = 600)]
    vocab_size: usize,
    #[arg(long, default_value_t = 2)]
    words_min: usize,
    #[arg(long, default_value_t = 5)]
    words_max: usize,
    #[arg(long, default_value_t = 0.0)]
    word_drop_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    word_swap_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    edge_drop_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    duplicate_label_frac: f64,
    #[arg(long, default_value_t = 0.5)]
    prop_year_frac: f64,
    #[arg(long, default_value_t = 0.0)]
    year_noise_prob: f64,
}

#[derive(Args)]
struct CheckArgs {
    /// Directory with kb1.rel.tsv, kb1.prop.tsv, kb2.rel.tsv, kb2.prop.tsv,
    /// mapping.tsv (as written by `synth`).
    #[arg(long, value_name = "DIR")]
    dir: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    /// First instance file (RDF/XML).
    #[arg(long, value_name = "FILE")]
    kb1: PathBuf,
    /// Second instance file (RDF/XML).
    #[arg(long, value_name = "FILE")]
    kb2: PathBuf,
    /// Reference alignment file (RDF/XML).
    #[arg(long, value_name = "FILE")]
    refalign: PathBuf,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Align(args) => cmd_align(&args),
        Cmd::Eval(args) => cmd_eval(&args),
        Cmd::Synth(args) => cmd_synth(&args),
        Cmd::Check(args) => cmd_check(&args),
        Cmd::ConvertOaei(args) => {
            oaei::convert_benchmark(&args.kb1, &args.kb2, &args.refalign, &args.out_dir)
                .map(|()| ExitCode::SUCCESS)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn quiet() -> bool {
    std::env::var("SIGMA_LOG").is_ok_and(|v| v == "quiet")
}

/// Everything the scorer borrows, kept alive together.
struct Pipeline {
    kb1: KnowledgeBase,
    kb2: KnowledgeBase,
    idx1: WordIndex,
    idx2: WordIndex,
    pvw1: PropertyValueWeights,
    pvw2: PropertyValueWeights,
    mapping: ResolvedMapping,
    config: AlignmentConfig,
}

impl Pipeline {
    fn load(
        kb1_rel: &Path,
        kb1_prop: &Path,
        kb2_rel: &Path,
        kb2_prop: &Path,
        config: AlignmentConfig,
    ) -> Result<Pipeline> {
        let kb1 = ingest::load_kb(kb1_rel, kb1_prop, Side::Left, &config)?;
        let kb2 = ingest::load_kb(kb2_rel, kb2_prop, Side::Right, &config)?;
        for w in ingest::unresolved_mapping_warnings(&config, &kb1, &kb2) {
            eprintln!("warning: {w}");
        }
        let idx1 = WordIndex::build(&kb1);
        let idx2 = WordIndex::build(&kb2);
        let pvw1 = PropertyValueWeights::build(&kb1);
        let pvw2 = PropertyValueWeights::build(&kb2);
        let mapping = ResolvedMapping::resolve(&config, &kb1, &kb2);
        Ok(Pipeline {
            kb1,
            kb2,
            idx1,
            idx2,
            pvw1,
            pvw2,
            mapping,
            config,
        })
    }

    fn scorer(&self) -> Result<Scorer<'_>> {
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
    }
}

fn apply_align_overrides(config: &mut AlignmentConfig, args: &AlignArgs) -> Result<()> {
    if let Some(a) = args.alpha {
        config.alpha = a;
    }
    if let Some(b) = args.beta {
        config.beta = b;
    }
    if let Some(t) = args.threshold {
        config.stop_threshold = t;
    }
    if let Some(t) = args.s0_threshold {
        config.s0_threshold = t;
    }
    if let Some(s) = &args.smoothing {
        config.smoothing = if s == "auto" {
            Smoothing::Auto
        } else {
            Smoothing::Fixed(s.parse().map_err(|_| {
                SigmaError::Config(format!("--smoothing expects a number or \"auto\", got {s:?}"))
            })?)
        };
    }
    if let Some(w) = &args.neighbor_weight {
        config.neighbor_weight_mode = match w.as_str() {
            "uniform" => NeighborWeightMode::Uniform,
            "inverse" => NeighborWeightMode::Inverse,
            other => {
                return Err(SigmaError::Config(format!(
                    "--neighbor-weight must be uniform or inverse, got {other:?}"
                )))
            }
        };
    }
    if let Some(m) = &args.seed_mode {
        config.seed_mode = match m.as_str() {
            "exact" | "exact_string" => SeedMode::ExactString,
            "file" => SeedMode::File,
            "none" => SeedMode::None,
            other => {
                return Err(SigmaError::Config(format!(
                    "--seed-mode must be exact, file, or none, got {other:?}"
                )))
            }
        };
    }
    if args.linear {
        config.linear = true;
    }
    if args.no_s0 {
        config.use_s0 = false;
    }
    if config.seed_mode == SeedMode::File && args.seed_file.is_none() {
        return Err(SigmaError::Config(
            "--seed-mode file requires --seed-file".into(),
        ));
    }
    config.validate()
}

fn resolve_seed_file(
    path: &Path,
    kb1: &KnowledgeBase,
    kb2: &KnowledgeBase,
) -> Result<Vec<(EntityId, EntityId)>> {
    let mut pairs = Vec::new();
    for (a, b) in ingest::load_ground_truth(path)? {
        match (kb1.entity(&a), kb2.entity(&b)) {
            (Some(i), Some(j)) => pairs.push((i, j)),
            _ => eprintln!("warning: seed pair ({a}, {b}) has unknown entities; skipped"),
        }
    }
    Ok(pairs)
}

fn write_trace_file(path: &Path, pipeline: &Pipeline, scorer: &Scorer, m: &Matching) -> Result<()> {
    let io_err = |source| SigmaError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io_err)?;
    writeln!(
        f,
        "# iteration\tkb1_id\tkb2_id\tscore\tstring_sim\tprop_sim\tstatic_sim\tgraph_inc"
    )
    .map_err(io_err)?;
    for t in m.trace() {
        let (string_sim, prop_sim, static_sim) = scorer.static_sim(t.left, t.right);
        // Recover the increment that entered this commit's score instead of
        // recomputing it against the final matching.
        let graph_inc = if scorer.alpha == 0.0 {
            0.0
        } else {
            (t.score - (1.0 - scorer.alpha) * static_sim) / scorer.alpha
        };
        writeln!(
            f,
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            t.iteration,
            pipeline.kb1.surface_id(t.left),
            pipeline.kb2.surface_id(t.right),
            t.score,
            string_sim,
            prop_sim,
            static_sim,
            graph_inc
        )
        .map_err(io_err)?;
    }
    Ok(())
}

fn stop_reason_name(r: StopReason) -> &'static str {
    match r {
        StopReason::Threshold => "threshold",
        StopReason::QueueEmpty => "queue-empty",
    }
}

fn cmd_align(args: &AlignArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let mut config = ingest::load_alignment_config(&args.map)?;
    apply_align_overrides(&mut config, args)?;

    let pipeline = Pipeline::load(
        &args.kb1_rel,
        &args.kb1_prop,
        &args.kb2_rel,
        &args.kb2_prop,
        config,
    )?;
    let scorer = pipeline.scorer()?;

    let seed = match &args.seed_file {
        Some(path) => Some(resolve_seed_file(path, &pipeline.kb1, &pipeline.kb2)?),
        None => None,
    };
    let result = matcher::run_with_seed(&scorer, &pipeline.config, seed.as_deref())?;

    ingest::write_matched_pairs(&args.out, &result.matching, &pipeline.kb1, &pipeline.kb2)?;
    if let Some(trace_path) = &args.trace {
        write_trace_file(trace_path, &pipeline, &scorer, &result.matching)?;
    }

    if !quiet() {
        let s = result.stats;
        println!(
            "matched {} pairs in {:.2}s (stop: {}; pops {}, skips {}, s0 {}, neighbor {})",
            result.matching.len(),
            started.elapsed().as_secs_f64(),
            stop_reason_name(result.stopped_reason),
            s.pops,
            s.skips,
            s.s0_suggestions,
            s.neighbor_suggestions
        );
    }

    if let Some(gt_path) = &args.eval_gt {
        let gt: HashMap<String, String> = ingest::load_ground_truth(gt_path)?.into_iter().collect();
        let pred: HashMap<String, String> = result
            .matching
            .pairs()
            .map(|(i, j)| {
                (
                    pipeline.kb1.surface_id(i).to_string(),
                    pipeline.kb2.surface_id(j).to_string(),
                )
            })
            .collect();
        let r = eval::evaluate(&pred, &gt)?;
        print_report(&r);
    }
    Ok(ExitCode::SUCCESS)
}

fn print_report(r: &eval::EvalReport) {
    println!(
        "P={:.3} R={:.3} F={:.3} (correct {}, predicted {}, gt {}{})",
        r.precision,
        r.recall,
        r.f_measure,
        r.correct,
        r.predicted,
        r.gt_size,
        if r.undefined_precision {
            "; precision undefined, no prediction has gt info"
        } else {
            ""
        }
    );
}

fn cmd_eval(args: &EvalArgs) -> Result<ExitCode> {
    let predictions = ingest::load_predictions(&args.pred)?;
    let gt: HashMap<String, String> = ingest::load_ground_truth(&args.gt)?.into_iter().collect();

    let pred_map: HashMap<String, String> = predictions
        .iter()
        .map(|p| (p.left.clone(), p.right.clone()))
        .collect();
    let report = eval::evaluate(&pred_map, &gt)?;
    print_report(&report);

    let trace: Vec<Commit<String, String>> = predictions
        .iter()
        .map(|p| Commit {
            left: p.left.clone(),
            right: p.right.clone(),
            score: p.score,
        })
        .collect();
    if let Some(path) = &args.sweep {
        let (rows, best) = eval::pr_sweep(&trace, &gt)?;
        fs::write(path, eval::sweep_to_csv(&rows)).map_err(|source| SigmaError::Io {
            path: path.clone(),
            source,
        })?;
        let b = &rows[best];
        if !quiet() {
            println!(
                "sweep: best F={:.3} at threshold {:.6} ({} rows)",
                b.f_measure,
                b.threshold,
                rows.len()
            );
        }
    }
    if let Some(path) = &args.curve {
        let rows = eval::iteration_curve(&trace, &gt, args.window);
        fs::write(path, eval::curve_to_csv(&rows)).map_err(|source| SigmaError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(args: &SynthArgs) -> Result<ExitCode> {
    let params = SynthParams {
        n_entities: args.n,
        n_relations: args.n_relations,
        avg_degree: args.avg_degree,
        vocab_size: args.vocab_size,
        words_per_label: (args.words_min, args.words_max),
        word_drop_prob: args.word_drop_prob,
        word_swap_prob: args.word_swap_prob,
        edge_drop_prob: args.edge_drop_prob,
        duplicate_label_frac: args.duplicate_label_frac,
        prop_year_frac: args.prop_year_frac,
        year_noise_prob: args.year_noise_prob,
        rng_seed: args.rng_seed,
    };
    let instance = synth::generate(&params)?;
    instance.write_to_dir(&args.out_dir)?;
    if !quiet() {
        println!(
            "wrote {} entities per KB ({} + {} relationship facts) to {}",
            params.n_entities,
            instance.rel1.len(),
            instance.rel2.len(),
            args.out_dir.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: &CheckArgs) -> Result<ExitCode> {
    let dir = &args.dir;
    let config = ingest::load_alignment_config(&dir.join("mapping.tsv"))?;
    let pipeline = Pipeline::load(
        &dir.join("kb1.rel.tsv"),
        &dir.join("kb1.prop.tsv"),
        &dir.join("kb2.rel.tsv"),
        &dir.join("kb2.prop.tsv"),
        config,
    )?;
    let scorer = pipeline.scorer()?;
    let result = matcher::run(&scorer, &pipeline.config)?;

    let mut all_pass = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        println!("{} {name}{}", if pass { "PASS" } else { "FAIL" }, detail);
        all_pass &= pass;
    };

    // Objective equals the sum of committed scores.
    let trace_sum: f64 = result.matching.trace().iter().map(|t| t.score).sum();
    let obj = oracle::objective(&scorer, &result.matching);
    check(
        "trace-consistency",
        (obj - trace_sum).abs() <= 1e-9,
        format!(" (objective {obj:.9}, trace sum {trace_sum:.9})"),
    );

    // The queue-based run must replicate the queue-free reference.
    let reference = oracle::reference_greedy(&scorer, &pipeline.config, None)?;
    let traces_equal = result.matching.trace() == reference.matching.trace();
    check(
        "reference-equivalence",
        traces_equal,
        format!(
            " ({} vs {} commits)",
            result.matching.len(),
            reference.matching.len()
        ),
    );

    // Score components within range for every committed pair.
    let mut ranges_ok = true;
    for t in result.matching.trace() {
        let (s, p, st) = scorer.static_sim(t.left, t.right);
        for v in [s, p, st] {
            if !(0.0..=1.0).contains(&v) {
                ranges_ok = false;
            }
        }
        if t.score < 0.0 {
            ranges_ok = false;
        }
    }
    check(
        "score-ranges",
        ranges_ok,
        format!(" ({} commits checked)", result.matching.len()),
    );

    // On enumerable instances the greedy objective cannot beat the optimum.
    if pipeline.kb1.num_entities() <= oracle::EXHAUSTIVE_LIMIT
        && pipeline.kb2.num_entities() <= oracle::EXHAUSTIVE_LIMIT
    {
        let r = pipeline.kb1.num_entities().min(pipeline.kb2.num_entities());
        let (_, best_value) = oracle::exhaustive_best(&scorer, r)?;
        check(
            "greedy-admissible",
            obj <= best_value + 1e-9,
            format!(" (greedy {obj:.9} ≤ optimum {best_value:.9})"),
        );
    } else {
        println!("SKIP greedy-admissible (instance too large to enumerate)");
    }

    // A stored alignment, when present, must replay consistently: pairs
    // resolve, stay 1-1, and its scores sum to the from-scratch objective.
    let stored_path = dir.join("matched.tsv");
    if stored_path.exists() {
        let stored = ingest::load_predictions(&stored_path)?;
        let mut replay = Matching::new(pipeline.kb1.num_entities(), pipeline.kb2.num_entities());
        let mut replay_ok = true;
        let mut stored_sum = 0.0;
        for p in &stored {
            let (Some(i), Some(j)) = (pipeline.kb1.entity(&p.left), pipeline.kb2.entity(&p.right))
            else {
                return Err(SigmaError::Config(format!(
                    "stored pair ({}, {}) references unknown entities",
                    p.left, p.right
                )));
            };
            stored_sum += p.score;
            if replay.commit(i, j, p.score, p.iteration).is_err() {
                replay_ok = false;
            }
        }
        check(
            "stored-one-to-one",
            replay_ok,
            format!(" ({} stored pairs)", stored.len()),
        );
        let stored_obj = oracle::objective(&scorer, &replay);
        // scores in the file carry six decimals, so allow rounding slack
        let tol = 1e-6 * (stored.len() as f64).max(1.0);
        check(
            "stored-trace-consistency",
            (stored_obj - stored_sum).abs() <= tol,
            format!(" (objective {stored_obj:.9}, stored sum {stored_sum:.9})"),
        );
    }

    // Ground truth, when present, must parse and evaluate.
    let gt_path = dir.join("gt.tsv");
    if gt_path.exists() {
        let gt: HashMap<String, String> = ingest::load_ground_truth(&gt_path)?.into_iter().collect();
        let pred: HashMap<String, String> = result
            .matching
            .pairs()
            .map(|(i, j)| {
                (
                    pipeline.kb1.surface_id(i).to_string(),
                    pipeline.kb2.surface_id(j).to_string(),
                )
            })
            .collect();
        let r = eval::evaluate(&pred, &gt)?;
        check(
            "gt-evaluable",
            r.recall.is_finite() && r.precision.is_finite(),
            format!(" (P={:.3} R={:.3} F={:.3})", r.precision, r.recall, r.f_measure),
        );
    }

    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
