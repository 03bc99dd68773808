//! Ground-truth scoring: precision/recall/F-measure plus threshold-sweep
//! and per-iteration curve outputs.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Result, SigmaError};

/// Precision/recall report.
///
/// Precision counts only predictions whose KB1 entity has ground-truth
/// info; `undefined_precision` flags the 0/0 case (reported as 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub gt_size: usize,
    pub predicted: usize,
    pub correct: usize,
    pub undefined_precision: bool,
}

/// One committed pair of an alignment trace.
#[derive(Debug, Clone)]
pub struct Commit<K, V> {
    pub left: K,
    pub right: V,
    pub score: f64,
}

fn report<K: Eq + Hash, V: PartialEq>(
    pred: &HashMap<K, V>,
    gt: &HashMap<K, V>,
) -> EvalReport {
    let correct = pred
        .iter()
        .filter(|(k, v)| gt.get(k) == Some(v))
        .count();
    let with_gt = pred.keys().filter(|k| gt.contains_key(k)).count();
    let recall = correct as f64 / gt.len() as f64;
    let (precision, undefined_precision) = if with_gt == 0 {
        (0.0, true)
    } else {
        (correct as f64 / with_gt as f64, false)
    };
    let f_measure = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    EvalReport {
        precision,
        recall,
        f_measure,
        gt_size: gt.len(),
        predicted: pred.len(),
        correct,
        undefined_precision,
    }
}

/// Scores a predicted mapping against ground truth.
pub fn evaluate<K: Eq + Hash, V: PartialEq>(
    pred: &HashMap<K, V>,
    gt: &HashMap<K, V>,
) -> Result<EvalReport> {
    if gt.is_empty() {
        return Err(SigmaError::NoGroundTruth);
    }
    Ok(report(pred, gt))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Precision/recall sweep over score cutoffs.
///
/// For each distinct trace score `s` (descending) the prefix of commits up
/// to the last commit scoring ≥ s is evaluated; a final row at threshold 0
/// reproduces the full-run report. Returns the rows and the index of the
/// maximum-F row.
pub fn pr_sweep<K, V>(trace: &[Commit<K, V>], gt: &HashMap<K, V>) -> Result<(Vec<SweepRow>, usize)>
where
    K: Eq + Hash + Clone,
    V: PartialEq + Clone,
{
    if gt.is_empty() {
        return Err(SigmaError::NoGroundTruth);
    }
    let mut thresholds: Vec<f64> = trace.iter().map(|c| c.score).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    thresholds.push(0.0);

    let mut rows = Vec::with_capacity(thresholds.len());
    let mut best = 0;
    for (n, &s) in thresholds.iter().enumerate() {
        let end = trace
            .iter()
            .rposition(|c| c.score >= s)
            .map_or(0, |i| i + 1);
        let pred: HashMap<K, V> = trace[..end]
            .iter()
            .map(|c| (c.left.clone(), c.right.clone()))
            .collect();
        let r = report(&pred, gt);
        rows.push(SweepRow {
            threshold: s,
            precision: r.precision,
            recall: r.recall,
            f_measure: r.f_measure,
        });
        if r.f_measure > rows[best].f_measure {
            best = n;
        }
    }
    Ok((rows, best))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub iteration: usize,
    pub score: f64,
    /// Precision over the predictions with gt info among the last `window`.
    pub rolling_precision: f64,
    /// Fraction of the last `window` predictions having gt info.
    pub rolling_gt_coverage: f64,
}

/// Per-iteration rolling precision and gt coverage, windowed over the last
/// `window` predictions (clamped at the start of the trace).
pub fn iteration_curve<K, V>(
    trace: &[Commit<K, V>],
    gt: &HashMap<K, V>,
    window: usize,
) -> Vec<CurveRow>
where
    K: Eq + Hash,
    V: PartialEq,
{
    let window = window.max(1);
    let mut rows = Vec::with_capacity(trace.len());
    for (t, c) in trace.iter().enumerate() {
        let start = (t + 1).saturating_sub(window);
        let recent = &trace[start..=t];
        let with_gt = recent
            .iter()
            .filter(|c| gt.contains_key(&c.left))
            .count();
        let correct = recent
            .iter()
            .filter(|c| gt.get(&c.left) == Some(&c.right))
            .count();
        rows.push(CurveRow {
            iteration: t,
            score: c.score,
            rolling_precision: if with_gt == 0 {
                0.0
            } else {
                correct as f64 / with_gt as f64
            },
            rolling_gt_coverage: with_gt as f64 / recent.len() as f64,
        });
    }
    rows
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("threshold,precision,recall,f_measure\n");
    for r in rows {
        out.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6}\n",
            r.threshold, r.precision, r.recall, r.f_measure
        ));
    }
    out
}

pub fn curve_to_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("iteration,score,rolling_precision,rolling_gt_coverage\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            r.iteration, r.score, r.rolling_precision, r.rolling_gt_coverage
        ));
    }
    out
}
