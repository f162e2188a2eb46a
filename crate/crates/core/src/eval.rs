//! Ranking metrics and score-distribution reports.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::ranking::RankedList;

pub const HISTOGRAM_BINS: usize = 20;
pub const DEFAULT_THETA_LOW: f64 = 0.1;
pub const DEFAULT_THETA_HIGH: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("no ranked lists")]
    Empty,
    #[error("ranked list {0} has no valid candidate")]
    NoValid(String),
    #[error("k must be at least 1")]
    ZeroK,
}

fn ranks(lists: &[RankedList]) -> Result<Vec<usize>, EvalError> {
    if lists.is_empty() {
        return Err(EvalError::Empty);
    }
    lists
        .iter()
        .map(|l| {
            let valid = l.ranked.iter().any(|e| e.label == Label::Valid);
            if l.rank_of_valid == 0 || !valid {
                Err(EvalError::NoValid(l.sample_id.clone()))
            } else {
                Ok(l.rank_of_valid)
            }
        })
        .collect()
}

/// Mean reciprocal rank of the valid candidate, summed in input order.
pub fn mrr(lists: &[RankedList]) -> Result<f64, EvalError> {
    let ranks = ranks(lists)?;
    let sum: f64 = ranks.iter().map(|&r| 1.0 / r as f64).sum();
    Ok(sum / ranks.len() as f64)
}

/// Percentage of lists whose valid candidate ranks within the top `k`.
pub fn hit_ratio(lists: &[RankedList], k: usize) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let ranks = ranks(lists)?;
    let hits = ranks.iter().filter(|&&r| r <= k).count();
    Ok(100.0 * hits as f64 / ranks.len() as f64)
}

/// Equal-width bins over `[0, 1]`; 1.0 falls in the last bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Default for Histogram {
    fn default() -> Self {
        Histogram { counts: vec![0; HISTOGRAM_BINS] }
    }
}

impl Histogram {
    pub fn add(&mut self, score: f64) {
        let n = self.counts.len();
        let bin = ((score * n as f64) as usize).min(n - 1);
        self.counts[bin] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `[lower, upper)` edges of bin `i`.
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let n = self.counts.len() as f64;
        (i as f64 / n, (i + 1) as f64 / n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelReport {
    pub count: u64,
    /// Share of this label's candidates ranked above the valid one.
    pub ranked_above_valid: f64,
    /// Present only when every score in the run lies in `[0, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction_below: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction_above: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub theta_low: f64,
    pub theta_high: f64,
    /// Whether score-based fields were computed.
    pub probabilistic: bool,
    pub per_label: BTreeMap<Label, LabelReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_histogram: Option<Histogram>,
}

/// Per-confounder report. Score-based fields need every score in `[0, 1]`;
/// otherwise only rank-based fields are filled. Labels with no candidates
/// are omitted.
pub fn confounder_distribution(lists: &[RankedList], theta_low: f64, theta_high: f64) -> Distribution {
    let probabilistic = lists
        .iter()
        .flat_map(|l| &l.ranked)
        .all(|e| e.score.is_none_or(|s| (0.0..=1.0).contains(&s)));

    #[derive(Default)]
    struct Acc {
        count: u64,
        above_valid: u64,
        scored: u64,
        below: u64,
        above: u64,
        hist: Histogram,
    }
    let mut acc: BTreeMap<Label, Acc> = BTreeMap::new();
    let mut valid_hist = Histogram::default();

    for l in lists {
        for (pos, e) in l.ranked.iter().enumerate() {
            if e.label == Label::Valid {
                if let (true, Some(s)) = (probabilistic, e.score) {
                    valid_hist.add(s);
                }
                continue;
            }
            let a = acc.entry(e.label).or_default();
            a.count += 1;
            if pos + 1 < l.rank_of_valid {
                a.above_valid += 1;
            }
            if let (true, Some(s)) = (probabilistic, e.score) {
                a.scored += 1;
                a.below += u64::from(s < theta_low);
                a.above += u64::from(s > theta_high);
                a.hist.add(s);
            }
        }
    }

    let frac = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let per_label = acc
        .into_iter()
        .map(|(label, a)| {
            let scored = probabilistic && a.scored > 0;
            let report = LabelReport {
                count: a.count,
                ranked_above_valid: frac(a.above_valid, a.count),
                fraction_below: scored.then(|| frac(a.below, a.scored)),
                fraction_above: scored.then(|| frac(a.above, a.scored)),
                histogram: scored.then_some(a.hist),
            };
            (label, report)
        })
        .collect();
    Distribution {
        theta_low,
        theta_high,
        probabilistic,
        per_label,
        valid_histogram: (probabilistic && valid_hist.total() > 0).then_some(valid_hist),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub sample_count: usize,
    pub mrr: f64,
    /// `k` -> percentage.
    pub hit_ratio: BTreeMap<usize, f64>,
    pub distribution: Distribution,
}

pub fn evaluate(lists: &[RankedList], ks: &[usize], theta_low: f64, theta_high: f64) -> Result<EvalReport, EvalError> {
    let mrr = mrr(lists)?;
    let hit_ratio = ks.iter().map(|&k| Ok((k, hit_ratio(lists, k)?))).collect::<Result<_, EvalError>>()?;
    Ok(EvalReport {
        sample_count: lists.len(),
        mrr,
        hit_ratio,
        distribution: confounder_distribution(lists, theta_low, theta_high),
    })
}
