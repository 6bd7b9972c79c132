use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::correlation::average_ranks;
use super::rates::SuccessRatePair;
use super::StatsError;

pub const NLL_BINS: usize = 5;

/// One line of an NLL file: a precomputed mean or the token logprobs of
/// the original source file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NllInput {
    Mean { bug_id: String, mean_nll: f64 },
    Tokens { bug_id: String, token_logprobs: Vec<f64> },
}

impl NllInput {
    pub fn bug_id(&self) -> &str {
        match self {
            NllInput::Mean { bug_id, .. } | NllInput::Tokens { bug_id, .. } => bug_id,
        }
    }

    /// `None` for an empty token list.
    pub fn mean_nll(&self) -> Option<f64> {
        match self {
            NllInput::Mean { mean_nll, .. } => Some(*mean_nll),
            NllInput::Tokens { token_logprobs, .. } => mean_nll(token_logprobs),
        }
    }
}

/// Mean of -log p over tokens, in nats.
pub fn mean_nll(token_logprobs: &[f64]) -> Option<f64> {
    (!token_logprobs.is_empty()).then(|| -token_logprobs.iter().sum::<f64>() / token_logprobs.len() as f64)
}

pub fn parse_nll_jsonl(text: &str) -> Result<Vec<NllInput>, StatsError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| StatsError::NllParse { line: i + 1, message: e.to_string() }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NllRecord {
    pub bug_id: String,
    pub mean_nll: f64,
    pub percentile_rank: f64,
    pub bin: usize,
}

/// Percentile rank (rank - 0.5) / n with average ranks for ties, and the
/// equal-width bin of that rank. Inputs without a usable value are skipped.
pub fn nll_records(inputs: &[NllInput]) -> Vec<NllRecord> {
    let usable: Vec<(&str, f64)> =
        inputs.iter().filter_map(|i| i.mean_nll().filter(|v| v.is_finite()).map(|v| (i.bug_id(), v))).collect();
    let values: Vec<f64> = usable.iter().map(|u| u.1).collect();
    let ranks = average_ranks(&values);
    let n = values.len() as f64;
    usable
        .iter()
        .zip(ranks)
        .map(|(&(bug_id, mean_nll), r)| {
            let percentile_rank = (r - 0.5) / n;
            let bin = ((percentile_rank * NLL_BINS as f64).floor() as usize).min(NLL_BINS - 1);
            NllRecord { bug_id: bug_id.to_string(), mean_nll, percentile_rank, bin }
        })
        .collect()
}

pub fn lower_half_filter(records: &[NllRecord]) -> Vec<NllRecord> {
    records.iter().filter(|r| r.percentile_rank < 0.5).cloned().collect()
}

/// Success-rate pairs matched with their NLL record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NllJoin {
    pub rows: Vec<(SuccessRatePair, NllRecord)>,
    /// Bugs with success rates but no NLL value.
    pub missing: Vec<String>,
}

pub fn join_nll(pairs: &[SuccessRatePair], records: &[NllRecord]) -> NllJoin {
    let by_bug: BTreeMap<&str, &NllRecord> = records.iter().map(|r| (r.bug_id.as_str(), r)).collect();
    let mut out = NllJoin::default();
    for p in pairs {
        match by_bug.get(p.bug_id.as_str()) {
            Some(r) => out.rows.push((p.clone(), (*r).clone())),
            None => out.missing.push(p.bug_id.clone()),
        }
    }
    out
}

/// Mean sr_diff per bin; `None` for empty bins.
pub fn bin_means(rows: &[(SuccessRatePair, NllRecord)]) -> [Option<f64>; NLL_BINS] {
    let mut sums = [(0.0, 0usize); NLL_BINS];
    for (p, r) in rows {
        sums[r.bin].0 += p.sr_diff;
        sums[r.bin].1 += 1;
    }
    sums.map(|(s, c)| (c > 0).then(|| s / c as f64))
}
