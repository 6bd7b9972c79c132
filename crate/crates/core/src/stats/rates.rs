use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::harness::{RunResult, VariantKind};

/// Fraction of results with at least one plausible patch.
pub fn success_rate(results: &[&RunResult]) -> Result<f64, StatsError> {
    if results.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    Ok(results.iter().filter(|r| r.success).count() as f64 / results.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRatePair {
    pub bug_id: String,
    pub sr_orig: f64,
    pub sr_trans: f64,
    pub sr_diff: f64,
    pub n_samples: usize,
}

/// One pair per bug with results for both variants, ordered by bug id.
/// `n_samples` is the original variant's sample count.
pub fn pair_success_rates(results: &[RunResult]) -> Vec<SuccessRatePair> {
    let mut by_bug: BTreeMap<&str, (Vec<&RunResult>, Vec<&RunResult>)> = BTreeMap::new();
    for r in results {
        let slot = by_bug.entry(&r.bug_id).or_default();
        match r.variant {
            VariantKind::Original => slot.0.push(r),
            VariantKind::Transformed => slot.1.push(r),
        }
    }
    by_bug
        .into_iter()
        .filter_map(|(bug, (o, t))| {
            let sr_orig = success_rate(&o).ok()?;
            let sr_trans = success_rate(&t).ok()?;
            Some(SuccessRatePair {
                bug_id: bug.to_string(),
                sr_orig,
                sr_trans,
                sr_diff: sr_trans - sr_orig,
                n_samples: o.len(),
            })
        })
        .collect()
}

/// Difficulty of a solvable bug by its original success rate. Bounds are
/// upper-inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DifficultyBin {
    Hard,
    Medium,
    Easy,
}

impl DifficultyBin {
    pub const ALL: [DifficultyBin; 3] = [DifficultyBin::Hard, DifficultyBin::Medium, DifficultyBin::Easy];

    /// `None` for unsolvable bugs.
    pub fn of(sr_orig: f64) -> Option<Self> {
        // Rates are ratios of small counts; the slack keeps 3/10 in Hard.
        const EPS: f64 = 1e-9;
        if sr_orig <= 0.0 {
            None
        } else if sr_orig <= 0.30 + EPS {
            Some(DifficultyBin::Hard)
        } else if sr_orig <= 0.70 + EPS {
            Some(DifficultyBin::Medium)
        } else {
            Some(DifficultyBin::Easy)
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DifficultyBin::Hard => "hard",
            DifficultyBin::Medium => "medium",
            DifficultyBin::Easy => "easy",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(bug: &str, variant: VariantKind, i: usize, success: bool) -> RunResult {
        RunResult {
            bug_id: bug.into(),
            variant,
            prompt_index: i,
            model: "m".into(),
            candidates: vec![],
            success,
            error: None,
        }
    }

    #[test]
    fn rates() {
        let rs: Vec<_> = (0..10).map(|i| run("a", VariantKind::Original, i, i < 7)).collect();
        let refs: Vec<_> = rs.iter().collect();
        assert_eq!(success_rate(&refs).unwrap(), 0.7);
        let fails: Vec<_> = (0..4).map(|i| run("a", VariantKind::Original, i, false)).collect();
        assert_eq!(success_rate(&fails.iter().collect::<Vec<_>>()).unwrap(), 0.0);
        assert_eq!(success_rate(&[]), Err(StatsError::EmptyInput));
    }

    #[test]
    fn pairs_need_both_variants() {
        let mut rs = vec![run("b", VariantKind::Original, 0, true), run("b", VariantKind::Transformed, 0, false)];
        rs.push(run("a", VariantKind::Original, 0, true));
        let p = pair_success_rates(&rs);
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].bug_id.as_str(), p[0].sr_diff), ("b", -1.0));
    }

    #[test]
    fn difficulty_bounds() {
        assert_eq!(DifficultyBin::of(0.0), None);
        assert_eq!(DifficultyBin::of(0.1), Some(DifficultyBin::Hard));
        assert_eq!(DifficultyBin::of(3.0 / 10.0), Some(DifficultyBin::Hard));
        assert_eq!(DifficultyBin::of(0.4), Some(DifficultyBin::Medium));
        assert_eq!(DifficultyBin::of(7.0 / 10.0), Some(DifficultyBin::Medium));
        assert_eq!(DifficultyBin::of(0.8), Some(DifficultyBin::Easy));
        assert_eq!(DifficultyBin::of(1.0), Some(DifficultyBin::Easy));
    }
}
