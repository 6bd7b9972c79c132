use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::correlation::average_ranks;
use super::StatsError;

/// Largest effective sample size handled by exact enumeration.
pub const EXACT_MAX_N: usize = 25;

/// Differences smaller than this count as zero.
const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of positive differences.
    pub w_plus: f64,
    pub w_minus: f64,
    /// min(W+, W-).
    pub statistic: f64,
    /// Number of nonzero differences.
    pub n_effective: usize,
    /// Two-sided.
    pub p_value: f64,
    pub exact: bool,
    /// Every difference was zero; `p_value` is 1.
    pub all_zero: bool,
}

/// Two-sided signed-rank test on paired differences. Zero differences are
/// dropped and tied magnitudes get average ranks. Small samples use the
/// exact null distribution of the tied ranks; larger ones a normal
/// approximation with tie and continuity corrections.
pub fn wilcoxon_signed_rank(diffs: &[f64]) -> Result<WilcoxonResult, StatsError> {
    if diffs.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let nz: Vec<f64> = diffs.iter().copied().filter(|d| d.abs() > ZERO_TOL).collect();
    let n = nz.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            w_plus: 0.0,
            w_minus: 0.0,
            statistic: 0.0,
            n_effective: 0,
            p_value: 1.0,
            exact: true,
            all_zero: true,
        });
    }
    let mags: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&mags);
    let w_plus: f64 = nz.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = n as f64 * (n as f64 + 1.0) / 2.0;
    let w_minus = total - w_plus;
    let exact = n <= EXACT_MAX_N;
    let p_value = if exact { exact_p(&ranks, w_plus) } else { normal_p(&ranks, w_plus) };
    Ok(WilcoxonResult {
        w_plus,
        w_minus,
        statistic: w_plus.min(w_minus),
        n_effective: n,
        p_value,
        exact,
        all_zero: false,
    })
}

/// Counts sign assignments by their doubled rank sum, which is an integer
/// even with average ranks.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; max + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let total = 2f64.powi(ranks.len() as i32);
    let w = (2.0 * w_plus).round() as usize;
    let lower: f64 = counts[..=w].iter().sum::<f64>() / total;
    let upper: f64 = counts[w..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mu = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|r| **r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let norm = Normal::standard();
    (2.0 * norm.sf(z)).min(1.0)
}
