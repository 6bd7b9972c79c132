//! Success rates, paired tests, effect sizes, familiarity bins and the
//! permutation test over transformation counts.

mod correlation;
mod effect;
mod nll;
mod permutation;
mod rates;
mod report;
mod wilcoxon;

use thiserror::Error;

pub use correlation::{average_ranks, spearman, Correlation};
pub use effect::{vargha_delaney, EffectSize, Magnitude};
pub use nll::{
    bin_means, join_nll, lower_half_filter, mean_nll, nll_records, parse_nll_jsonl, NllInput, NllJoin, NllRecord,
    NLL_BINS,
};
pub use permutation::{permutation_test, DropReason, DroppedTerm, PermTestReport, TermResult};
pub use rates::{pair_success_rates, success_rate, DifficultyBin, SuccessRatePair};
pub use report::{analyze, table_csv, write_reports, AnalysisInput, ModelReport, NllSection, StatReport};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult, EXACT_MAX_N};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empty input")]
    EmptyInput,
    #[error("input is constant; the statistic is undefined")]
    DegenerateInput,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} observations, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("line {line}: {message}")]
    NllParse { line: usize, message: String },
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub(crate) fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}
