use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::correlation::{spearman, Correlation};
use super::effect::{vargha_delaney, EffectSize};
use super::nll::{bin_means, join_nll, lower_half_filter, nll_records, NllInput, NLL_BINS};
use super::permutation::{permutation_test, PermTestReport};
use super::rates::{pair_success_rates, DifficultyBin, SuccessRatePair};
use super::wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
use super::{mean, sample_sd};
use crate::harness::{RunResult, VariantKind};
use crate::transforms::TransformKind;

pub struct AnalysisInput<'a> {
    pub results: &'a [RunResult],
    pub nll: Option<&'a [NllInput]>,
    /// Per-bug transformation counts; the permutation test runs when present.
    pub covariates: Option<&'a BTreeMap<String, BTreeMap<TransformKind, usize>>>,
    pub permutation_iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NllSection {
    pub bin_counts: [usize; NLL_BINS],
    pub bin_mean_sr_diff: [Option<f64>; NLL_BINS],
    pub lower_half: Option<Correlation>,
    pub lower_half_n: usize,
    /// Solvable bugs without an NLL value.
    pub missing: Vec<String>,
}

/// Statistics for one model. Rates are fractions over solvable bugs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub solvable_bugs: usize,
    pub sr_orig_mean: f64,
    pub sr_orig_sd: f64,
    pub sr_trans_mean: Option<f64>,
    pub sr_trans_sd: Option<f64>,
    pub sr_diff_mean: Option<f64>,
    pub sr_diff_worst: Option<f64>,
    pub wilcoxon: Option<WilcoxonResult>,
    pub effect: Option<EffectSize>,
    pub pairs: Vec<SuccessRatePair>,
    pub nll: Option<NllSection>,
    pub permutation: Option<PermTestReport>,
    pub notices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub models: Vec<ModelReport>,
}

fn per_bug_rates(results: &[&RunResult], kind: VariantKind) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in results.iter().filter(|r| r.variant == kind) {
        let c = counts.entry(r.bug_id.clone()).or_default();
        c.0 += usize::from(r.success);
        c.1 += 1;
    }
    counts.into_iter().map(|(b, (s, n))| (b, s as f64 / n as f64)).collect()
}

pub fn analyze(input: &AnalysisInput<'_>) -> StatReport {
    let mut by_model: BTreeMap<&str, Vec<&RunResult>> = BTreeMap::new();
    for r in input.results {
        by_model.entry(&r.model).or_default().push(r);
    }
    StatReport { models: by_model.into_iter().map(|(m, rs)| model_report(m, &rs, input)).collect() }
}

fn model_report(model: &str, results: &[&RunResult], input: &AnalysisInput<'_>) -> ModelReport {
    let mut notices = Vec::new();
    let orig = per_bug_rates(results, VariantKind::Original);
    let solvable: Vec<(&String, f64)> = orig.iter().filter(|(_, sr)| **sr > 0.0).map(|(b, sr)| (b, *sr)).collect();
    let orig_rates: Vec<f64> = solvable.iter().map(|s| s.1).collect();
    if orig.is_empty() {
        notices.push("no original runs".to_string());
    } else if solvable.is_empty() {
        notices.push("no solvable bugs".to_string());
    }

    let owned: Vec<RunResult> = results.iter().map(|r| (*r).clone()).collect();
    let pairs: Vec<SuccessRatePair> =
        pair_success_rates(&owned).into_iter().filter(|p| DifficultyBin::of(p.sr_orig).is_some()).collect();
    let mut rep = ModelReport {
        model: model.to_string(),
        solvable_bugs: solvable.len(),
        sr_orig_mean: if orig_rates.is_empty() { 0.0 } else { mean(&orig_rates) },
        sr_orig_sd: sample_sd(&orig_rates),
        sr_trans_mean: None,
        sr_trans_sd: None,
        sr_diff_mean: None,
        sr_diff_worst: None,
        wilcoxon: None,
        effect: None,
        pairs: Vec::new(),
        nll: None,
        permutation: None,
        notices,
    };
    if pairs.is_empty() {
        rep.notices.push("no transformed runs for solvable bugs; paired statistics omitted".to_string());
        return rep;
    }
    if pairs.len() < solvable.len() {
        rep.notices.push(format!("{} solvable bugs lack transformed runs", solvable.len() - pairs.len()));
    }
    let po: Vec<f64> = pairs.iter().map(|p| p.sr_orig).collect();
    let pt: Vec<f64> = pairs.iter().map(|p| p.sr_trans).collect();
    let diffs: Vec<f64> = pairs.iter().map(|p| p.sr_diff).collect();
    rep.sr_orig_mean = mean(&po);
    rep.sr_orig_sd = sample_sd(&po);
    rep.sr_trans_mean = Some(mean(&pt));
    rep.sr_trans_sd = Some(sample_sd(&pt));
    rep.sr_diff_mean = Some(mean(&pt) - mean(&po));
    rep.sr_diff_worst = diffs.iter().copied().reduce(f64::min);
    rep.wilcoxon = wilcoxon_signed_rank(&diffs).ok();
    rep.effect = vargha_delaney(&po, &pt);

    if let Some(nll) = input.nll {
        let records = nll_records(nll);
        let join = join_nll(&pairs, &records);
        let mut bin_counts = [0; NLL_BINS];
        for (_, r) in &join.rows {
            bin_counts[r.bin] += 1;
        }
        let lower: BTreeSet<String> = lower_half_filter(&records).into_iter().map(|r| r.bug_id).collect();
        let low_rows: Vec<_> = join.rows.iter().filter(|(p, _)| lower.contains(&p.bug_id)).collect();
        let x: Vec<f64> = low_rows.iter().map(|(_, r)| r.mean_nll).collect();
        let y: Vec<f64> = low_rows.iter().map(|(p, _)| p.sr_diff).collect();
        let lower_half = spearman(&x, &y).ok();
        if lower_half.is_none() {
            rep.notices.push("lower-half correlation undefined".to_string());
        }
        rep.nll = Some(NllSection {
            bin_counts,
            bin_mean_sr_diff: bin_means(&join.rows),
            lower_half,
            lower_half_n: low_rows.len(),
            missing: join.missing,
        });
    }

    if let Some(cov) = input.covariates {
        let with_cov: Vec<&SuccessRatePair> = pairs.iter().filter(|p| cov.contains_key(&p.bug_id)).collect();
        let x: Vec<BTreeMap<TransformKind, usize>> = with_cov.iter().map(|p| cov[&p.bug_id].clone()).collect();
        let y: Vec<f64> = with_cov.iter().map(|p| p.sr_diff).collect();
        match permutation_test(&x, &y, input.permutation_iterations, input.seed, 3) {
            Ok(r) => rep.permutation = Some(r),
            Err(e) => rep.notices.push(format!("permutation test skipped: {e}")),
        }
    }
    rep.pairs = pairs;
    rep
}

fn pct(v: Option<f64>) -> String {
    v.map(|v| format!("{:.2}", 100.0 * v)).unwrap_or_default()
}

fn num(v: Option<f64>, places: usize) -> String {
    v.map(|v| format!("{v:.places$}")).unwrap_or_default()
}

fn term_name(term: &[TransformKind]) -> String {
    term.iter().map(|k| k.abbrev()).collect::<Vec<_>>().join(":")
}

pub fn table_csv(report: &StatReport) -> String {
    let mut s = String::from(
        "model,solvable_bugs,sr_orig_mean,sr_orig_sd,sr_trans_mean,sr_trans_sd,sr_diff_mean,sr_diff_worst,wilcoxon_p,a12,magnitude\n",
    );
    for m in &report.models {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            m.model,
            m.solvable_bugs,
            pct(Some(m.sr_orig_mean)),
            pct(Some(m.sr_orig_sd)),
            pct(m.sr_trans_mean),
            pct(m.sr_trans_sd),
            pct(m.sr_diff_mean),
            pct(m.sr_diff_worst),
            num(m.wilcoxon.as_ref().map(|w| w.p_value), 6),
            num(m.effect.map(|e| e.a12), 3),
            m.effect.map(|e| e.magnitude.as_str()).unwrap_or_default(),
        );
    }
    s
}

/// Writes every table under `dir` and returns the paths written.
pub fn write_reports(dir: &Path, report: &StatReport) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files: Vec<(&str, String)> = vec![("table.csv", table_csv(report))];

    let mut diff = String::from("model,bug_id,difficulty,sr_orig,sr_trans,sr_diff\n");
    for m in &report.models {
        for p in &m.pairs {
            let bin = DifficultyBin::of(p.sr_orig).map(DifficultyBin::as_str).unwrap_or_default();
            let _ =
                writeln!(diff, "{},{},{},{:.4},{:.4},{:.4}", m.model, p.bug_id, bin, p.sr_orig, p.sr_trans, p.sr_diff);
        }
    }
    files.push(("difficulty.csv", diff));

    if report.models.iter().any(|m| m.nll.is_some()) {
        let mut bins = String::from("model,bin,n,mean_sr_diff\n");
        let mut corr = String::from("model,n,rho,p_value\n");
        for m in &report.models {
            let Some(nll) = &m.nll else { continue };
            for b in 0..NLL_BINS {
                let _ = writeln!(bins, "{},{},{},{}", m.model, b, nll.bin_counts[b], pct(nll.bin_mean_sr_diff[b]));
            }
            let _ = writeln!(
                corr,
                "{},{},{},{}",
                m.model,
                nll.lower_half_n,
                num(nll.lower_half.map(|c| c.rho), 4),
                num(nll.lower_half.map(|c| c.p_value), 6)
            );
        }
        files.push(("nll_bins.csv", bins));
        files.push(("nll_lower_half.csv", corr));
    }

    if report.models.iter().any(|m| m.permutation.is_some()) {
        let mut perm = String::from("model,term,coefficient,statistic,p_value\n");
        for m in &report.models {
            let Some(p) = &m.permutation else { continue };
            for t in &p.terms {
                let _ = writeln!(
                    perm,
                    "{},{},{:.6},{:.6},{:.6}",
                    m.model,
                    term_name(&t.term),
                    t.coefficient,
                    t.observed_statistic,
                    t.p_value
                );
            }
        }
        files.push(("permutation.csv", perm));
    }
    files.push(("report.json", serde_json::to_string_pretty(report).expect("report serializes") + "\n"));

    let mut written = Vec::new();
    for (name, text) in files {
        let p = dir.join(name);
        std::fs::write(&p, text)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn runs(model: &str, bug: &str, kind: VariantKind, ok: usize, n: usize) -> Vec<RunResult> {
        (0..n)
            .map(|i| RunResult {
                bug_id: bug.into(),
                variant: kind,
                prompt_index: i,
                model: model.into(),
                candidates: vec![],
                success: i < ok,
                error: None,
            })
            .collect()
    }

    fn input(results: &[RunResult]) -> AnalysisInput<'_> {
        AnalysisInput { results, nll: None, covariates: None, permutation_iterations: 1000, seed: 0 }
    }

    #[test]
    fn worst_case_and_unsolvable() {
        let mut rs = runs("m", "a", VariantKind::Original, 10, 10);
        rs.extend(runs("m", "a", VariantKind::Transformed, 0, 10));
        rs.extend(runs("m", "b", VariantKind::Original, 5, 10));
        rs.extend(runs("m", "b", VariantKind::Transformed, 5, 10));
        rs.extend(runs("m", "c", VariantKind::Original, 0, 10));
        rs.extend(runs("m", "c", VariantKind::Transformed, 3, 10));
        let r = analyze(&input(&rs));
        let m = &r.models[0];
        assert_eq!(m.solvable_bugs, 2);
        assert_eq!(m.sr_diff_worst, Some(-1.0));
        assert!(table_csv(&r).lines().nth(1).unwrap().contains(",-100.00,"));
    }

    #[test]
    fn original_only_log() {
        let rs = runs("m", "a", VariantKind::Original, 4, 10);
        let r = analyze(&input(&rs));
        let m = &r.models[0];
        assert!(m.sr_trans_mean.is_none() && m.wilcoxon.is_none());
        assert!(m.notices.iter().any(|n| n.contains("paired statistics omitted")));
        assert_eq!(table_csv(&r).lines().nth(1).unwrap(), "m,1,40.00,0.00,,,,,,,");
    }
}
