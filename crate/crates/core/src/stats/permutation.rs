use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::transforms::TransformKind;

/// Iterations per independently seeded stream. Fixed so results do not
/// depend on the thread count.
const CHUNK: usize = 1000;
/// Product columns need at least this many bugs with a nonzero value.
const MIN_NONZERO_CELLS: usize = 5;
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermResult {
    pub term: Vec<TransformKind>,
    pub coefficient: f64,
    /// |t| of the coefficient in the full least-squares fit.
    pub observed_statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    ZeroVariance,
    SparseCells,
    RankDeficient,
    NoResidualDf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedTerm {
    pub term: Vec<TransformKind>,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermTestReport {
    pub terms: Vec<TermResult>,
    pub dropped: Vec<DroppedTerm>,
    pub iterations: usize,
    pub seed: u64,
    pub n_bugs: usize,
}

fn subsets(k: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
    if order >= 2 {
        for a in 0..k {
            for b in a + 1..k {
                out.push(vec![a, b]);
            }
        }
    }
    if order >= 3 {
        for a in 0..k {
            for b in a + 1..k {
                for c in b + 1..k {
                    out.push(vec![a, b, c]);
                }
            }
        }
    }
    out
}

/// Orthonormal basis built column by column; columns that add no new
/// direction are rejected.
struct Basis {
    q: Vec<DVector<f64>>,
    r_cols: Vec<Vec<f64>>,
}

impl Basis {
    fn try_push(&mut self, x: &DVector<f64>) -> bool {
        let mut v = x.clone();
        let mut coef = vec![0.0; self.q.len()];
        for _ in 0..2 {
            for (j, qj) in self.q.iter().enumerate() {
                let c = qj.dot(&v);
                coef[j] += c;
                v.axpy(-c, qj, 1.0);
            }
        }
        let norm = v.norm();
        if norm <= RANK_TOL * x.norm().max(1.0) {
            return false;
        }
        coef.push(norm);
        self.q.push(v / norm);
        self.r_cols.push(coef);
        true
    }
}

/// Least-squares fit reusable across permuted responses.
struct Fit {
    q: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    /// Euclidean norms of the rows of R⁻¹.
    se_scale: Vec<f64>,
    df: f64,
}

impl Fit {
    fn new(basis: Basis, n: usize) -> Self {
        let p = basis.q.len();
        let q = DMatrix::from_columns(&basis.q);
        let mut r = DMatrix::zeros(p, p);
        for (j, col) in basis.r_cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                r[(i, j)] = *v;
            }
        }
        let r_inv = r.solve_upper_triangular(&DMatrix::identity(p, p)).expect("diagonal is nonzero");
        let se_scale = (0..p).map(|i| r_inv.row(i).norm()).collect();
        Fit { q, r_inv, se_scale, df: (n - p) as f64 }
    }

    /// Coefficients and |t| for every column.
    fn stats(&self, y: &DVector<f64>) -> (DVector<f64>, Vec<f64>) {
        let qty = self.q.tr_mul(y);
        let beta = &self.r_inv * &qty;
        let rss = (y.norm_squared() - qty.norm_squared()).max(0.0);
        let sigma = (rss / self.df).sqrt().max(f64::MIN_POSITIVE);
        let t = beta.iter().zip(&self.se_scale).map(|(b, s)| (b / (sigma * s)).abs()).collect();
        (beta, t)
    }
}

/// Tests each transformation count, and products of up to `max_order`
/// counts, as a predictor of the response in one linear model with
/// intercept, on mean-centered counts. The statistic is |t| of the coefficient; permutations shuffle
/// the response and p = (1 + exceedances) / (1 + iterations).
pub fn permutation_test(
    covariates: &[BTreeMap<TransformKind, usize>],
    response: &[f64],
    iterations: usize,
    seed: u64,
    max_order: usize,
) -> Result<PermTestReport, StatsError> {
    let n = response.len();
    if covariates.len() != n {
        return Err(StatsError::LengthMismatch(covariates.len(), n));
    }
    if n < 2 {
        return Err(StatsError::TooFew { need: 2, got: n });
    }
    if iterations < 1000 {
        return Err(StatsError::TooFew { need: 1000, got: iterations });
    }
    let kinds = TransformKind::ORDER;
    let counts: Vec<Vec<f64>> =
        covariates.iter().map(|c| kinds.iter().map(|k| *c.get(k).unwrap_or(&0) as f64).collect()).collect();
    // Products are formed from centered counts so a main effect stays the
    // average effect of its count rather than the effect when all others are 0.
    let means: Vec<f64> = (0..kinds.len()).map(|j| counts.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let centered: Vec<Vec<f64>> = counts.iter().map(|r| r.iter().zip(&means).map(|(v, m)| v - m).collect()).collect();

    let mut basis = Basis { q: Vec::new(), r_cols: Vec::new() };
    basis.try_push(&DVector::from_element(n, 1.0));
    let mut kept: Vec<Vec<TransformKind>> = Vec::new();
    let mut dropped = Vec::new();
    for subset in subsets(kinds.len(), max_order.clamp(1, 3)) {
        let term: Vec<TransformKind> = subset.iter().map(|&i| kinds[i]).collect();
        let raw: Vec<f64> = counts.iter().map(|row| subset.iter().map(|&i| row[i]).product()).collect();
        let col = DVector::from_iterator(n, centered.iter().map(|row| subset.iter().map(|&i| row[i]).product::<f64>()));
        let reason = if raw.iter().all(|v| *v == raw[0]) {
            Some(DropReason::ZeroVariance)
        } else if subset.len() > 1 && raw.iter().filter(|v| **v != 0.0).count() < MIN_NONZERO_CELLS {
            Some(DropReason::SparseCells)
        } else if basis.q.len() + 1 >= n {
            Some(DropReason::NoResidualDf)
        } else if !basis.try_push(&col) {
            Some(DropReason::RankDeficient)
        } else {
            None
        };
        match reason {
            Some(reason) => dropped.push(DroppedTerm { term, reason }),
            None => kept.push(term),
        }
    }

    let fit = Fit::new(basis, n);
    let y = DVector::from_column_slice(response);
    let (beta, observed) = fit.stats(&y);
    // Column 0 is the intercept.
    let threshold: Vec<f64> = observed[1..].iter().map(|t| t * (1.0 - 1e-12)).collect();
    let chunks = iterations.div_ceil(CHUNK);
    let exceed = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut perm = response.to_vec();
            let mut hits = vec![0usize; threshold.len()];
            for _ in 0..CHUNK.min(iterations - c * CHUNK) {
                perm.shuffle(&mut rng);
                let (_, t) = fit.stats(&DVector::from_column_slice(&perm));
                for (h, (tj, th)) in hits.iter_mut().zip(t[1..].iter().zip(&threshold)) {
                    *h += usize::from(tj >= th);
                }
            }
            hits
        })
        .reduce(|| vec![0; threshold.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());

    let terms = kept
        .into_iter()
        .enumerate()
        .map(|(j, term)| TermResult {
            term,
            coefficient: beta[j + 1],
            observed_statistic: observed[j + 1],
            p_value: (1 + exceed[j]) as f64 / (1 + iterations) as f64,
        })
        .collect();
    Ok(PermTestReport { terms, dropped, iterations, seed, n_bugs: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn design(n: usize, seed: u64) -> Vec<BTreeMap<TransformKind, usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                TransformKind::ORDER
                    .iter()
                    .map(|&k| (k, if k == TransformKind::RFun { 1 } else { rng.random_range(0..4) }))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn constant_column_dropped_and_deterministic() {
        let x = design(60, 1);
        let y: Vec<f64> = (0..60).map(|i| (i % 7) as f64 / 10.0).collect();
        let a = permutation_test(&x, &y, 1000, 9, 1).unwrap();
        assert!(a.dropped.contains(&DroppedTerm { term: vec![TransformKind::RFun], reason: DropReason::ZeroVariance }));
        assert_eq!(a.terms.len(), 8);
        assert_eq!(a, permutation_test(&x, &y, 1000, 9, 1).unwrap());
        assert!(a.terms.iter().all(|t| t.p_value > 0.0 && t.p_value <= 1.0));
    }

    #[test]
    fn planted_effect_found() {
        let x = design(80, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y: Vec<f64> =
            x.iter().map(|c| -0.2 * c[&TransformKind::NestEI] as f64 + rng.random_range(-0.1..0.1)).collect();
        let r = permutation_test(&x, &y, 1000, 4, 2).unwrap();
        let nest = r.terms.iter().find(|t| t.term == [TransformKind::NestEI]).unwrap();
        assert!(nest.p_value < 0.01);
        assert!(nest.coefficient < 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(permutation_test(&design(1, 0), &[0.0], 1000, 0, 1).is_err());
        assert!(permutation_test(&design(5, 0), &[0.0; 5], 10, 0, 1).is_err());
        assert!(permutation_test(&design(5, 0), &[0.0; 4], 1000, 0, 1).is_err());
    }
}
