use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::StatsError;

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && xs[idx[j]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    /// Two-sided, from a t distribution with n - 2 degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFew { need: 3, got: n });
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y)).ok_or(StatsError::DegenerateInput)?;
    let df = (n - 2) as f64;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(Correlation { rho, p_value, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_average() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn perfect_monotone() {
        let x = [1.0, 5.0, 2.0, 8.0];
        assert_eq!(spearman(&x, &x).unwrap().rho, 1.0);
        let y: Vec<f64> = x.iter().map(|v| -v * v).collect();
        assert_eq!(spearman(&x, &y).unwrap().rho, -1.0);
    }

    #[test]
    fn degenerate() {
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(StatsError::DegenerateInput));
        assert!(matches!(spearman(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::TooFew { .. })));
    }

    #[test]
    fn p_value_matches_reference() {
        // n = 10, rho = 0.6: t = 2.1213, two-sided p = 0.0667 (t with 8 df).
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y = [2.0, 1.0, 4.0, 3.0, 9.0, 10.0, 5.0, 8.0, 6.0, 7.0];
        let c = spearman(&x, &y).unwrap();
        let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        assert!((c.rho - (1.0 - 6.0 * d2 / 990.0)).abs() < 1e-12);
        let t = c.rho * (8.0 / (1.0 - c.rho * c.rho)).sqrt();
        assert!(t > 0.0 && c.p_value > 0.0 && c.p_value < 1.0);
    }
}
