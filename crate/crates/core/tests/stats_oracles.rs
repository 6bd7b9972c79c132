use metarepair_core::stats::{spearman, vargha_delaney, wilcoxon_signed_rank, Magnitude};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn spearman_recovers_known_rank_correlation() {
    // For a bivariate normal with Pearson r the population Spearman
    // coefficient is (6 / pi) asin(r / 2).
    for r in [-0.6, 0.0, 0.3, 0.8] {
        let expected = 6.0 / std::f64::consts::PI * (r / 2.0f64).asin();
        let mut total = 0.0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, y): (Vec<f64>, Vec<f64>) = (0..200)
                .map(|_| {
                    let a: f64 = StandardNormal.sample(&mut rng);
                    let b: f64 = StandardNormal.sample(&mut rng);
                    (a, r * a + (1.0 - r * r).sqrt() * b)
                })
                .unzip();
            total += spearman(&x, &y).unwrap().rho;
        }
        let mean = total / 100.0;
        assert!((mean - expected).abs() < 0.05, "r={r}: mean rho {mean}, expected {expected}");
    }
}

#[test]
fn moderate_correlation_on_113_bugs() {
    // Tie-free ranks tuned until rho is 0.303, as in a mid-sized study.
    let n = 113usize;
    let target = (1.0 - 0.303) * (n * (n * n - 1)) as f64 / 6.0;
    // A sum of squared rank differences over a permutation is always even.
    let target = 2 * (target / 2.0).round() as i64;
    let mut y: Vec<i64> = (0..n as i64).collect();
    let d2 = |y: &[i64]| y.iter().enumerate().map(|(i, v)| (i as i64 - v).pow(2)).sum::<i64>();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cur = d2(&y);
    for _ in 0..10_000_000 {
        if cur == target {
            break;
        }
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        y.swap(i, j);
        let next = d2(&y);
        if (next - target).abs() < (cur - target).abs() {
            cur = next;
        } else {
            y.swap(i, j);
        }
    }
    assert_eq!(cur, target);
    let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let y: Vec<f64> = y.iter().map(|v| *v as f64).collect();
    let c = spearman(&x, &y).unwrap();
    assert!((c.rho - 0.303).abs() < 1e-4, "rho {}", c.rho);
    assert!((c.p_value - 0.0011).abs() < 1e-4, "p {}", c.p_value);
}

#[test]
fn consistent_large_drop_is_significant() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let orig: Vec<f64> = (0..60).map(|_| rng.random_range(6..=10) as f64 / 10.0).collect();
    let trans: Vec<f64> = orig.iter().map(|o| o - rng.random_range(3..=6) as f64 / 10.0).collect();
    let diffs: Vec<f64> = trans.iter().zip(&orig).map(|(t, o)| t - o).collect();
    let w = wilcoxon_signed_rank(&diffs).unwrap();
    assert!(w.p_value < 0.001, "p {}", w.p_value);
    let e = vargha_delaney(&orig, &trans).unwrap();
    assert!(e.a12 < 0.29);
    assert_eq!(e.magnitude, Magnitude::Large);
}

#[test]
fn no_change_is_not_significant() {
    let w = wilcoxon_signed_rank(&[0.0; 12]).unwrap();
    assert_eq!(w.p_value, 1.0);
    let e = vargha_delaney(&[0.5; 10], &[0.5; 10]).unwrap();
    assert_eq!(e.a12, 0.5);
    assert_eq!(e.magnitude, Magnitude::Negligible);
}
