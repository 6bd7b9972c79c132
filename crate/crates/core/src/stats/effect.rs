use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Magnitude {
    /// Negligible on [0.44, 0.56], small out to 0.36 and 0.64, medium out
    /// to 0.29 and 0.71, large beyond.
    pub fn of(a12: f64) -> Self {
        if (0.44..=0.56).contains(&a12) {
            Magnitude::Negligible
        } else if (0.36..0.44).contains(&a12) || (a12 > 0.56 && a12 <= 0.64) {
            Magnitude::Small
        } else if (0.29..0.36).contains(&a12) || (a12 > 0.64 && a12 <= 0.71) {
            Magnitude::Medium
        } else {
            Magnitude::Large
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Magnitude::Negligible => "negligible",
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSize {
    pub a12: f64,
    pub magnitude: Magnitude,
}

/// Probability that a transformed value exceeds an original one, ties
/// counting half. `None` when either list is empty.
pub fn vargha_delaney(orig: &[f64], trans: &[f64]) -> Option<EffectSize> {
    if orig.is_empty() || trans.is_empty() {
        return None;
    }
    let mut o = orig.to_vec();
    o.sort_by(f64::total_cmp);
    // Twice the score keeps the count integral.
    let mut twice: u128 = 0;
    for &t in trans {
        let below = o.partition_point(|&x| x < t);
        let not_above = o.partition_point(|&x| x <= t);
        twice += 2 * below as u128 + (not_above - below) as u128;
    }
    let a12 = twice as f64 / (2 * orig.len() * trans.len()) as f64;
    Some(EffectSize { a12, magnitude: Magnitude::of(a12) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_lists() {
        let e = vargha_delaney(&[0.1, 0.5, 0.9], &[0.1, 0.5, 0.9]).unwrap();
        assert_eq!(e.a12, 0.5);
        assert_eq!(e.magnitude, Magnitude::Negligible);
    }

    #[test]
    fn published_labels() {
        assert_eq!(Magnitude::of(0.414), Magnitude::Small);
        assert_eq!(Magnitude::of(0.109), Magnitude::Large);
    }

    #[test]
    fn boundaries() {
        let expect = [
            (0.29, Magnitude::Medium),
            (0.36, Magnitude::Small),
            (0.44, Magnitude::Negligible),
            (0.56, Magnitude::Negligible),
            (0.64, Magnitude::Small),
            (0.71, Magnitude::Medium),
        ];
        for (a, m) in expect {
            assert_eq!(Magnitude::of(a), m, "{a}");
        }
    }

    #[test]
    fn counts_pairs() {
        let e = vargha_delaney(&[0.0, 1.0], &[0.5, 1.0]).unwrap();
        // pairs t>o: (0.5,0),(1,0); ties: (1,1)
        assert_eq!(e.a12, 2.5 / 4.0);
        assert!(vargha_delaney(&[], &[1.0]).is_none());
    }
}
