//! Measurement-outcome distributions keyed by classical bitstrings.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

/// Bitstring with `bits[0]` as the least significant (rightmost) character.
pub fn bitstring_lsb_first(bits: &[bool]) -> String {
    bits.iter().rev().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Fixed-width bitstring of the low `width` bits of `value`, most significant first.
pub fn bitstring_of(value: u64, width: usize) -> String {
    (0..width).rev().map(|k| if (value >> k) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Parses a bitstring written most significant bit first into an index.
pub fn parse_bitstring(text: &str) -> Option<u64> {
    if text.is_empty() || text.len() > 64 {
        return None;
    }
    text.chars().try_fold(0u64, |acc, c| match c {
        '0' => Some(acc << 1),
        '1' => Some((acc << 1) | 1),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OutcomeDistribution {
    /// Number of characters in every key.
    #[serde(skip)]
    pub width: usize,
    pub entries: BTreeMap<String, f64>,
    /// Probability mass dropped below the pruning threshold.
    pub pruned_mass: f64,
}

impl OutcomeDistribution {
    pub fn new(width: usize) -> Self {
        OutcomeDistribution { width, entries: BTreeMap::new(), pruned_mass: 0.0 }
    }

    pub fn point_mass(key: &str) -> Self {
        let mut d = OutcomeDistribution::new(key.len());
        d.entries.insert(key.to_string(), 1.0);
        d
    }

    /// Adds `p` to the entry for `key`.
    pub fn add(&mut self, key: String, p: f64) {
        debug_assert_eq!(key.len(), self.width);
        *self.entries.entry(key).or_insert(0.0) += p;
    }

    pub fn get(&self, key: &str) -> f64 {
        self.entries.get(key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum::<f64>()
    }

    /// `|Σ entries + pruned_mass − 1|`.
    pub fn normalization_error(&self) -> f64 {
        (self.total() + self.pruned_mass - 1.0).abs()
    }

    /// Entries sorted by descending probability (ties by key).
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self.entries.iter().map(|(k, &p)| (k.as_str(), p)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
        v
    }

    /// Returns the distribution with key characters permuted: character for
    /// output bit `k` of `self` lands at output bit `perm[k]` of the result.
    pub fn permute_bits(&self, perm: &[usize]) -> OutcomeDistribution {
        assert_eq!(perm.len(), self.width);
        let mut out = OutcomeDistribution::new(self.width);
        out.pruned_mass = self.pruned_mass;
        for (key, &p) in &self.entries {
            let lsb: Vec<bool> = key.chars().rev().map(|c| c == '1').collect();
            let mut permuted = vec![false; self.width];
            for (k, &b) in lsb.iter().enumerate() {
                permuted[perm[k]] = b;
            }
            out.add(bitstring_lsb_first(&permuted), p);
        }
        out
    }

    /// Total variation distance `½ Σ |p_i − q_i|` over the union of supports.
    pub fn tvd(&self, other: &OutcomeDistribution) -> f64 {
        self.union_keys(other)
            .into_iter()
            .map(|k| (self.get(k) - other.get(k)).abs())
            .sum::<f64>()
            / 2.0
    }

    /// Key with the largest absolute probability difference.
    pub fn worst_key<'a>(&'a self, other: &'a OutcomeDistribution) -> Option<(&'a str, f64, f64)> {
        self.union_keys(other)
            .into_iter()
            .map(|k| (k, self.get(k), other.get(k)))
            .max_by(|a, b| (a.1 - a.2).abs().total_cmp(&(b.1 - b.2).abs()).then(b.0.cmp(a.0)))
    }

    fn union_keys<'a>(&'a self, other: &'a OutcomeDistribution) -> BTreeSet<&'a str> {
        self.entries.keys().chain(other.entries.keys()).map(String::as_str).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bitstring_conventions() {
        assert_eq!(bitstring_of(1, 3), "001");
        assert_eq!(bitstring_of(6, 3), "110");
        assert_eq!(bitstring_of(0, 0), "");
        assert_eq!(bitstring_lsb_first(&[true, false, false]), "001");
        assert_eq!(parse_bitstring("0110"), Some(6));
        assert_eq!(parse_bitstring("01a"), None);
        assert_eq!(parse_bitstring(""), None);
    }

    #[test]
    fn tvd_of_disjoint_point_masses_is_one() {
        let a = OutcomeDistribution::point_mass("101");
        let b = OutcomeDistribution::point_mass("100");
        assert_eq!(a.tvd(&b), 1.0);
        assert_eq!(a.tvd(&a), 0.0);
        let (key, _, _) = a.worst_key(&b).unwrap();
        assert!(key == "101" || key == "100");
    }

    #[test]
    fn permuting_bits() {
        let d = OutcomeDistribution::point_mass("001");
        assert_eq!(d.permute_bits(&[2, 0, 1]).get("100"), 1.0);
    }

    fn dist(ps: Vec<f64>) -> OutcomeDistribution {
        let total: f64 = ps.iter().sum();
        let mut d = OutcomeDistribution::new(3);
        for (i, p) in ps.into_iter().enumerate() {
            if p > 0.0 {
                d.add(bitstring_of(i as u64, 3), p / total);
            }
        }
        d
    }

    proptest! {
        #[test]
        fn tvd_is_a_metric(
            a in proptest::collection::vec(0.0f64..1.0, 8),
            b in proptest::collection::vec(0.0f64..1.0, 8),
            c in proptest::collection::vec(0.0f64..1.0, 8),
        ) {
            prop_assume!(a.iter().sum::<f64>() > 0.1 && b.iter().sum::<f64>() > 0.1 && c.iter().sum::<f64>() > 0.1);
            let (a, b, c) = (dist(a), dist(b), dist(c));
            prop_assert!(a.tvd(&b) >= 0.0);
            prop_assert!((a.tvd(&b) - b.tvd(&a)).abs() < 1e-15);
            prop_assert!(a.tvd(&a) == 0.0);
            prop_assert!(a.tvd(&c) <= a.tvd(&b) + b.tvd(&c) + 1e-12);
            prop_assert!(a.tvd(&b) <= 1.0 + 1e-12);
        }
    }
}
