//! Ranked set sampling designs.

use crate::error::{Error, Result};

/// A measurement design for ranked set sampling: `counts[r]` is the number of
/// measured units whose within-set rank is `r` (0-based here, 1-based in file
/// formats). The set size `k` is the number of ranks and `n` the total number
/// of measurements. A design is balanced when all counts are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Design {
    counts: Vec<usize>,
}

impl Design {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidDesign(format!(
                "need at least 2 ranks, got {}",
                counts.len()
            )));
        }
        if let Some(r) = counts.iter().position(|&m| m == 0) {
            return Err(Error::InvalidDesign(format!(
                "rank {} has zero measurements",
                r + 1
            )));
        }
        Ok(Self { counts })
    }

    pub fn balanced(set_size: usize, cycles: usize) -> Result<Self> {
        Self::new(vec![cycles; set_size])
    }

    /// Per-rank measurement counts.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Set size `k`: how many units are ranked within each set.
    pub fn set_size(&self) -> usize {
        self.counts.len()
    }

    /// Total number of measurements `n`.
    pub fn sample_size(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Sampling fraction of rank `r`: `counts[r] / n`.
    pub fn rank_fraction(&self, r: usize) -> f64 {
        self.counts[r] as f64 / self.sample_size() as f64
    }

    pub fn is_balanced(&self) -> bool {
        self.counts.iter().all(|&m| m == self.counts[0])
    }
}

impl std::fmt::Display for Design {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_designs() {
        assert!(Design::new(vec![]).is_err());
        assert!(Design::new(vec![5]).is_err());
        assert!(Design::new(vec![2, 0, 1]).is_err());
    }

    #[test]
    fn accessors() {
        let d = Design::new(vec![8, 3, 3, 2, 4]).unwrap();
        assert_eq!(d.set_size(), 5);
        assert_eq!(d.sample_size(), 20);
        assert!(!d.is_balanced());
        assert!(Design::balanced(5, 5).unwrap().is_balanced());
    }

    #[test]
    fn rank_fractions_sum_to_one() {
        let d = Design::new(vec![3, 10, 3, 3, 3]).unwrap();
        let total: f64 = (0..d.set_size()).map(|r| d.rank_fraction(r)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
