//! Ranked set samples: the ragged array of measurements grouped by rank.

use crate::design::Design;
use crate::error::{Error, Result};

/// A (possibly unbalanced) ranked set sample. Row `r` holds the measurements
/// taken on units judged to have rank `r`; its length must equal the design
/// count for that rank. Row order is semantic: row `r` corresponds to rank
/// `r + 1` in 1-based notation.
#[derive(Debug, Clone, PartialEq)]
pub struct UrssSample {
    rows: Vec<Vec<f64>>,
    design: Design,
}

impl UrssSample {
    /// Build a sample, inferring the design from the row lengths.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let design = Design::new(rows.iter().map(Vec::len).collect())?;
        Self::with_design(rows, design)
    }

    /// Build a sample against an explicit design; row lengths must match.
    pub fn with_design(rows: Vec<Vec<f64>>, design: Design) -> Result<Self> {
        if rows.len() != design.set_size() {
            return Err(Error::RaggedSample(format!(
                "{} rows for a design with {} ranks",
                rows.len(),
                design.set_size()
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != design.counts()[r] {
                return Err(Error::RaggedSample(format!(
                    "row {} has {} values, design expects {}",
                    r + 1,
                    row.len(),
                    design.counts()[r]
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue(format!(
                    "row {} contains {v}",
                    r + 1
                )));
            }
        }
        Ok(Self { rows, design })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r]
    }

    pub fn set_size(&self) -> usize {
        self.design.set_size()
    }

    pub fn sample_size(&self) -> usize {
        self.design.sample_size()
    }

    /// All observations in row-major order.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().flatten().copied()
    }

    /// Smallest and largest observation.
    pub fn value_range(&self) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in self.values() {
            min = min.min(v);
            max = max.max(v);
        }
        (min, max)
    }

    pub fn row_mean(&self, r: usize) -> f64 {
        let row = &self.rows[r];
        row.iter().sum::<f64>() / row.len() as f64
    }

    pub fn row_means(&self) -> Vec<f64> {
        (0..self.set_size()).map(|r| self.row_mean(r)).collect()
    }

    /// Mean of all `n` observations.
    pub fn grand_mean(&self) -> f64 {
        self.values().sum::<f64>() / self.sample_size() as f64
    }

    /// Unbiased sample variance of row `r` (divisor `m_r - 1`).
    pub fn row_variance(&self, r: usize) -> Result<f64> {
        let row = &self.rows[r];
        if row.len() < 2 {
            return Err(Error::RowTooSmall {
                row: r + 1,
                len: row.len(),
            });
        }
        let mean = self.row_mean(r);
        let ss: f64 = row.iter().map(|v| (v - mean) * (v - mean)).sum();
        Ok(ss / (row.len() - 1) as f64)
    }

    /// A copy with every observation shifted by `delta`.
    pub fn shifted(&self, delta: f64) -> UrssSample {
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|v| v + delta).collect())
            .collect();
        UrssSample {
            rows,
            design: self.design.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_rows() {
        let design = Design::new(vec![2, 2]).unwrap();
        assert!(UrssSample::with_design(vec![vec![1.0], vec![2.0, 3.0]], design).is_err());
        assert!(UrssSample::new(vec![vec![1.0, f64::NAN], vec![2.0]]).is_err());
    }

    #[test]
    fn means_and_variances() {
        let s = UrssSample::new(vec![vec![1.0, 3.0], vec![2.0, 6.0]]).unwrap();
        assert_eq!(s.row_mean(0), 2.0);
        assert_eq!(s.row_mean(1), 4.0);
        assert_eq!(s.grand_mean(), 3.0);
        assert_eq!(s.row_variance(0).unwrap(), 2.0);
        assert_eq!(s.row_variance(1).unwrap(), 8.0);
    }

    #[test]
    fn variance_needs_two_observations() {
        let s = UrssSample::new(vec![vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(
            s.row_variance(0),
            Err(Error::RowTooSmall { row: 1, len: 1 })
        ));
    }

    #[test]
    fn shift_moves_every_value() {
        let s = UrssSample::new(vec![vec![1.0, 3.0], vec![2.0, 6.0]]).unwrap();
        let t = s.shifted(0.5);
        assert_eq!(t.grand_mean(), 3.5);
        assert_eq!(t.design(), s.design());
    }
}
