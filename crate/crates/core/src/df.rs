//! Weighted step-function estimates of a distribution function.

use crate::error::{Error, Result};
use crate::sample::UrssSample;

const PROB_SUM_TOL: f64 = 1e-10;

/// A discrete distribution function: probability mass placed on a sorted set
/// of support points. Evaluation is right-continuous, 0 below the smallest
/// support point and 1 at and above the largest.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDf {
    support: Vec<f64>,
    prob: Vec<f64>,
    cum: Vec<f64>,
}

impl WeightedDf {
    /// Build from `(support, probability)` atoms. Atoms sharing a support
    /// point are merged by summing their probabilities, so the step function
    /// has one jump per distinct point.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::InvalidWeights("no atoms".into()));
        }
        for &(x, p) in &atoms {
            if !x.is_finite() {
                return Err(Error::NonFiniteValue(format!("support point {x}")));
            }
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidWeights(format!(
                    "probability {p} at support {x}"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite support"));

        let mut support = Vec::with_capacity(atoms.len());
        let mut prob: Vec<f64> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match support.last() {
                Some(&last) if last == x => *prob.last_mut().expect("nonempty") += p,
                _ => {
                    support.push(x);
                    prob.push(p);
                }
            }
        }

        let total: f64 = prob.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidWeights(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        let mut cum = Vec::with_capacity(prob.len());
        let mut acc = 0.0;
        for &p in &prob {
            acc += p;
            cum.push(acc);
        }
        Ok(Self { support, prob, cum })
    }

    /// Evaluate the distribution function at `t`: total mass on support <= t.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.support.partition_point(|&x| x <= t);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.prob
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.prob.iter().copied())
    }

    /// Mean of the discrete distribution.
    pub fn mean(&self) -> f64 {
        self.atoms().map(|(x, p)| x * p).sum()
    }
}

/// The empirical distribution function of a ranked set sample: mass `1/n` on
/// every observation. Equals the rank-fraction-weighted mixture of the
/// per-row empirical distribution functions.
pub fn edf(sample: &UrssSample) -> WeightedDf {
    let n = sample.sample_size() as f64;
    WeightedDf::new(sample.values().map(|x| (x, 1.0 / n)))
        .expect("uniform weights on a valid sample")
}
