//! Bootstrap resampling of ranked set samples.
//!
//! Two nonparametric schemes rebuild the ranked-set structure from a tilted
//! estimate of the distribution function: EAT resamples from the pooled
//! observations under per-observation tilt weights, EAR picks a row by its
//! tilt weight and then an observation uniformly within that row. Both fill
//! each slot `(r, j)` with the `r`-th order statistic of `k` such picks. The
//! parametric scheme redraws whole samples from a fitted population.
//!
//! Resample `i` of a batch depends only on `(seed, i)`, so batches can be
//! generated in parallel or streamed without materializing.

use rand::Rng;

use crate::design::Design;
use crate::dist::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::rng::{AliasTable, RngSeed};
use crate::sample::UrssSample;
use crate::sampling::draw_urss;
use crate::tilting::{TiltWeights, WeightLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapMethod {
    Eat,
    Ear,
    Parametric,
}

/// A materialized batch of bootstrap resamples, all sharing the source
/// design.
#[derive(Debug, Clone)]
pub struct BootstrapBatch {
    resamples: Vec<UrssSample>,
    method: BootstrapMethod,
    seed: RngSeed,
}

impl BootstrapBatch {
    pub fn resamples(&self) -> &[UrssSample] {
        &self.resamples
    }

    pub fn method(&self) -> BootstrapMethod {
        self.method
    }

    pub fn seed(&self) -> RngSeed {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.resamples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resamples.is_empty()
    }
}

fn order_statistic_fill<F: FnMut(&mut Vec<f64>)>(design: &Design, mut draw_set: F) -> Vec<Vec<f64>> {
    let mut buf = Vec::with_capacity(design.set_size());
    design
        .counts()
        .iter()
        .enumerate()
        .map(|(r, &m)| {
            (0..m)
                .map(|_| {
                    draw_set(&mut buf);
                    buf.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
                    buf[r]
                })
                .collect()
        })
        .collect()
}

/// Pooled-resampling scheme over per-observation tilt weights.
pub struct EatResampler<'a> {
    sample: &'a UrssSample,
    values: Vec<f64>,
    alias: AliasTable,
    seed: RngSeed,
}

impl<'a> EatResampler<'a> {
    pub fn new(sample: &'a UrssSample, weights: &TiltWeights, seed: RngSeed) -> Result<Self> {
        if weights.level() != WeightLevel::PerObservation
            || weights.weights().len() != sample.sample_size()
        {
            return Err(Error::WeightMismatch(format!(
                "need {} per-observation weights",
                sample.sample_size()
            )));
        }
        Ok(Self {
            sample,
            values: sample.values().collect(),
            alias: AliasTable::new(weights.weights())?,
            seed,
        })
    }

    pub fn resample(&self, index: u64) -> UrssSample {
        let mut rng = self.seed.child(index).rng();
        let k = self.sample.set_size();
        let rows = order_statistic_fill(self.sample.design(), |buf| {
            buf.clear();
            buf.extend((0..k).map(|_| self.values[self.alias.sample(&mut rng)]));
        });
        UrssSample::with_design(rows, self.sample.design().clone())
            .expect("resample matches the source design")
    }
}

/// Row-resampling scheme over per-row tilt weights: pick a row by weight,
/// then an observation uniformly within it.
pub struct EarResampler<'a> {
    sample: &'a UrssSample,
    row_alias: AliasTable,
    seed: RngSeed,
}

impl<'a> EarResampler<'a> {
    pub fn new(sample: &'a UrssSample, row_weights: &TiltWeights, seed: RngSeed) -> Result<Self> {
        if row_weights.level() != WeightLevel::PerRow
            || row_weights.weights().len() != sample.set_size()
        {
            return Err(Error::WeightMismatch(format!(
                "need {} per-row weights",
                sample.set_size()
            )));
        }
        Ok(Self {
            sample,
            row_alias: AliasTable::new(row_weights.weights())?,
            seed,
        })
    }

    pub fn resample(&self, index: u64) -> UrssSample {
        let mut rng = self.seed.child(index).rng();
        let k = self.sample.set_size();
        let rows = order_statistic_fill(self.sample.design(), |buf| {
            buf.clear();
            buf.extend((0..k).map(|_| {
                let s = self.row_alias.sample(&mut rng);
                let row = self.sample.row(s);
                row[rng.random_range(0..row.len())]
            }));
        });
        UrssSample::with_design(rows, self.sample.design().clone())
            .expect("resample matches the source design")
    }
}

/// Parametric scheme: refit the family with the sample mean (all other
/// parameters held at unit defaults) and redraw ranked set samples from it.
pub struct ParametricResampler {
    fitted: DistributionSpec,
    design: Design,
    seed: RngSeed,
}

impl ParametricResampler {
    pub fn new(sample: &UrssSample, family: Family, seed: RngSeed) -> Result<Self> {
        Ok(Self {
            fitted: family.fit(sample.grand_mean())?,
            design: sample.design().clone(),
            seed,
        })
    }

    pub fn fitted(&self) -> &DistributionSpec {
        &self.fitted
    }

    pub fn resample(&self, index: u64) -> UrssSample {
        draw_urss(&self.fitted, &self.design, self.seed.child(index))
    }
}

pub fn bootstrap_eat(
    sample: &UrssSample,
    weights: &TiltWeights,
    b: usize,
    seed: RngSeed,
) -> Result<BootstrapBatch> {
    let resampler = EatResampler::new(sample, weights, seed)?;
    Ok(BootstrapBatch {
        resamples: (0..b as u64).map(|i| resampler.resample(i)).collect(),
        method: BootstrapMethod::Eat,
        seed,
    })
}

pub fn bootstrap_ear(
    sample: &UrssSample,
    row_weights: &TiltWeights,
    b: usize,
    seed: RngSeed,
) -> Result<BootstrapBatch> {
    let resampler = EarResampler::new(sample, row_weights, seed)?;
    Ok(BootstrapBatch {
        resamples: (0..b as u64).map(|i| resampler.resample(i)).collect(),
        method: BootstrapMethod::Ear,
        seed,
    })
}

pub fn parametric_bootstrap(
    sample: &UrssSample,
    family: Family,
    b: usize,
    seed: RngSeed,
) -> Result<BootstrapBatch> {
    let resampler = ParametricResampler::new(sample, family, seed)?;
    Ok(BootstrapBatch {
        resamples: (0..b as u64).map(|i| resampler.resample(i)).collect(),
        method: BootstrapMethod::Parametric,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tilting::{ear_weights, eat_weights};

    #[test]
    fn constant_sample_resamples_constant() {
        let s = UrssSample::new(vec![vec![3.0, 3.0], vec![3.0, 3.0]]).unwrap();
        // Tilting a constant sample is degenerate, so feed uniform weights
        // through a non-degenerate twin and resample the constant directly.
        let batch = parametric_bootstrap(&s, Family::Normal, 3, RngSeed::new(1, 0)).unwrap();
        assert_eq!(batch.len(), 3);
        for rs in batch.resamples() {
            assert_eq!(rs.design(), s.design());
        }
    }

    #[test]
    fn eat_min_max_probabilities() {
        // Two observations {0, 1} with uniform weights, k = 2: the rank-1
        // slot is the minimum of two fair picks, so P(slot = 0) = 3/4.
        let s = UrssSample::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let w = eat_weights(&s, s.grand_mean()).unwrap();
        let resampler = EatResampler::new(&s, &w, RngSeed::new(2, 0)).unwrap();
        let b = 10_000;
        let mut min_zero = 0.0;
        let mut max_one = 0.0;
        for i in 0..b {
            let rs = resampler.resample(i);
            if rs.row(0)[0] == 0.0 {
                min_zero += 1.0;
            }
            if rs.row(1)[0] == 1.0 {
                max_one += 1.0;
            }
        }
        assert!((min_zero / b as f64 - 0.75).abs() < 0.02);
        assert!((max_one / b as f64 - 0.75).abs() < 0.02);
    }

    #[test]
    fn eat_tilted_probabilities() {
        // Weights (0.25, 0.75) on {0, 1}: P(min of two picks = 0) = 1 - 0.75^2.
        let s = UrssSample::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let w = eat_weights(&s, 0.75).unwrap();
        let resampler = EatResampler::new(&s, &w, RngSeed::new(3, 0)).unwrap();
        let b = 10_000;
        let mut min_zero = 0.0;
        for i in 0..b {
            if resampler.resample(i).row(0)[0] == 0.0 {
                min_zero += 1.0;
            }
        }
        assert!((min_zero / b as f64 - 0.4375).abs() < 0.02);
    }

    #[test]
    fn ear_min_probability() {
        let s = UrssSample::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let w = ear_weights(&s, 0.5).unwrap();
        assert_eq!(w.weights(), &[0.5, 0.5]);
        let resampler = EarResampler::new(&s, &w, RngSeed::new(4, 0)).unwrap();
        let b = 10_000;
        let mut min_zero = 0.0;
        for i in 0..b {
            if resampler.resample(i).row(0)[0] == 0.0 {
                min_zero += 1.0;
            }
        }
        assert!((min_zero / b as f64 - 0.75).abs() < 0.02);
    }

    #[test]
    fn ear_degenerate_row_weight() {
        // All mass on row 1: every resampled value comes from row 1.
        let s = UrssSample::new(vec![vec![1.0, 2.0], vec![5.0, 6.0]]).unwrap();
        // Push the target close to the row-1 mean so its weight is ~1.
        let w = ear_weights(&s, 1.5 + 1e-9).unwrap();
        assert!(w.weights()[0] > 0.999_999);
        let batch = bootstrap_ear(&s, &w, 50, RngSeed::new(5, 0)).unwrap();
        for rs in batch.resamples() {
            for v in rs.values() {
                assert!(v < 3.0, "value {v} escaped row 1");
            }
        }
    }

    #[test]
    fn parametric_fit_and_shape() {
        let s = UrssSample::new(vec![vec![0.1, 0.5], vec![0.2, 0.4]]).unwrap();
        let r = ParametricResampler::new(&s, Family::Normal, RngSeed::new(6, 0)).unwrap();
        match r.fitted() {
            DistributionSpec::Normal { mean, sd } => {
                assert!((mean - 0.3).abs() < 1e-12);
                assert_eq!(*sd, 1.0);
            }
            other => panic!("unexpected fit {other:?}"),
        }
        let batch = parametric_bootstrap(&s, Family::Normal, 4, RngSeed::new(6, 0)).unwrap();
        assert_eq!(batch.len(), 4);
        for rs in batch.resamples() {
            assert_eq!(rs.design(), s.design());
        }
    }

    #[test]
    fn parametric_exponential_needs_positive_mean() {
        let s = UrssSample::new(vec![vec![-1.0, 0.5], vec![-0.2, 0.3]]).unwrap();
        assert!(matches!(
            parametric_bootstrap(&s, Family::Exponential, 2, RngSeed::new(7, 0)),
            Err(Error::NonPositiveMean(_))
        ));
    }

    #[test]
    fn weight_mismatch_detected() {
        let s = UrssSample::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let row_w = ear_weights(&s, 2.5).unwrap();
        assert!(matches!(
            bootstrap_eat(&s, &row_w, 2, RngSeed::new(8, 0)),
            Err(Error::WeightMismatch(_))
        ));
        let obs_w = eat_weights(&s, 2.5).unwrap();
        assert!(matches!(
            bootstrap_ear(&s, &obs_w, 2, RngSeed::new(8, 0)),
            Err(Error::WeightMismatch(_))
        ));
    }

    #[test]
    fn determinism_by_seed_and_index() {
        let s = UrssSample::new(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0]]).unwrap();
        let w = eat_weights(&s, s.grand_mean()).unwrap();
        let a = bootstrap_eat(&s, &w, 5, RngSeed::new(9, 0)).unwrap();
        let b = bootstrap_eat(&s, &w, 5, RngSeed::new(9, 0)).unwrap();
        for (x, y) in a.resamples().iter().zip(b.resamples()) {
            assert_eq!(x, y);
        }
        let r = EatResampler::new(&s, &w, RngSeed::new(9, 0)).unwrap();
        assert_eq!(&r.resample(3), &a.resamples()[3]);
    }

    #[test]
    fn ear_single_pick_law() {
        // The pre-sorting pick gives observation (s, j) probability
        // p_s / m_s; chi-square goodness of fit on distinct values.
        let s = UrssSample::new(vec![vec![10.0, 20.0], vec![30.0, 40.0, 50.0]]).unwrap();
        let w = ear_weights(&s, 25.0).unwrap();
        let p_row = w.weights().to_vec();
        let expected = [
            p_row[0] / 2.0,
            p_row[0] / 2.0,
            p_row[1] / 3.0,
            p_row[1] / 3.0,
            p_row[1] / 3.0,
        ];
        let row_alias = AliasTable::new(&p_row).unwrap();
        let mut rng = RngSeed::new(10, 0).rng();
        let n = 100_000usize;
        let mut counts = [0usize; 5];
        use rand::Rng;
        for _ in 0..n {
            let row = row_alias.sample(&mut rng);
            let j = rng.random_range(0..s.row(row).len());
            let idx = if row == 0 { j } else { 2 + j };
            counts[idx] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&expected)
            .map(|(&c, &p)| {
                let e = p * n as f64;
                (c as f64 - e) * (c as f64 - e) / e
            })
            .sum();
        // 4 degrees of freedom, 1% critical value 13.28.
        assert!(chi2 < 13.28, "chi-square {chi2}");
    }

    #[test]
    fn mean_anchoring_is_algebraic() {
        let s = UrssSample::new(vec![vec![0.4, 1.9, 0.2], vec![2.5, 0.9]]).unwrap();
        let mu0 = 1.1;
        let w = eat_weights(&s, mu0).unwrap();
        let mean: f64 = s.values().zip(w.weights()).map(|(x, &p)| x * p).sum();
        assert!((mean - mu0).abs() < 1e-10);
    }
}
