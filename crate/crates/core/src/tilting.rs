//! Exponential tilting of weighted empirical distributions.
//!
//! Tilting reweights a base measure by `exp(lambda * v)` so that the weighted
//! mean of the constrained values hits a prescribed target, which is the
//! Kullback-Leibler-minimal reweighting under a mean constraint. Three
//! flavours are provided for ranked set samples: tilting all observations
//! jointly (EAT), tilting the rank-row means (EAR), and tilting a single row
//! against its own mean.

use crate::df::WeightedDf;
use crate::error::{Error, Result};
use crate::sample::UrssSample;

const MAX_ITER: usize = 200;

/// Whether a weight vector is indexed by observation or by rank row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightLevel {
    PerObservation,
    PerRow,
}

/// Solved tilt weights together with the multiplier that produced them and
/// the mean constraint they satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltWeights {
    level: WeightLevel,
    weights: Vec<f64>,
    lambda: f64,
    target: f64,
}

impl TiltWeights {
    pub fn level(&self) -> WeightLevel {
        self.level
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn target(&self) -> f64 {
        self.target
    }
}

/// A mean-constrained tilting problem: find `lambda` such that the
/// `exp(lambda * v)`-reweighted base measure has mean `target`.
///
/// The constrained values are raw observations for EAT, row means for EAR.
/// Solvability requires the target strictly inside the open range of the
/// values; hitting an endpoint would need an infinite multiplier, so such
/// targets are rejected rather than clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltProblem {
    values: Vec<f64>,
    base_weights: Vec<f64>,
    target: f64,
}

impl TiltProblem {
    pub fn new(values: Vec<f64>, base_weights: Vec<f64>, target: f64) -> Result<Self> {
        if values.len() != base_weights.len() || values.len() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "{} values vs {} base weights (need equal lengths >= 2)",
                values.len(),
                base_weights.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!("constrained value {v}")));
        }
        if !target.is_finite() {
            return Err(Error::NonFiniteValue(format!("target {target}")));
        }
        let mut sum = 0.0;
        for &b in &base_weights {
            if !b.is_finite() || b <= 0.0 {
                return Err(Error::InvalidWeights(format!("base weight {b}")));
            }
            sum += b;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(format!(
                "base weights sum to {sum}, expected 1"
            )));
        }
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if min == max {
            return Err(Error::DegenerateValues);
        }
        if !(min < target && target < max) {
            return Err(Error::TargetOutOfRange { target, min, max });
        }
        Ok(Self {
            values,
            base_weights,
            target,
        })
    }

    /// Uniform base weights `1/len`.
    pub fn with_uniform_base(values: Vec<f64>, target: f64) -> Result<Self> {
        let base = vec![1.0 / values.len() as f64; values.len()];
        Self::new(values, base, target)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn base_weights(&self) -> &[f64] {
        &self.base_weights
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    /// Tilted mean and variance at `lambda`, computed with a log-sum-exp
    /// shift so large multipliers do not overflow.
    fn tilted_moments(&self, lambda: f64) -> (f64, f64) {
        let shift = self
            .values
            .iter()
            .map(|&v| lambda * v)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut wsum = 0.0;
        let mut mean = 0.0;
        for (&v, &b) in self.values.iter().zip(&self.base_weights) {
            let w = b * (lambda * v - shift).exp();
            wsum += w;
            mean += w * v;
        }
        mean /= wsum;
        let mut var = 0.0;
        for (&v, &b) in self.values.iter().zip(&self.base_weights) {
            let w = b * (lambda * v - shift).exp();
            var += w * (v - mean) * (v - mean);
        }
        (mean, var / wsum)
    }

    /// The exp-normalized weight vector at `lambda`. At `lambda == 0` this is
    /// exactly the base measure.
    pub fn weights_at(&self, lambda: f64) -> Vec<f64> {
        if lambda == 0.0 {
            return self.base_weights.clone();
        }
        let shift = self
            .values
            .iter()
            .map(|&v| lambda * v)
            .fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = self
            .values
            .iter()
            .zip(&self.base_weights)
            .map(|(&v, &b)| b * (lambda * v - shift).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

/// Solve the mean constraint for the tilting multiplier.
///
/// The tilted mean is strictly increasing in `lambda`, so the root is unique.
/// A geometrically grown bracket guarantees enclosure and a Newton step
/// (derivative = tilted variance) is taken whenever it stays inside the
/// bracket, falling back to bisection otherwise.
pub fn solve_lambda(problem: &TiltProblem) -> Result<f64> {
    let target = problem.target();
    let tol = 1e-11 * (1.0 + target.abs());

    let g = |lambda: f64| problem.tilted_moments(lambda).0 - target;

    // The base measure often already satisfies the constraint.
    let g0 = g(0.0);
    if g0.abs() <= tol {
        return Ok(0.0);
    }

    // Grow a sign-changing bracket [lo, hi] starting from [-1, 1].
    let (mut lo, mut hi);
    let mut iter = 0usize;
    if g0 < 0.0 {
        lo = 0.0;
        hi = 1.0;
        while g(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            iter += 1;
            if iter >= MAX_ITER {
                return Err(Error::NoConvergence(MAX_ITER));
            }
        }
    } else {
        hi = 0.0;
        lo = -1.0;
        while g(lo) > 0.0 {
            hi = lo;
            lo *= 2.0;
            iter += 1;
            if iter >= MAX_ITER {
                return Err(Error::NoConvergence(MAX_ITER));
            }
        }
    }

    // Safeguarded Newton within the bracket.
    let mut x = 0.5 * (lo + hi);
    while iter < MAX_ITER {
        iter += 1;
        let (mean, var) = problem.tilted_moments(x);
        let gx = mean - target;
        if gx.abs() <= tol {
            return Ok(x);
        }
        if gx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = if var > 0.0 { x - gx / var } else { f64::NAN };
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * (1.0 + x.abs()) {
            // Bracket collapsed to machine precision; accept the midpoint if
            // the residual is within the documented tolerance.
            let res = g(x).abs();
            if res <= 1e-10 * (1.0 + target.abs()) {
                return Ok(x);
            }
            return Err(Error::NoConvergence(iter));
        }
    }
    Err(Error::NoConvergence(MAX_ITER))
}

fn solved_weights(problem: &TiltProblem, level: WeightLevel) -> Result<TiltWeights> {
    let lambda = solve_lambda(problem)?;
    Ok(TiltWeights {
        level,
        weights: problem.weights_at(lambda),
        lambda,
        target: problem.target(),
    })
}

/// Tilt all `n` observations jointly against a uniform `1/n` base so their
/// weighted mean equals `target`. With `target` equal to the grand mean the
/// weights are exactly uniform.
pub fn eat_weights(sample: &UrssSample, target: f64) -> Result<TiltWeights> {
    let values: Vec<f64> = sample.values().collect();
    let problem = TiltProblem::with_uniform_base(values, target)?;
    solved_weights(&problem, WeightLevel::PerObservation)
}

/// Tilt the rank-row means against a uniform `1/k` base so the weighted row
/// means equal `target`. The feasible target range is the open range of the
/// row means, which is narrower than the full value range.
pub fn ear_weights(sample: &UrssSample, target: f64) -> Result<TiltWeights> {
    let problem = TiltProblem::with_uniform_base(sample.row_means(), target)?;
    solved_weights(&problem, WeightLevel::PerRow)
}

/// Tilt the observations of row `r` alone, treating them as a plain random
/// sample of size `m_r`.
pub fn row_et_weights(sample: &UrssSample, r: usize, target: f64) -> Result<TiltWeights> {
    let row = sample.row(r);
    if row.len() < 2 {
        return Err(Error::RowTooSmall {
            row: r + 1,
            len: row.len(),
        });
    }
    let problem = TiltProblem::with_uniform_base(row.to_vec(), target)?;
    solved_weights(&problem, WeightLevel::PerObservation)
}

fn expect_per_observation(sample: &UrssSample, weights: &TiltWeights) -> Result<()> {
    if weights.level() != WeightLevel::PerObservation {
        return Err(Error::WeightMismatch(
            "per-observation weights required".into(),
        ));
    }
    if weights.weights().len() != sample.sample_size() {
        return Err(Error::WeightMismatch(format!(
            "{} weights for {} observations",
            weights.weights().len(),
            sample.sample_size()
        )));
    }
    Ok(())
}

fn expect_per_row(sample: &UrssSample, weights: &TiltWeights) -> Result<()> {
    if weights.level() != WeightLevel::PerRow {
        return Err(Error::WeightMismatch("per-row weights required".into()));
    }
    if weights.weights().len() != sample.set_size() {
        return Err(Error::WeightMismatch(format!(
            "{} weights for {} rows",
            weights.weights().len(),
            sample.set_size()
        )));
    }
    Ok(())
}

/// Distribution function estimate placing each observation's tilt weight on
/// its value.
pub fn et_df_eat(sample: &UrssSample, weights: &TiltWeights) -> Result<WeightedDf> {
    expect_per_observation(sample, weights)?;
    WeightedDf::new(sample.values().zip(weights.weights().iter().copied()))
}

/// Distribution function estimate giving observation `j` of row `r` mass
/// `p_r / m_r`.
pub fn et_df_ear(sample: &UrssSample, row_weights: &TiltWeights) -> Result<WeightedDf> {
    expect_per_row(sample, row_weights)?;
    let atoms = sample.rows().iter().enumerate().flat_map(|(r, row)| {
        let w = row_weights.weights()[r] / row.len() as f64;
        row.iter().map(move |&x| (x, w))
    });
    WeightedDf::new(atoms)
}

/// Tilt-weighted sum of squared deviations about the grand mean, an estimate
/// of the population variance.
pub fn et_variance(sample: &UrssSample, weights: &TiltWeights) -> Result<f64> {
    expect_per_observation(sample, weights)?;
    let center = sample.grand_mean();
    Ok(sample
        .values()
        .zip(weights.weights())
        .map(|(x, &w)| w * (x - center) * (x - center))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::df::edf;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lambda_zero_at_base_mean() {
        let p = TiltProblem::with_uniform_base(vec![1.0, 2.0, 3.0], 2.0).unwrap();
        assert_eq!(solve_lambda(&p).unwrap(), 0.0);
    }

    #[test]
    fn two_point_logit_closed_form() {
        let p = TiltProblem::with_uniform_base(vec![0.0, 1.0], 0.75).unwrap();
        let lambda = solve_lambda(&p).unwrap();
        assert!(close(lambda, 3.0f64.ln(), 1e-9), "lambda = {lambda}");
    }

    #[test]
    fn boundary_target_rejected() {
        let err = TiltProblem::with_uniform_base(vec![0.0, 1.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::TargetOutOfRange { .. }));
        let err = TiltProblem::with_uniform_base(vec![2.0, 2.0], 2.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateValues));
    }

    #[test]
    fn eat_uniform_at_grand_mean() {
        let s = UrssSample::new(vec![vec![1.0, 3.0], vec![2.0, 6.0]]).unwrap();
        let w = eat_weights(&s, 3.0).unwrap();
        assert_eq!(w.lambda(), 0.0);
        assert_eq!(w.weights(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn eat_two_point() {
        let s = UrssSample::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let w = eat_weights(&s, 0.75).unwrap();
        assert!(close(w.weights()[0], 0.25, 1e-9));
        assert!(close(w.weights()[1], 0.75, 1e-9));
    }

    #[test]
    fn eat_target_above_max() {
        let s = UrssSample::new(vec![vec![1.0, 3.0], vec![2.0, 6.0]]).unwrap();
        assert!(matches!(
            eat_weights(&s, 7.0),
            Err(Error::TargetOutOfRange { .. })
        ));
    }

    #[test]
    fn ear_balanced_uniform() {
        let s = UrssSample::new(vec![vec![1.0, 3.0], vec![2.0, 6.0]]).unwrap();
        let w = ear_weights(&s, 3.0).unwrap();
        assert_eq!(w.lambda(), 0.0);
        assert_eq!(w.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn ear_two_point() {
        let s = UrssSample::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let w = ear_weights(&s, 0.75).unwrap();
        assert!(close(w.weights()[0], 0.25, 1e-9));
        assert!(close(w.weights()[1], 0.75, 1e-9));
    }

    #[test]
    fn ear_unbalanced_closed_form() {
        // Row means (1, 5); target is the grand mean 1.8, so the row weights
        // solve p1 + 5 p2 = 1.8 with p1 + p2 = 1: (0.8, 0.2).
        let s = UrssSample::new(vec![vec![1.0, 1.0, 1.0, 1.0], vec![5.0]]).unwrap();
        let target = s.grand_mean();
        assert!(close(target, 1.8, 1e-15));
        let w = ear_weights(&s, target).unwrap();
        assert!(close(w.weights()[0], 0.8, 1e-9));
        assert!(close(w.weights()[1], 0.2, 1e-9));
        assert!(close(w.lambda(), 0.25f64.ln() / 4.0, 1e-9));
    }

    #[test]
    fn row_tilt() {
        let s = UrssSample::new(vec![vec![2.0, 4.0], vec![0.0, 1.0]]).unwrap();
        let w = row_et_weights(&s, 0, 3.0).unwrap();
        assert_eq!(w.lambda(), 0.0);
        assert_eq!(w.weights(), &[0.5, 0.5]);

        let w = row_et_weights(&s, 1, 0.25).unwrap();
        assert!(close(w.weights()[0], 0.75, 1e-9));
        assert!(close(w.weights()[1], 0.25, 1e-9));
        assert!(close(w.lambda(), (1.0f64 / 3.0).ln(), 1e-9));
    }

    #[test]
    fn row_tilt_needs_two_values() {
        let s = UrssSample::new(vec![vec![5.0], vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            row_et_weights(&s, 0, 5.0),
            Err(Error::RowTooSmall { .. })
        ));
    }

    #[test]
    fn eat_df_matches_edf_at_uniform_weights() {
        let s = UrssSample::new(vec![vec![1.0, 3.0], vec![2.0, 6.0]]).unwrap();
        let w = eat_weights(&s, s.grand_mean()).unwrap();
        assert_eq!(et_df_eat(&s, &w).unwrap(), edf(&s));
    }

    #[test]
    fn eat_df_evaluates_weighted_mass() {
        let s = UrssSample::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let w = eat_weights(&s, 0.75).unwrap();
        let df = et_df_eat(&s, &w).unwrap();
        assert!(close(df.eval(0.0), 0.25, 1e-9));
        assert!(close(df.eval(1.0), 1.0, 1e-12));
        assert_eq!(df.eval(-0.1), 0.0);
    }

    #[test]
    fn ear_df_spreads_row_mass() {
        let s = UrssSample::new(vec![vec![1.0, 1.0], vec![9.0]]).unwrap();
        let w = ear_weights(&s, s.row_means().iter().sum::<f64>() / 2.0).unwrap();
        assert_eq!(w.weights(), &[0.5, 0.5]);
        let df = et_df_ear(&s, &w).unwrap();
        let atoms: Vec<(f64, f64)> = df.atoms().collect();
        assert_eq!(atoms, vec![(1.0, 0.5), (9.0, 0.5)]);
        assert!(close(df.eval(9.0), 1.0, 1e-12));
    }

    #[test]
    fn ear_df_balanced_uniform_equals_edf() {
        let s = UrssSample::new(vec![vec![1.0, 3.0], vec![2.0, 6.0]]).unwrap();
        let w = ear_weights(&s, 3.0).unwrap();
        assert_eq!(et_df_ear(&s, &w).unwrap(), edf(&s));
    }

    #[test]
    fn variance_about_grand_mean() {
        let s = UrssSample::new(vec![vec![0.0], vec![2.0]]).unwrap();
        let w = eat_weights(&s, s.grand_mean()).unwrap();
        assert!(close(et_variance(&s, &w).unwrap(), 1.0, 1e-12));

        let s = UrssSample::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let w = eat_weights(&s, 0.75).unwrap();
        assert!(close(et_variance(&s, &w).unwrap(), 0.25, 1e-9));
    }

    #[test]
    fn weight_level_mismatch_rejected() {
        let s = UrssSample::new(vec![vec![1.0, 3.0], vec![2.0, 6.0]]).unwrap();
        let row_w = ear_weights(&s, 3.0).unwrap();
        assert!(matches!(
            et_df_eat(&s, &row_w),
            Err(Error::WeightMismatch(_))
        ));
        let obs_w = eat_weights(&s, 3.0).unwrap();
        assert!(matches!(
            et_df_ear(&s, &obs_w),
            Err(Error::WeightMismatch(_))
        ));
    }

    #[test]
    fn constraint_holds_at_solution() {
        let s = UrssSample::new(vec![
            vec![0.3, -1.2, 0.7, 2.4],
            vec![1.1, 0.2],
            vec![3.0, -0.4, 0.9],
        ])
        .unwrap();
        for target in [-0.3, 0.5, 1.4, 2.2] {
            let w = eat_weights(&s, target).unwrap();
            let mean: f64 = s.values().zip(w.weights()).map(|(x, &p)| x * p).sum();
            assert!(
                close(mean, target, 1e-8 * (1.0 + target.abs())),
                "target {target}: tilted mean {mean}"
            );
            let total: f64 = w.weights().iter().sum();
            assert!(close(total, 1.0, 1e-10));
            assert!(w.weights().iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }
}
