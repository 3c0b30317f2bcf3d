//! Generation of ranked set samples: perfect judgment ranking, noisy
//! (Dell-Clutter style) ranking, misranking through a doubly stochastic
//! matrix, and finite populations ranked by a concomitant variable.
//!
//! Every measurement slot `(r, j)` draws from its own derived stream, so
//! samples are reproducible and independent of iteration order.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::design::Design;
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::rng::{AliasTable, RngSeed};
use crate::sample::UrssSample;

/// Misranking probabilities: `p[s][r]` is the probability that the unit with
/// true rank `s` is judged to have rank `r`. Rows and columns must both sum
/// to one (doubly stochastic).
#[derive(Debug, Clone, PartialEq)]
pub struct MisrankMatrix {
    p: Vec<Vec<f64>>,
}

impl MisrankMatrix {
    const SUM_TOL: f64 = 1e-9;

    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        let k = p.len();
        if k < 2 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be at least 2x2, got {k} rows"
            )));
        }
        for (s, row) in p.iter().enumerate() {
            if row.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "row {s} has {} entries in a {k}x{k} matrix",
                    row.len()
                )));
            }
            for &x in row {
                if !x.is_finite() || !(-Self::SUM_TOL..=1.0 + Self::SUM_TOL).contains(&x) {
                    return Err(Error::NotDoublyStochastic(format!(
                        "entry {x} outside [0, 1]"
                    )));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > Self::SUM_TOL {
                return Err(Error::NotDoublyStochastic(format!(
                    "row {s} sums to {sum}"
                )));
            }
        }
        for r in 0..k {
            let sum: f64 = p.iter().map(|row| row[r]).sum();
            if (sum - 1.0).abs() > Self::SUM_TOL {
                return Err(Error::NotDoublyStochastic(format!(
                    "column {r} sums to {sum}"
                )));
            }
        }
        Ok(Self { p })
    }

    pub fn identity(k: usize) -> Result<Self> {
        let p = (0..k)
            .map(|s| (0..k).map(|r| if s == r { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(p)
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![vec![1.0 / k as f64; k]; k])
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    /// True-rank distribution of a unit judged to have rank `r`, renormalized
    /// against validation-tolerance drift.
    fn judged_column(&self, r: usize) -> Vec<f64> {
        let col: Vec<f64> = self.p.iter().map(|row| row[r].max(0.0)).collect();
        let sum: f64 = col.iter().sum();
        col.into_iter().map(|x| x / sum).collect()
    }
}

fn draw_set<R: Rng>(dist: &DistributionSpec, k: usize, rng: &mut R, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend((0..k).map(|_| dist.sample(rng)));
    buf.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite draws"));
}

/// Draw a ranked set sample under perfect ranking: for every measurement slot
/// with rank `r`, a fresh set of `k` variates is drawn, sorted, and the
/// `r`-th order statistic recorded. Consumes `n * k` variates.
pub fn draw_urss(dist: &DistributionSpec, design: &Design, seed: RngSeed) -> UrssSample {
    let k = design.set_size();
    let mut buf = Vec::with_capacity(k);
    let rows = design
        .counts()
        .iter()
        .enumerate()
        .map(|(r, &m)| {
            (0..m)
                .map(|j| {
                    let mut rng = seed.child2(r as u64, j as u64).rng();
                    draw_set(dist, k, &mut rng, &mut buf);
                    buf[r]
                })
                .collect()
        })
        .collect();
    UrssSample::with_design(rows, design.clone()).expect("generated sample matches its design")
}

/// Draw under noisy ranking: units are ranked by `X + eps` with
/// `eps ~ Normal(0, sigma_eps^2)` but the measurement records `X` itself.
/// With `sigma_eps == 0` this reproduces [`draw_urss`] bit for bit.
pub fn draw_urss_imperfect(
    dist: &DistributionSpec,
    design: &Design,
    sigma_eps: f64,
    seed: RngSeed,
) -> Result<UrssSample> {
    if sigma_eps < 0.0 || sigma_eps.is_nan() {
        return Err(Error::NegativeSigma(sigma_eps));
    }
    if sigma_eps == 0.0 {
        return Ok(draw_urss(dist, design, seed));
    }
    let k = design.set_size();
    let noise = Normal::new(0.0, sigma_eps).expect("validated sigma");
    let rows = design
        .counts()
        .iter()
        .enumerate()
        .map(|(r, &m)| {
            (0..m)
                .map(|j| {
                    let mut rng = seed.child2(r as u64, j as u64).rng();
                    let xs: Vec<f64> = (0..k).map(|_| dist.sample(&mut rng)).collect();
                    let mut pairs: Vec<(f64, f64)> = xs
                        .into_iter()
                        .map(|x| (x, x + noise.sample(&mut rng)))
                        .collect();
                    // Stable sort on the ranking variable keeps ties in draw
                    // order for reproducibility.
                    pairs.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite ranking values"));
                    pairs[r].0
                })
                .collect()
        })
        .collect();
    Ok(UrssSample::with_design(rows, design.clone())
        .expect("generated sample matches its design"))
}

/// Draw under matrix-specified misranking: a slot judged to have rank `r`
/// records the `s`-th true order statistic, where `s` is drawn from column
/// `r` of the misranking matrix.
pub fn draw_urss_matrix(
    dist: &DistributionSpec,
    design: &Design,
    misrank: &MisrankMatrix,
    seed: RngSeed,
) -> Result<UrssSample> {
    let k = design.set_size();
    if misrank.k() != k {
        return Err(Error::DimensionMismatch(format!(
            "misranking matrix is {}x{} but the design has {k} ranks",
            misrank.k(),
            misrank.k()
        )));
    }
    let columns: Vec<AliasTable> = (0..k)
        .map(|r| AliasTable::new(&misrank.judged_column(r)))
        .collect::<Result<_>>()?;
    let mut buf = Vec::with_capacity(k);
    let rows = design
        .counts()
        .iter()
        .enumerate()
        .map(|(r, &m)| {
            (0..m)
                .map(|j| {
                    let mut rng = seed.child2(r as u64, j as u64).rng();
                    let s = columns[r].sample(&mut rng);
                    draw_set(dist, k, &mut rng, &mut buf);
                    buf[s]
                })
                .collect()
        })
        .collect();
    Ok(UrssSample::with_design(rows, design.clone())
        .expect("generated sample matches its design"))
}

/// Draw a ranked set sample from a finite population of `(y, concomitant)`
/// records. Each set selects `k` distinct records uniformly without
/// replacement, ranks them by the concomitant (ties broken by record index),
/// and measures `y` of the prescribed rank. Sets are drawn independently,
/// with replacement across sets.
pub fn draw_finite_population_rss(
    population: &[(f64, f64)],
    design: &Design,
    seed: RngSeed,
) -> Result<UrssSample> {
    let k = design.set_size();
    let n_pop = population.len();
    if n_pop < k {
        return Err(Error::PopulationTooSmall {
            population: n_pop,
            k,
        });
    }
    for (i, &(y, c)) in population.iter().enumerate() {
        if !y.is_finite() || !c.is_finite() {
            return Err(Error::NonFiniteValue(format!(
                "population record {i}: ({y}, {c})"
            )));
        }
    }
    let rows = design
        .counts()
        .iter()
        .enumerate()
        .map(|(r, &m)| {
            (0..m)
                .map(|j| {
                    let mut rng = seed.child2(r as u64, j as u64).rng();
                    // Partial Fisher-Yates for k distinct indices.
                    let mut idx: Vec<usize> = (0..n_pop).collect();
                    for i in 0..k {
                        let pick = rng.random_range(i..n_pop);
                        idx.swap(i, pick);
                    }
                    let mut set: Vec<usize> = idx[..k].to_vec();
                    set.sort_by(|&a, &b| {
                        population[a]
                            .1
                            .partial_cmp(&population[b].1)
                            .expect("finite concomitants")
                            .then(a.cmp(&b))
                    });
                    population[set[r]].0
                })
                .collect()
        })
        .collect();
    Ok(UrssSample::with_design(rows, design.clone())
        .expect("generated sample matches its design"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    fn std_normal() -> DistributionSpec {
        DistributionSpec::normal(0.0, 1.0).unwrap()
    }

    #[test]
    fn shape_and_determinism() {
        let design = Design::new(vec![1, 1]).unwrap();
        let seed = RngSeed::new(7, 0);
        let a = draw_urss(&std_normal(), &design, seed);
        let b = draw_urss(&std_normal(), &design, seed);
        assert_eq!(a, b);
        assert_eq!(a.design(), &design);
        assert_eq!(a.row(0).len(), 1);
        assert_eq!(a.row(1).len(), 1);
    }

    #[test]
    fn rank_one_mean_matches_order_statistic() {
        // E[min of 2 standard normals] = -1/sqrt(pi).
        let design = Design::new(vec![100, 1]).unwrap();
        let mut total = 0.0;
        let reps = 1000;
        for rep in 0..reps {
            let s = draw_urss(&std_normal(), &design, RngSeed::new(100 + rep, 0));
            total += s.row(0).iter().sum::<f64>();
        }
        let mean = total / (reps as f64 * 100.0);
        let expected = -1.0 / std::f64::consts::PI.sqrt();
        assert!(
            (mean - expected).abs() < 0.01,
            "mean {mean} vs {expected}"
        );
    }

    #[test]
    fn imperfect_zero_noise_matches_perfect() {
        let design = Design::new(vec![3, 2, 4]).unwrap();
        let seed = RngSeed::new(21, 3);
        let perfect = draw_urss(&std_normal(), &design, seed);
        let imperfect = draw_urss_imperfect(&std_normal(), &design, 0.0, seed).unwrap();
        assert_eq!(perfect, imperfect);
    }

    #[test]
    fn negative_sigma_rejected() {
        let design = Design::new(vec![2, 2]).unwrap();
        assert!(matches!(
            draw_urss_imperfect(&std_normal(), &design, -0.5, RngSeed::new(0, 0)),
            Err(Error::NegativeSigma(_))
        ));
    }

    #[test]
    fn ranking_noise_correlation() {
        // corr(X, X + eps) = 1/sqrt(1 + sigma^2) for standard normal X.
        let normal = Normal::new(0.0, 1.0).unwrap();
        for (sigma, expected) in [(0.5, 1.0 / 1.25f64.sqrt()), (1.0, 1.0 / 2.0f64.sqrt())] {
            let noise = Normal::new(0.0, sigma).unwrap();
            let mut rng = RngSeed::new(31, 0).rng();
            let n = 100_000;
            let mut xs = Vec::with_capacity(n);
            let mut ys = Vec::with_capacity(n);
            for _ in 0..n {
                let x: f64 = normal.sample(&mut rng);
                xs.push(x);
                ys.push(x + noise.sample(&mut rng));
            }
            let rho = stats::pearson_correlation(&xs, &ys);
            assert!(
                (rho - expected).abs() < 0.01,
                "sigma {sigma}: corr {rho} vs {expected}"
            );
        }
    }

    #[test]
    fn misrank_matrix_validation() {
        assert!(MisrankMatrix::new(vec![vec![0.5, 0.5], vec![0.9, 0.1]]).is_err());
        assert!(MisrankMatrix::new(vec![vec![0.5, 0.5]]).is_err());
        assert!(MisrankMatrix::identity(3).is_ok());
        assert!(MisrankMatrix::uniform(4).is_ok());
    }

    #[test]
    fn identity_matrix_matches_perfect_ranking() {
        let design = Design::new(vec![100, 100]).unwrap();
        let identity = MisrankMatrix::identity(2).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for rep in 0..100 {
            let s1 = draw_urss_matrix(&std_normal(), &design, &identity, RngSeed::new(rep, 1))
                .unwrap();
            let s2 = draw_urss(&std_normal(), &design, RngSeed::new(rep, 2));
            a.extend_from_slice(s1.row(0));
            b.extend_from_slice(s2.row(0));
        }
        let d = stats::ks_two_sample(&mut a, &mut b);
        assert!(d < 0.03, "two-sample KS distance {d}");
    }

    #[test]
    fn uniform_matrix_recovers_parent() {
        let design = Design::new(vec![100, 100, 100]).unwrap();
        let uniform = MisrankMatrix::uniform(3).unwrap();
        let dist = std_normal();
        let mut values = Vec::new();
        for rep in 0..34 {
            let s = draw_urss_matrix(&dist, &design, &uniform, RngSeed::new(rep, 4)).unwrap();
            values.extend_from_slice(s.row(0));
        }
        values.truncate(10_000);
        let d = stats::ks_statistic(&mut values, |x| dist.cdf(x));
        assert!(d < 0.03, "KS distance to parent {d}");
    }

    #[test]
    fn matrix_dimension_mismatch() {
        let design = Design::new(vec![2, 2]).unwrap();
        let m3 = MisrankMatrix::identity(3).unwrap();
        assert!(matches!(
            draw_urss_matrix(&std_normal(), &design, &m3, RngSeed::new(0, 0)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn finite_population_perfect_ranking_orders_rows() {
        // Concomitant equals the response: ranking is exact, so higher ranks
        // have strictly larger row means at this sample size.
        let population: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, i as f64)).collect();
        let design = Design::new(vec![200, 200, 200]).unwrap();
        let s = draw_finite_population_rss(&population, &design, RngSeed::new(5, 0)).unwrap();
        assert!(s.row_mean(0) < s.row_mean(1));
        assert!(s.row_mean(1) < s.row_mean(2));
    }

    #[test]
    fn finite_population_constant_concomitant_acts_like_srs() {
        let mut rng = RngSeed::new(17, 0).rng();
        let population: Vec<(f64, f64)> = (0..60)
            .map(|_| (rng.random::<f64>() * 10.0, 1.0))
            .collect();
        let pop_mean = population.iter().map(|&(y, _)| y).sum::<f64>() / population.len() as f64;
        let pop_var = population
            .iter()
            .map(|&(y, _)| (y - pop_mean) * (y - pop_mean))
            .sum::<f64>()
            / population.len() as f64;
        let design = Design::new(vec![300, 300, 300]).unwrap();
        let s = draw_finite_population_rss(&population, &design, RngSeed::new(23, 0)).unwrap();
        let se = (pop_var / s.sample_size() as f64).sqrt();
        assert!(
            (s.grand_mean() - pop_mean).abs() < 3.0 * se,
            "grand mean {} vs population mean {pop_mean}",
            s.grand_mean()
        );
    }

    #[test]
    fn finite_population_too_small() {
        let population = vec![(1.0, 1.0), (2.0, 2.0)];
        let design = Design::new(vec![1, 1, 1]).unwrap();
        assert!(matches!(
            draw_finite_population_rss(&population, &design, RngSeed::new(0, 0)),
            Err(Error::PopulationTooSmall { .. })
        ));
    }

    #[test]
    fn perfect_ranking_row_means_increase() {
        for dist in [std_normal(), DistributionSpec::exponential(1.0).unwrap()] {
            let design = Design::balanced(3, 10_000).unwrap();
            let s = draw_urss(&dist, &design, RngSeed::new(77, 0));
            let means = s.row_means();
            assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
        }
    }
}
