//! Replicated simulation studies: observed significance levels, power under
//! location shifts, behaviour under imperfect ranking, and p-value
//! uniformity data.
//!
//! Every replication derives its streams from `(seed, replication index)`
//! alone, and aggregation sums integers, so results are bit-identical for
//! any worker count.

use rayon::prelude::*;

use crate::design::Design;
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::sample::UrssSample;
use crate::sampling::{draw_urss, draw_urss_imperfect};
use crate::testing::{
    baklizi_test, et_bootstrap_test, liu_el_test, parametric_bootstrap_test,
    parametric_percentile_ci_decision, percentile_ci_decision, pt_test, wt_test, Alternative,
    EtKind, Method,
};

/// Configuration of one simulation study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub design: Design,
    pub dist: DistributionSpec,
    pub mu0: f64,
    /// Location shift added to every drawn value; 0 for size studies.
    pub delta: f64,
    /// Ranking-noise standard deviation; 0 for perfect ranking.
    pub sigma_eps: f64,
    pub methods: Vec<Method>,
    pub b: usize,
    pub replications: usize,
    pub alpha: f64,
    pub seed: RngSeed,
}

impl StudyConfig {
    fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        if self.b < 1 {
            return Err(Error::InvalidConfig("bootstrap size must be >= 1".into()));
        }
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be in (0,1), got {}",
                self.alpha
            )));
        }
        if self.sigma_eps < 0.0 || self.sigma_eps.is_nan() {
            return Err(Error::NegativeSigma(self.sigma_eps));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods configured".into()));
        }
        Ok(())
    }
}

/// Rejection tally for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub rejections: usize,
    /// Replications in which the method produced a decision.
    pub successes: usize,
    /// Replications in which it failed (e.g. an infeasible tilting target);
    /// excluded from the rate denominator, never silently dropped.
    pub failures: usize,
}

impl MethodResult {
    pub fn rate(&self) -> f64 {
        if self.successes == 0 {
            f64::NAN
        } else {
            self.rejections as f64 / self.successes as f64
        }
    }

    /// Binomial Monte Carlo standard error of the rate; absent when fewer
    /// than two successful replications exist.
    pub fn standard_error(&self) -> Option<f64> {
        if self.successes < 2 {
            return None;
        }
        let p = self.rate();
        Some((p * (1.0 - p) / self.successes as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub methods: Vec<MethodResult>,
}

impl StudyResult {
    pub fn method(&self, method: Method) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn rate(&self, method: Method) -> f64 {
        self.method(method).map(|m| m.rate()).unwrap_or(f64::NAN)
    }
}

/// Study result that also keeps the per-replication p-values of every
/// p-value-based method, for uniformity diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailedStudy {
    pub result: StudyResult,
    /// Parallel to `result.methods`; empty for decision-only methods.
    pub p_values: Vec<Vec<f64>>,
}

enum Decision {
    Reject(bool, Option<f64>),
    Failed,
}

/// The decision rule switches with `delta`: size studies (`delta == 0`)
/// reject when the p-value is at most `alpha`, power studies use the
/// percentile-interval rule for the tilted bootstrap methods.
///
/// All p-value decisions are two-sided. The percentile interval is central,
/// so the power entries and the analytic tests answer the same two-sided
/// question; under skewed populations this leaves the asymptotic test
/// visibly liberal while the bootstrap tests stay near the nominal level.
fn decide(
    method: Method,
    sample: &UrssSample,
    config: &StudyConfig,
    seed: RngSeed,
) -> Decision {
    let alpha = config.alpha;
    let power_mode = config.delta != 0.0;
    let two = Alternative::TwoSided;
    let p_decision = |p: f64| Decision::Reject(p <= alpha, Some(p));
    let outcome = match method {
        Method::Pt => pt_test(sample, config.mu0, two).map(|o| p_decision(o.p_value)),
        Method::Wt => wt_test(sample, config.mu0, two).map(|o| p_decision(o.p_value)),
        Method::Eat | Method::Ieat => {
            if power_mode {
                percentile_ci_decision(sample, config.mu0, EtKind::Eat, config.b, seed, 1.0 - alpha)
                    .map(|reject| Decision::Reject(reject, None))
            } else {
                et_bootstrap_test(sample, config.mu0, EtKind::Eat, config.b, seed, two)
                    .map(|o| p_decision(o.p_value))
            }
        }
        Method::Ear | Method::Iear => {
            if power_mode {
                percentile_ci_decision(sample, config.mu0, EtKind::Ear, config.b, seed, 1.0 - alpha)
                    .map(|reject| Decision::Reject(reject, None))
            } else {
                et_bootstrap_test(sample, config.mu0, EtKind::Ear, config.b, seed, two)
                    .map(|o| p_decision(o.p_value))
            }
        }
        Method::Pb => {
            if power_mode {
                parametric_percentile_ci_decision(
                    sample,
                    config.mu0,
                    config.dist.family(),
                    config.b,
                    seed,
                    1.0 - alpha,
                )
                .map(|reject| Decision::Reject(reject, None))
            } else {
                parametric_bootstrap_test(
                    sample,
                    config.mu0,
                    config.dist.family(),
                    config.b,
                    seed,
                    two,
                )
                .map(|o| p_decision(o.p_value))
            }
        }
        Method::Baklizi => baklizi_test(sample, config.mu0).map(|o| p_decision(o.p_value)),
        Method::Liu => liu_el_test(sample, config.mu0).map(|o| p_decision(o.p_value)),
    };
    outcome.unwrap_or(Decision::Failed)
}

fn method_salt(method: Method) -> u64 {
    match method {
        Method::Pt => 1,
        Method::Wt => 2,
        Method::Eat => 3,
        Method::Ear => 4,
        Method::Pb => 5,
        Method::Ieat => 6,
        Method::Iear => 7,
        Method::Baklizi => 8,
        Method::Liu => 9,
    }
}

/// Run the configured study, returning rates plus per-method p-values.
pub fn run_study_detailed(config: &StudyConfig) -> Result<DetailedStudy> {
    config.validate()?;
    let n_methods = config.methods.len();

    // One entry per replication: (rejected?, p-value) per method, or None on
    // failure. Collected in replication order, so the reduction below is
    // independent of the parallel schedule.
    type RepOutcomes = Vec<Option<(bool, Option<f64>)>>;
    let outcomes: Vec<RepOutcomes> = (0..config.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = config.seed.child(rep);
            let sample_seed = rep_seed.child(0);
            let raw = if config.sigma_eps > 0.0 {
                draw_urss_imperfect(&config.dist, &config.design, config.sigma_eps, sample_seed)
                    .expect("validated sigma")
            } else {
                draw_urss(&config.dist, &config.design, sample_seed)
            };
            let sample = if config.delta != 0.0 {
                raw.shifted(config.delta)
            } else {
                raw
            };
            config
                .methods
                .iter()
                .map(|&method| {
                    let seed = rep_seed.child(1000 + method_salt(method));
                    match decide(method, &sample, config, seed) {
                        Decision::Reject(reject, p) => Some((reject, p)),
                        Decision::Failed => None,
                    }
                })
                .collect()
        })
        .collect();

    let mut methods = Vec::with_capacity(n_methods);
    let mut p_values = vec![Vec::new(); n_methods];
    for (idx, &method) in config.methods.iter().enumerate() {
        let mut rejections = 0;
        let mut successes = 0;
        let mut failures = 0;
        for rep in &outcomes {
            match rep[idx] {
                Some((reject, p)) => {
                    successes += 1;
                    if reject {
                        rejections += 1;
                    }
                    if let Some(p) = p {
                        p_values[idx].push(p);
                    }
                }
                None => failures += 1,
            }
        }
        methods.push(MethodResult {
            method,
            rejections,
            successes,
            failures,
        });
    }

    Ok(DetailedStudy {
        result: StudyResult {
            config: config.clone(),
            methods,
        },
        p_values,
    })
}

pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    Ok(run_study_detailed(config)?.result)
}

/// Observed significance level study; requires `delta == 0`.
pub fn run_size_study(config: &StudyConfig) -> Result<StudyResult> {
    if config.delta != 0.0 {
        return Err(Error::InvalidConfig(
            "size study requires delta == 0".into(),
        ));
    }
    run_study(config)
}

/// Power study under a location shift; requires `delta != 0`. The tilted
/// bootstrap methods use the percentile-interval decision.
pub fn run_power_study(config: &StudyConfig) -> Result<StudyResult> {
    run_study(config)
}

/// Study under imperfect ranking; requires `sigma_eps > 0`.
pub fn run_imperfect_study(config: &StudyConfig) -> Result<StudyResult> {
    if config.sigma_eps <= 0.0 {
        return Err(Error::InvalidConfig(
            "imperfect-ranking study requires sigma_eps > 0".into(),
        ));
    }
    run_study(config)
}

/// Sorted null p-values of one method across replications (failures
/// dropped). Pair with `(i - 0.5) / len` plotting positions to draw a
/// uniform Q-Q plot.
pub fn qq_pvalues(config: &StudyConfig, method: Method) -> Result<Vec<f64>> {
    if config.delta != 0.0 {
        return Err(Error::InvalidConfig(
            "p-value uniformity requires delta == 0".into(),
        ));
    }
    let mut narrowed = config.clone();
    narrowed.methods = vec![method];
    let detailed = run_study_detailed(&narrowed)?;
    let mut p = detailed.p_values.into_iter().next().unwrap_or_default();
    p.sort_by(|a, b| a.partial_cmp(b).expect("p-values are finite"));
    Ok(p)
}

/// Uniform plotting positions `(i - 0.5) / n` for sorted p-values.
pub fn plotting_positions(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

/// The simulation designs used throughout: `D1` through `D6`.
pub fn paper_design(name: &str) -> Option<Design> {
    let counts = match name.to_ascii_uppercase().as_str() {
        "D1" => vec![5, 5, 5, 5, 5],
        "D2" => vec![8, 3, 3, 2, 4],
        "D3" => vec![3, 2, 5, 8, 3],
        "D4" => vec![3, 10, 3, 3, 3],
        "D5" => vec![4, 2, 3, 3, 8],
        "D6" => vec![2, 2, 2, 2, 2],
        _ => return None,
    };
    Some(Design::new(counts).expect("static designs are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> StudyConfig {
        StudyConfig {
            design: paper_design("D1").unwrap(),
            dist: DistributionSpec::normal(0.0, 1.0).unwrap(),
            mu0: 0.0,
            delta: 0.0,
            sigma_eps: 0.0,
            methods: vec![Method::Pt, Method::Eat],
            b: 50,
            replications: 40,
            alpha: 0.05,
            seed: RngSeed::new(1234, 0),
        }
    }

    #[test]
    fn config_validation() {
        let mut c = small_config();
        c.replications = 0;
        assert!(run_study(&c).is_err());
        let mut c = small_config();
        c.alpha = 1.5;
        assert!(run_study(&c).is_err());
        let mut c = small_config();
        c.methods.clear();
        assert!(run_study(&c).is_err());
    }

    #[test]
    fn wrappers_enforce_their_regime() {
        let mut c = small_config();
        c.delta = 0.1;
        assert!(run_size_study(&c).is_err());
        c.delta = 0.0;
        assert!(run_imperfect_study(&c).is_err());
        assert!(qq_pvalues(&{ let mut q = c.clone(); q.delta = 0.2; q }, Method::Pt).is_err());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let config = small_config();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_study_detailed(&config).unwrap());
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_study_detailed(&config).unwrap());
        assert_eq!(one, four);
    }

    #[test]
    fn single_replication_rate_is_binary() {
        let mut c = small_config();
        c.replications = 1;
        let r = run_study(&c).unwrap();
        for m in &r.methods {
            if m.successes > 0 {
                let rate = m.rate();
                assert!(rate == 0.0 || rate == 1.0);
                assert!(m.standard_error().is_none());
            }
        }
    }

    #[test]
    fn failure_accounting_sums_to_replications() {
        let mut c = small_config();
        // An infeasible null makes every tilted replication fail.
        c.mu0 = 50.0;
        c.methods = vec![Method::Eat, Method::Pt];
        let r = run_study(&c).unwrap();
        let eat = r.method(Method::Eat).unwrap();
        assert_eq!(eat.failures, c.replications);
        assert_eq!(eat.successes, 0);
        let pt = r.method(Method::Pt).unwrap();
        assert_eq!(pt.successes + pt.failures, c.replications);
    }

    #[test]
    fn qq_output_is_sorted_and_complete() {
        let c = small_config();
        let p = qq_pvalues(&c, Method::Pt).unwrap();
        assert_eq!(p.len(), c.replications);
        assert!(p.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(plotting_positions(4), vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn power_exceeds_size_for_visible_shift() {
        let mut c = small_config();
        c.methods = vec![Method::Pt, Method::Eat, Method::Ear];
        c.replications = 150;
        let size = run_study(&c).unwrap();
        c.delta = 0.5;
        let power = run_power_study(&c).unwrap();
        for method in [Method::Pt, Method::Eat, Method::Ear] {
            assert!(
                power.rate(method) > size.rate(method) + 0.2,
                "{method:?}: power {} vs size {}",
                power.rate(method),
                size.rate(method)
            );
        }
    }

    #[test]
    fn named_designs() {
        assert_eq!(paper_design("D1").unwrap().sample_size(), 25);
        assert_eq!(paper_design("d6").unwrap().counts(), &[2, 2, 2, 2, 2]);
        assert!(paper_design("D9").is_none());
    }
}
