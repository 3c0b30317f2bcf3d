//! Test statistics and p-value procedures for hypotheses about the
//! population mean from ranked set samples.
//!
//! `pt_statistic` is the studentized average of row means; PT calibrates it
//! against the standard normal, WT against a Student-t with a
//! Welch-Satterthwaite degrees-of-freedom approximation. The bootstrap tests
//! tilt the sample so the null mean holds, resample, and report the
//! proportion of resampled statistics exceeding the observed one. Percentile
//! confidence intervals provide the power decision rule. Two empirical
//! likelihood comparators for balanced designs are included.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use crate::dist::Family;
use crate::error::{Error, Result};
use crate::resampling::{EarResampler, EatResampler, ParametricResampler};
use crate::rng::RngSeed;
use crate::sample::UrssSample;
use crate::tilting::{ear_weights, eat_weights};

/// Method tags for outcomes and simulation columns. `Ieat`/`Iear` label the
/// EAT/EAR procedures when applied to samples collected under imperfect
/// ranking; the algorithms are identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Pt,
    Wt,
    Eat,
    Ear,
    Pb,
    Ieat,
    Iear,
    Baklizi,
    Liu,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pt" => Ok(Self::Pt),
            "wt" => Ok(Self::Wt),
            "eat" => Ok(Self::Eat),
            "ear" => Ok(Self::Ear),
            "pb" => Ok(Self::Pb),
            "ieat" => Ok(Self::Ieat),
            "iear" => Ok(Self::Iear),
            "baklizi" => Ok(Self::Baklizi),
            "liu" => Ok(Self::Liu),
            _ => Err(Error::Parse(format!("unknown method {s:?}"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Pt => "pt",
            Self::Wt => "wt",
            Self::Eat => "eat",
            Self::Ear => "ear",
            Self::Pb => "pb",
            Self::Ieat => "ieat",
            Self::Iear => "iear",
            Self::Baklizi => "baklizi",
            Self::Liu => "liu",
        }
    }
}

/// Which of the two tilted resampling schemes a bootstrap test uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtKind {
    Eat,
    Ear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    Greater,
    TwoSided,
}

/// A completed test: the statistic, its p-value, and enough metadata to rerun
/// it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    pub df: Option<f64>,
    pub b: Option<usize>,
    pub seed: Option<RngSeed>,
    /// Set when an empirical likelihood target fell outside the convex hull
    /// of the data; the reported p-value is then the limiting 0.
    pub hull_violation: bool,
}

impl TestOutcome {
    fn analytic(method: Method, statistic: f64, p_value: f64, df: Option<f64>) -> Self {
        Self {
            method,
            statistic,
            p_value,
            df,
            b: None,
            seed: None,
            hull_violation: false,
        }
    }
}

fn row_stats(sample: &UrssSample) -> Result<Vec<(usize, f64, f64)>> {
    (0..sample.set_size())
        .map(|r| {
            let m = sample.row(r).len();
            Ok((m, sample.row_mean(r), sample.row_variance(r)?))
        })
        .collect()
}

/// Studentized average of the row means:
/// `T = (1/k) * sum_r (mean_r - mu0) / S` with
/// `S^2 = (1/k^2) * sum_r var_r / m_r`.
pub fn pt_statistic(sample: &UrssSample, mu0: f64) -> Result<f64> {
    let stats = row_stats(sample)?;
    let k = stats.len() as f64;
    let s2: f64 = stats.iter().map(|&(m, _, v)| v / m as f64).sum::<f64>() / (k * k);
    if s2 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let centered: f64 = stats.iter().map(|&(_, mean, _)| mean - mu0).sum::<f64>() / k;
    Ok(centered / s2.sqrt())
}

/// `pt_statistic`, extended by continuity to degenerate resamples in which
/// every row is constant: the statistic is then a signed infinity (or zero
/// when the centered row-mean average vanishes exactly).
fn statistic_or_signed_inf(sample: &UrssSample, mu0: f64) -> Result<f64> {
    match pt_statistic(sample, mu0) {
        Ok(t) => Ok(t),
        Err(Error::ZeroVariance) => {
            let k = sample.set_size() as f64;
            let centered: f64 =
                (0..sample.set_size()).map(|r| sample.row_mean(r) - mu0).sum::<f64>() / k;
            Ok(if centered > 0.0 {
                f64::INFINITY
            } else if centered < 0.0 {
                f64::NEG_INFINITY
            } else {
                0.0
            })
        }
        Err(e) => Err(e),
    }
}

fn tail_p(statistic: f64, alternative: Alternative, upper_tail: impl Fn(f64) -> f64) -> f64 {
    match alternative {
        Alternative::Greater => upper_tail(statistic),
        Alternative::TwoSided => {
            let upper = upper_tail(statistic);
            (2.0 * upper.min(1.0 - upper)).min(1.0)
        }
    }
}

/// Asymptotic-normal calibration of [`pt_statistic`].
pub fn pt_test(sample: &UrssSample, mu0: f64, alternative: Alternative) -> Result<TestOutcome> {
    let t = pt_statistic(sample, mu0)?;
    let normal = Normal::standard();
    let p = tail_p(t, alternative, |x| normal.sf(x));
    Ok(TestOutcome::analytic(Method::Pt, t, p, None))
}

/// Welch-Satterthwaite degrees of freedom for the studentized row-mean
/// average:
/// `(sum_r var_r/m_r)^2 / sum_r var_r^2 / (m_r^2 (m_r - 1))`.
pub fn welch_df(sample: &UrssSample) -> Result<f64> {
    let stats = row_stats(sample)?;
    let num: f64 = stats.iter().map(|&(m, _, v)| v / m as f64).sum();
    let den: f64 = stats
        .iter()
        .map(|&(m, _, v)| v * v / ((m * m * (m - 1)) as f64))
        .sum();
    if den <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(num * num / den)
}

/// Student-t calibration of [`pt_statistic`] with Welch-type degrees of
/// freedom.
pub fn wt_test(sample: &UrssSample, mu0: f64, alternative: Alternative) -> Result<TestOutcome> {
    let t = pt_statistic(sample, mu0)?;
    let df = welch_df(sample)?;
    let student = StudentsT::new(0.0, 1.0, df).expect("positive df");
    let p = tail_p(t, alternative, |x| student.sf(x));
    Ok(TestOutcome::analytic(Method::Wt, t, p, Some(df)))
}

/// Tilted bootstrap test of `mean == mu0`.
///
/// The sample is tilted so its weighted mean equals `mu0`, `b` resamples are
/// generated by the chosen scheme, and the bootstrap p-value compares the
/// observed statistic against the resampled ones: the proportion strictly
/// exceeding it for the `greater` alternative, and the equal-tailed
/// `2 * min(upper, lower)` proportion for the two-sided alternative (the
/// dual of the equal-tailed percentile interval). Ties count as
/// non-rejections.
pub fn et_bootstrap_test(
    sample: &UrssSample,
    mu0: f64,
    kind: EtKind,
    b: usize,
    seed: RngSeed,
    alternative: Alternative,
) -> Result<TestOutcome> {
    let t = pt_statistic(sample, mu0)?;
    let p_value = match kind {
        EtKind::Eat => {
            let weights = eat_weights(sample, mu0)?;
            let resampler = EatResampler::new(sample, &weights, seed)?;
            bootstrap_p_value(b, t, mu0, alternative, |i| resampler.resample(i))
        }
        EtKind::Ear => {
            let weights = ear_weights(sample, mu0)?;
            let resampler = EarResampler::new(sample, &weights, seed)?;
            bootstrap_p_value(b, t, mu0, alternative, |i| resampler.resample(i))
        }
    };
    Ok(TestOutcome {
        method: match kind {
            EtKind::Eat => Method::Eat,
            EtKind::Ear => Method::Ear,
        },
        statistic: t,
        p_value,
        df: None,
        b: Some(b),
        seed: Some(seed),
        hull_violation: false,
    })
}

fn bootstrap_p_value<F: Fn(u64) -> UrssSample>(
    b: usize,
    t_obs: f64,
    center: f64,
    alternative: Alternative,
    resample: F,
) -> f64 {
    let mut above = 0usize;
    let mut below = 0usize;
    for i in 0..b as u64 {
        let rs = resample(i);
        if let Ok(t) = statistic_or_signed_inf(&rs, center) {
            if t > t_obs {
                above += 1;
            } else if t < t_obs {
                below += 1;
            }
        }
    }
    match alternative {
        Alternative::Greater => above as f64 / b as f64,
        Alternative::TwoSided => (2.0 * above.min(below) as f64 / b as f64).min(1.0),
    }
}

/// Parametric bootstrap test: resamples come from the fitted family instead
/// of a tilted empirical estimate.
///
/// The fit estimates the mean by the sample mean without imposing the null,
/// so the resampled statistics are centered at the fitted mean; that is what
/// makes them draws from the null distribution of the statistic. (The tilted
/// tests instead impose the null through the tilt target and keep `mu0`.)
pub fn parametric_bootstrap_test(
    sample: &UrssSample,
    mu0: f64,
    family: Family,
    b: usize,
    seed: RngSeed,
    alternative: Alternative,
) -> Result<TestOutcome> {
    let t = pt_statistic(sample, mu0)?;
    let resampler = ParametricResampler::new(sample, family, seed)?;
    let center = resampler.fitted().mean();
    let p_value = bootstrap_p_value(b, t, center, alternative, |i| resampler.resample(i));
    Ok(TestOutcome {
        method: Method::Pb,
        statistic: t,
        p_value,
        df: None,
        b: Some(b),
        seed: Some(seed),
        hull_violation: false,
    })
}

/// Percentile-interval decision used in power studies: tilt at the grand mean
/// (no null imposed), bootstrap the row-mean average, and reject when the
/// central `level` percentile interval of `mean* - mu0` excludes zero.
pub fn percentile_ci_decision(
    sample: &UrssSample,
    mu0: f64,
    kind: EtKind,
    b: usize,
    seed: RngSeed,
    level: f64,
) -> Result<bool> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "confidence level must be in (0,1), got {level}"
        )));
    }
    let (min, max) = sample.value_range();
    if min == max {
        // Degenerate sample: the bootstrap distribution is a point mass.
        return Ok(min != mu0);
    }
    let target = sample.grand_mean();
    let mut diffs: Vec<f64> = match kind {
        EtKind::Eat => {
            let weights = eat_weights(sample, target)?;
            let resampler = EatResampler::new(sample, &weights, seed)?;
            (0..b as u64)
                .map(|i| row_mean_average(&resampler.resample(i)) - mu0)
                .collect()
        }
        EtKind::Ear => {
            let weights = ear_weights(sample, target)?;
            let resampler = EarResampler::new(sample, &weights, seed)?;
            (0..b as u64)
                .map(|i| row_mean_average(&resampler.resample(i)) - mu0)
                .collect()
        }
    };
    Ok(percentile_interval_excludes_zero(&mut diffs, level))
}

/// Percentile-CI power decision with resamples from the fitted family
/// instead of a tilted empirical estimate; the same interval rule as
/// [`percentile_ci_decision`].
pub fn parametric_percentile_ci_decision(
    sample: &UrssSample,
    mu0: f64,
    family: Family,
    b: usize,
    seed: RngSeed,
    level: f64,
) -> Result<bool> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "confidence level must be in (0,1), got {level}"
        )));
    }
    let resampler = ParametricResampler::new(sample, family, seed)?;
    let mut diffs: Vec<f64> = (0..b as u64)
        .map(|i| row_mean_average(&resampler.resample(i)) - mu0)
        .collect();
    Ok(percentile_interval_excludes_zero(&mut diffs, level))
}

/// Equal-tailed percentile interval from the `((B+1) * tail)`-th and
/// `((B+1) * (1 - tail))`-th order statistics; rejects when it excludes
/// zero.
fn percentile_interval_excludes_zero(diffs: &mut [f64], level: f64) -> bool {
    diffs.sort_by(|a, b| a.partial_cmp(b).expect("finite means"));
    let tail = (1.0 - level) / 2.0;
    let b = diffs.len();
    let lo_rank = (((b + 1) as f64 * tail).ceil() as usize).clamp(1, b);
    let hi_rank = (((b + 1) as f64 * (1.0 - tail)).floor() as usize).clamp(1, b);
    let lo = diffs[lo_rank - 1];
    let hi = diffs[hi_rank - 1];
    !(lo <= 0.0 && 0.0 <= hi)
}

fn row_mean_average(sample: &UrssSample) -> f64 {
    let k = sample.set_size() as f64;
    (0..sample.set_size()).map(|r| sample.row_mean(r)).sum::<f64>() / k
}

/// Empirical likelihood ratio test for balanced designs built from the raw
/// observations; the scaled ratio is calibrated against chi-square with one
/// degree of freedom.
pub fn baklizi_test(sample: &UrssSample, mu0: f64) -> Result<TestOutcome> {
    if !sample.design().is_balanced() {
        return Err(Error::UnbalancedDesign(format!(
            "design {} is unbalanced",
            sample.design()
        )));
    }
    let stats = row_stats(sample)?;
    let var_sum: f64 = stats.iter().map(|&(_, _, v)| v).sum();
    if var_sum <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let mean_dev: f64 = stats
        .iter()
        .map(|&(_, mean, _)| (mean - mu0) * (mean - mu0))
        .sum();
    let c0 = (var_sum + mean_dev) / var_sum;

    let dev_sum: f64 = sample.values().map(|x| x - mu0).sum();
    let dev_sq: f64 = sample.values().map(|x| (x - mu0) * (x - mu0)).sum();
    let l = if dev_sq > 0.0 {
        dev_sum * dev_sum / dev_sq
    } else {
        0.0
    };

    let statistic = c0 * l;
    let chi = ChiSquared::new(1.0).expect("df 1");
    Ok(TestOutcome::analytic(
        Method::Baklizi,
        statistic,
        chi.sf(statistic),
        None,
    ))
}

/// Empirical likelihood ratio test on the cycle means of a balanced design.
///
/// Cycle `j` collects one observation per rank; its mean is the average of
/// those `k` values. Owen's univariate empirical likelihood for the mean is
/// then applied to the `m` cycle means. A null mean outside the open range of
/// the cycle means has likelihood zero: the outcome reports `p = 0` with
/// `hull_violation` set rather than failing, so simulation loops can count it
/// as a rejection.
pub fn liu_el_test(sample: &UrssSample, mu0: f64) -> Result<TestOutcome> {
    if !sample.design().is_balanced() {
        return Err(Error::UnbalancedDesign(format!(
            "design {} is unbalanced",
            sample.design()
        )));
    }
    let k = sample.set_size();
    let m = sample.design().counts()[0];
    let cycle_means: Vec<f64> = (0..m)
        .map(|j| (0..k).map(|r| sample.row(r)[j]).sum::<f64>() / k as f64)
        .collect();

    let min = cycle_means.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = cycle_means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(Error::DegenerateValues);
    }
    if !(min < mu0 && mu0 < max) {
        return Ok(TestOutcome {
            method: Method::Liu,
            statistic: f64::INFINITY,
            p_value: 0.0,
            df: None,
            b: None,
            seed: None,
            hull_violation: true,
        });
    }

    let statistic = el_log_ratio(&cycle_means, mu0)?;
    let chi = ChiSquared::new(1.0).expect("df 1");
    Ok(TestOutcome::analytic(
        Method::Liu,
        statistic,
        chi.sf(statistic),
        None,
    ))
}

/// `-2 log R(mu0)` for Owen's empirical likelihood of a mean, solved through
/// the scalar dual: find `t` with `sum_i d_i / (1 + t d_i) = 0` where
/// `d_i = x_i - mu0`. The weights `1/(n (1 + t d_i))` stay positive, so
/// iterates are kept where `1 + t d_i` is bounded away from zero; since the
/// solution has all weights below one, `1 + t d_i > 1/n` holds there and the
/// safeguard never excludes the root. Requires `mu0` strictly inside the
/// data range.
fn el_log_ratio(values: &[f64], mu0: f64) -> Result<f64> {
    let n = values.len() as f64;
    let d: Vec<f64> = values.iter().map(|x| x - mu0).collect();
    let floor = 1.0 / (2.0 * n);

    let g_and_slope = |t: f64| {
        let mut g = 0.0;
        let mut slope = 0.0;
        for &di in &d {
            let denom = 1.0 + t * di;
            g += di / denom;
            slope -= di * di / (denom * denom);
        }
        (g, slope)
    };
    let feasible = |t: f64| d.iter().all(|&di| 1.0 + t * di > floor);

    let scale: f64 = d.iter().map(|x| x.abs()).sum::<f64>() / n;
    let tol = 1e-10 * scale.max(1.0);

    let mut t = 0.0;
    // Bracket [lo, hi] with g(lo) > 0 > g(hi); g is strictly decreasing.
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut iter = 0;
    loop {
        let (g, slope) = g_and_slope(t);
        if g.abs() <= tol {
            break;
        }
        if g > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = t - g / slope;
        if !next.is_finite() || next <= lo || next >= hi || !feasible(next) {
            // Damped fallback: bisect toward the needed side, halving until
            // feasible.
            let mut step = if g > 0.0 { 1.0 } else { -1.0 };
            if lo.is_finite() && hi.is_finite() {
                next = 0.5 * (lo + hi);
            } else {
                next = t + step;
                while !feasible(next) {
                    step *= 0.5;
                    next = t + step;
                }
            }
            while !feasible(next) {
                next = 0.5 * (t + next);
            }
        }
        t = next;
        iter += 1;
        if iter >= 200 {
            return Err(Error::NoConvergence(200));
        }
    }
    Ok(2.0 * d.iter().map(|&di| (1.0 + t * di).ln()).sum::<f64>())
}
