//! Small statistical helpers shared by the estimators, the simulation
//! harness and the test suites.

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
/// Sorts `values` in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &mut [f64], cdf: F) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    d
}

/// Kolmogorov-Smirnov distance of already sorted values to Uniform(0,1).
pub fn ks_uniform_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        d = d.max(((i + 1) as f64 / n - u).abs());
        d = d.max((u - i as f64 / n).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic. Sorts both slices in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite values"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("finite values"));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical value for the one-sample Kolmogorov-Smirnov statistic using
/// Stephens' small-sample correction. Supported levels: 0.05 and 0.01.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    let c = if alpha <= 0.01 { 1.627_62 } else { 1.358_10 };
    let sqrt_n = (n as f64).sqrt();
    c / (sqrt_n + 0.12 + 0.11 / sqrt_n)
}

/// Pearson correlation coefficient of two equal-length slices.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Linear-interpolation quantile of a sorted slice (the common "type 7"
/// definition), `q` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&q));
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_grid_is_small() {
        let n = 1000;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!(ks_uniform_sorted(&grid) <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn ks_detects_shift() {
        let mut values: Vec<f64> = (0..500).map(|i| (i as f64 + 0.5) / 500.0 * 0.5).collect();
        let d = ks_statistic(&mut values, |x| x.clamp(0.0, 1.0));
        assert!(d > 0.4);
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
        assert!((quantile_sorted(&xs, 0.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn correlation_of_identical_series_is_one() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!((pearson_correlation(&xs, &xs) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn critical_values_decrease_with_n() {
        assert!(ks_critical_value(100, 0.01) > ks_critical_value(2000, 0.01));
        assert!(ks_critical_value(2000, 0.05) < ks_critical_value(2000, 0.01));
    }
}
