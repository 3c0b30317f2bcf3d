//! Parametric population specifications used by the samplers and the
//! parametric bootstrap.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Open01};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};

use crate::error::{Error, Result};

/// A population distribution. The exponential is parameterized by its mean,
/// so a unit-mean null hypothesis maps onto `Exponential { mean: 1.0 }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Normal { mean: f64, sd: f64 },
    Exponential { mean: f64 },
    Logistic { location: f64, scale: f64 },
}

/// Family tag, used when a distribution is fitted rather than given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    Exponential,
    Logistic,
}

impl DistributionSpec {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if sd <= 0.0 || !mean.is_finite() || !sd.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "normal needs finite mean and sd > 0, got mean={mean}, sd={sd}"
            )));
        }
        Ok(Self::Normal { mean, sd })
    }

    pub fn exponential(mean: f64) -> Result<Self> {
        if mean <= 0.0 || !mean.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "exponential needs mean > 0, got {mean}"
            )));
        }
        Ok(Self::Exponential { mean })
    }

    pub fn logistic(location: f64, scale: f64) -> Result<Self> {
        if scale <= 0.0 || !location.is_finite() || !scale.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "logistic needs finite location and scale > 0, got location={location}, scale={scale}"
            )));
        }
        Ok(Self::Logistic { location, scale })
    }

    pub fn family(&self) -> Family {
        match self {
            Self::Normal { .. } => Family::Normal,
            Self::Exponential { .. } => Family::Exponential,
            Self::Logistic { .. } => Family::Logistic,
        }
    }

    /// Population mean of the distribution.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Normal { mean, .. } => mean,
            Self::Exponential { mean } => mean,
            Self::Logistic { location, .. } => location,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Normal { mean, sd } => Normal::new(mean, sd)
                .expect("validated parameters")
                .sample(rng),
            Self::Exponential { mean } => Exp::new(1.0 / mean)
                .expect("validated parameters")
                .sample(rng),
            Self::Logistic { location, scale } => {
                // Inverse-CDF draw; Open01 keeps the logit finite.
                let u: f64 = rng.sample(Open01);
                location + scale * (u / (1.0 - u)).ln()
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mean, sd } => NormalDist::new(mean, sd)
                .expect("validated parameters")
                .cdf(x),
            Self::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            Self::Logistic { location, scale } => {
                1.0 / (1.0 + (-(x - location) / scale).exp())
            }
        }
    }

    /// Parse `normal(m,s)`, `exponential(m)` or `logistic(l,s)`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match (s.find('('), s.ends_with(')')) {
            (Some(open), true) => (&s[..open], &s[open + 1..s.len() - 1]),
            _ => {
                return Err(Error::Parse(format!(
                    "cannot parse distribution {s:?}; expected e.g. normal(0,1)"
                )))
            }
        };
        let params: Vec<f64> = args
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad numeric parameter {p:?} in {s:?}")))
            })
            .collect::<Result<_>>()?;
        match (name.trim().to_ascii_lowercase().as_str(), params.as_slice()) {
            ("normal" | "n", [m, sd]) => Self::normal(*m, *sd),
            ("exponential" | "exp", [m]) => Self::exponential(*m),
            ("logistic", [l, sc]) => Self::logistic(*l, *sc),
            _ => Err(Error::Parse(format!(
                "unknown distribution or wrong arity: {s:?}"
            ))),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Normal { mean, sd } => format!("normal({mean},{sd})"),
            Self::Exponential { mean } => format!("exponential({mean})"),
            Self::Logistic { location, scale } => format!("logistic({location},{scale})"),
        }
    }
}

impl Family {
    /// Fit for the parametric bootstrap: the mean is estimated by the sample
    /// mean and all other parameters are held at their unit defaults.
    pub fn fit(self, mean: f64) -> Result<DistributionSpec> {
        match self {
            Family::Normal => DistributionSpec::normal(mean, 1.0),
            Family::Logistic => DistributionSpec::logistic(mean, 1.0),
            Family::Exponential => {
                if mean <= 0.0 {
                    Err(Error::NonPositiveMean(mean))
                } else {
                    DistributionSpec::exponential(mean)
                }
            }
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "n" => Ok(Family::Normal),
            "exponential" | "exp" => Ok(Family::Exponential),
            "logistic" => Ok(Family::Logistic),
            _ => Err(Error::Parse(format!("unknown family {s:?}"))),
        }
    }
}
