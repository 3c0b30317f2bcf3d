//! Resolution of run parameters: flag values override JSON config values,
//! which override built-in defaults.

use serde::Deserialize;

use rss_tilt::design::Design;
use rss_tilt::dist::DistributionSpec;
use rss_tilt::error::{Error, Result};
use rss_tilt::montecarlo::paper_design;
use rss_tilt::rng::RngSeed;

/// Optional values a JSON config file may provide. Keys mirror the long flag
/// names of the subcommands; unknown keys are rejected to catch typos.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dist: Option<String>,
    pub design: Option<String>,
    pub sigma_eps: Option<f64>,
    pub population: Option<String>,
    pub level: Option<String>,
    pub row: Option<usize>,
    pub target: Option<f64>,
    pub method: Option<String>,
    pub methods: Option<String>,
    pub mu0: Option<f64>,
    pub b: Option<usize>,
    pub replications: Option<usize>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub alternative: Option<String>,
    pub family: Option<String>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&str>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Parse(format!("config {path}: {e}")))
            }
        }
    }
}

/// Parse a design given as `D1`..`D6` or a comma list of counts.
pub fn parse_design(s: &str) -> Result<Design> {
    if let Some(d) = paper_design(s) {
        return Ok(d);
    }
    let counts: Vec<usize> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad design component {p:?} in {s:?}")))
        })
        .collect::<Result<_>>()?;
    Design::new(counts)
}

pub fn parse_dist(s: &str) -> Result<DistributionSpec> {
    DistributionSpec::parse(s)
}

pub fn seed_from(seed: Option<u64>, stream: Option<u64>, config: &FileConfig) -> RngSeed {
    RngSeed::new(
        seed.or(config.seed).unwrap_or(0),
        stream.or(config.stream).unwrap_or(0),
    )
}
