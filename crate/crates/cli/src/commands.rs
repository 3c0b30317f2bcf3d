//! Implementations of the five subcommands.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use rss_tilt::dist::{DistributionSpec, Family};
use rss_tilt::error::{Error, Result};
use rss_tilt::io::{
    fmt_g17, read_population_csv, read_urss_csv, write_bootstrap_csv, write_urss_csv,
};
use rss_tilt::montecarlo::{
    plotting_positions, qq_pvalues, run_study, StudyConfig, StudyResult,
};
use rss_tilt::resampling::{bootstrap_ear, bootstrap_eat, parametric_bootstrap, BootstrapBatch};
use rss_tilt::sample::UrssSample;
use rss_tilt::sampling::{draw_finite_population_rss, draw_urss, draw_urss_imperfect};
use rss_tilt::testing::{
    baklizi_test, et_bootstrap_test, liu_el_test, parametric_bootstrap_test, pt_test, wt_test,
    Alternative, EtKind, Method, TestOutcome,
};
use rss_tilt::tilting::{ear_weights, eat_weights, row_et_weights, TiltWeights, WeightLevel};

use crate::resolve::{parse_design, parse_dist, seed_from, FileConfig};
use crate::{BootstrapArgs, SampleArgs, SimulateArgs, TestArgs, WeightsArgs};

fn open_output(path: Option<&str>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn read_sample(path: &str) -> Result<UrssSample> {
    read_urss_csv(BufReader::new(File::open(path)?))
}

fn meta_line(out: &mut dyn Write, key: &str, value: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "# {key}={value}")?;
    Ok(())
}

/// Quote a CSV field when it contains a comma.
fn csv_field(s: &str) -> String {
    if s.contains(',') {
        format!("\"{s}\"")
    } else {
        s.to_string()
    }
}

pub fn sample(args: SampleArgs) -> Result<()> {
    let config = FileConfig::load(args.io.config.as_deref())?;
    let design = parse_design(
        args.design
            .as_deref()
            .or(config.design.as_deref())
            .unwrap_or("D1"),
    )?;
    let sigma_eps = args.sigma_eps.or(config.sigma_eps).unwrap_or(0.0);
    let seed = seed_from(args.io.seed, args.io.stream, &config);
    let population = args.population.as_deref().or(config.population.as_deref());

    let mut meta: Vec<(String, String)> = vec![("command".into(), "sample".into())];
    let sample = match population {
        Some(path) => {
            let records = read_population_csv(BufReader::new(File::open(path)?))?;
            meta.push(("population".into(), path.to_string()));
            meta.push(("records".into(), records.len().to_string()));
            draw_finite_population_rss(&records, &design, seed)?
        }
        None => {
            let dist = parse_dist(
                args.dist
                    .as_deref()
                    .or(config.dist.as_deref())
                    .unwrap_or("normal(0,1)"),
            )?;
            meta.push(("dist".into(), dist.label()));
            meta.push(("sigma_eps".into(), sigma_eps.to_string()));
            if sigma_eps > 0.0 {
                draw_urss_imperfect(&dist, &design, sigma_eps, seed)?
            } else {
                draw_urss(&dist, &design, seed)
            }
        }
    };
    meta.push(("design".into(), design.to_string()));
    meta.push(("seed".into(), seed.seed.to_string()));
    meta.push(("stream".into(), seed.stream_id.to_string()));

    let mut out = open_output(args.io.output.as_deref())?;
    write_urss_csv(&mut out, &sample, &meta)?;
    out.flush()?;
    Ok(())
}

pub fn weights(args: WeightsArgs) -> Result<()> {
    let config = FileConfig::load(args.io.config.as_deref())?;
    let sample = read_sample(&args.input)?;
    let level = args
        .level
        .as_deref()
        .or(config.level.as_deref())
        .unwrap_or("eat")
        .to_ascii_lowercase();
    let row = args.row.or(config.row);
    let target_flag = args.target.or(config.target);

    // (per-observation masses, constrained target default, solved weights)
    let (masses, weights): (Vec<(usize, usize, f64, f64)>, TiltWeights) = match level.as_str() {
        "eat" => {
            let target = target_flag.unwrap_or_else(|| sample.grand_mean());
            let w = eat_weights(&sample, target)?;
            let mut rows = Vec::new();
            let mut idx = 0;
            for (r, row_vals) in sample.rows().iter().enumerate() {
                for (j, &v) in row_vals.iter().enumerate() {
                    rows.push((r + 1, j + 1, v, w.weights()[idx]));
                    idx += 1;
                }
            }
            (rows, w)
        }
        "ear" => {
            let target = target_flag.unwrap_or_else(|| sample.grand_mean());
            let w = ear_weights(&sample, target)?;
            let mut rows = Vec::new();
            for (r, row_vals) in sample.rows().iter().enumerate() {
                let mass = w.weights()[r] / row_vals.len() as f64;
                for (j, &v) in row_vals.iter().enumerate() {
                    rows.push((r + 1, j + 1, v, mass));
                }
            }
            (rows, w)
        }
        "row" => {
            let r = row.ok_or_else(|| {
                Error::InvalidConfig("--row is required with --level row".into())
            })?;
            if r == 0 || r > sample.set_size() {
                return Err(Error::InvalidConfig(format!(
                    "row {r} outside 1..={}",
                    sample.set_size()
                )));
            }
            let target = target_flag.unwrap_or_else(|| sample.row_mean(r - 1));
            let w = row_et_weights(&sample, r - 1, target)?;
            let rows = sample
                .row(r - 1)
                .iter()
                .enumerate()
                .map(|(j, &v)| (r, j + 1, v, w.weights()[j]))
                .collect();
            (rows, w)
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown level {other:?} (eat, ear, row)"
            )))
        }
    };

    let mut out = open_output(args.io.output.as_deref())?;
    meta_line(&mut out, "command", "weights")?;
    meta_line(&mut out, "input", &args.input)?;
    meta_line(&mut out, "level", &level)?;
    if let Some(r) = row {
        meta_line(&mut out, "row", r)?;
    }
    meta_line(&mut out, "target", fmt_g17(weights.target()))?;
    meta_line(
        &mut out,
        "weight_level",
        match weights.level() {
            WeightLevel::PerObservation => "per-observation",
            WeightLevel::PerRow => "per-row",
        },
    )?;
    writeln!(out, "rank,index,value,weight")?;
    let mut achieved = 0.0;
    for (rank, index, value, weight) in &masses {
        achieved += weight * value;
        writeln!(out, "{rank},{index},{},{}", fmt_g17(*value), fmt_g17(*weight))?;
    }
    meta_line(&mut out, "lambda", fmt_g17(weights.lambda()))?;
    meta_line(&mut out, "tilted_mean", fmt_g17(achieved))?;
    out.flush()?;
    Ok(())
}

pub fn bootstrap(args: BootstrapArgs) -> Result<()> {
    let config = FileConfig::load(args.io.config.as_deref())?;
    let sample = read_sample(&args.input)?;
    let method = match (args.method, config.method.as_deref()) {
        (Some(m), _) => m,
        (None, Some(s)) => Method::parse(s)?,
        (None, None) => Method::Eat,
    };
    let b = args.b.or(config.b).unwrap_or(500);
    let seed = seed_from(args.io.seed, args.io.stream, &config);
    let family = args
        .family
        .map(Ok)
        .or_else(|| config.family.as_deref().map(Family::parse))
        .transpose()?
        .unwrap_or(Family::Normal);

    let mut meta: Vec<(String, String)> = vec![
        ("command".into(), "bootstrap".into()),
        ("input".into(), args.input.clone()),
        ("method".into(), method.label().into()),
        ("B".into(), b.to_string()),
        ("seed".into(), seed.seed.to_string()),
        ("stream".into(), seed.stream_id.to_string()),
    ];

    let batch: BootstrapBatch = match method {
        Method::Eat => {
            let mu0 = args.mu0.or(config.mu0).unwrap_or_else(|| sample.grand_mean());
            meta.push(("mu0".into(), fmt_g17(mu0)));
            let w = eat_weights(&sample, mu0)?;
            bootstrap_eat(&sample, &w, b, seed)?
        }
        Method::Ear => {
            let mu0 = args.mu0.or(config.mu0).unwrap_or_else(|| sample.grand_mean());
            meta.push(("mu0".into(), fmt_g17(mu0)));
            let w = ear_weights(&sample, mu0)?;
            bootstrap_ear(&sample, &w, b, seed)?
        }
        Method::Pb => {
            meta.push((
                "family".into(),
                format!("{:?}", family).to_ascii_lowercase(),
            ));
            parametric_bootstrap(&sample, family, b, seed)?
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "bootstrap method must be eat, ear or pb, got {}",
                other.label()
            )))
        }
    };

    let mut out = open_output(args.io.output.as_deref())?;
    write_bootstrap_csv(&mut out, batch.resamples(), &meta)?;
    out.flush()?;
    Ok(())
}

pub fn test(args: TestArgs) -> Result<()> {
    let config = FileConfig::load(args.io.config.as_deref())?;
    let sample = read_sample(&args.input)?;
    let method = match (args.method, config.method.as_deref()) {
        (Some(m), _) => m,
        (None, Some(s)) => Method::parse(s)?,
        (None, None) => Method::Pt,
    };
    let mu0 = args
        .mu0
        .or(config.mu0)
        .ok_or_else(|| Error::InvalidConfig("--mu0 is required".into()))?;
    let b = args.b.or(config.b).unwrap_or(500);
    let seed = seed_from(args.io.seed, args.io.stream, &config);
    let alternative = match (args.alternative, config.alternative.as_deref()) {
        (Some(a), _) => a,
        (None, Some("two-sided")) | (None, Some("two_sided")) => Alternative::TwoSided,
        _ => Alternative::Greater,
    };
    let family = args
        .family
        .map(Ok)
        .or_else(|| config.family.as_deref().map(Family::parse))
        .transpose()?
        .unwrap_or(Family::Normal);

    let outcome: TestOutcome = match method {
        Method::Pt => pt_test(&sample, mu0, alternative)?,
        Method::Wt => wt_test(&sample, mu0, alternative)?,
        Method::Eat | Method::Ieat => et_bootstrap_test(&sample, mu0, EtKind::Eat, b, seed, alternative)?,
        Method::Ear | Method::Iear => et_bootstrap_test(&sample, mu0, EtKind::Ear, b, seed, alternative)?,
        Method::Pb => parametric_bootstrap_test(&sample, mu0, family, b, seed, alternative)?,
        Method::Baklizi => baklizi_test(&sample, mu0)?,
        Method::Liu => liu_el_test(&sample, mu0)?,
    };

    let mut out = open_output(args.io.output.as_deref())?;
    meta_line(&mut out, "command", "test")?;
    meta_line(&mut out, "input", &args.input)?;
    meta_line(&mut out, "mu0", fmt_g17(mu0))?;
    meta_line(
        &mut out,
        "alternative",
        match alternative {
            Alternative::Greater => "greater",
            Alternative::TwoSided => "two-sided",
        },
    )?;
    if outcome.hull_violation {
        meta_line(&mut out, "hull_violation", "true")?;
    }
    writeln!(out, "method,statistic,df,p_value,B,seed")?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        outcome.method.label(),
        fmt_g17(outcome.statistic),
        outcome.df.map(fmt_g17).unwrap_or_default(),
        fmt_g17(outcome.p_value),
        outcome.b.map(|b| b.to_string()).unwrap_or_default(),
        outcome
            .seed
            .map(|s| format!("{}:{}", s.seed, s.stream_id))
            .unwrap_or_default(),
    )?;
    out.flush()?;
    Ok(())
}

fn study_rows(out: &mut dyn Write, result: &StudyResult) -> Result<()> {
    let c = &result.config;
    for m in &result.methods {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}:{}",
            csv_field(&c.dist.label()),
            csv_field(&c.design.to_string()),
            c.sigma_eps,
            c.delta,
            m.method.label(),
            fmt_g17(m.rate()),
            m.standard_error().map(fmt_g17).unwrap_or_default(),
            m.failures,
            c.replications,
            c.b,
            c.seed.seed,
            c.seed.stream_id,
        )?;
    }
    Ok(())
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let config = FileConfig::load(args.io.config.as_deref())?;
    let dist = parse_dist(
        args.dist
            .as_deref()
            .or(config.dist.as_deref())
            .unwrap_or("normal(0,1)"),
    )?;
    let design = parse_design(
        args.design
            .as_deref()
            .or(config.design.as_deref())
            .unwrap_or("D1"),
    )?;
    let methods = match (args.methods, config.methods.as_deref()) {
        (Some(m), _) => m,
        (None, Some(s)) => s
            .split(',')
            .map(Method::parse)
            .collect::<Result<Vec<_>>>()?,
        (None, None) => vec![Method::Pt, Method::Wt, Method::Eat, Method::Ear, Method::Pb],
    };
    let study = StudyConfig {
        design,
        dist,
        mu0: args.mu0.or(config.mu0).unwrap_or(0.0),
        delta: args.delta.or(config.delta).unwrap_or(0.0),
        sigma_eps: args.sigma_eps.or(config.sigma_eps).unwrap_or(0.0),
        methods,
        b: args.b.or(config.b).unwrap_or(500),
        replications: args.replications.or(config.replications).unwrap_or(2000),
        alpha: args.alpha.or(config.alpha).unwrap_or(0.05),
        seed: seed_from(args.io.seed, args.io.stream, &config),
    };
    let threads = args.threads.or(config.threads);

    let run = || -> Result<()> {
        let mut out = open_output(args.io.output.as_deref())?;
        meta_line(&mut out, "command", "simulate")?;
        meta_line(&mut out, "dist", study.dist.label())?;
        meta_line(&mut out, "design", study.design.to_string())?;
        meta_line(&mut out, "mu0", study.mu0)?;
        meta_line(&mut out, "delta", study.delta)?;
        meta_line(&mut out, "sigma_eps", study.sigma_eps)?;
        meta_line(
            &mut out,
            "methods",
            study
                .methods
                .iter()
                .map(|m| m.label())
                .collect::<Vec<_>>()
                .join("+"),
        )?;
        meta_line(&mut out, "B", study.b)?;
        meta_line(&mut out, "replications", study.replications)?;
        meta_line(&mut out, "alpha", study.alpha)?;
        meta_line(&mut out, "seed", study.seed.seed)?;
        meta_line(&mut out, "stream", study.seed.stream_id)?;

        if let Some(method) = args.qq_method {
            meta_line(&mut out, "qq_method", method.label())?;
            let p = qq_pvalues(&study, method)?;
            writeln!(out, "position,p_value")?;
            for (pos, pv) in plotting_positions(p.len()).into_iter().zip(&p) {
                writeln!(out, "{},{}", fmt_g17(pos), fmt_g17(*pv))?;
            }
            out.flush()?;
            return Ok(());
        }

        writeln!(
            out,
            "distribution,design,sigma_eps,delta,method,rate,se,failures,R,B,seed"
        )?;
        if args.paper_tables {
            for result in paper_table_grid(&study)? {
                study_rows(&mut out, &result)?;
            }
        } else {
            study_rows(&mut out, &run_study(&study)?)?;
        }
        out.flush()?;
        Ok(())
    };

    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// The full simulation grid: sizes and shift powers under perfect ranking
/// for all five designs and three populations, then the imperfect-ranking
/// sizes and the noisy power block.
fn paper_table_grid(base: &StudyConfig) -> Result<Vec<StudyResult>> {
    use rss_tilt::montecarlo::paper_design;
    let populations = [
        (DistributionSpec::normal(0.0, 1.0)?, 0.0),
        (DistributionSpec::exponential(1.0)?, 1.0),
        (DistributionSpec::logistic(1.0, 1.0)?, 1.0),
    ];
    let designs = ["D1", "D2", "D3", "D4", "D5"];
    let standard = vec![Method::Pt, Method::Wt, Method::Eat, Method::Ear, Method::Pb];
    let imperfect = vec![Method::Pt, Method::Eat, Method::Ear, Method::Ieat, Method::Iear];

    let mut cells: Vec<StudyConfig> = Vec::new();
    for (dist, mu0) in &populations {
        for name in designs {
            let design = paper_design(name).expect("static name");
            let mut cell = |delta: f64, sigma: f64, methods: &Vec<Method>| {
                let mut c = base.clone();
                c.dist = *dist;
                c.mu0 = *mu0;
                c.design = design.clone();
                c.delta = delta;
                c.sigma_eps = sigma;
                c.methods = methods.clone();
                cells.push(c);
            };
            cell(0.0, 0.0, &standard);
            for delta in [0.1, 0.2, 0.3] {
                cell(delta, 0.0, &standard);
            }
            for sigma in [0.5, 1.0] {
                cell(0.0, sigma, &imperfect);
            }
            for delta in [0.1, 0.2, 0.3] {
                cell(delta, 0.5, &imperfect);
            }
        }
    }
    cells
        .into_iter()
        .enumerate()
        .map(|(i, mut c)| {
            c.seed = base.seed.child(i as u64);
            run_study(&c)
        })
        .collect()
}
