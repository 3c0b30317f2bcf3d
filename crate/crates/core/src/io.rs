//! CSV ingestion and emission for ranked set samples and finite populations.
//!
//! Files are plain UTF-8 CSV. Lines starting with `#` are metadata comments
//! and are skipped on read. Sample files carry a `rank,value` header with
//! 1-based ranks; the design is inferred from the rank counts. Values are
//! printed with 17 significant digits so they round-trip bit-exactly.

use std::io::{BufRead, Write};

use crate::design::Design;
use crate::error::{Error, Result};
use crate::sample::UrssSample;

/// Format a float with 17 significant digits (bit-exact round trip).
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

fn data_lines(reader: impl BufRead) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(Error::from)?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push(trimmed.to_string());
    }
    Ok(lines)
}

/// Read a `rank,value` CSV into a sample. Ranks must cover `1..=k` for some
/// `k >= 2`; within-rank row order follows file order.
pub fn read_urss_csv(reader: impl BufRead) -> Result<UrssSample> {
    let lines = data_lines(reader)?;
    let mut iter = lines.iter();
    match iter.next() {
        Some(header) if header == "rank,value" => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header 'rank,value', found {other:?}"
            )))
        }
    }
    let mut records: Vec<(usize, f64)> = Vec::new();
    let mut max_rank = 0usize;
    for line in iter {
        let (rank_s, value_s) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("malformed line {line:?}")))?;
        let rank: usize = rank_s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rank {rank_s:?}")))?;
        let value: f64 = value_s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad value {value_s:?}")))?;
        if rank == 0 {
            return Err(Error::Parse("ranks are 1-based".into()));
        }
        max_rank = max_rank.max(rank);
        records.push((rank, value));
    }
    if max_rank < 2 {
        return Err(Error::InvalidDesign(format!(
            "need at least 2 ranks, saw max rank {max_rank}"
        )));
    }
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); max_rank];
    for (rank, value) in records {
        rows[rank - 1].push(value);
    }
    if let Some(r) = rows.iter().position(Vec::is_empty) {
        return Err(Error::InvalidDesign(format!(
            "rank {} has no observations",
            r + 1
        )));
    }
    UrssSample::new(rows)
}

/// Write a sample as `rank,value` CSV preceded by `# key=value` metadata.
pub fn write_urss_csv(
    mut writer: impl Write,
    sample: &UrssSample,
    metadata: &[(String, String)],
) -> Result<()> {
    for (key, value) in metadata {
        writeln!(writer, "# {key}={value}")?;
    }
    writeln!(writer, "rank,value")?;
    for (r, row) in sample.rows().iter().enumerate() {
        for &v in row {
            writeln!(writer, "{},{}", r + 1, fmt_g17(v))?;
        }
    }
    Ok(())
}

/// Read a `y,concomitant` CSV into finite-population records.
pub fn read_population_csv(reader: impl BufRead) -> Result<Vec<(f64, f64)>> {
    let lines = data_lines(reader)?;
    let mut iter = lines.iter();
    match iter.next() {
        Some(header) if header == "y,concomitant" => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header 'y,concomitant', found {other:?}"
            )))
        }
    }
    let mut records = Vec::new();
    for line in iter {
        let (y_s, c_s) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("malformed line {line:?}")))?;
        let y: f64 = y_s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad value {y_s:?}")))?;
        let c: f64 = c_s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad concomitant {c_s:?}")))?;
        records.push((y, c));
    }
    if records.is_empty() {
        return Err(Error::Parse("population file has no records".into()));
    }
    Ok(records)
}

/// Write a batch of resamples as `rank,value,resample_id` CSV.
pub fn write_bootstrap_csv<'a>(
    mut writer: impl Write,
    resamples: impl IntoIterator<Item = &'a UrssSample>,
    metadata: &[(String, String)],
) -> Result<()> {
    for (key, value) in metadata {
        writeln!(writer, "# {key}={value}")?;
    }
    writeln!(writer, "rank,value,resample_id")?;
    for (id, sample) in resamples.into_iter().enumerate() {
        for (r, row) in sample.rows().iter().enumerate() {
            for &v in row {
                writeln!(writer, "{},{},{id}", r + 1, fmt_g17(v))?;
            }
        }
    }
    Ok(())
}

/// Design inferred from a `rank,value` CSV without keeping the data.
pub fn design_of(sample: &UrssSample) -> &Design {
    sample.design()
}
