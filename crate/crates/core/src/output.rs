//! CSV emission of per-sample records and empirical CDFs.
//!
//! Every file starts with `#` comment lines carrying the tool version and
//! the configuration checksum. Zero power is written as `-inf`. Files are
//! written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::engine::RunMetadata;
use crate::error::{Error, Result};
use crate::metrics::{BeamLabel, LinkMetricsRecord};

pub const TIMESERIES_HEADER: &str =
    "t_s,snr_db,sinr_db,rx_dbm,interference_dbm,noise_dbm,tx_codeword,rx_codeword";

fn fmt_f64(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:?}")
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    match s {
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid number '{s}'"))),
    }
}

fn header(meta: &RunMetadata, what: &str) -> String {
    format!(
        "# mmwsim {} {what}\n# config_sha256 = {}\n",
        meta.tool_version, meta.config_sha256
    )
}

/// Timeseries CSV text for one association.
pub fn timeseries_csv(records: &[LinkMetricsRecord], meta: &RunMetadata) -> String {
    let mut s = header(meta, "timeseries");
    s.push_str(TIMESERIES_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.timestamp_s),
            fmt_f64(r.snr_db),
            fmt_f64(r.sinr_db),
            fmt_f64(r.rx_power_dbm),
            fmt_f64(r.interference_dbm),
            fmt_f64(r.noise_dbm),
            r.tx_beam,
            r.rx_beam
        );
    }
    s
}

/// Reads timeseries CSV text back into records.
pub fn parse_timeseries(text: &str) -> Result<Vec<LinkMetricsRecord>> {
    let mut out = Vec::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if !seen_header {
            if l != TIMESERIES_HEADER {
                return Err(Error::parse(
                    line,
                    format!("expected header '{TIMESERIES_HEADER}'"),
                ));
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 8 {
            return Err(Error::parse(
                line,
                format!("expected 8 fields, got {}", f.len()),
            ));
        }
        let label = |s: &str| -> Result<BeamLabel> {
            s.parse()
                .map_err(|_| Error::parse(line, format!("invalid beam label '{s}'")))
        };
        out.push(LinkMetricsRecord {
            timestamp_s: parse_f64(f[0], line)?,
            snr_db: parse_f64(f[1], line)?,
            sinr_db: parse_f64(f[2], line)?,
            rx_power_dbm: parse_f64(f[3], line)?,
            interference_dbm: parse_f64(f[4], line)?,
            noise_dbm: parse_f64(f[5], line)?,
            tx_beam: label(f[6])?,
            rx_beam: label(f[7])?,
        });
    }
    if !seen_header {
        return Err(Error::Parse {
            line: 0,
            msg: "missing timeseries header".into(),
        });
    }
    Ok(out)
}

/// Empirical CDF rows `(x_(i), i / n)` over sorted values; NaN is dropped.
pub fn empirical_cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter()
        .enumerate()
        .map(|(i, x)| (x, (i + 1) as f64 / n))
        .collect()
}

pub fn cdf_csv(values: &[f64], column: &str, meta: &RunMetadata) -> String {
    let mut s = header(meta, "cdf");
    let _ = writeln!(s, "{column},cdf");
    for (x, p) in empirical_cdf(values) {
        let _ = writeln!(s, "{},{}", fmt_f64(x), fmt_f64(p));
    }
    s
}

/// Writes `contents` to `path` via a temporary file and rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let res = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(res?)
}

pub fn emit_timeseries(
    records: &[LinkMetricsRecord],
    meta: &RunMetadata,
    path: &Path,
) -> Result<()> {
    write_atomic(path, &timeseries_csv(records, meta))
}

pub fn emit_cdf(values: &[f64], column: &str, meta: &RunMetadata, path: &Path) -> Result<()> {
    write_atomic(path, &cdf_csv(values, column, meta))
}
