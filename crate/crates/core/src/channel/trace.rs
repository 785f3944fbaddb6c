//! `QDTRACE v1` text format.
//!
//! ```text
//! QDTRACE v1 <sampling_period_s> <n_samples> <n_links>
//! LINK <tx_id> <rx_id>
//! SAMPLE <k> <n_rays>
//! <delay_s> <gain_db> <phase_rad> <aod_incl_deg> <aod_az_deg> <aoa_incl_deg> <aoa_az_deg> [doppler_hz]
//! ```
//!
//! Each link lists exactly `n_samples` SAMPLE blocks with `k = 0, 1, ...`.
//! Lines starting with `#` and blank lines are ignored. Path gains are
//! isotropic-referenced (no element gains folded in).

use std::fmt::Write as _;
use std::io::BufRead;

use super::Ray;
use crate::error::{Error, Result};
use crate::geometry::Direction;

const MAGIC: &str = "QDTRACE";
const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq)]
pub struct TraceLink {
    pub tx: String,
    pub rx: String,
    /// One ray list per sample instant; empty lists mean total blockage.
    pub samples: Vec<Vec<Ray>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayTraceSet {
    pub sampling_period_s: f64,
    pub n_samples: usize,
    pub links: Vec<TraceLink>,
}

impl RayTraceSet {
    pub fn link(&self, tx: &str, rx: &str) -> Option<&TraceLink> {
        self.links.iter().find(|l| l.tx == tx && l.rx == rx)
    }

    pub fn sample_time(&self, k: usize) -> f64 {
        k as f64 * self.sampling_period_s
    }

    /// Checks the set-level invariants (used for sets built in code).
    pub fn validate(&self) -> Result<()> {
        if !(self.sampling_period_s > 0.0 && self.sampling_period_s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sampling period must be positive, got {}",
                self.sampling_period_s
            )));
        }
        for l in &self.links {
            if l.samples.len() != self.n_samples {
                return Err(Error::InvalidParameter(format!(
                    "link {} -> {} has {} samples, expected {}",
                    l.tx,
                    l.rx,
                    l.samples.len(),
                    self.n_samples
                )));
            }
        }
        Ok(())
    }
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    lineno: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next meaningful line as (line number, tokens).
    fn next_tokens(&mut self) -> Result<Option<(usize, Vec<String>)>> {
        for line in self.inner.by_ref() {
            self.lineno += 1;
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(Some((
                self.lineno,
                t.split_whitespace().map(str::to_owned).collect(),
            )));
        }
        Ok(None)
    }

    fn expect_tokens(&mut self, what: &str) -> Result<(usize, Vec<String>)> {
        self.next_tokens()?.ok_or_else(|| {
            Error::parse(
                self.lineno + 1,
                format!("unexpected end of file, expected {what}"),
            )
        })
    }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{tok}'")))
}

fn finite(tok: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = num(tok, line, what)?;
    if !v.is_finite() {
        return Err(Error::parse(
            line,
            format!("{what} must be finite, got '{tok}'"),
        ));
    }
    Ok(v)
}

fn parse_ray(toks: &[String], line: usize) -> Result<Ray> {
    if toks.len() != 7 && toks.len() != 8 {
        return Err(Error::parse(
            line,
            format!("ray line needs 7 or 8 fields, found {}", toks.len()),
        ));
    }
    let delay = finite(&toks[0], line, "delay")?;
    if delay < 0.0 {
        return Err(Error::parse(line, format!("negative delay {delay}")));
    }
    let aod_t = finite(&toks[3], line, "AoD inclination")?;
    let aoa_t = finite(&toks[5], line, "AoA inclination")?;
    for t in [aod_t, aoa_t] {
        if !(0.0..=180.0).contains(&t) {
            return Err(Error::parse(
                line,
                format!("inclination {t} outside [0, 180]"),
            ));
        }
    }
    Ok(Ray {
        delay_s: delay,
        path_gain_db: finite(&toks[1], line, "path gain")?,
        phase_rad: finite(&toks[2], line, "phase")?,
        aod: Direction::new(aod_t, finite(&toks[4], line, "AoD azimuth")?),
        aoa: Direction::new(aoa_t, finite(&toks[6], line, "AoA azimuth")?),
        doppler_hz: match toks.get(7) {
            Some(t) => Some(finite(t, line, "doppler")?),
            None => None,
        },
    })
}

/// Parses and validates a `QDTRACE v1` stream.
pub fn parse_trace<R: BufRead>(reader: R) -> Result<RayTraceSet> {
    let mut lines = Lines {
        inner: reader.lines(),
        lineno: 0,
    };
    let (line, head) = lines.expect_tokens("QDTRACE header")?;
    if head.len() != 5 || head[0] != MAGIC {
        return Err(Error::parse(
            line,
            "header must be 'QDTRACE v1 <sampling_period_s> <n_samples> <n_links>'",
        ));
    }
    if head[1] != VERSION {
        return Err(Error::parse(
            line,
            format!("unsupported trace version '{}'", head[1]),
        ));
    }
    let period = finite(&head[2], line, "sampling period")?;
    if period <= 0.0 {
        return Err(Error::parse(line, "sampling period must be positive"));
    }
    let n_samples: usize = num(&head[3], line, "sample count")?;
    let n_links: usize = num(&head[4], line, "link count")?;

    let mut links = Vec::with_capacity(n_links);
    let mut pending = lines.next_tokens()?;
    while let Some((line, toks)) = pending.take() {
        if toks[0] != "LINK" {
            return Err(Error::parse(
                line,
                format!("expected LINK, found '{}'", toks[0]),
            ));
        }
        if toks.len() != 3 {
            return Err(Error::parse(
                line,
                "LINK line must be 'LINK <tx_id> <rx_id>'",
            ));
        }
        if links.len() == n_links {
            return Err(Error::parse(
                line,
                format!("more than the declared {n_links} links"),
            ));
        }
        let (tx, rx) = (toks[1].clone(), toks[2].clone());
        if links.iter().any(|l: &TraceLink| l.tx == tx && l.rx == rx) {
            return Err(Error::parse(line, format!("duplicate link {tx} -> {rx}")));
        }
        let mut samples = Vec::with_capacity(n_samples);
        while let Some((line, toks)) = lines.next_tokens()? {
            if toks[0] == "LINK" {
                pending = Some((line, toks));
                break;
            }
            if toks[0] != "SAMPLE" || toks.len() != 3 {
                return Err(Error::parse(line, "expected 'SAMPLE <k> <n_rays>'"));
            }
            let k: usize = num(&toks[1], line, "sample index")?;
            if k != samples.len() {
                return Err(Error::parse(
                    line,
                    format!("sample index {k} out of order, expected {}", samples.len()),
                ));
            }
            if k >= n_samples {
                return Err(Error::parse(
                    line,
                    format!("link {tx} -> {rx} has more than the declared {n_samples} samples"),
                ));
            }
            let n_rays: usize = num(&toks[2], line, "ray count")?;
            let mut rays = Vec::with_capacity(n_rays);
            for _ in 0..n_rays {
                let (line, toks) = lines.expect_tokens("ray line")?;
                if toks[0] == "SAMPLE" || toks[0] == "LINK" {
                    return Err(Error::parse(
                        line,
                        format!("expected {n_rays} rays, block ended early"),
                    ));
                }
                rays.push(parse_ray(&toks, line)?);
            }
            samples.push(rays);
        }
        if samples.len() != n_samples {
            return Err(Error::parse(
                lines.lineno,
                format!(
                    "link {tx} -> {rx} has {} samples, expected {n_samples}",
                    samples.len()
                ),
            ));
        }
        links.push(TraceLink { tx, rx, samples });
    }
    if links.len() != n_links {
        return Err(Error::parse(
            lines.lineno,
            format!("found {} links, header declares {n_links}", links.len()),
        ));
    }
    Ok(RayTraceSet {
        sampling_period_s: period,
        n_samples,
        links,
    })
}

/// Serializes a trace set. Floats use the shortest round-trip form, so
/// `parse_trace(write_trace(s)) == s`.
pub fn write_trace(set: &RayTraceSet) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{MAGIC} {VERSION} {:?} {} {}",
        set.sampling_period_s,
        set.n_samples,
        set.links.len()
    );
    for l in &set.links {
        let _ = writeln!(out, "LINK {} {}", l.tx, l.rx);
        for (k, rays) in l.samples.iter().enumerate() {
            let _ = writeln!(out, "SAMPLE {k} {}", rays.len());
            for r in rays {
                let _ = write!(
                    out,
                    "{:?} {:?} {:?} {:?} {:?} {:?} {:?}",
                    r.delay_s,
                    r.path_gain_db,
                    r.phase_rad,
                    r.aod.theta_deg,
                    r.aod.phi_deg,
                    r.aoa.theta_deg,
                    r.aoa.phi_deg
                );
                if let Some(d) = r.doppler_hz {
                    let _ = write!(out, " {d:?}");
                }
                out.push('\n');
            }
        }
    }
    out
}
