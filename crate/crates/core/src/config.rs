//! Flat `key = value` scenario files.
//!
//! ```text
//! # comment
//! duration_s = 40
//! trace = two_cell.qd
//! bf_scheme = codebook
//! codebook_period_s = 0.1
//! node.BS1.role = bs
//! node.BS1.array_rows = 8
//! node.BS1.array_cols = 8
//! node.BS1.position_m = 0, 0, 3
//! link.BS1 = UT1
//! ```
//!
//! Unknown keys are rejected. [`dump_config`] writes every field, so a
//! dumped configuration parses back to an identical value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::array::ArrayConfig;
use crate::element::ElementPattern;
use crate::engine::{
    Association, BfScheme, CodebookSource, Node, NodeRole, ScenarioConfig, Traffic,
};
use crate::error::{Error, Result};
use crate::geometry::Orientation;

const GLOBAL_KEYS: &[&str] = &[
    "duration_s",
    "sampling_period_s",
    "carrier_hz",
    "bandwidth_hz",
    "n_bins",
    "tx_power_dbm",
    "noise_figure_db",
    "noise_density_dbm_hz",
    "bf_scheme",
    "codebook_period_s",
    "trace",
    "efficiency",
    "traffic.packet_size_bytes",
    "traffic.inter_packet_interval_s",
];

const NODE_KEYS: &[&str] = &[
    "role",
    "array_rows",
    "array_cols",
    "spacing_v_lambda",
    "spacing_h_lambda",
    "bearing_deg",
    "downtilt_deg",
    "position_m",
    "element_type",
    "beamwidth_h_deg",
    "beamwidth_v_deg",
    "codebook",
];

struct Entry {
    value: String,
    line: usize,
}

fn num<T: std::str::FromStr>(e: &Entry, key: &str) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| Error::parse(e.line, format!("invalid value '{}' for '{key}'", e.value)))
}

/// Parses configuration text. Relative paths are kept as written.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut global: BTreeMap<String, Entry> = BTreeMap::new();
    let mut nodes: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
    let mut node_order: Vec<String> = Vec::new();
    let mut links: Vec<(String, Entry)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| {
            Error::parse(line, format!("expected 'key = value', got '{content}'"))
        })?;
        let (k, v) = (k.trim(), v.trim().to_string());
        if k.is_empty() || v.is_empty() {
            return Err(Error::parse(
                line,
                format!("empty key or value in '{content}'"),
            ));
        }
        let entry = Entry { value: v, line };
        if let Some(rest) = k.strip_prefix("node.") {
            let (id, field) = rest
                .rsplit_once('.')
                .ok_or_else(|| Error::Config(format!("line {line}: malformed node key '{k}'")))?;
            if id.is_empty() {
                return Err(Error::Config(format!(
                    "line {line}: empty node id in '{k}'"
                )));
            }
            if !NODE_KEYS.contains(&field) {
                return Err(Error::Config(format!(
                    "line {line}: unknown key '{field}' for node '{id}'"
                )));
            }
            if !nodes.contains_key(id) {
                node_order.push(id.to_string());
            }
            let fields = nodes.entry(id.to_string()).or_default();
            if fields.insert(field.to_string(), entry).is_some() {
                return Err(Error::Config(format!("line {line}: duplicate key '{k}'")));
            }
        } else if let Some(bs) = k.strip_prefix("link.") {
            if links.iter().any(|(b, _)| b == bs) {
                return Err(Error::Config(format!("line {line}: duplicate key '{k}'")));
            }
            links.push((bs.to_string(), entry));
        } else if GLOBAL_KEYS.contains(&k) {
            if global.insert(k.to_string(), entry).is_some() {
                return Err(Error::Config(format!("line {line}: duplicate key '{k}'")));
            }
        } else {
            return Err(Error::Config(format!("line {line}: unknown key '{k}'")));
        }
    }

    let mut cfg = ScenarioConfig::default();
    let g = |k: &str| global.get(k);
    match g("duration_s") {
        Some(e) => cfg.duration_s = num(e, "duration_s")?,
        None => return Err(Error::Config("missing required key 'duration_s'".into())),
    }
    match g("trace") {
        Some(e) => cfg.trace_path = PathBuf::from(&e.value),
        None => return Err(Error::Config("missing required key 'trace'".into())),
    }
    if let Some(e) = g("sampling_period_s") {
        cfg.sampling_period_s = num(e, "sampling_period_s")?;
    }
    if let Some(e) = g("carrier_hz") {
        cfg.carrier_hz = num(e, "carrier_hz")?;
    }
    if let Some(e) = g("bandwidth_hz") {
        cfg.budget.bandwidth_hz = num(e, "bandwidth_hz")?;
    }
    if let Some(e) = g("n_bins") {
        cfg.n_bins = num(e, "n_bins")?;
    }
    if let Some(e) = g("tx_power_dbm") {
        cfg.budget.tx_power_dbm = num(e, "tx_power_dbm")?;
    }
    if let Some(e) = g("noise_figure_db") {
        cfg.budget.noise_figure_db = num(e, "noise_figure_db")?;
    }
    if let Some(e) = g("noise_density_dbm_hz") {
        cfg.budget.noise_density_dbm_hz = num(e, "noise_density_dbm_hz")?;
    }
    if let Some(e) = g("efficiency") {
        cfg.efficiency = num(e, "efficiency")?;
    }
    if let Some(e) = g("traffic.packet_size_bytes") {
        cfg.traffic.packet_size_bytes = num(e, "traffic.packet_size_bytes")?;
    }
    if let Some(e) = g("traffic.inter_packet_interval_s") {
        cfg.traffic.inter_packet_interval_s = num(e, "traffic.inter_packet_interval_s")?;
    }
    let scheme = g("bf_scheme")
        .map(|e| e.value.as_str())
        .unwrap_or("codebook");
    cfg.bf_scheme = match scheme {
        "svd" => {
            if let Some(e) = g("codebook_period_s") {
                return Err(Error::Config(format!(
                    "line {}: codebook_period_s given with bf_scheme = svd",
                    e.line
                )));
            }
            BfScheme::Svd
        }
        "codebook" => BfScheme::Codebook {
            period_s: match g("codebook_period_s") {
                Some(e) => num(e, "codebook_period_s")?,
                None => {
                    return Err(Error::Config(
                        "bf_scheme = codebook needs 'codebook_period_s'".into(),
                    ))
                }
            },
        },
        other => return Err(Error::Config(format!("unknown bf_scheme '{other}'"))),
    };

    for id in node_order {
        cfg.nodes.push(parse_node(&id, &nodes[&id])?);
    }
    for (bs, e) in links {
        cfg.associations.push(Association { bs, ut: e.value });
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_node(id: &str, f: &BTreeMap<String, Entry>) -> Result<Node> {
    let req = |k: &str| {
        f.get(k)
            .ok_or_else(|| Error::Config(format!("node '{id}' is missing '{k}'")))
    };
    let opt_num =
        |k: &str, default: f64| -> Result<f64> { f.get(k).map_or(Ok(default), |e| num(e, k)) };
    let role = match req("role")?.value.as_str() {
        "bs" => NodeRole::Bs,
        "ut" => NodeRole::Ut,
        other => {
            return Err(Error::Config(format!(
                "node '{id}': unknown role '{other}'"
            )))
        }
    };
    let rows: usize = num(req("array_rows")?, "array_rows")?;
    let cols: usize = num(req("array_cols")?, "array_cols")?;
    let position = match f.get("position_m") {
        None => [0.0; 3],
        Some(e) => {
            let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::parse(
                    e.line,
                    format!(
                        "position_m needs 3 comma-separated values, got '{}'",
                        e.value
                    ),
                ));
            }
            let mut p = [0.0; 3];
            for (dst, s) in p.iter_mut().zip(parts) {
                *dst = s
                    .parse()
                    .map_err(|_| Error::parse(e.line, format!("invalid coordinate '{s}'")))?;
            }
            p
        }
    };
    let element = match f
        .get("element_type")
        .map(|e| e.value.as_str())
        .unwrap_or("isotropic")
    {
        "isotropic" => ElementPattern::Isotropic,
        "3gpp" => ElementPattern::three_gpp(),
        "cosine" => ElementPattern::cosine(
            opt_num("beamwidth_h_deg", 120.0)?,
            opt_num("beamwidth_v_deg", 120.0)?,
        )
        .map_err(|e| Error::Config(format!("node '{id}': {e}")))?,
        other => {
            return Err(Error::Config(format!(
                "node '{id}': unknown element_type '{other}'"
            )))
        }
    };
    if !matches!(element, ElementPattern::Cosine { .. })
        && (f.contains_key("beamwidth_h_deg") || f.contains_key("beamwidth_v_deg"))
    {
        return Err(Error::Config(format!(
            "node '{id}': beamwidths apply to cosine elements only"
        )));
    }
    let array = ArrayConfig::new(rows, cols)
        .and_then(|a| {
            a.with_spacing(
                opt_num("spacing_v_lambda", 0.5)?,
                opt_num("spacing_h_lambda", 0.5)?,
            )
        })
        .map_err(|e| match e {
            Error::Parse { .. } => e,
            other => Error::Config(format!("node '{id}': {other}")),
        })?
        .with_element(element)
        .with_orientation(Orientation {
            bearing_deg: opt_num("bearing_deg", 0.0)?,
            downtilt_deg: opt_num("downtilt_deg", 0.0)?,
        })
        .with_position(position);
    let codebook = match f
        .get("codebook")
        .map(|e| e.value.as_str())
        .unwrap_or("generated")
    {
        "generated" => CodebookSource::Generated,
        path => CodebookSource::File(PathBuf::from(path)),
    };
    Ok(Node {
        id: id.to_string(),
        role,
        array,
        codebook,
    })
}

/// Reads a configuration file; relative trace and codebook paths are
/// resolved against the file's directory.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    let base = std::path::absolute(path)?
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    cfg.trace_path = base.join(&cfg.trace_path);
    for n in &mut cfg.nodes {
        if let CodebookSource::File(p) = &n.codebook {
            n.codebook = CodebookSource::File(base.join(p));
        }
    }
    Ok(cfg)
}

/// Canonical text form of a configuration.
pub fn dump_config(cfg: &ScenarioConfig) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("duration_s", format!("{:?}", cfg.duration_s));
    kv("sampling_period_s", format!("{:?}", cfg.sampling_period_s));
    kv("carrier_hz", format!("{:?}", cfg.carrier_hz));
    kv("bandwidth_hz", format!("{:?}", cfg.budget.bandwidth_hz));
    kv("n_bins", cfg.n_bins.to_string());
    kv("tx_power_dbm", format!("{:?}", cfg.budget.tx_power_dbm));
    kv(
        "noise_figure_db",
        format!("{:?}", cfg.budget.noise_figure_db),
    );
    kv(
        "noise_density_dbm_hz",
        format!("{:?}", cfg.budget.noise_density_dbm_hz),
    );
    match cfg.bf_scheme {
        BfScheme::Svd => kv("bf_scheme", "svd".into()),
        BfScheme::Codebook { period_s } => {
            kv("bf_scheme", "codebook".into());
            kv("codebook_period_s", format!("{period_s:?}"));
        }
    }
    kv("trace", cfg.trace_path.display().to_string());
    kv("efficiency", format!("{:?}", cfg.efficiency));
    let Traffic {
        packet_size_bytes,
        inter_packet_interval_s,
    } = cfg.traffic;
    kv("traffic.packet_size_bytes", packet_size_bytes.to_string());
    kv(
        "traffic.inter_packet_interval_s",
        format!("{inter_packet_interval_s:?}"),
    );
    for n in &cfg.nodes {
        let p = |f: &str| format!("node.{}.{f}", n.id);
        let a = &n.array;
        kv(
            &p("role"),
            match n.role {
                NodeRole::Bs => "bs",
                NodeRole::Ut => "ut",
            }
            .into(),
        );
        kv(&p("array_rows"), a.rows.to_string());
        kv(&p("array_cols"), a.cols.to_string());
        kv(&p("spacing_v_lambda"), format!("{:?}", a.spacing_v));
        kv(&p("spacing_h_lambda"), format!("{:?}", a.spacing_h));
        kv(
            &p("bearing_deg"),
            format!("{:?}", a.orientation.bearing_deg),
        );
        kv(
            &p("downtilt_deg"),
            format!("{:?}", a.orientation.downtilt_deg),
        );
        kv(
            &p("position_m"),
            format!(
                "{:?}, {:?}, {:?}",
                a.position[0], a.position[1], a.position[2]
            ),
        );
        match a.element {
            ElementPattern::Isotropic => kv(&p("element_type"), "isotropic".into()),
            ElementPattern::ThreeGpp { .. } => kv(&p("element_type"), "3gpp".into()),
            ElementPattern::Cosine {
                beamwidth_h_deg,
                beamwidth_v_deg,
                ..
            } => {
                kv(&p("element_type"), "cosine".into());
                kv(&p("beamwidth_h_deg"), format!("{beamwidth_h_deg:?}"));
                kv(&p("beamwidth_v_deg"), format!("{beamwidth_v_deg:?}"));
            }
        }
        match &n.codebook {
            CodebookSource::Generated => kv(&p("codebook"), "generated".into()),
            CodebookSource::File(f) => kv(&p("codebook"), f.display().to_string()),
        }
    }
    for a in &cfg.associations {
        kv(&format!("link.{}", a.bs), a.ut.clone());
    }
    s
}

/// SHA-256 of the canonical dump, lowercase hex.
pub fn config_checksum(cfg: &ScenarioConfig) -> String {
    let digest = Sha256::digest(dump_config(cfg).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
