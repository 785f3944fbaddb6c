//! Time-stepped scenario execution.
//!
//! The simulator tick is the channel sampling period. At every tick the
//! channels of all configured links are rebuilt from the trace, beams are
//! updated according to the scheme, and one [`LinkMetricsRecord`] is
//! emitted per association (downlink only).
//!
//! Codebook searches evaluate SINR against the interferers' beams as they
//! were before the current update instant; all associations then switch to
//! their new beams together. An interferer that has never been assigned a
//! beam is treated as silent during the search.

use std::collections::HashMap;
use std::path::PathBuf;

use num_complex::Complex64;

use crate::array::{ArrayConfig, BeamformingVector, BfOrigin};
use crate::beamforming::{self, argmax_pair, svd_beamforming, Codebook};
use crate::channel::{frequency_grid, MimoChannel, RayChannel, RayTraceSet};
use crate::error::{Error, Result};
use crate::metrics::{
    beamformed_rx_power, noise_power_dbm, sinr_db, BeamLabel, LinkBudgetParams, LinkMetricsRecord,
};

pub const DEFAULT_CARRIER_HZ: f64 = 28e9;
pub const DEFAULT_SAMPLING_PERIOD_S: f64 = 0.005;
pub const DEFAULT_N_BINS: usize = 64;
pub const DEFAULT_EFFICIENCY: f64 = 0.6;
pub const DEFAULT_PACKET_SIZE_BYTES: u32 = 1490;
pub const DEFAULT_INTER_PACKET_INTERVAL_S: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Bs,
    Ut,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CodebookSource {
    Generated,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub role: NodeRole,
    pub array: ArrayConfig,
    pub codebook: CodebookSource,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BfScheme {
    Svd,
    Codebook { period_s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traffic {
    pub packet_size_bytes: u32,
    pub inter_packet_interval_s: f64,
}

impl Default for Traffic {
    fn default() -> Self {
        Traffic {
            packet_size_bytes: DEFAULT_PACKET_SIZE_BYTES,
            inter_packet_interval_s: DEFAULT_INTER_PACKET_INTERVAL_S,
        }
    }
}

impl Traffic {
    pub fn offered_rate_bps(&self) -> f64 {
        self.packet_size_bytes as f64 * 8.0 / self.inter_packet_interval_s
    }
}

/// Downlink association `bs -> ut`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    pub bs: String,
    pub ut: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub duration_s: f64,
    pub sampling_period_s: f64,
    pub carrier_hz: f64,
    pub n_bins: usize,
    pub budget: LinkBudgetParams,
    pub bf_scheme: BfScheme,
    pub nodes: Vec<Node>,
    pub associations: Vec<Association>,
    pub trace_path: PathBuf,
    pub traffic: Traffic,
    pub efficiency: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            duration_s: 0.0,
            sampling_period_s: DEFAULT_SAMPLING_PERIOD_S,
            carrier_hz: DEFAULT_CARRIER_HZ,
            n_bins: DEFAULT_N_BINS,
            budget: LinkBudgetParams::default(),
            bf_scheme: BfScheme::Codebook { period_s: 0.1 },
            nodes: Vec::new(),
            associations: Vec::new(),
            trace_path: PathBuf::new(),
            traffic: Traffic::default(),
            efficiency: DEFAULT_EFFICIENCY,
        }
    }
}

const TICK_EPS: f64 = 1e-9;

impl ScenarioConfig {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Samples at `t = k * T` for `t` in `[0, duration]`.
    pub fn n_samples(&self) -> usize {
        (self.duration_s / self.sampling_period_s + TICK_EPS).floor() as usize + 1
    }

    /// Codebook period in ticks, if the scheme is codebook based.
    pub fn codebook_period_ticks(&self) -> Option<usize> {
        match self.bf_scheme {
            BfScheme::Svd => None,
            BfScheme::Codebook { period_s } => {
                Some((period_s / self.sampling_period_s).round() as usize)
            }
        }
    }

    /// Checks everything that does not need the trace.
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if !(self.sampling_period_s > 0.0) {
            return cfg(format!(
                "sampling period must be positive, got {}",
                self.sampling_period_s
            ));
        }
        if !(self.duration_s >= 0.0) {
            return cfg(format!(
                "duration must be non-negative, got {}",
                self.duration_s
            ));
        }
        if self.n_bins == 0 {
            return cfg("n_bins must be at least 1".into());
        }
        if !(self.budget.bandwidth_hz > 0.0) {
            return cfg("bandwidth must be positive".into());
        }
        if !(self.carrier_hz > 0.0) {
            return cfg("carrier frequency must be positive".into());
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return cfg(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            ));
        }
        if !(self.traffic.inter_packet_interval_s > 0.0) || self.traffic.packet_size_bytes == 0 {
            return cfg("traffic needs a positive packet size and inter-packet interval".into());
        }
        if let BfScheme::Codebook { period_s } = self.bf_scheme {
            let ratio = period_s / self.sampling_period_s;
            if !(ratio >= 1.0 - TICK_EPS) || (ratio - ratio.round()).abs() > 1e-6 {
                return cfg(format!(
                    "codebook period {period_s} s must be a positive multiple of the sampling period {} s",
                    self.sampling_period_s
                ));
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if self.nodes[..i].iter().any(|o| o.id == n.id) {
                return cfg(format!("duplicate node id '{}'", n.id));
            }
            n.array
                .validate()
                .map_err(|e| Error::Config(format!("node '{}': {e}", n.id)))?;
        }
        if self.associations.is_empty() {
            return cfg("at least one association is required".into());
        }
        for (i, a) in self.associations.iter().enumerate() {
            for (id, role) in [(&a.bs, NodeRole::Bs), (&a.ut, NodeRole::Ut)] {
                match self.node(id) {
                    None => {
                        return cfg(format!(
                            "association {} -> {} names unknown node '{id}'",
                            a.bs, a.ut
                        ))
                    }
                    Some(n) if n.role != role => {
                        return cfg(format!(
                            "node '{id}' has the wrong role for association {} -> {}",
                            a.bs, a.ut
                        ))
                    }
                    _ => {}
                }
            }
            if self.associations[..i]
                .iter()
                .any(|o| o.ut == a.ut || o.bs == a.bs)
            {
                return cfg(format!(
                    "node in association {} -> {} is already associated",
                    a.bs, a.ut
                ));
            }
        }
        Ok(())
    }

    /// Checks the trace against the configuration.
    pub fn validate_trace(&self, trace: &RayTraceSet) -> Result<()> {
        let rel = (trace.sampling_period_s - self.sampling_period_s).abs() / self.sampling_period_s;
        if rel > 1e-9 {
            return Err(Error::Config(format!(
                "trace sampling period {} s differs from configured {} s",
                trace.sampling_period_s, self.sampling_period_s
            )));
        }
        if trace.n_samples < self.n_samples() {
            return Err(Error::Config(format!(
                "trace has {} samples but a {} s run needs {}",
                trace.n_samples,
                self.duration_s,
                self.n_samples()
            )));
        }
        for a in &self.associations {
            for b in &self.associations {
                if trace.link(&b.bs, &a.ut).is_none() {
                    return Err(Error::Config(format!(
                        "trace has no link {} -> {}",
                        b.bs, a.ut
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Records and throughput of one association.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationSeries {
    pub bs: String,
    pub ut: String,
    pub records: Vec<LinkMetricsRecord>,
    pub throughput_bps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub config_sha256: String,
    pub tool_version: String,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub series: Vec<AssociationSeries>,
    /// Sample indices at which a codebook search was run.
    pub search_instants: Vec<usize>,
    pub metadata: RunMetadata,
}

impl SimulationOutput {
    pub fn record_count(&self) -> usize {
        self.series.iter().map(|s| s.records.len()).sum()
    }
}

/// Shannon-capped throughput: `min(offered, eta * B * log2(1 + sinr))` per sample.
pub fn estimate_throughput(
    records: &[LinkMetricsRecord],
    traffic: &Traffic,
    bandwidth_hz: f64,
    efficiency: f64,
) -> Vec<f64> {
    let offered = traffic.offered_rate_bps();
    records
        .iter()
        .map(|r| {
            let sinr = 10f64.powf(r.sinr_db / 10.0);
            let cap = efficiency * bandwidth_hz * (1.0 + sinr).log2();
            cap.min(offered)
        })
        .collect()
}

#[derive(Clone)]
struct Beam {
    weights: BeamformingVector,
    label: BeamLabel,
}

/// Resolves the codebook of every node (generated or read from disk).
pub fn resolve_codebooks(cfg: &ScenarioConfig) -> Result<HashMap<String, Codebook>> {
    let mut out = HashMap::new();
    for n in &cfg.nodes {
        let cb = match &n.codebook {
            CodebookSource::Generated => beamforming::generate_codebook(&n.array),
            CodebookSource::File(p) => {
                let f = std::fs::File::open(p).map_err(|e| {
                    Error::Config(format!("cannot open codebook {}: {e}", p.display()))
                })?;
                let cb = beamforming::load_codebook(std::io::BufReader::new(f))?;
                if (cb.rows, cb.cols) != (n.array.rows, n.array.cols) {
                    return Err(Error::Config(format!(
                        "codebook {} is {}x{} but node '{}' has a {}x{} array",
                        p.display(),
                        cb.rows,
                        cb.cols,
                        n.id,
                        n.array.rows,
                        n.array.cols
                    )));
                }
                cb
            }
        };
        out.insert(n.id.clone(), cb);
    }
    Ok(out)
}

/// Per-tick channels: `serving[a]` and `cross[a][b]` = channel from the BS of
/// association `b` to the UT of association `a` (`cross[a][a]` is serving).
struct TickChannels {
    cross: Vec<Vec<RayChannel>>,
}

pub struct Simulator<'a> {
    cfg: &'a ScenarioConfig,
    trace: &'a RayTraceSet,
    codebooks: HashMap<String, Codebook>,
    freq: Vec<f64>,
    noise_dbm: f64,
    config_sha256: String,
}

impl<'a> Simulator<'a> {
    pub fn new(
        cfg: &'a ScenarioConfig,
        trace: &'a RayTraceSet,
        codebooks: HashMap<String, Codebook>,
        config_sha256: String,
    ) -> Result<Self> {
        cfg.validate()?;
        cfg.validate_trace(trace)?;
        for n in &cfg.nodes {
            if !codebooks.contains_key(&n.id) {
                return Err(Error::Config(format!("no codebook for node '{}'", n.id)));
            }
        }
        Ok(Simulator {
            cfg,
            trace,
            codebooks,
            freq: frequency_grid(cfg.carrier_hz, cfg.budget.bandwidth_hz, cfg.n_bins)?,
            noise_dbm: noise_power_dbm(&cfg.budget),
            config_sha256,
        })
    }

    fn array(&self, id: &str) -> &ArrayConfig {
        &self.cfg.node(id).expect("validated node").array
    }

    fn channels(&self, k: usize) -> TickChannels {
        let t = self.trace.sample_time(k);
        let assoc = &self.cfg.associations;
        let cross = assoc
            .iter()
            .map(|victim| {
                assoc
                    .iter()
                    .map(|src| {
                        let link = self
                            .trace
                            .link(&src.bs, &victim.ut)
                            .expect("validated link");
                        RayChannel::new(
                            &link.samples[k],
                            self.array(&src.bs),
                            self.array(&victim.ut),
                            &self.freq,
                            t,
                        )
                    })
                    .collect()
            })
            .collect();
        TickChannels { cross }
    }

    fn default_beam(n: usize) -> Beam {
        let w = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        Beam {
            weights: BeamformingVector::new(w, BfOrigin::Custom).expect("uniform is unit norm"),
            label: BeamLabel::Codeword(0),
        }
    }

    /// Runs every sample of the scenario.
    pub fn run(&self) -> Result<SimulationOutput> {
        let cfg = self.cfg;
        let n_assoc = cfg.associations.len();
        let n_samples = cfg.n_samples();
        let period = cfg.codebook_period_ticks();
        let tx_power = cfg.budget.tx_power_dbm;

        let mut tx_beams: Vec<Option<Beam>> = vec![None; n_assoc];
        let mut rx_beams: Vec<Option<Beam>> = vec![None; n_assoc];
        let mut records: Vec<Vec<LinkMetricsRecord>> = vec![Vec::with_capacity(n_samples); n_assoc];
        let mut search_instants = Vec::new();

        for k in 0..n_samples {
            let ch = self.channels(k);
            match period {
                None => {
                    for a in 0..n_assoc {
                        let h = &ch.cross[a][a];
                        if h.is_zero() {
                            continue;
                        }
                        let (tx, rx) = svd_beamforming(h)?;
                        tx_beams[a] = Some(Beam {
                            weights: tx,
                            label: BeamLabel::Svd,
                        });
                        rx_beams[a] = Some(Beam {
                            weights: rx,
                            label: BeamLabel::Svd,
                        });
                    }
                }
                Some(p) if k % p == 0 => {
                    search_instants.push(k);
                    let frozen = tx_beams.clone();
                    let mut updates = Vec::with_capacity(n_assoc);
                    for a in 0..n_assoc {
                        updates.push(self.search(a, &ch, &frozen)?);
                    }
                    for (a, upd) in updates.into_iter().enumerate() {
                        if let Some((tx, rx)) = upd {
                            tx_beams[a] = Some(tx);
                            rx_beams[a] = Some(rx);
                        }
                    }
                }
                Some(_) => {}
            }

            let t = self.trace.sample_time(k);
            for a in 0..n_assoc {
                let (n_tx, n_rx) = (ch.cross[a][a].tx_elements(), ch.cross[a][a].rx_elements());
                let tx = tx_beams[a]
                    .clone()
                    .unwrap_or_else(|| Self::default_beam(n_tx));
                let rx = rx_beams[a]
                    .clone()
                    .unwrap_or_else(|| Self::default_beam(n_rx));
                let signal =
                    beamformed_rx_power(&ch.cross[a][a], &tx.weights, &rx.weights, tx_power);
                let interference: Vec<f64> = (0..n_assoc)
                    .filter(|&b| b != a)
                    .map(|b| {
                        let n_b = ch.cross[a][b].tx_elements();
                        let itx = tx_beams[b]
                            .clone()
                            .unwrap_or_else(|| Self::default_beam(n_b));
                        beamformed_rx_power(&ch.cross[a][b], &itx.weights, &rx.weights, tx_power)
                    })
                    .collect();
                records[a].push(LinkMetricsRecord::new(
                    t,
                    signal,
                    &interference,
                    self.noise_dbm,
                    tx.label,
                    rx.label,
                ));
            }
        }

        let series = cfg
            .associations
            .iter()
            .zip(records)
            .map(|(assoc, recs)| AssociationSeries {
                bs: assoc.bs.clone(),
                ut: assoc.ut.clone(),
                throughput_bps: estimate_throughput(
                    &recs,
                    &cfg.traffic,
                    cfg.budget.bandwidth_hz,
                    cfg.efficiency,
                ),
                records: recs,
            })
            .collect();
        Ok(SimulationOutput {
            series,
            search_instants,
            metadata: RunMetadata {
                config_sha256: self.config_sha256.clone(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                n_samples,
            },
        })
    }

    /// Exhaustive codeword-pair search for association `a`. Returns `None`
    /// when the serving channel carries no rays (nothing to align to).
    fn search(
        &self,
        a: usize,
        ch: &TickChannels,
        frozen: &[Option<Beam>],
    ) -> Result<Option<(Beam, Beam)>> {
        let assoc = &self.cfg.associations[a];
        let serving = &ch.cross[a][a];
        if serving.is_zero() {
            return Ok(None);
        }
        let tx_cb = &self.codebooks[&assoc.bs];
        let rx_cb = &self.codebooks[&assoc.ut];
        let tx_power = self.cfg.budget.tx_power_dbm;

        let tx_proj: Vec<Vec<Complex64>> = tx_cb
            .codewords
            .iter()
            .map(|w| serving.tx_projections(w.weights()))
            .collect();
        let rx_proj: Vec<Vec<Complex64>> = rx_cb
            .codewords
            .iter()
            .map(|w| serving.rx_projections(w.weights()))
            .collect();

        // interference per candidate rx codeword, from interferers with a beam
        let interf: Vec<Vec<f64>> = rx_cb
            .codewords
            .iter()
            .map(|rx| {
                frozen
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| *b != a)
                    .filter_map(|(b, beam)| beam.as_ref().map(|beam| (b, beam)))
                    .map(|(b, beam)| {
                        beamformed_rx_power(&ch.cross[a][b], &beam.weights, rx, tx_power)
                    })
                    .collect()
            })
            .collect();

        let (i, j, _) = argmax_pair(tx_cb.len(), rx_cb.len(), |i, j| {
            let g = serving.mean_gain_from_projections(&rx_proj[j], &tx_proj[i]);
            let s = if g > 0.0 {
                tx_power + 10.0 * g.log10()
            } else {
                f64::NEG_INFINITY
            };
            sinr_db(s, &interf[j], self.noise_dbm)
        });
        Ok(Some((
            Beam {
                weights: tx_cb.codewords[i].clone(),
                label: BeamLabel::Codeword(i),
            },
            Beam {
                weights: rx_cb.codewords[j].clone(),
                label: BeamLabel::Codeword(j),
            },
        )))
    }
}

/// Runs a scenario whose codebooks are resolved from the configuration.
pub fn run(cfg: &ScenarioConfig, trace: &RayTraceSet) -> Result<SimulationOutput> {
    cfg.validate()?;
    let codebooks = resolve_codebooks(cfg)?;
    let sha = crate::config::config_checksum(cfg);
    Simulator::new(cfg, trace, codebooks, sha)?.run()
}
