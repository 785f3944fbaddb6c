//! Link budget: beamformed received power against noise plus interference.
//!
//! Zero power is represented by `f64::NEG_INFINITY` in dB.

use std::fmt;

use crate::array::BeamformingVector;
use crate::channel::MimoChannel;

pub const DEFAULT_TX_POWER_DBM: f64 = 30.0;
pub const DEFAULT_NOISE_FIGURE_DB: f64 = 9.0;
pub const DEFAULT_BANDWIDTH_HZ: f64 = 400e6;
pub const DEFAULT_NOISE_DENSITY_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudgetParams {
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,
    pub noise_density_dbm_hz: f64,
}

impl Default for LinkBudgetParams {
    fn default() -> Self {
        LinkBudgetParams {
            tx_power_dbm: DEFAULT_TX_POWER_DBM,
            noise_figure_db: DEFAULT_NOISE_FIGURE_DB,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            noise_density_dbm_hz: DEFAULT_NOISE_DENSITY_DBM_HZ,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Thermal noise power over the bandwidth plus the receiver noise figure.
pub fn noise_power_dbm(p: &LinkBudgetParams) -> f64 {
    p.noise_density_dbm_hz + linear_to_db(p.bandwidth_hz) + p.noise_figure_db
}

/// `tx_power + 10 log10(mean_f |rx^H H(f) tx|^2)`.
pub fn beamformed_rx_power<C: MimoChannel + ?Sized>(
    h: &C,
    tx_w: &BeamformingVector,
    rx_w: &BeamformingVector,
    tx_power_dbm: f64,
) -> f64 {
    let g = h.mean_gain(rx_w.weights(), tx_w.weights());
    if g <= 0.0 {
        return f64::NEG_INFINITY;
    }
    tx_power_dbm + linear_to_db(g)
}

/// Signal over the linear sum of interference and noise, in dB.
pub fn sinr_db(signal_dbm: f64, interference_dbm: &[f64], noise_dbm: f64) -> f64 {
    let denom: f64 = interference_dbm
        .iter()
        .map(|&i| db_to_linear(i))
        .sum::<f64>()
        + db_to_linear(noise_dbm);
    signal_dbm - linear_to_db(denom)
}

/// Total interference in dBm (`-inf` when there is none).
pub fn total_power_dbm(terms_dbm: &[f64]) -> f64 {
    linear_to_db(terms_dbm.iter().map(|&i| db_to_linear(i)).sum())
}

/// Power received by a victim through each interferer's channel, using the
/// interferer's transmit beam and the victim's receive beam.
pub fn interference_at<C: MimoChannel>(
    victim_rx: &BeamformingVector,
    interferers: &[(&C, &BeamformingVector)],
    tx_power_dbm: f64,
) -> Vec<f64> {
    interferers
        .iter()
        .map(|(h, tx)| beamformed_rx_power(*h, tx, victim_rx, tx_power_dbm))
        .collect()
}

/// Which beam an endpoint used for a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamLabel {
    Svd,
    Codeword(usize),
}

impl fmt::Display for BeamLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeamLabel::Svd => f.write_str("svd"),
            BeamLabel::Codeword(i) => write!(f, "{i}"),
        }
    }
}

impl std::str::FromStr for BeamLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "svd" {
            return Ok(BeamLabel::Svd);
        }
        s.parse()
            .map(BeamLabel::Codeword)
            .map_err(|_| format!("invalid beam label '{s}'"))
    }
}

/// Metrics of one association at one sample instant.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetricsRecord {
    pub timestamp_s: f64,
    pub snr_db: f64,
    pub sinr_db: f64,
    pub rx_power_dbm: f64,
    pub interference_dbm: f64,
    pub noise_dbm: f64,
    pub tx_beam: BeamLabel,
    pub rx_beam: BeamLabel,
}

impl LinkMetricsRecord {
    pub fn new(
        timestamp_s: f64,
        rx_power_dbm: f64,
        interference_terms: &[f64],
        noise_dbm: f64,
        tx_beam: BeamLabel,
        rx_beam: BeamLabel,
    ) -> Self {
        LinkMetricsRecord {
            timestamp_s,
            snr_db: sinr_db(rx_power_dbm, &[], noise_dbm),
            sinr_db: sinr_db(rx_power_dbm, interference_terms, noise_dbm),
            rx_power_dbm,
            interference_dbm: total_power_dbm(interference_terms),
            noise_dbm,
            tx_beam,
            rx_beam,
        }
    }
}
