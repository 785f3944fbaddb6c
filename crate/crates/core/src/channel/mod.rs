//! Ray-based channel: trace ingestion and MIMO channel assembly.
//!
//! Every ray contributes a rank-one term to the per-bin channel
//!
//! ```text
//! H(f) = sum_r c_r(f) * a_r * b_r^T
//! c_r(f) = 10^(gain/20) g_rx g_tx exp(j phase) exp(-j 2 pi f tau) exp(j 2 pi nu t)
//! ```
//!
//! where `a_r`/`b_r` are the receive/transmit spatial signatures evaluated
//! at the ray's arrival/departure direction rotated into each array's local
//! frame. Path gains in traces are isotropic-referenced: element patterns
//! are applied here.
//!
//! Both signatures use `exp(+j 2 pi <u, p>)` and gains are `rx^H H tx`, so a
//! transmit weight equal to the steering vector toward `d` couples best to
//! `b^T w`, i.e. to the conjugate progression. Generated codebooks are
//! symmetric about broadside and therefore contain both.

mod matrix;
mod trace;

pub use matrix::{ChannelMatrix, MimoChannel, RayChannel};
pub use trace::{parse_trace, write_trace, RayTraceSet, TraceLink};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::array::ArrayConfig;
use crate::error::{Error, Result};
use crate::geometry::Direction;

/// One propagation path. Angles are in the global frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub delay_s: f64,
    pub path_gain_db: f64,
    pub phase_rad: f64,
    pub aod: Direction,
    pub aoa: Direction,
    pub doppler_hz: Option<f64>,
}

impl Ray {
    /// Complex coefficient of this ray at frequency `f` and time `t`,
    /// excluding element gains.
    pub fn coefficient(&self, f_hz: f64, t_s: f64) -> Complex64 {
        let amp = 10f64.powf(self.path_gain_db / 20.0);
        let mut phase = self.phase_rad - 2.0 * PI * f_hz * self.delay_s;
        if let Some(nu) = self.doppler_hz {
            phase += 2.0 * PI * nu * t_s;
        }
        Complex64::from_polar(amp, phase)
    }
}

/// Uniformly spaced bin centers covering `[center - B/2, center + B/2]`.
pub fn frequency_grid(center_hz: f64, bandwidth_hz: f64, n_bins: usize) -> Result<Vec<f64>> {
    if n_bins == 0 {
        return Err(Error::InvalidParameter(
            "frequency grid needs at least one bin".into(),
        ));
    }
    let step = bandwidth_hz / n_bins as f64;
    let start = center_hz - bandwidth_hz / 2.0;
    Ok((0..n_bins)
        .map(|k| start + (k as f64 + 0.5) * step)
        .collect())
}

/// Dense per-bin channel matrix `(rx elements x tx elements)` for a ray list.
pub fn assemble_channel(
    rays: &[Ray],
    tx: &ArrayConfig,
    rx: &ArrayConfig,
    freq_grid: &[f64],
    t_s: f64,
) -> ChannelMatrix {
    RayChannel::new(rays, tx, rx, freq_grid, t_s).to_dense()
}
