//! Trace-driven mmWave link simulation with beamformed antenna arrays.
//!
//! Ray traces become wideband MIMO channels; SVD or codebook beams are
//! chosen per sample and reported as SNR/SINR time series.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod beamforming;
pub mod channel;
pub mod config;
pub mod element;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod output;
pub mod scenario;

pub use error::{Error, Result};
