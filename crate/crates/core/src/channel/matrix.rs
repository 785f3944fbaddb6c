use num_complex::Complex64;

use super::Ray;
use crate::array::ArrayConfig;

/// Operations the beamforming and link-metric code needs from a channel.
///
/// All quantities are averaged over the frequency bins, so a wideband
/// channel reduces to a single set of second-order statistics.
pub trait MimoChannel {
    fn rx_elements(&self) -> usize;
    fn tx_elements(&self) -> usize;
    fn is_zero(&self) -> bool;

    /// `mean_f |rx^H H(f) tx|^2`.
    fn mean_gain(&self, rx: &[Complex64], tx: &[Complex64]) -> f64;

    /// `mean_f H(f)^H H(f) t`.
    fn tx_gram_apply(&self, t: &[Complex64]) -> Vec<Complex64>;

    /// `mean_f H(f) H(f)^H r`.
    fn rx_gram_apply(&self, r: &[Complex64]) -> Vec<Complex64>;

    /// `mean_f (H(f) t)(H(f) t)^H r`: receive covariance for a fixed transmit beam.
    fn rx_cov_given_tx(&self, t: &[Complex64], r: &[Complex64]) -> Vec<Complex64>;

    /// `mean_f (H(f)^H r)(H(f)^H r)^H t`: transmit covariance for a fixed receive beam.
    fn tx_cov_given_rx(&self, r: &[Complex64], t: &[Complex64]) -> Vec<Complex64>;
}

/// Dense per-bin channel, row-major `rx x tx` per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rx: usize,
    tx: usize,
    pub freq_grid: Vec<f64>,
    pub timestamp_s: f64,
    bins: Vec<Vec<Complex64>>,
}

impl ChannelMatrix {
    pub fn zeros(rx: usize, tx: usize, freq_grid: Vec<f64>, timestamp_s: f64) -> Self {
        let bins = vec![vec![Complex64::new(0.0, 0.0); rx * tx]; freq_grid.len()];
        ChannelMatrix {
            rx,
            tx,
            freq_grid,
            timestamp_s,
            bins,
        }
    }

    /// Single-bin channel from row-major entries.
    pub fn from_rows(rx: usize, tx: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), rx * tx, "entry count must equal rx * tx");
        ChannelMatrix {
            rx,
            tx,
            freq_grid: vec![0.0],
            timestamp_s: 0.0,
            bins: vec![entries],
        }
    }

    pub fn n_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn get(&self, bin: usize, u: usize, s: usize) -> Complex64 {
        self.bins[bin][u * self.tx + s]
    }

    pub fn set(&mut self, bin: usize, u: usize, s: usize, v: Complex64) {
        self.bins[bin][u * self.tx + s] = v;
    }

    pub fn bin(&self, bin: usize) -> &[Complex64] {
        &self.bins[bin]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.bins
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn mul(&self, bin: usize, t: &[Complex64]) -> Vec<Complex64> {
        let h = &self.bins[bin];
        (0..self.rx)
            .map(|u| {
                h[u * self.tx..(u + 1) * self.tx]
                    .iter()
                    .zip(t)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    fn mul_h(&self, bin: usize, r: &[Complex64]) -> Vec<Complex64> {
        let h = &self.bins[bin];
        let mut out = vec![Complex64::new(0.0, 0.0); self.tx];
        for (u, ru) in r.iter().enumerate() {
            for (s, o) in out.iter_mut().enumerate() {
                *o += h[u * self.tx + s].conj() * ru;
            }
        }
        out
    }

    fn average<F>(&self, len: usize, mut per_bin: F) -> Vec<Complex64>
    where
        F: FnMut(usize) -> Vec<Complex64>,
    {
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        for b in 0..self.n_bins() {
            for (a, v) in acc.iter_mut().zip(per_bin(b)) {
                *a += v;
            }
        }
        let n = self.n_bins() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn scaled(v: &[Complex64], k: Complex64) -> Vec<Complex64> {
    v.iter().map(|x| x * k).collect()
}

impl MimoChannel for ChannelMatrix {
    fn rx_elements(&self) -> usize {
        self.rx
    }

    fn tx_elements(&self) -> usize {
        self.tx
    }

    fn is_zero(&self) -> bool {
        self.bins.iter().flatten().all(|c| c.norm_sqr() == 0.0)
    }

    fn mean_gain(&self, rx: &[Complex64], tx: &[Complex64]) -> f64 {
        let total: f64 = (0..self.n_bins())
            .map(|b| inner(rx, &self.mul(b, tx)).norm_sqr())
            .sum();
        total / self.n_bins() as f64
    }

    fn tx_gram_apply(&self, t: &[Complex64]) -> Vec<Complex64> {
        self.average(self.tx, |b| self.mul_h(b, &self.mul(b, t)))
    }

    fn rx_gram_apply(&self, r: &[Complex64]) -> Vec<Complex64> {
        self.average(self.rx, |b| self.mul(b, &self.mul_h(b, r)))
    }

    fn rx_cov_given_tx(&self, t: &[Complex64], r: &[Complex64]) -> Vec<Complex64> {
        self.average(self.rx, |b| {
            let y = self.mul(b, t);
            let k = inner(&y, r);
            scaled(&y, k)
        })
    }

    fn tx_cov_given_rx(&self, r: &[Complex64], t: &[Complex64]) -> Vec<Complex64> {
        self.average(self.tx, |b| {
            let y = self.mul_h(b, r);
            let k = inner(&y, t);
            scaled(&y, k)
        })
    }
}

/// Channel kept in its per-ray rank-one factored form.
///
/// Frequency dependence only enters through the ray coefficients, so every
/// bin-averaged quantity reduces to the ray Gram matrix
/// `G[r][s] = mean_f conj(c_r(f)) c_s(f)`. Cost scales with the ray count
/// rather than with the number of bins.
#[derive(Debug, Clone)]
pub struct RayChannel {
    rx: usize,
    tx: usize,
    freq_grid: Vec<f64>,
    timestamp_s: f64,
    /// Receive signatures `a_r`.
    rx_sig: Vec<Vec<Complex64>>,
    /// Transmit signatures `b_r`.
    tx_sig: Vec<Vec<Complex64>>,
    /// `coeff[r][bin]`, including path and element gains.
    coeff: Vec<Vec<Complex64>>,
    gram: Vec<Vec<Complex64>>,
}

impl RayChannel {
    pub fn new(
        rays: &[Ray],
        tx: &ArrayConfig,
        rx: &ArrayConfig,
        freq_grid: &[f64],
        t_s: f64,
    ) -> Self {
        let mut rx_sig = Vec::with_capacity(rays.len());
        let mut tx_sig = Vec::with_capacity(rays.len());
        let mut coeff = Vec::with_capacity(rays.len());
        for ray in rays {
            let aod = tx.orientation.global_to_local(ray.aod);
            let aoa = rx.orientation.global_to_local(ray.aoa);
            let g = tx.element.field_amplitude(aod) * rx.element.field_amplitude(aoa);
            rx_sig.push(rx.spatial_signature(aoa));
            tx_sig.push(tx.spatial_signature(aod));
            coeff.push(
                freq_grid
                    .iter()
                    .map(|&f| ray.coefficient(f, t_s) * g)
                    .collect::<Vec<_>>(),
            );
        }
        let n = freq_grid.len().max(1) as f64;
        let gram = (0..rays.len())
            .map(|r| {
                (0..rays.len())
                    .map(|s| {
                        coeff[r]
                            .iter()
                            .zip(&coeff[s])
                            .map(|(a, b)| a.conj() * b)
                            .sum::<Complex64>()
                            / n
                    })
                    .collect()
            })
            .collect();
        RayChannel {
            rx: rx.num_elements(),
            tx: tx.num_elements(),
            freq_grid: freq_grid.to_vec(),
            timestamp_s: t_s,
            rx_sig,
            tx_sig,
            coeff,
            gram,
        }
    }

    pub fn n_rays(&self) -> usize {
        self.coeff.len()
    }

    pub fn to_dense(&self) -> ChannelMatrix {
        let mut h =
            ChannelMatrix::zeros(self.rx, self.tx, self.freq_grid.clone(), self.timestamp_s);
        for r in 0..self.n_rays() {
            for (b, c) in self.coeff[r].iter().enumerate() {
                for (u, a) in self.rx_sig[r].iter().enumerate() {
                    let ca = c * a;
                    for (s, bs) in self.tx_sig[r].iter().enumerate() {
                        let cur = h.get(b, u, s);
                        h.set(b, u, s, cur + ca * bs);
                    }
                }
            }
        }
        h
    }

    /// `a_r^H r` for every ray.
    pub fn rx_projections(&self, r: &[Complex64]) -> Vec<Complex64> {
        self.rx_sig.iter().map(|a| inner(a, r)).collect()
    }

    /// `b_r^T t` for every ray.
    pub fn tx_projections(&self, t: &[Complex64]) -> Vec<Complex64> {
        self.tx_sig
            .iter()
            .map(|b| b.iter().zip(t).map(|(x, y)| x * y).sum())
            .collect()
    }

    /// `sum_rs conj(x_r) G_rs x_s` for per-ray effective gains `x`.
    pub fn quadratic_form(&self, x: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, xr) in x.iter().enumerate() {
            let row: Complex64 = self.gram[r].iter().zip(x).map(|(g, xs)| g * xs).sum();
            acc += xr.conj() * row;
        }
        acc.re.max(0.0)
    }

    /// Mean gain from precomputed projections `alpha = a^H rx`, `beta = b^T tx`.
    pub fn mean_gain_from_projections(&self, alpha: &[Complex64], beta: &[Complex64]) -> f64 {
        let x: Vec<Complex64> = alpha.iter().zip(beta).map(|(a, b)| a.conj() * b).collect();
        self.quadratic_form(&x)
    }
}

impl MimoChannel for RayChannel {
    fn rx_elements(&self) -> usize {
        self.rx
    }

    fn tx_elements(&self) -> usize {
        self.tx
    }

    fn is_zero(&self) -> bool {
        self.gram
            .iter()
            .enumerate()
            .all(|(r, row)| row[r].re == 0.0)
    }

    fn mean_gain(&self, rx: &[Complex64], tx: &[Complex64]) -> f64 {
        self.mean_gain_from_projections(&self.rx_projections(rx), &self.tx_projections(tx))
    }

    fn tx_gram_apply(&self, t: &[Complex64]) -> Vec<Complex64> {
        // sum_rs conj(b_r) (a_r^H a_s) G_rs (b_s^T t)
        let beta = self.tx_projections(t);
        let mut out = vec![Complex64::new(0.0, 0.0); self.tx];
        for r in 0..self.n_rays() {
            let k: Complex64 = (0..self.n_rays())
                .map(|s| inner(&self.rx_sig[r], &self.rx_sig[s]) * self.gram[r][s] * beta[s])
                .sum();
            for (o, b) in out.iter_mut().zip(&self.tx_sig[r]) {
                *o += b.conj() * k;
            }
        }
        out
    }

    fn rx_gram_apply(&self, r_vec: &[Complex64]) -> Vec<Complex64> {
        // sum_rs a_r (b_r^T conj(b_s)) G_sr (a_s^H r)
        let alpha = self.rx_projections(r_vec);
        let mut out = vec![Complex64::new(0.0, 0.0); self.rx];
        for r in 0..self.n_rays() {
            let k: Complex64 = (0..self.n_rays())
                .map(|s| {
                    let bb: Complex64 = self.tx_sig[r]
                        .iter()
                        .zip(&self.tx_sig[s])
                        .map(|(x, y)| x * y.conj())
                        .sum();
                    bb * self.gram[s][r] * alpha[s]
                })
                .sum();
            for (o, a) in out.iter_mut().zip(&self.rx_sig[r]) {
                *o += a * k;
            }
        }
        out
    }

    fn rx_cov_given_tx(&self, t: &[Complex64], r_vec: &[Complex64]) -> Vec<Complex64> {
        // sum_rs a_r beta_r conj(beta_s) G_sr (a_s^H r)
        let beta = self.tx_projections(t);
        let alpha = self.rx_projections(r_vec);
        let mut out = vec![Complex64::new(0.0, 0.0); self.rx];
        for r in 0..self.n_rays() {
            let k: Complex64 = (0..self.n_rays())
                .map(|s| beta[r] * beta[s].conj() * self.gram[s][r] * alpha[s])
                .sum();
            for (o, a) in out.iter_mut().zip(&self.rx_sig[r]) {
                *o += a * k;
            }
        }
        out
    }

    fn tx_cov_given_rx(&self, r_vec: &[Complex64], t: &[Complex64]) -> Vec<Complex64> {
        // sum_rs conj(b_r) alpha_r conj(alpha_s) G_rs (b_s^T t)
        let alpha = self.rx_projections(r_vec);
        let beta = self.tx_projections(t);
        let mut out = vec![Complex64::new(0.0, 0.0); self.tx];
        for r in 0..self.n_rays() {
            let k: Complex64 = (0..self.n_rays())
                .map(|s| alpha[r] * alpha[s].conj() * self.gram[r][s] * beta[s])
                .sum();
            for (o, b) in out.iter_mut().zip(&self.tx_sig[r]) {
                *o += b.conj() * k;
            }
        }
        out
    }
}
