//! Beamforming vector computation and selection.
//!
//! Two families are supported: channel-based maximum ratio transmission
//! (dominant singular pair of the channel) and codebook-based selection by
//! exhaustive search over every TX/RX codeword pair.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::BufRead;

use num_complex::Complex64;

use crate::array::{l2_norm, ArrayConfig, BeamformingVector, BfOrigin};
use crate::channel::MimoChannel;
use crate::error::{Error, Result};
use crate::geometry::Direction;

/// Relative eigenvalue change at which power iteration stops.
pub const POWER_ITER_TOL: f64 = 1e-12;
pub const POWER_ITER_MAX: usize = 10_000;
const ALTERNATING_MAX: usize = 200;

// ---------------------------------------------------------------------------
// SVD / maximum ratio transmission
// ---------------------------------------------------------------------------

/// Dominant eigenvector of a Hermitian PSD operator given by `apply`.
fn power_iteration<F>(
    n: usize,
    start: Vec<Complex64>,
    mut apply: F,
) -> Result<(Vec<Complex64>, f64)>
where
    F: FnMut(&[Complex64]) -> Vec<Complex64>,
{
    let mut x = start;
    let nx = l2_norm(&x);
    if nx == 0.0 {
        return Err(Error::Numerical(
            "power iteration started from a zero vector".into(),
        ));
    }
    x.iter_mut().for_each(|v| *v /= nx);
    let mut lambda = f64::NAN;
    for it in 0..POWER_ITER_MAX {
        let y = apply(&x);
        debug_assert_eq!(y.len(), n);
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum();
        let ny = l2_norm(&y);
        if ny == 0.0 {
            return Ok((x, 0.0));
        }
        x = y.into_iter().map(|v| v / ny).collect();
        if it > 0 && (rayleigh - lambda).abs() <= POWER_ITER_TOL * rayleigh.abs() {
            return Ok((x, rayleigh));
        }
        lambda = rayleigh;
    }
    Err(Error::Numerical(format!(
        "power iteration did not converge after {POWER_ITER_MAX} iterations"
    )))
}

/// Dominant eigenvector, started from the uniform vector; a second start
/// from the operator's strongest column guards against a uniform start
/// that is orthogonal to the dominant eigenvector.
fn dominant_eigvec<F>(n: usize, mut apply: F) -> Result<(Vec<Complex64>, f64)>
where
    F: FnMut(&[Complex64]) -> Vec<Complex64>,
{
    let uniform = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let (v1, l1) = power_iteration(n, uniform, &mut apply)?;
    let mut best_col = Vec::new();
    let mut best_diag = 0.0;
    for k in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[k] = Complex64::new(1.0, 0.0);
        let col = apply(&e);
        if col[k].re > best_diag {
            best_diag = col[k].re;
            best_col = col;
        }
    }
    if best_diag == 0.0 {
        return Ok((v1, l1));
    }
    let (v2, l2) = power_iteration(n, best_col, &mut apply)?;
    if l2 > l1 * (1.0 + 1e-9) {
        Ok((v2, l2))
    } else {
        Ok((v1, l1))
    }
}

/// Rotates `v` so its largest-magnitude entry is real and positive.
pub fn fix_global_phase(v: &mut [Complex64]) {
    let mut idx = 0;
    let mut best = -1.0;
    for (i, c) in v.iter().enumerate() {
        if c.norm() > best * (1.0 + 1e-12) {
            best = c.norm();
            idx = i;
        }
    }
    if best > 0.0 {
        let rot = v[idx].conj() / best;
        v.iter_mut().for_each(|c| *c *= rot);
    }
}

/// Dominant singular pair of a (possibly wideband) channel.
///
/// The transmit vector starts as the dominant eigenvector of the
/// bin-averaged `H^H H` and the receive vector as that of `H H^H`. The pair
/// is then refined by alternating maximization of `mean_f |r^H H(f) t|^2`,
/// which leaves a narrowband solution unchanged and can only raise the
/// wideband gain. Returns `(tx, rx)`.
pub fn svd_beamforming<C: MimoChannel + ?Sized>(
    h: &C,
) -> Result<(BeamformingVector, BeamformingVector)> {
    if h.is_zero() {
        return Err(Error::DegenerateChannel(
            "channel matrix is all zero".into(),
        ));
    }
    let (nt, nr) = (h.tx_elements(), h.rx_elements());
    let (mut tx, _) = dominant_eigvec(nt, |t| h.tx_gram_apply(t))?;
    let (mut rx, _) = dominant_eigvec(nr, |r| h.rx_gram_apply(r))?;

    let mut gain = h.mean_gain(&rx, &tx);
    for _ in 0..ALTERNATING_MAX {
        let t = tx.clone();
        rx = power_iteration(nr, rx, |r| h.rx_cov_given_tx(&t, r))?.0;
        let r = rx.clone();
        tx = power_iteration(nt, tx, |t| h.tx_cov_given_rx(&r, t))?.0;
        let g = h.mean_gain(&rx, &tx);
        let done = (g - gain).abs() <= POWER_ITER_TOL * g;
        gain = g;
        if done {
            break;
        }
    }
    fix_global_phase(&mut tx);
    fix_global_phase(&mut rx);
    Ok((
        BeamformingVector::normalized(tx, BfOrigin::Svd)?,
        BeamformingVector::normalized(rx, BfOrigin::Svd)?,
    ))
}

// ---------------------------------------------------------------------------
// Codebooks
// ---------------------------------------------------------------------------

/// Spatial-frequency layout of a generated codebook.
///
/// Codeword `i_v * psi_h.len() + i_h` applies the phase progression
/// `2 pi (m psi_v[i_v] + n psi_h[i_h])` to element `(m, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookGrid {
    pub psi_v: Vec<f64>,
    pub psi_h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub rows: usize,
    pub cols: usize,
    pub codewords: Vec<BeamformingVector>,
    /// Nominal steering direction (array-local) per codeword, when the
    /// phase progression corresponds to a visible direction.
    pub directions: Vec<Option<Direction>>,
    pub grid: Option<CodebookGrid>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn num_elements(&self) -> usize {
        self.rows * self.cols
    }
}

/// Normalized ULA array-factor power `|sin(pi N x) / (N sin(pi x))|^2` at a
/// spatial-frequency offset `x` (cycles per element).
pub fn ula_power(n: usize, x: f64) -> f64 {
    let s = (PI * x).sin();
    if s.abs() < 1e-15 {
        return 1.0;
    }
    let v = (PI * n as f64 * x).sin() / (n as f64 * s);
    v * v
}

/// Offset at which an `n`-element ULA beam is 3 dB down, in cycles per
/// element. Adjacent beams spaced by twice this value cross at -3 dB.
pub fn half_power_offset(n: usize) -> f64 {
    assert!(n >= 2, "half-power offset needs at least two elements");
    let (mut lo, mut hi) = (0.0, 1.0 / n as f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ula_power(n, mid) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Symmetric spatial-frequency grid for one lattice axis.
fn axis_grid(n: usize, spacing: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let step = 2.0 * half_power_offset(n);
    let k = (spacing / step + 1e-12).floor() as i64;
    (-k..=k).map(|i| i as f64 * step).collect()
}

fn grid_direction(u: f64, v: f64) -> Option<Direction> {
    // u = sin(theta) sin(phi), v = cos(theta)
    if u * u + v * v > 1.0 + 1e-12 {
        return None;
    }
    let theta = v.clamp(-1.0, 1.0).acos();
    let st = theta.sin();
    let phi = if st < 1e-12 {
        0.0
    } else {
        (u / st).clamp(-1.0, 1.0).asin()
    };
    Some(Direction::new(theta.to_degrees(), phi.to_degrees()))
}

fn phase_progression(rows: usize, cols: usize, psi_v: f64, psi_h: f64) -> Vec<Complex64> {
    let scale = 1.0 / ((rows * cols) as f64).sqrt();
    let mut w = Vec::with_capacity(rows * cols);
    for m in 0..rows {
        for n in 0..cols {
            let ph = 2.0 * PI * (m as f64 * psi_v + n as f64 * psi_h);
            w.push(Complex64::from_polar(scale, ph));
        }
    }
    w
}

/// Untapered steering codebook whose adjacent beams cross 3 dB below peak.
///
/// Each lattice axis gets a grid of phase progressions spaced by twice the
/// ULA half-power offset, symmetric about broadside and limited to the
/// visible range `|psi| <= spacing` (azimuth over the front hemisphere,
/// inclination over `[0, 180]`). Single-element axes keep only broadside.
pub fn generate_codebook(a: &ArrayConfig) -> Codebook {
    let psi_v = axis_grid(a.rows, a.spacing_v);
    let psi_h = axis_grid(a.cols, a.spacing_h);
    let mut codewords = Vec::with_capacity(psi_v.len() * psi_h.len());
    let mut directions = Vec::with_capacity(codewords.capacity());
    for &pv in &psi_v {
        for &ph in &psi_h {
            let idx = codewords.len();
            let w = phase_progression(a.rows, a.cols, pv, ph);
            codewords.push(
                BeamformingVector::new(w, BfOrigin::Codebook(idx))
                    .expect("phase progression is unit norm"),
            );
            directions.push(grid_direction(ph / a.spacing_h, pv / a.spacing_v));
        }
    }
    Codebook {
        rows: a.rows,
        cols: a.cols,
        codewords,
        directions,
        grid: Some(CodebookGrid { psi_v, psi_h }),
    }
}

/// Array-factor power `|sum_e conj(w_e) exp(j 2 pi (m psi_v + n psi_h))|^2`.
pub fn array_factor_power(
    rows: usize,
    cols: usize,
    w: &[Complex64],
    psi_v: f64,
    psi_h: f64,
) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..rows {
        for n in 0..cols {
            let ph = 2.0 * PI * (m as f64 * psi_v + n as f64 * psi_h);
            acc += w[m * cols + n].conj() * Complex64::from_polar(1.0, ph);
        }
    }
    acc.norm_sqr()
}

/// One measured crossover between grid-adjacent beams.
#[derive(Debug, Clone, Copy)]
pub struct Crossover {
    pub first: usize,
    pub second: usize,
    /// Crossing level relative to the first beam's peak, dB (negative).
    pub level_db: f64,
}

/// Scans the array-factor power of every pair of grid-adjacent codewords
/// along the segment joining their peaks and reports the crossing level.
/// Returns an empty list for codebooks without a grid.
pub fn measure_crossovers(cb: &Codebook) -> Vec<Crossover> {
    let Some(grid) = &cb.grid else {
        return Vec::new();
    };
    let nh = grid.psi_h.len();
    let point = |i: usize| (grid.psi_v[i / nh], grid.psi_h[i % nh]);
    let mut pairs = Vec::new();
    for iv in 0..grid.psi_v.len() {
        for ih in 0..nh {
            let i = iv * nh + ih;
            if ih + 1 < nh {
                pairs.push((i, i + 1));
            }
            if iv + 1 < grid.psi_v.len() {
                pairs.push((i, i + nh));
            }
        }
    }
    pairs
        .into_iter()
        .map(|(i, j)| {
            let (p1, p2) = (point(i), point(j));
            let wi = cb.codewords[i].weights();
            let wj = cb.codewords[j].weights();
            let at = |t: f64| (p1.0 + t * (p2.0 - p1.0), p1.1 + t * (p2.1 - p1.1));
            let diff = |t: f64| {
                let (v, h) = at(t);
                array_factor_power(cb.rows, cb.cols, wi, v, h)
                    - array_factor_power(cb.rows, cb.cols, wj, v, h)
            };
            // coarse scan for the sign change, then bisection
            let steps = 1000;
            let mut lo = 0.0;
            let mut hi = 1.0;
            for s in 1..=steps {
                let t = s as f64 / steps as f64;
                if diff(t) <= 0.0 {
                    hi = t;
                    lo = (s - 1) as f64 / steps as f64;
                    break;
                }
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if diff(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (v, h) = at(0.5 * (lo + hi));
            let peak = array_factor_power(cb.rows, cb.cols, wi, p1.0, p1.1);
            let cross = array_factor_power(cb.rows, cb.cols, wi, v, h);
            Crossover {
                first: i,
                second: j,
                level_db: 10.0 * (cross / peak).log10(),
            }
        })
        .collect()
}

/// Relative norm deviation accepted (and corrected) when loading.
pub const LOAD_NORM_TOL: f64 = 0.01;

/// Parses the text codebook format:
///
/// ```text
/// M N K
/// re im re im ...   (K lines of 2*M*N values, element index m*N + n)
/// ```
///
/// `#` lines are comments.
pub fn load_codebook<R: BufRead>(reader: R) -> Result<Codebook> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut codewords = Vec::new();
    let mut last_line = 0;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        let Some((rows, cols, count)) = header else {
            if toks.len() != 3 {
                return Err(Error::parse(lineno, "codebook header must be 'M N K'"));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::parse(lineno, format!("invalid header value '{s}'")))
            };
            let (m, n, k) = (parse(toks[0])?, parse(toks[1])?, parse(toks[2])?);
            if m == 0 || n == 0 {
                return Err(Error::parse(lineno, "codebook dimensions must be positive"));
            }
            if k == 0 {
                return Err(Error::parse(lineno, "empty codebook"));
            }
            header = Some((m, n, k));
            continue;
        };
        let want = 2 * rows * cols;
        if toks.len() != want {
            return Err(Error::parse(
                lineno,
                format!(
                    "codeword needs {want} values for a {rows}x{cols} array, found {}",
                    toks.len()
                ),
            ));
        }
        if codewords.len() == count {
            return Err(Error::parse(
                lineno,
                format!("more than the declared {count} codewords"),
            ));
        }
        let mut vals = Vec::with_capacity(want);
        for tok in toks {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("invalid number '{tok}'")))?;
            if !v.is_finite() {
                return Err(Error::parse(lineno, format!("non-finite value '{tok}'")));
            }
            vals.push(v);
        }
        let w: Vec<Complex64> = vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let norm = l2_norm(&w);
        if (norm - 1.0).abs() > LOAD_NORM_TOL {
            // accept unnormalized phase-only rows like "1 0 1 0"
            let unit_mag = w.iter().all(|c| (c.norm() - 1.0).abs() <= LOAD_NORM_TOL);
            if !unit_mag {
                return Err(Error::parse(
                    lineno,
                    format!("codeword norm {norm} is not within 1% of 1"),
                ));
            }
        }
        let idx = codewords.len();
        let cw = if norm == 1.0 {
            BeamformingVector::new(w, BfOrigin::Codebook(idx))?
        } else {
            BeamformingVector::normalized(w, BfOrigin::Codebook(idx))?
        };
        codewords.push(cw);
    }
    let Some((rows, cols, count)) = header else {
        return Err(Error::parse(last_line.max(1), "empty codebook file"));
    };
    if codewords.len() != count {
        return Err(Error::parse(
            last_line,
            format!(
                "found {} codewords, header declares {count}",
                codewords.len()
            ),
        ));
    }
    Ok(Codebook {
        rows,
        cols,
        directions: vec![None; codewords.len()],
        codewords,
        grid: None,
    })
}

/// Serializes a codebook in the format read by [`load_codebook`].
pub fn write_codebook(cb: &Codebook) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", cb.rows, cb.cols, cb.len());
    for cw in &cb.codewords {
        let line: Vec<String> = cw
            .weights()
            .iter()
            .flat_map(|c| [format!("{:?}", c.re), format!("{:?}", c.im)])
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

// ---------------------------------------------------------------------------
// Exhaustive search
// ---------------------------------------------------------------------------

/// Outcome of a beam selection.
#[derive(Debug, Clone, PartialEq)]
pub struct BfSelection {
    pub tx_weights: BeamformingVector,
    pub rx_weights: BeamformingVector,
    pub tx_index: Option<usize>,
    pub rx_index: Option<usize>,
    /// Metric (dB) the selection was based on.
    pub metric_db: f64,
    pub timestamp_s: f64,
}

/// Argmax over an `n_tx x n_rx` metric table evaluated lazily.
///
/// Ties keep the lexicographically smallest `(tx, rx)`; NaN never wins.
/// Returns `(tx, rx, metric)`.
pub fn argmax_pair<F>(n_tx: usize, n_rx: usize, mut metric: F) -> (usize, usize, f64)
where
    F: FnMut(usize, usize) -> f64,
{
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..n_tx {
        for j in 0..n_rx {
            let m = metric(i, j);
            let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
            match best {
                Some((_, _, b)) if m <= b => {}
                _ => best = Some((i, j, m)),
            }
        }
    }
    best.unwrap_or((0, 0, f64::NEG_INFINITY))
}

/// Evaluates `link_eval(tx_index, rx_index)` for every codeword pair and
/// returns the best pair.
pub fn exhaustive_search<F>(tx_cb: &Codebook, rx_cb: &Codebook, link_eval: F) -> Result<BfSelection>
where
    F: FnMut(usize, usize) -> f64,
{
    if tx_cb.is_empty() || rx_cb.is_empty() {
        return Err(Error::InvalidParameter(
            "exhaustive search needs non-empty codebooks".into(),
        ));
    }
    let (i, j, m) = argmax_pair(tx_cb.len(), rx_cb.len(), link_eval);
    Ok(BfSelection {
        tx_weights: tx_cb.codewords[i].clone(),
        rx_weights: rx_cb.codewords[j].clone(),
        tx_index: Some(i),
        rx_index: Some(j),
        metric_db: m,
        timestamp_s: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gain(h: &ChannelMatrix, tx: &BeamformingVector, rx: &BeamformingVector) -> f64 {
        h.mean_gain(rx.weights(), tx.weights()).sqrt()
    }

    #[test]
    fn rank_one_channel() {
        let a = vec![c(1.0, 0.5), c(-0.3, 2.0), c(0.0, -1.0)];
        let b = vec![c(0.5, 0.5), c(1.0, -1.0)];
        // H = a b^H
        let mut e = Vec::new();
        for ai in &a {
            for bj in &b {
                e.push(ai * bj.conj());
            }
        }
        let h = ChannelMatrix::from_rows(3, 2, e);
        let (tx, rx) = svd_beamforming(&h).unwrap();
        let sigma = l2_norm(&a) * l2_norm(&b);
        assert!((gain(&h, &tx, &rx) - sigma).abs() < 1e-9 * sigma);
        // tx parallel to b, rx parallel to a
        let na = l2_norm(&a);
        let pa: Complex64 = rx
            .weights()
            .iter()
            .zip(&a)
            .map(|(x, y)| x.conj() * y / na)
            .sum();
        assert!((pa.norm() - 1.0).abs() < 1e-9);
        let nb = l2_norm(&b);
        let pb: Complex64 = tx
            .weights()
            .iter()
            .zip(&b)
            .map(|(x, y)| x.conj() * y / nb)
            .sum();
        assert!((pb.norm() - 1.0).abs() < 1e-9);
        assert_eq!(tx.origin, BfOrigin::Svd);
    }

    #[test]
    fn identity_channel_gain_is_one() {
        let h = ChannelMatrix::from_rows(
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        );
        let (tx, rx) = svd_beamforming(&h).unwrap();
        assert!((gain(&h, &tx, &rx) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_start_orthogonal_to_dominant() {
        // dominant direction (1, -1) is orthogonal to the uniform start
        let h = ChannelMatrix::from_rows(1, 2, vec![c(2.0, 0.0), c(-2.0, 0.0)]);
        let (tx, rx) = svd_beamforming(&h).unwrap();
        assert!((gain(&h, &tx, &rx) - 8f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn zero_channel_is_degenerate() {
        let h = ChannelMatrix::from_rows(2, 2, vec![c(0.0, 0.0); 4]);
        assert!(matches!(
            svd_beamforming(&h),
            Err(Error::DegenerateChannel(_))
        ));
    }

    #[test]
    fn phase_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = (0..12)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let h = ChannelMatrix::from_rows(3, 4, e);
        let (tx, rx) = svd_beamforming(&h).unwrap();
        for v in [&tx, &rx] {
            let big = v
                .weights()
                .iter()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap();
            assert!(big.im.abs() < 1e-12 && big.re > 0.0);
            assert!((l2_norm(v.weights()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn half_power_offsets() {
        for n in [2, 4, 8, 16] {
            let d = half_power_offset(n);
            assert!((10.0 * ula_power(n, d).log10() + 10.0 * 2f64.log10()).abs() < 1e-9);
        }
    }

    #[test]
    fn single_element_codebook() {
        let cb = generate_codebook(&ArrayConfig::new(1, 1).unwrap());
        assert_eq!(cb.len(), 1);
        assert!((cb.codewords[0].weights()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(cb.directions[0], Some(Direction::boresight()));
    }

    #[test]
    fn ula_crossovers() {
        for (m, n) in [(1, 4), (4, 1)] {
            let cb = generate_codebook(&ArrayConfig::new(m, n).unwrap());
            assert_eq!(cb.len(), 5);
            let x = measure_crossovers(&cb);
            assert_eq!(x.len(), 4);
            for c in x {
                assert!((c.level_db + 3.0).abs() < 0.2, "{c:?}");
            }
        }
    }

    #[test]
    fn codeword_count_is_deterministic() {
        let a = ArrayConfig::new(8, 8).unwrap();
        let cb = generate_codebook(&a);
        let g = cb.grid.as_ref().unwrap();
        assert_eq!(cb.len(), g.psi_v.len() * g.psi_h.len());
        assert_eq!(cb.len(), 81);
        assert_eq!(cb, generate_codebook(&a));
        for w in &cb.codewords {
            for x in w.weights() {
                assert!((x.norm() - 1.0 / 8.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn visible_codewords_are_steering_vectors() {
        let a = ArrayConfig::new(4, 4).unwrap();
        let cb = generate_codebook(&a);
        let mut visible = 0;
        for (w, d) in cb.codewords.iter().zip(&cb.directions) {
            if let Some(d) = d {
                visible += 1;
                let s = crate::array::steering_vector(&a, *d);
                for (x, y) in w.weights().iter().zip(s.weights()) {
                    assert!((x - y).norm() < 1e-9);
                }
            }
        }
        assert!(visible > 0);
    }

    #[test]
    fn load_simple_codebook() {
        let cb = load_codebook("# pair\n1 2 1\n1 0 1 0\n".as_bytes()).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert_eq!(cb.len(), 1);
        assert!((cb.codewords[0].weights()[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((cb.codewords[0].weights()[1] - c(s, 0.0)).norm() < 1e-15);
    }

    fn err_line(s: &str) -> usize {
        match load_codebook(s.as_bytes()) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_errors_name_lines() {
        assert_eq!(err_line("1 2 1\n1 0 1\n"), 2);
        assert_eq!(err_line("1 2 0\n"), 1);
        assert_eq!(err_line("1 2 1\n1 0 x 0\n"), 2);
        assert_eq!(err_line("1 2 1\n0.5 0 0.5 0\n"), 2);
        assert_eq!(err_line("1 2 2\n1 0 1 0\n"), 2);
        assert_eq!(err_line("# nothing\n"), 1);
    }

    #[test]
    fn codebook_round_trip() {
        let cb = generate_codebook(&ArrayConfig::new(4, 4).unwrap());
        let back = load_codebook(write_codebook(&cb).as_bytes()).unwrap();
        assert_eq!(back.len(), cb.len());
        for (a, b) in cb.codewords.iter().zip(&back.codewords) {
            for (x, y) in a.weights().iter().zip(b.weights()) {
                assert!((x - y).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn search_tie_break() {
        let table = [[3.0, 7.0], [7.0, 2.0]];
        let cb = generate_codebook(&ArrayConfig::new(1, 2).unwrap());
        let cb2 = Codebook {
            codewords: cb.codewords[..2].to_vec(),
            directions: cb.directions[..2].to_vec(),
            grid: None,
            ..cb.clone()
        };
        let mut calls = 0;
        let sel = exhaustive_search(&cb2, &cb2, |i, j| {
            calls += 1;
            table[i][j]
        })
        .unwrap();
        assert_eq!(
            (sel.tx_index, sel.rx_index, sel.metric_db),
            (Some(0), Some(1), 7.0)
        );
        assert_eq!(calls, 4);
    }

    #[test]
    fn search_single_pair() {
        let cb = generate_codebook(&ArrayConfig::new(1, 1).unwrap());
        let sel = exhaustive_search(&cb, &cb, |_, _| -12.0).unwrap();
        assert_eq!((sel.tx_index, sel.rx_index), (Some(0), Some(0)));
    }

    #[test]
    fn nan_never_wins() {
        let (i, j, m) = argmax_pair(1, 3, |_, j| if j == 0 { f64::NAN } else { j as f64 });
        assert_eq!((i, j, m), (0, 2, 2.0));
    }

    proptest! {
        #[test]
        fn argmax_matches_table(table in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 8), 8),
                                scale in 0.01f64..100.0) {
            let (i, j, m) = argmax_pair(8, 8, |i, j| table[i][j]);
            // brute-force oracle
            let mut best = (0, 0);
            for a in 0..8 {
                for b in 0..8 {
                    if table[a][b] > table[best.0][best.1] {
                        best = (a, b);
                    }
                }
            }
            prop_assert_eq!((i, j), best);
            for row in &table {
                for v in row {
                    prop_assert!(m >= *v);
                }
            }
            let (i2, j2, _) = argmax_pair(8, 8, |i, j| table[i][j] * scale);
            prop_assert_eq!((i2, j2), (i, j));
        }
    }
}
