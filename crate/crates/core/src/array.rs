//! Uniform planar arrays and their steered response (element pattern times
//! array factor).
//!
//! Elements sit in the local y-z plane and radiate toward local +x. Element
//! `(m, n)` (row `m` along z, column `n` along y) has index `m * cols + n`
//! and position `(0, n * d_h, m * d_v)` in wavelengths.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::element::ElementPattern;
use crate::error::{Error, Result};
use crate::geometry::{dot, Direction, Orientation, Vec3};

pub const DEFAULT_SPACING_LAMBDA: f64 = 0.5;

/// Single-panel, single-polarization uniform planar array.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    pub spacing_v: f64,
    pub spacing_h: f64,
    pub element: ElementPattern,
    pub orientation: Orientation,
    /// Array reference position in meters (global frame).
    pub position: Vec3,
}

impl ArrayConfig {
    /// `rows x cols` isotropic array at half-wavelength spacing, unrotated,
    /// at the origin.
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        let a = ArrayConfig {
            rows,
            cols,
            spacing_v: DEFAULT_SPACING_LAMBDA,
            spacing_h: DEFAULT_SPACING_LAMBDA,
            element: ElementPattern::Isotropic,
            orientation: Orientation::default(),
            position: [0.0; 3],
        };
        a.validate()?;
        Ok(a)
    }

    pub fn with_spacing(mut self, spacing_v: f64, spacing_h: f64) -> Result<Self> {
        self.spacing_v = spacing_v;
        self.spacing_h = spacing_h;
        self.validate()?;
        Ok(self)
    }

    pub fn with_element(mut self, element: ElementPattern) -> Self {
        self.element = element;
        self
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_position(mut self, position: Vec3) -> Self {
        self.position = position;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "array must have at least one row and column, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.spacing_v > 0.0 && self.spacing_h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "element spacing must be positive, got v={} h={}",
                self.spacing_v, self.spacing_h
            )));
        }
        Ok(())
    }

    pub fn num_elements(&self) -> usize {
        self.rows * self.cols
    }

    /// Element positions in wavelengths, local frame, row-major.
    pub fn element_positions(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.num_elements());
        for m in 0..self.rows {
            for n in 0..self.cols {
                out.push([0.0, n as f64 * self.spacing_h, m as f64 * self.spacing_v]);
            }
        }
        out
    }

    /// Per-element phasors `exp(+j 2 pi <u, p>)` for a local direction.
    pub fn spatial_signature(&self, d_local: Direction) -> Vec<Complex64> {
        let u = d_local.unit_vector();
        self.element_positions()
            .into_iter()
            .map(|p| Complex64::from_polar(1.0, 2.0 * PI * dot(u, p)))
            .collect()
    }
}

/// Where a beamforming vector came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BfOrigin {
    Svd,
    Codebook(usize),
    Steering(Direction),
    Custom,
}

/// Unit-norm complex weights, one per element in lattice order.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingVector {
    weights: Vec<Complex64>,
    pub origin: BfOrigin,
}

pub const UNIT_NORM_TOL: f64 = 1e-12;

impl BeamformingVector {
    /// Wraps weights that must already be unit-norm (within 1e-12).
    pub fn new(weights: Vec<Complex64>, origin: BfOrigin) -> Result<Self> {
        let n = l2_norm(&weights);
        if weights.is_empty() || (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "beamforming vector must have unit norm, got {n}"
            )));
        }
        Ok(BeamformingVector { weights, origin })
    }

    /// Scales `weights` to unit norm.
    pub fn normalized(mut weights: Vec<Complex64>, origin: BfOrigin) -> Result<Self> {
        let n = l2_norm(&weights);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero or non-finite weight vector".into(),
            ));
        }
        weights.iter_mut().for_each(|w| *w /= n);
        Ok(BeamformingVector { weights, origin })
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_weights(self) -> Vec<Complex64> {
        self.weights
    }
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Phase-only weights steering the array toward `d_local`.
pub fn steering_vector(a: &ArrayConfig, d_local: Direction) -> BeamformingVector {
    let scale = 1.0 / (a.num_elements() as f64).sqrt();
    let weights = a
        .spatial_signature(d_local)
        .into_iter()
        .map(|s| s * scale)
        .collect();
    BeamformingVector {
        weights,
        origin: BfOrigin::Steering(d_local),
    }
}

/// Complex far-field amplitude `g_elem(d) * sum_e conj(w_e) exp(+j 2 pi <u, p_e>)`.
pub fn array_response(a: &ArrayConfig, w: &BeamformingVector, d_local: Direction) -> Complex64 {
    let af: Complex64 = w
        .weights()
        .iter()
        .zip(a.spatial_signature(d_local))
        .map(|(wi, s)| wi.conj() * s)
        .sum();
    af * a.element.field_amplitude(d_local)
}

/// Power gain `|array_response|^2` in dB.
pub fn array_gain_db(a: &ArrayConfig, w: &BeamformingVector, d_local: Direction) -> f64 {
    10.0 * array_response(a, w, d_local).norm_sqr().log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(ArrayConfig::new(0, 4).is_err());
        assert!(ArrayConfig::new(4, 0).is_err());
        assert!(ArrayConfig::new(2, 2)
            .unwrap()
            .with_spacing(0.0, 0.5)
            .is_err());
    }

    #[test]
    fn positions_follow_lattice() {
        let a = ArrayConfig::new(2, 3)
            .unwrap()
            .with_spacing(0.7, 0.4)
            .unwrap();
        let p = a.element_positions();
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], [0.0, 0.0, 0.0]);
        assert!((p[2][1] - 0.8).abs() < 1e-15);
        assert!((p[4][1] - 0.4).abs() < 1e-15 && (p[4][2] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn steering_boresight_pair() {
        let a = ArrayConfig::new(1, 2).unwrap();
        let w = steering_vector(&a, Direction::new(90.0, 0.0));
        let s = 1.0 / 2f64.sqrt();
        assert!(close(w.weights()[0], c(s, 0.0), 1e-12));
        assert!(close(w.weights()[1], c(s, 0.0), 1e-12));
    }

    #[test]
    fn steering_endfire_pair() {
        let a = ArrayConfig::new(1, 2).unwrap();
        let w = steering_vector(&a, Direction::new(90.0, 90.0));
        let s = 1.0 / 2f64.sqrt();
        assert!(close(w.weights()[0], c(s, 0.0), 1e-12));
        assert!(close(w.weights()[1], c(-s, 0.0), 1e-12));
    }

    #[test]
    fn steering_2x2_elevated() {
        // phase(m, n) = 2 pi (0.5 n sin60 sin0 + 0.5 m cos60) = m * pi / 2
        let a = ArrayConfig::new(2, 2).unwrap();
        let w = steering_vector(&a, Direction::new(60.0, 0.0));
        for m in 0..2 {
            for n in 0..2 {
                let want = Complex64::from_polar(0.5, m as f64 * PI / 2.0);
                assert!(close(w.weights()[m * 2 + n], want, 1e-12));
            }
        }
    }

    #[test]
    fn self_gain_8x8() {
        let a = ArrayConfig::new(8, 8).unwrap();
        let w = steering_vector(&a, Direction::boresight());
        let g = array_gain_db(&a, &w, Direction::boresight());
        assert!((g - 10.0 * 64f64.log10()).abs() < 1e-9);
        assert!((g - 18.061_799_739_838_87).abs() < 1e-9);
    }

    #[test]
    fn single_element_is_element_gain() {
        let a = ArrayConfig::new(1, 1)
            .unwrap()
            .with_element(ElementPattern::three_gpp());
        let w = BeamformingVector::new(vec![Complex64::from_polar(1.0, 0.7)], BfOrigin::Custom)
            .unwrap();
        let d = Direction::new(80.0, 30.0);
        let r = array_response(&a, &w, d);
        assert!((r.norm() - a.element.field_amplitude(d)).abs() < 1e-12);
    }

    #[test]
    fn unit_norm_enforced() {
        assert!(BeamformingVector::new(vec![c(1.0, 1.0)], BfOrigin::Custom).is_err());
        let w = BeamformingVector::normalized(vec![c(1.0, 1.0)], BfOrigin::Custom).unwrap();
        assert!((l2_norm(w.weights()) - 1.0).abs() < 1e-15);
    }

    fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> BeamformingVector {
        let w = (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        BeamformingVector::normalized(w, BfOrigin::Custom).unwrap()
    }

    fn radiated_power(a: &ArrayConfig, w: &BeamformingVector, n: usize) -> f64 {
        let dt = PI / n as f64;
        let dp = 2.0 * PI / (2 * n) as f64;
        let mut s = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) * dt;
            for j in 0..2 * n {
                let p = -PI + (j as f64 + 0.5) * dp;
                let d = Direction::new(t.to_degrees(), p.to_degrees());
                s += array_response(a, w, d).norm_sqr() * t.sin();
            }
        }
        s * dt * dp / (4.0 * PI)
    }

    fn sinc_oracle(a: &ArrayConfig, w: &BeamformingVector) -> f64 {
        // isotropic sphere average of exp(j k.(p_e - p_f)) is sin(x)/x
        let pos = a.element_positions();
        let mut s = Complex64::new(0.0, 0.0);
        for (e, pe) in pos.iter().enumerate() {
            for (f, pf) in pos.iter().enumerate() {
                let d = crate::geometry::norm(crate::geometry::sub(*pe, *pf));
                let x = 2.0 * PI * d;
                let k = if x == 0.0 { 1.0 } else { x.sin() / x };
                s += w.weights()[e].conj() * w.weights()[f] * k;
            }
        }
        s.re
    }

    #[test]
    fn power_conservation_linear_arrays() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, n) in [(1, 4), (4, 1), (1, 8)] {
            let a = ArrayConfig::new(m, n).unwrap();
            for _ in 0..3 {
                let w = random_unit(a.num_elements(), &mut rng);
                let p = radiated_power(&a, &w, 180);
                assert!((p - 1.0).abs() < 1e-2, "{m}x{n}: {p}");
            }
        }
    }

    #[test]
    fn planar_radiated_power_matches_sinc_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = ArrayConfig::new(3, 3).unwrap();
        let w = random_unit(9, &mut rng);
        let p = radiated_power(&a, &w, 200);
        let o = sinc_oracle(&a, &w);
        assert!((p - o).abs() < 1e-3, "{p} vs {o}");
    }

    proptest! {
        #[test]
        fn steering_self_gain_is_max(t in 0.0f64..=180.0, p in -180.0f64..=180.0,
                                     t2 in 0.0f64..=180.0, p2 in -180.0f64..=180.0) {
            let a = ArrayConfig::new(4, 4).unwrap();
            let d = Direction::new(t, p);
            let w = steering_vector(&a, d);
            let peak = array_response(&a, &w, d).norm();
            prop_assert!((peak - 4.0).abs() < 1e-9);
            prop_assert!(array_response(&a, &w, Direction::new(t2, p2)).norm() <= peak + 1e-9);
        }

        #[test]
        fn response_is_conjugate_linear(s in -3.0f64..3.0, ph in -PI..PI, t in 0.0f64..180.0) {
            let a = ArrayConfig::new(2, 3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let w1 = random_unit(6, &mut rng);
            let w2 = random_unit(6, &mut rng);
            let k = Complex64::from_polar(s, ph);
            let d = Direction::new(t, 20.0);
            let combo: Vec<Complex64> = w1.weights().iter().zip(w2.weights())
                .map(|(x, y)| *x + k * *y).collect();
            // evaluate the unnormalized combination directly
            let direct: Complex64 = combo.iter().zip(a.spatial_signature(d))
                .map(|(w, sv)| w.conj() * sv).sum();
            let split = array_response(&a, &w1, d) + k.conj() * array_response(&a, &w2, d);
            prop_assert!((direct - split).norm() < 1e-9);
        }
    }
}
