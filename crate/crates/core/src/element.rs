//! Parametric antenna element directivity patterns.
//!
//! All patterns are evaluated in the array-local frame where boresight is
//! `(theta = 90, phi = 0)`. Values are directivities in dBi; the field
//! amplitude applied per element is `10^(D/20)` (vertical polarization only).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Direction;

/// Linear intensity floor used where a cosine factor reaches zero.
pub const INTENSITY_FLOOR: f64 = 1e-30;

/// Vertical/horizontal 3 dB beamwidth of the 3GPP element, degrees.
pub const THREE_GPP_BEAMWIDTH_DEG: f64 = 65.0;
/// Vertical side-lobe attenuation of the 3GPP element, dB.
pub const THREE_GPP_SLA_V_DB: f64 = 30.0;
/// Maximum attenuation of the 3GPP element, dB.
pub const THREE_GPP_A_MAX_DB: f64 = 30.0;
/// Peak directional gain of the 3GPP element, dBi.
pub const THREE_GPP_G_MAX_DBI: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ElementPattern {
    #[default]
    Isotropic,
    ThreeGpp {
        theta_3db_deg: f64,
        phi_3db_deg: f64,
        sla_v_db: f64,
        a_max_db: f64,
        g_max_dbi: f64,
    },
    Cosine {
        beamwidth_h_deg: f64,
        beamwidth_v_deg: f64,
        alpha_h: f64,
        alpha_v: f64,
        g_max_dbi: f64,
    },
}

impl ElementPattern {
    /// 3GPP TR 38.901 element with the standard constants.
    pub fn three_gpp() -> Self {
        ElementPattern::ThreeGpp {
            theta_3db_deg: THREE_GPP_BEAMWIDTH_DEG,
            phi_3db_deg: THREE_GPP_BEAMWIDTH_DEG,
            sla_v_db: THREE_GPP_SLA_V_DB,
            a_max_db: THREE_GPP_A_MAX_DB,
            g_max_dbi: THREE_GPP_G_MAX_DBI,
        }
    }

    /// Cosine element with exponents from the beamwidths and its peak gain
    /// normalized by numerical integration of the radiated power.
    pub fn cosine(beamwidth_h_deg: f64, beamwidth_v_deg: f64) -> Result<Self> {
        let shape = ElementPattern::Cosine {
            beamwidth_h_deg,
            beamwidth_v_deg,
            alpha_h: cosine_exponent(beamwidth_h_deg)?,
            alpha_v: cosine_exponent(beamwidth_v_deg)?,
            g_max_dbi: 0.0,
        };
        let g = max_gain_from_integration(&shape)?;
        match shape {
            ElementPattern::Cosine {
                alpha_h, alpha_v, ..
            } => Ok(ElementPattern::Cosine {
                beamwidth_h_deg,
                beamwidth_v_deg,
                alpha_h,
                alpha_v,
                g_max_dbi: g,
            }),
            _ => unreachable!(),
        }
    }

    /// Peak directivity in dBi.
    pub fn max_gain_dbi(&self) -> f64 {
        match *self {
            ElementPattern::Isotropic => 0.0,
            ElementPattern::ThreeGpp { g_max_dbi, .. } => g_max_dbi,
            ElementPattern::Cosine { g_max_dbi, .. } => g_max_dbi,
        }
    }

    /// Directivity in dBi toward `d` (array-local frame).
    pub fn directivity_dbi(&self, d: Direction) -> f64 {
        match *self {
            ElementPattern::Isotropic => 0.0,
            ElementPattern::ThreeGpp { g_max_dbi, .. } => {
                g_max_dbi - self.three_gpp_attenuation_db(d)
            }
            ElementPattern::Cosine { g_max_dbi, .. } => {
                g_max_dbi + 10.0 * self.shape_intensity(d).log10()
            }
        }
    }

    /// Field amplitude `10^(D/20)`.
    pub fn field_amplitude(&self, d: Direction) -> f64 {
        10f64.powf(self.directivity_dbi(d) / 20.0)
    }

    fn three_gpp_attenuation_db(&self, d: Direction) -> f64 {
        match *self {
            ElementPattern::ThreeGpp {
                theta_3db_deg,
                phi_3db_deg,
                sla_v_db,
                a_max_db,
                ..
            } => {
                let v = 12.0 * ((d.theta_deg - 90.0) / theta_3db_deg).powi(2);
                let h = 12.0 * (d.phi_deg / phi_3db_deg).powi(2);
                let vert = v.min(sla_v_db);
                let horiz = h.min(a_max_db);
                (vert + horiz).min(a_max_db)
            }
            _ => 0.0,
        }
    }

    /// Linear power intensity normalized to a unit peak.
    pub fn shape_intensity(&self, d: Direction) -> f64 {
        match *self {
            ElementPattern::Isotropic => 1.0,
            ElementPattern::ThreeGpp { .. } => 10f64.powf(-self.three_gpp_attenuation_db(d) / 10.0),
            ElementPattern::Cosine {
                alpha_h, alpha_v, ..
            } => {
                let h = (d.phi_deg.to_radians() / 2.0).cos().max(0.0);
                let v = ((90.0 - d.theta_deg).to_radians() / 2.0).cos().max(0.0);
                let field = h.powf(alpha_h) * v.powf(alpha_v);
                (field * field).max(INTENSITY_FLOOR)
            }
        }
    }
}

/// Exponent of a cosine cut whose 3 dB beamwidth is `beamwidth_deg`.
pub fn cosine_exponent(beamwidth_deg: f64) -> Result<f64> {
    if !(beamwidth_deg > 0.0 && beamwidth_deg < 360.0) {
        return Err(Error::InvalidParameter(format!(
            "cosine beamwidth must lie in (0, 360) degrees, got {beamwidth_deg}"
        )));
    }
    let c = (beamwidth_deg / 4.0).to_radians().cos();
    Ok(-3.0 / (20.0 * c.log10()))
}

const QUAD_START_THETA: usize = 64;
const QUAD_MAX_LEVELS: usize = 7;
const QUAD_REL_TOL: f64 = 1e-7;

/// Peak gain `10 log10(4 pi / integral of u sin(theta))` of the pattern's
/// normalized shape.
///
/// Midpoint rule on a `n x 2n` grid, doubled until the relative change of the
/// integral drops below 1e-7 (about 4e-7 dB).
pub fn max_gain_from_integration(p: &ElementPattern) -> Result<f64> {
    let mut n = QUAD_START_THETA;
    let mut prev = radiated_power(p, n);
    for _ in 0..QUAD_MAX_LEVELS {
        n *= 2;
        let cur = radiated_power(p, n);
        if ((cur - prev) / cur).abs() < QUAD_REL_TOL {
            return Ok(10.0 * (4.0 * PI / cur).log10());
        }
        prev = cur;
    }
    Err(Error::Numerical(format!(
        "directivity integral did not converge at {n} inclination samples"
    )))
}

fn radiated_power(p: &ElementPattern, n_theta: usize) -> f64 {
    let n_phi = 2 * n_theta;
    let dt = 180.0 / n_theta as f64;
    let dp = 360.0 / n_phi as f64;
    let mut total = 0.0;
    for i in 0..n_theta {
        let theta = (i as f64 + 0.5) * dt;
        let st = theta.to_radians().sin();
        let mut row = 0.0;
        for j in 0..n_phi {
            let phi = -180.0 + (j as f64 + 0.5) * dp;
            row += p.shape_intensity(Direction::new(theta, phi));
        }
        total += row * st;
    }
    total * dt.to_radians() * dp.to_radians()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_gpp_points() {
        let p = ElementPattern::three_gpp();
        assert!((p.directivity_dbi(Direction::new(90.0, 0.0)) - 8.0).abs() < 1e-9);
        assert!((p.directivity_dbi(Direction::new(90.0, 65.0)) + 4.0).abs() < 1e-9);
        assert!((p.directivity_dbi(Direction::new(90.0, 180.0)) + 22.0).abs() < 1e-9);
    }

    #[test]
    fn isotropic_is_flat() {
        for (t, p) in [(0.0, 0.0), (45.0, 170.0), (180.0, -90.0)] {
            assert_eq!(
                ElementPattern::Isotropic.directivity_dbi(Direction::new(t, p)),
                0.0
            );
        }
        let g = max_gain_from_integration(&ElementPattern::Isotropic).unwrap();
        assert!(g.abs() < 1e-6, "{g}");
    }

    #[test]
    fn cosine_exponent_values() {
        let a = cosine_exponent(120.0).unwrap();
        assert!((a - 2.401176833895329).abs() < 1e-9, "{a}");
        let a = cosine_exponent(180.0).unwrap();
        assert!((a - 0.9965784284662088).abs() < 1e-9, "{a}");
        // vanishes only logarithmically as the beamwidth approaches 360
        let wide = cosine_exponent(359.9999).unwrap();
        assert!(wide > 0.0 && wide < 0.03, "{wide}");
    }

    #[test]
    fn cosine_exponent_rejects_out_of_range() {
        for bw in [0.0, -10.0, 360.0, 400.0, f64::NAN] {
            assert!(matches!(
                cosine_exponent(bw),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn cosine_single_cut_is_3db_down_at_half_beamwidth() {
        for bw in [30.0, 65.0, 120.0, 180.0, 300.0] {
            let a = cosine_exponent(bw).unwrap();
            let cut = 20.0 * a * ((bw / 2.0).to_radians() / 2.0).cos().log10();
            assert!((cut + 3.0).abs() < 1e-9, "bw {bw}: {cut}");
        }
    }

    #[test]
    fn cosine_120_peak_gain() {
        let p = ElementPattern::cosine(120.0, 120.0).unwrap();
        let g = p.max_gain_dbi();
        assert!((g - 5.7).abs() < 0.1, "{g}");
        assert!((p.directivity_dbi(Direction::boresight()) - g).abs() < 1e-12);
    }

    #[test]
    fn cosine_gain_falls_with_beamwidth() {
        let gains: Vec<f64> = [60.0, 120.0, 180.0, 240.0]
            .iter()
            .map(|&bw| ElementPattern::cosine(bw, bw).unwrap().max_gain_dbi())
            .collect();
        assert!(gains.windows(2).all(|w| w[0] > w[1]), "{gains:?}");
        assert!(gains[3] > 0.0 && gains[3] < 3.0, "{gains:?}");
    }

    #[test]
    fn cosine_back_null_hits_floor() {
        let p = ElementPattern::cosine(120.0, 120.0).unwrap();
        let d = p.directivity_dbi(Direction::new(90.0, 180.0));
        assert!((d - (p.max_gain_dbi() - 300.0)).abs() < 1e-9);
    }

    /// Trapezoid rule on a different grid than the implementation.
    fn normalization_oracle(p: &ElementPattern) -> f64 {
        let (nt, np) = (721, 1441);
        let dt = PI / (nt - 1) as f64;
        let dp = 2.0 * PI / (np - 1) as f64;
        let mut sum = 0.0;
        for i in 0..nt {
            let t = i as f64 * dt;
            let wt = if i == 0 || i == nt - 1 { 0.5 } else { 1.0 };
            for j in 0..np {
                let ph = -PI + j as f64 * dp;
                let wp = if j == 0 || j == np - 1 { 0.5 } else { 1.0 };
                let d = Direction::new(t.to_degrees(), ph.to_degrees());
                sum += wt * wp * 10f64.powf(p.directivity_dbi(d) / 10.0) * t.sin();
            }
        }
        sum * dt * dp / (4.0 * PI)
    }

    #[test]
    fn cosine_power_normalization() {
        for (h, v) in [(120.0, 120.0), (90.0, 60.0), (200.0, 100.0)] {
            let p = ElementPattern::cosine(h, v).unwrap();
            let total = normalization_oracle(&p);
            assert!((total - 1.0).abs() < 1e-3, "({h},{v}) -> {total}");
        }
    }

    proptest! {
        #[test]
        fn bounded_by_peak(t in 0.0f64..=180.0, p in -180.0f64..=180.0) {
            let d = Direction::new(t, p);
            let three = ElementPattern::three_gpp();
            let v = three.directivity_dbi(d);
            prop_assert!((8.0 - 30.0 - 1e-9..=8.0 + 1e-9).contains(&v));
            let cos = ElementPattern::Cosine {
                beamwidth_h_deg: 120.0, beamwidth_v_deg: 120.0,
                alpha_h: cosine_exponent(120.0).unwrap(),
                alpha_v: cosine_exponent(120.0).unwrap(),
                g_max_dbi: 5.7,
            };
            prop_assert!(cos.directivity_dbi(d) <= 5.7 + 1e-9);
        }

        #[test]
        fn three_gpp_symmetry(t in 0.0f64..=180.0, p in -180.0f64..=180.0) {
            let e = ElementPattern::three_gpp();
            let base = e.directivity_dbi(Direction::new(t, p));
            prop_assert!((base - e.directivity_dbi(Direction::new(t, -p))).abs() < 1e-12);
            prop_assert!((base - e.directivity_dbi(Direction::new(180.0 - t, p))).abs() < 1e-9);
        }
    }
}
