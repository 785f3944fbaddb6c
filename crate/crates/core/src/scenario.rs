//! Synthetic two-cell scenario: a desk-scale stand-in for a measured
//! parking-lot ray trace.
//!
//! Two wall-mounted BSs face +x. UT2 stands still; UT1 walks to a waypoint
//! and then drives away along a polyline. Every link carries a free-space
//! LOS ray plus a ground reflection built with the image method. Scripted
//! blockage intervals empty a link's ray list.

use std::f64::consts::PI;
use std::path::PathBuf;

use crate::array::ArrayConfig;
use crate::channel::{Ray, RayTraceSet, TraceLink};
use crate::element::ElementPattern;
use crate::engine::{
    Association, BfScheme, CodebookSource, Node, NodeRole, ScenarioConfig, DEFAULT_CARRIER_HZ,
    DEFAULT_SAMPLING_PERIOD_S,
};
use crate::error::{Error, Result};
use crate::geometry::{norm, sub, Direction, Orientation, Vec3};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const WALK_SPEED_M_S: f64 = 1.2;
pub const DRIVE_SPEED_M_S: f64 = 4.2;
pub const BS_DOWNTILT_DEG: f64 = 12.0;

/// `-20 log10(4 pi d f / c)`.
pub fn free_space_gain_db(distance_m: f64, freq_hz: f64) -> f64 {
    -20.0 * (4.0 * PI * distance_m * freq_hz / SPEED_OF_LIGHT).log10()
}

/// Direct ray between two points.
pub fn los_ray(tx: Vec3, rx: Vec3, freq_hz: f64) -> Ray {
    let d = sub(rx, tx);
    let dist = norm(d);
    Ray {
        delay_s: dist / SPEED_OF_LIGHT,
        path_gain_db: free_space_gain_db(dist, freq_hz),
        phase_rad: 0.0,
        aod: Direction::from_vector(d),
        aoa: Direction::from_vector([-d[0], -d[1], -d[2]]),
        doppler_hz: None,
    }
}

/// Specular reflection off the ground plane `z = 0` with amplitude
/// coefficient `-|gamma|`.
pub fn ground_reflection_ray(tx: Vec3, rx: Vec3, freq_hz: f64, gamma: f64) -> Ray {
    let image = [tx[0], tx[1], -tx[2]];
    let d = sub(rx, image);
    let dist = norm(d);
    Ray {
        delay_s: dist / SPEED_OF_LIGHT,
        path_gain_db: free_space_gain_db(dist, freq_hz) + 20.0 * gamma.abs().log10(),
        phase_rad: PI,
        aod: Direction::from_vector([d[0], d[1], -d[2]]),
        aoa: Direction::from_vector([-d[0], -d[1], -d[2]]),
        doppler_hz: None,
    }
}

/// Piecewise-linear path traversed at per-leg speeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start: Vec3,
    /// `(waypoint, speed in m/s)` for each leg.
    pub legs: Vec<(Vec3, f64)>,
}

impl Trajectory {
    pub fn fixed(p: Vec3) -> Self {
        Trajectory {
            start: p,
            legs: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut prev = self.start;
        for (i, &(p, v)) in self.legs.iter().enumerate() {
            if norm(sub(p, prev)) <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "trajectory leg {i} has zero length"
                )));
            }
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "trajectory leg {i} has speed {v}"
                )));
            }
            prev = p;
        }
        Ok(())
    }

    /// Position at time `t`; the path end is held once reached.
    pub fn position(&self, t: f64) -> Vec3 {
        let mut p = self.start;
        let mut remaining = t.max(0.0);
        for &(q, v) in &self.legs {
            let d = sub(q, p);
            let len = norm(d);
            let dur = len / v;
            if remaining < dur {
                let f = remaining / dur;
                return [p[0] + f * d[0], p[1] + f * d[1], p[2] + f * d[2]];
            }
            remaining -= dur;
            p = q;
        }
        p
    }
}

/// Link `tx -> rx` has no rays for `start_s <= t <= end_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blockage {
    pub tx: String,
    pub rx: String,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub duration_s: f64,
    pub sampling_period_s: f64,
    pub carrier_hz: f64,
    pub bs_positions: [Vec3; 2],
    pub bs_orientations: [Orientation; 2],
    pub bs_rows: usize,
    pub bs_cols: usize,
    pub bs_element: ElementPattern,
    pub ut_rows: usize,
    pub ut_cols: usize,
    pub ut_element: ElementPattern,
    pub ut_bearing_deg: f64,
    pub ut1_path: Trajectory,
    pub ut2_position: Vec3,
    /// Ground reflection amplitude; 0 disables the reflected ray.
    pub ground_gamma: f64,
    pub blockages: Vec<Blockage>,
    pub bf_scheme: BfScheme,
    pub trace_file: PathBuf,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        let tilt = Orientation {
            bearing_deg: 0.0,
            downtilt_deg: BS_DOWNTILT_DEG,
        };
        let h = 1.5;
        let block = |tx: &str, rx: &str, a: f64, b: f64| Blockage {
            tx: tx.into(),
            rx: rx.into(),
            start_s: a,
            end_s: b,
        };
        SyntheticSpec {
            duration_s: 40.0,
            sampling_period_s: DEFAULT_SAMPLING_PERIOD_S,
            carrier_hz: DEFAULT_CARRIER_HZ,
            bs_positions: [[0.0, 0.0, 3.0], [0.0, 40.0, 3.0]],
            bs_orientations: [tilt, tilt],
            bs_rows: 8,
            bs_cols: 8,
            bs_element: ElementPattern::three_gpp(),
            ut_rows: 4,
            ut_cols: 4,
            ut_element: ElementPattern::Isotropic,
            ut_bearing_deg: 180.0,
            ut1_path: Trajectory {
                start: [4.0, -4.0, h],
                legs: vec![
                    ([12.0, 4.0, h], WALK_SPEED_M_S),
                    ([45.0, 4.0, h], DRIVE_SPEED_M_S),
                    ([45.0, 40.0, h], DRIVE_SPEED_M_S),
                    ([80.0, 40.0, h], DRIVE_SPEED_M_S),
                    ([80.0, 75.0, h], DRIVE_SPEED_M_S),
                ],
            },
            ut2_position: [20.0, 30.0, h],
            ground_gamma: 0.3,
            blockages: vec![
                block("BS1", "UT1", 20.2, 20.7),
                block("BS1", "UT1", 30.1, 30.8),
                block("BS2", "UT1", 12.0, 13.0),
                block("BS2", "UT1", 34.0, 40.0),
                block("BS1", "UT2", 25.0, 26.5),
            ],
            bf_scheme: BfScheme::Codebook { period_s: 0.1 },
            trace_file: PathBuf::from("two_cell.qd"),
        }
    }
}

const BS_IDS: [&str; 2] = ["BS1", "BS2"];
const UT_IDS: [&str; 2] = ["UT1", "UT2"];

impl SyntheticSpec {
    pub fn n_samples(&self) -> usize {
        (self.duration_s / self.sampling_period_s + 1e-9).floor() as usize + 1
    }

    fn ut_position(&self, ut: usize, t: f64) -> Vec3 {
        match ut {
            0 => self.ut1_path.position(t),
            _ => self.ut2_position,
        }
    }

    fn blocked(&self, tx: &str, rx: &str, t: f64) -> bool {
        self.blockages
            .iter()
            .any(|b| b.tx == tx && b.rx == rx && t >= b.start_s && t <= b.end_s)
    }

    /// Whether the scripted blockages empty link `tx -> rx` at time `t`.
    pub fn is_blocked(&self, tx: &str, rx: &str, t: f64) -> bool {
        self.blocked(tx, rx, t)
    }
}

/// Builds the configuration and trace for a synthetic two-cell scenario.
pub fn build_synthetic_scenario(spec: &SyntheticSpec) -> Result<(ScenarioConfig, RayTraceSet)> {
    spec.ut1_path.validate()?;
    if !(spec.sampling_period_s > 0.0) || !(spec.duration_s >= 0.0) {
        return Err(Error::InvalidParameter(
            "invalid duration or sampling period".into(),
        ));
    }
    let n = spec.n_samples();
    let t_s = spec.sampling_period_s;

    let mut links = Vec::new();
    for (b, bs) in BS_IDS.iter().enumerate() {
        for (u, ut) in UT_IDS.iter().enumerate() {
            let tx = spec.bs_positions[b];
            let samples = (0..n)
                .map(|k| {
                    let t = k as f64 * t_s;
                    if spec.blocked(bs, ut, t) {
                        return Vec::new();
                    }
                    let rx = spec.ut_position(u, t);
                    let mut rays = vec![los_ray(tx, rx, spec.carrier_hz)];
                    if spec.ground_gamma > 0.0 {
                        rays.push(ground_reflection_ray(
                            tx,
                            rx,
                            spec.carrier_hz,
                            spec.ground_gamma,
                        ));
                    }
                    rays
                })
                .collect();
            links.push(TraceLink {
                tx: bs.to_string(),
                rx: ut.to_string(),
                samples,
            });
        }
    }
    let trace = RayTraceSet {
        sampling_period_s: t_s,
        n_samples: n,
        links,
    };

    let mut nodes = Vec::new();
    for (b, bs) in BS_IDS.iter().enumerate() {
        nodes.push(Node {
            id: bs.to_string(),
            role: NodeRole::Bs,
            array: ArrayConfig::new(spec.bs_rows, spec.bs_cols)?
                .with_element(spec.bs_element)
                .with_orientation(spec.bs_orientations[b])
                .with_position(spec.bs_positions[b]),
            codebook: CodebookSource::Generated,
        });
    }
    for (u, ut) in UT_IDS.iter().enumerate() {
        nodes.push(Node {
            id: ut.to_string(),
            role: NodeRole::Ut,
            array: ArrayConfig::new(spec.ut_rows, spec.ut_cols)?
                .with_element(spec.ut_element)
                .with_orientation(Orientation {
                    bearing_deg: spec.ut_bearing_deg,
                    downtilt_deg: 0.0,
                })
                .with_position(spec.ut_position(u, 0.0)),
            codebook: CodebookSource::Generated,
        });
    }
    let cfg = ScenarioConfig {
        duration_s: spec.duration_s,
        sampling_period_s: t_s,
        carrier_hz: spec.carrier_hz,
        bf_scheme: spec.bf_scheme,
        nodes,
        associations: BS_IDS
            .iter()
            .zip(UT_IDS)
            .map(|(bs, ut)| Association {
                bs: bs.to_string(),
                ut: ut.to_string(),
            })
            .collect(),
        trace_path: spec.trace_file.clone(),
        ..ScenarioConfig::default()
    };
    cfg.validate()?;
    Ok((cfg, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn friis_at_10_m() {
        let g = free_space_gain_db(10.0, 28e9);
        assert!((g + 81.4).abs() < 0.05, "{g}");
        // oracle: wavelength form (lambda / (4 pi d))^2
        let lambda = SPEED_OF_LIGHT / 28e9;
        let lin = (lambda / (4.0 * PI * 10.0)).powi(2);
        assert!((g - 10.0 * lin.log10()).abs() < 1e-9);
    }

    #[test]
    fn los_geometry() {
        let r = los_ray([0.0, 0.0, 3.0], [10.0, 0.0, 3.0], 28e9);
        assert!((r.aod.theta_deg - 90.0).abs() < 1e-12 && r.aod.phi_deg.abs() < 1e-12);
        assert!((r.aoa.phi_deg - 180.0).abs() < 1e-12);
        assert!((r.delay_s - 10.0 / SPEED_OF_LIGHT).abs() < 1e-20);
    }

    #[test]
    fn reflection_is_longer_and_weaker() {
        let (tx, rx) = ([0.0, 0.0, 3.0], [20.0, 0.0, 1.5]);
        let los = los_ray(tx, rx, 28e9);
        let gr = ground_reflection_ray(tx, rx, 28e9, 0.3);
        assert!(gr.delay_s > los.delay_s);
        assert!(gr.path_gain_db < los.path_gain_db - 10.0);
        // departs downward, arrives from below
        assert!(gr.aod.theta_deg > 90.0 && gr.aoa.theta_deg > 90.0);
        let path = (20f64.powi(2) + 4.5f64.powi(2)).sqrt();
        assert!((gr.delay_s * SPEED_OF_LIGHT - path).abs() < 1e-9);
    }

    #[test]
    fn trajectory_speeds() {
        let tr = Trajectory {
            start: [0.0, 0.0, 0.0],
            legs: vec![([1.2, 0.0, 0.0], 1.2), ([1.2, 4.2, 0.0], 4.2)],
        };
        let p = tr.position(0.5);
        assert!((p[0] - 0.6).abs() < 1e-12);
        let p = tr.position(1.5);
        assert!((p[1] - 2.1).abs() < 1e-12);
        assert_eq!(tr.position(100.0), [1.2, 4.2, 0.0]);
        let bad = Trajectory {
            start: [0.0; 3],
            legs: vec![([0.0; 3], 1.0)],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn static_ut_rays_constant_and_blockage_exact() {
        let spec = SyntheticSpec {
            duration_s: 1.0,
            blockages: vec![Blockage {
                tx: "BS1".into(),
                rx: "UT2".into(),
                start_s: 0.2,
                end_s: 0.4,
            }],
            ..SyntheticSpec::default()
        };
        let (cfg, trace) = build_synthetic_scenario(&spec).unwrap();
        assert_eq!(trace.n_samples, 201);
        assert_eq!(cfg.n_samples(), 201);
        let l = trace.link("BS2", "UT2").unwrap();
        assert!(l.samples.iter().all(|s| s == &l.samples[0]));
        let b = trace.link("BS1", "UT2").unwrap();
        for (k, s) in b.samples.iter().enumerate() {
            let t = k as f64 * 0.005;
            assert_eq!(s.is_empty(), (0.2..=0.4).contains(&t), "k={k}");
        }
        trace.validate().unwrap();
    }
}
