//! Angle conventions and array frame rotations.
//!
//! Inclination `theta` is measured from zenith in `[0, 180]` degrees and
//! azimuth `phi` lives in `(-180, 180]`. An unrotated array looks along the
//! global +x axis, i.e. boresight is `(theta = 90, phi = 0)`.
//!
//! An [`Orientation`] applies bearing (yaw about +z) after downtilt (pitch
//! about +y, positive tilts boresight below the horizon). Roll is always 0.

/// Plain 3-vector used for unit directions and positions.
pub type Vec3 = [f64; 3];

const POLE_EPS: f64 = 1e-12;

/// A direction given as (inclination, azimuth) in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub theta_deg: f64,
    pub phi_deg: f64,
}

impl Direction {
    /// Builds a direction, clamping inclination into `[0, 180]` and wrapping
    /// azimuth into `(-180, 180]`.
    pub fn new(theta_deg: f64, phi_deg: f64) -> Self {
        Direction {
            theta_deg: theta_deg.clamp(0.0, 180.0),
            phi_deg: wrap_azimuth(phi_deg),
        }
    }

    pub fn boresight() -> Self {
        Direction::new(90.0, 0.0)
    }

    /// Unit vector `(sinθ cosφ, sinθ sinφ, cosθ)`.
    pub fn unit_vector(&self) -> Vec3 {
        let (st, ct) = self.theta_deg.to_radians().sin_cos();
        let (sp, cp) = self.phi_deg.to_radians().sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Inverse of [`Direction::unit_vector`]. The vector need not be
    /// normalized. At the poles azimuth resolves to 0.
    pub fn from_vector(v: Vec3) -> Self {
        let norm = norm(v);
        if norm == 0.0 {
            return Direction::new(0.0, 0.0);
        }
        let z = (v[2] / norm).clamp(-1.0, 1.0);
        let theta = z.acos().to_degrees();
        let rho = (v[0] * v[0] + v[1] * v[1]).sqrt() / norm;
        let phi = if rho < POLE_EPS {
            0.0
        } else {
            v[1].atan2(v[0]).to_degrees()
        };
        Direction::new(theta, phi)
    }

    /// Great-circle angle to another direction, in degrees.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        // atan2 form stays accurate for nearly parallel vectors
        let c = cross(a, b);
        norm(c).atan2(dot(a, b)).to_degrees()
    }
}

/// Wraps an azimuth into `(-180, 180]`.
pub fn wrap_azimuth(phi_deg: f64) -> f64 {
    let mut p = phi_deg % 360.0;
    if p <= -180.0 {
        p += 360.0;
    } else if p > 180.0 {
        p -= 360.0;
    }
    p
}

/// Orientation of an antenna panel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Orientation {
    pub bearing_deg: f64,
    pub downtilt_deg: f64,
}

/// Row-major 3x3 rotation.
pub type Mat3 = [[f64; 3]; 3];

impl Orientation {
    pub fn new(bearing_deg: f64, downtilt_deg: f64) -> Self {
        Orientation {
            bearing_deg,
            downtilt_deg,
        }
    }

    /// Local-to-global rotation `Rz(bearing) * Ry(downtilt)`.
    pub fn rotation(&self) -> Mat3 {
        let (sa, ca) = self.bearing_deg.to_radians().sin_cos();
        let (sb, cb) = self.downtilt_deg.to_radians().sin_cos();
        [
            [ca * cb, -sa, ca * sb],
            [sa * cb, ca, sa * sb],
            [-sb, 0.0, cb],
        ]
    }

    pub fn local_to_global_vec(&self, v: Vec3) -> Vec3 {
        mat_vec(&self.rotation(), v)
    }

    pub fn global_to_local_vec(&self, v: Vec3) -> Vec3 {
        mat_t_vec(&self.rotation(), v)
    }

    pub fn global_to_local(&self, d: Direction) -> Direction {
        Direction::from_vector(self.global_to_local_vec(d.unit_vector()))
    }

    pub fn local_to_global(&self, d: Direction) -> Direction {
        Direction::from_vector(self.local_to_global_vec(d.unit_vector()))
    }
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

fn mat_t_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_vec(a: Vec3, b: Vec3) {
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    fn assert_dir(a: Direction, theta: f64, phi: f64, tol: f64) {
        assert!((a.theta_deg - theta).abs() < tol, "{a:?}");
        assert!((a.phi_deg - phi).abs() < tol, "{a:?}");
    }

    #[test]
    fn unit_vector_axes() {
        assert_vec(Direction::new(90.0, 0.0).unit_vector(), [1.0, 0.0, 0.0]);
        assert_vec(Direction::new(0.0, 37.0).unit_vector(), [0.0, 0.0, 1.0]);
        assert_vec(Direction::new(90.0, 90.0).unit_vector(), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn azimuth_wrap() {
        assert_eq!(wrap_azimuth(-180.0), 180.0);
        assert_eq!(wrap_azimuth(180.0), 180.0);
        assert_eq!(wrap_azimuth(270.0), -90.0);
        assert_eq!(wrap_azimuth(-540.0), 180.0);
    }

    #[test]
    fn pole_resolves_to_zero_azimuth() {
        let d = Direction::from_vector([0.0, 0.0, -2.0]);
        assert_eq!(d.theta_deg, 180.0);
        assert_eq!(d.phi_deg, 0.0);
    }

    #[test]
    fn identity_orientation() {
        let o = Orientation::new(0.0, 0.0);
        assert_dir(
            o.global_to_local(Direction::new(90.0, 0.0)),
            90.0,
            0.0,
            1e-12,
        );
    }

    #[test]
    fn pure_yaw() {
        let o = Orientation::new(90.0, 0.0);
        assert_dir(
            o.global_to_local(Direction::new(90.0, 90.0)),
            90.0,
            0.0,
            1e-9,
        );
    }

    #[test]
    fn downtilt_boresight() {
        // independent construction: pitch the +x axis down by 12 degrees
        let t = 12f64.to_radians();
        let boresight_global = [t.cos(), 0.0, -t.sin()];
        let expected = Direction::from_vector(boresight_global);
        assert!((expected.theta_deg - 102.0).abs() < 1e-12);

        let o = Orientation::new(0.0, 12.0);
        assert_dir(
            o.global_to_local(Direction::new(102.0, 0.0)),
            90.0,
            0.0,
            1e-9,
        );
        assert_dir(o.local_to_global(Direction::boresight()), 102.0, 0.0, 1e-9);
    }

    #[test]
    fn rotation_is_orthonormal() {
        let r = Orientation::new(33.0, -17.0).rotation();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn unit_vector_has_unit_norm(t in 0.0f64..=180.0, p in -180.0f64..=180.0) {
            let n = norm(Direction::new(t, p).unit_vector());
            prop_assert!((n - 1.0).abs() < 1e-12);
        }

        #[test]
        fn frame_round_trip(
            bearing in -180.0f64..180.0,
            tilt in -60.0f64..60.0,
            t in 1.0f64..179.0,
            p in -179.9f64..180.0,
        ) {
            let o = Orientation::new(bearing, tilt);
            let d = Direction::new(t, p);
            let back = o.local_to_global(o.global_to_local(d));
            // compare via angular distance so the +-180 seam is harmless
            prop_assert!(back.angle_to(&d) < 1e-9);
            prop_assert!((back.theta_deg - d.theta_deg).abs() < 1e-9);
        }

        #[test]
        fn rotation_preserves_angles(
            bearing in -180.0f64..180.0,
            tilt in -60.0f64..60.0,
            t1 in 0.0f64..=180.0, p1 in -180.0f64..=180.0,
            t2 in 0.0f64..=180.0, p2 in -180.0f64..=180.0,
        ) {
            let o = Orientation::new(bearing, tilt);
            let a = Direction::new(t1, p1);
            let b = Direction::new(t2, p2);
            let before = a.angle_to(&b);
            let after = o.global_to_local(a).angle_to(&o.global_to_local(b));
            prop_assert!((before - after).abs() < 1e-9);
        }
    }
}
