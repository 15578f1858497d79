//! Detector shapes, the source-detector axis, and the detectability tunnel.
//!
//! Everything a scattering probability needs from the experiment geometry is
//! a particle's transverse offset from the source-detector axis, expressed in
//! a basis aligned with the detector edges. The basis is a deterministic
//! function of the axis direction, so results are reproducible and invariant
//! under common translations of source and detector.

use crate::error::{require_positive, Error, Result};

/// A point in 3-D space, metres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }
}

/// A displacement in 3-D space, metres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::domain(format!(
                "cannot normalize vector with norm {n}"
            )));
        }
        Ok(Vec3 {
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        })
    }
}

impl std::ops::Sub for Point3 {
    type Output = Vec3;
    fn sub(self, rhs: Point3) -> Vec3 {
        Vec3 {
            x: self.x - rhs.x,
            y: self.y - rhs.y,
            z: self.z - rhs.z,
        }
    }
}

impl std::ops::Add<Vec3> for Point3 {
    type Output = Point3;
    fn add(self, rhs: Vec3) -> Point3 {
        Point3 {
            x: self.x + rhs.x,
            y: self.y + rhs.y,
            z: self.z + rhs.z,
        }
    }
}

/// The sensitive cross-section of the detector, described by half-extents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DetectorShape {
    Square { half_side_m: f64 },
    Disk { radius_m: f64 },
    Rect { half_x_m: f64, half_y_m: f64 },
}

impl DetectorShape {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DetectorShape::Square { half_side_m } => {
                require_positive("square half side", half_side_m)?;
            }
            DetectorShape::Disk { radius_m } => {
                require_positive("disk radius", radius_m)?;
            }
            DetectorShape::Rect { half_x_m, half_y_m } => {
                require_positive("rect half extent x", half_x_m)?;
                require_positive("rect half extent y", half_y_m)?;
            }
        }
        Ok(())
    }

    /// Half of the side of the smallest square circumscribed around the
    /// detector: the `r_T` that enters the closed-form scattering bound.
    pub fn circumscribed_half_side(&self) -> f64 {
        match *self {
            DetectorShape::Square { half_side_m } => half_side_m,
            DetectorShape::Disk { radius_m } => radius_m,
            DetectorShape::Rect { half_x_m, half_y_m } => half_x_m.max(half_y_m),
        }
    }

    /// Shape membership in detector-plane coordinates. Boundary points count
    /// as inside (a measure-zero tie-break, relevant only to the classical
    /// baseline).
    pub fn contains(&self, ox: f64, oy: f64) -> bool {
        match *self {
            DetectorShape::Square { half_side_m } => {
                ox.abs() <= half_side_m && oy.abs() <= half_side_m
            }
            DetectorShape::Disk { radius_m } => ox * ox + oy * oy <= radius_m * radius_m,
            DetectorShape::Rect { half_x_m, half_y_m } => {
                ox.abs() <= half_x_m && oy.abs() <= half_y_m
            }
        }
    }

    /// Half-extents of the bounding box in detector-plane coordinates.
    pub(crate) fn half_extents(&self) -> (f64, f64) {
        match *self {
            DetectorShape::Square { half_side_m } => (half_side_m, half_side_m),
            DetectorShape::Disk { radius_m } => (radius_m, radius_m),
            DetectorShape::Rect { half_x_m, half_y_m } => (half_x_m, half_y_m),
        }
    }

    /// The same shape rescaled so its circumscribed half-side equals `size_m`
    /// (rects keep their aspect ratio). Used by detector-size sweeps.
    pub fn scaled_to(&self, size_m: f64) -> Result<DetectorShape> {
        require_positive("detector size", size_m)?;
        Ok(match *self {
            DetectorShape::Square { .. } => DetectorShape::Square { half_side_m: size_m },
            DetectorShape::Disk { .. } => DetectorShape::Disk { radius_m: size_m },
            DetectorShape::Rect { half_x_m, half_y_m } => {
                let scale = size_m / half_x_m.max(half_y_m);
                DetectorShape::Rect {
                    half_x_m: half_x_m * scale,
                    half_y_m: half_y_m * scale,
                }
            }
        })
    }
}

/// Transverse/axial decomposition of a position relative to a setup.
#[derive(Clone, Copy, Debug)]
pub struct TransverseOffset {
    /// Offset along the detector-edge basis vector ex, m.
    pub ox: f64,
    /// Offset along the detector-edge basis vector ey, m.
    pub oy: f64,
    /// Scalar distance from the axis, `sqrt(ox^2 + oy^2)`, m.
    pub o: f64,
    /// Coordinate along the axis, measured from the source, m.
    pub z: f64,
}

/// Source position, detector position and shape. The detector plane is
/// taken perpendicular to the source-detector axis (collimated
/// approximation), so the axis fully determines the transverse basis.
#[derive(Clone, Debug)]
pub struct SetupGeometry {
    pub source: Point3,
    pub detector_center: Point3,
    pub detector_shape: DetectorShape,
    axis: Vec3,
}

/// Deterministic right-handed orthonormal basis `(ex, ey, axis)`.
/// Square and rect detector edges are aligned with `ex`/`ey`; for disks the
/// choice is immaterial (rotational symmetry) but still fixed.
fn transverse_basis(axis: Vec3) -> (Vec3, Vec3) {
    let reference = if axis.z.abs() > 0.9 {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let ex = reference
        .cross(axis)
        .normalized()
        .expect("reference chosen non-parallel to a unit axis");
    let ey = axis.cross(ex);
    (ex, ey)
}

impl SetupGeometry {
    pub fn new(
        source: Point3,
        detector_center: Point3,
        detector_shape: DetectorShape,
    ) -> Result<Self> {
        detector_shape.validate()?;
        for v in [
            source.x,
            source.y,
            source.z,
            detector_center.x,
            detector_center.y,
            detector_center.z,
        ] {
            if !v.is_finite() {
                return Err(Error::domain("setup positions must be finite"));
            }
        }
        let axis = (detector_center - source).normalized().map_err(|_| {
            Error::domain("source and detector center must not coincide")
        })?;
        Ok(SetupGeometry {
            source,
            detector_center,
            detector_shape,
            axis,
        })
    }

    /// Unit vector from the source towards the detector center.
    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    /// Source-detector distance, m.
    pub fn distance_m(&self) -> f64 {
        (self.detector_center - self.source).norm()
    }

    pub fn validate(&self) -> Result<()> {
        self.detector_shape.validate()?;
        if (self.axis.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::domain("setup axis is not normalized"));
        }
        Ok(())
    }

    /// Same source and detector position with a different detector shape.
    pub fn with_shape(&self, detector_shape: DetectorShape) -> Result<SetupGeometry> {
        SetupGeometry::new(self.source, self.detector_center, detector_shape)
    }

    /// Decomposes `position` into the axis coordinate `z` and transverse
    /// offsets `(ox, oy)` in the detector-edge basis.
    pub fn transverse_offset(&self, position: Point3) -> TransverseOffset {
        let (ex, ey) = transverse_basis(self.axis);
        let rel = position - self.source;
        let ox = rel.dot(ex);
        let oy = rel.dot(ey);
        TransverseOffset {
            ox,
            oy,
            o: ox.hypot(oy),
            z: rel.dot(self.axis),
        }
    }

    /// The detectability tunnel: a straight prism with the detector's
    /// cross-section running from the source to the detector.
    pub fn tunnel(&self) -> DetectabilityTunnel {
        DetectabilityTunnel {
            cross_section: self.detector_shape,
            axis_origin: self.source,
            axis_direction: self.axis,
            length_m: self.distance_m(),
        }
    }
}

/// The finite volume in which a detectable scattering event may occur.
#[derive(Clone, Debug)]
pub struct DetectabilityTunnel {
    pub cross_section: DetectorShape,
    pub axis_origin: Point3,
    pub axis_direction: Vec3,
    pub length_m: f64,
}

impl DetectabilityTunnel {
    /// Membership is decided with the same basis as `transverse_offset`:
    /// the axial coordinate must lie in `[0, length]` and the transverse
    /// point inside the cross-section (boundaries inclusive).
    pub fn contains(&self, position: Point3) -> bool {
        let rel = position - self.axis_origin;
        let z = rel.dot(self.axis_direction);
        if z < 0.0 || z > self.length_m {
            return false;
        }
        let (ex, ey) = transverse_basis(self.axis_direction);
        self.cross_section.contains(rel.dot(ex), rel.dot(ey))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn axis_z_setup(shape: DetectorShape) -> SetupGeometry {
        SetupGeometry::new(
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(0.0, 0.0, 0.1),
            shape,
        )
        .unwrap()
    }

    #[test]
    fn circumscribed_half_side_cases() {
        assert_eq!(
            DetectorShape::Square { half_side_m: 1e-6 }.circumscribed_half_side(),
            1e-6
        );
        assert_eq!(
            DetectorShape::Disk { radius_m: 5e-6 }.circumscribed_half_side(),
            5e-6
        );
        assert_eq!(
            DetectorShape::Rect {
                half_x_m: 2e-6,
                half_y_m: 3e-6
            }
            .circumscribed_half_side(),
            3e-6
        );
    }

    #[test]
    fn disk_equals_square_rect_of_same_radius() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let r = 10f64.powf(rng.gen_range(-8.0..0.0));
            let disk = DetectorShape::Disk { radius_m: r };
            let rect = DetectorShape::Rect {
                half_x_m: r,
                half_y_m: r,
            };
            assert_eq!(
                disk.circumscribed_half_side(),
                rect.circumscribed_half_side()
            );
        }
    }

    #[test]
    fn axial_point_has_zero_offset() {
        let setup = axis_z_setup(DetectorShape::Square { half_side_m: 1e-6 });
        let off = setup.transverse_offset(Point3::new(0.0, 0.0, 0.05));
        assert_eq!(off.ox, 0.0);
        assert_eq!(off.oy, 0.0);
        assert_eq!(off.o, 0.0);
        assert!((off.z - 0.05).abs() < 1e-15);
    }

    #[test]
    fn pythagorean_offset() {
        let setup = axis_z_setup(DetectorShape::Square { half_side_m: 1e-6 });
        let off = setup.transverse_offset(Point3::new(3e-6, 4e-6, 0.02));
        assert!((off.o - 5e-6).abs() <= 1e-18);
    }

    #[test]
    fn offset_consistency_with_independent_projection() {
        // o^2 must equal |p - s|^2 - z^2 (no transverse basis involved)
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..500 {
            let s = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let d = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if (d - s).norm() < 1e-3 {
                continue;
            }
            let setup =
                SetupGeometry::new(s, d, DetectorShape::Disk { radius_m: 1e-3 }).unwrap();
            let p = Point3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let off = setup.transverse_offset(p);
            let rel = p - s;
            let o2_independent = rel.dot(rel) - off.z * off.z;
            let got = off.o * off.o;
            assert!(
                (got - o2_independent).abs() <= 1e-12 * o2_independent.abs().max(1e-30),
                "got {got}, want {o2_independent}"
            );
        }
    }

    #[test]
    fn translation_invariance() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..200 {
            let s = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0);
            let d = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 2.0);
            let p = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 1.0);
            let t = Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let shape = DetectorShape::Rect {
                half_x_m: 1e-4,
                half_y_m: 3e-4,
            };
            let a = SetupGeometry::new(s, d, shape).unwrap().transverse_offset(p);
            let b = SetupGeometry::new(s + t, d + t, shape)
                .unwrap()
                .transverse_offset(p + t);
            assert!((a.ox - b.ox).abs() <= 1e-12 * (1.0 + a.ox.abs()));
            assert!((a.oy - b.oy).abs() <= 1e-12 * (1.0 + a.oy.abs()));
            assert!((a.z - b.z).abs() <= 1e-12 * (1.0 + a.z.abs()));
        }
    }

    #[test]
    fn tunnel_of_square_detector() {
        let setup = axis_z_setup(DetectorShape::Square { half_side_m: 1e-6 });
        let tunnel = setup.tunnel();
        assert!((tunnel.length_m - 0.1).abs() <= 1e-15);
        assert!(matches!(
            tunnel.cross_section,
            DetectorShape::Square { .. }
        ));
        assert!(tunnel.contains(Point3::new(0.0, 0.0, 0.05)));
        assert!(!tunnel.contains(Point3::new(1e-5, 0.0, 0.05)));
        // outside the axial range
        assert!(!tunnel.contains(Point3::new(0.0, 0.0, -0.01)));
        assert!(!tunnel.contains(Point3::new(0.0, 0.0, 0.11)));
    }

    #[test]
    fn tunnel_membership_matches_transverse_offset() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let setup = SetupGeometry::new(
            Point3::new(0.3, -0.2, 0.1),
            Point3::new(1.1, 0.4, -0.5),
            DetectorShape::Disk { radius_m: 0.05 },
        )
        .unwrap();
        let tunnel = setup.tunnel();
        for _ in 0..1000 {
            let p = Point3::new(
                rng.gen_range(-1.5..2.0),
                rng.gen_range(-1.5..2.0),
                rng.gen_range(-1.5..2.0),
            );
            let off = setup.transverse_offset(p);
            let expected = off.z >= 0.0
                && off.z <= tunnel.length_m
                && setup.detector_shape.contains(off.ox, off.oy);
            assert_eq!(tunnel.contains(p), expected);
        }
    }

    #[test]
    fn boundary_counts_as_inside() {
        let shape = DetectorShape::Square { half_side_m: 1.0 };
        assert!(shape.contains(1.0, 0.0));
        assert!(shape.contains(1.0, 1.0));
        assert!(!shape.contains(1.0 + 1e-12, 0.0));
        let disk = DetectorShape::Disk { radius_m: 1.0 };
        assert!(disk.contains(1.0, 0.0));
        assert!(!disk.contains(1.0 + 1e-12, 0.0));
    }

    #[test]
    fn degenerate_setup_rejected() {
        let p = Point3::new(0.0, 0.0, 0.0);
        let err = SetupGeometry::new(p, p, DetectorShape::Disk { radius_m: 1.0 });
        assert!(err.is_err());
        let err = SetupGeometry::new(
            p,
            Point3::new(f64::NAN, 0.0, 0.0),
            DetectorShape::Disk { radius_m: 1.0 },
        );
        assert!(err.is_err());
        assert!(DetectorShape::Square { half_side_m: 0.0 }.validate().is_err());
        assert!(DetectorShape::Rect {
            half_x_m: 1.0,
            half_y_m: -2.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn basis_is_right_handed_and_deterministic() {
        for axis in [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.6, 0.0, 0.8),
            Vec3::new(-0.48, 0.6, 0.64),
        ] {
            let (ex, ey) = transverse_basis(axis);
            assert!((ex.norm() - 1.0).abs() <= 1e-14);
            assert!((ey.norm() - 1.0).abs() <= 1e-14);
            assert!(ex.dot(axis).abs() <= 1e-14);
            assert!(ey.dot(axis).abs() <= 1e-14);
            let n = ex.cross(ey);
            assert!((n.x - axis.x).abs() <= 1e-14);
            assert!((n.y - axis.y).abs() <= 1e-14);
            assert!((n.z - axis.z).abs() <= 1e-14);
        }
        // axis along z keeps the world x/y directions
        let (ex, ey) = transverse_basis(Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(ex, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(ey, Vec3::new(0.0, 1.0, 0.0));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // o² must equal |p-s|² - z² whatever the axis orientation
            #[test]
            fn offset_norm_matches_independent_projection(
                sx in -1.0f64..1.0, sy in -1.0f64..1.0, sz in -1.0f64..1.0,
                dx in -1.0f64..1.0, dy in -1.0f64..1.0, dz in 1.5f64..2.0,
                px in -2.0f64..2.0, py in -2.0f64..2.0, pz in -2.0f64..2.0,
            ) {
                let s = Point3::new(sx, sy, sz);
                let d = Point3::new(dx, dy, sz + dz);
                let setup =
                    SetupGeometry::new(s, d, DetectorShape::Disk { radius_m: 0.1 }).unwrap();
                let p = Point3::new(px, py, pz);
                let off = setup.transverse_offset(p);
                let rel = p - s;
                let expect = rel.dot(rel) - off.z * off.z;
                prop_assert!(
                    (off.o * off.o - expect).abs() <= 1e-12 * expect.abs().max(1e-30)
                );
            }
        }
    }

    #[test]
    fn scaled_to_keeps_aspect() {
        let rect = DetectorShape::Rect {
            half_x_m: 2e-6,
            half_y_m: 4e-6,
        };
        match rect.scaled_to(1e-5).unwrap() {
            DetectorShape::Rect { half_x_m, half_y_m } => {
                assert!((half_y_m - 1e-5).abs() <= 1e-20);
                assert!((half_x_m - 5e-6).abs() <= 1e-20);
            }
            _ => panic!("variant changed"),
        }
        assert_eq!(
            DetectorShape::Disk { radius_m: 1.0 }
                .scaled_to(2.5)
                .unwrap(),
            DetectorShape::Disk { radius_m: 2.5 }
        );
    }
}
