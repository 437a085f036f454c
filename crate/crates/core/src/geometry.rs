//! Camera-frame geometry: from detection records to 3D points and on to the
//! angles the array steers by. Localization noise and error metrics live here
//! too.
//!
//! The camera and the BS array share one frame: `x` to the right, `y` down,
//! `z` along the optical axis, which is also the array boresight. Spherical
//! coordinates measure the polar angle `theta` from boresight and the azimuth
//! `phi` in the `x`/`y` plane.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest representable polar angle strictly below pi/2.
pub const MAX_THETA: f64 = f64::from_bits(FRAC_PI_2.to_bits() - 1);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("depth inconsistent with pixel offset: x^2+y^2 = {offset_sq} >= r^2 = {range_sq}")]
    InconsistentDepth { offset_sq: f64, range_sq: f64 },
    #[error("bounding-box centroid ({u}, {v}) lies outside the {width}x{height} image")]
    CentroidOutsideImage { u: f64, v: f64, width: u32, height: u32 },
    #[error("point is not in front of the array (z = {0})")]
    BehindArray(f64),
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("no localization samples")]
    EmptyInput,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> GeometryError {
    GeometryError::Invalid { field, reason: reason.into() }
}

/// Pinhole intrinsics bridging pixel coordinates and metric camera rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub focal_length_px: f64,
    /// `(cx, cy)` in pixels.
    pub principal_point: [f64; 2],
    /// `(width, height)` in pixels.
    pub image_size: [u32; 2],
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        // 1080p RGB stream with a ~70 degree horizontal field of view.
        Self { focal_length_px: 1380.0, principal_point: [960.0, 540.0], image_size: [1920, 1080] }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let [cx, cy] = self.principal_point;
        let [w, h] = self.image_size;
        if !(self.focal_length_px.is_finite() && self.focal_length_px > 0.0) {
            return Err(invalid("focal_length_px", "must be finite and > 0"));
        }
        if !(cx.is_finite() && (0.0..=w as f64).contains(&cx)) {
            return Err(invalid("principal_point", "cx must satisfy 0 <= cx <= width"));
        }
        if !(cy.is_finite() && (0.0..=h as f64).contains(&cy)) {
            return Err(invalid("principal_point", "cy must satisfy 0 <= cy <= height"));
        }
        Ok(())
    }

    /// Projects a camera-frame point onto the image plane.
    pub fn project(&self, p: &CartesianPoint) -> Option<(f64, f64)> {
        if p.z <= 0.0 {
            return None;
        }
        let [cx, cy] = self.principal_point;
        Some((cx + self.focal_length_px * p.x / p.z, cy + self.focal_length_px * p.y / p.z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Person,
    Mobile,
}

/// Axis-aligned bounding box in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub u_min: f64,
    pub v_min: f64,
    pub u_max: f64,
    pub v_max: f64,
}

impl BoundingBox {
    pub fn new(u_min: f64, v_min: f64, u_max: f64, v_max: f64) -> Result<Self, GeometryError> {
        if ![u_min, v_min, u_max, v_max].iter().all(|c| c.is_finite()) {
            return Err(invalid("bbox", "coordinates must be finite"));
        }
        if u_min >= u_max {
            return Err(invalid("bbox", "u_min must be < u_max"));
        }
        if v_min >= v_max {
            return Err(invalid("bbox", "v_min must be < v_max"));
        }
        Ok(Self { u_min, v_min, u_max, v_max })
    }

    /// Average of the upper-left and lower-right corners.
    pub fn centroid(&self) -> (f64, f64) {
        ((self.u_min + self.u_max) / 2.0, (self.v_min + self.v_max) / 2.0)
    }
}

/// One detector output plus the LiDAR range to its box centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub frame_id: u64,
    pub class_label: ObjectClass,
    pub bbox: BoundingBox,
    /// Range along the ray through the bbox centroid, meters.
    pub range_m: f64,
    pub ground_truth: Option<CartesianPoint>,
}

impl DetectionRecord {
    pub fn new(
        frame_id: u64,
        class_label: ObjectClass,
        bbox: BoundingBox,
        range_m: f64,
        ground_truth: Option<CartesianPoint>,
    ) -> Result<Self, GeometryError> {
        if !(range_m.is_finite() && range_m > 0.0) {
            return Err(invalid("range_m", "must be finite and > 0"));
        }
        if let Some(gt) = &ground_truth {
            if !gt.is_finite() {
                return Err(invalid("ground_truth", "coordinates must be finite"));
            }
        }
        Ok(Self { frame_id, class_label, bbox, range_m, ground_truth })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartesianPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Recovers the depth coordinate from metric image-plane offsets and a
    /// range along the ray: `z = sqrt(r^2 - (x^2 + y^2))`.
    pub fn from_range_and_offsets(x: f64, y: f64, range: f64) -> Result<Self, GeometryError> {
        if !(range.is_finite() && range > 0.0) {
            return Err(invalid("range_m", "must be finite and > 0"));
        }
        if !(x.is_finite() && y.is_finite()) {
            return Err(invalid("offset", "metric offsets must be finite"));
        }
        let offset_sq = x * x + y * y;
        let range_sq = range * range;
        if offset_sq >= range_sq {
            return Err(GeometryError::InconsistentDepth { offset_sq, range_sq });
        }
        Ok(Self { x, y, z: (range_sq - offset_sq).sqrt() })
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self { x: self.y * o.z - self.z * o.y, y: self.z * o.x - self.x * o.z, z: self.x * o.y - self.y * o.x }
    }

    pub fn distance(&self, o: &Self) -> f64 {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Angle between the directions of `self` and `o`, radians. Zero when
    /// either vector is null.
    pub fn angle_to(&self, o: &Self) -> f64 {
        let c = self.cross(o).norm();
        let d = self.dot(o);
        if c == 0.0 && d == 0.0 {
            return 0.0;
        }
        c.atan2(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SphericalPoint {
    /// Range, meters.
    pub r: f64,
    /// Polar angle from boresight, radians in `[0, pi/2)`.
    pub theta: f64,
    /// Azimuth, radians in `(-pi, pi]`.
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self, GeometryError> {
        let s = Self { r, theta, phi };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(invalid("r", "must be finite and >= 0"));
        }
        if !(self.theta.is_finite() && (0.0..FRAC_PI_2).contains(&self.theta)) {
            return Err(invalid("theta", "must lie in [0, pi/2)"));
        }
        if !(self.phi.is_finite() && self.phi > -PI && self.phi <= PI) {
            return Err(invalid("phi", "must lie in (-pi, pi]"));
        }
        Ok(())
    }

    /// Horizontal azimuth `atan2(x, z)` and vertical elevation `asin(y / r)`,
    /// both in degrees. This is the angle pair the SSB sector grid is laid
    /// out in.
    pub fn az_el_deg(&self) -> (f64, f64) {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        let az = (st * cp).atan2(ct);
        let el = (st * sp).clamp(-1.0, 1.0).asin();
        (az.to_degrees(), el.to_degrees())
    }
}

/// Maps `phi` into `(-pi, pi]`.
pub fn wrap_azimuth(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    } else if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

/// Converts a detection into a camera-frame point at `range_m` along the ray
/// through the bbox centroid.
pub fn detection_to_cartesian(det: &DetectionRecord, cam: &CameraIntrinsics) -> Result<CartesianPoint, GeometryError> {
    cam.validate()?;
    let (u, v) = det.bbox.centroid();
    let [width, height] = cam.image_size;
    if !(0.0..=width as f64).contains(&u) || !(0.0..=height as f64).contains(&v) {
        return Err(GeometryError::CentroidOutsideImage { u, v, width, height });
    }
    let [cx, cy] = cam.principal_point;
    let a = (u - cx) / cam.focal_length_px;
    let b = (v - cy) / cam.focal_length_px;
    // Ray (a, b, 1) scaled to length r gives the metric image-plane offsets.
    let scale = det.range_m / (1.0 + a * a + b * b).sqrt();
    CartesianPoint::from_range_and_offsets(a * scale, b * scale, det.range_m)
}

pub fn cartesian_to_spherical(p: &CartesianPoint) -> Result<SphericalPoint, GeometryError> {
    if !p.is_finite() {
        return Err(invalid("point", "coordinates must be finite"));
    }
    if p.z <= 0.0 {
        return Err(GeometryError::BehindArray(p.z));
    }
    let rho = p.x.hypot(p.y);
    let phi = if rho == 0.0 { 0.0 } else { p.y.atan2(p.x) };
    Ok(SphericalPoint { r: p.norm(), theta: (rho / p.z).atan(), phi })
}

pub fn spherical_to_cartesian(s: &SphericalPoint) -> CartesianPoint {
    let (st, ct) = s.theta.sin_cos();
    let (sp, cp) = s.phi.sin_cos();
    CartesianPoint { x: s.r * st * cp, y: s.r * st * sp, z: s.r * ct }
}

/// Per-axis localization error distribution of the vision pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizationNoiseModel {
    pub angle_error_std_deg: f64,
    pub distance_error_std_cm: f64,
    pub detection_success_prob: f64,
}

impl Default for LocalizationNoiseModel {
    fn default() -> Self {
        Self { angle_error_std_deg: 0.23, distance_error_std_cm: 3.74, detection_success_prob: 0.9067 }
    }
}

impl LocalizationNoiseModel {
    /// Perfect localization with certain detection.
    pub const EXACT: Self = Self { angle_error_std_deg: 0.0, distance_error_std_cm: 0.0, detection_success_prob: 1.0 };

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.angle_error_std_deg.is_finite() && self.angle_error_std_deg >= 0.0) {
            return Err(invalid("angle_error_std_deg", "must be finite and >= 0"));
        }
        if !(self.distance_error_std_cm.is_finite() && self.distance_error_std_cm >= 0.0) {
            return Err(invalid("distance_error_std_cm", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.detection_success_prob) {
            return Err(invalid("detection_success_prob", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// The detector did not find the mobile in the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionFailure;

/// Draws a noisy position estimate for `truth`.
///
/// One uniform draw decides detection; on success `theta` and `phi` each get
/// an independent Gaussian offset (degrees) and `r` a Gaussian offset (cm).
/// A negative polar angle is reflected through boresight, `theta` is clamped
/// below pi/2 and `r` at zero.
pub fn apply_localization_noise(
    truth: &SphericalPoint,
    model: &LocalizationNoiseModel,
    seed: u64,
) -> Result<SphericalPoint, DetectionFailure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let detected = rng.random::<f64>() < model.detection_success_prob;
    if !detected {
        return Err(DetectionFailure);
    }
    let angle = Normal::new(0.0, model.angle_error_std_deg).expect("validated std");
    let dist = Normal::new(0.0, model.distance_error_std_cm).expect("validated std");
    let d_theta = angle.sample(&mut rng).to_radians();
    let d_phi = angle.sample(&mut rng).to_radians();
    let d_r = dist.sample(&mut rng) / 100.0;

    let mut theta = truth.theta + d_theta;
    let mut phi = truth.phi + d_phi;
    if theta < 0.0 {
        theta = -theta;
        phi += PI;
    }
    Ok(SphericalPoint { r: (truth.r + d_r).max(0.0), theta: theta.min(MAX_THETA), phi: wrap_azimuth(phi) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub count: usize,
    pub mean_distance_cm: f64,
    pub mean_angle_deg: f64,
}

/// Mean Euclidean and great-circle errors over `(estimate, ground_truth)` pairs.
pub fn localization_error_stats(pairs: &[(CartesianPoint, CartesianPoint)]) -> Result<ErrorStats, GeometryError> {
    if pairs.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    let n = pairs.len() as f64;
    let (dist, ang) = pairs.iter().fold((0.0, 0.0), |(d, a), (est, gt)| (d + est.distance(gt), a + est.angle_to(gt)));
    Ok(ErrorStats { count: pairs.len(), mean_distance_cm: dist / n * 100.0, mean_angle_deg: (ang / n).to_degrees() })
}
