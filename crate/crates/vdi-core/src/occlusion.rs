//! Depth fusion: classifying pixels as occluded by the robot.
//!
//! Given the sensor depth `d` and the virtual depth `dv` at the same pixel,
//! a target point measured there is in front of the robot when
//! `d < dv − ε`, and hidden behind (or on) the robot body when
//! `d ≥ dv − ε`. The margin ε absorbs sensor noise and calibration error.
//! Two extra labels extend the rule to real frames: `NoRobot` where
//! the robot does not cover the pixel at all, and `Unknown` where it does
//! but the sensor returned nothing — a dropout under the silhouette carries
//! no evidence either way and must not pass as visible.

use nalgebra::Point3;
use thiserror::Error;

use crate::camera::{CameraError, CameraModel};
use crate::depth::{depth_is_valid, DepthImage};
use crate::imgio::RgbImage;

/// Per-pixel classification of a fused (actual, virtual) depth pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OcclusionLabel {
    /// Robot absent from this pixel; the measurement, if any, is trustworthy.
    NoRobot,
    /// Measured point lies strictly in front of the robot body.
    Visible,
    /// Measurement comes from (or hides behind) the robot body.
    Occluded,
    /// Robot covers the pixel but the sensor returned no depth.
    Unknown,
}

impl OcclusionLabel {
    /// Fixed code used by the 8-bit mask file format.
    pub fn code(self) -> u8 {
        match self {
            OcclusionLabel::NoRobot => 0,
            OcclusionLabel::Visible => 64,
            OcclusionLabel::Unknown => 128,
            OcclusionLabel::Occluded => 255,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(OcclusionLabel::NoRobot),
            64 => Some(OcclusionLabel::Visible),
            128 => Some(OcclusionLabel::Unknown),
            255 => Some(OcclusionLabel::Occluded),
            _ => None,
        }
    }
}

/// Fusion parameters.
#[derive(Debug, Clone, Copy)]
pub struct OcclusionConfig {
    /// Depth-noise and calibration margin ε in meters.
    pub epsilon: f64,
}

impl Default for OcclusionConfig {
    fn default() -> Self {
        Self { epsilon: 0.01 }
    }
}

#[derive(Debug, Error)]
pub enum OcclusionError {
    #[error("epsilon must be finite and ≥ 0, got {0}")]
    InvalidEpsilon(f64),
    #[error("dimension mismatch: actual {aw}x{ah} vs virtual {vw}x{vh}")]
    DimensionMismatch { aw: u32, ah: u32, vw: u32, vh: u32 },
    #[error("mask data length {len} does not match {width}x{height}")]
    LengthMismatch { len: usize, width: u32, height: u32 },
    #[error("region is empty")]
    EmptyRegion,
    #[error("region exceeds image bounds ({detail})")]
    RegionOutOfBounds { detail: String },
    #[error("pixel ({x}, {y}) outside {width}x{height} mask")]
    PixelOutOfBounds { x: u32, y: u32, width: u32, height: u32 },
    #[error(transparent)]
    Camera(#[from] CameraError),
}

impl OcclusionConfig {
    pub fn validated(self) -> Result<Self, OcclusionError> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(OcclusionError::InvalidEpsilon(self.epsilon));
        }
        Ok(self)
    }
}

/// Classifies one pixel. Total over sentinel-extended inputs: invalid
/// (zero, negative, or non-finite) depths select the `NoRobot`/`Unknown`
/// branches instead of erroring.
#[inline]
pub fn classify_pixel(d: f64, dv: f64, cfg: &OcclusionConfig) -> OcclusionLabel {
    if !depth_is_valid(dv) {
        return OcclusionLabel::NoRobot;
    }
    if !depth_is_valid(d) {
        return OcclusionLabel::Unknown;
    }
    if d < dv - cfg.epsilon {
        OcclusionLabel::Visible
    } else {
        OcclusionLabel::Occluded
    }
}

/// Per-pixel occlusion labels for a full frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcclusionMask {
    width: u32,
    height: u32,
    labels: Vec<OcclusionLabel>,
}

impl OcclusionMask {
    pub fn from_labels(
        width: u32,
        height: u32,
        labels: Vec<OcclusionLabel>,
    ) -> Result<Self, OcclusionError> {
        if labels.len() != width as usize * height as usize {
            return Err(OcclusionError::LengthMismatch {
                len: labels.len(),
                width,
                height,
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> OcclusionLabel {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn checked_get(&self, x: u32, y: u32) -> Result<OcclusionLabel, OcclusionError> {
        if x >= self.width || y >= self.height {
            return Err(OcclusionError::PixelOutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.get(x, y))
    }

    pub fn labels(&self) -> &[OcclusionLabel] {
        &self.labels
    }

    /// Count of pixels carrying each label: (no_robot, visible, occluded, unknown).
    pub fn label_counts(&self) -> LabelCounts {
        let mut counts = LabelCounts::default();
        for l in &self.labels {
            match l {
                OcclusionLabel::NoRobot => counts.no_robot += 1,
                OcclusionLabel::Visible => counts.visible += 1,
                OcclusionLabel::Occluded => counts.occluded += 1,
                OcclusionLabel::Unknown => counts.unknown += 1,
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelCounts {
    pub no_robot: usize,
    pub visible: usize,
    pub occluded: usize,
    pub unknown: usize,
}

impl LabelCounts {
    pub fn total(&self) -> usize {
        self.no_robot + self.visible + self.occluded + self.unknown
    }
}

/// Fuses an actual sensor frame with the VDI, pixel by pixel.
pub fn occlusion_mask(
    actual: &DepthImage,
    vdi: &DepthImage,
    cfg: &OcclusionConfig,
) -> Result<OcclusionMask, OcclusionError> {
    let cfg = cfg.validated()?;
    if actual.width() != vdi.width() || actual.height() != vdi.height() {
        return Err(OcclusionError::DimensionMismatch {
            aw: actual.width(),
            ah: actual.height(),
            vw: vdi.width(),
            vh: vdi.height(),
        });
    }
    let labels = actual
        .data()
        .iter()
        .zip(vdi.data())
        .map(|(&d, &dv)| classify_pixel(d, dv, &cfg))
        .collect();
    OcclusionMask::from_labels(actual.width(), actual.height(), labels)
}

/// A pixel region for occlusion-fraction queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Region {
    /// Axis-aligned box, `x, y` top-left, `w, h` in pixels.
    Rect { x: u32, y: u32, w: u32, h: u32 },
    /// Explicit pixel set.
    Pixels(Vec<(u32, u32)>),
}

impl Region {
    fn for_each(
        &self,
        mask: &OcclusionMask,
        mut f: impl FnMut(OcclusionLabel),
    ) -> Result<usize, OcclusionError> {
        match self {
            Region::Rect { x, y, w, h } => {
                if *w == 0 || *h == 0 {
                    return Err(OcclusionError::EmptyRegion);
                }
                let (x1, y1) = (x + w, y + h);
                if x1 > mask.width() || y1 > mask.height() {
                    return Err(OcclusionError::RegionOutOfBounds {
                        detail: format!(
                            "rect {x},{y} {w}x{h} vs image {}x{}",
                            mask.width(),
                            mask.height()
                        ),
                    });
                }
                for py in *y..y1 {
                    for px in *x..x1 {
                        f(mask.get(px, py));
                    }
                }
                Ok((*w as usize) * (*h as usize))
            }
            Region::Pixels(pixels) => {
                if pixels.is_empty() {
                    return Err(OcclusionError::EmptyRegion);
                }
                for &(px, py) in pixels {
                    f(mask.checked_get(px, py)?);
                }
                Ok(pixels.len())
            }
        }
    }
}

/// How `Unknown` pixels count in a region fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    /// Conservative default: a dropout under the silhouette counts occluded.
    #[default]
    CountAsOccluded,
    /// Count toward the denominator but not the occluded count.
    CountAsVisible,
    /// Leave Unknown pixels out of the fraction entirely.
    Ignore,
}

/// Fraction of robot-covered pixels in `region` that are occluded:
/// occluded / (visible + occluded + unknown-per-policy). `NoRobot` pixels
/// never participate; a region with no robot overlap reads 0.0.
pub fn region_occlusion_fraction(
    mask: &OcclusionMask,
    region: &Region,
    policy: UnknownPolicy,
) -> Result<f64, OcclusionError> {
    let mut occluded = 0usize;
    let mut denominator = 0usize;
    region.for_each(mask, |label| match label {
        OcclusionLabel::Occluded => {
            occluded += 1;
            denominator += 1;
        }
        OcclusionLabel::Visible => denominator += 1,
        OcclusionLabel::Unknown => match policy {
            UnknownPolicy::CountAsOccluded => {
                occluded += 1;
                denominator += 1;
            }
            UnknownPolicy::CountAsVisible => denominator += 1,
            UnknownPolicy::Ignore => {}
        },
        OcclusionLabel::NoRobot => {}
    })?;
    if denominator == 0 {
        return Ok(0.0);
    }
    Ok(occluded as f64 / denominator as f64)
}

/// Outcome of a guarded de-projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SafeDeprojection {
    /// Camera-frame point; safe to use.
    Point(Point3<f64>),
    /// The pixel is occluded by the robot: de-projecting the measured depth
    /// would return a point on the robot body, so nothing is emitted.
    OccludedSignal,
    /// No usable evidence (sensor dropout, or robot covers the pixel with
    /// no measurement behind it).
    UnknownSignal,
}

/// De-projects a pixel only when its occlusion label says the measurement is
/// trustworthy.
pub fn safe_deproject(
    u: u32,
    v: u32,
    actual: &DepthImage,
    mask: &OcclusionMask,
    cam: &CameraModel,
) -> Result<SafeDeprojection, OcclusionError> {
    let label = mask.checked_get(u, v)?;
    let depth = actual.checked_get(u, v).map_err(|_| {
        OcclusionError::PixelOutOfBounds {
            x: u,
            y: v,
            width: actual.width(),
            height: actual.height(),
        }
    })?;
    match label {
        OcclusionLabel::Occluded => Ok(SafeDeprojection::OccludedSignal),
        OcclusionLabel::Unknown => Ok(SafeDeprojection::UnknownSignal),
        OcclusionLabel::Visible | OcclusionLabel::NoRobot => {
            if !depth_is_valid(depth) {
                return Ok(SafeDeprojection::UnknownSignal);
            }
            Ok(SafeDeprojection::Point(cam.deproject(
                u as f64, v as f64, depth,
            )?))
        }
    }
}

/// Tint applied to occluded pixels in overlays.
const OVERLAY_TINT: [u8; 3] = [255, 32, 32];
const OVERLAY_ALPHA: f64 = 0.5;

/// Highlights occluded pixels on a color image; all other pixels pass
/// through untouched.
pub fn overlay(mask: &OcclusionMask, color: &RgbImage) -> Result<RgbImage, OcclusionError> {
    if mask.width() != color.width || mask.height() != color.height {
        return Err(OcclusionError::DimensionMismatch {
            aw: color.width,
            ah: color.height,
            vw: mask.width(),
            vh: mask.height(),
        });
    }
    let mut out = color.clone();
    for (i, label) in mask.labels().iter().enumerate() {
        if *label == OcclusionLabel::Occluded {
            let px = &mut out.data[3 * i..3 * i + 3];
            for (channel, &tint) in px.iter_mut().zip(&OVERLAY_TINT) {
                let blended =
                    (1.0 - OVERLAY_ALPHA) * *channel as f64 + OVERLAY_ALPHA * tint as f64;
                *channel = blended.round() as u8;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::RigidTransform;

    fn cfg() -> OcclusionConfig {
        OcclusionConfig { epsilon: 0.01 }
    }

    #[test]
    fn classify_follows_the_comparison_rule() {
        // target in front of the robot: no occlusion
        assert_eq!(classify_pixel(1.0, 2.0, &cfg()), OcclusionLabel::Visible);
        // measurement derived from the robot body
        assert_eq!(classify_pixel(2.0, 1.5, &cfg()), OcclusionLabel::Occluded);
        // boundary: rule uses ≥, so d = dv − ε is occluded
        assert_eq!(classify_pixel(1.49, 1.5, &cfg()), OcclusionLabel::Occluded);
        // robot absent
        assert_eq!(classify_pixel(1.0, 0.0, &cfg()), OcclusionLabel::NoRobot);
        assert_eq!(classify_pixel(0.0, 0.0, &cfg()), OcclusionLabel::NoRobot);
        // dropout under the silhouette
        assert_eq!(classify_pixel(0.0, 1.5, &cfg()), OcclusionLabel::Unknown);
    }

    #[test]
    fn mask_all_no_robot_when_vdi_empty() {
        let mut actual = DepthImage::new_invalid(4, 4);
        for y in 0..4 {
            for x in 0..4 {
                actual.set(x, y, 1.0);
            }
        }
        let vdi = DepthImage::new_invalid(4, 4);
        let mask = occlusion_mask(&actual, &vdi, &cfg()).unwrap();
        assert_eq!(mask.label_counts().no_robot, 16);
    }

    #[test]
    fn camera_seeing_only_robot_is_fully_occluded() {
        let mut img = DepthImage::new_invalid(4, 4);
        for y in 0..4 {
            for x in 0..4 {
                img.set(x, y, 1.2);
            }
        }
        let mask = occlusion_mask(&img, &img, &cfg()).unwrap();
        assert_eq!(mask.label_counts().occluded, 16);
    }

    #[test]
    fn synthetic_half_and_half_scene() {
        // Robot everywhere at its own depth; target plane at 1 m in front of
        // the robot (robot at 2 m) on the left half, behind the robot
        // (robot at 0.8 m) on the right half.
        let w = 8;
        let mut actual = DepthImage::new_invalid(w, 4);
        let mut vdi = DepthImage::new_invalid(w, 4);
        for y in 0..4 {
            for x in 0..w {
                if x < w / 2 {
                    vdi.set(x, y, 2.0);
                    actual.set(x, y, 1.0); // target visible in front
                } else {
                    vdi.set(x, y, 0.8);
                    actual.set(x, y, 0.8); // sensor sees the robot
                }
            }
        }
        let mask = occlusion_mask(&actual, &vdi, &cfg()).unwrap();
        for y in 0..4 {
            for x in 0..w {
                let expected = if x < w / 2 {
                    OcclusionLabel::Visible
                } else {
                    OcclusionLabel::Occluded
                };
                assert_eq!(mask.get(x, y), expected, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = DepthImage::new_invalid(4, 4);
        let b = DepthImage::new_invalid(5, 4);
        assert!(matches!(
            occlusion_mask(&a, &b, &cfg()).unwrap_err(),
            OcclusionError::DimensionMismatch { .. }
        ));
    }

    fn mask_of(labels: &[(OcclusionLabel, usize)], w: u32, h: u32) -> OcclusionMask {
        let mut v = Vec::new();
        for &(l, n) in labels {
            v.extend(std::iter::repeat_n(l, n));
        }
        OcclusionMask::from_labels(w, h, v).unwrap()
    }

    #[test]
    fn region_fraction_arithmetic() {
        let mask = mask_of(
            &[
                (OcclusionLabel::Occluded, 5),
                (OcclusionLabel::Visible, 95),
            ],
            10,
            10,
        );
        let region = Region::Rect { x: 0, y: 0, w: 10, h: 10 };
        let f =
            region_occlusion_fraction(&mask, &region, UnknownPolicy::CountAsOccluded).unwrap();
        assert!((f - 0.05).abs() < 1e-15);
    }

    #[test]
    fn region_fraction_no_robot_is_zero() {
        let mask = mask_of(&[(OcclusionLabel::NoRobot, 100)], 10, 10);
        let region = Region::Rect { x: 2, y: 2, w: 4, h: 4 };
        let f =
            region_occlusion_fraction(&mask, &region, UnknownPolicy::CountAsOccluded).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn region_fraction_unknown_policies() {
        let mask = mask_of(
            &[
                (OcclusionLabel::Occluded, 2),
                (OcclusionLabel::Visible, 6),
                (OcclusionLabel::Unknown, 2),
            ],
            10,
            1,
        );
        let region = Region::Rect { x: 0, y: 0, w: 10, h: 1 };
        let occ =
            region_occlusion_fraction(&mask, &region, UnknownPolicy::CountAsOccluded).unwrap();
        let vis =
            region_occlusion_fraction(&mask, &region, UnknownPolicy::CountAsVisible).unwrap();
        let ign = region_occlusion_fraction(&mask, &region, UnknownPolicy::Ignore).unwrap();
        assert!((occ - 0.4).abs() < 1e-15);
        assert!((vis - 0.2).abs() < 1e-15);
        assert!((ign - 0.25).abs() < 1e-15);
    }

    #[test]
    fn empty_and_out_of_bounds_regions_rejected() {
        let mask = mask_of(&[(OcclusionLabel::Visible, 16)], 4, 4);
        let empty = Region::Pixels(vec![]);
        assert!(matches!(
            region_occlusion_fraction(&mask, &empty, UnknownPolicy::CountAsOccluded),
            Err(OcclusionError::EmptyRegion)
        ));
        let oob = Region::Rect { x: 2, y: 2, w: 4, h: 4 };
        assert!(matches!(
            region_occlusion_fraction(&mask, &oob, UnknownPolicy::CountAsOccluded),
            Err(OcclusionError::RegionOutOfBounds { .. })
        ));
    }

    fn centered_camera() -> CameraModel {
        CameraModel::new(
            640,
            480,
            600.0,
            600.0,
            320.0,
            240.0,
            0.5,
            3.0,
            RigidTransform::identity(),
        )
        .unwrap()
    }

    #[test]
    fn safe_deproject_visible_pixel() {
        let cam = centered_camera();
        let mut actual = DepthImage::new_invalid(640, 480);
        actual.set(320, 240, 2.0);
        let mut labels = vec![OcclusionLabel::NoRobot; 640 * 480];
        labels[240 * 640 + 320] = OcclusionLabel::Visible;
        let mask = OcclusionMask::from_labels(640, 480, labels).unwrap();
        match safe_deproject(320, 240, &actual, &mask, &cam).unwrap() {
            SafeDeprojection::Point(p) => {
                assert!((p - Point3::new(0.0, 0.0, 2.0)).norm() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn safe_deproject_occluded_never_returns_a_point() {
        let cam = centered_camera();
        let mut actual = DepthImage::new_invalid(640, 480);
        actual.set(100, 100, 1.5); // robot surface depth
        let mut labels = vec![OcclusionLabel::NoRobot; 640 * 480];
        labels[100 * 640 + 100] = OcclusionLabel::Occluded;
        let mask = OcclusionMask::from_labels(640, 480, labels).unwrap();
        assert_eq!(
            safe_deproject(100, 100, &actual, &mask, &cam).unwrap(),
            SafeDeprojection::OccludedSignal
        );
    }

    #[test]
    fn safe_deproject_no_measurement_is_unknown() {
        let cam = centered_camera();
        let actual = DepthImage::new_invalid(640, 480);
        let mask =
            OcclusionMask::from_labels(640, 480, vec![OcclusionLabel::NoRobot; 640 * 480])
                .unwrap();
        assert_eq!(
            safe_deproject(5, 5, &actual, &mask, &cam).unwrap(),
            SafeDeprojection::UnknownSignal
        );
        assert!(safe_deproject(640, 0, &actual, &mask, &cam).is_err());
    }

    #[test]
    fn overlay_tints_exactly_the_occluded_pixels() {
        let mask = mask_of(
            &[
                (OcclusionLabel::Occluded, 8),
                (OcclusionLabel::NoRobot, 8),
            ],
            4,
            4,
        );
        let base = RgbImage::filled(4, 4, [100, 100, 100]);
        let out = overlay(&mask, &base).unwrap();
        for i in 0..8 {
            assert_ne!(&out.data[3 * i..3 * i + 3], &base.data[3 * i..3 * i + 3]);
        }
        assert_eq!(&out.data[24..], &base.data[24..]);
    }

    #[test]
    fn overlay_identity_on_all_no_robot() {
        let mask = mask_of(&[(OcclusionLabel::NoRobot, 16)], 4, 4);
        let base = RgbImage::filled(4, 4, [10, 200, 30]);
        assert_eq!(overlay(&mask, &base).unwrap(), base);
    }

    #[test]
    fn exhaustive_labels_sum_to_pixel_count() {
        let cfg = cfg();
        let depths = [0.0, 0.4, 1.0, 1.49, 1.5, 2.0, f64::NAN];
        let mut labels = Vec::new();
        for &d in &depths {
            for &dv in &depths {
                labels.push(classify_pixel(d, dv, &cfg));
            }
        }
        let mask = OcclusionMask::from_labels(7, 7, labels).unwrap();
        assert_eq!(mask.label_counts().total(), 49);
    }
}
