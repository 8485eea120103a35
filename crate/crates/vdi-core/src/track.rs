//! Occlusion-handling policies for target tracking.
//!
//! Two policies cover the experimental use cases: constant-velocity
//! prediction bridges occlusion windows while an object keeps moving (a
//! conveyor pickup), and last-valid hold freezes the commanded target while
//! a keypoint is occluded (a handover). Both switch on the same signal: the
//! region occlusion fraction crossing a threshold, strictly above meaning
//! occluded.

use nalgebra::{Point3, Vector3};
use thiserror::Error;

/// How the current state estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    /// Position comes from a fresh measurement.
    Measured,
    /// Position extrapolated through an occlusion.
    Predicted,
    /// No usable measurement seen yet.
    Empty,
}

/// Tracker state: last pose estimate, velocity, and update time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackState {
    pub status: TrackStatus,
    /// World-frame position; `None` only while `Empty`.
    pub position: Option<Point3<f64>>,
    pub velocity: Vector3<f64>,
    pub timestamp: f64,
}

impl TrackState {
    pub fn empty() -> Self {
        Self {
            status: TrackStatus::Empty,
            position: None,
            velocity: Vector3::zeros(),
            timestamp: f64::NEG_INFINITY,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.status == TrackStatus::Empty
    }
}

/// Policy parameters.
#[derive(Debug, Clone, Copy)]
pub struct PolicyConfig {
    /// Region occlusion fraction above which measurements are distrusted.
    pub occlusion_threshold: f64,
    /// Exponential blend factor for velocity updates: 0 keeps the raw
    /// finite difference, 1 never updates velocity.
    pub velocity_smoothing: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            occlusion_threshold: 0.05,
            velocity_smoothing: 0.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum TrackError {
    #[error("occlusion threshold must lie in [0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("velocity smoothing must lie in [0, 1], got {0}")]
    InvalidSmoothing(f64),
    #[error("timestamp {t} does not advance past state time {state_t}")]
    NonMonotonicTimestamp { t: f64, state_t: f64 },
    #[error("measurement has a non-finite component")]
    NonFiniteMeasurement,
    #[error("occlusion fraction must lie in [0, 1], got {0}")]
    InvalidFraction(f64),
}

impl PolicyConfig {
    pub fn validated(self) -> Result<Self, TrackError> {
        if !(0.0..=1.0).contains(&self.occlusion_threshold)
            || !self.occlusion_threshold.is_finite()
        {
            return Err(TrackError::InvalidThreshold(self.occlusion_threshold));
        }
        if !(0.0..=1.0).contains(&self.velocity_smoothing)
            || !self.velocity_smoothing.is_finite()
        {
            return Err(TrackError::InvalidSmoothing(self.velocity_smoothing));
        }
        Ok(self)
    }
}

/// Constant-velocity tracker update.
///
/// While the occlusion fraction stays at or below the threshold and a
/// measurement is present, the tracker follows measurements and re-estimates
/// velocity from finite differences (blended by `velocity_smoothing`).
/// Strictly above the threshold — or with no measurement — it coasts on the
/// last velocity estimate. An `Empty` state with nothing usable stays empty.
pub fn cv_update(
    state: &TrackState,
    measurement: Option<Point3<f64>>,
    occlusion_fraction: f64,
    t: f64,
    cfg: &PolicyConfig,
) -> Result<TrackState, TrackError> {
    let cfg = cfg.validated()?;
    if !(0.0..=1.0).contains(&occlusion_fraction) || !occlusion_fraction.is_finite() {
        return Err(TrackError::InvalidFraction(occlusion_fraction));
    }
    if let Some(m) = &measurement {
        if !m.iter().all(|c| c.is_finite()) {
            return Err(TrackError::NonFiniteMeasurement);
        }
    }
    if !state.is_empty() && (!t.is_finite() || t <= state.timestamp) {
        return Err(TrackError::NonMonotonicTimestamp {
            t,
            state_t: state.timestamp,
        });
    }

    let trusted = occlusion_fraction <= cfg.occlusion_threshold;
    match (measurement, trusted, state.position) {
        (Some(m), true, previous) => {
            let velocity = match previous {
                Some(p) => {
                    let dt = t - state.timestamp;
                    let fd = (m - p) / dt;
                    fd * (1.0 - cfg.velocity_smoothing)
                        + state.velocity * cfg.velocity_smoothing
                }
                None => Vector3::zeros(),
            };
            Ok(TrackState {
                status: TrackStatus::Measured,
                position: Some(m),
                velocity,
                timestamp: t,
            })
        }
        _ => match state.position {
            Some(p) => {
                let dt = t - state.timestamp;
                Ok(TrackState {
                    status: TrackStatus::Predicted,
                    position: Some(p + state.velocity * dt),
                    velocity: state.velocity,
                    timestamp: t,
                })
            }
            // Nothing to extrapolate from.
            None => Ok(*state),
        },
    }
}

/// Last-valid-target hold: pass fresh targets through while visible, freeze
/// the previous one while occluded. Idempotent under repeated occluded
/// steps; recovers instantly when the target reappears.
pub fn hold_update(
    state: Option<Point3<f64>>,
    target: Option<Point3<f64>>,
    occluded: bool,
) -> Option<Point3<f64>> {
    match (occluded, target) {
        (false, Some(t)) => Some(t),
        _ => state,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PolicyConfig {
        PolicyConfig::default()
    }

    #[test]
    fn finite_difference_velocity_from_rest() {
        let s0 = TrackState::empty();
        let s1 = cv_update(&s0, Some(Point3::new(0.0, 0.0, 0.0)), 0.0, 0.0, &cfg()).unwrap();
        assert_eq!(s1.status, TrackStatus::Measured);
        assert_eq!(s1.velocity, Vector3::zeros());
        let s2 = cv_update(&s1, Some(Point3::new(0.1, 0.0, 0.0)), 0.0, 1.0, &cfg()).unwrap();
        assert_eq!(s2.status, TrackStatus::Measured);
        assert!((s2.velocity - Vector3::new(0.1, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn occlusion_switches_to_constant_velocity_prediction() {
        let s0 = TrackState::empty();
        let s1 = cv_update(&s0, Some(Point3::new(0.0, 0.0, 0.0)), 0.0, 0.0, &cfg()).unwrap();
        let s2 = cv_update(&s1, Some(Point3::new(0.1, 0.0, 0.0)), 0.0, 1.0, &cfg()).unwrap();
        // Fraction far above threshold: the (wrong) measurement is ignored.
        let s3 = cv_update(&s2, Some(Point3::new(9.0, 9.0, 9.0)), 0.5, 2.0, &cfg()).unwrap();
        let s4 = cv_update(&s3, None, 0.5, 3.0, &cfg()).unwrap();
        assert_eq!(s3.status, TrackStatus::Predicted);
        assert_eq!(s4.status, TrackStatus::Predicted);
        assert!((s3.position.unwrap() - Point3::new(0.2, 0.0, 0.0)).norm() < 1e-12);
        assert!((s4.position.unwrap() - Point3::new(0.3, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn threshold_is_strictly_greater_than() {
        let s0 = TrackState::empty();
        let s1 = cv_update(&s0, Some(Point3::origin()), 0.0, 0.0, &cfg()).unwrap();
        // Exactly at the 5% threshold: still trusted.
        let s2 = cv_update(&s1, Some(Point3::new(0.1, 0.0, 0.0)), 0.05, 1.0, &cfg()).unwrap();
        assert_eq!(s2.status, TrackStatus::Measured);
        // Just above: predicted.
        let s3 = cv_update(&s2, Some(Point3::new(0.2, 0.0, 0.0)), 0.0500001, 2.0, &cfg())
            .unwrap();
        assert_eq!(s3.status, TrackStatus::Predicted);
    }

    #[test]
    fn empty_without_usable_measurement_stays_empty() {
        let s0 = TrackState::empty();
        let s1 = cv_update(&s0, None, 0.0, 0.0, &cfg()).unwrap();
        assert!(s1.is_empty());
        let s2 = cv_update(&s0, Some(Point3::origin()), 0.9, 0.0, &cfg()).unwrap();
        assert!(s2.is_empty());
    }

    #[test]
    fn timestamps_must_advance() {
        let s0 = TrackState::empty();
        let s1 = cv_update(&s0, Some(Point3::origin()), 0.0, 1.0, &cfg()).unwrap();
        let err = cv_update(&s1, Some(Point3::origin()), 0.0, 1.0, &cfg()).unwrap_err();
        assert!(matches!(err, TrackError::NonMonotonicTimestamp { .. }));
    }

    #[test]
    fn non_finite_measurement_rejected() {
        let s0 = TrackState::empty();
        let err = cv_update(
            &s0,
            Some(Point3::new(f64::NAN, 0.0, 0.0)),
            0.0,
            0.0,
            &cfg(),
        )
        .unwrap_err();
        assert!(matches!(err, TrackError::NonFiniteMeasurement));
    }

    #[test]
    fn smoothing_blends_velocity() {
        let cfg = PolicyConfig {
            occlusion_threshold: 0.05,
            velocity_smoothing: 0.5,
        };
        let s0 = TrackState::empty();
        let s1 = cv_update(&s0, Some(Point3::origin()), 0.0, 0.0, &cfg).unwrap();
        let s2 = cv_update(&s1, Some(Point3::new(1.0, 0.0, 0.0)), 0.0, 1.0, &cfg).unwrap();
        // raw fd = 1.0, previous velocity = 0 → blended 0.5
        assert!((s2.velocity - Vector3::new(0.5, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn prediction_matches_constant_velocity_ground_truth() {
        let cfg = cfg();
        let v = Vector3::new(0.12, -0.03, 0.04);
        let p0 = Point3::new(0.3, 0.1, 0.9);
        let truth = |t: f64| p0 + v * t;
        let mut state = TrackState::empty();
        for step in 0..=10 {
            let t = step as f64 * 0.1;
            // sight lost between t = 0.4 and t = 0.8
            let occluded = (0.35..0.85).contains(&t);
            let meas = (!occluded).then(|| truth(t));
            let fraction = if occluded { 1.0 } else { 0.0 };
            state = cv_update(&state, meas, fraction, t, &cfg).unwrap();
            if step >= 2 {
                // After two sightings velocity is exact; predictions must
                // match ground truth to numerical precision.
                assert!(
                    (state.position.unwrap() - truth(t)).norm() < 1e-9,
                    "t={t} status={:?}",
                    state.status
                );
            }
        }
    }

    #[test]
    fn hold_keeps_last_non_occluded_target() {
        let p1 = Point3::new(0.1, 0.2, 0.3);
        let p2 = Point3::new(0.4, 0.5, 0.6);
        let s = hold_update(None, Some(p1), false);
        assert_eq!(s, Some(p1));
        let s = hold_update(s, Some(p2), false);
        assert_eq!(s, Some(p2));
        // Occluded: the (wrong) fresh target is ignored.
        let s = hold_update(s, Some(Point3::new(9.0, 9.0, 9.0)), true);
        assert_eq!(s, Some(p2));
    }

    #[test]
    fn hold_starts_absent_under_occlusion() {
        let s = hold_update(None, Some(Point3::origin()), true);
        assert_eq!(s, None);
        let s = hold_update(s, None, true);
        assert_eq!(s, None);
    }

    #[test]
    fn hold_recovers_on_reappearance() {
        let p2 = Point3::new(0.4, 0.5, 0.6);
        let p3 = Point3::new(0.7, 0.8, 0.9);
        let s = hold_update(Some(p2), Some(p3), false);
        assert_eq!(s, Some(p3));
    }

    #[test]
    fn hold_is_idempotent_while_occluded() {
        let p = Some(Point3::new(1.0, 2.0, 3.0));
        let once = hold_update(p, Some(Point3::origin()), true);
        let twice = hold_update(once, Some(Point3::origin()), true);
        assert_eq!(once, p);
        assert_eq!(twice, p);
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = PolicyConfig {
            occlusion_threshold: 1.1,
            velocity_smoothing: 0.0,
        };
        assert!(matches!(
            bad.validated().unwrap_err(),
            TrackError::InvalidThreshold(_)
        ));
        let bad = PolicyConfig {
            occlusion_threshold: 0.05,
            velocity_smoothing: -0.1,
        };
        assert!(matches!(
            bad.validated().unwrap_err(),
            TrackError::InvalidSmoothing(_)
        ));
    }
}
