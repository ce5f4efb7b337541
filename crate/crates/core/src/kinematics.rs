//! Longitudinal car-following safety distance, time to collision, the
//! circular-zone overlap test, and the TTC-threshold risk baseline.

use crate::error::{Error, Result};

/// Default TTC below which the baseline flags risk, s.
pub const DEFAULT_WARN_TTC: f64 = 2.0;
/// TTC at which the continuous baseline score reaches zero, s.
pub const SCORE_TTC_CAP: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarFollowState {
    /// Following vehicle speed, m/s.
    pub v1: f64,
    /// Preceding vehicle speed, m/s.
    pub v2: f64,
    /// Current gap, m.
    pub gap: f64,
    /// Maximum deceleration magnitudes, m/s².
    pub a1_max: f64,
    pub a2_max: f64,
    /// Driver and brake-system delay, s.
    pub tau: f64,
    /// Standstill headway offset, m.
    pub d0: f64,
}

impl CarFollowState {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("v1", self.v1 >= 0.0),
            ("v2", self.v2 >= 0.0),
            ("gap", self.gap > 0.0),
            ("a1_max", self.a1_max > 0.0),
            ("a2_max", self.a2_max > 0.0),
            ("tau", self.tau >= 0.0),
            ("d0", self.d0 >= 0.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::field(name, "outside its physical range"));
            }
        }
        let all = [
            self.v1,
            self.v2,
            self.gap,
            self.a1_max,
            self.a2_max,
            self.tau,
            self.d0,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("car-following state must be finite".into()));
        }
        Ok(())
    }

    /// Closing speed, positive when the gap shrinks.
    pub fn closing_speed(&self) -> f64 {
        self.v1 - self.v2
    }
}

/// Critical warning distance
/// `d_w = v1·τ + v1²/(2·a1) − v2²/(2·a2) + d0`, never below `d0`.
pub fn safety_distance(s: &CarFollowState) -> Result<f64> {
    s.validate()?;
    let d = s.v1 * s.tau + s.v1 * s.v1 / (2.0 * s.a1_max) - s.v2 * s.v2 / (2.0 * s.a2_max) + s.d0;
    Ok(d.max(s.d0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ttc {
    Seconds(f64),
    NotClosing,
}

impl Ttc {
    pub fn from_option(t: Option<f64>) -> Self {
        t.map_or(Ttc::NotClosing, Ttc::Seconds)
    }

    pub fn seconds(self) -> Option<f64> {
        match self {
            Ttc::Seconds(t) => Some(t),
            Ttc::NotClosing => None,
        }
    }
}

pub fn ttc(gap: f64, closing_speed: f64) -> Result<Ttc> {
    if !closing_speed.is_finite() || !gap.is_finite() {
        return Err(Error::Domain("gap and closing speed must be finite".into()));
    }
    if gap <= 0.0 {
        return Err(Error::field(
            "gap",
            format!("{gap} m: vehicles already in contact"),
        ));
    }
    Ok(if closing_speed > 0.0 {
        Ttc::Seconds(gap / closing_speed)
    } else {
        Ttc::NotClosing
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleFootprint {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub length: f64,
    pub width: f64,
    /// Collision-zone radius.
    pub radius: f64,
}

impl VehicleFootprint {
    /// Footprint whose zone radius is half the body diagonal plus `k·|v|`.
    pub fn new(x: f64, y: f64, velocity: (f64, f64), length: f64, width: f64, k: f64) -> Self {
        let (vx, vy) = velocity;
        let radius = 0.5 * length.hypot(width) + k * vx.hypot(vy);
        Self {
            x,
            y,
            vx,
            vy,
            length,
            width,
            radius,
        }
    }
}

/// Zones overlap when the center distance is at most the radius sum.
pub fn zone_overlap(a: &VehicleFootprint, b: &VehicleFootprint) -> bool {
    (a.x - b.x).hypot(a.y - b.y) <= a.radius + b.radius
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineCall {
    pub positive: bool,
    /// `1 − min(t / 5 s, 1)`; zero when not closing.
    pub score: f64,
}

/// TTC-threshold baseline: risk iff `t < warn_threshold`.
pub fn ttc_baseline_classify(t: Ttc, warn_threshold: f64) -> BaselineCall {
    match t {
        Ttc::Seconds(t) => BaselineCall {
            positive: t < warn_threshold,
            score: 1.0 - (t / SCORE_TTC_CAP).min(1.0),
        },
        Ttc::NotClosing => BaselineCall {
            positive: false,
            score: 0.0,
        },
    }
}
