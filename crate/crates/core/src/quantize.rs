//! Discretization of raw near-crash event records into attribute levels, and
//! risk grading from the braking deceleration.
//!
//! Level codes:
//!
//! | attr | meaning                    | levels                                        |
//! |------|----------------------------|-----------------------------------------------|
//! | c1   | driver action              | 0..=7, `4·acc + 2·brake + turn`               |
//! | c2   | gender                     | 1 male, 2 female                              |
//! | c3   | age group                  | 1 18–30, 2 31–45, 3 46–60, 4 >60              |
//! | c4   | velocity (km/h)            | 1 [0,40], 2 (40,50], 3 (50,60], 4 >60         |
//! | c5   | TTC, occupied lane (s)     | 1 >5 or absent, 2 (2,5], 3 (0,2]              |
//! | c6   | TTC, neighbor lane (s)     | as c5                                         |
//! | c7   | road segment               | 1 corridor, 2 intersection, 3 viaduct, 4 tunnel |
//! | c8   | traffic flow               | 1 congested, 2 moderate, 3 free               |
//! | c9   | slipperiness (friction μ)  | 1 [0.7,1], 2 [0.4,0.7), 3 [0,0.4)             |

use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::Level;

pub const CONDITION_NAMES: [&str; 9] = ["c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9"];

/// Inclusive level domain of each condition attribute, in `CONDITION_NAMES` order.
pub const CONDITION_DOMAINS: [(Level, Level); 9] = [
    (0, 7),
    (1, 2),
    (1, 4),
    (1, 4),
    (1, 3),
    (1, 3),
    (1, 4),
    (1, 3),
    (1, 3),
];

pub const RAW_HEADER: [&str; 12] = [
    "gender",
    "age",
    "acc_pedal",
    "brake_switch",
    "turn_indicator",
    "ttc_occupied",
    "ttc_neighbor",
    "velocity",
    "road_segment",
    "traffic_flow",
    "friction",
    "decel",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RiskLevel {
    Low,
    Moderate,
    High,
}

impl RiskLevel {
    pub const ALL: [RiskLevel; 3] = [RiskLevel::Low, RiskLevel::Moderate, RiskLevel::High];

    pub fn code(self) -> Level {
        match self {
            RiskLevel::Low => 1,
            RiskLevel::Moderate => 2,
            RiskLevel::High => 3,
        }
    }

    pub fn from_code(code: Level) -> Option<Self> {
        match code {
            1 => Some(RiskLevel::Low),
            2 => Some(RiskLevel::Moderate),
            3 => Some(RiskLevel::High),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RiskLevel::Low => "Low",
            RiskLevel::Moderate => "Moderate",
            RiskLevel::High => "High",
        }
    }

    /// Moderate and High form the positive (risk) class.
    pub fn is_positive(self) -> bool {
        self != RiskLevel::Low
    }

    /// Deceleration band `(lower, upper]` in m/s² used for synthetic draws.
    pub fn decel_band(self) -> (f64, f64) {
        match self {
            RiskLevel::High => (-8.0, -5.0),
            RiskLevel::Moderate => (-5.0, -2.0),
            RiskLevel::Low => (-2.0, 0.0),
        }
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RiskLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(RiskLevel::Low),
            "moderate" => Ok(RiskLevel::Moderate),
            "high" => Ok(RiskLevel::High),
            _ => Err(Error::field("risk", format!("unknown risk level `{s}`"))),
        }
    }
}

/// Risk grade from braking deceleration (m/s², negative when braking).
///
/// `decel <= -5` is High, `-5 < decel <= -2` Moderate, anything above Low.
/// Values beyond the tabulated `(-8, 0]` range clamp into the end bands.
pub fn risk_label(decel: f64) -> Result<RiskLevel> {
    if !decel.is_finite() {
        return Err(Error::field("decel", "must be finite"));
    }
    Ok(if decel <= -5.0 {
        RiskLevel::High
    } else if decel <= -2.0 {
        RiskLevel::Moderate
    } else {
        RiskLevel::Low
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoadSegment {
    Corridor,
    Intersection,
    Viaduct,
    Tunnel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficFlow {
    Congested,
    Moderate,
    Free,
}

macro_rules! coded_enum {
    ($ty:ident, $field:literal, $($variant:ident = $code:literal : $name:literal),+ $(,)?) => {
        impl $ty {
            pub fn code(self) -> Level {
                match self { $($ty::$variant => $code),+ }
            }

            pub fn from_code(code: Level) -> Option<Self> {
                match code { $($code => Some($ty::$variant),)+ _ => None }
            }

            pub fn name(self) -> &'static str {
                match self { $($ty::$variant => $name),+ }
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($ty::$variant),)+
                    other => other
                        .parse::<Level>()
                        .ok()
                        .and_then($ty::from_code)
                        .ok_or_else(|| Error::field($field, format!("unrecognized value `{s}`"))),
                }
            }
        }
    };
}

coded_enum!(Gender, "gender", Male = 1: "male", Female = 2: "female");
coded_enum!(
    RoadSegment,
    "road_segment",
    Corridor = 1: "corridor",
    Intersection = 2: "intersection",
    Viaduct = 3: "viaduct",
    Tunnel = 4: "tunnel",
);
coded_enum!(
    TrafficFlow,
    "traffic_flow",
    Congested = 1: "congested",
    Moderate = 2: "moderate",
    Free = 3: "free",
);

/// One near-crash observation in sensor units.
#[derive(Clone, Debug, PartialEq)]
pub struct RawEvent {
    pub gender: Gender,
    pub age: u32,
    pub acc_pedal: bool,
    pub brake_switch: bool,
    pub turn_indicator: bool,
    /// Seconds; `None` when there is no obstacle in the lane.
    pub ttc_occupied: Option<f64>,
    pub ttc_neighbor: Option<f64>,
    /// km/h.
    pub velocity: f64,
    pub road_segment: RoadSegment,
    pub traffic_flow: TrafficFlow,
    pub friction: f64,
    /// m/s², the braking outcome used for the risk label.
    pub decel: f64,
}

impl RawEvent {
    pub fn validate(&self) -> Result<()> {
        for (field, ttc) in [
            ("ttc_occupied", self.ttc_occupied),
            ("ttc_neighbor", self.ttc_neighbor),
        ] {
            if let Some(t) = ttc {
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::field(field, format!("{t} is not a positive time")));
                }
            }
        }
        if !(self.velocity.is_finite() && self.velocity >= 0.0) {
            return Err(Error::field(
                "velocity",
                format!("{} is negative or not finite", self.velocity),
            ));
        }
        if !(0.0..=1.0).contains(&self.friction) {
            return Err(Error::field(
                "friction",
                format!("{} outside [0, 1]", self.friction),
            ));
        }
        if !self.decel.is_finite() {
            return Err(Error::field("decel", "must be finite"));
        }
        if self.age < 18 {
            return Err(Error::field(
                "age",
                format!("{} is below the youngest driver group (18)", self.age),
            ));
        }
        Ok(())
    }

    pub fn driver_action_code(&self) -> Level {
        4 * self.acc_pedal as Level + 2 * self.brake_switch as Level + self.turn_indicator as Level
    }

    /// Near-crash trigger: hard longitudinal braking or a short occupied-lane TTC.
    pub fn is_near_crash(&self) -> bool {
        self.decel <= DECEL_TRIGGER || self.ttc_occupied.is_some_and(|t| t < TTC_TRIGGER)
    }
}

/// Longitudinal deceleration trigger, m/s².
pub const DECEL_TRIGGER: f64 = -1.5;
/// Occupied-lane TTC trigger, s.
pub const TTC_TRIGGER: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantizedRecord {
    pub c1: Level,
    pub c2: Level,
    pub c3: Level,
    pub c4: Level,
    pub c5: Level,
    pub c6: Level,
    pub c7: Level,
    pub c8: Level,
    pub c9: Level,
    pub risk: RiskLevel,
}

impl QuantizedRecord {
    pub fn levels(&self) -> [Level; 9] {
        [
            self.c1, self.c2, self.c3, self.c4, self.c5, self.c6, self.c7, self.c8, self.c9,
        ]
    }

    pub fn from_levels(levels: [Level; 9], risk: RiskLevel) -> Result<Self> {
        for ((name, &(lo, hi)), v) in CONDITION_NAMES.iter().zip(&CONDITION_DOMAINS).zip(levels) {
            if !(lo..=hi).contains(&v) {
                return Err(Error::field(
                    *name,
                    format!("level {v} outside {lo}..={hi}"),
                ));
            }
        }
        let [c1, c2, c3, c4, c5, c6, c7, c8, c9] = levels;
        Ok(Self {
            c1,
            c2,
            c3,
            c4,
            c5,
            c6,
            c7,
            c8,
            c9,
            risk,
        })
    }
}

pub fn age_group(age: u32) -> Result<Level> {
    match age {
        0..=17 => Err(Error::field(
            "age",
            format!("{age} is below the youngest driver group (18)"),
        )),
        18..=30 => Ok(1),
        31..=45 => Ok(2),
        46..=60 => Ok(3),
        _ => Ok(4),
    }
}

pub fn velocity_level(kmh: f64) -> Level {
    if kmh <= 40.0 {
        1
    } else if kmh <= 50.0 {
        2
    } else if kmh <= 60.0 {
        3
    } else {
        4
    }
}

pub fn ttc_level(ttc: Option<f64>) -> Level {
    match ttc {
        None => 1,
        Some(t) if t > 5.0 => 1,
        Some(t) if t > 2.0 => 2,
        Some(_) => 3,
    }
}

pub fn friction_level(mu: f64) -> Level {
    if mu >= 0.7 {
        1
    } else if mu >= 0.4 {
        2
    } else {
        3
    }
}

pub fn quantize_event(e: &RawEvent) -> Result<QuantizedRecord> {
    e.validate()?;
    Ok(QuantizedRecord {
        c1: e.driver_action_code(),
        c2: e.gender.code(),
        c3: age_group(e.age)?,
        c4: velocity_level(e.velocity),
        c5: ttc_level(e.ttc_occupied),
        c6: ttc_level(e.ttc_neighbor),
        c7: e.road_segment.code(),
        c8: e.traffic_flow.code(),
        c9: friction_level(e.friction),
        risk: risk_label(e.decel)?,
    })
}

fn parse_bool(field: &str, s: &str) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::field(field, format!("`{s}` is not 0 or 1"))),
    }
}

fn parse_f64(field: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::field(field, format!("`{s}` is not a number")))
}

fn parse_opt_f64(field: &str, s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(field, s).map(Some)
    }
}

/// True when a CSV header row is the raw-event schema.
pub fn is_raw_header(header: &csv::StringRecord) -> bool {
    header.len() == RAW_HEADER.len() && header.iter().zip(RAW_HEADER).all(|(a, b)| a == b)
}

pub fn read_raw_csv<R: io::Read>(reader: R) -> Result<Vec<RawEvent>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if !is_raw_header(&header) {
        return Err(Error::Domain(format!(
            "raw event header must be `{}`",
            RAW_HEADER.join(",")
        )));
    }
    let mut events = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let age = f(1).parse::<u32>().map_err(|_| {
            Error::field("age", format!("`{}` is not a whole number of years", f(1)))
        })?;
        let event = RawEvent {
            gender: f(0).parse()?,
            age,
            acc_pedal: parse_bool("acc_pedal", f(2))?,
            brake_switch: parse_bool("brake_switch", f(3))?,
            turn_indicator: parse_bool("turn_indicator", f(4))?,
            ttc_occupied: parse_opt_f64("ttc_occupied", f(5))?,
            ttc_neighbor: parse_opt_f64("ttc_neighbor", f(6))?,
            velocity: parse_f64("velocity", f(7))?,
            road_segment: f(8).parse()?,
            traffic_flow: f(9).parse()?,
            friction: parse_f64("friction", f(10))?,
            decel: parse_f64("decel", f(11))?,
        };
        event.validate()?;
        events.push(event);
    }
    Ok(events)
}

pub fn write_raw_csv<W: io::Write>(events: &[RawEvent], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RAW_HEADER)?;
    let opt = |t: Option<f64>| t.map(|v| v.to_string()).unwrap_or_default();
    for e in events {
        w.write_record([
            e.gender.name().to_string(),
            e.age.to_string(),
            (e.acc_pedal as u8).to_string(),
            (e.brake_switch as u8).to_string(),
            (e.turn_indicator as u8).to_string(),
            opt(e.ttc_occupied),
            opt(e.ttc_neighbor),
            e.velocity.to_string(),
            e.road_segment.name().to_string(),
            e.traffic_flow.name().to_string(),
            e.friction.to_string(),
            e.decel.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_quantized_csv<W: io::Write>(records: &[QuantizedRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = CONDITION_NAMES.to_vec();
    header.push("risk");
    w.write_record(&header)?;
    for r in records {
        let mut row: Vec<String> = r.levels().iter().map(|v| v.to_string()).collect();
        row.push(r.risk.name().to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
