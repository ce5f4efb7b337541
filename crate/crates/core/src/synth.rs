//! Seeded synthetic near-crash events with a planted dependency structure.
//!
//! Condition levels are drawn first (from per-attribute categorical marginals,
//! or as a full factorial), the planted rule matching the relevant attributes
//! `(c1, c4, c5, c6, c9)` fixes the deceleration band, and raw sensor values
//! are then sampled on fixed grids inside the bands their levels dictate so
//! that quantizing an event reproduces the drawn levels exactly.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::quantize::{
    risk_label, Gender, RawEvent, RiskLevel, RoadSegment, TrafficFlow, CONDITION_DOMAINS,
    CONDITION_NAMES,
};
use crate::table::Level;

/// Attributes the planted rules condition on, as indices into c1..c9.
pub const RELEVANT: [usize; 5] = [0, 3, 4, 5, 8];

/// Deceleration trigger in hundredths of m/s².
const DECEL_TRIGGER_CENTI: i32 = -150;

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedRule {
    pub name: String,
    /// Allowed levels per relevant attribute (c1, c4, c5, c6, c9); `None` matches any.
    pub pattern: [Option<Vec<Level>>; 5],
    /// Deceleration draw window centre and half-width, m/s².
    pub decel_mean: f64,
    pub decel_spread: f64,
}

impl PlantedRule {
    fn matches(&self, key: &[Level; 5]) -> bool {
        self.pattern
            .iter()
            .zip(key)
            .all(|(p, v)| p.as_ref().is_none_or(|allowed| allowed.contains(v)))
    }

    pub fn band(&self) -> RiskLevel {
        risk_label(self.decel_mean).unwrap_or(RiskLevel::Low)
    }

    /// Integer centi-m/s² interval `[lo, hi]` of admissible draws.
    fn window(&self) -> Option<(i32, i32)> {
        let (blo, bhi) = centi_band(self.band());
        let lo = ((self.decel_mean - self.decel_spread) * 100.0 - 1e-9).ceil() as i32;
        let hi = ((self.decel_mean + self.decel_spread) * 100.0 + 1e-9).floor() as i32;
        let (lo, hi) = (lo.max(blo), hi.min(bhi));
        (lo <= hi).then_some((lo, hi))
    }
}

/// Band `(lower, upper]` as inclusive centi grid bounds.
fn centi_band(level: RiskLevel) -> (i32, i32) {
    match level {
        RiskLevel::High => (-799, -500),
        RiskLevel::Moderate => (-499, -200),
        RiskLevel::Low => (-199, 0),
    }
}

/// Severity points of the default planted structure; a pattern is Low up to 4
/// points, Moderate up to 8, High beyond.
pub fn default_points(key: &[Level; 5]) -> i32 {
    let [c1, c4, c5, c6, c9] = key.map(i32::from);
    let acc = c1 >> 2 & 1;
    let brake = c1 >> 1 & 1;
    let turn = c1 & 1;
    2 * (c5 - 1) + (c4 - 1) + (c9 - 1) + (c6 - 1) + 2 * acc + turn - brake
}

/// One rule per relevant-attribute pattern, banded by [`default_points`].
pub fn default_rules() -> Vec<PlantedRule> {
    relevant_patterns()
        .map(|key| {
            let points = default_points(&key);
            let (mean, spread) = match points {
                ..=4 => (-1.0, 1.0),
                5..=8 => (-3.5, 1.5),
                _ => (-6.5, 1.5),
            };
            PlantedRule {
                name: format!("p{}{}{}{}{}", key[0], key[1], key[2], key[3], key[4]),
                pattern: key.map(|v| Some(vec![v])),
                decel_mean: mean,
                decel_spread: spread,
            }
        })
        .collect()
}

fn relevant_patterns() -> impl Iterator<Item = [Level; 5]> {
    let dom = RELEVANT.map(|i| CONDITION_DOMAINS[i]);
    let mut out = Vec::new();
    let mut key = dom.map(|(lo, _)| lo);
    loop {
        out.push(key);
        let mut i = 4;
        loop {
            if key[i] < dom[i].1 {
                key[i] += 1;
                break;
            }
            key[i] = dom[i].0;
            if i == 0 {
                return out.into_iter();
            }
            i -= 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub sample_count: usize,
    /// Emit the full factorial over all nine attributes instead of sampling.
    pub exhaustive: bool,
    /// Events per factorial cell.
    pub replicates: usize,
    pub seed: u64,
    /// Per-attribute categorical weights over each domain, c1..c9.
    pub marginals: Vec<Vec<f64>>,
    /// First matching rule wins.
    pub rules: Vec<PlantedRule>,
    /// Probability of moving an event's deceleration to another risk band.
    pub label_noise: f64,
    /// Probability that a level-1 TTC is recorded as absent (no obstacle).
    pub absent_ttc: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            sample_count: 1000,
            exhaustive: false,
            replicates: 1,
            seed: 0,
            marginals: CONDITION_DOMAINS
                .iter()
                .map(|&(lo, hi)| {
                    let k = usize::from(hi - lo) + 1;
                    vec![1.0 / k as f64; k]
                })
                .collect(),
            rules: default_rules(),
            label_noise: 0.0,
            absent_ttc: 0.2,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.label_noise) {
            return Err(Error::Config(format!(
                "label_noise {} outside [0, 0.5)",
                self.label_noise
            )));
        }
        if !(0.0..=1.0).contains(&self.absent_ttc) {
            return Err(Error::Config(format!(
                "absent_ttc {} outside [0, 1]",
                self.absent_ttc
            )));
        }
        if self.exhaustive && self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.marginals.len() != 9 {
            return Err(Error::Config(
                "marginals must list all nine attributes".into(),
            ));
        }
        for ((name, w), &(lo, hi)) in CONDITION_NAMES
            .iter()
            .zip(&self.marginals)
            .zip(&CONDITION_DOMAINS)
        {
            let k = usize::from(hi - lo) + 1;
            if w.len() != k {
                return Err(Error::Config(format!(
                    "marginal {name} needs {k} weights, got {}",
                    w.len()
                )));
            }
            if w.iter().any(|&x| x.is_nan() || x < 0.0)
                || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9
            {
                return Err(Error::Config(format!(
                    "marginal {name} must be non-negative and sum to 1"
                )));
            }
        }
        for rule in &self.rules {
            for (slot, allowed) in rule.pattern.iter().enumerate() {
                let attr = RELEVANT[slot];
                let (lo, hi) = CONDITION_DOMAINS[attr];
                if let Some(bad) = allowed.iter().flatten().find(|v| !(lo..=hi).contains(*v)) {
                    return Err(Error::InfeasibleRule {
                        rule: rule.name.clone(),
                        reason: format!(
                            "{} level {bad} outside {lo}..={hi}",
                            CONDITION_NAMES[attr]
                        ),
                    });
                }
            }
            if !(rule.decel_mean.is_finite() && rule.decel_spread >= 0.0) {
                return Err(Error::InfeasibleRule {
                    rule: rule.name.clone(),
                    reason: "deceleration mean must be finite and spread non-negative".into(),
                });
            }
            let Some((wlo, _)) = rule.window() else {
                return Err(Error::InfeasibleRule {
                    rule: rule.name.clone(),
                    reason: format!("draw window misses the {} band", rule.band()),
                });
            };
            // With an occupied-lane TTC above 5 s only hard braking can trigger.
            let allows_far_ttc = rule.pattern[2].as_ref().is_none_or(|v| v.contains(&1));
            if allows_far_ttc && wlo > DECEL_TRIGGER_CENTI {
                return Err(Error::InfeasibleRule {
                    rule: rule.name.clone(),
                    reason: "decelerations above -1.5 m/s² cannot trigger when TTC > 5 s".into(),
                });
            }
        }
        if let Some(key) = relevant_patterns().find(|k| !self.rules.iter().any(|r| r.matches(k))) {
            return Err(Error::Config(format!(
                "planted rules do not cover pattern (c1,c4,c5,c6,c9) = {key:?}"
            )));
        }
        Ok(())
    }

    pub fn rule_for(&self, levels: &[Level; 9]) -> &PlantedRule {
        let key = RELEVANT.map(|i| levels[i]);
        self.rules
            .iter()
            .find(|r| r.matches(&key))
            .expect("validated rules cover every pattern")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.into_config()
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    sample_count: Option<usize>,
    exhaustive: Option<bool>,
    replicates: Option<usize>,
    label_noise: Option<f64>,
    absent_ttc: Option<f64>,
    #[serde(default)]
    marginals: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    rules: Vec<RuleFile>,
    /// Reserved for lateral events; only `false` is accepted.
    lateral: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    name: String,
    c1: Option<Vec<Level>>,
    c4: Option<Vec<Level>>,
    c5: Option<Vec<Level>>,
    c6: Option<Vec<Level>>,
    c9: Option<Vec<Level>>,
    decel_mean: f64,
    decel_spread: f64,
}

impl ConfigFile {
    fn into_config(self) -> Result<SimConfig> {
        if self.lateral == Some(true) {
            return Err(Error::Config("lateral events are not supported".into()));
        }
        let mut cfg = SimConfig::default();
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.sample_count {
            cfg.sample_count = v;
        }
        if let Some(v) = self.exhaustive {
            cfg.exhaustive = v;
        }
        if let Some(v) = self.replicates {
            cfg.replicates = v;
        }
        if let Some(v) = self.label_noise {
            cfg.label_noise = v;
        }
        if let Some(v) = self.absent_ttc {
            cfg.absent_ttc = v;
        }
        for (name, weights) in self.marginals {
            let i = CONDITION_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::Config(format!("unknown marginal attribute `{name}`")))?;
            cfg.marginals[i] = weights;
        }
        if !self.rules.is_empty() {
            cfg.rules = self
                .rules
                .into_iter()
                .map(|r| PlantedRule {
                    name: r.name,
                    pattern: [r.c1, r.c4, r.c5, r.c6, r.c9],
                    decel_mean: r.decel_mean,
                    decel_spread: r.decel_spread,
                })
                .collect();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn factorial_cells() -> Vec<[Level; 9]> {
    let mut cells = vec![[0 as Level; 9]];
    for (i, &(lo, hi)) in CONDITION_DOMAINS.iter().enumerate() {
        cells = cells
            .into_iter()
            .flat_map(|prefix| {
                (lo..=hi).map(move |v| {
                    let mut c = prefix;
                    c[i] = v;
                    c
                })
            })
            .collect();
    }
    cells
}

/// Draws one event with the given levels.
fn realize(cfg: &SimConfig, levels: [Level; 9], rng: &mut ChaCha8Rng) -> RawEvent {
    let rule = cfg.rule_for(&levels);
    let planted = rule.band();
    let (mut lo, mut hi) = if cfg.label_noise > 0.0 && rng.random::<f64>() < cfg.label_noise {
        let others: Vec<RiskLevel> = RiskLevel::ALL
            .into_iter()
            .filter(|&l| l != planted)
            .collect();
        centi_band(others[rng.random_range(0..others.len())])
    } else {
        rule.window().expect("validated rule window")
    };
    let c5 = levels[4];
    if c5 == 1 {
        // only hard braking triggers without a close obstacle
        hi = hi.min(DECEL_TRIGGER_CENTI);
        lo = lo.min(hi);
    }
    let decel_centi = rng.random_range(lo..=hi);
    let decel = f64::from(decel_centi) / 100.0;
    let needs_ttc_trigger = decel_centi > DECEL_TRIGGER_CENTI;

    let tenths =
        |rng: &mut ChaCha8Rng, lo: u32, hi: u32| f64::from(rng.random_range(lo..=hi)) / 10.0;
    let ttc_for = |level: Level, strict: bool, rng: &mut ChaCha8Rng| -> Option<f64> {
        match level {
            1 => {
                if rng.random::<f64>() < cfg.absent_ttc {
                    None
                } else {
                    Some(tenths(rng, 51, 100))
                }
            }
            2 if strict => Some(tenths(rng, 21, 29)),
            2 => Some(tenths(rng, 21, 50)),
            _ => Some(tenths(rng, 1, 20)),
        }
    };
    let bits = levels[0];
    let age = match levels[2] {
        1 => rng.random_range(18..=30),
        2 => rng.random_range(31..=45),
        3 => rng.random_range(46..=60),
        _ => rng.random_range(61..=80),
    };
    let velocity = match levels[3] {
        1 => tenths(rng, 0, 400),
        2 => tenths(rng, 401, 500),
        3 => tenths(rng, 501, 600),
        _ => tenths(rng, 601, 1200),
    };
    let ttc_occupied = ttc_for(c5, needs_ttc_trigger, rng);
    let ttc_neighbor = ttc_for(levels[5], false, rng);
    let friction = f64::from(match levels[8] {
        1 => rng.random_range(70..=100),
        2 => rng.random_range(40..=69),
        _ => rng.random_range(0..=39),
    }) / 100.0;
    RawEvent {
        gender: Gender::from_code(levels[1]).expect("validated level"),
        age,
        acc_pedal: bits & 4 != 0,
        brake_switch: bits & 2 != 0,
        turn_indicator: bits & 1 != 0,
        ttc_occupied,
        ttc_neighbor,
        velocity,
        road_segment: RoadSegment::from_code(levels[6]).expect("validated level"),
        traffic_flow: TrafficFlow::from_code(levels[7]).expect("validated level"),
        friction,
        decel,
    }
}

pub fn generate(cfg: &SimConfig) -> Result<Vec<RawEvent>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cells: Vec<[Level; 9]> = if cfg.exhaustive {
        factorial_cells()
            .into_iter()
            .flat_map(|c| std::iter::repeat_n(c, cfg.replicates))
            .collect()
    } else {
        (0..cfg.sample_count)
            .map(|_| {
                let mut levels = [0 as Level; 9];
                for (i, w) in cfg.marginals.iter().enumerate() {
                    levels[i] = CONDITION_DOMAINS[i].0 + pick_weighted(&mut rng, w) as Level;
                }
                levels
            })
            .collect()
    };
    Ok(cells
        .into_iter()
        .map(|levels| realize(cfg, levels, &mut rng))
        .collect())
}

/// Keeps events that meet the longitudinal near-crash trigger.
pub fn trigger_filter(events: Vec<RawEvent>) -> Vec<RawEvent> {
    events.into_iter().filter(RawEvent::is_near_crash).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantize::quantize_event;
    use proptest::prelude::*;

    #[test]
    fn default_rules_cover_every_pattern() {
        let cfg = SimConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.rules.len(), 864);
        let mut counts = [0usize; 3];
        for r in &cfg.rules {
            counts[usize::from(r.band().code()) - 1] += 1;
        }
        assert_eq!(counts, [198, 468, 198]);
    }

    #[test]
    fn factorial_size() {
        let cells = factorial_cells();
        assert_eq!(cells.len(), 8 * 2 * 4 * 4 * 3 * 3 * 4 * 3 * 3);
        assert_eq!(cells[0], [0, 1, 1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(cells[1], [0, 1, 1, 1, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn same_seed_same_events() {
        let cfg = SimConfig {
            sample_count: 300,
            seed: 9,
            label_noise: 0.1,
            ..SimConfig::default()
        };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = SimConfig {
            seed: 10,
            ..cfg.clone()
        };
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn noise_free_labels_follow_planted_rules() {
        let cfg = SimConfig {
            sample_count: 2000,
            seed: 3,
            ..SimConfig::default()
        };
        for e in generate(&cfg).unwrap() {
            let q = quantize_event(&e).unwrap();
            assert!(e.is_near_crash());
            assert_eq!(q.risk, cfg.rule_for(&q.levels()).band());
        }
    }

    #[test]
    fn label_noise_rate() {
        let cfg = SimConfig {
            sample_count: 20000,
            seed: 5,
            label_noise: 0.2,
            ..SimConfig::default()
        };
        let flipped = generate(&cfg)
            .unwrap()
            .iter()
            .filter(|e| {
                let q = quantize_event(e).unwrap();
                q.risk != cfg.rule_for(&q.levels()).band()
            })
            .count();
        let rate = flipped as f64 / 20000.0;
        assert!((rate - 0.2).abs() < 0.015, "{rate}");
    }

    #[test]
    fn marginals_are_respected() {
        let mut cfg = SimConfig {
            sample_count: 5000,
            seed: 1,
            ..SimConfig::default()
        };
        cfg.marginals[1] = vec![0.0, 1.0];
        assert!(generate(&cfg)
            .unwrap()
            .iter()
            .all(|e| e.gender == Gender::Female));
        cfg.marginals[1] = vec![0.3, 0.3];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn toml_config() {
        let text = r#"
            seed = 11
            sample_count = 50
            label_noise = 0.05
            [marginals]
            c2 = [0.25, 0.75]
            [[rules]]
            name = "braking"
            c5 = [1]
            decel_mean = -6.0
            decel_spread = 1.0
            [[rules]]
            name = "rest"
            decel_mean = -3.0
            decel_spread = 0.5
        "#;
        let cfg = SimConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.rules.len(), 2);
        assert_eq!(cfg.marginals[1], vec![0.25, 0.75]);
        assert_eq!(generate(&cfg).unwrap().len(), 50);
        assert!(SimConfig::from_toml_str("seed = 1\nbogus = 2").is_err());
        assert!(SimConfig::from_toml_str("lateral = true").is_err());
    }

    #[test]
    fn infeasible_rules_are_named() {
        let text = r#"
            [[rules]]
            name = "gentle"
            decel_mean = -0.5
            decel_spread = 0.5
        "#;
        match SimConfig::from_toml_str(text) {
            Err(Error::InfeasibleRule { rule, .. }) => assert_eq!(rule, "gentle"),
            other => panic!("{other:?}"),
        }
        // gentle braking is fine when the TTC trigger can fire
        let text = r#"
            [[rules]]
            name = "close"
            c5 = [2, 3]
            decel_mean = -0.5
            decel_spread = 0.5
            [[rules]]
            name = "far"
            c5 = [1]
            decel_mean = -4.0
            decel_spread = 1.0
        "#;
        SimConfig::from_toml_str(text).unwrap();
        let text = r#"
            [[rules]]
            name = "partial"
            c5 = [3]
            decel_mean = -4.0
            decel_spread = 1.0
        "#;
        assert!(matches!(
            SimConfig::from_toml_str(text),
            Err(Error::Config(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn every_event_triggers_and_quantizes(seed in any::<u64>(), noise in 0.0f64..0.45) {
            let cfg = SimConfig { sample_count: 200, seed, label_noise: noise, ..SimConfig::default() };
            for e in generate(&cfg).unwrap() {
                prop_assert!(e.is_near_crash());
                prop_assert!(quantize_event(&e).is_ok());
            }
        }
    }
}
