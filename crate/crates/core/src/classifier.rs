//! Belief-rule extraction and classification.
//!
//! Each condition block of the reduced table becomes one rule: its antecedent
//! is the block's level pattern, its beliefs are the inclusion degrees of the
//! block in each decision class, and its weight θ is the block's share of the
//! universe. A sample matching an antecedent takes that rule's most believed
//! decision; otherwise the rule with the highest weighted similarity
//! `Σ ε_i · S_i` decides.

use std::collections::HashMap;
use std::io;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::entropy::WeightVector;
use crate::error::{Error, Result};
use crate::quantize::RiskLevel;
use crate::table::{block_ids, DecisionCoding, DecisionTable, Level};

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    /// Levels aligned with the model's reduct attributes.
    pub antecedent: Vec<Level>,
    /// Non-zero beliefs by decision code, ascending code order. Sums to one.
    pub beliefs: Vec<(Level, f64)>,
    pub theta: f64,
    pub support: u64,
}

impl Rule {
    /// Most believed decision; ties go to the higher (more severe) code.
    pub fn decision(&self) -> (Level, f64) {
        self.beliefs
            .iter()
            .copied()
            .fold(None::<(Level, f64)>, |best, (d, b)| match best {
                Some((_, bb)) if bb > b => best,
                _ => Some((d, b)),
            })
            .expect("rules carry at least one belief")
    }

    /// Belief mass on the Moderate and High classes.
    pub fn positive_mass(&self) -> f64 {
        self.beliefs
            .iter()
            .filter(|(d, _)| is_positive_code(*d))
            .fold(0.0, |acc, (_, b)| acc + b)
    }
}

pub(crate) fn is_positive_code(code: Level) -> bool {
    RiskLevel::from_code(code).is_some_and(RiskLevel::is_positive)
}

/// One rule per condition block of `dt`, ordered by antecedent.
pub fn extract_rules(dt: &DecisionTable) -> Result<Vec<Rule>> {
    if dt.is_empty() {
        return Err(Error::EmptyTable);
    }
    let attrs = dt.condition_attrs();
    let (ids, count) = block_ids(dt, &attrs)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (o, &id) in ids.iter().enumerate() {
        members[id as usize].push(o);
    }
    let n = dt.len() as f64;
    let values = dt.decision_values();
    let mut rules: Vec<Rule> = members
        .iter()
        .map(|objs| {
            let mut counts = vec![0u64; values.len()];
            for &o in objs {
                counts[dt.decision_index()[o]] += 1;
            }
            let size = objs.len() as u64;
            Rule {
                antecedent: dt.row(objs[0]),
                beliefs: values
                    .iter()
                    .zip(&counts)
                    .filter(|(_, &c)| c > 0)
                    .map(|(&v, &c)| (v, c as f64 / size as f64))
                    .collect(),
                theta: size as f64 / n,
                support: size,
            }
        })
        .collect();
    rules.sort_by(|a, b| a.antecedent.cmp(&b.antecedent));
    Ok(rules)
}

/// Per-attribute similarity `1 − |a − b| / (max − min)`, clamped to [0, 1].
/// A constant attribute (`max == min`) scores 1 on equal levels and 0 otherwise.
pub fn similarity(a: Level, b: Level, range: (Level, Level)) -> f64 {
    let (lo, hi) = range;
    if hi <= lo {
        return if a == b { 1.0 } else { 0.0 };
    }
    let d = f64::from(a.abs_diff(b));
    (1.0 - d / f64::from(hi - lo)).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    Exact,
    Similarity,
}

impl MatchKind {
    pub fn name(self) -> &'static str {
        match self {
            MatchKind::Exact => "exact",
            MatchKind::Similarity => "similarity",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub decision: Level,
    /// Belief of the chosen rule in `decision`.
    pub belief: f64,
    pub matched: MatchKind,
    /// Weighted similarity to the chosen rule; 1 for exact matches.
    pub similarity: f64,
    /// θ_k · Σ ε_i S_i of the chosen rule.
    pub diagnostic: f64,
    /// Similarity-weighted belief mass on the positive (Moderate/High) classes.
    pub risk_score: f64,
    /// Index of the chosen rule.
    pub rule: usize,
}

/// Trained classifier: reduct, attribute weights, level ranges and rules.
#[derive(Clone, Debug)]
pub struct VprsModel {
    pub beta: f64,
    pub reduct: Vec<String>,
    pub decision: String,
    pub coding: DecisionCoding,
    pub weights: Vec<f64>,
    /// Observed `(min, max)` level per reduct attribute.
    pub ranges: Vec<(Level, Level)>,
    pub rules: Vec<Rule>,
    index: HashMap<Vec<Level>, usize>,
}

impl PartialEq for VprsModel {
    fn eq(&self, other: &Self) -> bool {
        self.beta == other.beta
            && self.reduct == other.reduct
            && self.decision == other.decision
            && self.coding == other.coding
            && self.weights == other.weights
            && self.ranges == other.ranges
            && self.rules == other.rules
    }
}

impl VprsModel {
    /// Fits rules on `dt` restricted to the weighted attributes.
    pub fn fit(dt: &DecisionTable, beta: f64, weights: &WeightVector) -> Result<Self> {
        if weights.attrs.is_empty() {
            return Err(Error::Domain(
                "model needs at least one reduct attribute".into(),
            ));
        }
        let reduced = dt.restrict(&weights.attrs)?;
        let rules = extract_rules(&reduced)?;
        let ranges = reduced
            .condition_attrs()
            .into_iter()
            .map(|a| reduced.level_range(a))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(
            beta,
            reduced.condition_names().to_vec(),
            dt.decision_name().to_string(),
            dt.coding(),
            weights.weights.clone(),
            ranges,
            rules,
        )
    }

    pub fn from_parts(
        beta: f64,
        reduct: Vec<String>,
        decision: String,
        coding: DecisionCoding,
        weights: Vec<f64>,
        ranges: Vec<(Level, Level)>,
        rules: Vec<Rule>,
    ) -> Result<Self> {
        let corrupt = |m: String| Err(Error::CorruptModel(m));
        if !(beta > 0.5 && beta <= 1.0) {
            return corrupt(format!("beta {beta} outside (0.5, 1]"));
        }
        if reduct.is_empty() {
            return corrupt("empty reduct".into());
        }
        if weights.len() != reduct.len() || ranges.len() != reduct.len() {
            return corrupt("weights and ranges must align with the reduct".into());
        }
        if weights.iter().any(|&w| !(w > 0.0 && w <= 1.0))
            || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return corrupt("weights must be positive and sum to 1".into());
        }
        if ranges.iter().any(|&(lo, hi)| lo > hi) {
            return corrupt("range with min above max".into());
        }
        if rules.is_empty() {
            return corrupt("no rules".into());
        }
        let mut index = HashMap::with_capacity(rules.len());
        for (k, r) in rules.iter().enumerate() {
            if r.antecedent.len() != reduct.len() {
                return corrupt(format!("rule {k} antecedent does not cover the reduct"));
            }
            if r.beliefs.is_empty()
                || r.beliefs.iter().any(|&(_, b)| !(0.0..=1.0).contains(&b))
                || (r.beliefs.iter().map(|(_, b)| b).sum::<f64>() - 1.0).abs() > 1e-9
            {
                return corrupt(format!("rule {k} beliefs must lie in [0, 1] and sum to 1"));
            }
            if !(r.theta > 0.0 && r.theta <= 1.0) || r.support == 0 {
                return corrupt(format!("rule {k} has invalid theta or support"));
            }
            if index.insert(r.antecedent.clone(), k).is_some() {
                return corrupt(format!("rule {k} duplicates an earlier antecedent"));
            }
        }
        Ok(Self {
            beta,
            reduct,
            decision,
            coding,
            weights,
            ranges,
            rules,
            index,
        })
    }

    pub fn decision_label(&self, code: Level) -> String {
        self.coding.label(code)
    }

    /// Σ ε_i · S_i between a sample and a rule antecedent.
    pub fn weighted_similarity(&self, sample: &[Level], rule: &Rule) -> Result<f64> {
        self.check_sample(sample)?;
        Ok(self.score(sample, &rule.antecedent))
    }

    fn score(&self, a: &[Level], b: &[Level]) -> f64 {
        a.iter()
            .zip(b)
            .zip(self.weights.iter().zip(&self.ranges))
            .map(|((&x, &y), (&w, &range))| w * similarity(x, y, range))
            .sum()
    }

    fn check_sample(&self, sample: &[Level]) -> Result<()> {
        if sample.len() != self.reduct.len() {
            let missing = self.reduct[sample.len().min(self.reduct.len())..].to_vec();
            return Err(if missing.is_empty() {
                Error::Domain(format!(
                    "sample has {} levels, model reduct has {}",
                    sample.len(),
                    self.reduct.len()
                ))
            } else {
                Error::SchemaMismatch(missing)
            });
        }
        Ok(())
    }

    /// Classifies one sample given as levels aligned with `reduct`.
    pub fn classify(&self, sample: &[Level]) -> Result<Prediction> {
        self.check_sample(sample)?;
        if self.rules.is_empty() {
            return Err(Error::Domain("model has no rules".into()));
        }
        let (k, matched, sim) = match self.index.get(sample) {
            Some(&k) => (k, MatchKind::Exact, 1.0),
            None => {
                let mut best = (0usize, f64::NEG_INFINITY);
                for (k, rule) in self.rules.iter().enumerate() {
                    let s = self.score(sample, &rule.antecedent);
                    let (bk, bs) = best;
                    if s > bs || (s == bs && rule.theta > self.rules[bk].theta) {
                        best = (k, s);
                    }
                }
                (best.0, MatchKind::Similarity, best.1)
            }
        };
        let rule = &self.rules[k];
        let (decision, belief) = rule.decision();
        Ok(Prediction {
            decision,
            belief,
            matched,
            similarity: sim,
            diagnostic: rule.theta * sim,
            risk_score: sim * rule.positive_mass(),
            rule: k,
        })
    }

    /// Rows of `dt` projected onto the reduct, by attribute name.
    pub fn project(&self, dt: &DecisionTable) -> Result<Vec<Vec<Level>>> {
        let mut cols = Vec::with_capacity(self.reduct.len());
        let mut missing = Vec::new();
        for name in &self.reduct {
            match dt.condition_names().iter().position(|n| n == name) {
                Some(i) => cols.push(dt.column(i)?),
                None => missing.push(name.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::SchemaMismatch(missing));
        }
        Ok((0..dt.len())
            .map(|o| cols.iter().map(|c| c[o]).collect())
            .collect())
    }

    pub fn classify_table(&self, dt: &DecisionTable) -> Result<Vec<Prediction>> {
        self.project(dt)?.iter().map(|s| self.classify(s)).collect()
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            beta: round_sig(self.beta),
            reduct: self.reduct.clone(),
            weights: self.weights.iter().map(|&w| round_sig(w)).collect(),
            ranges: self
                .reduct
                .iter()
                .zip(&self.ranges)
                .map(|(n, &(lo, hi))| (n.clone(), [lo, hi]))
                .collect(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleFile {
                    antecedent: self
                        .reduct
                        .iter()
                        .cloned()
                        .zip(r.antecedent.iter().copied())
                        .collect(),
                    beliefs: r
                        .beliefs
                        .iter()
                        .map(|&(d, b)| (self.coding.label(d), round_sig(b)))
                        .collect(),
                    theta: round_sig(r.theta),
                    support: r.support,
                })
                .collect(),
            decision: self.decision.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::CorruptModel(e.to_string()))?;
        let keys: Vec<&String> = file.rules.iter().flat_map(|r| r.beliefs.keys()).collect();
        let coding = if !keys.is_empty() && keys.iter().all(|k| k.parse::<RiskLevel>().is_ok()) {
            DecisionCoding::Risk
        } else {
            DecisionCoding::Numeric
        };
        let ranges = file
            .reduct
            .iter()
            .map(|n| {
                file.ranges
                    .get(n)
                    .map(|r| (r[0], r[1]))
                    .ok_or_else(|| Error::CorruptModel(format!("no range for `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if file.ranges.len() != file.reduct.len() {
            return Err(Error::CorruptModel(
                "ranges list attributes outside the reduct".into(),
            ));
        }
        let rules = file
            .rules
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let names: Vec<&String> = r.antecedent.keys().collect();
                if names.len() != file.reduct.len()
                    || names.iter().zip(&file.reduct).any(|(a, b)| *a != b)
                {
                    return Err(Error::CorruptModel(format!(
                        "rule {k} antecedent does not match the reduct"
                    )));
                }
                let mut beliefs = r
                    .beliefs
                    .iter()
                    .map(|(label, &b)| {
                        coding.parse(label).map(|d| (d, b)).ok_or_else(|| {
                            Error::CorruptModel(format!("rule {k}: bad decision `{label}`"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                beliefs.sort_by_key(|&(d, _)| d);
                Ok(Rule {
                    antecedent: r.antecedent.values().copied().collect(),
                    beliefs,
                    theta: r.theta,
                    support: r.support,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(
            file.beta,
            file.reduct,
            file.decision,
            coding,
            file.weights,
            ranges,
            rules,
        )
    }

    pub fn write_json<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_json().as_bytes())
    }
}

/// Rounds to 12 significant digits so printed models re-read to identical bits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    beta: f64,
    reduct: Vec<String>,
    weights: Vec<f64>,
    ranges: IndexMap<String, [Level; 2]>,
    rules: Vec<RuleFile>,
    decision: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    antecedent: IndexMap<String, Level>,
    beliefs: IndexMap<String, f64>,
    theta: f64,
    support: u64,
}
