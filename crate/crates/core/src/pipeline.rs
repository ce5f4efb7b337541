//! Training and scoring glue: β selection, reduct search, weights and rules.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::{is_positive_code, VprsModel};
use crate::entropy::attribute_weights;
use crate::error::{Error, Result};
use crate::eval::MethodOutput;
use crate::kinematics::{ttc_baseline_classify, Ttc, DEFAULT_WARN_TTC};
use crate::quantize::{RawEvent, RiskLevel};
use crate::reduct::{
    find_reduct_exhaustive, find_reduct_greedy, ReductResult, SearchMethod, EXHAUSTIVE_CAP,
};
use crate::table::DecisionTable;
use crate::vprs::{beta_bound, Precision};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BetaSetting {
    /// Admissible-β bound of the full condition set.
    #[default]
    Auto,
    Explicit(Precision),
}

impl FromStr for BetaSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            Ok(BetaSetting::Auto)
        } else {
            s.parse().map(BetaSetting::Explicit)
        }
    }
}

impl fmt::Display for BetaSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaSetting::Auto => f.write_str("auto"),
            BetaSetting::Explicit(b) => b.fmt(f),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrainOptions {
    pub beta: BetaSetting,
    /// `None` picks exhaustive search when the table is narrow enough.
    pub method: Option<SearchMethod>,
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub model: VprsModel,
    /// Bound before clamping; `None` when β was given explicitly.
    pub raw_bound: Option<Precision>,
    pub beta: Precision,
    pub reduct: ReductResult,
}

pub fn train(dt: &DecisionTable, opts: &TrainOptions) -> Result<TrainReport> {
    if dt.is_empty() {
        return Err(Error::EmptyTable);
    }
    if dt.decision_values().len() < 2 {
        return Err(Error::Degenerate(format!(
            "every object has the same `{}` value, so there is nothing to separate",
            dt.decision_name()
        )));
    }
    let all = dt.condition_attrs();
    let (beta, raw_bound) = match opts.beta {
        BetaSetting::Explicit(b) => (b, None),
        BetaSetting::Auto => {
            // the bound already lies in (0.5, 1], so clamping leaves it unchanged
            let raw = beta_bound(dt, &all)?;
            (raw, Some(raw))
        }
    };
    let method = opts.method.unwrap_or(if all.len() <= EXHAUSTIVE_CAP {
        SearchMethod::Exhaustive
    } else {
        SearchMethod::Greedy
    });
    let reduct = match method {
        SearchMethod::Exhaustive => find_reduct_exhaustive(dt, beta)?,
        SearchMethod::Greedy => find_reduct_greedy(dt, beta)?,
    };
    if reduct.attrs.is_empty() {
        return Err(Error::Degenerate(format!(
            "no condition attribute changes the classification quality at beta {beta}"
        )));
    }
    let weights = attribute_weights(dt, &reduct.attrs)?;
    let model = VprsModel::fit(dt, beta.as_f64(), &weights)?;
    Ok(TrainReport {
        model,
        raw_bound,
        beta,
        reduct,
    })
}

/// Seeded shuffle of `0..n` cut into a training part of `round(n·train_fraction)`
/// objects and the rest, each sorted ascending.
pub fn holdout_split(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::field(
            "train_fraction",
            format!("{train_fraction} outside [0, 1]"),
        ));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (n as f64 * train_fraction).round() as usize;
    let mut test = idx.split_off(cut);
    idx.sort_unstable();
    test.sort_unstable();
    Ok((idx, test))
}

/// Model predictions on `dt` in the comparison-report shape.
pub fn model_output(model: &VprsModel, dt: &DecisionTable) -> Result<MethodOutput> {
    let preds = model.classify_table(dt)?;
    let levels: Option<Vec<RiskLevel>> = preds
        .iter()
        .map(|p| RiskLevel::from_code(p.decision))
        .collect();
    Ok(MethodOutput {
        name: "vprs".into(),
        positive: preds.iter().map(|p| is_positive_code(p.decision)).collect(),
        scores: preds.iter().map(|p| p.risk_score).collect(),
        levels,
    })
}

/// TTC-threshold baseline on the occupied-lane TTC of each event.
pub fn ttc_output(events: &[RawEvent]) -> MethodOutput {
    let calls: Vec<_> = events
        .iter()
        .map(|e| ttc_baseline_classify(Ttc::from_option(e.ttc_occupied), DEFAULT_WARN_TTC))
        .collect();
    MethodOutput {
        name: "ttc".into(),
        positive: calls.iter().map(|c| c.positive).collect(),
        scores: calls.iter().map(|c| c.score).collect(),
        levels: None,
    }
}

/// Risk labels of a table whose decision uses risk codes.
pub fn risk_labels(dt: &DecisionTable) -> Result<Vec<RiskLevel>> {
    dt.decision()
        .iter()
        .map(|&c| {
            RiskLevel::from_code(c).ok_or_else(|| {
                Error::field(
                    dt.decision_name().to_string(),
                    format!("code {c} is not a risk level"),
                )
            })
        })
        .collect()
}
