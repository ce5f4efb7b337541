//! Variable-precision rough set approximations.
//!
//! A condition block enters the β-lower approximation of a decision class when
//! its inclusion degree is at least β, and the β-upper approximation when the
//! degree exceeds 1 − β. All threshold tests cross-multiply integer counts.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::table::{block_ids, Contingency, DecisionTable, Degree, Level};

/// Precision parameter β ∈ (0.5, 1], held as an exact ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(Degree);

impl Precision {
    pub const ONE: Precision = Precision(Degree::new_raw(1, 1));

    pub fn new(value: Degree) -> Result<Self> {
        if value > Degree::new(1, 2) && value <= Degree::from_integer(1) {
            Ok(Precision(value))
        } else {
            Err(Error::field("beta", format!("{value} is outside (0.5, 1]")))
        }
    }

    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::field("beta", "zero denominator"));
        }
        Self::new(Degree::new(num, den))
    }

    /// Exact conversion of the shortest decimal form of `x`.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::field("beta", "must be finite"));
        }
        format!("{x}").parse()
    }

    pub fn ratio(self) -> Degree {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// `hits / size >= β`.
    pub fn admits(self, hits: u64, size: u64) -> bool {
        hits as u128 * *self.0.denom() as u128 >= *self.0.numer() as u128 * size as u128
    }

    /// `hits / size > 1 - β`.
    pub fn exceeds_complement(self, hits: u64, size: u64) -> bool {
        let (num, den) = (*self.0.numer() as u128, *self.0.denom() as u128);
        hits as u128 * den > (den - num) * size as u128
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Precision {
    type Err = Error;

    /// Accepts decimals (`0.6`) and fractions (`2/3`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::field("beta", format!("`{s}` is not a number"));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse::<u64>().map_err(|_| bad())?;
            let d = d.trim().parse::<u64>().map_err(|_| bad())?;
            return Self::from_ratio(n, d);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty()
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || frac.len() > 18
        {
            return Err(bad());
        }
        let scale = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let num = int
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(bad)?;
        Self::from_ratio(num, scale)
    }
}

fn check_condition_attrs(dt: &DecisionTable, attrs: &[usize]) -> Result<()> {
    match attrs.iter().find(|&&a| a >= dt.n_conditions()) {
        Some(&a) if a == dt.decision_attr() => Err(Error::Domain(format!(
            "decision attribute `{}` cannot be a condition",
            dt.decision_name()
        ))),
        Some(&a) => Err(Error::UnknownAttribute(format!("#{a}"))),
        None => Ok(()),
    }
}

fn approx(
    dt: &DecisionTable,
    attrs: &[usize],
    dec_value: Level,
    keep: impl Fn(u64, u64) -> bool,
) -> Result<Vec<usize>> {
    check_condition_attrs(dt, attrs)?;
    let (ids, count) = block_ids(dt, attrs)?;
    let mut sizes = vec![0u64; count];
    let mut hits = vec![0u64; count];
    for (&id, &d) in ids.iter().zip(dt.decision()) {
        sizes[id as usize] += 1;
        hits[id as usize] += u64::from(d == dec_value);
    }
    let passing: Vec<bool> = hits.iter().zip(&sizes).map(|(&h, &s)| keep(h, s)).collect();
    Ok(ids
        .iter()
        .enumerate()
        .filter(|&(_, &id)| passing[id as usize])
        .map(|(o, _)| o)
        .collect())
}

/// Objects in condition blocks whose inclusion degree in class `dec_value` is ≥ β.
pub fn lower_approx(
    dt: &DecisionTable,
    attrs: &[usize],
    dec_value: Level,
    beta: Precision,
) -> Result<Vec<usize>> {
    approx(dt, attrs, dec_value, |h, s| beta.admits(h, s))
}

/// Objects in condition blocks whose inclusion degree in class `dec_value` is > 1 − β.
pub fn upper_approx(
    dt: &DecisionTable,
    attrs: &[usize],
    dec_value: Level,
    beta: Precision,
) -> Result<Vec<usize>> {
    approx(dt, attrs, dec_value, |h, s| beta.exceeds_complement(h, s))
}

/// Quality of classification γ^β(attrs, D): the fraction of the universe lying
/// in some β-lower approximation.
pub fn classification_quality(
    dt: &DecisionTable,
    attrs: &[usize],
    beta: Precision,
) -> Result<Degree> {
    check_condition_attrs(dt, attrs)?;
    if dt.is_empty() {
        return Err(Error::EmptyTable);
    }
    let table = Contingency::build(dt, attrs)?;
    Ok(quality_of(&table, beta))
}

pub(crate) fn quality_of(table: &Contingency, beta: Precision) -> Degree {
    let covered: u64 = table
        .counts
        .iter()
        .zip(&table.sizes)
        .map(|(row, &size)| row.iter().filter(|&&c| beta.admits(c, size)).count() as u64 * size)
        .sum();
    Degree::new(covered, table.n)
}

/// Largest β at which the classification quality of `attrs` is unchanged from
/// its value just above 0.5: `min(1 − max{P < ½}, min{P > ½})` over all
/// block/class inclusion degrees P, each term defaulting to 1 when its set is empty.
pub fn beta_bound(dt: &DecisionTable, attrs: &[usize]) -> Result<Precision> {
    check_condition_attrs(dt, attrs)?;
    if dt.is_empty() {
        return Err(Error::EmptyTable);
    }
    let table = Contingency::build(dt, attrs)?;
    let half = Degree::new(1, 2);
    let mut below: Option<Degree> = None;
    let mut above: Option<Degree> = None;
    for (row, &size) in table.counts.iter().zip(&table.sizes) {
        for &c in row {
            let p = Degree::new(c, size);
            if p < half {
                below = Some(below.map_or(p, |b| b.max(p)));
            } else if p > half {
                above = Some(above.map_or(p, |a| a.min(p)));
            }
        }
    }
    let one = Degree::from_integer(1);
    let m1 = below.map_or(one, |b| one - b);
    let m2 = above.unwrap_or(one);
    Precision::new(m1.min(m2))
}
