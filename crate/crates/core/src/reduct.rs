//! β-reduct search.
//!
//! A β-reduct is a non-empty condition subset whose classification quality
//! equals that of the full condition set, with no non-empty proper subset
//! reaching the same quality. Exhaustive search enumerates subsets by
//! cardinality and is the ground truth for small attribute counts; the greedy
//! search adds then prunes attributes and scales to wide tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Contingency, DecisionTable, Degree};
use crate::vprs::{classification_quality, quality_of, Precision};

/// Widest condition set accepted by [`find_all_reducts`].
pub const EXHAUSTIVE_CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    Exhaustive,
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductResult {
    /// Condition attribute indices, ascending.
    pub attrs: Vec<usize>,
    pub beta: Precision,
    pub quality: Degree,
    pub method: SearchMethod,
}

fn mask_attrs(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

fn quality(dt: &DecisionTable, attrs: &[usize], beta: Precision) -> Degree {
    let table = Contingency::build(dt, attrs).expect("attribute indices validated");
    quality_of(&table, beta)
}

fn check_subset(dt: &DecisionTable, subset: &[usize]) -> Result<()> {
    if let Some(&a) = subset.iter().find(|&&a| a >= dt.n_conditions()) {
        return Err(Error::UnknownAttribute(format!("#{a}")));
    }
    Ok(())
}

pub fn is_beta_reduct(dt: &DecisionTable, subset: &[usize], beta: Precision) -> Result<bool> {
    if subset.is_empty() {
        return Err(Error::Domain("a reduct candidate must be non-empty".into()));
    }
    check_subset(dt, subset)?;
    let mut subset = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    if subset.len() > 31 {
        return Err(Error::Capacity {
            count: subset.len(),
            cap: 31,
        });
    }
    let target = classification_quality(dt, &dt.condition_attrs(), beta)?;
    if quality(dt, &subset, beta) != target {
        return Ok(false);
    }
    let full = (1u32 << subset.len()) - 1;
    let minimal = (1..full).all(|m| {
        let attrs: Vec<usize> = mask_attrs(m).into_iter().map(|i| subset[i]).collect();
        quality(dt, &attrs, beta) != target
    });
    Ok(minimal)
}

/// Every β-reduct, ordered by cardinality then lexicographically.
pub fn find_all_reducts(dt: &DecisionTable, beta: Precision) -> Result<Vec<Vec<usize>>> {
    find_all_reducts_capped(dt, beta, EXHAUSTIVE_CAP)
}

pub fn find_all_reducts_capped(
    dt: &DecisionTable,
    beta: Precision,
    cap: usize,
) -> Result<Vec<Vec<usize>>> {
    let m = dt.n_conditions();
    if m > cap || m > 31 {
        return Err(Error::Capacity {
            count: m,
            cap: cap.min(31),
        });
    }
    let target = classification_quality(dt, &dt.condition_attrs(), beta)?;
    let mut found: Vec<u32> = Vec::new();
    for k in 1..=m as u32 {
        let mut level: Vec<u32> = (1u32..1 << m)
            .filter(|&mask| mask.count_ones() == k)
            .filter(|&mask| found.iter().all(|&r| mask & r != r))
            .collect();
        level.sort_by_key(|&mask| mask_attrs(mask));
        let hits: Vec<u32> = level
            .par_iter()
            .filter(|&&mask| quality(dt, &mask_attrs(mask), beta) == target)
            .copied()
            .collect();
        found.extend(hits);
    }
    Ok(found.into_iter().map(mask_attrs).collect())
}

/// Forward selection by largest quality gain (ties to the lower index) until
/// the full-set quality is matched, followed by backward pruning in reverse
/// index order until no single attribute can be dropped.
pub fn find_reduct_greedy(dt: &DecisionTable, beta: Precision) -> Result<ReductResult> {
    let all = dt.condition_attrs();
    let target = classification_quality(dt, &all, beta)?;
    let mut selected: Vec<usize> = Vec::new();
    let mut current = quality(dt, &selected, beta);
    while current != target {
        let (best, best_q) = all
            .par_iter()
            .filter(|a| !selected.contains(a))
            .map(|&a| {
                let mut trial = selected.clone();
                trial.push(a);
                (a, quality(dt, &trial, beta))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(None::<(usize, Degree)>, |acc, (a, q)| match acc {
                Some((_, bq)) if bq >= q => acc,
                _ => Some((a, q)),
            })
            .expect("an unselected attribute remains while quality differs");
        selected.push(best);
        current = best_q;
    }
    selected.sort_unstable();
    // Quality is not monotone in the attribute set, so dropping one attribute
    // can make another droppable; repeat until a pass removes nothing.
    loop {
        let before = selected.len();
        for a in selected.clone().into_iter().rev() {
            let without: Vec<usize> = selected.iter().copied().filter(|&x| x != a).collect();
            if quality(dt, &without, beta) == target {
                selected = without;
            }
        }
        if selected.len() == before {
            break;
        }
    }
    Ok(ReductResult {
        quality: quality(dt, &selected, beta),
        attrs: selected,
        beta,
        method: SearchMethod::Greedy,
    })
}

/// The lexicographically smallest reduct among those of minimal cardinality.
pub fn preferred_reduct(reducts: &[Vec<usize>]) -> Option<&Vec<usize>> {
    reducts
        .iter()
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
}

/// Exhaustive search wrapped as a [`ReductResult`] holding the preferred reduct.
/// Falls back to the empty set when no non-empty reduct exists.
pub fn find_reduct_exhaustive(dt: &DecisionTable, beta: Precision) -> Result<ReductResult> {
    let reducts = find_all_reducts(dt, beta)?;
    let attrs = preferred_reduct(&reducts).cloned().unwrap_or_default();
    Ok(ReductResult {
        quality: classification_quality(dt, &attrs, beta)?,
        attrs,
        beta,
        method: SearchMethod::Exhaustive,
    })
}
