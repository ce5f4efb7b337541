//! Information-theoretic attribute significance and the derived weights.
//!
//! All entropies are in bits. Conditional entropy and mutual information are
//! evaluated from the block/decision count matrix; mutual information uses
//! the count-ratio form `Σ n_ij log2(n·n_ij / (n_i·n_j)) / n`, which equals
//! `H(D) − H(D|X)` and is exactly zero when X and D are independent in the sample.

use crate::error::{Error, Result};
use crate::table::{Contingency, DecisionTable, Partition};

/// Significance values below this are raised to it before forming ratios.
pub const SIG_FLOOR: f64 = 1.0 / (1u64 << 20) as f64;

fn plogp_sum(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    let n = total as f64;
    -counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

pub fn entropy(p: &Partition, universe_size: usize) -> Result<f64> {
    if universe_size == 0 {
        return Err(Error::Domain("entropy of an empty universe".into()));
    }
    Ok(plogp_sum(p.block_sizes().map(|s| s as u64), universe_size as u64).max(0.0))
}

/// H(D) of the decision attribute.
pub fn decision_entropy(dt: &DecisionTable) -> Result<f64> {
    if dt.is_empty() {
        return Err(Error::EmptyTable);
    }
    let table = Contingency::build(dt, &[])?;
    Ok(plogp_sum(table.decision_totals().into_iter(), table.n).max(0.0))
}

fn check(dt: &DecisionTable, attrs: &[usize]) -> Result<()> {
    if dt.is_empty() {
        return Err(Error::EmptyTable);
    }
    match attrs.iter().find(|&&a| a >= dt.n_conditions()) {
        Some(&a) => Err(Error::UnknownAttribute(format!("#{a}"))),
        None => Ok(()),
    }
}

/// H(D | X).
pub fn conditional_entropy(dt: &DecisionTable, attrs: &[usize]) -> Result<f64> {
    check(dt, attrs)?;
    let table = Contingency::build(dt, attrs)?;
    let n = table.n as f64;
    let h: f64 = table
        .counts
        .iter()
        .zip(&table.sizes)
        .map(|(row, &size)| {
            row.iter()
                .filter(|&&c| c > 0)
                .map(|&c| c as f64 * (size as f64 / c as f64).log2())
                .sum::<f64>()
        })
        .sum();
    Ok(h / n)
}

/// I(X, D) = H(D) − H(D | X).
pub fn mutual_information(dt: &DecisionTable, attrs: &[usize]) -> Result<f64> {
    check(dt, attrs)?;
    let table = Contingency::build(dt, attrs)?;
    let totals = table.decision_totals();
    let n = table.n;
    let mut sum = 0.0;
    for (row, &size) in table.counts.iter().zip(&table.sizes) {
        for (&c, &t) in row.iter().zip(&totals) {
            if c > 0 {
                let num = n as f64 * c as f64;
                let den = size as f64 * t as f64;
                sum += c as f64 * (num / den).log2();
            }
        }
    }
    Ok((sum / n as f64).max(0.0))
}

/// SIG(a, X, D) = |H(D | X ∖ {a}) − H(D | X)|.
pub fn significance(dt: &DecisionTable, attr: usize, attrs: &[usize]) -> Result<f64> {
    if !attrs.contains(&attr) {
        return Err(Error::Domain(format!(
            "attribute `{}` is not in the evaluated set",
            if attr <= dt.n_conditions() {
                dt.attr_name(attr).to_string()
            } else {
                format!("#{attr}")
            }
        )));
    }
    let rest: Vec<usize> = attrs.iter().copied().filter(|&a| a != attr).collect();
    Ok((conditional_entropy(dt, &rest)? - conditional_entropy(dt, attrs)?).abs())
}

/// Normalized attribute weights, aligned with `attrs`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    pub attrs: Vec<usize>,
    pub weights: Vec<f64>,
}

impl WeightVector {
    pub fn uniform(attrs: Vec<usize>) -> Self {
        let w = 1.0 / attrs.len() as f64;
        let weights = vec![w; attrs.len()];
        Self { attrs, weights }
    }
}

/// Weights from relative significance: `ω_i = (Π_q SIG_i / SIG_q)^(1/|B|)`,
/// normalized to sum to one.
pub fn weights_from_significance(sig: &[f64]) -> Vec<f64> {
    let sig: Vec<f64> = sig.iter().map(|&s| s.max(SIG_FLOOR)).collect();
    let k = sig.len() as f64;
    let omega: Vec<f64> = sig
        .iter()
        .map(|&si| sig.iter().map(|&sq| si / sq).product::<f64>().powf(1.0 / k))
        .collect();
    let total: f64 = omega.iter().sum();
    omega.iter().map(|w| w / total).collect()
}

pub fn attribute_weights(dt: &DecisionTable, attrs: &[usize]) -> Result<WeightVector> {
    if attrs.is_empty() {
        return Err(Error::Domain("weights need at least one attribute".into()));
    }
    let sig = attrs
        .iter()
        .map(|&a| significance(dt, a, attrs))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightVector {
        attrs: attrs.to_vec(),
        weights: weights_from_significance(&sig),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{fixtures::t8, partition};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn partition_entropy() {
        let dt = t8();
        let p = partition(&dt, &[dt.decision_attr()]).unwrap();
        assert_abs_diff_eq!(entropy(&p, 8).unwrap(), 1.0, epsilon = 1e-15);
        let single = partition(&dt, &[]).unwrap();
        assert_eq!(entropy(&single, 8).unwrap(), 0.0);
        let ab = partition(&dt, &[0, 1]).unwrap();
        assert_abs_diff_eq!(entropy(&ab, 8).unwrap(), 1.811278, epsilon = 1e-6);
        assert!(entropy(&single, 0).is_err());
    }

    #[test]
    fn t8_conditional_and_mutual() {
        let dt = t8();
        assert_abs_diff_eq!(
            conditional_entropy(&dt, &[0, 1]).unwrap(),
            0.688722,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            conditional_entropy(&dt, &[0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            mutual_information(&dt, &[0, 1]).unwrap(),
            0.311278,
            epsilon = 1e-6
        );
        assert_eq!(mutual_information(&dt, &[]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            mutual_information(&dt, &[1]).unwrap(),
            0.188722,
            epsilon = 1e-6
        );
    }

    #[test]
    fn t8_significance_and_weights() {
        let dt = t8();
        assert_abs_diff_eq!(
            significance(&dt, 0, &[0, 1]).unwrap(),
            0.122556,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            significance(&dt, 1, &[0, 1]).unwrap(),
            0.311278,
            epsilon = 1e-6
        );
        assert!(significance(&dt, 1, &[0]).is_err());
        let w = attribute_weights(&dt, &[0, 1]).unwrap();
        assert_abs_diff_eq!(w.weights[0], 0.28250, epsilon = 1e-4);
        assert_abs_diff_eq!(w.weights[1], 0.71750, epsilon = 1e-4);
        assert!(attribute_weights(&dt, &[]).is_err());
    }

    #[test]
    fn determined_decision_has_zero_conditional_entropy() {
        let d = vec![0, 1, 2, 1];
        let rows = d.iter().map(|&v| vec![v, v]).collect();
        let dt = DecisionTable::new(vec!["x".into(), "y".into()], "d", rows, d).unwrap();
        assert_eq!(conditional_entropy(&dt, &[0]).unwrap(), 0.0);
        // y duplicates x: removing either changes nothing
        assert_eq!(significance(&dt, 1, &[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn weight_edge_cases() {
        let w = weights_from_significance(&[0.3, 0.3, 0.3]);
        for x in &w {
            assert_abs_diff_eq!(*x, 1.0 / 3.0, epsilon = 1e-15);
        }
        let w = weights_from_significance(&[0.0, 0.2, 0.5]);
        assert!(w[0] > 0.0);
        assert!(w[0] < w[1] && w[1] < w[2]);
        assert_eq!(weights_from_significance(&[0.7]), vec![1.0]);
    }

    fn table_strategy() -> impl Strategy<Value = DecisionTable> {
        (1usize..5, 1usize..25).prop_flat_map(|(m, n)| {
            (
                proptest::collection::vec(proptest::collection::vec(0u8..3, m), n),
                proptest::collection::vec(0u8..3, n),
            )
                .prop_map(move |(rows, d)| {
                    DecisionTable::new((0..m).map(|i| format!("x{i}")).collect(), "d", rows, d)
                        .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn entropy_bounds(dt in table_strategy(), mask in 0u32..16, extra in 0usize..4) {
            let attrs: Vec<usize> = (0..dt.n_conditions()).filter(|i| mask >> i & 1 == 1).collect();
            let hd = decision_entropy(&dt).unwrap();
            let hdx = conditional_entropy(&dt, &attrs).unwrap();
            let mi = mutual_information(&dt, &attrs).unwrap();
            prop_assert!(hdx >= 0.0);
            prop_assert!(hdx <= hd + 1e-12);
            prop_assert!(mi >= 0.0);
            prop_assert!((mi - (hd - hdx)).abs() < 1e-12);
            let a = extra % dt.n_conditions();
            let mut more = attrs.clone();
            if !more.contains(&a) { more.push(a); }
            prop_assert!(conditional_entropy(&dt, &more).unwrap() <= hdx + 1e-12);
        }

        #[test]
        fn weights_sum_to_one_and_follow_significance(sig in proptest::collection::vec(0.0f64..2.0, 1..8), scale in 0.01f64..100.0) {
            let w = weights_from_significance(&sig);
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|&x| x > 0.0));
            let floored: Vec<f64> = sig.iter().map(|s| s.max(SIG_FLOOR)).collect();
            // closed form: ω_i ∝ SIG_i / geomean(SIG)
            let geo = (floored.iter().map(|s| s.ln()).sum::<f64>() / floored.len() as f64).exp();
            let raw: Vec<f64> = floored.iter().map(|s| s / geo).collect();
            let total: f64 = raw.iter().sum();
            for (x, r) in w.iter().zip(&raw) {
                prop_assert!((x - r / total).abs() < 1e-9);
            }
            for i in 0..w.len() {
                for j in 0..w.len() {
                    if floored[i] > floored[j] { prop_assert!(w[i] > w[j]); }
                }
            }
            // rescaling all significances leaves weights unchanged (when nothing hits the floor)
            if sig.iter().all(|&s| s > SIG_FLOOR && s * scale > SIG_FLOOR) {
                let scaled: Vec<f64> = sig.iter().map(|s| s * scale).collect();
                for (a, b) in w.iter().zip(weights_from_significance(&scaled)) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }
}
