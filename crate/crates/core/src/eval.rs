//! Binary confusion metrics, ROC curves and the method comparison report.
//!
//! Moderate and High risk form the positive class, Low the negative one.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::quantize::RiskLevel;

/// Anything that can be read as a positive or negative call.
pub trait Outcome {
    fn is_positive(&self) -> bool;
}

impl Outcome for RiskLevel {
    fn is_positive(&self) -> bool {
        RiskLevel::is_positive(*self)
    }
}

impl Outcome for bool {
    fn is_positive(&self) -> bool {
        *self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn same_len(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left, right })
    }
}

pub fn confusion<P: Outcome, L: Outcome>(
    predictions: &[P],
    labels: &[L],
) -> Result<ConfusionCounts> {
    same_len(predictions.len(), labels.len())?;
    let mut c = ConfusionCounts::default();
    for (p, l) in predictions.iter().zip(labels) {
        match (p.is_positive(), l.is_positive()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    pub tpr: f64,
    pub fpr: f64,
    pub tnr: f64,
    /// Overall correct rate over raw counts.
    pub ocr: f64,
}

pub fn rates(c: &ConfusionCounts) -> Result<Rates> {
    let pos = c.tp + c.fn_;
    let neg = c.tn + c.fp;
    if pos == 0 {
        return Err(Error::UndefinedRate("positive"));
    }
    if neg == 0 {
        return Err(Error::UndefinedRate("negative"));
    }
    let fpr = c.fp as f64 / neg as f64;
    Ok(Rates {
        tpr: c.tp as f64 / pos as f64,
        fpr,
        tnr: c.tn as f64 / neg as f64,
        ocr: (c.tp + c.tn) as f64 / c.total() as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    /// Scores at or above this are called positive; `+inf` for the origin.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC sweep over the distinct scores in descending order, equal scores
/// forming a single step, with trapezoidal area.
pub fn roc_auc<L: Outcome>(scores: &[f64], labels: &[L]) -> Result<RocCurve> {
    same_len(scores.len(), labels.len())?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Domain("scores must not be NaN".into()));
    }
    let pos = labels.iter().filter(|l| l.is_positive()).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedAuc);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    // twice the area in units of one positive-negative pair
    let mut area2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]].total_cmp(&s) == Ordering::Equal {
            if labels[order[i]].is_positive() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area2 += u128::from(fp - fp0) * u128::from(tp + tp0);
        points.push(RocPoint {
            threshold: s,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    let auc = area2 as f64 / (2.0 * pos as f64 * neg as f64);
    Ok(RocCurve { points, auc })
}

/// One method's output on the evaluation set.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodOutput {
    pub name: String,
    pub positive: Vec<bool>,
    /// Ranking score, larger meaning riskier.
    pub scores: Vec<f64>,
    /// Per-level predictions when the method produces them.
    pub levels: Option<Vec<RiskLevel>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub counts: ConfusionCounts,
    pub rates: Rates,
    pub roc: RocCurve,
    /// Rows are actual Low/Moderate/High, columns predicted.
    pub level_matrix: Option<[[u64; 3]; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub events: u64,
    pub positives: u64,
    pub rows: Vec<ReportRow>,
}

pub fn level_matrix(predictions: &[RiskLevel], labels: &[RiskLevel]) -> Result<[[u64; 3]; 3]> {
    same_len(predictions.len(), labels.len())?;
    let mut m = [[0u64; 3]; 3];
    for (p, l) in predictions.iter().zip(labels) {
        m[usize::from(l.code()) - 1][usize::from(p.code()) - 1] += 1;
    }
    Ok(m)
}

pub fn compare_models(methods: &[MethodOutput], labels: &[RiskLevel]) -> Result<Report> {
    let rows = methods
        .iter()
        .map(|m| {
            same_len(m.scores.len(), labels.len())?;
            let counts = confusion(&m.positive, labels)?;
            Ok(ReportRow {
                name: m.name.clone(),
                rates: rates(&counts)?,
                counts,
                roc: roc_auc(&m.scores, labels)?,
                level_matrix: m
                    .levels
                    .as_deref()
                    .map(|p| level_matrix(p, labels))
                    .transpose()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report {
        events: labels.len() as u64,
        positives: labels.iter().filter(|l| l.is_positive()).count() as u64,
        rows,
    })
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let prevalence = self.positives as f64 / self.events as f64;
        let _ = writeln!(
            out,
            "events {}  positive (moderate+high) {}  prevalence {:.1}%",
            self.events,
            self.positives,
            100.0 * prevalence
        );
        let _ = writeln!(
            out,
            "ocr is computed over raw counts, so it follows the class prevalence"
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<8} {:>6} {:>6} {:>6} {:>6} {:>7} {:>7} {:>7} {:>7} {:>7}",
            "method", "tp", "fp", "tn", "fn", "tpr", "fpr", "tnr", "ocr", "auc"
        );
        for r in &self.rows {
            let c = &r.counts;
            let pct = |x: f64| format!("{:.1}%", 100.0 * x);
            let _ = writeln!(
                out,
                "{:<8} {:>6} {:>6} {:>6} {:>6} {:>7} {:>7} {:>7} {:>7} {:>7.4}",
                r.name,
                c.tp,
                c.fp,
                c.tn,
                c.fn_,
                pct(r.rates.tpr),
                pct(r.rates.fpr),
                pct(r.rates.tnr),
                pct(r.rates.ocr),
                r.roc.auc
            );
        }
        for r in &self.rows {
            if let Some(m) = &r.level_matrix {
                let _ = writeln!(out);
                let _ = writeln!(
                    out,
                    "{} per-level confusion (rows actual, columns predicted)",
                    r.name
                );
                let _ = writeln!(
                    out,
                    "{:<9} {:>8} {:>8} {:>8}",
                    "", "low", "moderate", "high"
                );
                for (level, row) in RiskLevel::ALL.iter().zip(m) {
                    let _ = writeln!(
                        out,
                        "{:<9} {:>8} {:>8} {:>8}",
                        level.name(),
                        row[0],
                        row[1],
                        row[2]
                    );
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,tp,fp,tn,fn,tpr,fpr,tnr,ocr,auc\n");
        for r in &self.rows {
            let c = &r.counts;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                r.name,
                c.tp,
                c.fp,
                c.tn,
                c.fn_,
                r.rates.tpr,
                r.rates.fpr,
                r.rates.tnr,
                r.rates.ocr,
                r.roc.auc
            );
        }
        out
    }
}

impl RocCurve {
    /// `threshold,fpr,tpr` rows in sweep order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{:.6},{:.6}", p.threshold, p.fpr, p.tpr);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use RiskLevel::{High as H, Low as L, Moderate as M};

    /// Probability that a random positive outscores a random negative, ties half.
    fn pair_ordering(scores: &[f64], labels: &[bool]) -> f64 {
        let (mut wins, mut pairs) = (0.0, 0.0);
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn confusion_examples() {
        let c = confusion(&[H, M, L, L], &[H, L, L, M]).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1,
                fp: 1,
                tn: 1,
                fn_: 1
            }
        );
        let r = rates(&c).unwrap();
        assert_eq!((r.tpr, r.fpr, r.tnr, r.ocr), (0.5, 0.5, 0.5, 0.5));

        let labels = [H, L, M, L];
        let perfect = confusion(&labels, &labels).unwrap();
        assert_eq!((perfect.fp, perfect.fn_), (0, 0));
        let r = rates(&perfect).unwrap();
        assert_eq!((r.tpr, r.fpr, r.ocr), (1.0, 0.0, 1.0));

        let c = confusion(&[L; 5], &[H; 5]).unwrap();
        assert_eq!((c.tp, c.fn_), (0, 5));
        assert!(matches!(rates(&c), Err(Error::UndefinedRate("negative"))));
        assert!(matches!(
            confusion(&[L], &[L, H]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn auc_examples() {
        let s = [0.9, 0.8, 0.3, 0.1];
        assert_eq!(roc_auc(&s, &[true, true, false, false]).unwrap().auc, 1.0);
        assert_eq!(roc_auc(&s, &[true, false, true, false]).unwrap().auc, 0.75);
        let tied = roc_auc(&[0.4; 6], &[true, false, true, false, false, true]).unwrap();
        assert_eq!(tied.auc, 0.5);
        assert_eq!(tied.points.len(), 2);
        assert!(matches!(roc_auc(&s, &[true; 4]), Err(Error::UndefinedAuc)));
    }

    #[test]
    fn roc_csv_format() {
        let roc = roc_auc(&[0.9, 0.2], &[true, false]).unwrap();
        assert_eq!(roc.to_csv(), "threshold,fpr,tpr\ninf,0.000000,0.000000\n0.9,0.000000,1.000000\n0.2,1.000000,1.000000\n");
    }

    #[test]
    fn report_rows() {
        let labels = vec![H, L, M, L];
        let m = MethodOutput {
            name: "a".into(),
            positive: vec![true, false, true, true],
            scores: vec![0.9, 0.1, 0.7, 0.6],
            levels: Some(vec![H, L, M, M]),
        };
        let b = MethodOutput {
            name: "b".into(),
            levels: None,
            ..m.clone()
        };
        let report = compare_models(&[m, b], &labels).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.rows[0].counts, report.rows[1].counts);
        assert_eq!(
            report.rows[0].level_matrix.unwrap(),
            [[1, 1, 0], [0, 1, 0], [0, 0, 1]]
        );
        assert_eq!(report.to_csv().lines().count(), 3);
        assert!(report.to_text().contains("prevalence 50.0%"));
    }

    fn labelled() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (2usize..200).prop_flat_map(|n| {
            (
                proptest::collection::vec((0u8..20).prop_map(|k| f64::from(k) / 4.0), n),
                proptest::collection::vec(any::<bool>(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn auc_is_pair_ordering((scores, labels) in labelled()) {
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            let roc = roc_auc(&scores, &labels).unwrap();
            prop_assert!((roc.auc - pair_ordering(&scores, &labels)).abs() < 1e-12);
            let first = roc.points[0];
            let last = roc.points[roc.points.len() - 1];
            prop_assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
            prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
            for w in roc.points.windows(2) {
                prop_assert!(w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr);
            }
            let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
            prop_assert_eq!(roc_auc(&warped, &labels).unwrap().auc, roc.auc);
        }

        #[test]
        fn rate_identities(tp in 0u64..50, fp in 0u64..50, tn in 0u64..50, fn_ in 0u64..50) {
            let c = ConfusionCounts { tp, fp, tn, fn_ };
            prop_assume!(tp + fn_ > 0 && tn + fp > 0);
            let r = rates(&c).unwrap();
            prop_assert_eq!(r.tnr + r.fpr, 1.0);
            let prev = (tp + fn_) as f64 / c.total() as f64;
            prop_assert!((r.ocr - (prev * r.tpr + (1.0 - prev) * r.tnr)).abs() < 1e-12);
        }
    }
}
