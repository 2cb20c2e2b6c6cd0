//! Classification assessment: 2x2 confusion matrix, per-class precision and
//! recall, macro-averaged F1.

use crate::error::{GaitError, Result};
use crate::signal::Gender;
use serde::{Deserialize, Serialize};

/// Row = true class (Female, Male), column = predicted class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix2 {
    pub counts: [[u64; 2]; 2],
}

impl ConfusionMatrix2 {
    pub fn new(counts: [[u64; 2]; 2]) -> Self {
        ConfusionMatrix2 { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn row_sum(&self, cls: usize) -> u64 {
        self.counts[cls][0] + self.counts[cls][1]
    }

    fn col_sum(&self, cls: usize) -> u64 {
        self.counts[0][cls] + self.counts[1][cls]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub matrix: ConfusionMatrix2,
    pub precision: [f64; 2],
    pub recall: [f64; 2],
    pub f1: [f64; 2],
    pub macro_f1: f64,
    /// True when any precision/recall denominator was zero.
    pub degenerate: bool,
}

impl EvalReport {
    pub fn from_matrix(matrix: ConfusionMatrix2) -> Self {
        let mut precision = [0.0; 2];
        let mut recall = [0.0; 2];
        let mut f1 = [0.0; 2];
        let mut degenerate = false;
        for cls in 0..2 {
            let (p, r, flag) = precision_recall(&matrix, cls);
            precision[cls] = p;
            recall[cls] = r;
            degenerate |= flag;
            f1[cls] = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        }
        let macro_f1 = (f1[0] + f1[1]) / 2.0;
        EvalReport {
            matrix,
            precision,
            recall,
            f1,
            macro_f1,
            degenerate,
        }
    }

    /// JSON with integer matrix and scores rounded to 6 decimals.
    pub fn to_json(&self) -> String {
        let round6 = |x: f64| (x * 1e6).round() / 1e6;
        let rounded = EvalReport {
            matrix: self.matrix,
            precision: self.precision.map(round6),
            recall: self.recall.map(round6),
            f1: self.f1.map(round6),
            macro_f1: round6(self.macro_f1),
            degenerate: self.degenerate,
        };
        serde_json::to_string_pretty(&rounded).expect("report serializes")
    }
}

/// Counts (true, predicted) pairs into a 2x2 matrix.
pub fn confusion_matrix(pairs: &[(Gender, Gender)]) -> Result<ConfusionMatrix2> {
    if pairs.is_empty() {
        return Err(GaitError::invalid("confusion_matrix: empty input"));
    }
    let mut counts = [[0u64; 2]; 2];
    for (truth, predicted) in pairs {
        counts[truth.class_index()][predicted.class_index()] += 1;
    }
    Ok(ConfusionMatrix2::new(counts))
}

/// Precision and recall for one class; a zero denominator yields 0.0 and sets
/// the degenerate flag.
pub fn precision_recall(m: &ConfusionMatrix2, cls: usize) -> (f64, f64, bool) {
    let tp = m.counts[cls][cls] as f64;
    let col = m.col_sum(cls) as f64;
    let row = m.row_sum(cls) as f64;
    let degenerate = col == 0.0 || row == 0.0;
    let precision = if col == 0.0 { 0.0 } else { tp / col };
    let recall = if row == 0.0 { 0.0 } else { tp / row };
    (precision, recall, degenerate)
}

/// Unweighted mean of the two per-class F1 scores.
pub fn macro_f1(m: &ConfusionMatrix2) -> f64 {
    EvalReport::from_matrix(*m).macro_f1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn confusion_matrix_counts() {
        let pairs = vec![
            (Gender::Female, Gender::Female),
            (Gender::Female, Gender::Female),
            (Gender::Female, Gender::Female),
            (Gender::Male, Gender::Male),
            (Gender::Male, Gender::Male),
        ];
        let m = confusion_matrix(&pairs).unwrap();
        assert_eq!(m.counts, [[3, 0], [0, 2]]);

        let m = confusion_matrix(&[(Gender::Female, Gender::Male)]).unwrap();
        assert_eq!(m.counts, [[0, 1], [0, 0]]);

        assert!(confusion_matrix(&[]).is_err());
    }

    #[test]
    fn published_validation_matrix_ratios() {
        let m = ConfusionMatrix2::new([[191, 43], [56, 193]]);
        let (p, r, degenerate) = precision_recall(&m, 0);
        assert!((p - 191.0 / 247.0).abs() < 1e-12);
        assert!((r - 191.0 / 234.0).abs() < 1e-12);
        assert!((p - 0.7733).abs() < 5e-5);
        assert!((r - 0.8162).abs() < 5e-5);
        assert!(!degenerate);
    }

    #[test]
    fn perfect_diagonal_scores() {
        let m = ConfusionMatrix2::new([[7, 0], [0, 4]]);
        let (p, r, _) = precision_recall(&m, 0);
        assert_eq!((p, r), (1.0, 1.0));
        assert_eq!(macro_f1(&m), 1.0);
    }

    #[test]
    fn degenerate_column_flagged() {
        let m = ConfusionMatrix2::new([[0, 5], [0, 5]]);
        let (p, _, degenerate) = precision_recall(&m, 0);
        assert_eq!(p, 0.0);
        assert!(degenerate);
    }

    #[test]
    fn published_macro_f1_values() {
        let validation = ConfusionMatrix2::new([[191, 43], [56, 193]]);
        assert!((macro_f1(&validation) - 0.795).abs() <= 0.0005);

        let test = ConfusionMatrix2::new([[319, 102], [100, 330]]);
        assert!((macro_f1(&test) - 0.7626).abs() <= 0.0010);
    }

    #[test]
    fn report_json_has_six_decimal_scores() {
        let m = ConfusionMatrix2::new([[1, 2], [3, 4]]);
        let report = EvalReport::from_matrix(m);
        let json = report.to_json();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["matrix"]["counts"][0][1], 2);
        let f1 = parsed["macro_f1"].as_f64().unwrap();
        assert!((f1 * 1e6).fract() == 0.0 || ((f1 * 1e6).fract() - 1.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn macro_f1_in_unit_interval(a in 0u64..50, b in 0u64..50, c in 0u64..50, d in 0u64..50) {
            prop_assume!(a + b + c + d > 0);
            let m = ConfusionMatrix2::new([[a, b], [c, d]]);
            let f1 = macro_f1(&m);
            prop_assert!((0.0..=1.0).contains(&f1));
            // 1 exactly iff off-diagonal is empty (given both classes present).
            if a > 0 && d > 0 {
                prop_assert_eq!(f1 == 1.0, b == 0 && c == 0);
            }
        }

        #[test]
        fn scores_invariant_under_count_scaling(
            a in 0u64..50, b in 0u64..50, c in 0u64..50, d in 0u64..50, k in 1u64..5
        ) {
            prop_assume!(a + b + c + d > 0);
            let m = ConfusionMatrix2::new([[a, b], [c, d]]);
            let scaled = ConfusionMatrix2::new([[a * k, b * k], [c * k, d * k]]);
            let r1 = EvalReport::from_matrix(m);
            let r2 = EvalReport::from_matrix(scaled);
            for cls in 0..2 {
                prop_assert!((r1.precision[cls] - r2.precision[cls]).abs() < 1e-12);
                prop_assert!((r1.recall[cls] - r2.recall[cls]).abs() < 1e-12);
            }
            prop_assert!((r1.macro_f1 - r2.macro_f1).abs() < 1e-12);
        }

        #[test]
        fn macro_f1_invariant_under_class_relabeling(
            a in 0u64..50, b in 0u64..50, c in 0u64..50, d in 0u64..50
        ) {
            prop_assume!(a + b + c + d > 0);
            let m = ConfusionMatrix2::new([[a, b], [c, d]]);
            let swapped = ConfusionMatrix2::new([[d, c], [b, a]]);
            prop_assert!((macro_f1(&m) - macro_f1(&swapped)).abs() < 1e-12);
        }
    }
}
