//! Evaluation reports: accuracy, confusion matrix, per-class metrics and the
//! misclassification list.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Dataset, TrainedModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCase {
    pub true_label: String,
    pub predicted: String,
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalTiming {
    pub predict_seconds: f64,
    pub per_sample_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub classes: Vec<String>,
    /// confusion[true][predicted]
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
    pub errors: Vec<ErrorCase>,
    pub timing: EvalTiming,
}

impl EvalReport {
    /// Plain-text confusion matrix with per-class precision/recall.
    pub fn to_text_table(&self) -> String {
        let k = self.classes.len();
        let mut out = String::new();
        let width = self
            .classes
            .iter()
            .map(|c| c.len())
            .max()
            .unwrap_or(4)
            .max(5);
        let _ = write!(out, "{:>width$} |", "true\\pred");
        for c in &self.classes {
            let _ = write!(out, " {c:>width$}");
        }
        let _ = writeln!(out, " | {:>9} {:>9}", "recall", "precision");
        for t in 0..k {
            let _ = write!(out, "{:>width$} |", self.classes[t]);
            for p in 0..k {
                let _ = write!(out, " {:>width$}", self.confusion[t][p]);
            }
            let _ = writeln!(
                out,
                " | {:>9.4} {:>9.4}",
                self.per_class[t].recall, self.per_class[t].precision
            );
        }
        let _ = writeln!(out, "accuracy: {:.4}", self.accuracy);
        out
    }
}

/// Evaluate a model on a labeled dataset.
pub fn evaluate(model: &TrainedModel, test: &Dataset) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = model.classes.len();
    let class_of = |label: &str| -> Result<usize> {
        model
            .classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::invalid_param(format!("label {label:?} unknown to the model")))
    };

    let mut confusion = vec![vec![0usize; k]; k];
    let mut errors = Vec::new();
    let start = Instant::now();
    for i in 0..test.len() {
        let truth = class_of(&test.labels()[i])?;
        let pred = model.predict(&test.features()[i])?;
        confusion[truth][pred.class_id] += 1;
        if pred.class_id != truth {
            errors.push(ErrorCase {
                true_label: test.labels()[i].clone(),
                predicted: pred.label,
                source: test.sources()[i].clone(),
            });
        }
    }
    let predict_seconds = start.elapsed().as_secs_f64();

    let total: usize = confusion.iter().map(|row| row.iter().sum::<usize>()).sum();
    let trace: usize = (0..k).map(|i| confusion[i][i]).sum();
    let accuracy = trace as f64 / total as f64;

    let per_class = (0..k)
        .map(|c| {
            let row_sum: usize = confusion[c].iter().sum();
            let col_sum: usize = (0..k).map(|t| confusion[t][c]).sum();
            ClassMetrics {
                label: model.classes[c].clone(),
                precision: if col_sum > 0 {
                    confusion[c][c] as f64 / col_sum as f64
                } else {
                    0.0
                },
                recall: if row_sum > 0 {
                    confusion[c][c] as f64 / row_sum as f64
                } else {
                    0.0
                },
            }
        })
        .collect();

    Ok(EvalReport {
        accuracy,
        classes: model.classes.clone(),
        confusion,
        per_class,
        errors,
        timing: EvalTiming {
            predict_seconds,
            per_sample_seconds: predict_seconds / test.len() as f64,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::train_knn;

    fn toy() -> Dataset {
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.2, 0.1],
            vec![5.0, 5.0],
            vec![5.2, 5.1],
            vec![9.0, 0.0],
            vec![9.2, 0.1],
        ];
        let labels = vec!["a", "a", "b", "b", "c", "c"]
            .into_iter()
            .map(String::from)
            .collect();
        Dataset::from_rows(rows, labels).unwrap()
    }

    #[test]
    fn perfect_predictions_give_diagonal_confusion() {
        let d = toy();
        let model = train_knn(&d, 1).unwrap();
        let report = evaluate(&model, &d).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert!(report.errors.is_empty());
        for t in 0..3 {
            for p in 0..3 {
                assert_eq!(report.confusion[t][p], if t == p { 2 } else { 0 });
            }
            assert_eq!(report.per_class[t].precision, 1.0);
            assert_eq!(report.per_class[t].recall, 1.0);
        }
    }

    #[test]
    fn row_sums_match_class_counts_and_trace_ratio() {
        let d = toy();
        // Degrade predictions by evaluating on shifted queries.
        let shifted = Dataset::from_rows(
            d.features()
                .iter()
                .map(|r| vec![r[0] + 4.0, r[1]])
                .collect(),
            d.labels().to_vec(),
        )
        .unwrap();
        let model = train_knn(&d, 1).unwrap();
        let report = evaluate(&model, &shifted).unwrap();
        for t in 0..3 {
            let row_sum: usize = report.confusion[t].iter().sum();
            assert_eq!(row_sum, 2, "each class has two test samples");
        }
        let total: usize = report.confusion.iter().flatten().sum();
        let trace: usize = (0..3).map(|i| report.confusion[i][i]).sum();
        assert_eq!(report.accuracy, trace as f64 / total as f64);
        assert_eq!(report.errors.len(), total - trace);
    }

    #[test]
    fn text_table_renders() {
        let d = toy();
        let model = train_knn(&d, 1).unwrap();
        let report = evaluate(&model, &d).unwrap();
        let table = report.to_text_table();
        assert!(table.contains("accuracy: 1.0000"));
        assert!(table.contains('a') && table.contains('b') && table.contains('c'));
    }
}
