//! Prediction scoring: per-category accuracy tables and the
//! contrasting-binary-pair protocol.
//!
//! Scoring is exact string match; answer normalization (trimming) happens
//! at ingest time. Pair mining is deterministic min-matching by sorted
//! qa_id so results are stable under input permutation.

use crate::ingest::Mode;
use crate::meta::percent_2dp;
use crate::model::{Category, ModelError, QaRecord, TemplateRegistry};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Scoring failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("cannot score an empty record set")]
    NoRecords,
    #[error("no prediction for record {qa_id:?} (strict mode)")]
    MissingPrediction { qa_id: String },
    #[error("pair references unknown record {qa_id:?}")]
    UnknownPairMember { qa_id: String },
    #[error("cannot compute paired accuracy over zero pairs")]
    EmptyPairs,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Accuracy over all scored records plus one cell per question category.
/// Categories with no scored records are absent from `cells` (reported as
/// blank, never as 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub total_correct: u64,
    pub total_scored: u64,
    /// category -> (correct, scored); only categories with scored records.
    pub cells: BTreeMap<Category, (u64, u64)>,
    pub warnings: Vec<String>,
}

impl AccuracyTable {
    pub fn total_fraction(&self) -> f64 {
        self.total_correct as f64 / self.total_scored as f64
    }

    pub fn cell_fraction(&self, category: Category) -> Option<f64> {
        self.cells
            .get(&category)
            .map(|&(correct, scored)| correct as f64 / scored as f64)
    }
}

/// Two records asking the identical binary question of different videos
/// with opposite answers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContrastPair {
    pub qa_id_a: String,
    pub qa_id_b: String,
}

/// Both-correct accuracy over contrast pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedAccuracy {
    pub correct_pairs: u64,
    pub total_pairs: u64,
}

impl PairedAccuracy {
    pub fn fraction(&self) -> f64 {
        self.correct_pairs as f64 / self.total_pairs as f64
    }
}

fn is_correct(
    record: &QaRecord,
    predictions: &BTreeMap<String, String>,
    mode: Mode,
) -> Result<Option<bool>, EvalError> {
    match predictions.get(&record.qa_id) {
        Some(answer) => Ok(Some(answer == &record.answer)),
        None if mode == Mode::Strict => Err(EvalError::MissingPrediction {
            qa_id: record.qa_id.clone(),
        }),
        None => Ok(None), // lenient: counts as wrong
    }
}

/// Scores predictions by exact match, bucketed into the nine question
/// categories via the registry's (modality, aspect). Strict mode errors on
/// a missing prediction; lenient mode counts it as wrong and records one
/// summary warning. Predicted answers outside `vocabulary` (when given)
/// produce warnings but still score normally.
pub fn accuracy_by_category(
    records: &[QaRecord],
    predictions: &BTreeMap<String, String>,
    registry: &TemplateRegistry,
    vocabulary: Option<&BTreeSet<String>>,
    mode: Mode,
) -> Result<AccuracyTable, EvalError> {
    if records.is_empty() {
        return Err(EvalError::NoRecords);
    }
    let mut total_correct = 0u64;
    let mut cells: BTreeMap<Category, (u64, u64)> = BTreeMap::new();
    let mut missing = 0u64;
    let mut unknown_answers: BTreeMap<&str, u64> = BTreeMap::new();
    for record in records {
        let template = registry.require(&record.template_id)?;
        let category = template.category();
        if let (Some(vocab), Some(answer)) = (vocabulary, predictions.get(&record.qa_id)) {
            if !vocab.contains(answer) {
                *unknown_answers.entry(answer.as_str()).or_insert(0) += 1;
            }
        }
        let verdict = is_correct(record, predictions, mode)?;
        if verdict.is_none() {
            missing += 1;
        }
        let correct = verdict.unwrap_or(false);
        let cell = cells.entry(category).or_insert((0, 0));
        cell.1 += 1;
        if correct {
            cell.0 += 1;
            total_correct += 1;
        }
    }

    let mut warnings = Vec::new();
    if missing > 0 {
        warnings.push(format!("{missing} records had no prediction and were scored as wrong"));
    }
    for (answer, count) in unknown_answers {
        warnings.push(format!(
            "predicted answer {answer:?} is outside the answer vocabulary ({count} records)"
        ));
    }
    Ok(AccuracyTable {
        total_correct,
        total_scored: records.len() as u64,
        cells,
        warnings,
    })
}

/// Renders the fixed 10-column accuracy row (Total plus the nine category
/// cells, in table order) as CSV. Absent categories render as empty cells.
pub fn table_csv(table: &AccuracyTable) -> String {
    let mut header = vec!["Total".to_owned()];
    header.extend(Category::ALL.iter().map(|c| c.label().to_owned()));
    let mut row = vec![percent_2dp(table.total_correct, table.total_scored)];
    for category in Category::ALL {
        row.push(match table.cells.get(&category) {
            Some(&(correct, scored)) => percent_2dp(correct, scored),
            None => String::new(),
        });
    }
    format!("{}\n{}\n", header.join(","), row.join(","))
}

/// JSON mirror of the accuracy table, preserving column order via arrays.
pub fn table_json(table: &AccuracyTable) -> serde_json::Value {
    let cells: Vec<serde_json::Value> = Category::ALL
        .iter()
        .filter_map(|category| {
            table.cells.get(category).map(|&(correct, scored)| {
                json!({
                    "category": category.label(),
                    "correct": correct,
                    "scored": scored,
                    "percent": percent_2dp(correct, scored),
                })
            })
        })
        .collect();
    json!({
        "total": {
            "correct": table.total_correct,
            "scored": table.total_scored,
            "percent": percent_2dp(table.total_correct, table.total_scored),
        },
        "cells": cells,
        "warnings": table.warnings,
    })
}

/// Mines contrasting pairs: for every (binary template, question string)
/// group, the two answer pools are sorted by qa_id and matched index by
/// index, min(|pool_a|, |pool_b|) pairs per group. A pair that would put
/// the same video on both sides is repaired by swapping in the first
/// later opposite-pool record from a different video; if none exists the
/// pair is dropped with a notice. Non-binary records are skipped with a
/// per-template notice. Returns pairs sorted by (qa_id_a, qa_id_b).
pub fn mine_contrast_pairs(
    records: &[QaRecord],
    registry: &TemplateRegistry,
) -> Result<(Vec<ContrastPair>, Vec<String>), EvalError> {
    type Pools<'a> = (Vec<&'a QaRecord>, Vec<&'a QaRecord>);
    let mut groups: BTreeMap<(&str, &str), Pools> = BTreeMap::new();
    let mut skipped: BTreeMap<&str, u64> = BTreeMap::new();
    let mut notices = Vec::new();
    for record in records {
        let template = registry.require(&record.template_id)?;
        if !template.is_binary {
            *skipped.entry(record.template_id.as_str()).or_insert(0) += 1;
            continue;
        }
        let pools = groups
            .entry((record.template_id.as_str(), record.question.as_str()))
            .or_default();
        if record.answer == template.answer_space[0] {
            pools.0.push(record);
        } else {
            pools.1.push(record);
        }
    }
    for (template_id, count) in skipped {
        notices.push(format!("template {template_id}: skipped {count} non-binary records"));
    }

    let mut pairs = Vec::new();
    for ((_, question), (mut pool_a, mut pool_b)) in groups {
        pool_a.sort_by(|x, y| x.qa_id.cmp(&y.qa_id));
        pool_b.sort_by(|x, y| x.qa_id.cmp(&y.qa_id));
        let n = pool_a.len().min(pool_b.len());
        for i in 0..n {
            if pool_a[i].video_id == pool_b[i].video_id {
                match (i + 1..pool_b.len()).find(|&j| pool_b[j].video_id != pool_a[i].video_id) {
                    Some(j) => pool_b.swap(i, j),
                    None => {
                        notices.push(format!(
                            "question {question:?}: cannot pair record {} (only same-video \
                             partners remain); pair dropped",
                            pool_a[i].qa_id
                        ));
                        continue;
                    }
                }
            }
            pairs.push(ContrastPair {
                qa_id_a: pool_a[i].qa_id.clone(),
                qa_id_b: pool_b[i].qa_id.clone(),
            });
        }
    }
    pairs.sort();
    Ok((pairs, notices))
}

/// Fraction of pairs where BOTH members are predicted exactly right.
/// Strict mode errors on any missing prediction; lenient counts the member
/// as wrong.
pub fn paired_accuracy(
    pairs: &[ContrastPair],
    records: &[QaRecord],
    predictions: &BTreeMap<String, String>,
    mode: Mode,
) -> Result<PairedAccuracy, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyPairs);
    }
    let by_id: BTreeMap<&str, &QaRecord> =
        records.iter().map(|r| (r.qa_id.as_str(), r)).collect();
    let mut correct_pairs = 0u64;
    for pair in pairs {
        let mut both = true;
        for qa_id in [&pair.qa_id_a, &pair.qa_id_b] {
            let record = by_id.get(qa_id.as_str()).ok_or_else(|| {
                EvalError::UnknownPairMember { qa_id: qa_id.clone() }
            })?;
            if is_correct(record, predictions, mode)? != Some(true) {
                both = false;
            }
        }
        if both {
            correct_pairs += 1;
        }
    }
    Ok(PairedAccuracy {
        correct_pairs,
        total_pairs: pairs.len() as u64,
    })
}
