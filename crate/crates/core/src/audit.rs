//! Answer-distribution auditing: per-template histograms, bias flagging
//! against class thresholds, and before/after comparison reports.
//!
//! A template is flagged biased when its dominant answer's share strictly
//! exceeds the class threshold (default 0.60 for binary templates, 0.50 for
//! multi-class). Shares at exactly the threshold are not biased and carry a
//! `borderline` marker instead. All shares are exact rationals internally
//! and are rounded to three decimals only at emission.

use crate::meta::csv_field;
use crate::model::{Category, ModelError, QaRecord, QuestionTemplate, TemplateRegistry};
use crate::share::{format_thousandths, Share};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use thiserror::Error;

/// Bias thresholds in thousandths, per template class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    pub binary_thousandths: u32,
    pub multi_thousandths: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            binary_thousandths: 600,
            multi_thousandths: 500,
        }
    }
}

impl Thresholds {
    /// The threshold applying to `template`.
    pub fn for_template(&self, template: &QuestionTemplate) -> u32 {
        if template.is_binary {
            self.binary_thousandths
        } else {
            self.multi_thousandths
        }
    }
}

/// Answer counts for one template, with every answer of the answer space
/// materialized (zero counts included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerHistogram {
    pub template_id: String,
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
}

/// The flagging verdict for one template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasFlag {
    pub template_id: String,
    pub biased: bool,
    /// Share sits exactly on the threshold (reported, but not biased).
    pub borderline: bool,
    pub dominant_answer: String,
    pub dominant_share: Share,
}

/// One audited template: its histogram plus verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditEntry {
    pub histogram: AnswerHistogram,
    pub flag: BiasFlag,
}

/// Full audit: one entry per template occurring in the data (in registry
/// order) plus dataset totals per question type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    /// Record totals per question type, in table-column order; only
    /// categories with records appear.
    pub category_totals: Vec<(Category, u64)>,
    pub total_records: u64,
}

impl AuditReport {
    pub fn flagged_count(&self) -> usize {
        self.entries.iter().filter(|e| e.flag.biased).count()
    }

    pub fn entry(&self, template_id: &str) -> Option<&AuditEntry> {
        self.entries
            .iter()
            .find(|e| e.histogram.template_id == template_id)
    }
}

/// Per-template delta between two audits of the same template set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareEntry {
    pub template_id: String,
    pub dominant_before: String,
    pub dominant_after: String,
    pub share_before: Share,
    pub share_after: Share,
    pub biased_before: bool,
    pub biased_after: bool,
}

impl CompareEntry {
    /// Share movement in thousandths, computed on the emitted (rounded)
    /// values so the delta column always matches the share columns.
    pub fn delta_thousandths(&self) -> i64 {
        self.share_after.thousandths_half_up() as i64
            - self.share_before.thousandths_half_up() as i64
    }
}

/// Before/after comparison across two audit reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareReport {
    pub entries: Vec<CompareEntry>,
}

/// Audit failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("template {template_id:?} has no records; bias is undefined on an empty histogram")]
    EmptyHistogram { template_id: String },
    #[error("reports cover different template sets and cannot be compared")]
    MismatchedReports,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Counts the answers of all records with `template_id`, materializing
/// zero-count answers from the template's answer space.
pub fn answer_histogram(
    records: &[QaRecord],
    template_id: &str,
    registry: &TemplateRegistry,
) -> Result<AnswerHistogram, AuditError> {
    let template = registry.require(template_id)?;
    let mut counts: BTreeMap<String, u64> =
        template.answer_space.iter().map(|a| (a.clone(), 0)).collect();
    let mut total = 0u64;
    for record in records.iter().filter(|r| r.template_id == template_id) {
        match counts.get_mut(&record.answer) {
            Some(count) => *count += 1,
            None => {
                return Err(ModelError::AnswerNotInSpace {
                    template_id: template_id.to_owned(),
                    answer: record.answer.clone(),
                }
                .into());
            }
        }
        total += 1;
    }
    Ok(AnswerHistogram {
        template_id: template_id.to_owned(),
        counts,
        total,
    })
}

impl AnswerHistogram {
    /// Builds a histogram directly from counts (missing answers are
    /// materialized with zero).
    pub fn from_counts(
        template: &QuestionTemplate,
        counts: &BTreeMap<String, u64>,
    ) -> Result<AnswerHistogram, AuditError> {
        let mut full: BTreeMap<String, u64> =
            template.answer_space.iter().map(|a| (a.clone(), 0)).collect();
        for (answer, &count) in counts {
            match full.get_mut(answer) {
                Some(slot) => *slot = count,
                None => {
                    return Err(ModelError::AnswerNotInSpace {
                        template_id: template.template_id.clone(),
                        answer: answer.clone(),
                    }
                    .into());
                }
            }
        }
        let total = full.values().sum();
        Ok(AnswerHistogram {
            template_id: template.template_id.clone(),
            counts: full,
            total,
        })
    }
}

/// Applies the class threshold to a histogram. The dominant answer is the
/// highest-count answer, ties broken by answer-space order.
pub fn flag_bias(
    hist: &AnswerHistogram,
    template: &QuestionTemplate,
    thresholds: &Thresholds,
) -> Result<BiasFlag, AuditError> {
    if hist.total == 0 {
        return Err(AuditError::EmptyHistogram {
            template_id: hist.template_id.clone(),
        });
    }
    let mut dominant = None;
    for answer in &template.answer_space {
        let count = hist.counts.get(answer).copied().unwrap_or(0);
        match dominant {
            Some((_, best)) if count <= best => {}
            _ => dominant = Some((answer.clone(), count)),
        }
    }
    let (dominant_answer, dominant_count) = dominant.expect("validated answer space is non-empty");
    let dominant_share = Share::new(dominant_count, hist.total);
    let threshold = thresholds.for_template(template);
    let relation = dominant_share.cmp_thousandths(threshold);
    Ok(BiasFlag {
        template_id: hist.template_id.clone(),
        biased: relation == Ordering::Greater,
        borderline: relation == Ordering::Equal,
        dominant_answer,
        dominant_share,
    })
}

/// Audits every template occurring in `records`, in registry order.
pub fn audit(
    records: &[QaRecord],
    registry: &TemplateRegistry,
    thresholds: &Thresholds,
) -> Result<AuditReport, AuditError> {
    // One counting pass, then per-template assembly in registry order.
    let mut per_template: BTreeMap<&str, BTreeMap<String, u64>> = BTreeMap::new();
    let mut category_totals: BTreeMap<Category, u64> = BTreeMap::new();
    for record in records {
        let template = registry.require(&record.template_id)?;
        if !template.has_answer(&record.answer) {
            return Err(ModelError::AnswerNotInSpace {
                template_id: record.template_id.clone(),
                answer: record.answer.clone(),
            }
            .into());
        }
        *per_template
            .entry(template.template_id.as_str())
            .or_default()
            .entry(record.answer.clone())
            .or_insert(0) += 1;
        *category_totals.entry(template.category()).or_insert(0) += 1;
    }
    let mut entries = Vec::new();
    for template in registry.iter() {
        let Some(counts) = per_template.get(template.template_id.as_str()) else {
            continue;
        };
        let histogram = AnswerHistogram::from_counts(template, counts)?;
        let flag = flag_bias(&histogram, template, thresholds)?;
        entries.push(AuditEntry { histogram, flag });
    }
    let category_totals = Category::ALL
        .iter()
        .filter_map(|c| category_totals.get(c).map(|&n| (*c, n)))
        .collect();
    Ok(AuditReport {
        entries,
        category_totals,
        total_records: records.len() as u64,
    })
}

/// Compares two audits covering the same template sequence.
pub fn compare(before: &AuditReport, after: &AuditReport) -> Result<CompareReport, AuditError> {
    if before.entries.len() != after.entries.len()
        || before
            .entries
            .iter()
            .zip(&after.entries)
            .any(|(b, a)| b.histogram.template_id != a.histogram.template_id)
    {
        return Err(AuditError::MismatchedReports);
    }
    let entries = before
        .entries
        .iter()
        .zip(&after.entries)
        .map(|(b, a)| CompareEntry {
            template_id: b.histogram.template_id.clone(),
            dominant_before: b.flag.dominant_answer.clone(),
            dominant_after: a.flag.dominant_answer.clone(),
            share_before: b.flag.dominant_share,
            share_after: a.flag.dominant_share,
            biased_before: b.flag.biased,
            biased_after: a.flag.biased,
        })
        .collect();
    Ok(CompareReport { entries })
}

/// CSV emission: one row per (template, answer), answers in answer-space
/// order, templates in report (registry) order.
pub fn audit_csv(report: &AuditReport, registry: &TemplateRegistry) -> String {
    let mut out = String::from("template_id,answer,count,share,biased,dominant\n");
    for entry in &report.entries {
        let template = registry
            .get(&entry.histogram.template_id)
            .expect("report templates come from the registry");
        for answer in &template.answer_space {
            let count = entry.histogram.counts.get(answer).copied().unwrap_or(0);
            let share = Share::new(count, entry.histogram.total);
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_field(&entry.histogram.template_id),
                csv_field(answer),
                count,
                share.display_3dp(),
                entry.flag.biased,
                csv_field(&entry.flag.dominant_answer),
            ));
        }
    }
    out
}

/// JSON mirror of the audit report.
pub fn audit_json(report: &AuditReport, registry: &TemplateRegistry) -> serde_json::Value {
    let templates: Vec<serde_json::Value> = report
        .entries
        .iter()
        .map(|entry| {
            let template = registry
                .get(&entry.histogram.template_id)
                .expect("report templates come from the registry");
            let answers: Vec<serde_json::Value> = template
                .answer_space
                .iter()
                .map(|answer| {
                    let count = entry.histogram.counts.get(answer).copied().unwrap_or(0);
                    serde_json::json!({
                        "answer": answer,
                        "count": count,
                        "share": Share::new(count, entry.histogram.total).display_3dp(),
                    })
                })
                .collect();
            serde_json::json!({
                "template_id": entry.histogram.template_id,
                "total": entry.histogram.total,
                "biased": entry.flag.biased,
                "borderline": entry.flag.borderline,
                "dominant_answer": entry.flag.dominant_answer,
                "dominant_share": entry.flag.dominant_share.display_3dp(),
                "answers": answers,
            })
        })
        .collect();
    let category_totals: Vec<serde_json::Value> = report
        .category_totals
        .iter()
        .map(|(category, n)| serde_json::json!({"category": category.label(), "records": n}))
        .collect();
    serde_json::json!({
        "templates": templates,
        "category_totals": category_totals,
        "total_records": report.total_records,
        "flagged": report.flagged_count(),
    })
}

/// CSV emission of a comparison report.
pub fn compare_csv(report: &CompareReport) -> String {
    let mut out =
        String::from("template_id,share_before,share_after,delta,biased_before,biased_after\n");
    for entry in &report.entries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&entry.template_id),
            entry.share_before.display_3dp(),
            entry.share_after.display_3dp(),
            format_thousandths(entry.delta_thousandths()),
            entry.biased_before,
            entry.biased_after,
        ));
    }
    out
}

/// JSON mirror of a comparison report.
pub fn compare_json(report: &CompareReport) -> serde_json::Value {
    let entries: Vec<serde_json::Value> = report
        .entries
        .iter()
        .map(|entry| {
            serde_json::json!({
                "template_id": entry.template_id,
                "dominant_before": entry.dominant_before,
                "dominant_after": entry.dominant_after,
                "share_before": entry.share_before.display_3dp(),
                "share_after": entry.share_after.display_3dp(),
                "delta": format_thousandths(entry.delta_thousandths()),
                "biased_before": entry.biased_before,
                "biased_after": entry.biased_after,
            })
        })
        .collect();
    serde_json::json!({ "templates": entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{substitute, Aspect, Modality, QaRecord, Source};
    use proptest::prelude::*;

    fn template(id: &str, answers: &[&str], modality: Modality, aspect: Aspect) -> QuestionTemplate {
        QuestionTemplate {
            template_id: id.to_owned(),
            pattern: "Is there a voiceover?".to_owned(),
            modality,
            aspect,
            answer_space: answers.iter().map(|a| a.to_string()).collect(),
            is_binary: answers.len() == 2,
            reconstructed: true,
        }
    }

    fn registry() -> TemplateRegistry {
        TemplateRegistry::new(vec![
            template("bin", &["yes", "no"], Modality::Audio, Aspect::Counting),
            template(
                "multi",
                &["simultaneously", "left", "middle", "right"],
                Modality::AudioVisual,
                Aspect::Temporal,
            ),
        ])
        .unwrap()
    }

    fn records(template_id: &str, answers: &[(&str, u64)]) -> Vec<QaRecord> {
        let mut out = Vec::new();
        for (answer, count) in answers {
            for i in 0..*count {
                out.push(QaRecord {
                    qa_id: format!("{template_id}-{answer}-{i}"),
                    video_id: format!("v-{template_id}-{answer}-{i}"),
                    template_id: template_id.to_owned(),
                    question: substitute("Is there a voiceover?", &[]).unwrap(),
                    slots: vec![],
                    answer: answer.to_string(),
                    source: Source::Original,
                });
            }
        }
        out
    }

    #[test]
    fn histogram_counts_and_materializes_zeros() {
        let registry = registry();
        let data = records("bin", &[("yes", 3), ("no", 1)]);
        let hist = answer_histogram(&data, "bin", &registry).unwrap();
        assert_eq!(hist.total, 4);
        assert_eq!(hist.counts["yes"], 3);
        assert_eq!(hist.counts["no"], 1);

        let empty = answer_histogram(&[], "bin", &registry).unwrap();
        assert_eq!(empty.total, 0);
        assert_eq!(empty.counts.len(), 2);
        assert_eq!(empty.counts["yes"], 0);

        assert!(answer_histogram(&data, "missing", &registry).is_err());
    }

    #[test]
    fn flagging_uses_strict_inequality_with_borderline_marker() {
        let registry = registry();
        let thresholds = Thresholds::default();
        let template = registry.get("bin").unwrap();

        let hist = answer_histogram(&records("bin", &[("yes", 90), ("no", 10)]), "bin", &registry)
            .unwrap();
        let flag = flag_bias(&hist, template, &thresholds).unwrap();
        assert!(flag.biased);
        assert!(!flag.borderline);
        assert_eq!(flag.dominant_answer, "yes");
        assert_eq!(flag.dominant_share, Share::new(90, 100));

        let hist = answer_histogram(&records("bin", &[("yes", 60), ("no", 40)]), "bin", &registry)
            .unwrap();
        let flag = flag_bias(&hist, template, &thresholds).unwrap();
        assert!(!flag.biased, "0.60 is not over the binary threshold");
        assert!(flag.borderline);

        let multi = registry.get("multi").unwrap();
        let hist = answer_histogram(
            &records(
                "multi",
                &[("simultaneously", 74), ("left", 10), ("middle", 8), ("right", 8)],
            ),
            "multi",
            &registry,
        )
        .unwrap();
        let flag = flag_bias(&hist, multi, &thresholds).unwrap();
        assert!(flag.biased);
        assert_eq!(flag.dominant_share, Share::new(74, 100));

        let empty = answer_histogram(&[], "bin", &registry).unwrap();
        assert!(matches!(
            flag_bias(&empty, template, &thresholds),
            Err(AuditError::EmptyHistogram { .. })
        ));
    }

    #[test]
    fn audit_covers_present_templates_in_registry_order() {
        let registry = registry();
        let mut data = records("multi", &[("simultaneously", 3), ("left", 1)]);
        data.extend(records("bin", &[("yes", 2), ("no", 2)]));
        let report = audit(&data, &registry, &Thresholds::default()).unwrap();
        assert_eq!(report.entries.len(), 2);
        assert_eq!(report.entries[0].histogram.template_id, "bin");
        assert_eq!(report.entries[1].histogram.template_id, "multi");
        assert_eq!(report.total_records, 8);
        assert_eq!(report.flagged_count(), 1); // only multi: 3/4 > 0.5
        assert_eq!(
            report.category_totals,
            vec![(Category::AvTemporal, 4), (Category::AudioCounting, 4)]
        );
    }

    #[test]
    fn uniform_data_is_never_flagged() {
        let registry = registry();
        let data = records(
            "multi",
            &[("simultaneously", 25), ("left", 25), ("middle", 25), ("right", 25)],
        );
        let report = audit(&data, &registry, &Thresholds::default()).unwrap();
        assert_eq!(report.flagged_count(), 0);
    }

    #[test]
    fn compare_reports_deltas_and_rejects_mismatches() {
        let registry = registry();
        let before_data = records("multi", &[("simultaneously", 74), ("left", 26)]);
        let mut after_data = before_data.clone();
        after_data.extend(records("multi", &[("middle", 40), ("right", 40)]));
        let thresholds = Thresholds::default();
        let before = audit(&before_data, &registry, &thresholds).unwrap();
        let after = audit(&after_data, &registry, &thresholds).unwrap();
        let report = compare(&before, &after).unwrap();
        assert_eq!(report.entries.len(), 1);
        let entry = &report.entries[0];
        assert_eq!(entry.share_before, Share::new(74, 100));
        assert_eq!(entry.share_after, Share::new(74, 180));
        // 0.740 -> 0.411: delta -0.329.
        assert_eq!(entry.delta_thousandths(), -329);
        assert!(entry.biased_before && !entry.biased_after);

        let identical = compare(&before, &before).unwrap();
        assert!(identical.entries.iter().all(|e| e.delta_thousandths() == 0));

        let other = audit(&records("bin", &[("yes", 1), ("no", 1)]), &registry, &thresholds)
            .unwrap();
        assert_eq!(compare(&before, &other), Err(AuditError::MismatchedReports));
    }

    #[test]
    fn csv_layouts_are_pinned() {
        let registry = registry();
        let data = records("bin", &[("yes", 3), ("no", 1)]);
        let report = audit(&data, &registry, &Thresholds::default()).unwrap();
        let csv = audit_csv(&report, &registry);
        assert_eq!(
            csv,
            "template_id,answer,count,share,biased,dominant\n\
             bin,yes,3,0.750,true,yes\n\
             bin,no,1,0.250,true,yes\n"
        );

        let cmp = compare(&report, &report).unwrap();
        let csv = compare_csv(&cmp);
        assert_eq!(
            csv,
            "template_id,share_before,share_after,delta,biased_before,biased_after\n\
             bin,0.750,0.750,0.000,true,true\n"
        );
    }

    proptest! {
        /// Appending records that do not carry the dominant answer never
        /// increases that answer's share (the overall maximum may move to
        /// another answer, but the original dominant strictly dilutes).
        #[test]
        fn appending_other_answers_dilutes_the_dominant(
            yes in 1u64..60, no in 0u64..60, extra in 1u64..40
        ) {
            let registry = registry();
            let thresholds = Thresholds::default();
            let template = registry.get("bin").unwrap();
            let base = records("bin", &[("yes", yes.max(no + 1)), ("no", no)]);
            let hist = answer_histogram(&base, "bin", &registry).unwrap();
            let flag = flag_bias(&hist, template, &thresholds).unwrap();
            prop_assert_eq!(flag.dominant_answer.as_str(), "yes");

            let mut grown = base.clone();
            grown.extend(records("bin", &[("no", extra)]));
            let hist2 = answer_histogram(&grown, "bin", &registry).unwrap();
            let share_before = Share::new(hist.counts["yes"], hist.total);
            let share_after = Share::new(hist2.counts["yes"], hist2.total);
            prop_assert!(share_after < share_before);
        }

        /// The dominant share can never fall below uniform.
        #[test]
        fn dominant_share_is_at_least_uniform(
            counts in proptest::collection::vec(0u64..50, 4)
        ) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let registry = registry();
            let template = registry.get("multi").unwrap();
            let answers = ["simultaneously", "left", "middle", "right"];
            let data: Vec<(&str, u64)> = answers.iter().copied().zip(counts.iter().copied()).collect();
            let hist = answer_histogram(&records("multi", &data), "multi", &registry).unwrap();
            let flag = flag_bias(&hist, template, &Thresholds::default()).unwrap();
            // share >= 1/4 exactly: num*4 >= den.
            prop_assert!(flag.dominant_share.num * 4 >= flag.dominant_share.den);
        }

        /// Histograms are invariant under record permutation, and a
        /// whole-dataset audit restricted to one template equals the direct
        /// histogram of that template.
        #[test]
        fn audit_is_order_independent_and_composes(seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            let registry = registry();
            let mut data = records("bin", &[("yes", 7), ("no", 5)]);
            data.extend(records("multi", &[("simultaneously", 3), ("right", 2)]));
            let direct = answer_histogram(&data, "bin", &registry).unwrap();

            let mut shuffled = data.clone();
            shuffled.shuffle(&mut crate::seed::rng(seed, "audit-test"));
            let report = audit(&shuffled, &registry, &Thresholds::default()).unwrap();
            prop_assert_eq!(report.entry("bin").unwrap().histogram.clone(), direct);
        }
    }
}
