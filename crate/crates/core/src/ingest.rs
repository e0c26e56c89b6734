//! Parsing and validation of the toolkit's UTF-8 JSON file formats.
//!
//! Four inputs exist: a template registry (array), QA records (array),
//! video annotations (array), and a prediction file (object with a
//! `predictions` map). Strict mode rejects unknown fields and aborts on the
//! first invalid record, reporting its zero-based record index and id;
//! lenient mode downgrades unknown fields and invalid records to warnings
//! (invalid records are skipped). Duplicate ids are rejected in both modes.
//! The only normalization applied is trimming surrounding whitespace from
//! answers (QA records and prediction values).

// Errors carry the full record location and cause; ingestion runs once per
// invocation, so a wide Result is fine.
#![allow(clippy::result_large_err)]

use crate::model::{
    BiasSubsetSpec, ModelError, QaRecord, QuestionTemplate, TemplateRegistry, VideoAnnotation,
    validate_record,
};
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use thiserror::Error;

/// Unknown-field and invalid-record policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strict,
    Lenient,
}

/// A parsed value together with any lenient-mode warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadOutcome<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

/// Model predictions keyed by QA id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub model_name: String,
    pub predictions: BTreeMap<String, String>,
}

/// Failures while reading or validating input files. `Io`, `Json`, and
/// `Format` describe unreadable or unparseable files; every other variant
/// is a validation failure of well-formed JSON.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
    #[error("{path}: {location}: {reason}")]
    Schema {
        path: String,
        location: String,
        reason: String,
    },
    #[error("{path}: {location}: unknown field {field:?}")]
    UnknownField {
        path: String,
        location: String,
        field: String,
    },
    #[error("{path}: record {index} ({id:?})")]
    Record {
        path: String,
        index: usize,
        id: String,
        #[source]
        source: ModelError,
    },
    #[error("{path}: duplicate qa_id {qa_id:?}")]
    DuplicateQa { path: String, qa_id: String },
    #[error("{path}: duplicate video_id {video_id:?}")]
    DuplicateVideo { path: String, video_id: String },
    #[error("{path}: duplicate prediction for qa_id {qa_id:?}")]
    DuplicatePrediction { path: String, qa_id: String },
    #[error("{path}: {source}")]
    Model {
        path: String,
        #[source]
        source: ModelError,
    },
    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    /// True for unreadable/unparseable files (I/O and JSON syntax), false
    /// for validation failures of well-formed JSON.
    pub fn is_read_or_parse(&self) -> bool {
        matches!(
            self,
            IngestError::Io { .. }
                | IngestError::Json { .. }
                | IngestError::Format { .. }
                | IngestError::Write { .. }
        )
    }
}

const TEMPLATE_FIELDS: &[&str] = &[
    "template_id",
    "pattern",
    "modality",
    "aspect",
    "answer_space",
    "is_binary",
    "reconstructed",
];
const QA_FIELDS: &[&str] = &[
    "qa_id",
    "video_id",
    "template_id",
    "question",
    "slots",
    "answer",
    "source",
];
const ANNOTATION_FIELDS: &[&str] = &[
    "video_id",
    "total_instruments",
    "distinct_types",
    "per_type_counts",
    "sounding_instruments",
    "distinct_sounding_types",
    "max_type_sounding_count",
    "sounding_throughout",
    "scene",
    "has_voiceover",
    "audio_matches_video",
    "positions",
];
const POSITION_FIELDS: &[&str] = &["instrument", "position", "onset_rank", "simultaneous"];
const PREDICTION_FIELDS: &[&str] = &["model_name", "predictions"];

fn read_file(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_value(text: &str, source_name: &str) -> Result<serde_json::Value, IngestError> {
    serde_json::from_str(text).map_err(|source| IngestError::Json {
        path: source_name.to_owned(),
        source,
    })
}

fn as_array<'v>(
    value: &'v serde_json::Value,
    source_name: &str,
    what: &str,
) -> Result<&'v Vec<serde_json::Value>, IngestError> {
    value.as_array().ok_or_else(|| IngestError::Format {
        path: source_name.to_owned(),
        reason: format!("expected a JSON array of {what}"),
    })
}

/// Checks an object's keys against the allowed field set. Strict mode
/// errors on the first unknown field; lenient mode records a warning.
fn check_fields(
    obj: &serde_json::Map<String, serde_json::Value>,
    allowed: &[&str],
    location: &str,
    source_name: &str,
    mode: Mode,
    warnings: &mut Vec<String>,
) -> Result<(), IngestError> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            match mode {
                Mode::Strict => {
                    return Err(IngestError::UnknownField {
                        path: source_name.to_owned(),
                        location: location.to_owned(),
                        field: key.clone(),
                    });
                }
                Mode::Lenient => {
                    warnings.push(format!("{location}: ignored unknown field {key:?}"));
                }
            }
        }
    }
    Ok(())
}

fn expect_object<'v>(
    value: &'v serde_json::Value,
    location: &str,
    source_name: &str,
) -> Result<&'v serde_json::Map<String, serde_json::Value>, IngestError> {
    value.as_object().ok_or_else(|| IngestError::Schema {
        path: source_name.to_owned(),
        location: location.to_owned(),
        reason: "expected a JSON object".to_owned(),
    })
}

fn string_field(obj: &serde_json::Map<String, serde_json::Value>, field: &str) -> String {
    obj.get(field)
        .and_then(|v| v.as_str())
        .unwrap_or("<missing>")
        .to_owned()
}

/// Parses a template registry from JSON text.
pub fn parse_templates(
    text: &str,
    source_name: &str,
    mode: Mode,
) -> Result<LoadOutcome<TemplateRegistry>, IngestError> {
    let value = parse_value(text, source_name)?;
    let entries = as_array(&value, source_name, "templates")?;
    let mut warnings = Vec::new();
    let mut templates = Vec::with_capacity(entries.len());
    for (index, entry) in entries.iter().enumerate() {
        let location = format!("template {index}");
        let obj = expect_object(entry, &location, source_name)?;
        check_fields(obj, TEMPLATE_FIELDS, &location, source_name, mode, &mut warnings)?;
        let template: QuestionTemplate =
            serde_json::from_value(entry.clone()).map_err(|e| IngestError::Schema {
                path: source_name.to_owned(),
                location: format!("template {index} ({:?})", string_field(obj, "template_id")),
                reason: e.to_string(),
            })?;
        templates.push(template);
    }
    let registry = TemplateRegistry::new(templates).map_err(|source| IngestError::Model {
        path: source_name.to_owned(),
        source,
    })?;
    Ok(LoadOutcome {
        value: registry,
        warnings,
    })
}

/// Loads a template registry from a file.
pub fn load_templates(path: &Path, mode: Mode) -> Result<LoadOutcome<TemplateRegistry>, IngestError> {
    parse_templates(&read_file(path)?, &path.display().to_string(), mode)
}

/// Parses QA records from JSON text, validating each against the registry.
/// Input order is preserved. Strict mode aborts on the first invalid
/// record; lenient mode skips invalid records with a warning. Duplicate
/// qa_ids are rejected in both modes.
pub fn parse_qa(
    text: &str,
    source_name: &str,
    registry: &TemplateRegistry,
    mode: Mode,
) -> Result<LoadOutcome<Vec<QaRecord>>, IngestError> {
    let value = parse_value(text, source_name)?;
    let entries = as_array(&value, source_name, "QA records")?;
    let mut warnings = Vec::new();
    let mut records = Vec::with_capacity(entries.len());
    let mut seen_ids = BTreeSet::new();
    for (index, entry) in entries.iter().enumerate() {
        let location = format!("record {index}");
        let obj = expect_object(entry, &location, source_name)?;
        let qa_id = string_field(obj, "qa_id");
        let location = format!("record {index} ({qa_id:?})");
        check_fields(obj, QA_FIELDS, &location, source_name, mode, &mut warnings)?;
        let mut record: QaRecord = match serde_json::from_value(entry.clone()) {
            Ok(record) => record,
            Err(e) => match mode {
                Mode::Strict => {
                    return Err(IngestError::Schema {
                        path: source_name.to_owned(),
                        location,
                        reason: e.to_string(),
                    });
                }
                Mode::Lenient => {
                    warnings.push(format!("{location} skipped: {e}"));
                    continue;
                }
            },
        };
        record.answer = record.answer.trim().to_owned();
        if let Err(source) = validate_record(&record, registry) {
            match mode {
                Mode::Strict => {
                    return Err(IngestError::Record {
                        path: source_name.to_owned(),
                        index,
                        id: record.qa_id,
                        source,
                    });
                }
                Mode::Lenient => {
                    warnings.push(format!("{location} skipped: {source}"));
                    continue;
                }
            }
        }
        if !seen_ids.insert(record.qa_id.clone()) {
            return Err(IngestError::DuplicateQa {
                path: source_name.to_owned(),
                qa_id: record.qa_id,
            });
        }
        records.push(record);
    }
    Ok(LoadOutcome {
        value: records,
        warnings,
    })
}

/// Loads QA records from a file.
pub fn load_qa(
    path: &Path,
    registry: &TemplateRegistry,
    mode: Mode,
) -> Result<LoadOutcome<Vec<QaRecord>>, IngestError> {
    parse_qa(&read_file(path)?, &path.display().to_string(), registry, mode)
}

/// Parses video annotations from JSON text into a map keyed by video id.
pub fn parse_annotations(
    text: &str,
    source_name: &str,
    mode: Mode,
) -> Result<LoadOutcome<BTreeMap<String, VideoAnnotation>>, IngestError> {
    let value = parse_value(text, source_name)?;
    let entries = as_array(&value, source_name, "annotations")?;
    let mut warnings = Vec::new();
    let mut annotations = BTreeMap::new();
    for (index, entry) in entries.iter().enumerate() {
        let location = format!("record {index}");
        let obj = expect_object(entry, &location, source_name)?;
        let video_id = string_field(obj, "video_id");
        let location = format!("record {index} ({video_id:?})");
        check_fields(obj, ANNOTATION_FIELDS, &location, source_name, mode, &mut warnings)?;
        if let Some(positions) = obj.get("positions").and_then(|p| p.as_array()) {
            for (pos_index, pos) in positions.iter().enumerate() {
                if let Some(pos_obj) = pos.as_object() {
                    let pos_location = format!("{location} position {pos_index}");
                    check_fields(
                        pos_obj,
                        POSITION_FIELDS,
                        &pos_location,
                        source_name,
                        mode,
                        &mut warnings,
                    )?;
                }
            }
        }
        let annotation: VideoAnnotation = match serde_json::from_value(entry.clone()) {
            Ok(annotation) => annotation,
            Err(e) => match mode {
                Mode::Strict => {
                    return Err(IngestError::Schema {
                        path: source_name.to_owned(),
                        location,
                        reason: e.to_string(),
                    });
                }
                Mode::Lenient => {
                    warnings.push(format!("{location} skipped: {e}"));
                    continue;
                }
            },
        };
        if let Err(source) = annotation.validate() {
            match mode {
                Mode::Strict => {
                    return Err(IngestError::Record {
                        path: source_name.to_owned(),
                        index,
                        id: annotation.video_id,
                        source,
                    });
                }
                Mode::Lenient => {
                    warnings.push(format!("{location} skipped: {source}"));
                    continue;
                }
            }
        }
        let video_id = annotation.video_id.clone();
        if annotations.insert(video_id.clone(), annotation).is_some() {
            return Err(IngestError::DuplicateVideo {
                path: source_name.to_owned(),
                video_id,
            });
        }
    }
    Ok(LoadOutcome {
        value: annotations,
        warnings,
    })
}

/// Loads annotations from a file.
pub fn load_annotations(
    path: &Path,
    mode: Mode,
) -> Result<LoadOutcome<BTreeMap<String, VideoAnnotation>>, IngestError> {
    parse_annotations(&read_file(path)?, &path.display().to_string(), mode)
}

/// Map deserializer that records duplicate keys instead of silently
/// overwriting them, so duplicate qa_ids in a prediction file can be
/// rejected (a plain JSON value would collapse them before we could look).
struct DupTrackedMap {
    map: BTreeMap<String, String>,
    duplicates: Vec<String>,
}

impl<'de> Deserialize<'de> for DupTrackedMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct MapVisitor;
        impl<'de> Visitor<'de> for MapVisitor {
            type Value = DupTrackedMap;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a map of qa_id to predicted answer")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut map = BTreeMap::new();
                let mut duplicates = Vec::new();
                while let Some((key, value)) = access.next_entry::<String, String>()? {
                    if map.insert(key.clone(), value).is_some() {
                        duplicates.push(key);
                    }
                }
                Ok(DupTrackedMap { map, duplicates })
            }
        }
        deserializer.deserialize_map(MapVisitor)
    }
}

#[derive(Deserialize)]
struct PredictionFileRaw {
    model_name: String,
    predictions: DupTrackedMap,
}

/// Parses a prediction file `{model_name, predictions:{qa_id: answer}}`.
/// Duplicate qa_ids are rejected; predicted answers are trimmed.
pub fn parse_predictions(
    text: &str,
    source_name: &str,
    mode: Mode,
) -> Result<LoadOutcome<PredictionSet>, IngestError> {
    let value = parse_value(text, source_name)?;
    let obj = value.as_object().ok_or_else(|| IngestError::Format {
        path: source_name.to_owned(),
        reason: "expected a JSON object with model_name and predictions".to_owned(),
    })?;
    let mut warnings = Vec::new();
    check_fields(obj, PREDICTION_FIELDS, "top-level object", source_name, mode, &mut warnings)?;
    for field in PREDICTION_FIELDS {
        if !obj.contains_key(*field) {
            return Err(IngestError::Schema {
                path: source_name.to_owned(),
                location: "top-level object".to_owned(),
                reason: format!("missing field {field:?}"),
            });
        }
    }
    // Re-parse from the original text so the duplicate-tracking map sees
    // every key (a Value collapses duplicates silently).
    let raw: PredictionFileRaw =
        serde_json::from_str(text).map_err(|e| IngestError::Schema {
            path: source_name.to_owned(),
            location: "top-level object".to_owned(),
            reason: e.to_string(),
        })?;
    if let Some(qa_id) = raw.predictions.duplicates.into_iter().next() {
        return Err(IngestError::DuplicatePrediction {
            path: source_name.to_owned(),
            qa_id,
        });
    }
    let predictions = raw
        .predictions
        .map
        .into_iter()
        .map(|(k, v)| (k, v.trim().to_owned()))
        .collect();
    Ok(LoadOutcome {
        value: PredictionSet {
            model_name: raw.model_name,
            predictions,
        },
        warnings,
    })
}

/// Loads predictions from a file.
pub fn load_predictions(path: &Path, mode: Mode) -> Result<LoadOutcome<PredictionSet>, IngestError> {
    parse_predictions(&read_file(path)?, &path.display().to_string(), mode)
}

/// Parses a bias reference-histogram file `{template_id: {answer: count}}`.
pub fn parse_bias_spec(text: &str, source_name: &str) -> Result<BiasSubsetSpec, IngestError> {
    let value = parse_value(text, source_name)?;
    let reference: BTreeMap<String, BTreeMap<String, u64>> =
        serde_json::from_value(value).map_err(|e| IngestError::Format {
            path: source_name.to_owned(),
            reason: format!("expected a map of template_id to answer counts: {e}"),
        })?;
    let spec = BiasSubsetSpec { reference };
    spec.validate().map_err(|source| IngestError::Model {
        path: source_name.to_owned(),
        source,
    })?;
    Ok(spec)
}

/// Loads a bias reference file.
pub fn load_bias_spec(path: &Path) -> Result<BiasSubsetSpec, IngestError> {
    parse_bias_spec(&read_file(path)?, &path.display().to_string())
}

/// Parses an instrument-cluster file (JSON map of instrument to cluster).
pub fn parse_clusters(
    text: &str,
    source_name: &str,
) -> Result<crate::model::InstrumentClusterMap, IngestError> {
    let value = parse_value(text, source_name)?;
    serde_json::from_value(value).map_err(|e| IngestError::Format {
        path: source_name.to_owned(),
        reason: format!("expected a map of instrument to cluster name: {e}"),
    })
}

/// Loads an instrument-cluster map from a file.
pub fn load_clusters(path: &Path) -> Result<crate::model::InstrumentClusterMap, IngestError> {
    parse_clusters(&read_file(path)?, &path.display().to_string())
}

/// Parses an answer-vocabulary file (JSON array of strings).
pub fn parse_vocabulary(text: &str, source_name: &str) -> Result<Vec<String>, IngestError> {
    let value = parse_value(text, source_name)?;
    serde_json::from_value(value).map_err(|e| IngestError::Format {
        path: source_name.to_owned(),
        reason: format!("expected a JSON array of answer strings: {e}"),
    })
}

/// Loads an answer vocabulary from a file.
pub fn load_vocabulary(path: &Path) -> Result<Vec<String>, IngestError> {
    parse_vocabulary(&read_file(path)?, &path.display().to_string())
}

fn write_file(path: &Path, contents: &str) -> Result<(), IngestError> {
    std::fs::write(path, contents).map_err(|source| IngestError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Serializes QA records in the qa.json format (pretty-printed array).
pub fn qa_to_string(records: &[QaRecord]) -> String {
    let mut out = serde_json::to_string_pretty(records).expect("records serialize");
    out.push('\n');
    out
}

/// Writes QA records to a qa.json-format file.
pub fn save_qa(path: &Path, records: &[QaRecord]) -> Result<(), IngestError> {
    write_file(path, &qa_to_string(records))
}

/// Serializes a registry in the templates.json format.
pub fn templates_to_string(registry: &TemplateRegistry) -> String {
    let mut out = serde_json::to_string_pretty(registry.templates()).expect("templates serialize");
    out.push('\n');
    out
}

/// Writes a registry to a templates.json-format file.
pub fn save_templates(path: &Path, registry: &TemplateRegistry) -> Result<(), IngestError> {
    write_file(path, &templates_to_string(registry))
}

/// Serializes annotations in the annotations.json format.
pub fn annotations_to_string(annotations: &[VideoAnnotation]) -> String {
    let mut out = serde_json::to_string_pretty(annotations).expect("annotations serialize");
    out.push('\n');
    out
}

/// Writes annotations to an annotations.json-format file.
pub fn save_annotations(path: &Path, annotations: &[VideoAnnotation]) -> Result<(), IngestError> {
    write_file(path, &annotations_to_string(annotations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Aspect, Modality, Position, Scene, Source};

    fn registry_json() -> String {
        serde_json::json!([
            {
                "template_id": "ac-exist",
                "pattern": "Is there a <Object> sound?",
                "modality": "audio",
                "aspect": "counting",
                "answer_space": ["yes", "no"],
                "is_binary": true,
                "reconstructed": false
            },
            {
                "template_id": "vl-scene",
                "pattern": "Where is the performance?",
                "modality": "visual",
                "aspect": "location",
                "answer_space": ["indoor", "outdoor"],
                "is_binary": true,
                "reconstructed": false
            }
        ])
        .to_string()
    }

    fn registry() -> TemplateRegistry {
        parse_templates(&registry_json(), "templates.json", Mode::Strict)
            .unwrap()
            .value
    }

    fn qa_entry(qa_id: &str, answer: &str) -> serde_json::Value {
        serde_json::json!({
            "qa_id": qa_id,
            "video_id": format!("v-{qa_id}"),
            "template_id": "ac-exist",
            "question": "Is there a violin sound?",
            "slots": ["violin"],
            "answer": answer,
            "source": "original"
        })
    }

    #[test]
    fn templates_parse_and_reject_duplicates_and_empties() {
        let registry = registry();
        assert_eq!(registry.len(), 2);
        assert_eq!(registry.get("ac-exist").unwrap().slot_count(), 1);

        let err = parse_templates("[]", "t.json", Mode::Strict).unwrap_err();
        assert!(matches!(err, IngestError::Model { .. }), "{err}");

        let dup = format!(
            "[{t},{t}]",
            t = serde_json::json!({
                "template_id": "ac-exist",
                "pattern": "Is there a <Object> sound?",
                "modality": "audio",
                "aspect": "counting",
                "answer_space": ["yes", "no"],
                "is_binary": true,
                "reconstructed": false
            })
        );
        assert!(parse_templates(&dup, "t.json", Mode::Strict).is_err());
    }

    #[test]
    fn qa_parsing_preserves_order_and_trims_answers() {
        let mut entries: Vec<serde_json::Value> =
            (0..10).map(|i| qa_entry(&format!("q{i}"), "yes")).collect();
        entries[3]["answer"] = serde_json::json!("  no  ");
        let text = serde_json::Value::Array(entries).to_string();
        let outcome = parse_qa(&text, "qa.json", &registry(), Mode::Strict).unwrap();
        assert_eq!(outcome.value.len(), 10);
        assert!(outcome.warnings.is_empty());
        let ids: Vec<&str> = outcome.value.iter().map(|r| r.qa_id.as_str()).collect();
        assert_eq!(ids, ["q0", "q1", "q2", "q3", "q4", "q5", "q6", "q7", "q8", "q9"]);
        assert_eq!(outcome.value[3].answer, "no");
        assert_eq!(outcome.value[3].source, Source::Original);
    }

    #[test]
    fn strict_mode_reports_offending_record_index() {
        let entries = vec![qa_entry("q0", "yes"), qa_entry("q1", "maybe")];
        let text = serde_json::Value::Array(entries).to_string();
        let err = parse_qa(&text, "qa.json", &registry(), Mode::Strict).unwrap_err();
        match err {
            IngestError::Record { index, id, .. } => {
                assert_eq!(index, 1);
                assert_eq!(id, "q1");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn lenient_mode_skips_invalid_records_with_warnings() {
        let entries = vec![
            qa_entry("q0", "yes"),
            qa_entry("q1", "maybe"),
            qa_entry("q2", "no"),
        ];
        let text = serde_json::Value::Array(entries).to_string();
        let outcome = parse_qa(&text, "qa.json", &registry(), Mode::Lenient).unwrap();
        assert_eq!(outcome.value.len(), 2);
        assert_eq!(outcome.warnings.len(), 1);
        assert!(outcome.warnings[0].contains("q1"), "{}", outcome.warnings[0]);
    }

    #[test]
    fn unknown_fields_follow_the_mode() {
        let mut entry = qa_entry("q0", "yes");
        entry["extra"] = serde_json::json!(1);
        let text = serde_json::Value::Array(vec![entry]).to_string();

        let err = parse_qa(&text, "qa.json", &registry(), Mode::Strict).unwrap_err();
        assert!(matches!(err, IngestError::UnknownField { ref field, .. } if field == "extra"));

        let outcome = parse_qa(&text, "qa.json", &registry(), Mode::Lenient).unwrap();
        assert_eq!(outcome.value.len(), 1);
        assert_eq!(outcome.warnings.len(), 1);
    }

    #[test]
    fn duplicate_qa_ids_are_rejected_in_both_modes() {
        let text =
            serde_json::Value::Array(vec![qa_entry("q0", "yes"), qa_entry("q0", "no")]).to_string();
        for mode in [Mode::Strict, Mode::Lenient] {
            let err = parse_qa(&text, "qa.json", &registry(), mode).unwrap_err();
            assert!(matches!(err, IngestError::DuplicateQa { ref qa_id, .. } if qa_id == "q0"));
        }
    }

    #[test]
    fn syntax_errors_classify_as_parse_failures() {
        let err = parse_qa("[{", "qa.json", &registry(), Mode::Strict).unwrap_err();
        assert!(err.is_read_or_parse());
        let err = parse_qa("{}", "qa.json", &registry(), Mode::Strict).unwrap_err();
        assert!(err.is_read_or_parse()); // object where an array is required
        let err = parse_qa(
            &serde_json::Value::Array(vec![qa_entry("q0", "maybe")]).to_string(),
            "qa.json",
            &registry(),
            Mode::Strict,
        )
        .unwrap_err();
        assert!(!err.is_read_or_parse()); // validation, not parse
    }

    fn annotation_value(video_id: &str) -> serde_json::Value {
        serde_json::json!({
            "video_id": video_id,
            "total_instruments": 1,
            "distinct_types": 1,
            "per_type_counts": {"violin": 1},
            "sounding_instruments": 1,
            "distinct_sounding_types": 1,
            "max_type_sounding_count": 1,
            "sounding_throughout": 1,
            "scene": "indoor",
            "has_voiceover": false,
            "audio_matches_video": true,
            "positions": [
                {"instrument": "violin", "position": "middle", "onset_rank": 1, "simultaneous": false}
            ]
        })
    }

    #[test]
    fn annotations_parse_with_invariant_checks() {
        let text = serde_json::Value::Array(vec![annotation_value("v1")]).to_string();
        let outcome = parse_annotations(&text, "a.json", Mode::Strict).unwrap();
        assert_eq!(outcome.value.len(), 1);
        let annotation = &outcome.value["v1"];
        assert_eq!(annotation.scene, Scene::Indoor);
        assert_eq!(annotation.positions[0].position, Position::Middle);

        let mut bad = annotation_value("v2");
        bad["sounding_instruments"] = serde_json::json!(5);
        let text = serde_json::Value::Array(vec![bad]).to_string();
        let err = parse_annotations(&text, "a.json", Mode::Strict).unwrap_err();
        assert!(matches!(err, IngestError::Record { .. }), "{err}");

        let text =
            serde_json::Value::Array(vec![annotation_value("v1"), annotation_value("v1")])
                .to_string();
        let err = parse_annotations(&text, "a.json", Mode::Strict).unwrap_err();
        assert!(matches!(err, IngestError::DuplicateVideo { .. }));
    }

    #[test]
    fn predictions_parse_trim_and_reject_duplicates() {
        let outcome = parse_predictions(
            r#"{"model_name": "m", "predictions": {"q1": " yes "}}"#,
            "p.json",
            Mode::Strict,
        )
        .unwrap();
        assert_eq!(outcome.value.predictions.len(), 1);
        assert_eq!(outcome.value.predictions["q1"], "yes");
        assert_eq!(outcome.value.model_name, "m");

        let err = parse_predictions(
            r#"{"model_name": "m", "predictions": {"q1": "yes", "q1": "no"}}"#,
            "p.json",
            Mode::Strict,
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::DuplicatePrediction { ref qa_id, .. } if qa_id == "q1"));

        let err = parse_predictions(
            r#"{"model_name": "m", "predictions": {}, "extra": 1}"#,
            "p.json",
            Mode::Strict,
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::UnknownField { .. }));

        let err = parse_predictions(r#"{"model_name": "m"}"#, "p.json", Mode::Strict).unwrap_err();
        assert!(matches!(err, IngestError::Schema { .. }));
        assert!(!err.is_read_or_parse());
    }

    #[test]
    fn bias_spec_and_vocabulary_parse() {
        let spec = parse_bias_spec(r#"{"t": {"yes": 4, "no": 1}}"#, "ref.json").unwrap();
        assert_eq!(spec.dominant_of("t"), Some(("yes", 4)));
        assert!(parse_bias_spec(r#"{"t": {"yes": 0}}"#, "ref.json").is_err());

        let vocabulary = parse_vocabulary(r#"["yes", "no"]"#, "v.json").unwrap();
        assert_eq!(vocabulary.len(), 2);
    }

    #[test]
    fn round_trips_preserve_values() {
        let registry = registry();
        let text = templates_to_string(&registry);
        let back = parse_templates(&text, "t.json", Mode::Strict).unwrap().value;
        assert_eq!(registry, back);
        assert_eq!(back.templates()[0].modality, Modality::Audio);
        assert_eq!(back.templates()[0].aspect, Aspect::Counting);

        let entries = vec![qa_entry("q0", "yes"), qa_entry("q1", "no")];
        let text = serde_json::Value::Array(entries).to_string();
        let records = parse_qa(&text, "qa.json", &registry, Mode::Strict).unwrap().value;
        let text2 = qa_to_string(&records);
        let back = parse_qa(&text2, "qa.json", &registry, Mode::Strict).unwrap().value;
        assert_eq!(records, back);

        let text = serde_json::Value::Array(vec![annotation_value("v1")]).to_string();
        let annotations = parse_annotations(&text, "a.json", Mode::Strict).unwrap().value;
        let list: Vec<_> = annotations.values().cloned().collect();
        let text2 = annotations_to_string(&list);
        let back = parse_annotations(&text2, "a.json", Mode::Strict).unwrap().value;
        assert_eq!(annotations, back);
    }

    #[test]
    fn file_loading_reports_io_errors() {
        let err = load_templates(Path::new("/nonexistent/t.json"), Mode::Strict).unwrap_err();
        assert!(matches!(err, IngestError::Io { .. }));
        assert!(err.is_read_or_parse());
    }
}
