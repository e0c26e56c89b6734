//! Domain types shared by every module: question templates, QA records,
//! video annotations, instrument clusters, split manifests, and the
//! validation rules tying them together. Pure data — no I/O.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// The placeholder string substituted by record slots.
pub const SLOT: &str = "<Object>";

/// Which sensory stream(s) a template interrogates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Modality {
    Audio,
    Visual,
    AudioVisual,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Audio => "audio",
            Modality::Visual => "visual",
            Modality::AudioVisual => "audio-visual",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a template asks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aspect {
    Existential,
    Counting,
    Temporal,
    Location,
    Comparative,
}

impl Aspect {
    pub fn as_str(self) -> &'static str {
        match self {
            Aspect::Existential => "existential",
            Aspect::Counting => "counting",
            Aspect::Temporal => "temporal",
            Aspect::Location => "location",
            Aspect::Comparative => "comparative",
        }
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Horizontal screen position of an instrument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Left,
    Middle,
    Right,
}

impl Position {
    pub fn as_str(self) -> &'static str {
        match self {
            Position::Left => "left",
            Position::Middle => "middle",
            Position::Right => "right",
        }
    }

    /// The position after a horizontal mirror: left and right swap, middle
    /// is a fixpoint.
    pub fn mirrored(self) -> Position {
        match self {
            Position::Left => Position::Right,
            Position::Middle => Position::Middle,
            Position::Right => Position::Left,
        }
    }
}

/// Performance venue label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scene {
    Indoor,
    Outdoor,
}

impl Scene {
    pub fn as_str(self) -> &'static str {
        match self {
            Scene::Indoor => "indoor",
            Scene::Outdoor => "outdoor",
        }
    }
}

/// Where a record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Original,
    Collected,
    Generated,
}

/// Split partition a record is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partition {
    Train,
    Val,
    TestBalanced,
    TestBias,
    Unused,
}

impl Partition {
    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Val => "val",
            Partition::TestBalanced => "test-balanced",
            Partition::TestBias => "test-bias",
            Partition::Unused => "unused",
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Instrument family used when planning audio swaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cluster {
    String,
    Woodwind,
    Brass,
    Percussion,
}

impl Cluster {
    pub fn as_str(self) -> &'static str {
        match self {
            Cluster::String => "string",
            Cluster::Woodwind => "woodwind",
            Cluster::Brass => "brass",
            Cluster::Percussion => "percussion",
        }
    }
}

/// One of the 33 question templates: a pattern with zero or more `<Object>`
/// slots, a modality/aspect classification, and a closed answer space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionTemplate {
    pub template_id: String,
    pub pattern: String,
    pub modality: Modality,
    pub aspect: Aspect,
    pub answer_space: Vec<String>,
    pub is_binary: bool,
    /// True when the pattern wording was completed rather than taken
    /// verbatim from the source taxonomy.
    pub reconstructed: bool,
}

impl QuestionTemplate {
    /// Number of `<Object>` placeholders in the pattern.
    pub fn slot_count(&self) -> usize {
        self.pattern.matches(SLOT).count()
    }

    pub fn has_answer(&self, answer: &str) -> bool {
        self.answer_space.iter().any(|a| a == answer)
    }

    /// Checks the per-template invariants: non-empty duplicate-free answer
    /// space, `is_binary` consistency, and a recognized question type.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.answer_space.is_empty() {
            return Err(ModelError::EmptyAnswerSpace {
                template_id: self.template_id.clone(),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for answer in &self.answer_space {
            if !seen.insert(answer.as_str()) {
                return Err(ModelError::DuplicateAnswer {
                    template_id: self.template_id.clone(),
                    answer: answer.clone(),
                });
            }
        }
        if self.is_binary != (self.answer_space.len() == 2) {
            return Err(ModelError::BinaryFlagMismatch {
                template_id: self.template_id.clone(),
            });
        }
        if Category::of(self.modality, self.aspect).is_none() {
            return Err(ModelError::InvalidTypePair {
                template_id: self.template_id.clone(),
                modality: self.modality,
                aspect: self.aspect,
            });
        }
        Ok(())
    }

    /// The template's category in the accuracy-table layout. Valid for any
    /// template that passed `validate`.
    pub fn category(&self) -> Category {
        Category::of(self.modality, self.aspect)
            .expect("validated templates always map to a category")
    }
}

/// Replaces each `<Object>` placeholder in `pattern` with the corresponding
/// slot value, in order.
pub fn substitute(pattern: &str, slots: &[String]) -> Result<String, ModelError> {
    let expected = pattern.matches(SLOT).count();
    if expected != slots.len() {
        return Err(ModelError::SubstitutionArity {
            expected,
            found: slots.len(),
        });
    }
    let mut out = String::with_capacity(pattern.len());
    let mut rest = pattern;
    for slot in slots {
        let at = rest.find(SLOT).expect("placeholder counted above");
        out.push_str(&rest[..at]);
        out.push_str(slot);
        rest = &rest[at + SLOT.len()..];
    }
    out.push_str(rest);
    Ok(out)
}

/// One question/answer instance bound to a video and a template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaRecord {
    pub qa_id: String,
    pub video_id: String,
    pub template_id: String,
    pub question: String,
    pub slots: Vec<String>,
    pub answer: String,
    pub source: Source,
}

/// Validates a record against the registry: known template, in-space answer,
/// matching slot arity, and question text equal to the substituted pattern.
pub fn validate_record(record: &QaRecord, registry: &TemplateRegistry) -> Result<(), ModelError> {
    let template = registry.get(&record.template_id).ok_or_else(|| {
        ModelError::UnknownTemplate {
            template_id: record.template_id.clone(),
        }
    })?;
    if !template.has_answer(&record.answer) {
        return Err(ModelError::AnswerNotInSpace {
            template_id: record.template_id.clone(),
            answer: record.answer.clone(),
        });
    }
    let expected = template.slot_count();
    if record.slots.len() != expected {
        return Err(ModelError::SlotCount {
            template_id: record.template_id.clone(),
            expected,
            found: record.slots.len(),
        });
    }
    let question = substitute(&template.pattern, &record.slots)?;
    if question != record.question {
        return Err(ModelError::QuestionMismatch {
            template_id: record.template_id.clone(),
            expected: question,
            found: record.question.clone(),
        });
    }
    Ok(())
}

/// One instrument's screen position and sound-onset information.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionEntry {
    pub instrument: String,
    pub position: Position,
    /// 1-based rank of this instrument's first sound onset.
    pub onset_rank: u32,
    /// True when this instrument starts together with another.
    pub simultaneous: bool,
}

/// Per-video ground-truth labels: the seven counting fields, scene,
/// voiceover and audio-match flags, and instrument positions/onsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoAnnotation {
    pub video_id: String,
    pub total_instruments: u32,
    pub distinct_types: u32,
    pub per_type_counts: BTreeMap<String, u32>,
    pub sounding_instruments: u32,
    pub distinct_sounding_types: u32,
    pub max_type_sounding_count: u32,
    /// Number of instruments that sound from the beginning of the clip.
    pub sounding_throughout: u32,
    pub scene: Scene,
    pub has_voiceover: bool,
    pub audio_matches_video: bool,
    pub positions: Vec<PositionEntry>,
}

impl VideoAnnotation {
    /// Checks arithmetic consistency of the counting fields and structural
    /// sanity of the position list.
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: String| {
            Err(ModelError::AnnotationInvariant {
                video_id: self.video_id.clone(),
                reason,
            })
        };
        let type_sum: u64 = self.per_type_counts.values().map(|&c| c as u64).sum();
        if type_sum != self.total_instruments as u64 {
            return fail(format!(
                "per-type counts sum to {type_sum} but total_instruments is {}",
                self.total_instruments
            ));
        }
        if self.per_type_counts.len() != self.distinct_types as usize {
            return fail(format!(
                "{} per-type entries but distinct_types is {}",
                self.per_type_counts.len(),
                self.distinct_types
            ));
        }
        if let Some((instrument, _)) = self.per_type_counts.iter().find(|(_, &c)| c == 0) {
            return fail(format!("per-type count for {instrument:?} is zero"));
        }
        if self.sounding_instruments > self.total_instruments {
            return fail(format!(
                "sounding_instruments {} exceeds total_instruments {}",
                self.sounding_instruments, self.total_instruments
            ));
        }
        if self.distinct_sounding_types > self.distinct_types {
            return fail(format!(
                "distinct_sounding_types {} exceeds distinct_types {}",
                self.distinct_sounding_types, self.distinct_types
            ));
        }
        if self.max_type_sounding_count > self.sounding_instruments {
            return fail(format!(
                "max_type_sounding_count {} exceeds sounding_instruments {}",
                self.max_type_sounding_count, self.sounding_instruments
            ));
        }
        if let Some(entry) = self.positions.iter().find(|p| p.onset_rank == 0) {
            return fail(format!("onset_rank for {:?} must be >= 1", entry.instrument));
        }
        Ok(())
    }
}

/// Maps every instrument name to its family cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct InstrumentClusterMap(pub BTreeMap<String, Cluster>);

impl InstrumentClusterMap {
    pub fn cluster_of(&self, instrument: &str) -> Option<Cluster> {
        self.0.get(instrument).copied()
    }

    pub fn instruments(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The validated, ordered set of question templates. Iteration order is the
/// construction (file) order, which fixes report row order everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateRegistry {
    templates: Vec<QuestionTemplate>,
    index: BTreeMap<String, usize>,
}

impl TemplateRegistry {
    pub fn new(templates: Vec<QuestionTemplate>) -> Result<Self, ModelError> {
        if templates.is_empty() {
            return Err(ModelError::EmptyRegistry);
        }
        let mut index = BTreeMap::new();
        for (i, template) in templates.iter().enumerate() {
            template.validate()?;
            if index.insert(template.template_id.clone(), i).is_some() {
                return Err(ModelError::DuplicateTemplate {
                    template_id: template.template_id.clone(),
                });
            }
        }
        Ok(TemplateRegistry { templates, index })
    }

    pub fn get(&self, template_id: &str) -> Option<&QuestionTemplate> {
        self.index.get(template_id).map(|&i| &self.templates[i])
    }

    /// Lookup that reports the missing id as an error.
    pub fn require(&self, template_id: &str) -> Result<&QuestionTemplate, ModelError> {
        self.get(template_id).ok_or_else(|| ModelError::UnknownTemplate {
            template_id: template_id.to_owned(),
        })
    }

    /// Templates in registry order.
    pub fn iter(&self) -> impl Iterator<Item = &QuestionTemplate> {
        self.templates.iter()
    }

    pub fn templates(&self) -> &[QuestionTemplate] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn contains(&self, template_id: &str) -> bool {
        self.index.contains_key(template_id)
    }
}

/// Deterministic assignment of QA ids to partitions, together with the
/// sampling parameters needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    /// Identifier of the PRNG + child-seed derivation, recorded so another
    /// implementation can reproduce the membership.
    pub prng: String,
    /// Sampling fraction when the stage has one (e.g. 0.2 for the balanced
    /// test stage); absent for quota-driven stages.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    pub assignments: BTreeMap<String, Partition>,
}

impl SplitManifest {
    /// Number of records assigned to `partition`.
    pub fn size_of(&self, partition: Partition) -> usize {
        self.assignments.values().filter(|&&p| p == partition).count()
    }

    /// All partition sizes in one pass.
    pub fn partition_sizes(&self) -> BTreeMap<Partition, usize> {
        let mut sizes = BTreeMap::new();
        for partition in self.assignments.values() {
            *sizes.entry(*partition).or_insert(0) += 1;
        }
        sizes
    }

    /// QA ids assigned to `partition`, in id order.
    pub fn ids_in(&self, partition: Partition) -> Vec<&str> {
        self.assignments
            .iter()
            .filter(|(_, &p)| p == partition)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

/// Reference (original-corpus) answer histograms per template, used to size
/// the rebuilt biased split: the dominant answer's records are all kept and
/// each minority answer gets a quota proportional to the reference ratio.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasSubsetSpec {
    /// template_id -> answer -> reference count.
    pub reference: BTreeMap<String, BTreeMap<String, u64>>,
}

impl BiasSubsetSpec {
    /// Checks that every covered template has a non-empty reference
    /// histogram with a strictly positive dominant count.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (template_id, hist) in &self.reference {
            if hist.values().all(|&c| c == 0) {
                return Err(ModelError::EmptyReference {
                    template_id: template_id.clone(),
                });
            }
        }
        Ok(())
    }

    /// The reference-dominant answer and its count; ties broken toward the
    /// lexicographically smallest answer.
    pub fn dominant_of(&self, template_id: &str) -> Option<(&str, u64)> {
        let hist = self.reference.get(template_id)?;
        let mut best: Option<(&str, u64)> = None;
        for (answer, &count) in hist {
            match best {
                Some((_, c)) if count <= c => {}
                _ => best = Some((answer.as_str(), count)),
            }
        }
        best
    }
}

/// The nine question-type cells of the accuracy-table layout, in column
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    AvExistential,
    AvTemporal,
    AvCounting,
    AvLocation,
    AvComparative,
    VisualCounting,
    VisualLocation,
    AudioCounting,
    AudioComparative,
}

impl Category {
    /// Table column order (after the leading Total column).
    pub const ALL: [Category; 9] = [
        Category::AvExistential,
        Category::AvTemporal,
        Category::AvCounting,
        Category::AvLocation,
        Category::AvComparative,
        Category::VisualCounting,
        Category::VisualLocation,
        Category::AudioCounting,
        Category::AudioComparative,
    ];

    /// Column label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Category::AvExistential => "AV Ext",
            Category::AvTemporal => "AV Temp",
            Category::AvCounting => "AV Cnt",
            Category::AvLocation => "AV Loc",
            Category::AvComparative => "AV Comp",
            Category::VisualCounting => "V Cnt",
            Category::VisualLocation => "V Loc",
            Category::AudioCounting => "A Cnt",
            Category::AudioComparative => "A Comp",
        }
    }

    /// The category for a (modality, aspect) pair, if that pair is one of
    /// the nine recognized question types.
    pub fn of(modality: Modality, aspect: Aspect) -> Option<Category> {
        use Aspect::*;
        use Modality::*;
        match (modality, aspect) {
            (AudioVisual, Existential) => Some(Category::AvExistential),
            (AudioVisual, Temporal) => Some(Category::AvTemporal),
            (AudioVisual, Counting) => Some(Category::AvCounting),
            (AudioVisual, Location) => Some(Category::AvLocation),
            (AudioVisual, Comparative) => Some(Category::AvComparative),
            (Visual, Counting) => Some(Category::VisualCounting),
            (Visual, Location) => Some(Category::VisualLocation),
            (Audio, Counting) => Some(Category::AudioCounting),
            (Audio, Comparative) => Some(Category::AudioComparative),
            _ => None,
        }
    }
}

/// Validation failures for domain values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("template registry is empty")]
    EmptyRegistry,
    #[error("duplicate template id {template_id:?}")]
    DuplicateTemplate { template_id: String },
    #[error("template {template_id:?} has an empty answer space")]
    EmptyAnswerSpace { template_id: String },
    #[error("template {template_id:?} repeats answer {answer:?} in its answer space")]
    DuplicateAnswer { template_id: String, answer: String },
    #[error("template {template_id:?}: is_binary must hold exactly when the answer space has two entries")]
    BinaryFlagMismatch { template_id: String },
    #[error("template {template_id:?}: ({modality}, {aspect}) is not a recognized question type")]
    InvalidTypePair {
        template_id: String,
        modality: Modality,
        aspect: Aspect,
    },
    #[error("unknown template {template_id:?}")]
    UnknownTemplate { template_id: String },
    #[error("answer {answer:?} is not in the answer space of template {template_id:?}")]
    AnswerNotInSpace { template_id: String, answer: String },
    #[error("template {template_id:?} has {expected} slot(s) but the record carries {found}")]
    SlotCount {
        template_id: String,
        expected: usize,
        found: usize,
    },
    #[error("question text {found:?} does not match template {template_id:?} with slots substituted ({expected:?})")]
    QuestionMismatch {
        template_id: String,
        expected: String,
        found: String,
    },
    #[error("substitution expects {expected} slot value(s), got {found}")]
    SubstitutionArity { expected: usize, found: usize },
    #[error("annotation {video_id:?}: {reason}")]
    AnnotationInvariant { video_id: String, reason: String },
    #[error("bias reference for template {template_id:?} is empty or all-zero")]
    EmptyReference { template_id: String },
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binary_template(id: &str) -> QuestionTemplate {
        QuestionTemplate {
            template_id: id.to_owned(),
            pattern: "Is there a <Object> sound?".to_owned(),
            modality: Modality::Audio,
            aspect: Aspect::Counting,
            answer_space: vec!["yes".to_owned(), "no".to_owned()],
            is_binary: true,
            reconstructed: false,
        }
    }

    fn record_for(template: &QuestionTemplate, answer: &str) -> QaRecord {
        let slots = vec!["violin".to_owned(); template.slot_count()];
        QaRecord {
            qa_id: "q1".to_owned(),
            video_id: "v1".to_owned(),
            template_id: template.template_id.clone(),
            question: substitute(&template.pattern, &slots).unwrap(),
            slots,
            answer: answer.to_owned(),
            source: Source::Original,
        }
    }

    #[test]
    fn slot_count_counts_placeholders() {
        assert_eq!(binary_template("t").slot_count(), 1);
        let mut t = binary_template("t");
        t.pattern = "Is the <Object> louder than the <Object>?".to_owned();
        assert_eq!(t.slot_count(), 2);
        t.pattern = "Is there a voiceover?".to_owned();
        assert_eq!(t.slot_count(), 0);
    }

    #[test]
    fn substitute_fills_slots_in_order() {
        let q = substitute(
            "Is the <Object> louder than the <Object>?",
            &["piano".to_owned(), "drum".to_owned()],
        )
        .unwrap();
        assert_eq!(q, "Is the piano louder than the drum?");
        assert_eq!(
            substitute("no slots", &["x".to_owned()]),
            Err(ModelError::SubstitutionArity {
                expected: 0,
                found: 1
            })
        );
    }

    #[test]
    fn validate_record_accepts_consistent_records() {
        let t = binary_template("ac-exist");
        let registry = TemplateRegistry::new(vec![t.clone()]).unwrap();
        assert_eq!(validate_record(&record_for(&t, "yes"), &registry), Ok(()));
    }

    #[test]
    fn validate_record_rejects_out_of_space_answer() {
        let t = binary_template("ac-exist");
        let registry = TemplateRegistry::new(vec![t.clone()]).unwrap();
        let record = record_for(&t, "maybe");
        assert!(matches!(
            validate_record(&record, &registry),
            Err(ModelError::AnswerNotInSpace { .. })
        ));
    }

    #[test]
    fn validate_record_rejects_arity_and_text_mismatches() {
        let t = binary_template("ac-exist");
        let registry = TemplateRegistry::new(vec![t.clone()]).unwrap();

        let mut record = record_for(&t, "yes");
        record.slots.push("cello".to_owned());
        assert!(matches!(
            validate_record(&record, &registry),
            Err(ModelError::SlotCount {
                expected: 1,
                found: 2,
                ..
            })
        ));

        let mut record = record_for(&t, "yes");
        record.question = "Is there a cello sound?".to_owned();
        assert!(matches!(
            validate_record(&record, &registry),
            Err(ModelError::QuestionMismatch { .. })
        ));

        let mut record = record_for(&t, "yes");
        record.template_id = "missing".to_owned();
        assert!(matches!(
            validate_record(&record, &registry),
            Err(ModelError::UnknownTemplate { .. })
        ));
    }

    #[test]
    fn registry_rejects_empty_duplicate_and_inconsistent_templates() {
        assert_eq!(TemplateRegistry::new(vec![]), Err(ModelError::EmptyRegistry));

        let t = binary_template("dup");
        assert!(matches!(
            TemplateRegistry::new(vec![t.clone(), t.clone()]),
            Err(ModelError::DuplicateTemplate { .. })
        ));

        let mut bad = binary_template("flag");
        bad.is_binary = false;
        assert!(matches!(
            TemplateRegistry::new(vec![bad]),
            Err(ModelError::BinaryFlagMismatch { .. })
        ));

        let mut bad = binary_template("pair");
        bad.modality = Modality::Audio;
        bad.aspect = Aspect::Temporal;
        assert!(matches!(
            TemplateRegistry::new(vec![bad]),
            Err(ModelError::InvalidTypePair { .. })
        ));

        let mut bad = binary_template("dup-answer");
        bad.answer_space = vec!["yes".to_owned(), "yes".to_owned()];
        assert!(matches!(
            TemplateRegistry::new(vec![bad]),
            Err(ModelError::DuplicateAnswer { .. })
        ));
    }

    fn solo_annotation() -> VideoAnnotation {
        VideoAnnotation {
            video_id: "v-solo".to_owned(),
            total_instruments: 1,
            distinct_types: 1,
            per_type_counts: [("violin".to_owned(), 1)].into_iter().collect(),
            sounding_instruments: 1,
            distinct_sounding_types: 1,
            max_type_sounding_count: 1,
            sounding_throughout: 1,
            scene: Scene::Indoor,
            has_voiceover: false,
            audio_matches_video: true,
            positions: vec![PositionEntry {
                instrument: "violin".to_owned(),
                position: Position::Middle,
                onset_rank: 1,
                simultaneous: false,
            }],
        }
    }

    #[test]
    fn annotation_validation_accepts_minimal_consistent_case() {
        assert_eq!(solo_annotation().validate(), Ok(()));
    }

    #[test]
    fn annotation_validation_rejects_arithmetic_inconsistency() {
        let mut bad = solo_annotation();
        bad.sounding_instruments = 2;
        assert!(bad.validate().is_err());

        let mut bad = solo_annotation();
        bad.total_instruments = 3;
        assert!(bad.validate().is_err());

        let mut bad = solo_annotation();
        bad.positions[0].onset_rank = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn enum_serializations_use_report_spellings() {
        assert_eq!(
            serde_json::to_string(&Modality::AudioVisual).unwrap(),
            "\"audio-visual\""
        );
        assert_eq!(
            serde_json::to_string(&Partition::TestBalanced).unwrap(),
            "\"test-balanced\""
        );
        assert_eq!(
            serde_json::to_string(&Partition::TestBias).unwrap(),
            "\"test-bias\""
        );
        assert_eq!(serde_json::to_string(&Cluster::String).unwrap(), "\"string\"");
        assert_eq!(serde_json::to_string(&Source::Generated).unwrap(), "\"generated\"");
        assert_eq!(serde_json::to_string(&Scene::Outdoor).unwrap(), "\"outdoor\"");
    }

    #[test]
    fn category_mapping_covers_exactly_nine_pairs() {
        let modalities = [Modality::Audio, Modality::Visual, Modality::AudioVisual];
        let aspects = [
            Aspect::Existential,
            Aspect::Counting,
            Aspect::Temporal,
            Aspect::Location,
            Aspect::Comparative,
        ];
        let mut valid = 0;
        for m in modalities {
            for a in aspects {
                if Category::of(m, a).is_some() {
                    valid += 1;
                }
            }
        }
        assert_eq!(valid, 9);
        assert_eq!(Category::of(Modality::Audio, Aspect::Temporal), None);
        assert_eq!(
            Category::of(Modality::Visual, Aspect::Counting),
            Some(Category::VisualCounting)
        );
        assert_eq!(Category::ALL[0].label(), "AV Ext");
        assert_eq!(Category::ALL[8].label(), "A Comp");
    }

    #[test]
    fn position_mirror_swaps_sides_and_fixes_middle() {
        assert_eq!(Position::Left.mirrored(), Position::Right);
        assert_eq!(Position::Right.mirrored(), Position::Left);
        assert_eq!(Position::Middle.mirrored(), Position::Middle);
    }

    #[test]
    fn bias_spec_dominant_breaks_ties_lexicographically() {
        let spec = BiasSubsetSpec {
            reference: [(
                "t".to_owned(),
                [("no".to_owned(), 5u64), ("yes".to_owned(), 5u64)]
                    .into_iter()
                    .collect(),
            )]
            .into_iter()
            .collect(),
        };
        assert_eq!(spec.dominant_of("t"), Some(("no", 5)));
        assert!(spec.validate().is_ok());

        let empty = BiasSubsetSpec {
            reference: [("t".to_owned(), [("a".to_owned(), 0u64)].into_iter().collect())]
                .into_iter()
                .collect(),
        };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn manifest_partition_sizes_count_assignments() {
        let manifest = SplitManifest {
            seed: 7,
            prng: "test".to_owned(),
            fraction: Some(0.2),
            assignments: [
                ("a".to_owned(), Partition::Train),
                ("b".to_owned(), Partition::Train),
                ("c".to_owned(), Partition::Val),
            ]
            .into_iter()
            .collect(),
        };
        assert_eq!(manifest.size_of(Partition::Train), 2);
        assert_eq!(manifest.size_of(Partition::Val), 1);
        assert_eq!(manifest.size_of(Partition::Unused), 0);
        assert_eq!(manifest.ids_in(Partition::Train), vec!["a", "b"]);
    }

    proptest! {
        #[test]
        fn qa_record_serialization_round_trips(
            qa_id in ".{0,12}",
            video_id in ".{0,12}",
            answer in ".{0,12}",
            slots in proptest::collection::vec(".{0,8}", 0..3),
        ) {
            let record = QaRecord {
                qa_id,
                video_id,
                template_id: "t".to_owned(),
                question: "q".to_owned(),
                slots,
                answer,
                source: Source::Collected,
            };
            let json = serde_json::to_string(&record).unwrap();
            let back: QaRecord = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(record, back);
        }

        #[test]
        fn substituted_question_round_trips_arity(n in 0usize..4) {
            let pattern = (0..n).map(|_| "x <Object>").collect::<String>();
            let slots: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
            let q = substitute(&pattern, &slots).unwrap();
            prop_assert_eq!(q.matches("<Object>").count(), 0);
            for s in &slots {
                prop_assert!(q.contains(s.as_str()));
            }
        }
    }
}
