//! Bundled reference data and deterministic full-scale fixtures.
//!
//! The `data/` files compiled into the library carry the template registry,
//! instrument clusters, answer vocabulary, and the count tables that the
//! synthetic corpora are expanded from. Fixture builders are pure: the same
//! arguments always produce the same records.

use crate::ingest::{self, Mode};
use crate::model::{
    BiasSubsetSpec, InstrumentClusterMap, Position, PositionEntry, QaRecord, QuestionTemplate,
    Scene, Source, TemplateRegistry, VideoAnnotation,
};
use crate::seed;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Deserialize;
use std::collections::BTreeMap;

/// Raw bytes of the bundled template registry, for consumers that need to
/// re-emit or digest the exact file.
pub const TEMPLATES_JSON: &str = include_str!("../data/templates.json");
/// Raw bytes of the bundled instrument-cluster map.
pub const CLUSTERS_JSON: &str = include_str!("../data/instrument_clusters.json");
/// Raw bytes of the bundled answer vocabulary.
pub const VOCABULARY_JSON: &str = include_str!("../data/answer_vocabulary.json");
const AUDIT_COUNTS_JSON: &str = include_str!("../data/audit_counts.json");
const SPLIT_CORPUS_JSON: &str = include_str!("../data/split_corpus.json");

/// The bundled template registry (33 templates across the nine categories).
pub fn registry() -> TemplateRegistry {
    ingest::parse_templates(TEMPLATES_JSON, "bundled templates", Mode::Strict)
        .expect("bundled templates are valid")
        .value
}

/// The bundled instrument-to-cluster map.
pub fn clusters() -> InstrumentClusterMap {
    ingest::parse_clusters(CLUSTERS_JSON, "bundled clusters")
        .expect("bundled clusters are valid")
}

/// The bundled global answer vocabulary, in canonical file order.
pub fn vocabulary() -> Vec<String> {
    ingest::parse_vocabulary(VOCABULARY_JSON, "bundled vocabulary")
        .expect("bundled vocabulary is valid")
}

#[derive(Debug, Deserialize)]
struct CountsEntry {
    template_id: String,
    counts: BTreeMap<String, u64>,
}

#[derive(Debug, Deserialize)]
struct AuditCounts {
    before: Vec<CountsEntry>,
    additions: Vec<CountsEntry>,
}

fn audit_counts() -> AuditCounts {
    serde_json::from_str(AUDIT_COUNTS_JSON).expect("bundled audit counts are valid")
}

fn slots_for(template: &QuestionTemplate) -> Vec<String> {
    match template.slot_count() {
        0 => vec![],
        1 => vec!["violin".to_owned()],
        _ => vec!["violin".to_owned(), "cello".to_owned()],
    }
}

fn expanded_record(
    template: &QuestionTemplate,
    answer: &str,
    qa_id: String,
    video_id: String,
) -> QaRecord {
    let slots = slots_for(template);
    let question = crate::model::substitute(&template.pattern, &slots)
        .expect("slot arity matches the template");
    QaRecord {
        qa_id,
        video_id,
        template_id: template.template_id.clone(),
        question,
        slots,
        answer: answer.to_owned(),
        source: Source::Original,
    }
}

fn expand_counts(entries: &[CountsEntry], registry: &TemplateRegistry, tag: &str) -> Vec<QaRecord> {
    let mut records = Vec::new();
    for entry in entries {
        let template = registry
            .get(&entry.template_id)
            .expect("bundled counts reference bundled templates");
        for (answer, &count) in &entry.counts {
            for i in 0..count {
                records.push(expanded_record(
                    template,
                    answer,
                    format!("{}::{}::{tag}{i:05}", entry.template_id, answer),
                    format!("av-{}-{}-{tag}{i:05}", entry.template_id, answer),
                ));
            }
        }
    }
    records
}

/// The skewed corpus the audit examples run on: one record per count in the
/// bundled per-template histograms.
pub fn audit_fixture_before() -> Vec<QaRecord> {
    expand_counts(&audit_counts().before, &registry(), "b")
}

/// The same corpus after applying the bundled balancing additions.
pub fn audit_fixture_after() -> Vec<QaRecord> {
    let counts = audit_counts();
    let registry = registry();
    let mut records = expand_counts(&counts.before, &registry, "b");
    records.extend(expand_counts(&counts.additions, &registry, "x"));
    records
}

#[derive(Debug, Deserialize)]
struct StratumSpec {
    answer: String,
    corpus: u64,
    reference: u64,
}

#[derive(Debug, Deserialize)]
struct TemplateStrata {
    template_id: String,
    strata: Vec<StratumSpec>,
}

/// The full-scale synthetic corpus for the split pipeline, together with
/// the reference histograms its bias subsets are sized from.
pub fn split_corpus() -> (Vec<QaRecord>, BiasSubsetSpec) {
    let specs: Vec<TemplateStrata> =
        serde_json::from_str(SPLIT_CORPUS_JSON).expect("bundled split corpus is valid");
    let registry = registry();
    let mut records = Vec::new();
    let mut reference: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut video = 0u64;
    for spec in &specs {
        let template = registry
            .get(&spec.template_id)
            .expect("bundled corpus references bundled templates");
        let entry = reference.entry(spec.template_id.clone()).or_default();
        for stratum in &spec.strata {
            entry.insert(stratum.answer.clone(), stratum.reference);
            for i in 0..stratum.corpus {
                records.push(expanded_record(
                    template,
                    &stratum.answer,
                    format!("{}::{}::c{i:05}", spec.template_id, stratum.answer),
                    format!("sv-{video:06}"),
                ));
                video += 1;
            }
        }
    }
    (records, BiasSubsetSpec { reference })
}

/// A balanced-test-scale corpus for contrast-pair mining: binary questions
/// with controlled pool sizes (per-question mins sum to 1,643), one group
/// with no opposite answers at all, and a block of non-binary counting
/// records that mining must skip with a notice. Every record has a unique
/// video.
pub fn contrast_corpus() -> Vec<QaRecord> {
    // (template, slots, count of answer_space[0], count of answer_space[1])
    let groups: &[(&str, &[&str], u64, u64)] = &[
        ("ave-match", &[], 120, 100),
        ("ave-voiceover", &[], 90, 130),
        ("ave-always", &["violin"], 85, 85),
        ("ave-silent", &["violin"], 100, 85),
        ("avcmp-lr-louder", &[], 88, 90),
        ("avcmp-lr-first", &[], 90, 88),
        ("avcmp-louder", &["violin", "cello"], 87, 95),
        ("avcmp-longer", &["violin", "cello"], 92, 87),
        ("avcmp-rhythm", &["violin", "cello"], 86, 86),
        ("avcmp-first", &["violin", "cello"], 88, 86),
        ("vc-exist", &["violin"], 40, 45),
        ("vc-exist", &["cello"], 30, 28),
        ("vc-exist", &["flute"], 20, 22),
        ("vc-exist-pair", &["violin", "cello"], 44, 46),
        ("vc-exist-pair", &["piano", "drum"], 43, 50),
        ("vl-middle", &[], 86, 90),
        ("ac-exist", &["violin"], 30, 30),
        ("ac-exist", &["cello"], 29, 30),
        ("ac-exist", &["flute"], 28, 30),
        ("ac-exist", &["drum"], 10, 0), // no opposite pool: zero pairs
        ("ac-exist-pair", &["violin", "cello"], 43, 45),
        ("ac-exist-pair", &["piano", "drum"], 44, 44),
        ("acmp-louder", &["violin", "cello"], 86, 88),
        ("acmp-longer", &["violin", "cello"], 86, 92),
        ("acmp-rhythm", &["violin", "cello"], 85, 88),
        ("vl-scene", &[], 85, 69),
    ];
    let registry = registry();
    let mut records = Vec::new();
    let mut video = 0u64;
    for (g, &(template_id, slot_names, first, second)) in groups.iter().enumerate() {
        let template = registry
            .get(template_id)
            .expect("contrast groups reference bundled templates");
        let slots: Vec<String> = slot_names.iter().map(|s| s.to_string()).collect();
        let question = crate::model::substitute(&template.pattern, &slots)
            .expect("slot arity matches the template");
        for (answer, count) in [
            (&template.answer_space[0], first),
            (&template.answer_space[1], second),
        ] {
            for i in 0..count {
                records.push(QaRecord {
                    qa_id: format!("ct{g:02}-{answer}-{i:04}"),
                    video_id: format!("cv-{video:05}"),
                    template_id: template_id.to_owned(),
                    question: question.clone(),
                    slots: slots.clone(),
                    answer: answer.clone(),
                    source: Source::Original,
                });
                video += 1;
            }
        }
    }
    // Non-binary noise the miner must skip.
    let counting = registry.get("avc-sounding").expect("bundled template");
    for i in 0..20 {
        records.push(QaRecord {
            qa_id: format!("ctnz-{i:02}"),
            video_id: format!("cv-{video:05}"),
            template_id: counting.template_id.clone(),
            question: counting.pattern.clone(),
            slots: vec![],
            answer: "2".to_owned(),
            source: Source::Original,
        });
        video += 1;
    }
    records
}

/// Audio-visual temporal records for flip planning: 713 records with
/// positional answers cycling left/middle/right, plus 166 records answered
/// "simultaneously" that a flip planner must refuse or filter out.
pub fn temporal_flip_fixture() -> Vec<QaRecord> {
    let registry = registry();
    let templates = [
        registry.get("avt-same-first").expect("bundled template"),
        registry.get("avt-same-last").expect("bundled template"),
    ];
    let positions = ["left", "middle", "right"];
    let mut records = Vec::new();
    // 104 videos with four positional records, 99 with three: 713 total.
    let mut n = 0usize;
    for (video, per_video) in (0..104).map(|v| (v, 4)).chain((104..203).map(|v| (v, 3))) {
        for _ in 0..per_video {
            let template = templates[n % 2];
            records.push(QaRecord {
                qa_id: format!("tf-{n:04}"),
                video_id: format!("fv-{video:03}"),
                template_id: template.template_id.clone(),
                question: template.pattern.clone(),
                slots: vec![],
                answer: positions[n % 3].to_owned(),
                source: Source::Original,
            });
            n += 1;
        }
    }
    for i in 0..166 {
        let template = templates[i % 2];
        records.push(QaRecord {
            qa_id: format!("tf-s{i:03}"),
            video_id: format!("fv-{:03}", i % 203),
            template_id: template.template_id.clone(),
            question: template.pattern.clone(),
            slots: vec![],
            answer: "simultaneously".to_owned(),
            source: Source::Original,
        });
    }
    records
}

fn position_entries(instruments: &[&str]) -> Vec<PositionEntry> {
    let positions = [Position::Left, Position::Middle, Position::Right];
    instruments
        .iter()
        .enumerate()
        .map(|(i, instrument)| PositionEntry {
            instrument: (*instrument).to_string(),
            position: positions[i % 3],
            onset_rank: (i + 1) as u32,
            simultaneous: false,
        })
        .collect()
}

/// `n` random but internally consistent video annotations, deterministic
/// under `seed_value`. Instruments come from the bundled cluster map.
pub fn random_annotations(n: usize, seed_value: u64) -> BTreeMap<String, VideoAnnotation> {
    let clusters = clusters();
    let names: Vec<&str> = clusters.instruments().collect();
    let mut rng = seed::rng(seed_value, "fixture-annotations");
    let mut annotations = BTreeMap::new();
    for i in 0..n {
        let distinct_types = rng.random_range(1..=4usize);
        let mut pool = names.clone();
        pool.shuffle(&mut rng);
        let chosen = &pool[..distinct_types];
        let per_type_counts: BTreeMap<String, u32> = chosen
            .iter()
            .map(|name| (name.to_string(), rng.random_range(1..=4u32)))
            .collect();
        let total: u32 = per_type_counts.values().sum();
        let sounding = rng.random_range(0..=total);
        let distinct_sounding = if sounding == 0 {
            0
        } else {
            rng.random_range(1..=(distinct_types as u32).min(sounding))
        };
        let max_type_sounding = if sounding == 0 { 0 } else { rng.random_range(1..=sounding) };
        let annotation = VideoAnnotation {
            video_id: format!("ra-{i:05}"),
            total_instruments: total,
            distinct_types: distinct_types as u32,
            per_type_counts,
            sounding_instruments: sounding,
            distinct_sounding_types: distinct_sounding,
            max_type_sounding_count: max_type_sounding,
            sounding_throughout: rng.random_range(0..=total),
            scene: if rng.random::<bool>() { Scene::Indoor } else { Scene::Outdoor },
            has_voiceover: rng.random::<bool>(),
            audio_matches_video: rng.random::<bool>(),
            positions: position_entries(chosen),
        };
        debug_assert!(annotation.validate().is_ok());
        annotations.insert(annotation.video_id.clone(), annotation);
    }
    annotations
}

/// `n` deterministic solo/duo single-type annotations — every one eligible
/// for audio-swap planning.
pub fn solo_duo_annotations(n: usize) -> BTreeMap<String, VideoAnnotation> {
    let clusters = clusters();
    let names: Vec<&str> = clusters.instruments().collect();
    let mut annotations = BTreeMap::new();
    for i in 0..n {
        let instrument = names[i % names.len()];
        let total = 1 + (i % 2) as u32;
        let annotation = VideoAnnotation {
            video_id: format!("sd-{i:04}"),
            total_instruments: total,
            distinct_types: 1,
            per_type_counts: [(instrument.to_owned(), total)].into_iter().collect(),
            sounding_instruments: total,
            distinct_sounding_types: 1,
            max_type_sounding_count: total,
            sounding_throughout: total,
            scene: Scene::Indoor,
            has_voiceover: false,
            audio_matches_video: true,
            positions: position_entries(&[instrument]),
        };
        debug_assert!(annotation.validate().is_ok());
        annotations.insert(annotation.video_id.clone(), annotation);
    }
    annotations
}
