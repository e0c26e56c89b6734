//! Balancing plans: minimal complementary-QA deficits, audio-swap plans,
//! horizontal-flip augmentation, and annotation-driven QA generation.
//!
//! Planners never touch media; they emit machine-readable plans and
//! ready-to-append QA records. Every planner is deterministic: identical
//! inputs and seed produce identical output, and record lists are
//! canonically sorted by (template_id, qa_id).

use crate::audit::AnswerHistogram;
use crate::model::{
    substitute, Aspect, InstrumentClusterMap, Modality, ModelError, Position, QaRecord,
    QuestionTemplate, Source, TemplateRegistry, VideoAnnotation,
};
use crate::seed;
use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Template ids the generators emit. They name the bundled registry
/// entries; callers supplying their own registry must keep these ids.
pub const TPL_SOUNDING_COUNT: &str = "avc-sounding";
pub const TPL_SOUNDING_TYPES: &str = "avc-types";
pub const TPL_PER_TYPE_SOUNDING: &str = "avc-pertype";
pub const TPL_SILENT_COUNT: &str = "avc-silent";
pub const TPL_VISUAL_TYPES: &str = "vc-types";
pub const TPL_AUDIO_DISTINCT: &str = "ac-distinct";
pub const TPL_VISUAL_EXIST: &str = "vc-exist";
pub const TPL_AUDIO_EXIST: &str = "ac-exist";
pub const TPL_SCENE: &str = "vl-scene";
pub const TPL_VOICEOVER: &str = "ave-voiceover";
pub const TPL_AUDIO_MATCH: &str = "ave-match";

/// Additions needed to pull a template's dominant share down to a target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeficitPlan {
    pub template_id: String,
    /// Target dominant share, in thousandths.
    pub target_thousandths: u32,
    /// Records to add per (non-dominant) answer; only positive entries.
    pub additions: BTreeMap<String, u64>,
}

impl DeficitPlan {
    pub fn total_additions(&self) -> u64 {
        self.additions.values().sum()
    }
}

/// One planned audio-track replacement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapPlan {
    pub video_id: String,
    pub original_instrument: String,
    pub replacement_instrument: String,
    pub same_cluster: bool,
}

/// Planning failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("cannot plan for template {template_id:?}: empty histogram")]
    EmptyHistogram { template_id: String },
    #[error("target share {target}/1000 is below uniform (1/{answers}) and can never be reached")]
    InfeasibleTarget { target: u32, answers: usize },
    #[error("instrument {instrument:?} is missing from the cluster map")]
    UnclusteredInstrument { instrument: String },
    #[error("requested {requested} swap plans but only {available} eligible solo/duo videos exist")]
    InsufficientEligible { requested: usize, available: usize },
    #[error(
        "cannot realize {needed} same-cluster swaps: only {capable} of the selected videos have \
         a same-cluster alternative instrument"
    )]
    SameClusterShortfall { needed: usize, capable: usize },
    #[error("cross-cluster swaps are impossible: the cluster map covers a single cluster")]
    NoCrossCluster,
    #[error("record {qa_id:?} is not an audio-visual temporal question")]
    NotTemporal { qa_id: String },
    #[error("record {qa_id:?} has non-positional answer {answer:?}")]
    NonPositionalAnswer { qa_id: String, answer: String },
    #[error("annotation {video_id:?} derives a negative silent-instrument count")]
    NegativeDerivedCount { video_id: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Computes the MINIMUM number of records to add to non-dominant answers so
/// that the dominant share drops to at most `target_thousandths`/1000, and
/// water-fills that total toward uniformity (raising the currently smallest
/// non-dominant counts first; ties broken by answer-space order).
pub fn compute_deficit(
    hist: &AnswerHistogram,
    template: &QuestionTemplate,
    target_thousandths: u32,
) -> Result<DeficitPlan, PlanError> {
    if hist.total == 0 {
        return Err(PlanError::EmptyHistogram {
            template_id: hist.template_id.clone(),
        });
    }
    let k = template.answer_space.len();
    if (target_thousandths as u128) * (k as u128) < 1000 {
        return Err(PlanError::InfeasibleTarget {
            target: target_thousandths,
            answers: k,
        });
    }

    let counts: Vec<u64> = template
        .answer_space
        .iter()
        .map(|a| hist.counts.get(a).copied().unwrap_or(0))
        .collect();
    // Dominant index: maximum count, ties to the earliest answer.
    let dominant = counts
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.cmp(b).then(j.cmp(i)))
        .map(|(i, _)| i)
        .expect("validated answer space is non-empty");
    let m = counts[dominant] as u128;
    let total = hist.total as u128;
    let target = target_thousandths as u128;

    // Smallest A such that a distribution with dominant share <= target
    // exists: the cap floor(target*(total+A)/1000) must cover the dominant
    // count, and the non-dominant headroom below the cap must absorb A.
    let mut extra: u128 = 0;
    loop {
        let cap = target * (total + extra) / 1000;
        if m <= cap {
            let headroom: u128 = counts
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != dominant)
                .map(|(_, &c)| cap - c as u128) // c <= m <= cap
                .sum();
            if headroom >= extra {
                break;
            }
        }
        extra += 1;
    }

    // Water-fill `extra` units onto the currently smallest non-dominant
    // answers, one at a time.
    let mut filled = counts.clone();
    let mut remaining = extra;
    while remaining > 0 {
        let mut best: Option<usize> = None;
        for i in 0..k {
            if i == dominant {
                continue;
            }
            if best.is_none_or(|b| filled[i] < filled[b]) {
                best = Some(i);
            }
        }
        filled[best.expect("k >= 2 whenever additions are needed")] += 1;
        remaining -= 1;
    }
    debug_assert!(
        filled.iter().all(|&c| c as u128 * 1000 <= target * (total + extra)),
        "water-fill must keep every answer at or below the target share"
    );

    let additions: BTreeMap<String, u64> = template
        .answer_space
        .iter()
        .zip(filled.iter().zip(&counts))
        .filter(|(_, (&new, &old))| new > old)
        .map(|(answer, (&new, &old))| (answer.clone(), new - old))
        .collect();
    Ok(DeficitPlan {
        template_id: hist.template_id.clone(),
        target_thousandths,
        additions,
    })
}

/// Plans `n` audio-track replacements over the eligible videos (single
/// instrument type, one or two instruments in total), realizing the
/// half-and-half cluster policy exactly: ceil(n/2) same-cluster and
/// floor(n/2) cross-cluster replacements, deterministic under `seed`.
/// Plans are returned sorted by video id.
pub fn plan_audio_swaps(
    annotations: &BTreeMap<String, VideoAnnotation>,
    clusters: &InstrumentClusterMap,
    n: usize,
    seed_value: u64,
) -> Result<Vec<SwapPlan>, PlanError> {
    for annotation in annotations.values() {
        for instrument in annotation.per_type_counts.keys() {
            if clusters.cluster_of(instrument).is_none() {
                return Err(PlanError::UnclusteredInstrument {
                    instrument: instrument.clone(),
                });
            }
        }
    }

    // Eligible: solo or duo videos of a single instrument type, in
    // video-id order before the seeded shuffle.
    let mut eligible: Vec<(&str, &str)> = annotations
        .values()
        .filter(|a| a.distinct_types == 1 && (1..=2).contains(&a.total_instruments))
        .map(|a| {
            let instrument = a
                .per_type_counts
                .keys()
                .next()
                .expect("distinct_types == 1 implies one per-type entry");
            (a.video_id.as_str(), instrument.as_str())
        })
        .collect();
    if n > eligible.len() {
        return Err(PlanError::InsufficientEligible {
            requested: n,
            available: eligible.len(),
        });
    }

    let mut members: BTreeMap<crate::model::Cluster, Vec<&str>> = BTreeMap::new();
    for (instrument, &cluster) in &clusters.0 {
        members.entry(cluster).or_default().push(instrument.as_str());
    }
    let cluster_count = members.len();

    let mut rng = seed::rng(seed_value, "audio-swaps");
    eligible.shuffle(&mut rng);
    let selected = &eligible[..n];

    let same_needed = n.div_ceil(2);
    let cross_needed = n / 2;
    if cross_needed > 0 && cluster_count < 2 {
        return Err(PlanError::NoCrossCluster);
    }

    let mut plans = Vec::with_capacity(n);
    let mut same_assigned = 0usize;
    let mut capable = 0usize;
    for &(video_id, original) in selected {
        let cluster = clusters
            .cluster_of(original)
            .expect("checked above: every instrument is clustered");
        let same_candidates: Vec<&str> = members[&cluster]
            .iter()
            .copied()
            .filter(|&i| i != original)
            .collect();
        if !same_candidates.is_empty() {
            capable += 1;
        }
        let use_same = same_assigned < same_needed && !same_candidates.is_empty();
        let replacement = if use_same {
            same_assigned += 1;
            *same_candidates
                .choose(&mut rng)
                .expect("non-empty by the branch condition")
        } else {
            let cross_candidates: Vec<&str> = members
                .iter()
                .filter(|(c, _)| **c != cluster)
                .flat_map(|(_, list)| list.iter().copied())
                .collect();
            *cross_candidates.choose(&mut rng).ok_or(PlanError::NoCrossCluster)?
        };
        plans.push(SwapPlan {
            video_id: video_id.to_owned(),
            original_instrument: original.to_owned(),
            replacement_instrument: replacement.to_owned(),
            same_cluster: use_same,
        });
    }
    if same_assigned < same_needed {
        return Err(PlanError::SameClusterShortfall {
            needed: same_needed,
            capable,
        });
    }
    plans.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    Ok(plans)
}

/// Produces one horizontally-mirrored record per input: the same question
/// on the flipped video (`#hflip` suffix), with `left` and `right` swapped
/// and `middle` fixed. Inputs must be audio-visual temporal records with
/// positional answers.
pub fn plan_flip_augment(
    records: &[QaRecord],
    registry: &TemplateRegistry,
) -> Result<Vec<QaRecord>, PlanError> {
    let mut out = Vec::with_capacity(records.len());
    for record in records {
        let template = registry.require(&record.template_id)?;
        if template.modality != Modality::AudioVisual || template.aspect != Aspect::Temporal {
            return Err(PlanError::NotTemporal {
                qa_id: record.qa_id.clone(),
            });
        }
        let position = match record.answer.as_str() {
            "left" => Position::Left,
            "middle" => Position::Middle,
            "right" => Position::Right,
            other => {
                return Err(PlanError::NonPositionalAnswer {
                    qa_id: record.qa_id.clone(),
                    answer: other.to_owned(),
                });
            }
        };
        out.push(QaRecord {
            qa_id: format!("{}#flip", record.qa_id),
            video_id: format!("{}#hflip", record.video_id),
            template_id: record.template_id.clone(),
            question: record.question.clone(),
            slots: record.slots.clone(),
            answer: position.mirrored().as_str().to_owned(),
            source: Source::Generated,
        });
    }
    out.sort_by(|a, b| (&a.template_id, &a.qa_id).cmp(&(&b.template_id, &b.qa_id)));
    Ok(out)
}

fn count_answer(c: u32) -> String {
    if c <= 10 {
        c.to_string()
    } else {
        "more than ten".to_owned()
    }
}

fn make_record(
    annotation: &VideoAnnotation,
    template: &QuestionTemplate,
    slots: Vec<String>,
    answer: String,
    qa_id: String,
) -> Result<QaRecord, PlanError> {
    let question = substitute(&template.pattern, &slots)?;
    Ok(QaRecord {
        qa_id,
        video_id: annotation.video_id.clone(),
        template_id: template.template_id.clone(),
        question,
        slots,
        answer,
        source: Source::Generated,
    })
}

/// Generates the counting questions answerable from one annotation:
/// sounding-instrument count, sounding-type count, the per-type sounding
/// count for the most numerous type, visible-type count, distinct-sound
/// count, and (only when `derive_t4` is set) the count of instruments that
/// did not sound from the beginning, derived as total − sounding_throughout.
/// Counts above ten clamp to "more than ten".
pub fn generate_counting_qa(
    annotation: &VideoAnnotation,
    registry: &TemplateRegistry,
    derive_t4: bool,
) -> Result<Vec<QaRecord>, PlanError> {
    annotation.validate()?;
    let mut out = Vec::new();
    let simple = [
        (TPL_SOUNDING_COUNT, annotation.sounding_instruments),
        (TPL_SOUNDING_TYPES, annotation.distinct_sounding_types),
        (TPL_VISUAL_TYPES, annotation.distinct_types),
        (TPL_AUDIO_DISTINCT, annotation.distinct_sounding_types),
    ];
    for (template_id, count) in simple {
        let template = registry.require(template_id)?;
        out.push(make_record(
            annotation,
            template,
            vec![],
            count_answer(count),
            format!("{}::{}", annotation.video_id, template_id),
        )?);
    }

    // Per-type sounding count: asked for the most numerous type (ties to
    // the lexicographically first), the only type whose sounding count the
    // annotation pins down (as max_type_sounding_count).
    let mut argmax: Option<(&String, u32)> = None;
    for (instrument, &count) in &annotation.per_type_counts {
        match argmax {
            Some((_, best)) if count <= best => {}
            _ => argmax = Some((instrument, count)),
        }
    }
    if let Some((instrument, _)) = argmax {
        let template = registry.require(TPL_PER_TYPE_SOUNDING)?;
        out.push(make_record(
            annotation,
            template,
            vec![instrument.clone()],
            count_answer(annotation.max_type_sounding_count),
            format!("{}::{}::{}", annotation.video_id, TPL_PER_TYPE_SOUNDING, instrument),
        )?);
    }

    if derive_t4 {
        if annotation.sounding_throughout > annotation.total_instruments {
            return Err(PlanError::NegativeDerivedCount {
                video_id: annotation.video_id.clone(),
            });
        }
        let template = registry.require(TPL_SILENT_COUNT)?;
        let silent = annotation.total_instruments - annotation.sounding_throughout;
        out.push(make_record(
            annotation,
            template,
            vec![],
            count_answer(silent),
            format!("{}::{}", annotation.video_id, TPL_SILENT_COUNT),
        )?);
    }

    out.sort_by(|a, b| (&a.template_id, &a.qa_id).cmp(&(&b.template_id, &b.qa_id)));
    Ok(out)
}

/// Generates existence questions from one annotation: "yes" visual and
/// audio existence records for every present instrument type, "no" records
/// for a seeded sample of absent instruments (as many as there are present
/// types, capped by availability), plus the scene, voiceover, and
/// audio-match questions.
pub fn generate_existential_qa(
    annotation: &VideoAnnotation,
    registry: &TemplateRegistry,
    instruments: &[String],
    seed_value: u64,
) -> Result<Vec<QaRecord>, PlanError> {
    annotation.validate()?;
    let mut out = Vec::new();

    let visual = registry.require(TPL_VISUAL_EXIST)?;
    let audio = registry.require(TPL_AUDIO_EXIST)?;
    for instrument in annotation.per_type_counts.keys() {
        for template in [visual, audio] {
            out.push(make_record(
                annotation,
                template,
                vec![instrument.clone()],
                "yes".to_owned(),
                format!("{}::{}::{}", annotation.video_id, template.template_id, instrument),
            )?);
        }
    }

    let mut absent: Vec<&String> = instruments
        .iter()
        .filter(|i| !annotation.per_type_counts.contains_key(*i))
        .collect();
    let mut rng = seed::rng(seed_value, &format!("existential/{}", annotation.video_id));
    absent.shuffle(&mut rng);
    let sample = annotation.per_type_counts.len().min(absent.len());
    for instrument in &absent[..sample] {
        for template in [visual, audio] {
            out.push(make_record(
                annotation,
                template,
                vec![(*instrument).clone()],
                "no".to_owned(),
                format!("{}::{}::{}", annotation.video_id, template.template_id, instrument),
            )?);
        }
    }

    let flags = [
        (TPL_SCENE, annotation.scene.as_str().to_owned()),
        (TPL_VOICEOVER, if annotation.has_voiceover { "yes" } else { "no" }.to_owned()),
        (
            TPL_AUDIO_MATCH,
            if annotation.audio_matches_video { "yes" } else { "no" }.to_owned(),
        ),
    ];
    for (template_id, answer) in flags {
        let template = registry.require(template_id)?;
        out.push(make_record(
            annotation,
            template,
            vec![],
            answer,
            format!("{}::{}", annotation.video_id, template_id),
        )?);
    }

    out.sort_by(|a, b| (&a.template_id, &a.qa_id).cmp(&(&b.template_id, &b.qa_id)));
    Ok(out)
}
