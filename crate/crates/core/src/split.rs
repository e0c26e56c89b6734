//! Deterministic stratified split construction.
//!
//! Strata are (template_id, answer) pairs. All selection happens by seeded
//! per-stratum shuffles with largest-remainder rounding, so a (records,
//! parameters, seed) triple always yields a byte-identical manifest. The
//! composed pipeline produces the final five-way partition: a balanced test
//! set, its bias-mirroring subset, and train/val carved from a bias subset
//! of the remaining pool.

use crate::model::{BiasSubsetSpec, Partition, QaRecord, SplitManifest};
use crate::seed::{self, PRNG_ID};
use crate::share::round_half_up;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// One stratum of the stratified sampler.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StratumKey {
    pub template_id: String,
    pub answer: String,
}

/// How a bias-subset quota for one minority answer was resolved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasQuota {
    pub template_id: String,
    pub answer: String,
    /// Dominant-answer records available (all of them are kept).
    pub n_most: u64,
    /// Reference count of the dominant answer.
    pub reference_most: u64,
    /// Reference count of this minority answer.
    pub reference_other: u64,
    /// round_half_up(n_most * reference_other / reference_most).
    pub quota: u64,
    /// Records actually taken (min of quota and availability).
    pub taken: u64,
}

/// Quota ledger and shortfall warnings for one bias-subset construction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasResolution {
    pub quotas: Vec<BiasQuota>,
    pub warnings: Vec<String>,
}

/// Split construction failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("cannot split an empty record set")]
    EmptyInput,
    #[error("fraction must be strictly between 0 and 1, got {thousandths}/1000")]
    InvalidFraction { thousandths: u32 },
    #[error("requested {size} records but only {available} are available")]
    SizeExceedsAvailable { size: u64, available: u64 },
    #[error("no reference histogram for template {template_id:?}")]
    MissingReference { template_id: String },
    #[error("reference histogram for template {template_id:?} has a zero dominant count")]
    ZeroDominantReference { template_id: String },
}

/// The five-way composed split plus the quota ledgers of its two
/// bias-subset stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullSplit {
    pub manifest: SplitManifest,
    /// Quota resolution for the bias subset carved out of the test set.
    pub test_bias: BiasResolution,
    /// Quota resolution for the bias subset of the training pool.
    pub train_bias: BiasResolution,
}

fn stratify<'a>(records: &[&'a QaRecord]) -> BTreeMap<StratumKey, Vec<&'a QaRecord>> {
    let mut strata: BTreeMap<StratumKey, Vec<&QaRecord>> = BTreeMap::new();
    for record in records {
        strata
            .entry(StratumKey {
                template_id: record.template_id.clone(),
                answer: record.answer.clone(),
            })
            .or_default()
            .push(record);
    }
    for members in strata.values_mut() {
        members.sort_by(|a, b| a.qa_id.cmp(&b.qa_id));
    }
    strata
}

/// Largest-remainder apportionment of `target` across strata, proportional
/// to stratum size. Floors first, then one extra to the strata with the
/// largest remainders (ties by stratum key), so every stratum ends within
/// one record of its exact proportional share.
fn apportion(strata: &BTreeMap<StratumKey, Vec<&QaRecord>>, target: u64) -> BTreeMap<StratumKey, u64> {
    let total: u128 = strata.values().map(|m| m.len() as u128).sum();
    let mut quotas: BTreeMap<StratumKey, u64> = BTreeMap::new();
    let mut remainders: Vec<(u128, &StratumKey)> = Vec::with_capacity(strata.len());
    let mut assigned: u64 = 0;
    for (key, members) in strata {
        let ideal = members.len() as u128 * target as u128;
        let floor = (ideal / total) as u64;
        quotas.insert(key.clone(), floor);
        assigned += floor;
        remainders.push((ideal % total, key));
    }
    let mut bumps = target - assigned;
    remainders.sort_by(|(ra, ka), (rb, kb)| rb.cmp(ra).then(ka.cmp(kb)));
    for (remainder, key) in remainders {
        if bumps == 0 {
            break;
        }
        debug_assert!(remainder > 0, "bumps never exceed the positive-remainder count");
        *quotas.get_mut(key).unwrap() += 1;
        bumps -= 1;
    }
    quotas
}

/// Seeded per-stratum selection: shuffle each stratum's ids (child purpose
/// `{prefix}/{template_id}/{answer}`) and take its quota.
fn select(
    strata: &BTreeMap<StratumKey, Vec<&QaRecord>>,
    quotas: &BTreeMap<StratumKey, u64>,
    seed_value: u64,
    prefix: &str,
) -> BTreeSet<String> {
    let mut selected = BTreeSet::new();
    for (key, members) in strata {
        let quota = quotas[key] as usize;
        let mut ids: Vec<&str> = members.iter().map(|r| r.qa_id.as_str()).collect();
        let purpose = format!("{prefix}/{}/{}", key.template_id, key.answer);
        ids.shuffle(&mut seed::rng(seed_value, &purpose));
        for id in &ids[..quota] {
            selected.insert((*id).to_owned());
        }
    }
    selected
}

fn check_fraction(thousandths: u32) -> Result<(), SplitError> {
    if thousandths == 0 || thousandths >= 1000 {
        return Err(SplitError::InvalidFraction { thousandths });
    }
    Ok(())
}

fn manifest(
    records: &[&QaRecord],
    selected: &BTreeSet<String>,
    seed_value: u64,
    fraction: Option<f64>,
    inside: Partition,
    outside: Partition,
) -> SplitManifest {
    let assignments = records
        .iter()
        .map(|r| {
            let partition = if selected.contains(&r.qa_id) { inside } else { outside };
            (r.qa_id.clone(), partition)
        })
        .collect();
    SplitManifest {
        seed: seed_value,
        prng: PRNG_ID.to_owned(),
        fraction,
        assignments,
    }
}

/// Selects a stratified `fraction_thousandths`/1000 of the records as the
/// balanced test set; everything else is marked unused. The global size is
/// round_half_up(fraction * N) and every stratum lands within one record of
/// its proportional share.
pub fn build_balanced_test(
    records: &[QaRecord],
    fraction_thousandths: u32,
    seed_value: u64,
) -> Result<SplitManifest, SplitError> {
    check_fraction(fraction_thousandths)?;
    if records.is_empty() {
        return Err(SplitError::EmptyInput);
    }
    let refs: Vec<&QaRecord> = records.iter().collect();
    let strata = stratify(&refs);
    let target = round_half_up(records.len() as u128 * fraction_thousandths as u128, 1000) as u64;
    let quotas = apportion(&strata, target);
    let selected = select(&strata, &quotas, seed_value, "balanced-test");
    Ok(manifest(
        &refs,
        &selected,
        seed_value,
        Some(fraction_thousandths as f64 / 1000.0),
        Partition::TestBalanced,
        Partition::Unused,
    ))
}

/// Rebuilds the reference skew inside `records`: every record of a
/// template's reference-dominant answer is kept, and each minority answer
/// listed in the reference contributes round_half_up(N_most * N'_other /
/// N'_most) seeded-sampled records. Minority answers with fewer available
/// records than their quota contribute everything they have and a shortfall
/// warning. Records whose answer is absent from the reference are excluded.
pub fn build_bias_subset(
    records: &[QaRecord],
    spec: &BiasSubsetSpec,
    seed_value: u64,
) -> Result<(SplitManifest, BiasResolution), SplitError> {
    if records.is_empty() {
        return Err(SplitError::EmptyInput);
    }
    let refs: Vec<&QaRecord> = records.iter().collect();
    let mut by_template: BTreeMap<&str, BTreeMap<&str, Vec<&QaRecord>>> = BTreeMap::new();
    for record in &refs {
        by_template
            .entry(record.template_id.as_str())
            .or_default()
            .entry(record.answer.as_str())
            .or_default()
            .push(record);
    }

    let mut selected: BTreeSet<String> = BTreeSet::new();
    let mut resolution = BiasResolution::default();
    for (template_id, answers) in &by_template {
        let reference =
            spec.reference
                .get(*template_id)
                .ok_or_else(|| SplitError::MissingReference {
                    template_id: (*template_id).to_owned(),
                })?;
        let (dominant, reference_most) = spec
            .dominant_of(template_id)
            .expect("reference presence checked above");
        if reference_most == 0 {
            return Err(SplitError::ZeroDominantReference {
                template_id: (*template_id).to_owned(),
            });
        }

        let n_most = answers.get(dominant).map_or(0, |v| v.len() as u64);
        if let Some(dominant_records) = answers.get(dominant) {
            for record in dominant_records {
                selected.insert(record.qa_id.clone());
            }
        }

        for (answer, &reference_other) in reference {
            if answer == dominant {
                continue;
            }
            let quota =
                round_half_up(n_most as u128 * reference_other as u128, reference_most as u128)
                    as u64;
            let mut available: Vec<&str> = answers
                .get(answer.as_str())
                .map(|v| v.iter().map(|r| r.qa_id.as_str()).collect())
                .unwrap_or_default();
            let purpose = format!("bias-subset/{template_id}/{answer}");
            available.shuffle(&mut seed::rng(seed_value, &purpose));
            let taken = quota.min(available.len() as u64);
            if taken < quota {
                resolution.warnings.push(format!(
                    "template {template_id} answer {answer}: quota {quota} exceeds the {} available records; taking all of them",
                    available.len()
                ));
            }
            for id in &available[..taken as usize] {
                selected.insert((*id).to_owned());
            }
            resolution.quotas.push(BiasQuota {
                template_id: (*template_id).to_owned(),
                answer: answer.clone(),
                n_most,
                reference_most,
                reference_other,
                quota,
                taken,
            });
        }
    }

    let manifest = manifest(
        &refs,
        &selected,
        seed_value,
        None,
        Partition::TestBias,
        Partition::Unused,
    );
    Ok((manifest, resolution))
}

/// Selects exactly `size` records, stratified proportionally with
/// largest-remainder rounding (ties by stratum key). Selected records are
/// marked as training data, the rest unused.
pub fn build_matched_balanced_subset(
    records: &[QaRecord],
    size: u64,
    seed_value: u64,
) -> Result<SplitManifest, SplitError> {
    if records.is_empty() {
        return Err(SplitError::EmptyInput);
    }
    if size > records.len() as u64 {
        return Err(SplitError::SizeExceedsAvailable {
            size,
            available: records.len() as u64,
        });
    }
    let refs: Vec<&QaRecord> = records.iter().collect();
    let strata = stratify(&refs);
    let quotas = apportion(&strata, size);
    let selected = select(&strata, &quotas, seed_value, "matched-balanced");
    Ok(manifest(
        &refs,
        &selected,
        seed_value,
        None,
        Partition::Train,
        Partition::Unused,
    ))
}

/// Reserves a stratified `fraction_thousandths`/1000 of the records for
/// validation and leaves the rest as training data. Returns the two
/// manifests (train, val), each covering its own side only.
pub fn reserve_validation(
    records: &[QaRecord],
    fraction_thousandths: u32,
    seed_value: u64,
) -> Result<(SplitManifest, SplitManifest), SplitError> {
    check_fraction(fraction_thousandths)?;
    if records.is_empty() {
        return Err(SplitError::EmptyInput);
    }
    let refs: Vec<&QaRecord> = records.iter().collect();
    let strata = stratify(&refs);
    let target = round_half_up(records.len() as u128 * fraction_thousandths as u128, 1000) as u64;
    let quotas = apportion(&strata, target);
    let selected = select(&strata, &quotas, seed_value, "validation");

    let mut train = BTreeMap::new();
    let mut val = BTreeMap::new();
    for record in &refs {
        if selected.contains(&record.qa_id) {
            val.insert(record.qa_id.clone(), Partition::Val);
        } else {
            train.insert(record.qa_id.clone(), Partition::Train);
        }
    }
    let make = |fraction: Option<f64>, assignments| SplitManifest {
        seed: seed_value,
        prng: PRNG_ID.to_owned(),
        fraction,
        assignments,
    };
    Ok((
        make(None, train),
        make(Some(fraction_thousandths as f64 / 1000.0), val),
    ))
}

/// Runs the full pipeline: (1) stratified balanced test set at
/// `test_fraction`; (2) a bias subset inside the test set (those records
/// become the biased test split, the rest stay balanced-test); (3) a bias
/// subset of the remaining pool; (4) a validation reservation at
/// `val_fraction` inside it, the rest becoming the training split; pool
/// records outside the bias subset are marked unused.
pub fn full_split(
    records: &[QaRecord],
    spec: &BiasSubsetSpec,
    test_fraction_thousandths: u32,
    val_fraction_thousandths: u32,
    seed_value: u64,
) -> Result<FullSplit, SplitError> {
    let test_manifest = build_balanced_test(records, test_fraction_thousandths, seed_value)?;
    let in_test: BTreeSet<&str> = test_manifest
        .ids_in(Partition::TestBalanced)
        .into_iter()
        .collect();

    let test_records: Vec<QaRecord> = records
        .iter()
        .filter(|r| in_test.contains(r.qa_id.as_str()))
        .cloned()
        .collect();
    let pool_records: Vec<QaRecord> = records
        .iter()
        .filter(|r| !in_test.contains(r.qa_id.as_str()))
        .cloned()
        .collect();

    let (test_bias_manifest, test_bias) = build_bias_subset(&test_records, spec, seed_value)?;
    let in_test_bias: BTreeSet<&str> =
        test_bias_manifest.ids_in(Partition::TestBias).into_iter().collect();

    let (pool_bias_manifest, train_bias) = build_bias_subset(&pool_records, spec, seed_value)?;
    let in_pool_bias: BTreeSet<&str> =
        pool_bias_manifest.ids_in(Partition::TestBias).into_iter().collect();
    let pool_bias_records: Vec<QaRecord> = pool_records
        .iter()
        .filter(|r| in_pool_bias.contains(r.qa_id.as_str()))
        .cloned()
        .collect();
    let (train_manifest, val_manifest) =
        reserve_validation(&pool_bias_records, val_fraction_thousandths, seed_value)?;

    let mut assignments: BTreeMap<String, Partition> = BTreeMap::new();
    for record in records {
        let id = record.qa_id.as_str();
        let partition = if in_test.contains(id) {
            if in_test_bias.contains(id) {
                Partition::TestBias
            } else {
                Partition::TestBalanced
            }
        } else if val_manifest.assignments.contains_key(id) {
            Partition::Val
        } else if train_manifest.assignments.contains_key(id) {
            Partition::Train
        } else {
            Partition::Unused
        };
        assignments.insert(id.to_owned(), partition);
    }

    Ok(FullSplit {
        manifest: SplitManifest {
            seed: seed_value,
            prng: PRNG_ID.to_owned(),
            fraction: None,
            assignments,
        },
        test_bias,
        train_bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Source;
    use proptest::prelude::*;

    fn rec(template_id: &str, answer: &str, i: usize) -> QaRecord {
        QaRecord {
            qa_id: format!("{template_id}-{answer}-{i:04}"),
            video_id: format!("v-{template_id}-{answer}-{i:04}"),
            template_id: template_id.to_owned(),
            question: "q".to_owned(),
            slots: vec![],
            answer: answer.to_owned(),
            source: Source::Original,
        }
    }

    fn corpus(spec: &[(&str, &str, usize)]) -> Vec<QaRecord> {
        spec.iter()
            .flat_map(|&(t, a, n)| (0..n).map(move |i| rec(t, a, i)))
            .collect()
    }

    #[test]
    fn balanced_test_selects_exact_fifth_of_divisible_stratum() {
        let records = corpus(&[("t1", "yes", 10)]);
        let manifest = build_balanced_test(&records, 200, 9).unwrap();
        assert_eq!(manifest.size_of(Partition::TestBalanced), 2);
        assert_eq!(manifest.size_of(Partition::Unused), 8);
        assert_eq!(manifest.fraction, Some(0.2));
        assert_eq!(manifest.prng, PRNG_ID);
    }

    #[test]
    fn balanced_test_is_deterministic_and_seed_sensitive_in_membership_only() {
        let records = corpus(&[("t1", "yes", 13), ("t1", "no", 29), ("t2", "left", 17)]);
        let a = build_balanced_test(&records, 333, 1).unwrap();
        let b = build_balanced_test(&records, 333, 1).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = build_balanced_test(&records, 333, 2).unwrap();
        assert_eq!(a.partition_sizes(), c.partition_sizes());
        assert_ne!(a.assignments, c.assignments);
    }

    #[test]
    fn split_rejects_bad_parameters() {
        let records = corpus(&[("t1", "yes", 4)]);
        assert!(matches!(
            build_balanced_test(&[], 200, 0),
            Err(SplitError::EmptyInput)
        ));
        assert!(matches!(
            build_balanced_test(&records, 0, 0),
            Err(SplitError::InvalidFraction { .. })
        ));
        assert!(matches!(
            build_balanced_test(&records, 1000, 0),
            Err(SplitError::InvalidFraction { .. })
        ));
        assert!(matches!(
            build_matched_balanced_subset(&records, 5, 0),
            Err(SplitError::SizeExceedsAvailable { size: 5, available: 4 })
        ));
        assert!(matches!(
            reserve_validation(&[], 125, 0),
            Err(SplitError::EmptyInput)
        ));
    }

    fn spec_for(template_id: &str, pairs: &[(&str, u64)]) -> BiasSubsetSpec {
        BiasSubsetSpec {
            reference: [(
                template_id.to_owned(),
                pairs.iter().map(|(a, c)| (a.to_string(), *c)).collect(),
            )]
            .into_iter()
            .collect(),
        }
    }

    #[test]
    fn bias_subset_applies_reference_ratio_quota() {
        // 100 dominant available, reference 80/20 -> quota 100*20/80 = 25.
        let records = corpus(&[("t1", "yes", 100), ("t1", "no", 30)]);
        let spec = spec_for("t1", &[("yes", 80), ("no", 20)]);
        let (manifest, resolution) = build_bias_subset(&records, &spec, 3).unwrap();
        assert_eq!(manifest.size_of(Partition::TestBias), 125);
        assert_eq!(manifest.size_of(Partition::Unused), 5);
        assert_eq!(resolution.warnings, Vec::<String>::new());
        assert_eq!(
            resolution.quotas,
            vec![BiasQuota {
                template_id: "t1".to_owned(),
                answer: "no".to_owned(),
                n_most: 100,
                reference_most: 80,
                reference_other: 20,
                quota: 25,
                taken: 25,
            }]
        );
        // Every dominant record is kept.
        for id in manifest.ids_in(Partition::Unused) {
            assert!(id.starts_with("t1-no-"));
        }
    }

    #[test]
    fn bias_subset_zero_reference_minority_takes_nothing() {
        let records = corpus(&[("t1", "yes", 40), ("t1", "no", 10)]);
        let spec = spec_for("t1", &[("yes", 80), ("no", 0)]);
        let (manifest, resolution) = build_bias_subset(&records, &spec, 3).unwrap();
        assert_eq!(manifest.size_of(Partition::TestBias), 40);
        assert_eq!(resolution.quotas[0].quota, 0);
    }

    #[test]
    fn bias_subset_logs_shortfalls_and_validates_reference() {
        let records = corpus(&[("t1", "yes", 100), ("t1", "no", 10)]);
        let spec = spec_for("t1", &[("yes", 80), ("no", 20)]);
        let (manifest, resolution) = build_bias_subset(&records, &spec, 3).unwrap();
        assert_eq!(manifest.size_of(Partition::TestBias), 110, "all 10 minority records taken");
        assert_eq!(resolution.quotas[0].quota, 25);
        assert_eq!(resolution.quotas[0].taken, 10);
        assert_eq!(resolution.warnings.len(), 1);
        assert!(resolution.warnings[0].contains("quota 25 exceeds the 10 available"));

        assert!(matches!(
            build_bias_subset(&records, &spec_for("other", &[("yes", 1)]), 3),
            Err(SplitError::MissingReference { .. })
        ));
        assert!(matches!(
            build_bias_subset(&records, &spec_for("t1", &[("yes", 0), ("no", 0)]), 3),
            Err(SplitError::ZeroDominantReference { .. })
        ));
    }

    #[test]
    fn matched_subset_hits_exact_size_with_stratified_spread() {
        let records = corpus(&[("t1", "yes", 30), ("t1", "no", 30), ("t2", "left", 40)]);
        let manifest = build_matched_balanced_subset(&records, 50, 5).unwrap();
        assert_eq!(manifest.size_of(Partition::Train), 50);
        let picked = |prefix: &str| {
            manifest
                .ids_in(Partition::Train)
                .iter()
                .filter(|id| id.starts_with(prefix))
                .count()
        };
        assert_eq!(picked("t1-yes-"), 15);
        assert_eq!(picked("t1-no-"), 15);
        assert_eq!(picked("t2-left-"), 20);

        let everything = build_matched_balanced_subset(&records, 100, 5).unwrap();
        assert_eq!(everything.size_of(Partition::Train), 100);
        let nothing = build_matched_balanced_subset(&records, 0, 5).unwrap();
        assert_eq!(nothing.size_of(Partition::Train), 0);
    }

    #[test]
    fn validation_reserves_exact_eighth() {
        let records = corpus(&[("t1", "yes", 8)]);
        let (train, val) = reserve_validation(&records, 125, 2).unwrap();
        assert_eq!(val.size_of(Partition::Val), 1);
        assert_eq!(train.size_of(Partition::Train), 7);
        assert_eq!(val.fraction, Some(0.125));
        // The two manifests cover disjoint halves of the input.
        let mut all: Vec<&String> = train.assignments.keys().chain(val.assignments.keys()).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 8);
    }

    #[test]
    fn full_split_partitions_are_disjoint_and_complete() {
        let records = corpus(&[
            ("t1", "yes", 80),
            ("t1", "no", 40),
            ("t2", "left", 30),
            ("t2", "right", 26),
        ]);
        let spec = BiasSubsetSpec {
            reference: [
                (
                    "t1".to_owned(),
                    [("yes".to_owned(), 90u64), ("no".to_owned(), 10)].into_iter().collect(),
                ),
                (
                    "t2".to_owned(),
                    [("left".to_owned(), 70u64), ("right".to_owned(), 30)].into_iter().collect(),
                ),
            ]
            .into_iter()
            .collect(),
        };
        let full = full_split(&records, &spec, 200, 125, 11).unwrap();
        assert_eq!(full.manifest.assignments.len(), records.len());
        let sizes = full.manifest.partition_sizes();
        let total: usize = sizes.values().sum();
        assert_eq!(total, records.len());
        // Test side: 20% of 176 = 35 records split between bias and balanced.
        let test_side = full.manifest.size_of(Partition::TestBias)
            + full.manifest.size_of(Partition::TestBalanced);
        assert_eq!(test_side, 35);
        assert!(full.manifest.size_of(Partition::Train) > 0);
        assert!(full.manifest.size_of(Partition::Val) > 0);
        // Determinism end to end.
        let again = full_split(&records, &spec, 200, 125, 11).unwrap();
        assert_eq!(
            serde_json::to_string(&full.manifest).unwrap(),
            serde_json::to_string(&again.manifest).unwrap()
        );
    }

    proptest! {
        /// Partition property + per-stratum proportionality for the
        /// fraction-driven selector.
        #[test]
        fn balanced_test_respects_stratum_proportionality(
            sizes in proptest::collection::vec(1usize..40, 1..6),
            fraction in 1u32..1000,
            seed_value in 0u64..1000,
        ) {
            let spec: Vec<(String, usize)> = sizes
                .iter()
                .enumerate()
                .map(|(i, &n)| (format!("t{i}"), n))
                .collect();
            let records: Vec<QaRecord> = spec
                .iter()
                .flat_map(|(t, n)| (0..*n).map(move |i| rec(t, "yes", i)))
                .collect();
            let manifest = build_balanced_test(&records, fraction, seed_value).unwrap();
            prop_assert_eq!(manifest.assignments.len(), records.len());
            let n: u128 = records.len() as u128;
            let expected_total = round_half_up(n * fraction as u128, 1000) as usize;
            prop_assert_eq!(manifest.size_of(Partition::TestBalanced), expected_total);
            for (t, stratum_n) in &spec {
                let picked = manifest
                    .ids_in(Partition::TestBalanced)
                    .iter()
                    .filter(|id| id.starts_with(&format!("{t}-yes-")))
                    .count() as u128;
                // |picked - f*n| < 1  <=>  floor(f*n) <= picked <= ceil(f*n)
                let ideal = *stratum_n as u128 * fraction as u128;
                prop_assert!(picked * 1000 <= ideal + 999, "picked above ceiling");
                prop_assert!(picked * 1000 + 999 >= ideal, "picked below floor");
            }
        }

        /// Minority quotas equal the reference-ratio formula exactly and the
        /// dominant answer is fully included.
        #[test]
        fn bias_subset_quota_matches_formula(
            dominant_available in 0u64..120,
            minority_available in 0u64..120,
            reference_most in 1u64..500,
            reference_other in 0u64..500,
            seed_value in 0u64..100,
        ) {
            let records = corpus(&[
                ("t1", "yes", dominant_available as usize),
                ("t1", "no", minority_available as usize),
            ]);
            prop_assume!(!records.is_empty());
            let spec = spec_for("t1", &[("yes", reference_most.max(reference_other + 1)), ("no", reference_other)]);
            let (manifest, resolution) = build_bias_subset(&records, &spec, seed_value).unwrap();
            let expected_quota = round_half_up(
                dominant_available as u128 * reference_other as u128,
                reference_most.max(reference_other + 1) as u128,
            ) as u64;
            prop_assert_eq!(resolution.quotas[0].quota, expected_quota);
            prop_assert_eq!(resolution.quotas[0].taken, expected_quota.min(minority_available));
            let in_subset = manifest.ids_in(Partition::TestBias);
            let dominant_kept = in_subset.iter().filter(|id| id.starts_with("t1-yes-")).count();
            prop_assert_eq!(dominant_kept as u64, dominant_available);
        }

        /// Exact-size selection always hits its size and stays within one
        /// record of proportional per stratum.
        #[test]
        fn matched_subset_is_exact_and_proportional(
            sizes in proptest::collection::vec(1usize..30, 1..5),
            pick_permille in 0u32..=1000,
            seed_value in 0u64..100,
        ) {
            let spec: Vec<(String, usize)> = sizes
                .iter()
                .enumerate()
                .map(|(i, &n)| (format!("t{i}"), n))
                .collect();
            let records: Vec<QaRecord> = spec
                .iter()
                .flat_map(|(t, n)| (0..*n).map(move |i| rec(t, "yes", i)))
                .collect();
            let size = (records.len() as u64 * pick_permille as u64) / 1000;
            let manifest = build_matched_balanced_subset(&records, size, seed_value).unwrap();
            prop_assert_eq!(manifest.size_of(Partition::Train) as u64, size);
            for (t, stratum_n) in &spec {
                let picked = manifest
                    .ids_in(Partition::Train)
                    .iter()
                    .filter(|id| id.starts_with(&format!("{t}-yes-")))
                    .count() as u128;
                let ideal_num = *stratum_n as u128 * size as u128;
                let total = records.len() as u128;
                prop_assert!(picked * total < ideal_num + total);
                prop_assert!(picked * total + total > ideal_num);
            }
        }
    }
}
