//! `avqa plan`: balancing plans — deficit additions, audio swaps, mirrored
//! temporal records, and annotation-driven QA generation.

use super::{load_qa, load_registry};
use crate::config::{fraction, require_seed, ConfigArgs};
use crate::emit::{emit, json_text, read_input, record_bundled, report_warnings, with_meta};
use anyhow::Result;
use avqa_core::ingest;
use avqa_core::meta::OutputMeta;
use avqa_core::model::{Aspect, Modality, QaRecord, VideoAnnotation};
use avqa_core::share::format_thousandths;
use avqa_core::{audit, fixtures, planner};
use clap::{Args, Subcommand};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Subcommand)]
pub enum PlanCommand {
    /// Minimum per-answer additions that bring each biased template to its
    /// target dominant share.
    Deficits(DeficitsArgs),
    /// Audio-track replacements, half same-cluster and half cross-cluster.
    AudioSwaps(AudioSwapsArgs),
    /// Horizontally-mirrored copies of positional temporal records.
    Flip(FlipArgs),
    /// Counting and existence records derived from video annotations.
    Generate(GenerateArgs),
}

pub fn run(command: &PlanCommand) -> Result<()> {
    match command {
        PlanCommand::Deficits(args) => deficits(args),
        PlanCommand::AudioSwaps(args) => audio_swaps(args),
        PlanCommand::Flip(args) => flip(args),
        PlanCommand::Generate(args) => generate(args),
    }
}

#[derive(Debug, Args)]
pub struct DeficitsArgs {
    /// QA records to audit (JSON).
    #[arg(long, value_name = "FILE")]
    pub qa: PathBuf,

    /// Template registry (JSON).
    #[arg(long, value_name = "FILE")]
    pub templates: PathBuf,

    /// Target dominant share for every plan; defaults to each template's
    /// bias threshold.
    #[arg(long, value_name = "FRACTION")]
    pub target: Option<String>,

    /// Write the plans here instead of printing them.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

fn deficits(args: &DeficitsArgs) -> Result<()> {
    let config = args.config.resolve(None, None, None, false)?;
    let target_override = args.target.as_deref().map(|s| fraction(s, "--target")).transpose()?;

    let mut meta = OutputMeta::new();
    let registry = load_registry(&args.templates, &config, &mut meta)?;
    let records = load_qa(&args.qa, "qa", &registry, &config, &mut meta)?;

    let report = audit::audit(&records, &registry, &config.thresholds)?;
    let mut plans = Vec::new();
    for entry in &report.entries {
        if !entry.flag.biased {
            continue;
        }
        let template = registry
            .get(&entry.histogram.template_id)
            .expect("audited templates come from the registry");
        let target =
            target_override.unwrap_or_else(|| config.thresholds.for_template(template));
        plans.push(planner::compute_deficit(&entry.histogram, template, target)?);
    }

    let total: u64 = plans.iter().map(|p| p.total_additions()).sum();
    let mut summary = format!("{} biased templates need {} added records", plans.len(), total);
    for plan in &plans {
        summary.push_str(&format!(
            "\n  {}: +{} to reach {}",
            plan.template_id,
            plan.total_additions(),
            format_thousandths(plan.target_thousandths as i64)
        ));
    }

    let body = with_meta(
        &meta,
        json!({
            "plans": plans,
            "total_additions": total,
        }),
    );
    let text = json_text(&body);
    emit(args.out.as_deref(), &text, &text, &summary)
}

#[derive(Debug, Args)]
pub struct AudioSwapsArgs {
    /// Video annotations (JSON array).
    #[arg(long, value_name = "FILE")]
    pub annotations: PathBuf,

    /// Number of swaps to plan.
    #[arg(long, value_name = "N")]
    pub count: usize,

    /// Instrument-cluster map (JSON); defaults to the bundled map.
    #[arg(long, value_name = "FILE")]
    pub clusters: Option<PathBuf>,

    /// Seed selecting the videos and replacement instruments.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Write the plans here instead of printing them.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

const AUDIO_SWAPS_USAGE: &str =
    "avqa plan audio-swaps --annotations <FILE> --count <N> --seed <N> [--clusters <FILE>] \
     [--out <FILE>]";

fn audio_swaps(args: &AudioSwapsArgs) -> Result<()> {
    let config = args.config.resolve(args.seed, None, None, false)?;
    let seed = require_seed(&config, AUDIO_SWAPS_USAGE)?;

    let mut meta = OutputMeta::with_seed(seed);
    let annotations = load_annotations(&args.annotations, &config, &mut meta)?;
    let clusters = match &args.clusters {
        Some(path) => {
            let text = read_input(path, "clusters", &mut meta)?;
            ingest::parse_clusters(&text, &path.display().to_string())?
        }
        None => {
            record_bundled(fixtures::CLUSTERS_JSON, "clusters", &mut meta);
            fixtures::clusters()
        }
    };

    let plans = planner::plan_audio_swaps(&annotations, &clusters, args.count, seed)?;
    let same = plans.iter().filter(|p| p.same_cluster).count();
    let summary = format!(
        "planned {} swaps ({} same-cluster, {} cross-cluster)",
        plans.len(),
        same,
        plans.len() - same
    );

    let body = with_meta(&meta, json!({ "swaps": plans }));
    let text = json_text(&body);
    emit(args.out.as_deref(), &text, &text, &summary)
}

#[derive(Debug, Args)]
pub struct FlipArgs {
    /// QA records to mirror (JSON); non-positional records are skipped.
    #[arg(long, value_name = "FILE")]
    pub qa: PathBuf,

    /// Template registry (JSON).
    #[arg(long, value_name = "FILE")]
    pub templates: PathBuf,

    /// Write the mirrored records here instead of printing them.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

fn flip(args: &FlipArgs) -> Result<()> {
    let config = args.config.resolve(None, None, None, false)?;
    let mut meta = OutputMeta::new();
    let registry = load_registry(&args.templates, &config, &mut meta)?;
    let records = load_qa(&args.qa, "qa", &registry, &config, &mut meta)?;

    // Only audio-visual temporal records with a left/middle/right answer
    // have a mirror image; everything else is reported and skipped.
    let positional: Vec<QaRecord> = records
        .iter()
        .filter(|r| {
            let template = registry.get(&r.template_id);
            template.is_some_and(|t| {
                t.modality == Modality::AudioVisual
                    && t.aspect == Aspect::Temporal
                    && matches!(r.answer.as_str(), "left" | "middle" | "right")
            })
        })
        .cloned()
        .collect();
    let skipped = records.len() - positional.len();
    if skipped > 0 {
        eprintln!("warning: skipped {skipped} records without a positional mirror");
    }

    let flipped = planner::plan_flip_augment(&positional, &registry)?;
    let summary = format!("generated {} mirrored records", flipped.len());
    let body = with_meta(
        &meta,
        json!({
            "records": flipped,
            "skipped": skipped,
        }),
    );
    let text = json_text(&body);
    emit(args.out.as_deref(), &text, &text, &summary)
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Video annotations (JSON array).
    #[arg(long, value_name = "FILE")]
    pub annotations: PathBuf,

    /// Template registry (JSON).
    #[arg(long, value_name = "FILE")]
    pub templates: PathBuf,

    /// Instrument universe for absent-instrument questions (JSON array);
    /// defaults to the bundled cluster map's instruments.
    #[arg(long, value_name = "FILE")]
    pub instruments: Option<PathBuf>,

    /// Derive silent-instrument counts by subtraction from totals.
    #[arg(long)]
    pub derive_t4: bool,

    /// Seed sampling the absent instruments.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Write the generated records here instead of printing them.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

const GENERATE_USAGE: &str =
    "avqa plan generate --annotations <FILE> --templates <FILE> --seed <N> \
     [--instruments <FILE>] [--derive-t4] [--out <FILE>]";

fn generate(args: &GenerateArgs) -> Result<()> {
    let config = args.config.resolve(args.seed, None, None, args.derive_t4)?;
    let seed = require_seed(&config, GENERATE_USAGE)?;

    let mut meta = OutputMeta::with_seed(seed);
    let registry = load_registry(&args.templates, &config, &mut meta)?;
    let annotations = load_annotations(&args.annotations, &config, &mut meta)?;
    let instruments: Vec<String> = match &args.instruments {
        Some(path) => {
            let text = read_input(path, "instruments", &mut meta)?;
            ingest::parse_vocabulary(&text, &path.display().to_string())?
        }
        None => {
            record_bundled(fixtures::CLUSTERS_JSON, "instruments", &mut meta);
            fixtures::clusters().instruments().map(str::to_owned).collect()
        }
    };

    let mut records = Vec::new();
    for annotation in annotations.values() {
        records.extend(planner::generate_counting_qa(
            annotation,
            &registry,
            config.derive_t4,
        )?);
        records.extend(planner::generate_existential_qa(
            annotation,
            &registry,
            &instruments,
            seed,
        )?);
    }

    let summary = format!(
        "generated {} records from {} annotations",
        records.len(),
        annotations.len()
    );
    let body = with_meta(&meta, json!({ "records": records }));
    let text = json_text(&body);
    emit(args.out.as_deref(), &text, &text, &summary)
}

fn load_annotations(
    path: &Path,
    config: &crate::config::RunConfig,
    meta: &mut OutputMeta,
) -> Result<BTreeMap<String, VideoAnnotation>> {
    let text = read_input(path, "annotations", meta)?;
    let outcome =
        ingest::parse_annotations(&text, &path.display().to_string(), config.mode)?;
    report_warnings(&outcome.warnings);
    Ok(outcome.value)
}
