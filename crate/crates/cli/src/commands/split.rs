//! `avqa split`: the composed five-way deterministic split.

use super::{load_qa, load_registry};
use crate::config::{require_seed, ConfigArgs};
use crate::emit::{emit, json_text, read_input, report_warnings, with_meta};
use anyhow::Result;
use avqa_core::ingest;
use avqa_core::meta::OutputMeta;
use avqa_core::split::full_split;
use clap::Args;
use std::path::PathBuf;

const USAGE: &str = "avqa split --qa <FILE> --templates <FILE> --reference <FILE> --seed <N> \
                     [--test-fraction <F>] [--val-fraction <F>] [--out <FILE>]";

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// QA records to partition (JSON).
    #[arg(long, value_name = "FILE")]
    pub qa: PathBuf,

    /// Template registry (JSON).
    #[arg(long, value_name = "FILE")]
    pub templates: PathBuf,

    /// Reference answer histograms `{template_id: {answer: count}}` that the
    /// bias subsets mirror.
    #[arg(long, value_name = "FILE")]
    pub reference: PathBuf,

    /// Seed driving every sampling step.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Balanced-test fraction (default 0.2).
    #[arg(long, value_name = "FRACTION")]
    pub test_fraction: Option<String>,

    /// Validation fraction of the biased training pool (default 0.125).
    #[arg(long, value_name = "FRACTION")]
    pub val_fraction: Option<String>,

    /// Write the manifest here instead of printing it.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run(args: &SplitArgs) -> Result<()> {
    let config = args.config.resolve(
        args.seed,
        args.test_fraction.as_deref(),
        args.val_fraction.as_deref(),
        false,
    )?;
    let seed = require_seed(&config, USAGE)?;

    let mut meta = OutputMeta::with_seed(seed);
    let registry = load_registry(&args.templates, &config, &mut meta)?;
    let records = load_qa(&args.qa, "qa", &registry, &config, &mut meta)?;
    let reference_text = read_input(&args.reference, "reference", &mut meta)?;
    let spec =
        ingest::parse_bias_spec(&reference_text, &args.reference.display().to_string())?;

    let split = full_split(
        &records,
        &spec,
        config.test_fraction_thousandths,
        config.val_fraction_thousandths,
        seed,
    )?;
    report_warnings(&split.test_bias.warnings);
    report_warnings(&split.train_bias.warnings);

    let mut summary = String::from("partition sizes:");
    for (partition, size) in split.manifest.partition_sizes() {
        summary.push_str(&format!("\n  {partition}: {size}"));
    }

    let body = with_meta(
        &meta,
        serde_json::to_value(&split).expect("split manifest serializes"),
    );
    let text = json_text(&body);
    emit(args.out.as_deref(), &text, &text, &summary)
}
