//! `avqa compare`: before/after dominant-share deltas for one registry.

use super::{load_qa, load_registry, Format};
use crate::config::ConfigArgs;
use crate::emit::{emit, json_text, with_meta};
use anyhow::Result;
use avqa_core::audit;
use avqa_core::meta::OutputMeta;
use clap::Args;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// QA records before the change (JSON).
    #[arg(long, value_name = "FILE")]
    pub before: PathBuf,

    /// QA records after the change (JSON).
    #[arg(long, value_name = "FILE")]
    pub after: PathBuf,

    /// Template registry shared by both corpora (JSON).
    #[arg(long, value_name = "FILE")]
    pub templates: PathBuf,

    /// Report format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,

    /// Write the report here instead of printing it.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run(args: &CompareArgs) -> Result<()> {
    let config = args.config.resolve(None, None, None, false)?;
    let mut meta = OutputMeta::new();
    let registry = load_registry(&args.templates, &config, &mut meta)?;
    let before_records = load_qa(&args.before, "before", &registry, &config, &mut meta)?;
    let after_records = load_qa(&args.after, "after", &registry, &config, &mut meta)?;

    let before = audit::audit(&before_records, &registry, &config.thresholds)?;
    let after = audit::audit(&after_records, &registry, &config.thresholds)?;
    let report = audit::compare(&before, &after)?;

    let resolved = report
        .entries
        .iter()
        .filter(|e| e.biased_before && !e.biased_after)
        .count();
    let summary = format!(
        "{} of {} templates were biased before; {} of those are balanced after",
        before.flagged_count(),
        report.entries.len(),
        resolved
    );

    let (file_contents, stdout_contents) = match args.format {
        Format::Csv => {
            let table = audit::compare_csv(&report);
            (format!("{}{}", meta.csv_comment_block(), table), table)
        }
        Format::Json => {
            let body = with_meta(&meta, audit::compare_json(&report));
            let text = json_text(&body);
            (text.clone(), text)
        }
    };
    emit(args.out.as_deref(), &file_contents, &stdout_contents, &summary)
}
