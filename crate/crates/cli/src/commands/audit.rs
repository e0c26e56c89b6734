//! `avqa audit`: per-template answer-distribution bias report.

use super::{load_qa, load_registry, Format};
use crate::config::ConfigArgs;
use crate::emit::{emit, json_text, with_meta};
use anyhow::Result;
use avqa_core::audit;
use avqa_core::meta::OutputMeta;
use clap::Args;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// QA records to audit (JSON).
    #[arg(long, value_name = "FILE")]
    pub qa: PathBuf,

    /// Template registry (JSON).
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

pub fn run(args: &AuditArgs) -> Result<()> {
    let config = args.config.resolve(None, None, None, false)?;
    let mut meta = OutputMeta::new();
    let registry = load_registry(&args.templates, &config, &mut meta)?;
    let records = load_qa(&args.qa, "qa", &registry, &config, &mut meta)?;

    let report = audit::audit(&records, &registry, &config.thresholds)?;
    let summary = format!(
        "flagged {} of {} templates across {} records",
        report.flagged_count(),
        report.entries.len(),
        report.total_records
    );

    let (file_contents, stdout_contents) = match args.format {
        Format::Csv => {
            let table = audit::audit_csv(&report, &registry);
            (format!("{}{}", meta.csv_comment_block(), table), table)
        }
        Format::Json => {
            let body = with_meta(&meta, audit::audit_json(&report, &registry));
            let text = json_text(&body);
            (text.clone(), text)
        }
    };
    emit(args.out.as_deref(), &file_contents, &stdout_contents, &summary)
}
