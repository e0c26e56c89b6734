//! One module per subcommand.

pub mod audit;
pub mod compare;
pub mod contrast;
pub mod fusion_check;
pub mod plan;
pub mod score;
pub mod split;

use crate::config::RunConfig;
use crate::emit::{read_input, report_warnings};
use anyhow::Result;
use avqa_core::ingest;
use avqa_core::meta::OutputMeta;
use avqa_core::model::{QaRecord, TemplateRegistry};
use std::path::Path;

/// Output format for table reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Loads the template registry, recording its digest.
pub fn load_registry(
    path: &Path,
    config: &RunConfig,
    meta: &mut OutputMeta,
) -> Result<TemplateRegistry> {
    let text = read_input(path, "templates", meta)?;
    let outcome = ingest::parse_templates(&text, &path.display().to_string(), config.mode)?;
    report_warnings(&outcome.warnings);
    Ok(outcome.value)
}

/// Loads QA records against a registry, recording the digest under `label`.
pub fn load_qa(
    path: &Path,
    label: &str,
    registry: &TemplateRegistry,
    config: &RunConfig,
    meta: &mut OutputMeta,
) -> Result<Vec<QaRecord>> {
    let text = read_input(path, label, meta)?;
    let outcome = ingest::parse_qa(&text, &path.display().to_string(), registry, config.mode)?;
    report_warnings(&outcome.warnings);
    Ok(outcome.value)
}
