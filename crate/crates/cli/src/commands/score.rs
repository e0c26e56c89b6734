//! `avqa score`: the ten-column per-category accuracy table.

use super::{load_qa, load_registry, Format};
use crate::config::ConfigArgs;
use crate::emit::{emit, json_text, read_input, report_warnings, with_meta};
use anyhow::Result;
use avqa_core::eval;
use avqa_core::ingest;
use avqa_core::meta::OutputMeta;
use clap::Args;
use std::collections::BTreeSet;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Ground-truth QA records (JSON).
    #[arg(long, value_name = "FILE")]
    pub qa: PathBuf,

    /// Model predictions `{model_name, predictions: {qa_id: answer}}`.
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,

    /// Template registry (JSON).
    #[arg(long, value_name = "FILE")]
    pub templates: PathBuf,

    /// Answer vocabulary (JSON array); predictions outside it are flagged.
    #[arg(long, value_name = "FILE")]
    pub vocabulary: Option<PathBuf>,

    /// Report format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,

    /// Write the report here instead of printing it.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run(args: &ScoreArgs) -> Result<()> {
    let config = args.config.resolve(None, None, None, false)?;
    let mut meta = OutputMeta::new();
    let registry = load_registry(&args.templates, &config, &mut meta)?;
    let records = load_qa(&args.qa, "qa", &registry, &config, &mut meta)?;

    let pred_text = read_input(&args.pred, "predictions", &mut meta)?;
    let outcome =
        ingest::parse_predictions(&pred_text, &args.pred.display().to_string(), config.mode)?;
    report_warnings(&outcome.warnings);
    let predictions = outcome.value;

    let vocabulary: Option<BTreeSet<String>> = match &args.vocabulary {
        Some(path) => {
            let text = read_input(path, "vocabulary", &mut meta)?;
            let words = ingest::parse_vocabulary(&text, &path.display().to_string())?;
            Some(words.into_iter().collect())
        }
        None => None,
    };

    let table = eval::accuracy_by_category(
        &records,
        &predictions.predictions,
        &registry,
        vocabulary.as_ref(),
        config.mode,
    )?;
    report_warnings(&table.warnings);

    let summary = format!(
        "{}: {}/{} correct",
        predictions.model_name, table.total_correct, table.total_scored
    );

    let (file_contents, stdout_contents) = match args.format {
        Format::Csv => {
            let csv = eval::table_csv(&table);
            (format!("{}{}", meta.csv_comment_block(), csv), csv)
        }
        Format::Json => {
            let mut body = eval::table_json(&table);
            body.as_object_mut()
                .expect("table report is an object")
                .insert(
                    "model_name".to_owned(),
                    serde_json::Value::String(predictions.model_name.clone()),
                );
            let text = json_text(&with_meta(&meta, body));
            (text.clone(), text)
        }
    };
    emit(args.out.as_deref(), &file_contents, &stdout_contents, &summary)
}
