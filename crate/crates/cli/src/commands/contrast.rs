//! `avqa contrast`: contrasting binary-pair mining and pairwise scoring.

use super::{load_qa, load_registry};
use crate::config::ConfigArgs;
use crate::emit::{emit, json_text, read_input, report_warnings, with_meta};
use anyhow::Result;
use avqa_core::eval;
use avqa_core::ingest;
use avqa_core::meta::{percent_2dp, OutputMeta};
use clap::Args;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct ContrastArgs {
    /// QA records to mine for pairs (JSON).
    #[arg(long, value_name = "FILE")]
    pub qa: PathBuf,

    /// Template registry (JSON).
    #[arg(long, value_name = "FILE")]
    pub templates: PathBuf,

    /// Predictions to score pairwise (both members must be correct).
    #[arg(long, value_name = "FILE")]
    pub pred: Option<PathBuf>,

    /// Write the pair list here instead of printing it.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run(args: &ContrastArgs) -> Result<()> {
    let config = args.config.resolve(None, None, None, false)?;
    let mut meta = OutputMeta::new();
    let registry = load_registry(&args.templates, &config, &mut meta)?;
    let records = load_qa(&args.qa, "qa", &registry, &config, &mut meta)?;

    let (pairs, notices) = eval::mine_contrast_pairs(&records, &registry)?;
    report_warnings(&notices);
    let mut summary = format!("mined {} contrasting pairs", pairs.len());

    let mut body = json!({
        "pairs": pairs,
        "notices": notices,
    });

    if let Some(pred_path) = &args.pred {
        let text = read_input(pred_path, "predictions", &mut meta)?;
        let outcome =
            ingest::parse_predictions(&text, &pred_path.display().to_string(), config.mode)?;
        report_warnings(&outcome.warnings);
        let predictions = outcome.value;

        let paired =
            eval::paired_accuracy(&pairs, &records, &predictions.predictions, config.mode)?;
        let percent = percent_2dp(paired.correct_pairs, paired.total_pairs);
        summary.push_str(&format!(
            "\n{}: {}/{} pairs fully correct ({percent}%)",
            predictions.model_name, paired.correct_pairs, paired.total_pairs
        ));
        body.as_object_mut().expect("object body").insert(
            "paired_accuracy".to_owned(),
            json!({
                "model_name": predictions.model_name,
                "correct_pairs": paired.correct_pairs,
                "total_pairs": paired.total_pairs,
                "percent": percent,
            }),
        );
    }

    let text = json_text(&with_meta(&meta, body));
    emit(args.out.as_deref(), &text, &text, &summary)
}
