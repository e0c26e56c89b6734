//! Input reading with digest capture and output emission.
//!
//! Reports go to `--out` when given (machine artifact, provenance embedded)
//! and to stdout otherwise (human table, no provenance comments). Warnings
//! always go to stderr so they never disturb output bytes.

use anyhow::{Context, Result};
use avqa_core::meta::OutputMeta;
use std::io::Write;
use std::path::Path;

/// Writes to stdout, exiting quietly when the reader has gone away (e.g.
/// the output is piped into `head`) instead of panicking.
pub fn print_out(text: &str) {
    let mut stdout = std::io::stdout().lock();
    if let Err(error) = stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        if error.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("failed to write to stdout: {error}");
    }
}

/// `print_out` with a trailing newline.
pub fn print_line(text: &str) {
    print_out(text);
    print_out("\n");
}

/// Reads one input file, recording its digest under `label`.
pub fn read_input(path: &Path, label: &str, meta: &mut OutputMeta) -> Result<String> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("failed to read {}", path.display()))?;
    meta.record_input(label, text.as_bytes());
    Ok(text)
}

/// Records bundled (compiled-in) data as an input digest.
pub fn record_bundled(text: &str, label: &str, meta: &mut OutputMeta) {
    meta.record_input(label, text.as_bytes());
}

/// Writes `file_contents` to `out` and prints `summary` lines, or prints
/// `stdout_contents` when no output path was given.
pub fn emit(
    out: Option<&Path>,
    file_contents: &str,
    stdout_contents: &str,
    summary: &str,
) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, file_contents)
                .with_context(|| format!("failed to write {}", path.display()))?;
            if !summary.is_empty() {
                print_line(summary);
            }
            print_line(&format!("wrote {}", path.display()));
        }
        None => {
            print_out(stdout_contents);
            if !summary.is_empty() {
                print_line(summary);
            }
        }
    }
    Ok(())
}

/// A pretty-printed JSON document with a trailing newline.
pub fn json_text(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report values serialize");
    text.push('\n');
    text
}

/// Prepends the provenance object to a JSON report body.
pub fn with_meta(meta: &OutputMeta, body: serde_json::Value) -> serde_json::Value {
    let mut object = serde_json::Map::new();
    object.insert(
        "meta".to_owned(),
        serde_json::to_value(meta).expect("meta serializes"),
    );
    match body {
        serde_json::Value::Object(fields) => object.extend(fields),
        other => {
            object.insert("report".to_owned(), other);
        }
    }
    serde_json::Value::Object(object)
}

/// Prints lenient-mode (or other) warnings to stderr.
pub fn report_warnings(warnings: &[String]) {
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
}
