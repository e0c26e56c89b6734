//! Output provenance and emission helpers.
//!
//! Every report embeds the toolkit version, the seed (when the producing
//! command is randomized), and SHA-256 digests of its inputs, so a report
//! can always be traced back to exact input bytes. Nothing time-dependent
//! is recorded: rerunning a command on identical inputs must produce
//! byte-identical output files.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// Toolkit version stamped into every output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Provenance block embedded in machine-readable outputs: as a `meta`
/// object in JSON files and as leading `#` comment lines in CSV files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct OutputMeta {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Input label (e.g. "qa", "templates") -> "sha256:<hex>".
    pub inputs: BTreeMap<String, String>,
}

impl OutputMeta {
    pub fn new() -> Self {
        OutputMeta {
            version: VERSION.to_owned(),
            seed: None,
            inputs: BTreeMap::new(),
        }
    }

    pub fn with_seed(seed: u64) -> Self {
        let mut meta = Self::new();
        meta.seed = Some(seed);
        meta
    }

    /// Records the digest of one input file's bytes under `label`.
    pub fn record_input(&mut self, label: &str, bytes: &[u8]) {
        self.inputs
            .insert(label.to_owned(), format!("sha256:{}", sha256_hex(bytes)));
    }

    /// The `#`-prefixed comment block placed above CSV headers.
    pub fn csv_comment_block(&self) -> String {
        let mut out = format!("# version: {}\n", self.version);
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed: {seed}\n"));
        }
        for (label, digest) in &self.inputs {
            out.push_str(&format!("# input {label}: {digest}\n"));
        }
        out
    }
}

/// Escapes one CSV field: fields containing commas, quotes, or newlines are
/// quoted with embedded quotes doubled; everything else passes through.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Renders a half-up-rounded percentage with two decimals (e.g. `57.14`)
/// from an exact correct/total pair.
pub fn percent_2dp(correct: u64, total: u64) -> String {
    assert!(total > 0, "percentage of an empty cell");
    // Percent in hundredths, rounded half-up: correct/total*10000.
    let scaled = (2 * (correct as u128) * 10_000 + total as u128) / (2 * total as u128);
    format!("{}.{:02}", scaled / 100, scaled % 100)
}
