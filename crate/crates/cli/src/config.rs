//! Run configuration with layered precedence: command-line flags override
//! the `--config` JSON file, which overrides built-in defaults. There is no
//! environment-variable configuration: a command line plus its input files
//! must fully determine every output byte.

use anyhow::{anyhow, bail, Context, Result};
use avqa_core::audit::Thresholds;
use avqa_core::ingest::Mode;
use avqa_core::share::parse_thousandths;
use clap::{Args, ValueEnum};
use serde::Deserialize;
use std::path::PathBuf;

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub thresholds: Thresholds,
    /// Balanced-test sampling fraction, in thousandths (default 200 = 0.2).
    pub test_fraction_thousandths: u32,
    /// Validation reserve fraction, in thousandths (default 125 = 0.125).
    pub val_fraction_thousandths: u32,
    /// Whether silent-instrument counts may be derived by subtraction.
    pub derive_t4: bool,
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Strict,
            thresholds: Thresholds::default(),
            test_fraction_thousandths: 200,
            val_fraction_thousandths: 125,
            derive_t4: false,
            seed: None,
        }
    }
}

/// Validation mode flag values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Reject the whole input on the first invalid record.
    Strict,
    /// Skip invalid records with a warning on stderr.
    Lenient,
}

impl From<ModeArg> for Mode {
    fn from(arg: ModeArg) -> Mode {
        match arg {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Lenient => Mode::Lenient,
        }
    }
}

/// The `--config` file contents. Fractions and thresholds are decimal
/// strings (e.g. `"0.125"`) so they resolve to exact thousandths.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    mode: Option<String>,
    binary_threshold: Option<String>,
    multi_threshold: Option<String>,
    test_fraction: Option<String>,
    val_fraction: Option<String>,
    derive_t4: Option<bool>,
}

/// Flags shared by every subcommand that reads tunable settings.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON settings file; explicit flags take precedence over its values.
    #[arg(long, value_name = "FILE", global = false)]
    pub config: Option<PathBuf>,

    /// How invalid input records are handled.
    #[arg(long, value_enum, value_name = "MODE")]
    pub mode: Option<ModeArg>,

    /// Dominant-share bias threshold for two-answer templates (e.g. 0.6).
    #[arg(long, value_name = "FRACTION")]
    pub binary_threshold: Option<String>,

    /// Dominant-share bias threshold for multi-answer templates (e.g. 0.5).
    #[arg(long, value_name = "FRACTION")]
    pub multi_threshold: Option<String>,
}

impl ConfigArgs {
    /// Resolves defaults, then the config file, then flags. `seed_flag`,
    /// `fractions`, and `derive_t4_flag` come from the commands that define
    /// those flags; commands without them pass `None`/`false`.
    pub fn resolve(
        &self,
        seed_flag: Option<u64>,
        test_fraction_flag: Option<&str>,
        val_fraction_flag: Option<&str>,
        derive_t4_flag: bool,
    ) -> Result<RunConfig> {
        let mut resolved = RunConfig::default();

        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("failed to read config {}", path.display()))?;
            let file: FileConfig = serde_json::from_str(&text)
                .with_context(|| format!("failed to parse config {}", path.display()))?;
            if let Some(seed) = file.seed {
                resolved.seed = Some(seed);
            }
            if let Some(mode) = &file.mode {
                resolved.mode = match mode.as_str() {
                    "strict" => Mode::Strict,
                    "lenient" => Mode::Lenient,
                    other => bail!("config mode must be \"strict\" or \"lenient\", got {other:?}"),
                };
            }
            if let Some(s) = &file.binary_threshold {
                resolved.thresholds.binary_thousandths = fraction(s, "binary_threshold")?;
            }
            if let Some(s) = &file.multi_threshold {
                resolved.thresholds.multi_thousandths = fraction(s, "multi_threshold")?;
            }
            if let Some(s) = &file.test_fraction {
                resolved.test_fraction_thousandths = fraction(s, "test_fraction")?;
            }
            if let Some(s) = &file.val_fraction {
                resolved.val_fraction_thousandths = fraction(s, "val_fraction")?;
            }
            if let Some(flag) = file.derive_t4 {
                resolved.derive_t4 = flag;
            }
        }

        if let Some(mode) = self.mode {
            resolved.mode = mode.into();
        }
        if let Some(s) = &self.binary_threshold {
            resolved.thresholds.binary_thousandths = fraction(s, "--binary-threshold")?;
        }
        if let Some(s) = &self.multi_threshold {
            resolved.thresholds.multi_thousandths = fraction(s, "--multi-threshold")?;
        }
        if let Some(s) = test_fraction_flag {
            resolved.test_fraction_thousandths = fraction(s, "--test-fraction")?;
        }
        if let Some(s) = val_fraction_flag {
            resolved.val_fraction_thousandths = fraction(s, "--val-fraction")?;
        }
        if derive_t4_flag {
            resolved.derive_t4 = true;
        }
        if let Some(seed) = seed_flag {
            resolved.seed = Some(seed);
        }
        Ok(resolved)
    }
}

/// Parses a decimal fraction setting into exact thousandths in (0, 1).
pub fn fraction(s: &str, what: &str) -> Result<u32> {
    parse_thousandths(s, true).map_err(|msg| anyhow!("{what}: {msg}"))
}

/// The resolved seed of a randomized command, or a usage error.
pub fn require_seed(config: &RunConfig, usage: &str) -> Result<u64> {
    config.seed.ok_or_else(|| {
        anyhow!("this command is randomized and needs a seed: pass --seed <N> or set \"seed\" in the --config file\nusage: {usage}")
    })
}
