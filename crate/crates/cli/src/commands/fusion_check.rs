//! `avqa fusion-check`: runs the cross-attention reference math on a
//! feature-map pair and verifies its structural invariants, printing one
//! PASS/FAIL line per check.

use crate::config::{ConfigArgs, RunConfig};
use crate::emit::{emit, json_text, read_input, with_meta};
use anyhow::{anyhow, bail, Context, Result};
use avqa_core::fusion::{
    pixelwise_cross_attention, pool_and_combine, spatial_grounding, FeatureMap, FeatureVector,
    FlattenedMap, Projection, DEFAULT_CHANNELS, DEFAULT_HEIGHT, DEFAULT_WIDTH,
};
use avqa_core::meta::OutputMeta;
use avqa_core::seed;
use clap::Args;
use rand::Rng;
use serde::Deserialize;
use serde_json::json;
use std::path::PathBuf;

const USAGE: &str = "avqa fusion-check (--input <FILE> | --seed <N> [--height <N>] \
                     [--width <N>] [--channels <N>]) [--out <FILE>]";

/// Relative tolerance for the numeric invariants.
const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Args)]
pub struct FusionCheckArgs {
    /// Feature-map pair `{height, width, channels, visual: [..], audio: [..]}`
    /// (row-major floats). When absent, maps are generated from --seed.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Seed for generated feature maps (ignored with --input).
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Generated map height.
    #[arg(long, value_name = "N")]
    pub height: Option<usize>,

    /// Generated map width.
    #[arg(long, value_name = "N")]
    pub width: Option<usize>,

    /// Generated map channel count.
    #[arg(long, value_name = "N")]
    pub channels: Option<usize>,

    /// Write the check report here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FusionInput {
    height: usize,
    width: usize,
    channels: usize,
    visual: Vec<f64>,
    audio: Vec<f64>,
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn run(args: &FusionCheckArgs) -> Result<()> {
    let config = args.config.resolve(args.seed, None, None, false)?;
    let mut meta = OutputMeta::new();

    let (vis, aud, source) = load_maps(args, &config, &mut meta)?;
    if let Some(seed) = config.seed.filter(|_| args.input.is_none()) {
        meta.seed = Some(seed);
    }

    let checks = run_checks(&vis, &aud)?;
    for check in &checks {
        let verdict = if check.pass { "PASS" } else { "FAIL" };
        crate::emit::print_line(&format!("check {}: {verdict} ({})", check.name, check.detail));
    }

    let all_passed = checks.iter().all(|c| c.pass);
    let body = with_meta(
        &meta,
        json!({
            "input": {
                "height": vis.height,
                "width": vis.width,
                "channels": vis.channels,
                "source": source,
            },
            "checks": checks
                .iter()
                .map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail}))
                .collect::<Vec<_>>(),
            "all_passed": all_passed,
        }),
    );
    if let Some(path) = &args.out {
        emit(Some(path), &json_text(&body), "", "")?;
    }
    if !all_passed {
        let failed: Vec<&str> =
            checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        bail!("fusion-check failed: {}", failed.join(", "));
    }
    Ok(())
}

fn load_maps(
    args: &FusionCheckArgs,
    config: &RunConfig,
    meta: &mut OutputMeta,
) -> Result<(FeatureMap, FeatureMap, &'static str)> {
    if let Some(path) = &args.input {
        let text = read_input(path, "features", meta)?;
        let input: FusionInput = serde_json::from_str(&text)
            .with_context(|| format!("failed to parse {}", path.display()))?;
        let vis = FeatureMap::new(input.height, input.width, input.channels, input.visual)?;
        let aud = FeatureMap::new(input.height, input.width, input.channels, input.audio)?;
        return Ok((vis, aud, "file"));
    }

    let seed = config.seed.ok_or_else(|| {
        anyhow!("pass --input <FILE>, or --seed <N> to generate feature maps\nusage: {USAGE}")
    })?;
    let height = args.height.unwrap_or(DEFAULT_HEIGHT);
    let width = args.width.unwrap_or(DEFAULT_WIDTH);
    let channels = args.channels.unwrap_or(DEFAULT_CHANNELS);
    let generate = |purpose: &str| -> Result<FeatureMap> {
        let mut rng = seed::rng(seed, purpose);
        let data: Vec<f64> = (0..height * width * channels)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Ok(FeatureMap::new(height, width, channels, data)?)
    };
    Ok((
        generate("fusion-check/visual")?,
        generate("fusion-check/audio")?,
        "seeded",
    ))
}

fn run_checks(vis: &FeatureMap, aud: &FeatureMap) -> Result<Vec<Check>> {
    let (vas, avs) = pixelwise_cross_attention(vis, aud)?;
    let mut checks = Vec::new();

    let finite = vas.data.iter().chain(&avs.data).all(|v| v.is_finite());
    checks.push(Check {
        name: "finite-outputs",
        pass: finite,
        detail: format!("{} attended values", vas.data.len() + avs.data.len()),
    });

    // Swapping the argument order must swap the two outputs exactly.
    let (avs_swapped, vas_swapped) = pixelwise_cross_attention(aud, vis)?;
    let symmetric = vas.data == vas_swapped.data && avs.data == avs_swapped.data;
    checks.push(Check {
        name: "swap-symmetry",
        pass: symmetric,
        detail: if symmetric { "bitwise equal".to_owned() } else { "outputs differ".to_owned() },
    });

    // Each attended row minus its residual is a convex combination of the
    // value rows, so it stays inside their per-channel hull.
    let hull_vas = hull_violation(&vas, aud);
    let hull_avs = hull_violation(&avs, vis);
    let violation = hull_vas.max(hull_avs);
    checks.push(Check {
        name: "residual-hull",
        pass: violation <= TOLERANCE,
        detail: format!("max violation {violation:.3e}"),
    });

    // Reordering pixels jointly must not change the pooled fusion vector.
    let projection = Projection::averaging(vis.channels);
    let pooled = pool_and_combine(&vas, &avs, &projection)?;
    let (pvas, pavs) = pixelwise_cross_attention(&reversed(vis), &reversed(aud))?;
    let permuted = pool_and_combine(&pvas, &pavs, &projection)?;
    let drift = pooled
        .data
        .iter()
        .zip(&permuted.data)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    checks.push(Check {
        name: "pooled-permutation",
        pass: drift <= TOLERANCE,
        detail: format!("max drift {drift:.3e}"),
    });

    // Grounding is a convex combination of the visual pixels.
    let probe = FeatureVector::new(aud.pixel(0).to_vec())?;
    let grounded = spatial_grounding(&probe, vis)?;
    let flat_vis = vis.flatten();
    let grounding_violation = hull_violation_rows(&grounded.data, &flat_vis, 0.0);
    checks.push(Check {
        name: "grounding-hull",
        pass: grounding_violation <= TOLERANCE,
        detail: format!("max violation {grounding_violation:.3e}"),
    });

    Ok(checks)
}

/// Largest amount by which `attended - value` leaves the per-channel hull
/// of `value`'s pixel rows, scaled by the hull's magnitude.
fn hull_violation(attended: &FlattenedMap, value: &FeatureMap) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..value.channels {
        let column: Vec<f64> = (0..value.pixels()).map(|j| value.pixel(j)[c]).collect();
        let min = column.iter().copied().fold(f64::INFINITY, f64::min);
        let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = min.abs().max(max.abs()).max(1.0);
        for i in 0..attended.rows {
            let term = attended.row(i)[c] - value.pixel(i)[c];
            let excess = (min - term).max(term - max).max(0.0);
            worst = worst.max(excess / scale);
        }
    }
    worst
}

/// Hull check for a single vector against a value matrix's rows; `shift` is
/// subtracted from the vector first (0 for plain convex combinations).
fn hull_violation_rows(vector: &[f64], value: &FlattenedMap, shift: f64) -> f64 {
    let mut worst = 0.0f64;
    for (c, &v) in vector.iter().enumerate() {
        let column: Vec<f64> = (0..value.rows).map(|j| value.row(j)[c]).collect();
        let min = column.iter().copied().fold(f64::INFINITY, f64::min);
        let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = min.abs().max(max.abs()).max(1.0);
        let term = v - shift;
        let excess = (min - term).max(term - max).max(0.0);
        worst = worst.max(excess / scale);
    }
    worst
}

/// The same map with its pixel rows in reverse order.
fn reversed(map: &FeatureMap) -> FeatureMap {
    let mut data = Vec::with_capacity(map.data.len());
    for i in (0..map.pixels()).rev() {
        data.extend_from_slice(map.pixel(i));
    }
    FeatureMap::new(map.height, map.width, map.channels, data)
        .expect("reversal preserves the shape")
}
