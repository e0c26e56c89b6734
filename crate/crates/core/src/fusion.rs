//! Numerically verified reference math for the fusion dataflow: stable
//! softmax, mutual pixel-wise cross-attention between flattened visual and
//! audio maps, per-pixel normalization + pooling + projection, and
//! question-driven spatial/temporal grounding.
//!
//! Forward computation only, f64 throughout, fixed row-major summation
//! order: identical inputs produce bitwise-identical outputs on one
//! platform. No learned parameters live here; the module exists to verify
//! and document the architecture's contracts.

use thiserror::Error;

/// Default spatial extent of a feature map.
pub const DEFAULT_HEIGHT: usize = 6;
/// Default spatial extent of a feature map.
pub const DEFAULT_WIDTH: usize = 6;
/// Default channel count of a feature map.
pub const DEFAULT_CHANNELS: usize = 512;
/// Size of the answer vocabulary the classifier head maps onto.
pub const ANSWER_VOCABULARY_SIZE: usize = 42;

/// Epsilon inside the per-pixel normalization's square root.
pub const NORM_EPSILON: f64 = 1e-5;

/// Numerical-contract violations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },
    #[error("non-finite value in {context}")]
    NonFinite { context: String },
    #[error("temperature must be finite and positive, got {value}")]
    InvalidTemperature { value: f64 },
}

fn mismatch(context: impl Into<String>) -> FusionError {
    FusionError::ShapeMismatch { context: context.into() }
}

fn check_finite(data: &[f64], context: &str) -> Result<(), FusionError> {
    if data.iter().any(|v| !v.is_finite()) {
        return Err(FusionError::NonFinite { context: context.to_owned() });
    }
    Ok(())
}

/// A dense H x W x C feature map, row-major (h, then w, then c).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Result<Self, FusionError> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(mismatch(format!(
                "feature map dimensions must be positive, got {height}x{width}x{channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(mismatch(format!(
                "feature map {height}x{width}x{channels} needs {} values, got {}",
                height * width * channels,
                data.len()
            )));
        }
        check_finite(&data, "feature map")?;
        Ok(Self { height, width, channels, data })
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    /// Channel slice of the flattened pixel `i` (0 <= i < H*W).
    pub fn pixel(&self, i: usize) -> &[f64] {
        &self.data[i * self.channels..(i + 1) * self.channels]
    }

    /// The same values viewed as an (H*W) x C matrix.
    pub fn flatten(&self) -> FlattenedMap {
        FlattenedMap {
            rows: self.pixels(),
            channels: self.channels,
            data: self.data.clone(),
        }
    }
}

/// An (H*W) x C matrix: a feature map with the spatial dimension
/// flattened.
#[derive(Debug, Clone, PartialEq)]
pub struct FlattenedMap {
    pub rows: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl FlattenedMap {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.channels..(i + 1) * self.channels]
    }
}

/// A dense C-vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub data: Vec<f64>,
}

impl FeatureVector {
    pub fn new(data: Vec<f64>) -> Result<Self, FusionError> {
        if data.is_empty() {
            return Err(mismatch("feature vector must be non-empty"));
        }
        check_finite(&data, "feature vector")?;
        Ok(Self { data })
    }

    pub fn channels(&self) -> usize {
        self.data.len()
    }
}

/// T frames of C channels each, row-major by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl FrameSequence {
    pub fn new(channels: usize, data: Vec<f64>) -> Result<Self, FusionError> {
        if channels == 0 || data.is_empty() || !data.len().is_multiple_of(channels) {
            return Err(mismatch(format!(
                "frame sequence needs a positive multiple of {channels} values, got {}",
                data.len()
            )));
        }
        check_finite(&data, "frame sequence")?;
        Ok(Self { frames: data.len() / channels, channels, data })
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.channels..(t + 1) * self.channels]
    }
}

/// A dense rows x cols projection matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Projection {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, FusionError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(mismatch(format!(
                "projection {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        check_finite(&data, "projection")?;
        Ok(Self { rows, cols, data })
    }

    /// The default 2C -> C combination: [I | I] / 2, i.e. the mean of the
    /// two stacked C-vectors.
    pub fn averaging(channels: usize) -> Self {
        let mut data = vec![0.0; channels * 2 * channels];
        for i in 0..channels {
            data[i * 2 * channels + i] = 0.5;
            data[i * 2 * channels + channels + i] = 0.5;
        }
        Self { rows: channels, cols: 2 * channels, data }
    }

    pub fn apply(&self, vector: &[f64]) -> Result<Vec<f64>, FusionError> {
        if vector.len() != self.cols {
            return Err(mismatch(format!(
                "projection expects {} inputs, got {}",
                self.cols,
                vector.len()
            )));
        }
        let mut out = vec![0.0; self.rows];
        for (r, slot) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = 0.0;
            for (w, x) in row.iter().zip(vector) {
                acc += w * x;
            }
            *slot = acc;
        }
        Ok(out)
    }
}

/// Numerically stable softmax: subtracts the maximum before
/// exponentiating, so large logits cannot overflow. Outputs sum to 1 up to
/// rounding and are strictly positive unless a logit sits so far below the
/// maximum that its exp underflows to zero (the correct limit).
pub fn softmax(values: &[f64]) -> Result<Vec<f64>, FusionError> {
    if values.is_empty() {
        return Err(mismatch("softmax input must be non-empty"));
    }
    check_finite(values, "softmax input")?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Mutual pixel-wise cross-attention between two equally shaped maps with
/// the default temperature H*W. Returns (x_att_vas, x_att_avs):
///
///   x_att_vas = x'_as + rowSoftmax(x'_vs . x'_as^T / (H*W)) . x'_as
///   x_att_avs = x'_vs + rowSoftmax(x'_as . x'_vs^T / (H*W)) . x'_vs
///
/// Row softmax runs over the key axis (the H*W pixels of the other map).
/// Inputs are not modified; swapping the arguments swaps the outputs
/// exactly.
pub fn pixelwise_cross_attention(
    vis: &FeatureMap,
    aud: &FeatureMap,
) -> Result<(FlattenedMap, FlattenedMap), FusionError> {
    let temperature = (vis.height * vis.width) as f64;
    pixelwise_cross_attention_with_temperature(vis, aud, temperature)
}

/// As [`pixelwise_cross_attention`], with an explicit score divisor for
/// experimentation.
pub fn pixelwise_cross_attention_with_temperature(
    vis: &FeatureMap,
    aud: &FeatureMap,
    temperature: f64,
) -> Result<(FlattenedMap, FlattenedMap), FusionError> {
    if (vis.height, vis.width, vis.channels) != (aud.height, aud.width, aud.channels) {
        return Err(mismatch(format!(
            "cross-attention needs equal shapes, got {}x{}x{} vs {}x{}x{}",
            vis.height, vis.width, vis.channels, aud.height, aud.width, aud.channels
        )));
    }
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(FusionError::InvalidTemperature { value: temperature });
    }
    let vas = attend(vis, aud, temperature)?;
    let avs = attend(aud, vis, temperature)?;
    Ok((vas, avs))
}

/// One direction of the mutual attention: queries from `query`, keys and
/// values from `value`, residual on the value map.
fn attend(query: &FeatureMap, value: &FeatureMap, temperature: f64) -> Result<FlattenedMap, FusionError> {
    let pixels = query.pixels();
    let channels = query.channels;
    let mut out = vec![0.0; pixels * channels];
    let mut scores = vec![0.0; pixels];
    for i in 0..pixels {
        let q = query.pixel(i);
        for (j, score) in scores.iter_mut().enumerate() {
            let k = value.pixel(j);
            let mut dot = 0.0;
            for c in 0..channels {
                dot += q[c] * k[c];
            }
            *score = dot / temperature;
        }
        let weights = softmax(&scores)?;
        let row = &mut out[i * channels..(i + 1) * channels];
        row.copy_from_slice(value.pixel(i));
        for (j, w) in weights.iter().enumerate() {
            let v = value.pixel(j);
            for c in 0..channels {
                row[c] += w * v[c];
            }
        }
    }
    Ok(FlattenedMap { rows: pixels, channels, data: out })
}

fn normalize_rows(map: &FlattenedMap) -> Vec<f64> {
    let c = map.channels;
    let mut out = vec![0.0; map.data.len()];
    for i in 0..map.rows {
        let row = map.row(i);
        let mean = row.iter().sum::<f64>() / c as f64;
        let variance = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / c as f64;
        let denom = (variance + NORM_EPSILON).sqrt();
        for (slot, x) in out[i * c..(i + 1) * c].iter_mut().zip(row) {
            *slot = (x - mean) / denom;
        }
    }
    out
}

fn mean_pool(rows: usize, channels: usize, data: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; channels];
    for i in 0..rows {
        for (c, slot) in out.iter_mut().enumerate() {
            *slot += data[i * channels + c];
        }
    }
    for slot in &mut out {
        *slot /= rows as f64;
    }
    out
}

/// Per-pixel channel normalization (zero mean, unit variance over C with
/// epsilon 1e-5) of both attended maps, spatial mean-pooling of each to a
/// C-vector, concatenation (first argument first) to 2C, and projection
/// back down. Constant pixels normalize to zero rather than erroring.
pub fn pool_and_combine(
    vas: &FlattenedMap,
    avs: &FlattenedMap,
    projection: &Projection,
) -> Result<FeatureVector, FusionError> {
    if (vas.rows, vas.channels) != (avs.rows, avs.channels) {
        return Err(mismatch(format!(
            "pooling needs equal shapes, got {}x{} vs {}x{}",
            vas.rows, vas.channels, avs.rows, avs.channels
        )));
    }
    if projection.cols != 2 * vas.channels {
        return Err(mismatch(format!(
            "projection expects {} columns for channel count {}, got {}",
            2 * vas.channels,
            vas.channels,
            projection.cols
        )));
    }
    let pooled_vas = mean_pool(vas.rows, vas.channels, &normalize_rows(vas));
    let pooled_avs = mean_pool(avs.rows, avs.channels, &normalize_rows(avs));
    let mut concat = pooled_vas;
    concat.extend(pooled_avs);
    Ok(FeatureVector { data: projection.apply(&concat)? })
}

/// Attention of a (pooled audio) vector over the visual map's pixels:
/// weights = softmax over H*W of <aud_vec, pixel>/sqrt(C); the output is
/// the weighted sum — a convex combination of visual pixels.
pub fn spatial_grounding(
    aud_vec: &FeatureVector,
    vis: &FeatureMap,
) -> Result<FeatureVector, FusionError> {
    if aud_vec.channels() != vis.channels {
        return Err(mismatch(format!(
            "spatial grounding needs matching channels, got {} vs {}",
            aud_vec.channels(),
            vis.channels
        )));
    }
    let scale = (vis.channels as f64).sqrt();
    let scores: Vec<f64> = (0..vis.pixels())
        .map(|i| {
            let pixel = vis.pixel(i);
            let dot: f64 = aud_vec.data.iter().zip(pixel).map(|(a, v)| a * v).sum();
            dot / scale
        })
        .collect();
    let weights = softmax(&scores)?;
    let mut out = vec![0.0; vis.channels];
    for (i, w) in weights.iter().enumerate() {
        let pixel = vis.pixel(i);
        for c in 0..vis.channels {
            out[c] += w * pixel[c];
        }
    }
    Ok(FeatureVector { data: out })
}

/// Single-head reference attention of the question vector over frames:
/// weights = softmax over T of <question, frame>/sqrt(C); output is the
/// weighted frame sum.
pub fn temporal_grounding(
    question: &FeatureVector,
    frames: &FrameSequence,
) -> Result<FeatureVector, FusionError> {
    if question.channels() != frames.channels {
        return Err(mismatch(format!(
            "temporal grounding needs matching channels, got {} vs {}",
            question.channels(),
            frames.channels
        )));
    }
    let scale = (frames.channels as f64).sqrt();
    let scores: Vec<f64> = (0..frames.frames)
        .map(|t| {
            let frame = frames.frame(t);
            let dot: f64 = question.data.iter().zip(frame).map(|(q, v)| q * v).sum();
            dot / scale
        })
        .collect();
    let weights = softmax(&scores)?;
    let mut out = vec![0.0; frames.channels];
    for (t, w) in weights.iter().enumerate() {
        let frame = frames.frame(t);
        for c in 0..frames.channels {
            out[c] += w * frame[c];
        }
    }
    Ok(FeatureVector { data: out })
}
