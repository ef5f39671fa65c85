//! Frame-level scores (L1, MSE, SSIM) and corpus-level evaluation reports.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::SequenceSet;
use crate::engine::{rollout, EngineConfig};
use crate::error::{Error, Result};
use crate::field_math::RealField;

/// Side length of the SSIM window.
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
/// Dynamic range of the intensities.
pub const SSIM_RANGE: f64 = 1.0;

/// Mean absolute difference.
pub fn l1(a: &RealField, b: &RealField) -> Result<f64> {
    a.ensure_same_dims(b.dims())?;
    let total: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum();
    Ok(total / a.len() as f64)
}

/// Mean squared difference.
pub fn mse(a: &RealField, b: &RealField) -> Result<f64> {
    a.ensure_same_dims(b.dims())?;
    let total: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(total / a.len() as f64)
}

/// Normalized 11-tap Gaussian used as the SSIM window profile.
pub fn ssim_window() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as f64;
    let raw: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Valid-mode separable filtering: output is `(h-10) x (w-10)`.
fn filter_valid(x: &[f64], h: usize, w: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        for ox in 0..ow {
            let src = &x[y * w + ox..y * w + ox + k];
            rows[y * ow + ox] = src.iter().zip(taps).map(|(v, t)| v * t).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for oy in 0..oh {
        for ox in 0..ow {
            out[oy * ow + ox] = (0..k).map(|i| taps[i] * rows[(oy + i) * ow + ox]).sum();
        }
    }
    out
}

/// Single-scale SSIM with an 11×11 Gaussian window (σ = 1.5), K1 = 0.01,
/// K2 = 0.03 and L = 1, averaged over all window positions that fit inside
/// the image (no padding).
pub fn ssim(a: &RealField, b: &RealField) -> Result<f64> {
    a.ensure_same_dims(b.dims())?;
    let (h, w) = a.dims();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} input, got {h}x{w}"
        )));
    }
    let taps = ssim_window();
    let (x, y) = (a.data(), b.data());
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();

    let mu_x = filter_valid(x, h, w, &taps);
    let mu_y = filter_valid(y, h, w, &taps);
    let e_xx = filter_valid(&xx, h, w, &taps);
    let e_yy = filter_valid(&yy, h, w, &taps);
    let e_xy = filter_valid(&xy, h, w, &taps);

    let c1 = (SSIM_K1 * SSIM_RANGE).powi(2);
    let c2 = (SSIM_K2 * SSIM_RANGE).powi(2);
    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let var_x = e_xx[i] - mx * mx;
            let var_y = e_yy[i] - my * my;
            let cov = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (var_x + var_y + c2))
        })
        .sum();
    Ok(total / mu_x.len() as f64)
}

/// Scores of one sequence, averaged over its predicted frames.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceScore {
    pub l1: f64,
    pub mse: f64,
    pub ssim: f64,
}

/// Mean and population standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return Stat { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Stat { mean, std: var.sqrt() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub l1: Stat,
    pub mse: Stat,
    pub ssim: Stat,
}

/// Evaluation of a corpus: per-sequence scores plus their aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_sequence: Vec<SequenceScore>,
    pub aggregate: Aggregate,
}

impl EvalReport {
    pub fn from_scores(per_sequence: Vec<SequenceScore>) -> Self {
        let aggregate = Aggregate {
            l1: Stat::of(per_sequence.iter().map(|s| s.l1)),
            mse: Stat::of(per_sequence.iter().map(|s| s.mse)),
            ssim: Stat::of(per_sequence.iter().map(|s| s.ssim)),
        };
        Self {
            per_sequence,
            aggregate,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Plain-text table with one row per labelled report.
    pub fn table(rows: &[(&str, &EvalReport)]) -> String {
        let name_width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<name_width$} | {:>8} | {:>8} | {:>8} | {:>11}",
            "Model", "L1", "MSE", "SSIM", "# of params"
        );
        let _ = writeln!(out, "{}", "-".repeat(name_width + 47));
        for (name, report) in rows {
            let a = &report.aggregate;
            let _ = writeln!(
                out,
                "{:<name_width$} | {:>8.4} | {:>8.4} | {:>8.4} | {:>11}",
                name, a.l1.mean, a.mse.mean, a.ssim.mean, 0
            );
        }
        out
    }
}

/// Score one sequence's predicted frames against its ground-truth frames.
pub fn score_sequence(predictions: &[RealField], truths: &[RealField], horizon: usize) -> Result<SequenceScore> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("evaluation horizon must be >= 1".into()));
    }
    if predictions.len() < horizon || truths.len() < horizon {
        return Err(Error::InvalidArgument(format!(
            "need {horizon} frames, got {} predictions and {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    let mut acc = SequenceScore {
        l1: 0.0,
        mse: 0.0,
        ssim: 0.0,
    };
    for (p, t) in predictions.iter().zip(truths).take(horizon) {
        acc.l1 += l1(p, t)?;
        acc.mse += mse(p, t)?;
        acc.ssim += ssim(p, t)?;
    }
    let n = horizon as f64;
    Ok(SequenceScore {
        l1: acc.l1 / n,
        mse: acc.mse / n,
        ssim: acc.ssim / n,
    })
}

/// Per-frame scores averaged per sequence, then aggregated over sequences.
/// Only the first `horizon` frames of each list are scored.
pub fn evaluate(predictions: &[Vec<RealField>], truths: &[Vec<RealField>], horizon: usize) -> Result<EvalReport> {
    if predictions.len() != truths.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predicted sequences but {} ground-truth sequences",
            predictions.len(),
            truths.len()
        )));
    }
    let scores = predictions
        .par_iter()
        .zip(truths)
        .map(|(p, t)| score_sequence(p, t, horizon))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_scores(scores))
}

/// Roll the engine out on every sequence (`seed_frames` observed,
/// `predict_frames` predicted) and score the predictions. Parallel across
/// sequences; the report does not depend on scheduling.
pub fn evaluate_engine(set: &SequenceSet, cfg: &EngineConfig) -> Result<EvalReport> {
    let (seeds, horizon) = (cfg.seed_frames, cfg.predict_frames);
    let scores = set
        .sequences
        .par_iter()
        .map(|seq| {
            if seq.frames.len() < seeds + horizon {
                return Err(Error::InvalidArgument(format!(
                    "sequence has {} frames, need {seeds} seeds + {horizon} predictions",
                    seq.frames.len()
                )));
            }
            let predicted = rollout(&seq.frames[..seeds], horizon, cfg)?;
            score_sequence(&predicted, &seq.frames[seeds..], horizon)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_scores(scores))
}
