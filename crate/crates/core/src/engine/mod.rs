//! The prediction–correction cycle.
//!
//! State is a foreground canvas, a static background, an occlusion mask and a
//! per-frequency motion field `t`. Each step moves fg and alpha by `t`,
//! composites a predicted frame, nudges all three images down the gradient of
//! the squared prediction error, then re-measures `t` from the phase change of
//! the corrected fg and alpha.

mod config;

use num_complex::Complex64;

pub use config::{BetaSchedule, EngineConfig};

use crate::error::{Error, Result};
use crate::field_math::{
    fft2, ifft2_complex, phase_delta, phase_shift, unit_renormalize, ComplexField, RealField,
    ValidityMask, UNIT_TOL,
};
use crate::filters::{box_blur, dog_filter, phase_smooth};
use crate::metrics::mse;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub fg: RealField,
    pub bg: RealField,
    pub alpha: RealField,
    /// Unit-magnitude motion field, one phasor per DFT bin.
    pub t: ComplexField,
    pub prev_fg_spec: ComplexField,
    pub prev_alpha_spec: ComplexField,
    pub step_index: usize,
}

impl ModelState {
    pub fn dims(&self) -> (usize, usize) {
        self.fg.dims()
    }

    /// Shared dims, images in `[0, 1]`, and `|t| = 1` within [`UNIT_TOL`].
    pub fn check_invariants(&self) -> Result<()> {
        let dims = self.dims();
        self.bg.ensure_same_dims(dims)?;
        self.alpha.ensure_same_dims(dims)?;
        self.t.ensure_same_dims(dims)?;
        self.prev_fg_spec.ensure_same_dims(dims)?;
        self.prev_alpha_spec.ensure_same_dims(dims)?;
        for (name, f) in [("fg", &self.fg), ("bg", &self.bg), ("alpha", &self.alpha)] {
            if !f.within(0.0, 1.0) {
                return Err(Error::NumericalConsistency(format!(
                    "{name} left [0, 1] at step {} (range {}..{})",
                    self.step_index,
                    f.min(),
                    f.max()
                )));
            }
        }
        let deviation = self.t.max_unit_deviation();
        if deviation > UNIT_TOL {
            return Err(Error::NumericalConsistency(format!(
                "motion field not unit-magnitude at step {} (deviation {deviation:.3e})",
                self.step_index
            )));
        }
        Ok(())
    }
}

/// Whether a step consumed an observation or ran on the state alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepPhase {
    Seed,
    ClosedLoop,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub phase: StepPhase,
    pub predicted_frame: RealField,
    /// MSE against the observed frame; `None` in closed loop.
    pub loss_mse: Option<f64>,
    pub state_snapshot: ModelState,
}

/// `alpha·fg + (1 − alpha)·bg`.
pub fn composite(fg: &RealField, bg: &RealField, alpha: &RealField) -> Result<RealField> {
    fg.ensure_same_dims(bg.dims())?;
    fg.ensure_same_dims(alpha.dims())?;
    let data = fg
        .data()
        .iter()
        .zip(bg.data())
        .zip(alpha.data())
        .map(|((f, b), a)| a * f + (1.0 - a) * b)
        .collect();
    RealField::new(fg.height(), fg.width(), data)
}

/// Initial state from the first two frames.
///
/// The mask is the box-blurred absolute frame difference scaled to peak 1;
/// the background is the first frame and the motion field starts at identity.
pub fn init_state(f0: &RealField, f1: &RealField, cfg: &EngineConfig) -> Result<ModelState> {
    let diff = f1.zip_map(f0, |a, b| (a - b).abs())?;
    let spread = if cfg.init_blur_radius > 0 {
        box_blur(&diff, cfg.init_blur_radius)
    } else {
        diff
    };
    let peak = spread.max();
    let alpha = if peak > 0.0 {
        spread.map(|v| (v / peak).clamp(0.0, 1.0))
    } else {
        RealField::zeros(f0.height(), f0.width())
    };
    let fg = f1.zip_map(&alpha, |a, b| a * b)?;
    let (h, w) = f0.dims();
    Ok(ModelState {
        prev_fg_spec: fft2(&fg)?,
        prev_alpha_spec: fft2(&alpha)?,
        fg,
        bg: f0.clone(),
        alpha,
        t: ComplexField::filled(h, w, Complex64::new(1.0, 0.0)),
        step_index: 0,
    })
}

/// Move fg and alpha by `t` and composite them over the unchanged background.
///
/// Returns `(fĝ, â, f̂)`.
pub fn predict_step(state: &ModelState) -> Result<(RealField, RealField, RealField)> {
    let fg_hat = phase_shift(&state.fg, &state.t)?;
    let alpha_hat = phase_shift(&state.alpha, &state.t)?;
    let frame = composite(&fg_hat, &state.bg, &alpha_hat)?;
    Ok((fg_hat, alpha_hat, frame))
}

/// Gradients of `mse(composite(fg, bg, alpha), observed)` with respect to fg, bg and alpha.
pub fn mse_gradients(
    fg: &RealField,
    bg: &RealField,
    alpha: &RealField,
    observed: &RealField,
) -> Result<(RealField, RealField, RealField)> {
    let predicted = composite(fg, bg, alpha)?;
    let e = residual(&predicted, observed)?;
    Ok((
        e.zip_map(alpha, |e, a| e * a)?,
        e.zip_map(alpha, |e, a| e * (1.0 - a))?,
        RealField::from_fn(fg.height(), fg.width(), |y, x| {
            e.get(y, x) * (fg.get(y, x) - bg.get(y, x))
        }),
    ))
}

/// `2/(H·W) · (predicted − observed)`, the MSE gradient with respect to the prediction.
fn residual(predicted: &RealField, observed: &RealField) -> Result<RealField> {
    let scale = 2.0 / predicted.len() as f64;
    predicted.zip_map(observed, |p, o| scale * (p - o))
}

/// One gradient step on fg, bg and alpha, starting from the predicted `fĝ`, `â`.
pub fn correction_step(
    state: &ModelState,
    fg_hat: &RealField,
    alpha_hat: &RealField,
    frame_hat: &RealField,
    observed: &RealField,
    cfg: &EngineConfig,
) -> Result<ModelState> {
    let dims = state.dims();
    for f in [fg_hat, alpha_hat, frame_hat, observed] {
        f.ensure_same_dims(dims)?;
    }
    let e = residual(frame_hat, observed)?;
    let (h, w) = dims;
    let mut fg = Vec::with_capacity(h * w);
    let mut bg = Vec::with_capacity(h * w);
    let mut alpha = Vec::with_capacity(h * w);
    for i in 0..h * w {
        let (e, f, b, a) = (e.data()[i], fg_hat.data()[i], state.bg.data()[i], alpha_hat.data()[i]);
        fg.push((f - cfg.gain_fg * e * a).clamp(0.0, 1.0));
        bg.push((b - cfg.gain_bg * e * (1.0 - a)).clamp(0.0, 1.0));
        alpha.push((a - cfg.gain_alpha * e * (f - b)).clamp(0.0, 1.0));
    }
    Ok(ModelState {
        fg: RealField::new(h, w, fg)?,
        bg: RealField::new(h, w, bg)?,
        alpha: RealField::new(h, w, alpha)?,
        t: state.t.clone(),
        prev_fg_spec: state.prev_fg_spec.clone(),
        prev_alpha_spec: state.prev_alpha_spec.clone(),
        step_index: state.step_index + 1,
    })
}

/// Measure the motion between the stored spectra and new fg/alpha.
///
/// Where both sources are valid the phasors are blended with weight
/// `alpha_fg_mix` on alpha; where only one is valid it is used alone; where
/// neither is, the current `t` is kept. The new spectra replace the stored ones.
pub fn estimate_phase_delta_joint(
    state: &mut ModelState,
    fg_new: &RealField,
    alpha_new: &RealField,
    cfg: &EngineConfig,
) -> Result<(ComplexField, ValidityMask)> {
    let fg_spec = fft2(fg_new)?;
    let alpha_spec = fft2(alpha_new)?;
    let (ta, va) = phase_delta(&alpha_spec, &state.prev_alpha_spec, cfg.spectral_floor)?;
    let (tf, vf) = phase_delta(&fg_spec, &state.prev_fg_spec, cfg.spectral_floor)?;
    let lambda = cfg.alpha_fg_mix;
    let (h, w) = state.dims();
    let blended: Vec<Complex64> = (0..h * w)
        .map(|i| match (va.bits()[i], vf.bits()[i]) {
            (true, true) => ta.data()[i] * lambda + tf.data()[i] * (1.0 - lambda),
            (true, false) => ta.data()[i],
            (false, true) => tf.data()[i],
            (false, false) => state.t.data()[i],
        })
        .collect();
    let measured = unit_renormalize(&ComplexField::new(h, w, blended)?, &state.t)?;
    state.prev_fg_spec = fg_spec;
    state.prev_alpha_spec = alpha_spec;
    Ok((measured, va.union(&vf)))
}

/// Blend the measured motion into `t` with weight `β` from the schedule, on valid bins.
pub fn motion_update(
    state: &mut ModelState,
    measured: &ComplexField,
    validity: &ValidityMask,
    cfg: &EngineConfig,
) -> Result<()> {
    state.t.ensure_same_dims(measured.dims())?;
    if validity.dims() != state.dims() {
        return Err(Error::dims(state.dims(), validity.dims()));
    }
    let beta = cfg.gain_t_schedule.at(state.step_index.saturating_sub(1));
    let (h, w) = state.dims();
    let blended: Vec<Complex64> = (0..h * w)
        .map(|i| {
            let t = state.t.data()[i];
            if validity.bits()[i] {
                t * (1.0 - beta) + measured.data()[i] * beta
            } else {
                t
            }
        })
        .collect();
    state.t = unit_renormalize(&ComplexField::new(h, w, blended)?, &state.t)?;
    Ok(())
}

fn apply_filters(state: &mut ModelState, cfg: &EngineConfig) -> Result<()> {
    if cfg.enable_dog_filter {
        state.alpha = dog_filter(&state.alpha, cfg.dog_sigma_narrow, cfg.dog_sigma_wide)?;
    }
    if cfg.enable_phase_filter {
        state.t = phase_smooth(&state.t, cfg.phase_smooth_radius)?;
    }
    Ok(())
}

/// One full predict → correct → measure motion → filter cycle on an observed frame.
pub fn engine_step(
    state: &ModelState,
    observed: &RealField,
    cfg: &EngineConfig,
) -> Result<(ModelState, StepReport)> {
    let (fg_hat, alpha_hat, frame_hat) = predict_step(state)?;
    let loss = mse(&frame_hat, observed)?;
    let mut next = correction_step(state, &fg_hat, &alpha_hat, &frame_hat, observed, cfg)?;
    let (fg_new, alpha_new) = (next.fg.clone(), next.alpha.clone());
    let (measured, validity) = estimate_phase_delta_joint(&mut next, &fg_new, &alpha_new, cfg)?;
    motion_update(&mut next, &measured, &validity, cfg)?;
    apply_filters(&mut next, cfg)?;
    if cfg.check_invariants {
        next.check_invariants()?;
    }
    let report = StepReport {
        phase: StepPhase::Seed,
        predicted_frame: frame_hat,
        loss_mse: Some(loss),
        state_snapshot: next.clone(),
    };
    Ok((next, report))
}

/// Advance the state without an observation: fg and alpha move by `t`, the
/// background stays, and the filters still run.
pub fn closed_loop_step(state: &ModelState, cfg: &EngineConfig) -> Result<(ModelState, StepReport)> {
    let (fg_hat, alpha_hat, frame_hat) = predict_step(state)?;
    let mut next = ModelState {
        fg: fg_hat,
        alpha: alpha_hat,
        step_index: state.step_index + 1,
        ..state.clone()
    };
    apply_filters(&mut next, cfg)?;
    if cfg.check_invariants {
        next.check_invariants()?;
    }
    let report = StepReport {
        phase: StepPhase::ClosedLoop,
        predicted_frame: frame_hat,
        loss_mse: None,
        state_snapshot: next.clone(),
    };
    Ok((next, report))
}

/// Consume the seed frames, then predict `horizon` frames closed-loop.
pub fn rollout(seeds: &[RealField], horizon: usize, cfg: &EngineConfig) -> Result<Vec<RealField>> {
    rollout_with(seeds, horizon, cfg, |_| Ok(()))
}

/// [`rollout`] that hands every step report to `visit`, seed steps first.
pub fn rollout_with(
    seeds: &[RealField],
    horizon: usize,
    cfg: &EngineConfig,
    mut visit: impl FnMut(&StepReport) -> Result<()>,
) -> Result<Vec<RealField>> {
    let state = seed_state(seeds, cfg, &mut visit)?;
    let mut state = state;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let (next, report) = closed_loop_step(&state, cfg)?;
        visit(&report)?;
        out.push(report.predicted_frame);
        state = next;
    }
    Ok(out)
}

/// Run initialization and every seed step; returns the state after the last seed.
pub fn seed_state(
    seeds: &[RealField],
    cfg: &EngineConfig,
    mut visit: impl FnMut(&StepReport) -> Result<()>,
) -> Result<ModelState> {
    if seeds.len() < 2 {
        return Err(Error::TooFewSeeds {
            needed: 2,
            got: seeds.len(),
        });
    }
    cfg.validate()?;
    let mut state = init_state(&seeds[0], &seeds[1], cfg)?;
    if cfg.check_invariants {
        state.check_invariants()?;
    }
    for observed in &seeds[2..] {
        let (next, report) = engine_step(&state, observed, cfg)?;
        visit(&report)?;
        state = next;
    }
    Ok(state)
}

/// Per-frame translation `(dy, dx)` encoded by a motion field.
///
/// The real part of the inverse transform of `t` is a correlation surface
/// peaking at the shift. The integer peak is refined per axis by the ratio of
/// the larger neighbour to the peak, which is exact for a sampled sinc.
pub fn decode_translation(t: &ComplexField) -> Result<(f64, f64)> {
    let surface = ifft2_complex(t)?.re();
    let (h, w) = surface.dims();
    let (mut py, mut px, mut best) = (0, 0, f64::NEG_INFINITY);
    for y in 0..h {
        for x in 0..w {
            let v = surface.get(y, x);
            if v > best {
                (py, px, best) = (y, x, v);
            }
        }
    }
    let refine = |c0: f64, plus: f64, minus: f64| -> f64 {
        if plus >= minus {
            if plus > 0.0 { plus / (plus + c0) } else { 0.0 }
        } else if minus > 0.0 {
            -minus / (minus + c0)
        } else {
            0.0
        }
    };
    let (iy, ix) = (py as isize, px as isize);
    let dy = py as f64
        + refine(best, surface.get_wrapped(iy + 1, ix), surface.get_wrapped(iy - 1, ix));
    let dx = px as f64
        + refine(best, surface.get_wrapped(iy, ix + 1), surface.get_wrapped(iy, ix - 1));
    let signed = |p: f64, n: usize| if p > n as f64 / 2.0 { p - n as f64 } else { p };
    Ok((signed(dy, h), signed(dx, w)))
}
