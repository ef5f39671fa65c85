use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Blend weight `β_t = max(min, initial · decay^t)` for the motion average.
///
/// `β = 1` replaces the motion field by each new measurement, `β = 0` freezes it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSchedule {
    pub initial: f64,
    pub decay: f64,
    pub min: f64,
}

impl BetaSchedule {
    pub fn constant(beta: f64) -> Self {
        Self {
            initial: beta,
            decay: 1.0,
            min: beta,
        }
    }

    pub fn decaying(initial: f64, decay: f64, min: f64) -> Self {
        Self { initial, decay, min }
    }

    pub fn at(&self, step: usize) -> f64 {
        let exponent = step.min(i32::MAX as usize) as i32;
        self.min.max(self.initial * self.decay.powi(exponent))
    }

    fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.initial) || !unit(self.min) || !(self.decay >= 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "beta schedule {self:?} must stay within [0, 1]"
            )));
        }
        Ok(())
    }
}

impl Default for BetaSchedule {
    fn default() -> Self {
        Self::constant(1.0)
    }
}

/// Gains, filter parameters, schedules and mode flags of the engine.
///
/// Gains are raw step sizes applied to `e = 2/(H·W) · (f̂ − observed)`, so a
/// gain of `H·W/2` moves a pixel by its full residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub gain_fg: f64,
    pub gain_bg: f64,
    pub gain_alpha: f64,
    pub gain_t_schedule: BetaSchedule,
    /// Weight of the alpha-derived phase delta; `1 − λ` goes to the fg-derived one.
    pub alpha_fg_mix: f64,
    pub dog_sigma_narrow: f64,
    pub dog_sigma_wide: f64,
    pub phase_smooth_radius: usize,
    pub spectral_floor: f64,
    /// Box radius used to spread the initial frame difference into a mask.
    pub init_blur_radius: usize,
    pub seed_frames: usize,
    pub predict_frames: usize,
    pub enable_phase_filter: bool,
    pub enable_dog_filter: bool,
    /// Verify state invariants after every step and fail on violation.
    pub check_invariants: bool,
}

impl EngineConfig {
    /// Defaults for frames of `height × width` (gains scale with the pixel count).
    pub fn for_frame(height: usize, width: usize) -> Self {
        let unit_gain = (height * width) as f64 / 2.0;
        Self {
            gain_fg: unit_gain,
            gain_bg: unit_gain,
            gain_alpha: unit_gain,
            gain_t_schedule: BetaSchedule::default(),
            alpha_fg_mix: 0.0,
            dog_sigma_narrow: 1.0,
            dog_sigma_wide: 3.0,
            phase_smooth_radius: 2,
            spectral_floor: 1e-3,
            init_blur_radius: 10,
            seed_frames: 10,
            predict_frames: 10,
            enable_phase_filter: true,
            enable_dog_filter: false,
            check_invariants: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        for (name, g) in [("gain_fg", self.gain_fg), ("gain_bg", self.gain_bg), ("gain_alpha", self.gain_alpha)] {
            if !(g > 0.0 && g.is_finite()) {
                return bad(format!("{name} must be > 0, got {g}"));
            }
        }
        self.gain_t_schedule.validate()?;
        if !(0.0..=1.0).contains(&self.alpha_fg_mix) {
            return bad(format!("alpha_fg_mix must be in [0, 1], got {}", self.alpha_fg_mix));
        }
        if !(self.dog_sigma_narrow > 0.0 && self.dog_sigma_wide > self.dog_sigma_narrow) {
            return bad(format!(
                "need 0 < dog_sigma_narrow < dog_sigma_wide, got {} and {}",
                self.dog_sigma_narrow, self.dog_sigma_wide
            ));
        }
        if self.phase_smooth_radius == 0 {
            return bad("phase_smooth_radius must be >= 1".into());
        }
        if !(self.spectral_floor >= 0.0) {
            return bad(format!("spectral_floor must be >= 0, got {}", self.spectral_floor));
        }
        if self.seed_frames < 2 {
            return Err(Error::TooFewSeeds {
                needed: 2,
                got: self.seed_frames,
            });
        }
        Ok(())
    }
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self::for_frame(128, 128)
    }
}
