//! Run configuration: builtin defaults, overridden by a `key = value` file,
//! overridden by command-line flags.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use freqseg::dataset::{
    BackgroundSource, GenerateOptions, MotionMode, Placement, SpriteSource, TextureParams,
};
use freqseg::engine::{BetaSchedule, EngineConfig};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Background {
    Black,
    Texture,
    HighTexture,
}

impl FromStr for Background {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "black" => Ok(Background::Black),
            "texture" => Ok(Background::Texture),
            "high-texture" => Ok(Background::HighTexture),
            other => Err(format!("unknown background {other:?} (black, texture, high-texture)")),
        }
    }
}

impl Background {
    fn name(self) -> &'static str {
        match self {
            Background::Black => "black",
            Background::Texture => "texture",
            Background::HighTexture => "high-texture",
        }
    }
}

/// Every tunable of every subcommand. Keys match field names.
#[derive(Clone, Debug)]
pub struct Settings {
    pub seed: u64,
    pub count: usize,
    pub size: usize,
    pub frames: usize,
    pub max_speed: f64,
    pub motion: MotionMode,
    pub placement: Placement,
    pub background: Background,
    pub sprite_dir: Option<PathBuf>,
    pub background_dir: Option<PathBuf>,

    /// `None` means "derive from the frame size".
    pub gain_fg: Option<f64>,
    pub gain_bg: Option<f64>,
    pub gain_alpha: Option<f64>,
    pub beta_initial: f64,
    pub beta_decay: f64,
    pub beta_min: f64,
    pub alpha_fg_mix: f64,
    pub dog_sigma_narrow: f64,
    pub dog_sigma_wide: f64,
    pub phase_smooth_radius: usize,
    pub spectral_floor: f64,
    pub init_blur_radius: usize,
    pub seed_frames: usize,
    pub predict_frames: usize,
    pub enable_phase_filter: bool,
    pub enable_dog_filter: bool,
    pub check_invariants: bool,
}

impl Default for Settings {
    fn default() -> Self {
        let gen = GenerateOptions::default();
        let eng = EngineConfig::default();
        Self {
            seed: 0,
            count: 200,
            size: gen.frame_size,
            frames: gen.num_frames,
            max_speed: gen.max_speed,
            motion: gen.motion_mode,
            placement: gen.placement,
            background: Background::Texture,
            sprite_dir: None,
            background_dir: None,
            gain_fg: None,
            gain_bg: None,
            gain_alpha: None,
            beta_initial: eng.gain_t_schedule.initial,
            beta_decay: eng.gain_t_schedule.decay,
            beta_min: eng.gain_t_schedule.min,
            alpha_fg_mix: eng.alpha_fg_mix,
            dog_sigma_narrow: eng.dog_sigma_narrow,
            dog_sigma_wide: eng.dog_sigma_wide,
            phase_smooth_radius: eng.phase_smooth_radius,
            spectral_floor: eng.spectral_floor,
            init_blur_radius: eng.init_blur_radius,
            seed_frames: eng.seed_frames,
            predict_frames: eng.predict_frames,
            enable_phase_filter: eng.enable_phase_filter,
            enable_dog_filter: eng.enable_dog_filter,
            check_invariants: eng.check_invariants,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("bad value {value:?} for {key}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(CliError::Usage(format!("bad boolean {value:?} for {key}"))),
    }
}

fn parse_gain(key: &str, value: &str) -> Result<Option<f64>, CliError> {
    if value == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

impl Settings {
    /// Set one key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.seed = parse(key, v)?,
            "count" => self.count = parse(key, v)?,
            "size" => self.size = parse(key, v)?,
            "frames" => self.frames = parse(key, v)?,
            "max_speed" => self.max_speed = parse(key, v)?,
            "motion" => self.motion = parse(key, v)?,
            "placement" => self.placement = parse(key, v)?,
            "background" => self.background = parse(key, v)?,
            "sprite_dir" => self.sprite_dir = (!v.is_empty()).then(|| PathBuf::from(v)),
            "background_dir" => self.background_dir = (!v.is_empty()).then(|| PathBuf::from(v)),
            "gain_fg" => self.gain_fg = parse_gain(key, v)?,
            "gain_bg" => self.gain_bg = parse_gain(key, v)?,
            "gain_alpha" => self.gain_alpha = parse_gain(key, v)?,
            "beta_initial" => self.beta_initial = parse(key, v)?,
            "beta_decay" => self.beta_decay = parse(key, v)?,
            "beta_min" => self.beta_min = parse(key, v)?,
            "alpha_fg_mix" => self.alpha_fg_mix = parse(key, v)?,
            "dog_sigma_narrow" => self.dog_sigma_narrow = parse(key, v)?,
            "dog_sigma_wide" => self.dog_sigma_wide = parse(key, v)?,
            "phase_smooth_radius" => self.phase_smooth_radius = parse(key, v)?,
            "spectral_floor" => self.spectral_floor = parse(key, v)?,
            "init_blur_radius" => self.init_blur_radius = parse(key, v)?,
            "seed_frames" => self.seed_frames = parse(key, v)?,
            "predict_frames" => self.predict_frames = parse(key, v)?,
            "enable_phase_filter" => self.enable_phase_filter = parse_bool(key, v)?,
            "enable_dog_filter" => self.enable_dog_filter = parse_bool(key, v)?,
            "check_invariants" => self.check_invariants = parse_bool(key, v)?,
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Apply a config file: one `key = value` per line, `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}:{}: expected key = value", path.display(), n + 1))
            })?;
            self.set(key, value).map_err(|e| match e {
                CliError::Usage(m) => CliError::Usage(format!("{}:{}: {m}", path.display(), n + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Effective engine configuration for frames of `height × width`.
    pub fn engine(&self, height: usize, width: usize) -> Result<EngineConfig, CliError> {
        let base = EngineConfig::for_frame(height, width);
        let cfg = EngineConfig {
            gain_fg: self.gain_fg.unwrap_or(base.gain_fg),
            gain_bg: self.gain_bg.unwrap_or(base.gain_bg),
            gain_alpha: self.gain_alpha.unwrap_or(base.gain_alpha),
            gain_t_schedule: BetaSchedule::decaying(self.beta_initial, self.beta_decay, self.beta_min),
            alpha_fg_mix: self.alpha_fg_mix,
            dog_sigma_narrow: self.dog_sigma_narrow,
            dog_sigma_wide: self.dog_sigma_wide,
            phase_smooth_radius: self.phase_smooth_radius,
            spectral_floor: self.spectral_floor,
            init_blur_radius: self.init_blur_radius,
            seed_frames: self.seed_frames,
            predict_frames: self.predict_frames,
            enable_phase_filter: self.enable_phase_filter,
            enable_dog_filter: self.enable_dog_filter,
            check_invariants: self.check_invariants,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn generate_options(&self) -> Result<GenerateOptions, CliError> {
        if self.size == 0 || !self.size.is_power_of_two() {
            return Err(CliError::Usage(format!("size {} must be a power of two", self.size)));
        }
        if self.frames == 0 || self.count == 0 {
            return Err(CliError::Usage("count and frames must be >= 1".into()));
        }
        if !(self.max_speed >= 0.0 && self.max_speed.is_finite()) {
            return Err(CliError::Usage(format!("max_speed {} must be >= 0", self.max_speed)));
        }
        let sprites = match &self.sprite_dir {
            Some(dir) => SpriteSource::from_dir(dir)?,
            None => SpriteSource::builtin(),
        };
        let backgrounds = match (&self.background_dir, self.background) {
            (Some(dir), _) => BackgroundSource::from_dir(dir)?,
            (None, Background::Black) => BackgroundSource::Black,
            (None, Background::Texture) => BackgroundSource::Procedural(TextureParams::default()),
            (None, Background::HighTexture) => {
                BackgroundSource::Procedural(TextureParams::high_texture())
            }
        };
        Ok(GenerateOptions {
            frame_size: self.size,
            num_frames: self.frames,
            max_speed: self.max_speed,
            motion_mode: self.motion,
            placement: self.placement,
            sprites,
            backgrounds,
        })
    }

    /// Render every key in the same `key = value` syntax the parser accepts.
    pub fn render(&self) -> String {
        let gain = |g: Option<f64>| g.map(|g| g.to_string()).unwrap_or_else(|| "auto".into());
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let motion = match self.motion {
            MotionMode::Toroidal => "toroidal",
            MotionMode::Bounce => "bounce",
        };
        let placement = match self.placement {
            Placement::Fourier => "fourier",
            Placement::Bilinear => "bilinear",
        };
        let rows: [(&str, String); 27] = [
            ("seed", self.seed.to_string()),
            ("count", self.count.to_string()),
            ("size", self.size.to_string()),
            ("frames", self.frames.to_string()),
            ("max_speed", self.max_speed.to_string()),
            ("motion", motion.into()),
            ("placement", placement.into()),
            ("background", self.background.name().into()),
            ("sprite_dir", path(&self.sprite_dir)),
            ("background_dir", path(&self.background_dir)),
            ("gain_fg", gain(self.gain_fg)),
            ("gain_bg", gain(self.gain_bg)),
            ("gain_alpha", gain(self.gain_alpha)),
            ("beta_initial", self.beta_initial.to_string()),
            ("beta_decay", self.beta_decay.to_string()),
            ("beta_min", self.beta_min.to_string()),
            ("alpha_fg_mix", self.alpha_fg_mix.to_string()),
            ("dog_sigma_narrow", self.dog_sigma_narrow.to_string()),
            ("dog_sigma_wide", self.dog_sigma_wide.to_string()),
            ("phase_smooth_radius", self.phase_smooth_radius.to_string()),
            ("spectral_floor", self.spectral_floor.to_string()),
            ("init_blur_radius", self.init_blur_radius.to_string()),
            ("seed_frames", self.seed_frames.to_string()),
            ("predict_frames", self.predict_frames.to_string()),
            ("enable_phase_filter", self.enable_phase_filter.to_string()),
            ("enable_dog_filter", self.enable_dog_filter.to_string()),
            ("check_invariants", self.check_invariants.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
