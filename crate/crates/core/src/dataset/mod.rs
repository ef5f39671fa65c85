//! Synthetic single-sprite video sequences over static textured backgrounds,
//! with ground-truth motion metadata and an on-disk container.
//!
//! A sequence is one glyph moving with constant (usually subpixel) velocity in
//! front of a fixed background. The glyph occludes the background through its
//! thresholded support, i.e. `frame = mask·sprite + (1 − mask)·background`.

mod container;
mod glyphs;
mod raster;
mod texture;

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::composite;
use crate::error::{Error, Result};
use crate::field_math::{phase_ramp, phase_shift, RealField};

pub use container::{
    decode as decode_container, encode as encode_container, read_container, write_container, CONTAINER_MAGIC,
    CONTAINER_VERSION,
};
pub use glyphs::{builtin_glyphs, render_digit, GLYPH_SIZE};
pub use raster::{from_gray_image, list_rasters, read_gray, to_gray_image, write_png};
pub use texture::{value_noise, TextureParams};

/// Sprite pixels above this value belong to the occlusion mask.
pub const MASK_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionMode {
    /// Wrap around the frame edges.
    #[default]
    Toroidal,
    /// Reflect off the frame edges, keeping the sprite fully inside.
    Bounce,
}

impl std::str::FromStr for MotionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toroidal" => Ok(MotionMode::Toroidal),
            "bounce" => Ok(MotionMode::Bounce),
            other => Err(Error::InvalidArgument(format!("unknown motion mode {other:?}"))),
        }
    }
}

/// How fractional sprite positions are rendered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Fourier shift, the same motion model the engine uses.
    #[default]
    Fourier,
    /// Bilinear interpolation, for robustness checks.
    Bilinear,
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fourier" => Ok(Placement::Fourier),
            "bilinear" => Ok(Placement::Bilinear),
            other => Err(Error::InvalidArgument(format!("unknown placement {other:?}"))),
        }
    }
}

/// Everything needed to render one sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceSpec {
    pub frame_size: usize,
    pub num_frames: usize,
    pub sprite: RealField,
    pub background: RealField,
    /// Top-left corner of the sprite at frame 0, `(y, x)`.
    pub start_pos: (f64, f64),
    /// Pixels per frame, `(dy, dx)`.
    pub velocity: (f64, f64),
    pub motion_mode: MotionMode,
    pub placement: Placement,
    pub rng_seed: u64,
    pub sprite_id: String,
    pub background_id: String,
}

/// Per-sequence metadata stored alongside the frames.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub rng_seed: u64,
    pub start_pos: [f64; 2],
    pub velocity: [f64; 2],
    pub motion_mode: MotionMode,
    pub sprite_id: String,
    pub background_id: String,
    /// Sprite top-left corner per frame, `[y, x]`.
    pub positions: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    pub frames: Vec<RealField>,
    pub meta: SequenceMeta,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SequenceSet {
    pub sequences: Vec<Sequence>,
}

impl SequenceSet {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }
}

/// Glyphs to draw sprites from.
#[derive(Clone, Debug)]
pub struct SpriteSource {
    glyphs: Vec<(String, RealField)>,
}

impl SpriteSource {
    pub fn builtin() -> Self {
        Self {
            glyphs: builtin_glyphs(),
        }
    }

    /// Every raster in `dir` (e.g. exported MNIST digits), as grayscale.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let glyphs = list_rasters(&dir)?
            .into_iter()
            .map(|p| Ok((raster_id("sprite", &p), read_gray(&p)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(glyphs)
    }

    pub fn new(glyphs: Vec<(String, RealField)>) -> Result<Self> {
        if glyphs.is_empty() {
            return Err(Error::EmptySource("sprite source has no glyphs".into()));
        }
        if let Some((id, _)) = glyphs.iter().find(|(_, g)| !g.within(0.0, 1.0)) {
            return Err(Error::InvalidArgument(format!("glyph {id} has values outside [0, 1]")));
        }
        Ok(Self { glyphs })
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    pub fn get(&self, index: usize) -> (&str, &RealField) {
        let (id, g) = &self.glyphs[index];
        (id, g)
    }
}

fn raster_id(kind: &str, path: &Path) -> String {
    format!(
        "{kind}/{}",
        path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
    )
}

/// Where backgrounds come from.
#[derive(Clone, Debug)]
pub enum BackgroundSource {
    Black,
    Procedural(TextureParams),
    /// Random crops (wrapping if the image is small) of grayscale images.
    Images(Vec<(String, RealField)>),
}

impl BackgroundSource {
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let images = list_rasters(&dir)?
            .into_iter()
            .map(|p| Ok((raster_id("background", &p), read_gray(&p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BackgroundSource::Images(images))
    }

    fn draw<R: Rng>(&self, size: usize, rng: &mut R) -> Result<(String, RealField)> {
        match self {
            BackgroundSource::Black => Ok(("black".into(), RealField::zeros(size, size))),
            BackgroundSource::Procedural(params) => {
                let tag: u32 = rng.random();
                let mut tex_rng = ChaCha8Rng::seed_from_u64(tag as u64);
                Ok((format!("procedural/{tag:08x}"), value_noise(size, params, &mut tex_rng)))
            }
            BackgroundSource::Images(images) => {
                if images.is_empty() {
                    return Err(Error::EmptySource("background source has no images".into()));
                }
                let (id, img) = &images[rng.random_range(0..images.len())];
                let top = rng.random_range(0..img.height()) as isize;
                let left = rng.random_range(0..img.width()) as isize;
                Ok((format!("{id}@{top},{left}"), img.crop_wrapped(top, left, size, size)))
            }
        }
    }
}

/// Options shared by every sequence of a generated set.
#[derive(Clone, Debug)]
pub struct GenerateOptions {
    pub frame_size: usize,
    pub num_frames: usize,
    /// Velocity components are drawn uniformly from `[-max_speed, max_speed]`.
    pub max_speed: f64,
    pub motion_mode: MotionMode,
    pub placement: Placement,
    pub sprites: SpriteSource,
    pub backgrounds: BackgroundSource,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            frame_size: 128,
            num_frames: 20,
            max_speed: 4.0,
            motion_mode: MotionMode::Toroidal,
            placement: Placement::Fourier,
            sprites: SpriteSource::builtin(),
            backgrounds: BackgroundSource::Procedural(TextureParams::default()),
        }
    }
}

impl GenerateOptions {
    pub fn sprite_dir(mut self, dir: Option<PathBuf>) -> Result<Self> {
        if let Some(dir) = dir {
            self.sprites = SpriteSource::from_dir(dir)?;
        }
        Ok(self)
    }
}

/// Fold `p` into `[0, span]` by reflecting off both ends.
fn reflect(p: f64, span: f64) -> f64 {
    if span <= 0.0 {
        return 0.0;
    }
    let period = 2.0 * span;
    let m = p.rem_euclid(period);
    if m <= span {
        m
    } else {
        period - m
    }
}

/// Sprite top-left corner at `frame_index`.
pub fn position_at(spec: &SequenceSpec, frame_index: usize) -> (f64, f64) {
    let t = frame_index as f64;
    let (y, x) = (
        spec.start_pos.0 + t * spec.velocity.0,
        spec.start_pos.1 + t * spec.velocity.1,
    );
    let n = spec.frame_size as f64;
    match spec.motion_mode {
        MotionMode::Toroidal => (y.rem_euclid(n), x.rem_euclid(n)),
        MotionMode::Bounce => (
            reflect(y, n - spec.sprite.height() as f64),
            reflect(x, n - spec.sprite.width() as f64),
        ),
    }
}

fn bilinear_shift(x: &RealField, fy: f64, fx: f64) -> RealField {
    let (h, w) = x.dims();
    RealField::from_fn(h, w, |y, xx| {
        let (y, xx) = (y as isize, xx as isize);
        let a = x.get_wrapped(y, xx);
        let b = x.get_wrapped(y, xx - 1);
        let c = x.get_wrapped(y - 1, xx);
        let d = x.get_wrapped(y - 1, xx - 1);
        (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * d)
    })
}

/// Embed a sprite in a zero canvas with its top-left corner at `pos`.
///
/// Returns the canvas and the identically moved occlusion mask (sprite support
/// thresholded at [`MASK_THRESHOLD`]). Everything wraps at the frame edges.
pub fn place_sprite(
    sprite: &RealField,
    pos: (f64, f64),
    frame_size: usize,
    placement: Placement,
) -> Result<(RealField, RealField)> {
    let (sh, sw) = sprite.dims();
    if sh > frame_size || sw > frame_size {
        return Err(Error::InvalidArgument(format!(
            "sprite {sh}x{sw} does not fit in a {frame_size}x{frame_size} frame"
        )));
    }
    let (by, bx) = (pos.0.floor(), pos.1.floor());
    let (fy, fx) = (pos.0 - by, pos.1 - bx);
    let mut canvas = RealField::zeros(frame_size, frame_size);
    let mut mask = RealField::zeros(frame_size, frame_size);
    for y in 0..sh {
        for x in 0..sw {
            let yy = (by as isize + y as isize).rem_euclid(frame_size as isize) as usize;
            let xx = (bx as isize + x as isize).rem_euclid(frame_size as isize) as usize;
            let v = sprite.get(y, x);
            canvas.set(yy, xx, v);
            mask.set(yy, xx, if v > MASK_THRESHOLD { 1.0 } else { 0.0 });
        }
    }
    if fy == 0.0 && fx == 0.0 {
        return Ok((canvas, mask));
    }
    match placement {
        Placement::Fourier => {
            let ramp = phase_ramp(fy, fx, frame_size, frame_size);
            Ok((phase_shift(&canvas, &ramp)?, phase_shift(&mask, &ramp)?))
        }
        Placement::Bilinear => Ok((bilinear_shift(&canvas, fy, fx), bilinear_shift(&mask, fy, fx))),
    }
}

/// Round to the nearest `f32` so frames survive the container unchanged.
fn quantize(x: RealField) -> RealField {
    x.map(|v| v as f32 as f64)
}

/// Render frame `frame_index` of a sequence.
pub fn render_frame(spec: &SequenceSpec, frame_index: usize) -> Result<RealField> {
    if frame_index >= spec.num_frames {
        return Err(Error::IndexOutOfRange {
            index: frame_index,
            len: spec.num_frames,
        });
    }
    spec.background.ensure_same_dims((spec.frame_size, spec.frame_size))?;
    let pos = position_at(spec, frame_index);
    let (canvas, mask) = place_sprite(&spec.sprite, pos, spec.frame_size, spec.placement)?;
    Ok(quantize(composite(&canvas, &spec.background, &mask)?))
}

/// Render every frame of a spec into a [`Sequence`].
pub fn render_sequence(spec: &SequenceSpec) -> Result<Sequence> {
    let frames = (0..spec.num_frames)
        .map(|i| render_frame(spec, i))
        .collect::<Result<Vec<_>>>()?;
    let positions = (0..spec.num_frames)
        .map(|i| {
            let (y, x) = position_at(spec, i);
            [y, x]
        })
        .collect();
    Ok(Sequence {
        frames,
        meta: SequenceMeta {
            rng_seed: spec.rng_seed,
            start_pos: [spec.start_pos.0, spec.start_pos.1],
            velocity: [spec.velocity.0, spec.velocity.1],
            motion_mode: spec.motion_mode,
            sprite_id: spec.sprite_id.clone(),
            background_id: spec.background_id.clone(),
            positions,
        },
    })
}

/// Draw the random parts of one sequence from its own RNG stream.
pub fn draw_spec(options: &GenerateOptions, rng_seed: u64) -> Result<SequenceSpec> {
    if options.sprites.is_empty() {
        return Err(Error::EmptySource("sprite source has no glyphs".into()));
    }
    if !(options.max_speed >= 0.0) {
        return Err(Error::InvalidArgument(format!("max speed {} must be >= 0", options.max_speed)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (sprite_id, sprite) = options.sprites.get(rng.random_range(0..options.sprites.len()));
    let (background_id, background) = options.backgrounds.draw(options.frame_size, &mut rng)?;
    let n = options.frame_size as f64;
    let (span_y, span_x) = match options.motion_mode {
        MotionMode::Toroidal => (n, n),
        MotionMode::Bounce => (n - sprite.height() as f64, n - sprite.width() as f64),
    };
    if span_y < 0.0 || span_x < 0.0 {
        return Err(Error::InvalidArgument("sprite larger than frame".into()));
    }
    let start_pos = (rng.random::<f64>() * span_y, rng.random::<f64>() * span_x);
    let v = options.max_speed;
    let velocity = if v > 0.0 {
        (rng.random_range(-v..=v), rng.random_range(-v..=v))
    } else {
        (0.0, 0.0)
    };
    Ok(SequenceSpec {
        frame_size: options.frame_size,
        num_frames: options.num_frames,
        sprite: sprite.clone(),
        background,
        start_pos,
        velocity,
        motion_mode: options.motion_mode,
        placement: options.placement,
        rng_seed,
        sprite_id: sprite_id.to_string(),
        background_id,
    })
}

/// Generate `count` sequences; sequence `i` uses RNG seed `base_seed + i`.
///
/// Runs in parallel; output order and content do not depend on scheduling.
pub fn generate_set(count: usize, base_seed: u64, options: &GenerateOptions) -> Result<SequenceSet> {
    if count == 0 {
        return Err(Error::InvalidArgument("sequence count must be >= 1".into()));
    }
    if options.num_frames == 0 {
        return Err(Error::InvalidArgument("frame count must be >= 1".into()));
    }
    let sequences = (0..count as u64)
        .into_par_iter()
        .map(|i| draw_spec(options, base_seed.wrapping_add(i)).and_then(|s| render_sequence(&s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SequenceSet { sequences })
}
