//! Zero-parameter motion segmentation and video prediction.
//!
//! A video of one object moving over a static background is explained by four
//! pieces of state: a foreground canvas, a background, an alpha mask, and a
//! motion field `t` holding one unit phasor per DFT bin. Prediction multiplies
//! the spectra of foreground and mask by `t`; correction descends the gradient
//! of the squared prediction error; `t` is re-measured from the phase change of
//! the corrected state. Nothing is learned.
//!
//! ```
//! use freqseg::dataset::{generate_set, BackgroundSource, GenerateOptions};
//! use freqseg::engine::{rollout, EngineConfig};
//! use freqseg::metrics::ssim;
//!
//! let opts = GenerateOptions {
//!     frame_size: 64,
//!     num_frames: 12,
//!     backgrounds: BackgroundSource::Black,
//!     ..GenerateOptions::default()
//! };
//! let seq = &generate_set(1, 3, &opts)?.sequences[0];
//! let cfg = EngineConfig::for_frame(64, 64);
//! let predicted = rollout(&seq.frames[..10], 2, &cfg)?;
//! assert!(ssim(&predicted[0], &seq.frames[10])? > 0.8);
//! # Ok::<(), freqseg::Error>(())
//! ```

pub mod dataset;
pub mod engine;
mod error;
pub mod field_math;
pub mod filters;
pub mod metrics;

pub use error::{Error, Result};

// The guide's Rust snippets are compiled and run as doctests through these
// modules, one per chapter, so a failure names the chapter it came from.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/fields.md")]
    pub mod fields {}
    #[doc = include_str!("../../../book/src/phase_shift.md")]
    pub mod phase_shift {}
    #[doc = include_str!("../../../book/src/engine.md")]
    pub mod engine {}
    #[doc = include_str!("../../../book/src/filters.md")]
    pub mod filters {}
    #[doc = include_str!("../../../book/src/dataset.md")]
    pub mod dataset {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    pub mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
