//! State montages: one row per step, panels
//! `observed | predicted | FG | BG | A | T arrow`.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use freqseg::dataset::to_gray_image;
use freqseg::engine::{decode_translation, ModelState};
use freqseg::field_math::RealField;
use image::codecs::gif::{GifEncoder, Repeat};
use image::{Delay, Frame, GrayImage, Luma, RgbaImage};

use crate::CliError;

pub const PANELS: usize = 6;
const GAP: u32 = 2;
/// Arrow pixels per pixel/frame of decoded motion.
const ARROW_SCALE: f64 = 6.0;

/// Draw a white arrow from the panel centre along `(dy, dx)` over a dimmed mask.
pub fn arrow_panel(alpha: &RealField, dy: f64, dx: f64) -> RealField {
    let (h, w) = alpha.dims();
    let mut out = alpha.map(|v| 0.4 * v);
    let (cy, cx) = (h as f64 / 2.0, w as f64 / 2.0);
    let limit = 0.45 * h.min(w) as f64;
    let (mut ey, mut ex) = (dy * ARROW_SCALE, dx * ARROW_SCALE);
    let len = (ey * ey + ex * ex).sqrt();
    if len > limit {
        ey *= limit / len;
        ex *= limit / len;
    }
    let mut stroke = |y0: f64, x0: f64, y1: f64, x1: f64| {
        let steps = ((y1 - y0).abs().max((x1 - x0).abs()).ceil() as usize).max(1);
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let (y, x) = ((y0 + t * (y1 - y0)).round(), (x0 + t * (x1 - x0)).round());
            if y >= 0.0 && x >= 0.0 && (y as usize) < h && (x as usize) < w {
                out.set(y as usize, x as usize, 1.0);
            }
        }
    };
    let (ty, tx) = (cy + ey, cx + ex);
    stroke(cy, cx, ty, tx);
    let len = (ey * ey + ex * ex).sqrt();
    if len >= 1.0 {
        let head = (len * 0.3).clamp(2.0, 6.0);
        let (uy, ux) = (ey / len, ex / len);
        for side in [-1.0, 1.0] {
            // Barbs at ±30° from the reversed shaft direction.
            let (c, s) = (0.866, 0.5 * side);
            let (by, bx) = (-(uy * c - ux * s), -(ux * c + uy * s));
            stroke(ty, tx, ty + head * by, tx + head * bx);
        }
    } else {
        out.set((cy as usize).min(h - 1), (cx as usize).min(w - 1), 1.0);
    }
    out
}

/// The six panels of one step.
pub fn step_panels(
    observed: Option<&RealField>,
    predicted: &RealField,
    state: &ModelState,
) -> freqseg::Result<[RealField; PANELS]> {
    let (h, w) = predicted.dims();
    let (dy, dx) = decode_translation(&state.t)?;
    Ok([
        observed.cloned().unwrap_or_else(|| RealField::zeros(h, w)),
        predicted.clone(),
        state.fg.clone(),
        state.bg.clone(),
        state.alpha.clone(),
        arrow_panel(&state.alpha, dy, dx),
    ])
}

/// Lay out rows of panels with a mid-gray gap between them.
pub fn montage(rows: &[[RealField; PANELS]]) -> GrayImage {
    let (h, w) = rows
        .first()
        .map(|r| r[0].dims())
        .map(|(h, w)| (h as u32, w as u32))
        .unwrap_or((0, 0));
    let n = rows.len() as u32;
    let width = PANELS as u32 * w + (PANELS as u32 - 1) * GAP;
    let height = n * h + n.saturating_sub(1) * GAP;
    let mut img = GrayImage::from_pixel(width, height, Luma([128]));
    for (r, row) in rows.iter().enumerate() {
        for (c, panel) in row.iter().enumerate() {
            let tile = to_gray_image(panel);
            let (ox, oy) = (c as u32 * (w + GAP), r as u32 * (h + GAP));
            for (x, y, p) in tile.enumerate_pixels() {
                img.put_pixel(ox + x, oy + y, *p);
            }
        }
    }
    img
}

pub fn write_gif(frames: &[GrayImage], path: &Path, delay_ms: u32) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut encoder = GifEncoder::new(BufWriter::new(file));
    encoder.set_repeat(Repeat::Infinite).map_err(freqseg::Error::from)?;
    for g in frames {
        let rgba = RgbaImage::from_fn(g.width(), g.height(), |x, y| {
            let v = g.get_pixel(x, y).0[0];
            image::Rgba([v, v, v, 255])
        });
        encoder
            .encode_frame(Frame::from_parts(rgba, 0, 0, Delay::from_numer_denom_ms(delay_ms, 1)))
            .map_err(freqseg::Error::from)?;
    }
    Ok(())
}
