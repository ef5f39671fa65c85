//! Builtin procedural digit glyphs: the ten digits drawn as thick
//! anti-aliased polylines on a 28×28 canvas, in a few stroke widths and slants.

use std::f64::consts::PI;

use crate::field_math::RealField;

pub const GLYPH_SIZE: usize = 28;

const STROKE_HALF_WIDTHS: [f64; 3] = [1.1, 1.5, 1.9];
const SLANTS: [f64; 3] = [-0.15, 0.0, 0.15];

type Stroke = Vec<(f64, f64)>;

/// Points along an elliptical arc, angles in degrees, y pointing down.
fn arc(cx: f64, cy: f64, rx: f64, ry: f64, from: f64, to: f64) -> Stroke {
    let steps = (((to - from).abs() / 12.0).ceil() as usize).max(2);
    (0..=steps)
        .map(|i| {
            let a = (from + (to - from) * i as f64 / steps as f64) * PI / 180.0;
            (cx + rx * a.cos(), cy - ry * a.sin())
        })
        .collect()
}

/// Strokes of a digit in unit coordinates (x right, y down).
fn digit_strokes(digit: u8) -> Vec<Stroke> {
    match digit {
        0 => vec![arc(0.5, 0.5, 0.32, 0.46, 0.0, 360.0)],
        1 => vec![vec![(0.35, 0.2), (0.55, 0.04), (0.55, 0.96)]],
        2 => {
            let mut s = arc(0.5, 0.3, 0.3, 0.26, 160.0, -30.0);
            s.extend([(0.2, 0.96), (0.82, 0.96)]);
            vec![s]
        }
        3 => vec![
            arc(0.48, 0.27, 0.28, 0.23, 150.0, -90.0),
            arc(0.48, 0.73, 0.32, 0.23, 90.0, -150.0),
        ],
        4 => vec![
            vec![(0.62, 0.04), (0.15, 0.66), (0.85, 0.66)],
            vec![(0.65, 0.35), (0.65, 0.96)],
        ],
        5 => {
            let mut s = vec![(0.8, 0.04), (0.28, 0.04), (0.24, 0.45)];
            s.extend(arc(0.48, 0.68, 0.32, 0.28, 130.0, -150.0));
            vec![s]
        }
        6 => {
            let mut s = arc(0.62, 0.55, 0.45, 0.51, 70.0, 180.0);
            s.extend(arc(0.5, 0.7, 0.32, 0.26, 180.0, -180.0));
            vec![s]
        }
        7 => vec![vec![(0.15, 0.04), (0.85, 0.04), (0.4, 0.96)]],
        8 => vec![
            arc(0.5, 0.26, 0.25, 0.22, 0.0, 360.0),
            arc(0.5, 0.72, 0.31, 0.24, 0.0, 360.0),
        ],
        _ => {
            let mut s = arc(0.5, 0.3, 0.3, 0.26, 0.0, 360.0);
            s.extend([(0.8, 0.3), (0.72, 0.96)]);
            vec![s]
        }
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (qx * qx + qy * qy).sqrt()
}

/// Render one digit. `slant` shears the glyph horizontally (positive leans right).
pub fn render_digit(digit: u8, half_width: f64, slant: f64) -> RealField {
    let n = GLYPH_SIZE as f64;
    let (box_h, box_w) = (20.0, 14.0);
    let (top, left) = ((n - box_h) / 2.0, (n - box_w) / 2.0);
    let strokes: Vec<Stroke> = digit_strokes(digit % 10)
        .into_iter()
        .map(|s| {
            s.into_iter()
                .map(|(x, y)| {
                    let px = left + x * box_w + slant * (0.5 - y) * box_h;
                    (px, top + y * box_h)
                })
                .collect()
        })
        .collect();
    RealField::from_fn(GLYPH_SIZE, GLYPH_SIZE, |y, x| {
        let p = (x as f64 + 0.5, y as f64 + 0.5);
        let d = strokes
            .iter()
            .flat_map(|s| s.windows(2).map(move |w| segment_distance(p, w[0], w[1])))
            .fold(f64::INFINITY, f64::min);
        (half_width + 0.5 - d).clamp(0.0, 1.0)
    })
}

/// All builtin glyphs with stable identifiers.
pub fn builtin_glyphs() -> Vec<(String, RealField)> {
    let mut out = Vec::new();
    for digit in 0..10u8 {
        for (wi, &hw) in STROKE_HALF_WIDTHS.iter().enumerate() {
            for (si, &slant) in SLANTS.iter().enumerate() {
                out.push((format!("builtin/digit{digit}-w{wi}-s{si}"), render_digit(digit, hw, slant)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glyphs_are_valid_sprites() {
        let glyphs = builtin_glyphs();
        assert_eq!(glyphs.len(), 90);
        for (id, g) in &glyphs {
            assert_eq!(g.dims(), (GLYPH_SIZE, GLYPH_SIZE));
            assert!(g.within(0.0, 1.0), "{id}");
            let ink = g.sum();
            assert!(ink > 40.0 && ink < 300.0, "{id} ink {ink}");
            // Nothing touches the border so toroidal placement never bleeds.
            for i in 0..GLYPH_SIZE {
                assert_eq!(g.get(0, i), 0.0, "{id}");
                assert_eq!(g.get(GLYPH_SIZE - 1, i), 0.0, "{id}");
                assert_eq!(g.get(i, 0), 0.0, "{id}");
                assert_eq!(g.get(i, GLYPH_SIZE - 1), 0.0, "{id}");
            }
        }
    }

    #[test]
    fn digits_differ() {
        let a = render_digit(1, 1.5, 0.0);
        let b = render_digit(8, 1.5, 0.0);
        assert!(a.max_abs_diff(&b) > 0.5);
    }
}
