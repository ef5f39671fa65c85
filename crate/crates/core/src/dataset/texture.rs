//! Procedural periodic value-noise textures used as static backgrounds.

use rand::Rng;

use crate::field_math::RealField;

/// Parameters of a multi-octave periodic value-noise texture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TextureParams {
    /// Lattice cells per side at the coarsest octave.
    pub base_cells: usize,
    pub octaves: usize,
    /// Amplitude ratio between consecutive octaves.
    pub persistence: f64,
    /// Target standard deviation of the texture around 0.5.
    pub contrast: f64,
}

impl Default for TextureParams {
    fn default() -> Self {
        Self {
            base_cells: 4,
            octaves: 4,
            persistence: 0.5,
            contrast: 0.15,
        }
    }
}

impl TextureParams {
    /// Busier, higher-contrast texture used to stress motion estimation.
    pub fn high_texture() -> Self {
        Self {
            base_cells: 8,
            octaves: 4,
            persistence: 0.8,
            contrast: 0.22,
        }
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Tileable texture of `size × size`, mean ≈ 0.5, clamped to `[0, 1]`.
pub fn value_noise<R: Rng>(size: usize, params: &TextureParams, rng: &mut R) -> RealField {
    let mut acc = vec![0.0; size * size];
    let mut amplitude = 1.0;
    for octave in 0..params.octaves {
        let cells = (params.base_cells << octave).min(size).max(1);
        let lattice: Vec<f64> = (0..cells * cells).map(|_| rng.random::<f64>()).collect();
        let coord: Vec<(usize, usize, f64)> = (0..size)
            .map(|i| {
                let c = i as f64 * cells as f64 / size as f64;
                let i0 = c.floor() as usize % cells;
                (i0, (i0 + 1) % cells, smoothstep(c - c.floor()))
            })
            .collect();
        for (y, &(y0, y1, fy)) in coord.iter().enumerate() {
            for (x, &(x0, x1, fx)) in coord.iter().enumerate() {
                let top = lattice[y0 * cells + x0] * (1.0 - fx) + lattice[y0 * cells + x1] * fx;
                let bottom = lattice[y1 * cells + x0] * (1.0 - fx) + lattice[y1 * cells + x1] * fx;
                acc[y * size + x] += amplitude * (top * (1.0 - fy) + bottom * fy);
            }
        }
        amplitude *= params.persistence;
    }
    let n = acc.len() as f64;
    let mean = acc.iter().sum::<f64>() / n;
    let std = (acc.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let scale = if std > 0.0 { params.contrast / std } else { 0.0 };
    RealField::new(
        size,
        size,
        acc.into_iter().map(|v| ((v - mean) * scale + 0.5).clamp(0.0, 1.0)).collect(),
    )
    .expect("square buffer")
}
