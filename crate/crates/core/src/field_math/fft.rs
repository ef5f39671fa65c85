//! Iterative radix-2 Cooley-Tukey transform, applied row-then-column for 2D.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::{ComplexField, RealField};
use crate::error::{Error, Result};

/// Imaginary residue tolerated when a spectrum is expected to come from a real field.
pub const REAL_RESIDUE_TOL: f64 = 1e-4;

/// Precomputed twiddles and bit-reversal table for one transform length.
#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|k| {
                let angle = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Self { n, twiddles, bitrev }
    }

    /// In-place unnormalized transform. `inverse` flips the twiddle sign.
    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

fn check_pow2(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 || !height.is_power_of_two() || !width.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { height, width });
    }
    Ok(())
}

fn transform2(field: &mut ComplexField, inverse: bool) {
    let (h, w) = field.dims();
    let row_plan = Radix2::new(w);
    let col_plan = if h == w { row_plan.clone() } else { Radix2::new(h) };
    let data = field.data_mut();
    for row in data.chunks_exact_mut(w) {
        row_plan.process(row, inverse);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = data[y * w + x];
        }
        col_plan.process(&mut column, inverse);
        for y in 0..h {
            data[y * w + x] = column[y];
        }
    }
}

/// Unnormalized forward 2D DFT of a real field.
pub fn fft2(x: &RealField) -> Result<ComplexField> {
    fft2_complex(&x.to_complex())
}

/// Unnormalized forward 2D DFT of a complex field.
pub fn fft2_complex(x: &ComplexField) -> Result<ComplexField> {
    check_pow2(x.height(), x.width())?;
    let mut out = x.clone();
    transform2(&mut out, false);
    Ok(out)
}

/// Inverse 2D DFT with `1/(H*W)` normalization, keeping the complex result.
pub fn ifft2_complex(spectrum: &ComplexField) -> Result<ComplexField> {
    check_pow2(spectrum.height(), spectrum.width())?;
    let mut out = spectrum.clone();
    transform2(&mut out, true);
    let scale = 1.0 / out.len() as f64;
    for z in out.data_mut() {
        *z *= scale;
    }
    Ok(out)
}

/// Inverse 2D DFT of a spectrum that came from a real field.
///
/// Fails with a numerical-consistency error if the imaginary residue exceeds
/// [`REAL_RESIDUE_TOL`].
pub fn ifft2(spectrum: &ComplexField) -> Result<RealField> {
    let out = ifft2_complex(spectrum)?;
    let residue = out.data().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if residue >= REAL_RESIDUE_TOL {
        return Err(Error::NumericalConsistency(format!(
            "inverse FFT imaginary residue {residue:.3e} exceeds {REAL_RESIDUE_TOL:e}"
        )));
    }
    Ok(out.re())
}
