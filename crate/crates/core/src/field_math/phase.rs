//! Phase arithmetic on spectra: linear ramps, phase-adding shifts, per-bin
//! phase differences and projection back onto the unit circle.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::{fft2, ifft2_complex};
use super::field::{ComplexField, RealField};
use crate::error::{Error, Result};

/// Allowed deviation of `|z|` from 1 for a motion field.
pub const UNIT_TOL: f64 = 1e-6;

/// Magnitude below which an averaged phasor counts as cancelled.
pub const CANCEL_EPS: f64 = 1e-8;

/// Per-bin validity flags returned by [`phase_delta`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl ValidityMask {
    pub fn all(height: usize, width: usize, valid: bool) -> Self {
        Self {
            height,
            width,
            bits: vec![valid; height * width],
        }
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::BadLength {
                height,
                width,
                len: bits.len(),
            });
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_valid(&self, y: usize, x: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count_valid(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect(),
        }
    }
}

/// Signed frequency of DFT bin `k` for length `n`; the Nyquist bin maps to `-n/2`.
#[inline]
pub fn signed_frequency(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Unit-magnitude field that shifts an image by `(dy, dx)` pixels when
/// multiplied into its spectrum. Fractional shifts are allowed.
pub fn phase_ramp(dy: f64, dx: f64, height: usize, width: usize) -> ComplexField {
    let row_phase: Vec<f64> = (0..height)
        .map(|u| -2.0 * PI * signed_frequency(u, height) * dy / height as f64)
        .collect();
    let col_phase: Vec<f64> = (0..width)
        .map(|v| -2.0 * PI * signed_frequency(v, width) * dx / width as f64)
        .collect();
    ComplexField::from_fn(height, width, |u, v| {
        Complex64::from_polar(1.0, row_phase[u] + col_phase[v])
    })
}

fn check_motion_field(t: &ComplexField) -> Result<()> {
    let deviation = t.max_unit_deviation();
    if deviation > UNIT_TOL {
        return Err(Error::InvalidMotionField { deviation });
    }
    Ok(())
}

/// `Re(ifft2(fft2(x) ⊙ t))` without clamping.
///
/// Motion fields need not be conjugate-symmetric (a fractional ramp is not at
/// the Nyquist bins), so the imaginary part is dropped rather than checked.
pub fn phase_shift_unclamped(x: &RealField, t: &ComplexField) -> Result<RealField> {
    x.ensure_same_dims(t.dims())?;
    check_motion_field(t)?;
    let spectrum = fft2(x)?.zip_map(t, |a, b| a * b)?;
    Ok(ifft2_complex(&spectrum)?.re())
}

/// Move `x` by the motion field `t` and clamp the result to `[0, 1]`.
pub fn phase_shift(x: &RealField, t: &ComplexField) -> Result<RealField> {
    Ok(phase_shift_unclamped(x, t)?.clamp01())
}

/// Normalized cross-power spectrum `curr · conj(prev) / |curr · conj(prev)|`.
///
/// Bins where `|curr|·|prev| <= floor` are reported invalid and carried as `1+0i`.
pub fn phase_delta(
    curr: &ComplexField,
    prev: &ComplexField,
    floor: f64,
) -> Result<(ComplexField, ValidityMask)> {
    curr.ensure_same_dims(prev.dims())?;
    if floor.is_nan() || floor < 0.0 {
        return Err(Error::InvalidArgument(format!("spectral floor {floor} must be >= 0")));
    }
    let (h, w) = curr.dims();
    let mut bits = Vec::with_capacity(h * w);
    let mut out = Vec::with_capacity(h * w);
    for (c, p) in curr.data().iter().zip(prev.data()) {
        let cross = c * p.conj();
        let mag = cross.norm();
        if mag > floor && mag > 0.0 {
            bits.push(true);
            out.push(cross / mag);
        } else {
            bits.push(false);
            out.push(Complex64::new(1.0, 0.0));
        }
    }
    Ok((ComplexField::new(h, w, out)?, ValidityMask::from_bits(h, w, bits)?))
}

/// Project every element back onto the unit circle. Elements that (nearly)
/// cancelled take the corresponding fallback element instead.
pub fn unit_renormalize(t: &ComplexField, fallback: &ComplexField) -> Result<ComplexField> {
    t.ensure_same_dims(fallback.dims())?;
    if !fallback.is_unit(UNIT_TOL) {
        return Err(Error::InvalidArgument(
            "renormalization fallback must be unit-magnitude".into(),
        ));
    }
    t.zip_map(fallback, |z, fb| {
        let mag = z.norm();
        if mag > CANCEL_EPS {
            z / mag
        } else {
            fb
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_math::fft::fft2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn delta(h: usize, w: usize) -> RealField {
        let mut x = RealField::zeros(h, w);
        x.set(0, 0, 1.0);
        x
    }

    #[test]
    fn zero_and_full_period_ramps_are_identity() {
        let r = phase_ramp(0.0, 0.0, 8, 16);
        assert!(r.data().iter().all(|z| (z - one()).norm() < 1e-12));
        let r = phase_ramp(8.0, 0.0, 8, 16);
        assert!(r.data().iter().all(|z| (z - one()).norm() < 1e-9));
        let r = phase_ramp(0.0, -16.0, 8, 16);
        assert!(r.data().iter().all(|z| (z - one()).norm() < 1e-9));
    }

    #[test]
    fn ramps_compose_by_product() {
        let a = phase_ramp(1.0, 0.0, 16, 16);
        let b = phase_ramp(2.0, 0.0, 16, 16);
        let ab = a.zip_map(&b, |p, q| p * q).unwrap();
        assert!(ab.max_abs_diff(&phase_ramp(3.0, 0.0, 16, 16)) < 1e-9);
        let c = phase_ramp(0.3, -1.7, 16, 16)
            .zip_map(&phase_ramp(0.45, 0.2, 16, 16), |p, q| p * q)
            .unwrap();
        assert!(c.max_abs_diff(&phase_ramp(0.75, -1.5, 16, 16)) < 1e-9);
    }

    #[test]
    fn identity_field_leaves_image_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = RealField::from_fn(16, 16, |_, _| rng.random::<f64>());
        let y = phase_shift(&x, &ComplexField::filled(16, 16, one())).unwrap();
        assert!(y.max_abs_diff(&x) < 1e-9);
    }

    #[test]
    fn integer_ramp_moves_delta() {
        let y = phase_shift(&delta(16, 16), &phase_ramp(3.0, 2.0, 16, 16)).unwrap();
        assert!(y.max_abs_diff(&delta(16, 16).roll(3, 2)) < 1e-5);
    }

    #[test]
    fn half_pixel_shift_matches_direct_evaluation() {
        let (h, w) = (16, 16);
        let t = phase_ramp(0.5, 0.0, h, w);
        let y = phase_shift_unclamped(&delta(h, w), &t).unwrap();
        // The spectrum of a delta is flat, so the output is the real part of
        // the inverse DFT of the ramp itself, evaluated directly.
        for yy in 0..h {
            for xx in 0..w {
                let mut acc = Complex64::new(0.0, 0.0);
                for u in 0..h {
                    for v in 0..w {
                        let phase = 2.0 * PI * ((u * yy) as f64 / h as f64 + (v * xx) as f64 / w as f64);
                        acc += t.get(u, v) * Complex64::from_polar(1.0, phase);
                    }
                }
                let expected = acc.re / (h * w) as f64;
                assert!((y.get(yy, xx) - expected).abs() < 1e-5);
            }
        }
        // Dirichlet interpolation puts equal weight on the two nearest rows.
        assert!((y.get(0, 0) - y.get(1, 0)).abs() < 1e-9);
    }

    #[test]
    fn phase_shift_rejects_bad_inputs() {
        let x = RealField::zeros(8, 8);
        let t = ComplexField::filled(8, 8, Complex64::new(0.9, 0.0));
        assert!(matches!(phase_shift(&x, &t), Err(Error::InvalidMotionField { .. })));
        let t = ComplexField::filled(4, 8, one());
        assert!(matches!(phase_shift(&x, &t), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn phase_delta_of_equal_spectra_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = RealField::from_fn(8, 8, |_, _| rng.random::<f64>() + 0.1);
        let s = fft2(&x).unwrap();
        let (d, mask) = phase_delta(&s, &s, 0.0).unwrap();
        assert_eq!(mask.count_valid(), 64);
        assert!(d.data().iter().all(|z| (z - one()).norm() < 1e-9));
    }

    #[test]
    fn phase_delta_recovers_integer_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = RealField::from_fn(16, 16, |_, _| rng.random::<f64>());
        let (d, mask) = phase_delta(&fft2(&x.roll(2, 3)).unwrap(), &fft2(&x).unwrap(), 1e-9).unwrap();
        let ramp = phase_ramp(2.0, 3.0, 16, 16);
        for u in 0..16 {
            for v in 0..16 {
                if mask.is_valid(u, v) {
                    assert!((d.get(u, v) - ramp.get(u, v)).norm() < 1e-5);
                }
            }
        }
        assert!(mask.count_valid() > 200);
    }

    #[test]
    fn phase_delta_against_zero_is_invalid() {
        let s = fft2(&delta(8, 8)).unwrap();
        let (d, mask) = phase_delta(&s, &ComplexField::zeros(8, 8), 0.0).unwrap();
        assert_eq!(mask.count_valid(), 0);
        assert!(d.data().iter().all(|z| *z == one()));
        assert!(phase_delta(&s, &s, -1.0).is_err());
    }

    #[test]
    fn renormalize_cases() {
        let i = Complex64::new(0.0, 1.0);
        let unit = phase_ramp(0.3, 0.7, 4, 4);
        let fb = ComplexField::filled(4, 4, i);
        assert!(unit_renormalize(&unit, &fb).unwrap().max_abs_diff(&unit) < 1e-12);

        let half = ComplexField::filled(4, 4, Complex64::new(0.5, 0.0));
        assert!(unit_renormalize(&half, &fb).unwrap().data().iter().all(|z| *z == one()));

        let zero = ComplexField::zeros(4, 4);
        assert!(unit_renormalize(&zero, &fb).unwrap().data().iter().all(|z| *z == i));

        let bad = ComplexField::filled(4, 4, Complex64::new(2.0, 0.0));
        assert!(matches!(unit_renormalize(&zero, &bad), Err(Error::InvalidArgument(_))));
    }
}
