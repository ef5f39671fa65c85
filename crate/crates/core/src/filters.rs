//! Stabilization filters: Gaussian blur and Difference-of-Gaussians for the
//! alpha mask, complex box averaging for the motion field.
//!
//! All convolutions wrap around the edges, matching the toroidal geometry of
//! the FFT.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field_math::{unit_renormalize, ComplexField, RealField, UNIT_TOL};

/// Truncated (±3σ), normalized, symmetric 1D Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianKernel {
    radius: usize,
    sigma: f64,
    weights: Vec<f64>,
}

impl GaussianKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("gaussian sigma {sigma} must be > 0")));
        }
        let radius = (3.0 * sigma).ceil() as usize;
        let raw: Vec<f64> = (0..=2 * radius)
            .map(|i| {
                let d = i as f64 - radius as f64;
                (-d * d / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        Ok(Self {
            radius,
            sigma,
            weights: raw.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Taps from offset `-radius` to `+radius`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Separable circular convolution of a real field with a centered 1D kernel
/// along both axes.
fn convolve_separable(x: &RealField, taps: &[f64]) -> RealField {
    let (h, w) = x.dims();
    let r = (taps.len() / 2) as isize;
    let rows = RealField::from_fn(h, w, |y, xx| {
        taps.iter()
            .enumerate()
            .map(|(i, k)| k * x.get_wrapped(y as isize, xx as isize + i as isize - r))
            .sum()
    });
    RealField::from_fn(h, w, |y, xx| {
        taps.iter()
            .enumerate()
            .map(|(i, k)| k * rows.get_wrapped(y as isize + i as isize - r, xx as isize))
            .sum()
    })
}

/// Separable circular box average over a `(2r+1)²` window.
pub fn box_blur(x: &RealField, radius: usize) -> RealField {
    let n = 2 * radius + 1;
    convolve_separable(x, &vec![1.0 / n as f64; n])
}

pub fn gaussian_blur(x: &RealField, sigma: f64) -> Result<RealField> {
    let kernel = GaussianKernel::new(sigma)?;
    Ok(convolve_separable(x, kernel.weights()))
}

/// Band-pass enhancement of a mask: `clamp(a + blur(a, σn) − blur(a, σw), 0, 1)`.
///
/// Constant regions are left untouched; a diffuse haze around a compact blob
/// is pushed down while the blob core keeps its value.
pub fn dog_filter(alpha: &RealField, sigma_narrow: f64, sigma_wide: f64) -> Result<RealField> {
    if !(sigma_narrow > 0.0 && sigma_wide > sigma_narrow) {
        return Err(Error::InvalidArgument(format!(
            "DoG needs 0 < sigma_narrow < sigma_wide, got {sigma_narrow} and {sigma_wide}"
        )));
    }
    let narrow = gaussian_blur(alpha, sigma_narrow)?;
    let wide = gaussian_blur(alpha, sigma_wide)?;
    let (h, w) = alpha.dims();
    Ok(RealField::from_fn(h, w, |y, x| {
        (alpha.get(y, x) + narrow.get(y, x) - wide.get(y, x)).clamp(0.0, 1.0)
    }))
}

/// Local average of a unit motion field over a `(2r+1)²` circular window in
/// frequency space, projected back onto the unit circle.
///
/// Averaging is done on the complex values, so phases near ±π do not wrap.
pub fn phase_smooth(t: &ComplexField, radius: usize) -> Result<ComplexField> {
    if radius == 0 {
        return Err(Error::InvalidArgument("phase smoothing radius must be >= 1".into()));
    }
    let deviation = t.max_unit_deviation();
    if deviation > UNIT_TOL {
        return Err(Error::InvalidMotionField { deviation });
    }
    let (h, w) = t.dims();
    let r = radius as isize;
    let norm = 1.0 / (2 * radius + 1) as f64;
    let rows = ComplexField::from_fn(h, w, |u, v| {
        let mut acc = Complex64::new(0.0, 0.0);
        for d in -r..=r {
            acc += t.get_wrapped(u as isize, v as isize + d);
        }
        acc * norm
    });
    let averaged = ComplexField::from_fn(h, w, |u, v| {
        let mut acc = Complex64::new(0.0, 0.0);
        for d in -r..=r {
            acc += rows.get_wrapped(u as isize + d, v as isize);
        }
        acc * norm
    });
    unit_renormalize(&averaged, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_math::phase_ramp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(h: usize, w: usize, seed: u64) -> RealField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RealField::from_fn(h, w, |_, _| rng.random::<f64>())
    }

    fn max_phase_error(a: &ComplexField, b: &ComplexField) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(p, q)| (p * q.conj()).arg().abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        for sigma in [0.5, 1.0, 1.5, 3.0] {
            let k = GaussianKernel::new(sigma).unwrap();
            assert_eq!(k.radius(), (3.0 * sigma).ceil() as usize);
            assert!((k.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let w = k.weights();
            for i in 0..w.len() {
                assert_eq!(w[i], w[w.len() - 1 - i]);
            }
        }
        assert!(GaussianKernel::new(0.0).is_err());
        assert!(GaussianKernel::new(-1.0).is_err());
    }

    #[test]
    fn blur_keeps_constants() {
        let x = RealField::filled(16, 16, 0.37);
        let y = gaussian_blur(&x, 2.0).unwrap();
        assert!(y.max_abs_diff(&x) < 1e-9);
    }

    #[test]
    fn blur_of_delta_matches_dense_convolution() {
        let n = 16;
        let mut x = RealField::zeros(n, n);
        x.set(5, 9, 1.0);
        let y = gaussian_blur(&x, 1.0).unwrap();
        // Dense 2D convolution with the outer-product kernel, written out directly.
        let k = GaussianKernel::new(1.0).unwrap();
        let r = k.radius() as isize;
        let dense = RealField::from_fn(n, n, |yy, xx| {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let wgt = k.weights()[(dy + r) as usize] * k.weights()[(dx + r) as usize];
                    acc += wgt * x.get_wrapped(yy as isize - dy, xx as isize - dx);
                }
            }
            acc
        });
        assert!(y.max_abs_diff(&dense) < 1e-6);
        let w0 = k.weights()[k.radius()];
        assert!((y.get(5, 9) - w0 * w0).abs() < 1e-12);
    }

    #[test]
    fn blur_semigroup() {
        let mut x = RealField::zeros(64, 64);
        x.set(32, 32, 1.0);
        x.set(10, 50, 0.5);
        let two = gaussian_blur(&gaussian_blur(&x, 1.5).unwrap(), 2.0).unwrap();
        let one = gaussian_blur(&x, (1.5f64 * 1.5 + 2.0 * 2.0).sqrt()).unwrap();
        assert!(two.max_abs_diff(&one) < 1e-3);
    }

    #[test]
    fn dog_on_constant_masks() {
        let zeros = RealField::zeros(16, 16);
        assert_eq!(dog_filter(&zeros, 1.0, 3.0).unwrap(), zeros);
        let ones = RealField::filled(16, 16, 1.0);
        assert!(dog_filter(&ones, 1.0, 3.0).unwrap().max_abs_diff(&ones) < 1e-12);
        assert!(dog_filter(&ones, 3.0, 1.0).is_err());
        assert!(dog_filter(&ones, 0.0, 1.0).is_err());
    }

    #[test]
    fn dog_suppresses_haze_around_blob() {
        let n = 64;
        let blob = |y: usize, x: usize| {
            let d2 = (y as f64 - 32.0).powi(2) + (x as f64 - 32.0).powi(2);
            (-d2 / (2.0 * 2.0 * 2.0)).exp()
        };
        let alpha = RealField::from_fn(n, n, |y, x| (0.1 + 0.9 * blob(y, x)).min(1.0));
        let out = dog_filter(&alpha, 1.0, 3.0).unwrap();
        // Haze ring just outside the blob.
        let ring = |f: &RealField| {
            let mut acc = 0.0;
            let mut count = 0;
            for y in 0..n {
                for x in 0..n {
                    let d = ((y as f64 - 32.0).powi(2) + (x as f64 - 32.0).powi(2)).sqrt();
                    if (6.0..10.0).contains(&d) {
                        acc += f.get(y, x);
                        count += 1;
                    }
                }
            }
            acc / count as f64
        };
        assert!(ring(&out) < ring(&alpha));
        assert!((out.get(32, 32) - alpha.get(32, 32)).abs() <= 0.05 * alpha.get(32, 32));
    }

    #[test]
    fn phase_smooth_keeps_integer_ramps() {
        let t = phase_ramp(3.0, -2.0, 32, 32);
        let s = phase_smooth(&t, 2).unwrap();
        assert!(max_phase_error(&s, &t) < 3e-2);
        let again = phase_smooth(&s, 2).unwrap();
        assert!(max_phase_error(&again, &s) < 1e-2);
    }

    #[test]
    fn phase_smooth_matches_dense_window_average() {
        let t = phase_ramp(1.0, 2.0, 16, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let jitter = ComplexField::from_fn(16, 16, |_, _| Complex64::from_polar(1.0, rng.random_range(-0.3..0.3)));
        let noisy = t.zip_map(&jitter, |a, b| a * b).unwrap();
        let fast = phase_smooth(&noisy, 1).unwrap();
        let dense = ComplexField::from_fn(16, 16, |u, v| {
            let mut acc = Complex64::new(0.0, 0.0);
            for du in -1..=1isize {
                for dv in -1..=1isize {
                    acc += noisy.get_wrapped(u as isize + du, v as isize + dv);
                }
            }
            acc / acc.norm()
        });
        assert!(fast.max_abs_diff(&dense) < 1e-9);
    }

    #[test]
    fn phase_smooth_identity_and_errors() {
        let id = ComplexField::filled(8, 8, Complex64::new(1.0, 0.0));
        assert!(phase_smooth(&id, 2).unwrap().max_abs_diff(&id) < 1e-12);
        assert!(phase_smooth(&id, 0).is_err());
        let bad = ComplexField::filled(8, 8, Complex64::new(0.5, 0.0));
        assert!(matches!(phase_smooth(&bad, 1), Err(Error::InvalidMotionField { .. })));
    }

    #[test]
    fn phase_smooth_repairs_corrupted_bin() {
        let t = phase_ramp(2.0, 1.0, 32, 32);
        let mut corrupted = t.clone();
        let (u, v) = (5, 7);
        corrupted.set(u, v, -t.get(u, v));
        let before = (corrupted.get(u, v) * t.get(u, v).conj()).arg().abs();
        let smoothed = phase_smooth(&corrupted, 2).unwrap();
        let after = (smoothed.get(u, v) * t.get(u, v).conj()).arg().abs();
        assert!(after <= 0.5 * before, "before {before}, after {after}");
    }

    #[test]
    fn filters_commute_with_roll() {
        let x = random_field(32, 32, 21);
        let a = dog_filter(&x.roll(5, -3), 1.0, 3.0).unwrap();
        let b = dog_filter(&x, 1.0, 3.0).unwrap().roll(5, -3);
        assert!(a.max_abs_diff(&b) < 1e-6);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = ComplexField::from_fn(16, 16, |_, _| {
            Complex64::from_polar(1.0, rng.random_range(-3.0..3.0))
        });
        let a = phase_smooth(&t.roll(2, 7), 2).unwrap();
        let b = phase_smooth(&t, 2).unwrap().roll(2, 7);
        assert!(a.max_abs_diff(&b) < 1e-6);
    }

    #[test]
    fn outputs_stay_in_range() {
        for seed in 0..5 {
            let x = random_field(16, 16, seed);
            assert!(dog_filter(&x, 1.0, 3.0).unwrap().within(0.0, 1.0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = ComplexField::from_fn(16, 16, |_, _| {
            Complex64::from_polar(1.0, rng.random_range(-3.0..3.0))
        });
        assert!(phase_smooth(&t, 1).unwrap().is_unit(1e-6));
    }
}
