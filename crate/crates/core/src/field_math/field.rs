use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row-major grid of real intensities.
///
/// Frames, foreground, background and alpha all live in this type. Fields that
/// go through the FFT must have power-of-two sides; that is checked by the
/// transform, not here, so that odd-sized sprites can share the type.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

/// Dense row-major grid of complex values (spectra and motion fields).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

macro_rules! grid_common {
    ($ty:ident, $elem:ty, $zero:expr) => {
        impl $ty {
            pub fn new(height: usize, width: usize, data: Vec<$elem>) -> Result<Self> {
                if data.len() != height * width {
                    return Err(Error::BadLength {
                        height,
                        width,
                        len: data.len(),
                    });
                }
                Ok(Self {
                    height,
                    width,
                    data,
                })
            }

            pub fn filled(height: usize, width: usize, value: $elem) -> Self {
                Self {
                    height,
                    width,
                    data: vec![value; height * width],
                }
            }

            pub fn zeros(height: usize, width: usize) -> Self {
                Self::filled(height, width, $zero)
            }

            pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> $elem) -> Self {
                let mut data = Vec::with_capacity(height * width);
                for y in 0..height {
                    for x in 0..width {
                        data.push(f(y, x));
                    }
                }
                Self {
                    height,
                    width,
                    data,
                }
            }

            #[inline]
            pub fn height(&self) -> usize {
                self.height
            }

            #[inline]
            pub fn width(&self) -> usize {
                self.width
            }

            #[inline]
            pub fn dims(&self) -> (usize, usize) {
                (self.height, self.width)
            }

            #[inline]
            pub fn len(&self) -> usize {
                self.data.len()
            }

            #[inline]
            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            #[inline]
            pub fn data(&self) -> &[$elem] {
                &self.data
            }

            #[inline]
            pub fn data_mut(&mut self) -> &mut [$elem] {
                &mut self.data
            }

            pub fn into_data(self) -> Vec<$elem> {
                self.data
            }

            #[inline]
            pub fn get(&self, y: usize, x: usize) -> $elem {
                self.data[y * self.width + x]
            }

            #[inline]
            pub fn set(&mut self, y: usize, x: usize, value: $elem) {
                self.data[y * self.width + x] = value;
            }

            /// Value at a signed, wrapped-around position.
            #[inline]
            pub fn get_wrapped(&self, y: isize, x: isize) -> $elem {
                let yy = y.rem_euclid(self.height as isize) as usize;
                let xx = x.rem_euclid(self.width as isize) as usize;
                self.data[yy * self.width + xx]
            }

            pub fn map(&self, f: impl Fn($elem) -> $elem) -> Self {
                Self {
                    height: self.height,
                    width: self.width,
                    data: self.data.iter().map(|&v| f(v)).collect(),
                }
            }

            /// Elementwise combination of two equally sized fields.
            pub fn zip_map(&self, other: &Self, f: impl Fn($elem, $elem) -> $elem) -> Result<Self> {
                self.ensure_same_dims(other.dims())?;
                Ok(Self {
                    height: self.height,
                    width: self.width,
                    data: self
                        .data
                        .iter()
                        .zip(&other.data)
                        .map(|(&a, &b)| f(a, b))
                        .collect(),
                })
            }

            /// Circular shift: the value at `(y, x)` moves to `(y + dy, x + dx)`.
            pub fn roll(&self, dy: isize, dx: isize) -> Self {
                Self::from_fn(self.height, self.width, |y, x| {
                    self.get_wrapped(y as isize - dy, x as isize - dx)
                })
            }

            pub fn ensure_same_dims(&self, dims: (usize, usize)) -> Result<()> {
                if self.dims() != dims {
                    return Err(Error::dims(self.dims(), dims));
                }
                Ok(())
            }
        }
    };
}

grid_common!(RealField, f64, 0.0);
grid_common!(ComplexField, Complex64, Complex64::new(0.0, 0.0));

impl RealField {
    pub fn clamp01(&self) -> Self {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True if every value lies in `[lo, hi]`.
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.data.iter().all(|&v| v >= lo && v <= hi)
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Copy of a rectangular window; the window may wrap around the edges.
    pub fn crop_wrapped(&self, top: isize, left: isize, height: usize, width: usize) -> Self {
        Self::from_fn(height, width, |y, x| {
            self.get_wrapped(top + y as isize, left + x as isize)
        })
    }
}

impl ComplexField {
    /// Largest deviation of `|z|` from 1 over all elements.
    pub fn max_unit_deviation(&self) -> f64 {
        self.data
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        self.max_unit_deviation() <= tol
    }

    pub fn re(&self) -> RealField {
        RealField {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|z| z.re).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
