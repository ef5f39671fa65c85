//! Real and complex 2D fields, the 2D FFT, and phase arithmetic.

mod fft;
mod field;
mod phase;

pub use fft::{fft2, fft2_complex, ifft2, ifft2_complex, REAL_RESIDUE_TOL};
pub use field::{ComplexField, RealField};
pub use phase::{
    phase_delta, phase_ramp, phase_shift, phase_shift_unclamped, signed_frequency,
    unit_renormalize, ValidityMask, CANCEL_EPS, UNIT_TOL,
};
