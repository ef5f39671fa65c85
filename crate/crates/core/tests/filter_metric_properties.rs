use freqseg::field_math::{phase_ramp, ComplexField, RealField};
use freqseg::filters::{dog_filter, gaussian_blur, phase_smooth};
use freqseg::metrics::{l1, mse, ssim};
use num_complex::Complex64;
use proptest::prelude::*;

fn field(n: usize) -> impl Strategy<Value = RealField> {
    prop::collection::vec(0.0..1.0f64, n * n).prop_map(move |d| RealField::new(n, n, d).unwrap())
}

fn phases(n: usize) -> impl Strategy<Value = ComplexField> {
    prop::collection::vec(-3.2..3.2f64, n * n).prop_map(move |p| {
        ComplexField::new(n, n, p.into_iter().map(|a| Complex64::from_polar(1.0, a)).collect()).unwrap()
    })
}

fn max_phase_error(a: &ComplexField, b: &ComplexField) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x * y.conj()).arg().abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dog_stays_in_unit_range(a in field(32), s in 0.5..2.0f64, ratio in 1.2..3.0f64) {
        prop_assert!(dog_filter(&a, s, s * ratio).unwrap().within(0.0, 1.0));
    }

    #[test]
    fn phase_smooth_is_unit(t in phases(16), r in 1usize..4) {
        prop_assert!(phase_smooth(&t, r).unwrap().is_unit(1e-6));
    }

    #[test]
    fn filters_commute_with_circular_shift(a in field(32), t in phases(16), dy in -10isize..10, dx in -10isize..10) {
        let lhs = dog_filter(&a.roll(dy, dx), 1.0, 3.0).unwrap();
        let rhs = dog_filter(&a, 1.0, 3.0).unwrap().roll(dy, dx);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-6);
        let lhs = gaussian_blur(&a.roll(dy, dx), 1.3).unwrap();
        prop_assert!(lhs.max_abs_diff(&gaussian_blur(&a, 1.3).unwrap().roll(dy, dx)) < 1e-6);
        let lhs = phase_smooth(&t.roll(dy, dx), 2).unwrap();
        prop_assert!(lhs.max_abs_diff(&phase_smooth(&t, 2).unwrap().roll(dy, dx)) < 1e-6);
    }

    #[test]
    fn phase_smooth_settles_on_ramps(dy in -6i32..6, dx in -6i32..6) {
        let t = phase_ramp(dy as f64, dx as f64, 64, 64);
        let once = phase_smooth(&t, 2).unwrap();
        let twice = phase_smooth(&once, 2).unwrap();
        prop_assert!(max_phase_error(&once, &t) < 3e-2);
        prop_assert!(max_phase_error(&twice, &once) < 1e-2);
    }

    #[test]
    fn ssim_symmetric_and_reflexive(a in field(24), b in field(24)) {
        prop_assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() < 1e-9);
        prop_assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        let s = ssim(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
    }

    #[test]
    fn l1_squared_bounded_by_mse(a in field(16), b in field(16)) {
        let (l, m) = (l1(&a, &b).unwrap(), mse(&a, &b).unwrap());
        prop_assert!(l * l <= m + 1e-9);
    }

    #[test]
    fn pixel_metrics_ignore_common_shift(a in field(16), b in field(16), dy in -8isize..8, dx in -8isize..8) {
        let (ra, rb) = (a.roll(dy, dx), b.roll(dy, dx));
        prop_assert!((l1(&ra, &rb).unwrap() - l1(&a, &b).unwrap()).abs() < 1e-12);
        prop_assert!((mse(&ra, &rb).unwrap() - mse(&a, &b).unwrap()).abs() < 1e-12);
    }

    /// Valid-window SSIM is only shift invariant when no content crosses the
    /// edge of the window grid, so the content sits inside a constant border.
    #[test]
    fn ssim_ignores_common_shift_of_bordered_content(a in field(12), b in field(12), dy in -5isize..5, dx in -5isize..5) {
        let embed = |x: &RealField| RealField::from_fn(48, 48, |y, c| {
            if (18..30).contains(&y) && (18..30).contains(&c) { x.get(y - 18, c - 18) } else { 0.5 }
        });
        let (ea, eb) = (embed(&a), embed(&b));
        let base = ssim(&ea, &eb).unwrap();
        let moved = ssim(&ea.roll(dy, dx), &eb.roll(dy, dx)).unwrap();
        prop_assert!((base - moved).abs() < 1e-6);
    }
}

#[test]
fn ssim_rejects_small_inputs() {
    let a = RealField::zeros(10, 32);
    assert!(ssim(&a, &a).is_err());
}
