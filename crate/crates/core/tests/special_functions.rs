mod common;

use common::idx;
use driven_oscillator::quadrature::{integrate, QuadSettings};
use driven_oscillator::special;
use driven_oscillator::OscillatorParams;
use proptest::prelude::*;

#[test]
fn third_eigenstate_is_normalized() {
    let p = OscillatorParams::natural();
    let r = integrate(
        |x: f64| p.eigenstate(idx(3), x).powi(2),
        -15.0,
        15.0,
        QuadSettings::default(),
    )
    .unwrap();
    assert!((r.value - 1.0).abs() < 1e-12);
}

#[test]
fn eigenstates_are_orthonormal() {
    let p = OscillatorParams::new(1.3, 0.7, 0.9).unwrap();
    let l = 16.0 / p.alpha();
    for m in 0..=12 {
        for n in m..=12 {
            let r = integrate(
                |x: f64| {
                    let v = p.eigenstates(12, x);
                    v[m] * v[n]
                },
                -l,
                l,
                QuadSettings::default(),
            )
            .unwrap();
            let delta = if m == n { 1.0 } else { 0.0 };
            assert!((r.value - delta).abs() < 1e-10, "m={m} n={n}: {}", r.value);
        }
    }
}

proptest! {
    #[test]
    fn laguerre_bounded_by_binomial(m in 0usize..40, k in 0usize..40, x in 0.0f64..30.0) {
        // |L_m^{(k)}(x)| ≤ C(m+k, m) e^{x/2}
        let bound = special::binomial(m + k, m) * (0.5 * x).exp();
        prop_assert!(special::laguerre(m, k, x).abs() <= bound * (1.0 + 1e-10));
    }

    #[test]
    fn hermite_parity(n in 0usize..60, x in -5.0f64..5.0) {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let a = special::hermite(n, x);
        let b = sign * special::hermite(n, -x);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}
