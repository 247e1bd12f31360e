#![allow(dead_code)]

use driven_oscillator::{BasisIndex, OscillatorParams, Pulse, Truncation};

pub fn idx(n: usize) -> BasisIndex {
    Truncation::default().index(n).unwrap()
}

/// Pulses exercised by every catalog-wide property.
pub fn catalog() -> Vec<(&'static str, Pulse)> {
    let times: Vec<f64> = (0..=120).map(|i| 0.05 * i as f64).collect();
    let values: Vec<f64> = times
        .iter()
        .map(|&t| 0.6 * (std::f64::consts::PI * t / 6.0).sin().powi(2) * (2.0 * t).cos())
        .collect();
    vec![
        ("rectangular", Pulse::rectangular(0.5, 1.0, 4.0).unwrap()),
        (
            "gaussian_burst",
            Pulse::gaussian_burst(0.8, 5.0, 0.6, 1.3, 0.4).unwrap(),
        ),
        (
            "sinusoidal_burst",
            Pulse::sinusoidal_burst(0.4, 2.5, 0.3, 0.5, 5.5).unwrap(),
        ),
        ("sampled", Pulse::sampled(times, values).unwrap()),
    ]
}

pub fn natural() -> OscillatorParams {
    OscillatorParams::natural()
}
