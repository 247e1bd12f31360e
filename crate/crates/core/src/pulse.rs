//! Driving force `j(t)` and its running integrals.
//!
//! `F(t) = ∫₀ᵗ j cos ωs ds`, `G(t) = ∫₀ᵗ j sin ωs ds` and the nested
//! `H(t) = ½ ∫₀ᵗ ds j(s) ∫₀ˢ du j(u) sin ω(u − s)` are integrated together as
//! the first-order system
//!
//! ```text
//! F' = j cos ωt,   G' = j sin ωt,   H' = ½ j (G cos ωt − F sin ωt)
//! ```
//!
//! which follows from expanding `sin ω(u − s)` inside the inner integral.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillator::OscillatorParams;

/// Gaussian bursts are cut to `center ± GAUSSIAN_CUTOFF_WIDTHS · width`,
/// where the envelope is below 1.3e-14 of its peak.
pub const GAUSSIAN_CUTOFF_WIDTHS: f64 = 8.0;

/// Relative size a sampled pulse may have at its first and last sample.
pub const SAMPLED_ENDPOINT_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_FGH_TOL: f64 = 1e-10;

const MAX_RK_STEPS: usize = 50_000_000;

/// A real driving force with compact support in `t ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Pulse {
    Zero,
    Rectangular {
        amplitude: f64,
        t_on: f64,
        t_off: f64,
    },
    GaussianBurst {
        amplitude: f64,
        center: f64,
        width: f64,
        carrier_frequency: f64,
        carrier_phase: f64,
    },
    SinusoidalBurst {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        t_on: f64,
        t_off: f64,
    },
    Sampled(SampledPulse),
}

impl Pulse {
    pub fn rectangular(amplitude: f64, t_on: f64, t_off: f64) -> Result<Self> {
        let p = Pulse::Rectangular {
            amplitude,
            t_on,
            t_off,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn gaussian_burst(
        amplitude: f64,
        center: f64,
        width: f64,
        carrier_frequency: f64,
        carrier_phase: f64,
    ) -> Result<Self> {
        let p = Pulse::GaussianBurst {
            amplitude,
            center,
            width,
            carrier_frequency,
            carrier_phase,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn sinusoidal_burst(
        amplitude: f64,
        frequency: f64,
        phase: f64,
        t_on: f64,
        t_off: f64,
    ) -> Result<Self> {
        let p = Pulse::SinusoidalBurst {
            amplitude,
            frequency,
            phase,
            t_on,
            t_off,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn sampled(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Pulse::Sampled(SampledPulse::new(times, values)?))
    }

    /// Checks the invariants of a pulse built directly from its variant
    /// (e.g. after deserialization).
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidPulse(format!(
                    "{name} must be finite, got {v}"
                )))
            }
        };
        let window = |t_on: f64, t_off: f64| {
            finite("t_on", t_on)?;
            finite("t_off", t_off)?;
            if t_on < 0.0 || t_off <= t_on {
                return Err(Error::InvalidPulse(format!(
                    "need 0 <= t_on < t_off, got [{t_on}, {t_off}]"
                )));
            }
            Ok(())
        };
        match self {
            Pulse::Zero => Ok(()),
            Pulse::Rectangular {
                amplitude,
                t_on,
                t_off,
            } => {
                finite("amplitude", *amplitude)?;
                window(*t_on, *t_off)
            }
            Pulse::GaussianBurst {
                amplitude,
                center,
                width,
                carrier_frequency,
                carrier_phase,
            } => {
                finite("amplitude", *amplitude)?;
                finite("carrier_frequency", *carrier_frequency)?;
                finite("carrier_phase", *carrier_phase)?;
                finite("center", *center)?;
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::InvalidPulse(format!(
                        "width must be positive, got {width}"
                    )));
                }
                if center - GAUSSIAN_CUTOFF_WIDTHS * width < 0.0 {
                    return Err(Error::InvalidPulse(format!(
                        "gaussian burst starts before t = 0: center {center} < {GAUSSIAN_CUTOFF_WIDTHS} widths ({width})"
                    )));
                }
                Ok(())
            }
            Pulse::SinusoidalBurst {
                amplitude,
                frequency,
                phase,
                t_on,
                t_off,
            } => {
                finite("amplitude", *amplitude)?;
                finite("frequency", *frequency)?;
                finite("phase", *phase)?;
                window(*t_on, *t_off)
            }
            Pulse::Sampled(s) => s.validate(),
        }
    }

    /// `[start, end]` outside of which `j ≡ 0`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Pulse::Zero => (0.0, 0.0),
            Pulse::Rectangular { t_on, t_off, .. } | Pulse::SinusoidalBurst { t_on, t_off, .. } => {
                (*t_on, *t_off)
            }
            Pulse::GaussianBurst { center, width, .. } => (
                center - GAUSSIAN_CUTOFF_WIDTHS * width,
                center + GAUSSIAN_CUTOFF_WIDTHS * width,
            ),
            Pulse::Sampled(s) => (s.times[0], *s.times.last().unwrap()),
        }
    }

    /// End of the pulse, `T_pulse`.
    pub fn duration(&self) -> f64 {
        self.support().1
    }

    /// Times where `j` or one of its low derivatives may jump; for sampled
    /// pulses every spline knot.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Pulse::Zero => Vec::new(),
            Pulse::Sampled(s) => s.times.clone(),
            _ => {
                let (a, b) = self.support();
                vec![a, b]
            }
        }
    }

    /// Upper bound on `|j(t)|`.
    pub fn peak_force(&self) -> f64 {
        match self {
            Pulse::Zero => 0.0,
            Pulse::Rectangular { amplitude, .. }
            | Pulse::GaussianBurst { amplitude, .. }
            | Pulse::SinusoidalBurst { amplitude, .. } => amplitude.abs(),
            Pulse::Sampled(s) => {
                // a natural spline can overshoot its samples slightly
                let peak = s.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                let curvature = s.second.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                let h = s.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
                peak + curvature * h * h / 8.0
            }
        }
    }

    /// Highest angular frequency present in the pulse's carrier.
    pub fn carrier_frequency(&self) -> f64 {
        match self {
            Pulse::GaussianBurst {
                carrier_frequency,
                width,
                ..
            } => carrier_frequency.abs() + 1.0 / width,
            Pulse::SinusoidalBurst { frequency, .. } => frequency.abs(),
            Pulse::Sampled(s) => {
                let min_dt = s
                    .times
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::INFINITY, f64::min);
                std::f64::consts::PI / min_dt
            }
            _ => 0.0,
        }
    }

    /// `j(t)`; exactly zero outside the support.
    pub fn value(&self, t: f64) -> f64 {
        let (start, end) = self.support();
        if t < start || t > end {
            return 0.0;
        }
        match self {
            Pulse::Zero => 0.0,
            Pulse::Rectangular { amplitude, .. } => *amplitude,
            Pulse::GaussianBurst {
                amplitude,
                center,
                width,
                carrier_frequency,
                carrier_phase,
            } => {
                let s = t - center;
                amplitude
                    * (-0.5 * s * s / (width * width)).exp()
                    * (carrier_frequency * s + carrier_phase).cos()
            }
            Pulse::SinusoidalBurst {
                amplitude,
                frequency,
                phase,
                ..
            } => amplitude * (frequency * t + phase).sin(),
            Pulse::Sampled(s) => s.interpolate(t),
        }
    }

    /// Mean of `j` over `[t0, t1]`, integrated piecewise between breakpoints
    /// with 4-point Gauss–Legendre.
    #[allow(clippy::excessive_precision)]
    pub fn average(&self, t0: f64, t1: f64) -> f64 {
        const NODES: [f64; 4] = [
            -0.861136311594052575223946488892809,
            -0.339981043584856264802665759103244,
            0.339981043584856264802665759103244,
            0.861136311594052575223946488892809,
        ];
        const WEIGHTS: [f64; 4] = [
            0.347854845137453857373063949221999,
            0.652145154862546142626936050778001,
            0.652145154862546142626936050778001,
            0.347854845137453857373063949221999,
        ];
        if t1 <= t0 {
            return self.value(t0);
        }
        let (start, end) = self.support();
        let lo = t0.max(start);
        let hi = t1.min(end);
        if hi <= lo {
            return 0.0;
        }
        let mut pts = vec![lo];
        pts.extend(self.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
        pts.push(hi);
        let mut total = 0.0;
        for w in pts.windows(2) {
            let c = 0.5 * (w[0] + w[1]);
            let h = 0.5 * (w[1] - w[0]);
            total += h * NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(x, wt)| wt * self.value(c + h * x))
                .sum::<f64>();
        }
        total / (t1 - t0)
    }

    /// The same pulse with every force value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Pulse {
        let mut p = self.clone();
        match &mut p {
            Pulse::Zero => {}
            Pulse::Rectangular { amplitude, .. }
            | Pulse::GaussianBurst { amplitude, .. }
            | Pulse::SinusoidalBurst { amplitude, .. } => *amplitude *= factor,
            Pulse::Sampled(s) => {
                s.values.iter_mut().for_each(|v| *v *= factor);
                s.second.iter_mut().for_each(|v| *v *= factor);
            }
        }
        p
    }
}

/// Tabulated force with natural cubic spline interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampledTable", into = "SampledTable")]
pub struct SampledPulse {
    times: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampledTable {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<SampledTable> for SampledPulse {
    type Error = Error;
    fn try_from(t: SampledTable) -> Result<Self> {
        SampledPulse::new(t.times, t.values)
    }
}

impl From<SampledPulse> for SampledTable {
    fn from(s: SampledPulse) -> Self {
        SampledTable {
            times: s.times,
            values: s.values,
        }
    }
}

impl SampledPulse {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let mut s = Self {
            times,
            values,
            second: Vec::new(),
        };
        s.validate()?;
        s.second = natural_spline_second_derivatives(&s.times, &s.values);
        Ok(s)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() {
            return Err(Error::InvalidPulse(format!(
                "{} times but {} values",
                self.times.len(),
                self.values.len()
            )));
        }
        if self.times.len() < 2 {
            return Err(Error::InvalidPulse("need at least two samples".into()));
        }
        if self
            .times
            .iter()
            .chain(&self.values)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidPulse("samples must be finite".into()));
        }
        if self.times[0] < 0.0 {
            return Err(Error::InvalidPulse(format!(
                "first sample time {} is negative",
                self.times[0]
            )));
        }
        if let Some(w) = self.times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPulse(format!(
                "sample times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let peak = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let limit = SAMPLED_ENDPOINT_TOLERANCE * peak;
        let (first, last) = (self.values[0], *self.values.last().unwrap());
        if first.abs() > limit || last.abs() > limit {
            return Err(Error::InvalidPulse(format!(
                "sampled pulse must vanish at its ends (|j| <= {limit:e}), got {first:e} and {last:e}"
            )));
        }
        Ok(())
    }

    fn interpolate(&self, t: f64) -> f64 {
        let n = self.times.len();
        let k = match self.times.partition_point(|&x| x <= t) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let (x0, x1) = (self.times[k], self.times[k + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        a * self.values[k]
            + b * self.values[k + 1]
            + ((a * a * a - a) * self.second[k] + (b * b * b - b) * self.second[k + 1]) * h * h
                / 6.0
    }
}

fn natural_spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}

/// `F`, `G`, `H` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PulseIntegrals {
    pub t: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

impl PulseIntegrals {
    /// Integrals of the zero pulse at time `t`.
    pub fn free(t: f64) -> Self {
        Self {
            t,
            ..Self::default()
        }
    }

    pub fn displacement(&self, params: &OscillatorParams) -> Displacement {
        displacement(self, params)
    }

    /// `H/(α²ħ²)`, the dimensionless global phase.
    pub fn phase_h(&self, params: &OscillatorParams) -> f64 {
        let ah = params.alpha() * params.hbar();
        self.h / (ah * ah)
    }
}

/// Complex displacement `r = (F + iG)/(√2 αħ)` and `R = |r|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub r: Complex64,
    pub r_sq: f64,
}

impl Displacement {
    pub fn zero() -> Self {
        Self {
            r: Complex64::new(0.0, 0.0),
            r_sq: 0.0,
        }
    }
}

pub fn displacement(integrals: &PulseIntegrals, params: &OscillatorParams) -> Displacement {
    let scale = std::f64::consts::SQRT_2 * params.alpha() * params.hbar();
    let r = Complex64::new(integrals.f, integrals.g) / scale;
    let r_sq = (integrals.f * integrals.f + integrals.g * integrals.g) / (scale * scale);
    Displacement { r, r_sq }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn fgh_rhs(pulse: &Pulse, omega: f64, t: f64, y: &[f64; 3]) -> [f64; 3] {
    let j = pulse.value(t);
    if j == 0.0 {
        return [0.0; 3];
    }
    let (s, c) = (omega * t).sin_cos();
    [j * c, j * s, 0.5 * j * (y[1] * c - y[0] * s)]
}

/// Integrates `(F, G, H)` across `[t0, t1]`, on which `j` is smooth.
#[allow(clippy::too_many_arguments)]
fn rk_segment(
    pulse: &Pulse,
    omega: f64,
    t0: f64,
    t1: f64,
    y: &mut [f64; 3],
    h_guess: &mut f64,
    tol: f64,
    abs_scale: &[f64; 3],
    steps: &mut usize,
) -> Result<()> {
    let mut t = t0;
    let mut h = h_guess.min(t1 - t0);
    let mut k = [[0.0; 3]; 7];
    k[0] = fgh_rhs(pulse, omega, t, y);
    while t < t1 {
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            let mut ys = *y;
            for (i, yi) in ys.iter_mut().enumerate() {
                *yi += h * (0..s).map(|r| A[s][r] * k[r][i]).sum::<f64>();
            }
            k[s] = fgh_rhs(pulse, omega, t + C[s] * h, &ys);
        }
        let mut y5 = *y;
        let mut err = 0.0_f64;
        for i in 0..3 {
            let d5: f64 = (0..7).map(|s| B5[s] * k[s][i]).sum();
            let d4: f64 = (0..7).map(|s| B4[s] * k[s][i]).sum();
            y5[i] += h * d5;
            let scale = tol * (abs_scale[i] + y[i].abs().max(y5[i].abs()));
            err = err.max((h * (d5 - d4)).abs() / scale);
        }
        *steps += 1;
        if *steps > MAX_RK_STEPS {
            return Err(Error::StepControl { t, step: h, tol });
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            *y = y5;
            k[0] = k[6];
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !last {
                h *= factor;
                *h_guess = h;
            }
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepControl { t, step: h, tol });
            }
        }
    }
    Ok(())
}

/// `F`, `G`, `H` at each of the increasing times `t_samples`, integrated with
/// an adaptive Dormand–Prince 5(4) pair at local tolerance `tol`, relative to
/// the pulse's impulse scale `max|j| · duration`.
///
/// Steps are clipped to land on every sample time and every pulse
/// breakpoint, so discontinuous pulses never straddle a step.
pub fn integrate_fgh(
    pulse: &Pulse,
    params: &OscillatorParams,
    t_samples: &[f64],
    tol: f64,
) -> Result<Vec<PulseIntegrals>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if let Some(&t) = t_samples.first() {
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sample time {t} is negative"
            )));
        }
    }
    if let Some(w) = t_samples.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(format!(
            "sample times must be non-decreasing ({} then {})",
            w[0], w[1]
        )));
    }
    let omega = params.omega();
    let (start, end) = pulse.support();
    let mut stops: Vec<f64> = pulse.breakpoints();
    stops.extend_from_slice(t_samples);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    // absolute error scales follow the pulse, so that j → λj with λ a power
    // of two reproduces the step sequence bit for bit
    let impulse = pulse.peak_force() * (end - start).max(1.0 / omega);
    let abs_scale = [impulse, impulse, impulse * impulse / params.hbar()];
    let fastest = omega.max(pulse.carrier_frequency());
    let mut h_guess = 0.05 / fastest;
    let mut y = [0.0; 3];
    let mut t = 0.0;
    let mut steps = 0;
    let mut out = Vec::with_capacity(t_samples.len());
    let mut next_sample = 0;
    for stop in stops {
        if stop > t {
            // nothing accumulates outside the support
            let lo = t.max(start);
            let hi = stop.min(end);
            if hi > lo {
                rk_segment(
                    pulse,
                    omega,
                    lo,
                    hi,
                    &mut y,
                    &mut h_guess,
                    tol,
                    &abs_scale,
                    &mut steps,
                )?;
            }
            t = stop;
        }
        while next_sample < t_samples.len() && t_samples[next_sample] <= t {
            out.push(PulseIntegrals {
                t: t_samples[next_sample],
                f: y[0],
                g: y[1],
                h: y[2],
            });
            next_sample += 1;
        }
    }
    while next_sample < t_samples.len() {
        out.push(PulseIntegrals {
            t: t_samples[next_sample],
            f: y[0],
            g: y[1],
            h: y[2],
        });
        next_sample += 1;
    }
    Ok(out)
}

/// Integrals at a single time.
pub fn integrals_at(
    pulse: &Pulse,
    params: &OscillatorParams,
    t: f64,
    tol: f64,
) -> Result<PulseIntegrals> {
    Ok(integrate_fgh(pulse, params, &[t], tol)?[0])
}
