//! Closed-form solution of the driven oscillator.
//!
//! Every quantity here is a function of the pulse integrals `F`, `G`, `H` at
//! a single time; see [`crate::pulse`].

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::oscillator::{BasisIndex, OscillatorParams};
use crate::pulse::{Displacement, PulseIntegrals};
use crate::special;

/// The kernel refuses times with `|sin ωt|` at or below this.
pub const SINGULAR_SIN_TOL: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `sin ωt`, `cos ωt` and the number of kernel caustics passed, `⌊ωt/π⌋`.
#[derive(Debug, Clone, Copy)]
struct KernelClock {
    sin: f64,
    cos: f64,
    caustics: f64,
}

impl KernelClock {
    fn new(t: f64, params: &OscillatorParams) -> Result<Self> {
        let omega_t = params.omega() * t;
        if !(t > 0.0) {
            return Err(Error::SingularTime {
                omega_t,
                sin_abs: omega_t.sin().abs(),
            });
        }
        let (sin, cos) = omega_t.sin_cos();
        if sin.abs() <= SINGULAR_SIN_TOL {
            return Err(Error::SingularTime {
                omega_t,
                sin_abs: sin.abs(),
            });
        }
        Ok(Self {
            sin,
            cos,
            caustics: (omega_t / PI).floor(),
        })
    }

    fn cot(&self) -> f64 {
        self.cos / self.sin
    }

    /// `log(2πi sin ωt)`, principal on `0 < ωt < π` and continued past each
    /// zero of `sin ωt` by a phase of `π`.
    fn log_norm(&self) -> Complex64 {
        Complex64::new(
            (2.0 * PI * self.sin.abs()).ln(),
            FRAC_PI_2 + self.caustics * PI,
        )
    }
}

/// Coefficients of the Gaussian ansatz
/// `Ψ = exp(−A α²x²/2 + iBαx − C/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcCoefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl AbcCoefficients {
    /// Value of the ansatz at `x`.
    pub fn evaluate(&self, x: f64, params: &OscillatorParams) -> Complex64 {
        let ax = params.alpha() * x;
        (-self.a * ax * ax * 0.5 + I * self.b * ax - self.c * 0.5).exp()
    }
}

/// The singular solution of `A' = iω(1 − A²)`, `B' = −iωAB − j/(ħα)`,
/// `C' = iω(A + B²)` describing a kernel that starts as `δ(α(x − y))`.
pub fn abc_coefficients(
    t: f64,
    y: f64,
    integrals: &PulseIntegrals,
    params: &OscillatorParams,
) -> Result<AbcCoefficients> {
    let clock = KernelClock::new(t, params)?;
    let alpha = params.alpha();
    let hbar = params.hbar();
    let (f, g, h) = (integrals.f, integrals.g, integrals.h);
    let cot = clock.cot();
    let a = Complex64::new(0.0, -cot);
    let b = Complex64::new(-(g / hbar + alpha * alpha * y) / (alpha * clock.sin), 0.0);
    let a2h2 = alpha * alpha * hbar * hbar;
    let phase = -alpha * alpha * y * y * cot
        - (2.0 * y + g / (alpha * alpha * hbar)) * (g * cot - f) / hbar
        + 2.0 * h / a2h2;
    let c = clock.log_norm() + I * phase;
    Ok(AbcCoefficients { a, b, c })
}

/// Shifts `x₀ = −G`, `y₀ = G cos ωt − F sin ωt` and
/// `χ = G² cos ωt − (FG + 2H) sin ωt` of the closed-form kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorShift {
    pub x0: f64,
    pub y0: f64,
    pub chi: f64,
}

impl PropagatorShift {
    pub fn new(t: f64, integrals: &PulseIntegrals, params: &OscillatorParams) -> Self {
        let (s, c) = (params.omega() * t).sin_cos();
        let (f, g, h) = (integrals.f, integrals.g, integrals.h);
        Self {
            x0: -g,
            y0: g * c - f * s,
            chi: g * g * c - (f * g + 2.0 * h) * s,
        }
    }
}

/// Kernel `Ψ(x, t, y)` evolving a state from time 0 to `t`, normalized so
/// that `∫ Ψ(x, t, y) φ(y) dy` is the evolved wavefunction.
///
/// Built from [`abc_coefficients`] as `α · exp(−Aα²x²/2 + iBαx − C/2)`.
pub fn propagator(
    x: f64,
    t: f64,
    y: f64,
    integrals: &PulseIntegrals,
    params: &OscillatorParams,
) -> Result<Complex64> {
    let abc = abc_coefficients(t, y, integrals, params)?;
    Ok(abc.evaluate(x, params) * params.alpha())
}

/// The same kernel written in terms of [`PropagatorShift`]:
///
/// `α/sqrt(2πi sin ωt) · exp{ i/sin ωt [α²((x²+y²)/2 cos ωt − xy)
///   + (x x₀ + y y₀)/ħ + χ/(2α²ħ²)] }`.
pub fn propagator_closed_form(
    x: f64,
    t: f64,
    y: f64,
    integrals: &PulseIntegrals,
    params: &OscillatorParams,
) -> Result<Complex64> {
    let clock = KernelClock::new(t, params)?;
    let shift = PropagatorShift::new(t, integrals, params);
    let alpha = params.alpha();
    let hbar = params.hbar();
    let a2 = alpha * alpha;
    let bracket = a2 * (0.5 * (x * x + y * y) * clock.cos - x * y)
        + (x * shift.x0 + y * shift.y0) / hbar
        + shift.chi / (2.0 * a2 * hbar * hbar);
    let prefactor = (-0.5 * clock.log_norm()).exp() * alpha;
    Ok(prefactor * Complex64::new(0.0, bracket / clock.sin).exp())
}

/// Interaction-picture amplitude `a[n][m]` from initial state `m` to final
/// state `n`:
///
/// * `n ≥ m`: `sqrt(m!/n!) e^{−R/2 − iH/(α²ħ²)} (−ir)^{n−m} L_m^{(n−m)}(R)`
/// * `n < m`: `sqrt(n!/m!) e^{−R/2 − iH/(α²ħ²)} (−ir*)^{m−n} L_n^{(m−n)}(R)`
///
/// The free eigenphase `e^{−iωt(n+½)}` is not included.
pub fn transition_amplitude(
    n: BasisIndex,
    m: BasisIndex,
    disp: &Displacement,
    integrals: &PulseIntegrals,
    params: &OscillatorParams,
) -> Complex64 {
    amplitude(n.get(), m.get(), disp, integrals.phase_h(params))
}

fn amplitude(n: usize, m: usize, disp: &Displacement, phase_h: f64) -> Complex64 {
    let (lo, hi) = if n >= m { (m, n) } else { (n, m) };
    let k = hi - lo;
    let r_abs = disp.r.norm();
    if k > 0 && r_abs == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let lag = special::laguerre(lo, k, disp.r_sq);
    if lag == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let log_mag = special::log_factorial_ratio(lo, hi) - 0.5 * disp.r_sq
        + if k > 0 { k as f64 * r_abs.ln() } else { 0.0 }
        + lag.abs().ln();
    // −ir for upward transitions, −ir* for downward ones
    let arg = if n >= m { disp.r.arg() } else { -disp.r.arg() };
    let phase = k as f64 * (arg - FRAC_PI_2) - phase_h;
    Complex64::from_polar(log_mag.exp() * lag.signum(), phase)
}

/// Amplitudes `a[n][m]` for `0 ≤ n, m ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    order: usize,
    entries: Vec<Complex64>,
    pub r_sq: f64,
    pub phase_h: f64,
    tail_bounds: Vec<f64>,
}

impl TransitionMatrix {
    /// Truncation order `N`; the matrix is `(N+1) × (N+1)`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.entries[n * (self.order + 1) + m]
    }

    pub fn probability(&self, n: usize, m: usize) -> f64 {
        self.get(n, m).norm_sqr()
    }

    /// `Σ_n |a[n][m]|²` for `n ≤ N`.
    pub fn column_sum(&self, m: usize) -> f64 {
        (0..=self.order).map(|n| self.probability(n, m)).sum()
    }

    /// `|1 − Σ_n |a[n][m]|²|`.
    pub fn unitarity_defect(&self, m: usize) -> f64 {
        (1.0 - self.column_sum(m)).abs()
    }

    /// Analytic upper bound on the probability column `m` loses above `N`.
    pub fn tail_bound(&self, m: usize) -> f64 {
        self.tail_bounds[m]
    }

    /// Rows of `|a[n][m]|²`, indexed `[n][m]`.
    pub fn probabilities(&self) -> Vec<Vec<f64>> {
        (0..=self.order)
            .map(|n| (0..=self.order).map(|m| self.probability(n, m)).collect())
            .collect()
    }
}

/// Fills the `(N+1)²` amplitudes; entries are independent so the fill fans
/// out over `exec`.
pub fn transition_matrix(
    order: BasisIndex,
    disp: &Displacement,
    integrals: &PulseIntegrals,
    params: &OscillatorParams,
    exec: Execution,
) -> TransitionMatrix {
    let order = order.get();
    let size = order + 1;
    let phase_h = integrals.phase_h(params);
    let entries = exec.map_range(size * size, |idx| {
        amplitude(idx / size, idx % size, disp, phase_h)
    });
    let tail_bounds = (0..size)
        .map(|m| column_tail_bound(m, order, disp.r_sq))
        .collect();
    TransitionMatrix {
        order,
        entries,
        r_sq: disp.r_sq,
        phase_h,
        tail_bounds,
    }
}

/// Upper bound on `Σ_{n > N} |a[n][m]|²`.
///
/// Column 0 is exactly the Poisson tail. For `m > 0` the bound follows from
/// `|L_m^{(k)}(R)| ≤ C(m+k, m) e^{R/2}`, giving
/// `Σ_{n>N} C(n, m) R^{n−m} / (n−m)!`.
pub fn column_tail_bound(m: usize, order: usize, r_sq: f64) -> f64 {
    if m > order {
        return 1.0;
    }
    if r_sq == 0.0 {
        return 0.0;
    }
    let ln_r = r_sq.ln();
    let term = |n: usize| -> f64 {
        if m == 0 {
            n as f64 * ln_r - r_sq - special::ln_factorial(n)
        } else {
            special::binomial(n, m).ln() + (n - m) as f64 * ln_r - special::ln_factorial(n - m)
        }
    };
    let mut total = 0.0;
    let mut n = order + 1;
    loop {
        let v = term(n).exp();
        total += v;
        // terms decrease monotonically once n − m exceeds R + m
        if (n - m) as f64 > r_sq + m as f64 + 1.0 && v < 1e-18 * total.max(1e-300) {
            break;
        }
        if n > order + 100_000 {
            break;
        }
        n += 1;
    }
    total.min(1.0)
}

/// `Rⁿ e^{−R} / n!` for `n = 0..=N`, computed in log space.
pub fn ground_state_distribution(r_sq: f64, order: usize) -> Result<Vec<f64>> {
    if !(r_sq >= 0.0) {
        return Err(Error::NegativeArgument(r_sq));
    }
    if r_sq == 0.0 {
        let mut v = vec![0.0; order + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    let ln_r = r_sq.ln();
    Ok((0..=order)
        .map(|n| (n as f64 * ln_r - r_sq - special::ln_factorial(n)).exp())
        .collect())
}

/// Wave packet grown from the ground state by the pulse:
/// `Ψ(x, t) = (α²/π)^{1/4} exp[−α²(x − x₀)²/2 − χ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentPacket {
    /// Complex center `x₀(t)`.
    pub x0: Complex64,
    /// Complex log-amplitude `χ(t)`, including the zero-point phase `iωt/2`.
    pub chi: Complex64,
    pub expectation_x: f64,
    pub expectation_p: f64,
    /// `Δx² = 1/(2α²)`, independent of time.
    pub width_sq: f64,
    alpha: f64,
}

impl CoherentPacket {
    pub fn new(t: f64, integrals: &PulseIntegrals, params: &OscillatorParams) -> Self {
        let alpha = params.alpha();
        let hbar = params.hbar();
        let a2 = alpha * alpha;
        let (f, g, h) = (integrals.f, integrals.g, integrals.h);
        let (s, c) = (params.omega() * t).sin_cos();
        let z = Complex64::new(f, g);
        let rot = Complex64::new(c, -s);
        let x0 = -I * z * rot / (hbar * a2);
        let chi = (z * (f * c + g * s) * rot + I * 2.0 * h) / (2.0 * a2 * hbar * hbar)
            + I * 0.5 * params.omega() * t;
        let (mean_x, mean_p) = expectations(t, integrals, params);
        Self {
            x0,
            chi,
            expectation_x: mean_x,
            expectation_p: mean_p,
            width_sq: 0.5 / a2,
            alpha,
        }
    }

    pub fn value(&self, x: f64) -> Complex64 {
        let a2 = self.alpha * self.alpha;
        let d = x - self.x0;
        (a2 / PI).powf(0.25) * (-(d * d) * (0.5 * a2) - self.chi).exp()
    }
}

/// `Ψ(x, t)` of [`CoherentPacket`].
pub fn coherent_packet(
    x: f64,
    t: f64,
    integrals: &PulseIntegrals,
    params: &OscillatorParams,
) -> Complex64 {
    CoherentPacket::new(t, integrals, params).value(x)
}

/// `⟨x⟩ = (G cos ωt − F sin ωt)/(α²ħ)` and `⟨p⟩ = −(F cos ωt + G sin ωt)`.
pub fn expectations(t: f64, integrals: &PulseIntegrals, params: &OscillatorParams) -> (f64, f64) {
    let (s, c) = (params.omega() * t).sin_cos();
    let (f, g) = (integrals.f, integrals.g);
    let a2 = params.alpha() * params.alpha();
    ((g * c - f * s) / (a2 * params.hbar()), -(f * c + g * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::Truncation;

    fn idx(n: usize) -> BasisIndex {
        Truncation::default().index(n).unwrap()
    }

    #[test]
    fn quarter_period_free_coefficients() {
        let p = OscillatorParams::natural();
        let abc = abc_coefficients(FRAC_PI_2, 0.0, &PulseIntegrals::free(FRAC_PI_2), &p).unwrap();
        assert!(abc.a.norm() < 1e-15);
        assert!(abc.b.norm() < 1e-15);
    }

    #[test]
    fn singular_times_are_refused() {
        let p = OscillatorParams::natural();
        assert!(matches!(
            abc_coefficients(PI, 0.0, &PulseIntegrals::free(PI), &p),
            Err(Error::SingularTime { .. })
        ));
        assert!(propagator(0.0, 0.0, 0.0, &PulseIntegrals::free(0.0), &p).is_err());
        let near = abc_coefficients(1e-7, 0.0, &PulseIntegrals::free(1e-7), &p).unwrap();
        assert!(near.a.norm() > 1e6);
    }

    #[test]
    fn free_kernel_modulus_at_quarter_period() {
        let p = OscillatorParams::natural();
        let ints = PulseIntegrals::free(FRAC_PI_2);
        for &(x, y) in &[(0.0, 0.0), (1.3, -0.4), (-2.0, 3.0)] {
            let k = propagator(x, FRAC_PI_2, y, &ints, &p).unwrap();
            assert!((k.norm_sqr() - 1.0 / (2.0 * PI)).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_abc_kernel() {
        let p = OscillatorParams::new(1.7, 0.8, 1.2).unwrap();
        let ints = PulseIntegrals {
            t: 2.3,
            f: 0.4,
            g: -0.9,
            h: 0.21,
        };
        for &t in &[0.7, 2.3, 5.1, 9.4] {
            for &(x, y) in &[(0.1, 0.2), (-1.0, 0.7), (1.9, -1.4)] {
                let a = propagator(x, t, y, &ints, &p).unwrap();
                let b = propagator_closed_form(x, t, y, &ints, &p).unwrap();
                assert!((a - b).norm() < 1e-12 * a.norm(), "t={t} x={x} y={y}");
            }
        }
    }

    #[test]
    fn zero_pulse_gives_identity() {
        let p = OscillatorParams::natural();
        let ints = PulseIntegrals::free(3.0);
        let m = transition_matrix(
            idx(8),
            &Displacement::zero(),
            &ints,
            &p,
            Execution::Sequential,
        );
        for n in 0..=8 {
            for k in 0..=8 {
                let expect = if n == k { 1.0 } else { 0.0 };
                assert!((m.get(n, k) - expect).norm() < 1e-15);
            }
            assert_eq!(m.tail_bound(n), 0.0);
        }
    }

    #[test]
    fn ground_column_is_poisson() {
        let p = OscillatorParams::natural();
        let ints = PulseIntegrals {
            t: 4.0,
            f: 1.1,
            g: -0.6,
            h: 0.3,
        };
        let d = ints.displacement(&p);
        let dist = ground_state_distribution(d.r_sq, 30).unwrap();
        for (n, expected) in dist.iter().enumerate() {
            let a = transition_amplitude(idx(n), idx(0), &d, &ints, &p);
            assert!((a.norm_sqr() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn ground_state_distribution_examples() {
        assert_eq!(
            ground_state_distribution(0.0, 4).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0, 0.0]
        );
        let d = ground_state_distribution(1.0, 3).unwrap();
        assert!((d[0] - (-1.0f64).exp()).abs() < 1e-16);
        assert!((d[0] - 0.367879).abs() < 1e-6);
        assert!(ground_state_distribution(-1.0, 3).is_err());
        for &r in &[1.0, 4.0, 25.0] {
            let order = (r + 10.0 * f64::sqrt(r)).ceil() as usize;
            let s: f64 = ground_state_distribution(r, order).unwrap().iter().sum();
            assert!(s >= 1.0 - 1e-8);
        }
    }

    #[test]
    fn free_packet_is_ground_state_density() {
        let p = OscillatorParams::new(2.0, 1.5, 1.0).unwrap();
        for &t in &[0.0, 0.3, 2.0] {
            let ints = PulseIntegrals::free(t);
            for &x in &[-1.0, 0.0, 0.6] {
                let psi0 = p.eigenstate(idx(0), x);
                assert!((coherent_packet(x, t, &ints, &p).norm_sqr() - psi0 * psi0).abs() < 1e-14);
            }
            assert_eq!(expectations(t, &ints, &p), (0.0, 0.0));
        }
    }

    #[test]
    fn tail_bound_is_tiny_for_modest_displacement() {
        for m in 0..=10 {
            assert!(column_tail_bound(m, 60, 4.0) < 1e-12);
        }
        assert!(column_tail_bound(0, 2, 4.0) > 0.5);
    }
}
