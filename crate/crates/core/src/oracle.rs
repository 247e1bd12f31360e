//! Brute-force oracles for the exact solution.
//!
//! * [`evolve`]: Crank–Nicolson integration of the driven Schrödinger
//!   equation on a uniform grid with Dirichlet walls and second-order finite
//!   differences.
//! * [`transition_amplitude_quadrature`]: the overlap double integral
//!   `∫∫ ψ_n(x) Ψ(x, t, y) ψ_m(y) dx dy` evaluated by adaptive cubature.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::exec::Execution;
use crate::oscillator::{BasisIndex, OscillatorParams};
use crate::pulse::{self, Pulse, PulseIntegrals};
use crate::quadrature::{self, QuadSettings};

/// Initial states must fall below this fraction of their peak density at
/// the walls.
pub const EDGE_DENSITY_RATIO: f64 = 1e-12;
/// Evolution aborts if a snapshot has more density than this next to a wall.
pub const BOUNDARY_DENSITY_LIMIT: f64 = 1e-8;
/// Minimum grid points across one lobe of the highest projected eigenstate.
pub const POINTS_PER_LOBE: f64 = 8.0;
/// Half-width, in units of `1/α`, of the overlap quadrature box.
pub const QUADRATURE_HALF_WIDTH: f64 = 10.0;
/// Fewest time steps per period of the oscillator or the pulse carrier.
pub const MIN_STEPS_PER_PERIOD: f64 = 40.0;
/// Largest quantum number accepted by [`transition_amplitude_quadrature`].
pub const QUADRATURE_MAX_INDEX: usize = 8;

/// Uniform spatial grid and nominal time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    dt: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, dt: f64) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::InvalidParameter(format!(
                "need at least 3 grid points, got {n_points}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidParameter(format!(
                "invalid box [{x_min}, {x_max}]"
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
            dt,
        })
    }

    /// `[−12/α, 12/α]` with 2048 points and 2000 steps per period.
    pub fn default_for(params: &OscillatorParams) -> Self {
        let l = 12.0 / params.alpha();
        Self {
            x_min: -l,
            x_max: l,
            n_points: 2048,
            dt: params.period() / 2000.0,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn with_dt(self, dt: f64) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.n_points, dt)
    }

    pub fn with_points(self, n_points: usize) -> Result<Self> {
        Self::new(self.x_min, self.x_max, n_points, self.dt)
    }
}

/// Samples of `Ψ(x, t)` on a [`Grid`] at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    grid: Grid,
    values: Vec<Complex64>,
    time: f64,
}

impl GridWavefunction {
    /// Wraps samples; the density at both walls must be below
    /// [`EDGE_DENSITY_RATIO`] of the peak density.
    pub fn new(grid: Grid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::InvalidParameter(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.n_points
            )));
        }
        let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.norm_sqr()));
        let edge = values[0]
            .norm_sqr()
            .max(values[grid.n_points - 1].norm_sqr());
        if !(peak.is_finite()) || edge > EDGE_DENSITY_RATIO * peak {
            return Err(Error::InvalidParameter(format!(
                "box too small: edge density {edge:e} vs peak {peak:e}"
            )));
        }
        Ok(Self { grid, values, time })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: Grid, time: f64, f: F) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values, time)
    }

    /// Oscillator eigenstate `ψ_n` sampled on the grid at `t = 0`.
    pub fn eigenstate(grid: Grid, params: &OscillatorParams, n: BasisIndex) -> Result<Self> {
        Self::from_fn(grid, 0.0, |x| Complex64::new(params.eigenstate(n, x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `Σ |ψ_i|² Δx` (trapezoid; the wall samples are zero).
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    fn edge_density(&self) -> f64 {
        let n = self.values.len();
        [0, 1, n - 2, n - 1]
            .iter()
            .map(|&i| self.values[i].norm_sqr())
            .fold(0.0, f64::max)
    }
}

/// Crank–Nicolson stepper for `iħ∂ₜψ = [−ħ²/2m ∂ₓ² + mω²x²/2 + x j(t)] ψ`.
struct CrankNicolson<'a> {
    params: &'a OscillatorParams,
    pulse: &'a Pulse,
    xs: Vec<f64>,
    trap: Vec<f64>,
    kinetic_diag: f64,
    kinetic_off: f64,
    // scratch for the Thomas sweep
    c_prime: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl<'a> CrankNicolson<'a> {
    fn new(grid: &Grid, params: &'a OscillatorParams, pulse: &'a Pulse) -> Self {
        let dx = grid.spacing();
        let xs = grid.points();
        let trap = xs.iter().map(|&x| params.potential(x)).collect();
        let k = params.hbar() * params.hbar() / (2.0 * params.mass() * dx * dx);
        let n = grid.n_points;
        Self {
            params,
            pulse,
            xs,
            trap,
            kinetic_diag: 2.0 * k,
            kinetic_off: -k,
            c_prime: vec![Complex64::new(0.0, 0.0); n],
            rhs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// One step of length `dt` from `t`; the linear potential uses the mean
    /// force over the step.
    fn step(&mut self, psi: &mut [Complex64], t: f64, dt: f64) {
        let n = psi.len();
        let force = self.pulse.average(t, t + dt);
        let tau = Complex64::new(0.0, dt / (2.0 * self.params.hbar()));
        let off = tau * self.kinetic_off;
        let diag = |i: usize| tau * (self.kinetic_diag + self.trap[i] + self.xs[i] * force);

        // rhs = (1 − iτH) ψ on interior points; walls stay zero
        for i in 1..n - 1 {
            self.rhs[i] = psi[i] - diag(i) * psi[i] - off * (psi[i - 1] + psi[i + 1]);
        }
        // (1 + iτH) ψ' = rhs
        let one = Complex64::new(1.0, 0.0);
        let mut prev_c = Complex64::new(0.0, 0.0);
        let mut prev_d = Complex64::new(0.0, 0.0);
        for i in 1..n - 1 {
            let b = one + diag(i);
            let denom = b - off * prev_c;
            let inv = denom.inv();
            prev_c = off * inv;
            prev_d = (self.rhs[i] - off * prev_d) * inv;
            self.c_prime[i] = prev_c;
            self.rhs[i] = prev_d;
        }
        psi[n - 1] = Complex64::new(0.0, 0.0);
        psi[n - 2] = self.rhs[n - 2];
        for i in (1..n - 2).rev() {
            psi[i] = self.rhs[i] - self.c_prime[i] * psi[i + 1];
        }
        psi[0] = Complex64::new(0.0, 0.0);
    }
}

/// Evolves `initial` to `t_final`, calling `observe` with the state at each
/// observer time in `(initial.time, t_final]` and finally at `t_final`.
///
/// Observer times and pulse breakpoints split the run into intervals, each
/// covered by equal steps no longer than the grid's `dt`.
pub fn evolve_with<F>(
    initial: &GridWavefunction,
    pulse: &Pulse,
    params: &OscillatorParams,
    t_final: f64,
    observers: &[f64],
    observe: F,
) -> Result<()>
where
    F: FnMut(&GridWavefunction),
{
    evolve_with_substeps(initial, pulse, params, t_final, observers, 1, observe)
}

/// As [`evolve_with`], with every step of the nominal schedule split into
/// `substeps` equal parts. Runs that differ only in `substeps` use step
/// sizes in exactly that ratio, which Richardson extrapolation relies on.
pub fn evolve_with_substeps<F>(
    initial: &GridWavefunction,
    pulse: &Pulse,
    params: &OscillatorParams,
    t_final: f64,
    observers: &[f64],
    substeps: usize,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(&GridWavefunction),
{
    if !(t_final > initial.time) {
        return Err(Error::InvalidParameter(format!(
            "t_final {t_final} must exceed the initial time {}",
            initial.time
        )));
    }
    let fastest = params.omega().max(pulse.carrier_frequency());
    let max_dt = 2.0 * PI / (MIN_STEPS_PER_PERIOD * fastest);
    if initial.grid.dt > max_dt {
        return Err(Error::InvalidParameter(format!(
            "time step {} exceeds {max_dt:e}, needed for {MIN_STEPS_PER_PERIOD} steps per period at angular frequency {fastest}",
            initial.grid.dt
        )));
    }
    let in_range = |t: &f64| *t > initial.time && *t <= t_final;
    let mut wanted: Vec<f64> = observers.iter().copied().filter(in_range).collect();
    wanted.push(t_final);
    wanted.sort_by(f64::total_cmp);
    wanted.dedup();
    // steps never straddle a pulse breakpoint
    let mut stops = wanted.clone();
    stops.extend(pulse.breakpoints().into_iter().filter(in_range));
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let grid = initial.grid;
    let mut stepper = CrankNicolson::new(&grid, params, pulse);
    let mut state = initial.clone();
    for stop in stops {
        let span = stop - state.time;
        let steps = ((span / grid.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize * substeps.max(1);
        let dt = span / steps as f64;
        let t0 = state.time;
        for k in 0..steps {
            stepper.step(&mut state.values, t0 + k as f64 * dt, dt);
        }
        state.time = stop;
        if wanted.binary_search_by(|t| t.total_cmp(&stop)).is_err() {
            continue;
        }
        let edge = state.edge_density();
        if edge > BOUNDARY_DENSITY_LIMIT {
            return Err(Error::BoundaryContamination {
                time: stop,
                density: edge,
                limit: BOUNDARY_DENSITY_LIMIT,
            });
        }
        observe(&state);
    }
    Ok(())
}

/// Snapshots of [`evolve_with`] at every stop (observer times, then
/// `t_final` if it is not one of them).
pub fn evolve(
    initial: &GridWavefunction,
    pulse: &Pulse,
    params: &OscillatorParams,
    t_final: f64,
    observers: &[f64],
) -> Result<Vec<GridWavefunction>> {
    let mut out = Vec::new();
    evolve_with(initial, pulse, params, t_final, observers, |s| {
        out.push(s.clone())
    })?;
    Ok(out)
}

/// Same box with the spacing halved (`2N − 1` points).
pub fn refined(grid: &Grid) -> Grid {
    Grid {
        n_points: 2 * grid.n_points - 1,
        ..*grid
    }
}

/// Measurements from a coarse run, a run with spacing and step both halved,
/// and their Richardson combination `(4·fine − coarse)/3`, which cancels the
/// leading `O(Δx², Δt²)` error of the Crank–Nicolson scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolatedTrajectory {
    pub times: Vec<f64>,
    pub coarse: Vec<Vec<f64>>,
    pub fine: Vec<Vec<f64>>,
    pub extrapolated: Vec<Vec<f64>>,
}

impl ExtrapolatedTrajectory {
    /// Coarse-to-fine error ratio of component `k` against `reference`,
    /// taken at the stop where the coarse error is largest.
    pub fn refinement_ratio(&self, k: usize, reference: &[f64]) -> f64 {
        let (i, _) = self
            .coarse
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c[k] - reference[i]).abs()))
            .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        (self.coarse[i][k] - reference[i]).abs() / (self.fine[i][k] - reference[i]).abs()
    }
}

/// Runs [`evolve_with`] on `grid` and on [`refined`]`(grid)` with two
/// substeps per step, applying `measure` at every stop.
///
/// `initial` builds the starting state on each grid. The two runs are
/// independent and fan out over `exec`.
#[allow(clippy::too_many_arguments)]
pub fn extrapolated_run<I, M>(
    grid: &Grid,
    initial: I,
    pulse: &Pulse,
    params: &OscillatorParams,
    t_final: f64,
    observers: &[f64],
    measure: M,
    exec: Execution,
) -> Result<ExtrapolatedTrajectory>
where
    I: Fn(Grid) -> Result<GridWavefunction> + Sync,
    M: Fn(&GridWavefunction) -> Vec<f64> + Sync,
{
    let grids = [(*grid, 1usize), (refined(grid), 2usize)];
    let runs = exec.map_slice(&grids, |&(g, sub)| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let psi = initial(g)?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        evolve_with_substeps(&psi, pulse, params, t_final, observers, sub, |s| {
            times.push(s.time());
            values.push(measure(s));
        })?;
        Ok((times, values))
    });
    let mut runs = runs.into_iter();
    let (times, coarse) = runs.next().unwrap()?;
    let (_, fine) = runs.next().unwrap()?;
    let extrapolated = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| c.iter().zip(f).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
        .collect();
    Ok(ExtrapolatedTrajectory {
        times,
        coarse,
        fine,
        extrapolated,
    })
}

/// Grid estimates of the norm and the first two moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub norm: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub width_sq: f64,
}

/// Trapezoidal moments; `⟨p⟩ = ħ Im ∫ ψ* ∂ₓψ dx` with a central difference.
/// Means are divided by the norm.
pub fn observables(psi: &GridWavefunction, params: &OscillatorParams) -> Observables {
    let grid = psi.grid;
    let dx = grid.spacing();
    let v = &psi.values;
    let n = v.len();
    let mut norm = 0.0;
    let mut sx = 0.0;
    let mut sxx = 0.0;
    let mut sp = 0.0;
    for i in 0..n {
        let x = grid.x(i);
        let d = v[i].norm_sqr();
        norm += d;
        sx += x * d;
        sxx += x * x * d;
        if i > 0 && i < n - 1 {
            sp += (v[i].conj() * (v[i + 1] - v[i - 1])).im;
        }
    }
    let mean_x = sx / norm;
    Observables {
        norm: norm * dx,
        mean_x,
        mean_p: params.hbar() * sp / (2.0 * dx * norm),
        width_sq: sxx / norm - mean_x * mean_x,
    }
}

/// `⟨H⟩` of the discretized Hamiltonian with a static force `force`.
pub fn energy(psi: &GridWavefunction, params: &OscillatorParams, force: f64) -> f64 {
    let grid = psi.grid;
    let dx = grid.spacing();
    let k = params.hbar() * params.hbar() / (2.0 * params.mass() * dx * dx);
    let v = &psi.values;
    let n = v.len();
    let mut e = 0.0;
    let mut norm = 0.0;
    for i in 1..n - 1 {
        let x = grid.x(i);
        let h_psi =
            (v[i] * 2.0 - v[i - 1] - v[i + 1]) * k + v[i] * (params.potential(x) + x * force);
        e += (v[i].conj() * h_psi).re;
        norm += v[i].norm_sqr();
    }
    e / norm
}

/// `c_n = ∫ ψ_n(x) ψ(x) dx` for `n = 0..=N` by the trapezoid rule.
///
/// Fails when the grid puts fewer than [`POINTS_PER_LOBE`] points across a
/// lobe of `ψ_N`.
pub fn project_onto_eigenstates(
    psi: &GridWavefunction,
    order: BasisIndex,
    params: &OscillatorParams,
) -> Result<Vec<Complex64>> {
    let n = order.get();
    let dx = psi.grid.spacing();
    let k_max = params.alpha() * ((2 * n + 1) as f64).sqrt();
    let lobe = PI / k_max;
    if lobe / dx < POINTS_PER_LOBE {
        return Err(Error::Resolution {
            n,
            points_per_lobe: lobe / dx,
            required: POINTS_PER_LOBE,
        });
    }
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    for (i, v) in psi.values.iter().enumerate() {
        if v.norm_sqr() == 0.0 {
            continue;
        }
        let phis = params.eigenstates(n, psi.grid.x(i));
        for (ck, phi) in c.iter_mut().zip(&phis) {
            *ck += v * *phi;
        }
    }
    c.iter_mut().for_each(|ck| *ck *= dx);
    Ok(c)
}

/// Value and error estimate of an overlap double integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureAmplitude {
    pub value: Complex64,
    pub error: f64,
}

/// Smallest `t ≥ t_min` with `ωt ≡ π/2 (mod 2π)`, where the kernel has no
/// quadratic chirp.
pub fn quarter_phase_time(t_min: f64, params: &OscillatorParams) -> f64 {
    let w = params.omega();
    let target = 0.5 * PI;
    let k = ((w * t_min - target) / (2.0 * PI)).ceil();
    (target + 2.0 * PI * k.max(0.0)) / w
}

/// Amplitude `a[n][m]` by direct cubature of
/// `e^{iωt(n+½)} ∫∫ ψ_n(x) Ψ(x, t, y) ψ_m(y) dx dy` over
/// `[−10/α, 10/α]²`, using [`exact::propagator`] for the kernel.
///
/// Independent of the Laguerre closed form; this is the check on it.
pub fn transition_amplitude_quadrature(
    n: BasisIndex,
    m: BasisIndex,
    pulse: &Pulse,
    params: &OscillatorParams,
    t: f64,
    settings: QuadSettings,
) -> Result<QuadratureAmplitude> {
    let integrals = pulse::integrals_at(pulse, params, t, 1e-12)?;
    transition_amplitude_quadrature_with(n, m, &integrals, params, settings)
}

/// As [`transition_amplitude_quadrature`] with precomputed pulse integrals
/// (evaluated at `integrals.t`).
pub fn transition_amplitude_quadrature_with(
    n: BasisIndex,
    m: BasisIndex,
    integrals: &PulseIntegrals,
    params: &OscillatorParams,
    settings: QuadSettings,
) -> Result<QuadratureAmplitude> {
    let (n, m) = (n.get(), m.get());
    let t = integrals.t;
    if n > QUADRATURE_MAX_INDEX || m > QUADRATURE_MAX_INDEX {
        return Err(Error::Truncation {
            index: n.max(m),
            n_max: QUADRATURE_MAX_INDEX,
        });
    }
    let s = (params.omega() * t).sin().abs();
    if s <= 1e-6 {
        return Err(Error::SingularTime {
            omega_t: params.omega() * t,
            sin_abs: s,
        });
    }
    let alpha = params.alpha();
    let half = QUADRATURE_HALF_WIDTH / alpha;
    let sqrt_alpha = alpha.sqrt();
    let psi = |k: usize, x: f64| crate::special::hermite_functions(k, alpha * x)[k] * sqrt_alpha;
    let integrand = |x: f64, y: f64| -> Complex64 {
        let kernel = exact::propagator(x, t, y, integrals, params).unwrap_or_default();
        kernel * (psi(n, x) * psi(m, y))
    };
    let res = quadrature::integrate_2d(integrand, (-half, half), (-half, half), 8, settings)?;
    let eigenphase = Complex64::from_polar(1.0, params.omega() * t * (n as f64 + 0.5));
    Ok(QuadratureAmplitude {
        value: res.value * eigenphase,
        error: res.error,
    })
}

/// Every amplitude with `n, m ≤ order`, row-major (`[n][m]`), each cell an
/// independent cubature fanned out over `exec`.
pub fn transition_matrix_quadrature(
    order: BasisIndex,
    integrals: &PulseIntegrals,
    params: &OscillatorParams,
    settings: QuadSettings,
    exec: Execution,
) -> Result<Vec<Vec<QuadratureAmplitude>>> {
    let size = order.get() + 1;
    let cells = exec.map_range(size * size, |k| {
        transition_amplitude_quadrature_with(
            BasisIndex::new_unchecked(k / size),
            BasisIndex::new_unchecked(k % size),
            integrals,
            params,
            settings,
        )
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(cells.chunks(size).map(|row| row.to_vec()).collect())
}

/// `∫ Ψ(x, t, y) f(y) dy` over `y ∈ [y_min, y_max]` by adaptive quadrature
/// on a partition fine enough to resolve the kernel's chirp.
pub fn propagate_by_quadrature<F>(
    x: f64,
    integrals: &PulseIntegrals,
    params: &OscillatorParams,
    y_range: (f64, f64),
    f: F,
    settings: QuadSettings,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let t = integrals.t;
    let s = (params.omega() * t).sin().abs();
    // local phase gradient of the kernel in y is at most α²(|x| + |y|)/|sin ωt|
    let a2 = params.alpha() * params.alpha();
    let reach = x.abs() + y_range.0.abs().max(y_range.1.abs()) + integrals.g.abs() / params.hbar();
    let gradient = a2 * reach / s.max(1e-300);
    let pieces = ((y_range.1 - y_range.0) * gradient / PI)
        .ceil()
        .clamp(8.0, 2.0e6) as usize;
    let points: Vec<f64> = (0..=pieces)
        .map(|i| y_range.0 + (y_range.1 - y_range.0) * i as f64 / pieces as f64)
        .collect();
    // evaluate the kernel inside the closure and surface singular times first
    exact::propagator(x, t, 0.0, integrals, params)?;
    let res = quadrature::integrate_pieces(
        |y: f64| exact::propagator(x, t, y, integrals, params).unwrap_or_default() * f(y),
        &points,
        settings,
    )?;
    Ok(res.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::Truncation;

    fn idx(n: usize) -> BasisIndex {
        Truncation::default().index(n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 1.0, 2, 0.1).is_err());
        assert!(Grid::new(1.0, 0.0, 10, 0.1).is_err());
        assert!(Grid::new(0.0, 1.0, 10, 0.0).is_err());
        let p = OscillatorParams::natural();
        let small = Grid::new(-3.0, 3.0, 200, 0.01).unwrap();
        assert!(GridWavefunction::eigenstate(small, &p, idx(0)).is_err());
    }

    #[test]
    fn ground_state_observables() {
        let p = OscillatorParams::new(1.0, 2.0, 1.0).unwrap();
        let grid = Grid::new(-10.0, 10.0, 4001, 0.01).unwrap();
        let psi = GridWavefunction::eigenstate(grid, &p, idx(0)).unwrap();
        let o = observables(&psi, &p);
        assert!((o.norm - 1.0).abs() < 1e-12);
        assert!(o.mean_x.abs() < 1e-14);
        assert!(o.mean_p.abs() < 1e-14);
        assert!((o.width_sq - 0.25).abs() < 1e-12);
        let psi1 = GridWavefunction::eigenstate(grid, &p, idx(1)).unwrap();
        assert!((observables(&psi1, &p).width_sq - 0.75).abs() < 1e-12);
    }

    #[test]
    fn projection_of_eigenstate_is_kronecker() {
        let p = OscillatorParams::natural();
        let grid = Grid::new(-12.0, 12.0, 2401, 0.01).unwrap();
        let psi = GridWavefunction::eigenstate(grid, &p, idx(2)).unwrap();
        let c = project_onto_eigenstates(&psi, idx(10), &p).unwrap();
        for (n, cn) in c.iter().enumerate() {
            let expect = if n == 2 { 1.0 } else { 0.0 };
            assert!((cn - expect).norm() < 1e-9, "n={n} c={cn}");
        }
        let coarse = Grid::new(-12.0, 12.0, 201, 0.01).unwrap();
        let psi = GridWavefunction::eigenstate(coarse, &p, idx(0)).unwrap();
        assert!(matches!(
            project_onto_eigenstates(&psi, idx(40), &p),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn stationary_state_returns_after_one_period() {
        let p = OscillatorParams::natural();
        let grid = Grid::new(-10.0, 10.0, 4001, p.period() / 500.0).unwrap();
        let psi = GridWavefunction::eigenstate(grid, &p, idx(0)).unwrap();
        let out = evolve(&psi, &Pulse::Zero, &p, p.period(), &[]).unwrap();
        let last = out.last().unwrap();
        // remove the global phase
        let overlap: Complex64 = psi
            .values()
            .iter()
            .zip(last.values())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let phase = overlap / overlap.norm();
        let max_diff = psi
            .values()
            .iter()
            .zip(last.values())
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-8, "max diff {max_diff}");
    }

    #[test]
    fn boundary_contamination_is_detected() {
        let p = OscillatorParams::natural();
        let grid = Grid::new(-7.0, 7.0, 701, 0.01).unwrap();
        let psi = GridWavefunction::eigenstate(grid, &p, idx(0)).unwrap();
        let kick = Pulse::rectangular(6.0, 0.0, 1.0).unwrap();
        let err = evolve(&psi, &kick, &p, 3.0, &[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::BoundaryContamination { .. }));
    }

    #[test]
    fn quarter_phase_times() {
        let p = OscillatorParams::new(1.0, 2.0, 1.0).unwrap();
        let t = quarter_phase_time(5.0, &p);
        assert!(t >= 5.0);
        assert!(((2.0 * t).sin() - 1.0).abs() < 1e-12);
        assert!(t - 5.0 < PI);
    }
}
