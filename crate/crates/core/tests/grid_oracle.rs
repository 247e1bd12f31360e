mod common;

use common::{idx, natural};
use driven_oscillator::exact::{expectations, ground_state_distribution};
use driven_oscillator::oracle::{
    energy, evolve, evolve_with, extrapolated_run, observables, project_onto_eigenstates, Grid,
    GridWavefunction,
};
use driven_oscillator::pulse::{integrals_at, integrate_fgh};
use driven_oscillator::{Execution, OscillatorParams, Pulse};
use num_complex::Complex64;

fn coherent(grid: Grid, params: &OscillatorParams, shift: f64, kick: f64) -> GridWavefunction {
    GridWavefunction::from_fn(grid, 0.0, |x| {
        let g = params.eigenstate(idx(0), x - shift);
        Complex64::from_polar(g, kick * x / params.hbar())
    })
    .unwrap()
}

#[test]
fn norm_is_conserved_step_by_step() {
    let p = natural();
    let grid = Grid::default_for(&p);
    let pulse = Pulse::rectangular(0.5, 1.0, 4.0).unwrap();
    let psi = GridWavefunction::eigenstate(grid, &p, idx(0)).unwrap();
    let observers: Vec<f64> = (1..=10_000).map(|k| k as f64 * grid.dt()).collect();
    let t_final = *observers.last().unwrap();
    let n0 = psi.norm();
    let mut prev = n0;
    let mut worst_step = 0.0f64;
    let mut last = n0;
    evolve_with(&psi, &pulse, &p, t_final, &observers, |s| {
        let n = s.norm();
        worst_step = worst_step.max((n - prev).abs());
        prev = n;
        last = n;
    })
    .unwrap();
    assert!(worst_step < 1e-12, "per-step drift {worst_step}");
    assert!((last - n0).abs() < 1e-10, "total drift {}", last - n0);
}

#[test]
fn discrete_energy_is_conserved_without_drive() {
    let p = natural();
    let grid = Grid::default_for(&p);
    let psi = coherent(grid, &p, 1.5, -0.7);
    let e0 = energy(&psi, &p, 0.0);
    let observers: Vec<f64> = (1..=10).map(|k| k as f64 * p.period()).collect();
    let states = evolve(&psi, &Pulse::Zero, &p, 10.0 * p.period(), &observers).unwrap();
    for s in &states {
        let e = energy(s, &p, 0.0);
        assert!(((e - e0) / e0).abs() < 1e-10, "t={}: {e} vs {e0}", s.time());
    }
}

#[test]
fn populations_obey_bessel() {
    let p = natural();
    let grid = Grid::default_for(&p);
    let pulse = Pulse::gaussian_burst(0.8, 5.0, 0.6, 1.3, 0.4).unwrap();
    let psi = GridWavefunction::eigenstate(grid, &p, idx(2)).unwrap();
    let end = evolve(&psi, &pulse, &p, 10.0, &[]).unwrap().pop().unwrap();
    let c = project_onto_eigenstates(&end, idx(30), &p).unwrap();
    let total: f64 = c.iter().map(|c| c.norm_sqr()).sum();
    assert!(total <= end.norm() + 1e-12, "{total} > {}", end.norm());
    assert!(total > 0.999);
}

#[test]
fn moments_match_the_exact_packet() {
    let p = natural();
    let grid = Grid::default_for(&p);
    let pulse = Pulse::rectangular(0.5, 1.0, 4.0).unwrap();
    let observers: Vec<f64> = (1..=80).map(|k| 0.1 * k as f64).collect();
    let run = extrapolated_run(
        &grid,
        |g| GridWavefunction::eigenstate(g, &p, idx(0)),
        &pulse,
        &p,
        8.0,
        &observers,
        |s| {
            let o = observables(s, &p);
            vec![o.mean_x, o.mean_p, o.width_sq]
        },
        Execution::default(),
    )
    .unwrap();
    let ints = integrate_fgh(&pulse, &p, &run.times, 1e-12).unwrap();
    let width = 0.5 / (p.alpha() * p.alpha());
    for (row, i) in run.extrapolated.iter().zip(&ints) {
        let (x, mp) = expectations(i.t, i, &p);
        assert!((row[0] - x).abs() < 1e-6, "t={}: x {} vs {x}", i.t, row[0]);
        assert!(
            (row[1] - mp).abs() < 1e-6,
            "t={}: p {} vs {mp}",
            i.t,
            row[1]
        );
        assert!((row[2] - width).abs() < 1e-6, "t={}: width {}", i.t, row[2]);
    }
}

/// Largest |⟨x⟩_grid − ⟨x⟩_exact| over the stops of a raw run.
fn raw_position_error(grid: Grid, pulse: &Pulse, p: &OscillatorParams, observers: &[f64]) -> f64 {
    let psi = GridWavefunction::eigenstate(grid, p, idx(0)).unwrap();
    let states = evolve(&psi, pulse, p, *observers.last().unwrap(), observers).unwrap();
    states
        .iter()
        .map(|s| {
            let i = integrals_at(pulse, p, s.time(), 1e-12).unwrap();
            (observables(s, p).mean_x - expectations(i.t, &i, p).0).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn crank_nicolson_is_second_order_in_time() {
    let p = natural();
    let pulse = Pulse::rectangular(0.5, 1.0, 4.0).unwrap();
    let observers: Vec<f64> = (1..=8).map(|k| k as f64).collect();
    let base = Grid::new(-12.0, 12.0, 8192, p.period() / 100.0).unwrap();
    let e1 = raw_position_error(base, &pulse, &p, &observers);
    let e2 = raw_position_error(
        base.with_dt(p.period() / 200.0).unwrap(),
        &pulse,
        &p,
        &observers,
    );
    let ratio = e1 / e2;
    assert!(
        (3.5..=4.5).contains(&ratio),
        "dt ratio {ratio} ({e1}, {e2})"
    );
}

#[test]
fn crank_nicolson_is_second_order_in_space() {
    let p = natural();
    let pulse = Pulse::rectangular(0.5, 1.0, 4.0).unwrap();
    let observers: Vec<f64> = (1..=8).map(|k| k as f64).collect();
    let base = Grid::new(-12.0, 12.0, 256, p.period() / 8000.0).unwrap();
    let e1 = raw_position_error(base, &pulse, &p, &observers);
    let e2 = raw_position_error(base.with_points(511).unwrap(), &pulse, &p, &observers);
    let ratio = e1 / e2;
    assert!(
        (3.5..=4.5).contains(&ratio),
        "dx ratio {ratio} ({e1}, {e2})"
    );
}

#[test]
fn burst_populations_are_poissonian() {
    let p = natural();
    let grid = Grid::default_for(&p);
    let unit = Pulse::gaussian_burst(1.0, 4.0, 0.45, 0.0, 0.0).unwrap();
    let t_final = 8.0;
    let r1 = integrals_at(&unit, &p, t_final, 1e-12)
        .unwrap()
        .displacement(&p)
        .r_sq;
    let pulse = unit.scaled((1.0 / r1).sqrt());
    let run = extrapolated_run(
        &grid,
        |g| GridWavefunction::eigenstate(g, &p, idx(0)),
        &pulse,
        &p,
        t_final,
        &[],
        |s| {
            project_onto_eigenstates(s, idx(12), &p)
                .unwrap()
                .iter()
                .map(|c| c.norm_sqr())
                .collect()
        },
        Execution::default(),
    )
    .unwrap();
    let expected = ground_state_distribution(1.0, 12).unwrap();
    for (n, (got, want)) in run.extrapolated[0].iter().zip(&expected).enumerate() {
        assert!((got - want).abs() < 1e-6, "n={n}: {got} vs {want}");
    }
}

#[test]
fn coarse_grids_hit_the_walls() {
    let p = natural();
    let grid = Grid::new(-3.0, 3.0, 400, p.period() / 200.0).unwrap();
    let psi = GridWavefunction::eigenstate(grid, &p, idx(0));
    // a ground state on [−3, 3] already leaks past the edge tolerance
    assert!(psi.is_err());
    let wide = Grid::new(-6.0, 6.0, 400, p.period() / 200.0).unwrap();
    let psi = GridWavefunction::eigenstate(wide, &p, idx(0)).unwrap();
    let kick = Pulse::rectangular(6.0, 0.0, 1.0).unwrap();
    assert!(evolve(&psi, &kick, &p, 4.0, &[]).is_err());
}

#[test]
fn time_step_must_resolve_the_dynamics() {
    let p = natural();
    let grid = Grid::new(-12.0, 12.0, 512, p.period() / 30.0).unwrap();
    let psi = GridWavefunction::eigenstate(grid, &p, idx(0)).unwrap();
    assert!(evolve(&psi, &Pulse::Zero, &p, 1.0, &[]).is_err());
    let fast = Pulse::sinusoidal_burst(0.1, 40.0, 0.0, 0.0, 1.0).unwrap();
    let grid = grid.with_dt(p.period() / 200.0).unwrap();
    let psi = GridWavefunction::eigenstate(grid, &p, idx(0)).unwrap();
    assert!(evolve(&psi, &fast, &p, 1.0, &[]).is_err());
}

#[test]
#[allow(clippy::needless_range_loop)]
fn projections_agree_with_both_exact_routes() {
    let p = natural();
    let pulse = Pulse::gaussian_burst(0.8, 5.0, 0.6, 1.3, 0.4).unwrap();
    let t = driven_oscillator::oracle::quarter_phase_time(pulse.duration(), &p);
    let ints = integrals_at(&pulse, &p, t, 1e-12).unwrap();
    let d = ints.displacement(&p);
    let quad = driven_oscillator::oracle::transition_matrix_quadrature(
        idx(5),
        &ints,
        &p,
        driven_oscillator::quadrature::QuadSettings::with_tol(1e-9),
        Execution::default(),
    )
    .unwrap();
    let grid = Grid::default_for(&p);
    for m in 0..=5 {
        let run = extrapolated_run(
            &grid,
            |g| GridWavefunction::eigenstate(g, &p, idx(m)),
            &pulse,
            &p,
            t,
            &[],
            |s| {
                project_onto_eigenstates(s, idx(5), &p)
                    .unwrap()
                    .iter()
                    .map(|c| c.norm())
                    .collect()
            },
            Execution::default(),
        )
        .unwrap();
        for n in 0..=5 {
            let grid_mod = run.extrapolated[0][n];
            let exact =
                driven_oscillator::exact::transition_amplitude(idx(n), idx(m), &d, &ints, &p)
                    .norm();
            assert!(
                (grid_mod - exact).abs() < 1e-5,
                "({n},{m}) grid {grid_mod} exact {exact}"
            );
            assert!((grid_mod - quad[n][m].value.norm()).abs() < 1e-5);
        }
    }
}
