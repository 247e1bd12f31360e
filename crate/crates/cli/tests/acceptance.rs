//! Acceptance criteria, one line each. Exits non-zero if any fails.

use std::process::{Command as Process, ExitCode};
use std::time::Instant;

use driven_oscillator::exact::ground_state_distribution;
use driven_oscillator::exact::{expectations, transition_amplitude};
use driven_oscillator::oracle::{
    evolve, extrapolated_run, observables, project_onto_eigenstates, propagate_by_quadrature,
    quarter_phase_time, transition_matrix_quadrature, Grid, GridWavefunction,
};
use driven_oscillator::pulse::integrals_at;
use driven_oscillator::quadrature::QuadSettings;
use driven_oscillator::{
    BasisIndex, Execution, OscillatorParams, Pulse, PulseIntegrals, Truncation,
};
use driven_oscillator_cli::validate::{
    ehrenfest_residual, grid_comparison, ode_residual, unitarity_defect,
};
use num_complex::Complex64;
use serde_json::Value;

type Outcome = Result<String, String>;
type TestFunction = (&'static str, fn(f64) -> f64);
type Criterion = (&'static str, fn() -> Outcome);

fn idx(n: usize) -> BasisIndex {
    Truncation::default().index(n).unwrap()
}

fn natural() -> OscillatorParams {
    OscillatorParams::natural()
}

fn gaussian() -> Pulse {
    Pulse::gaussian_burst(0.8, 5.0, 0.6, 1.3, 0.4).unwrap()
}

fn rectangular() -> Pulse {
    Pulse::rectangular(0.5, 1.0, 4.0).unwrap()
}

fn sinusoidal() -> Pulse {
    Pulse::sinusoidal_burst(0.4, 2.5, 0.3, 0.5, 5.5).unwrap()
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn poisson_law() -> Outcome {
    let p = natural();
    let grid = Grid::default_for(&p);
    let unit = Pulse::gaussian_burst(1.0, 4.0, 0.45, 0.0, 0.0).unwrap();
    let t_final = 8.0;
    let r1 = integrals_at(&unit, &p, t_final, 1e-12)
        .map_err(|e| e.to_string())?
        .displacement(&p)
        .r_sq;
    let mut parts = Vec::new();
    let mut ok = true;
    for r_sq in [0.5, 1.0, 2.0] {
        let start = Instant::now();
        let pulse = unit.scaled((r_sq / r1).sqrt());
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
        .map_err(|e| e.to_string())?;
        let expected = ground_state_distribution(r_sq, 12).map_err(|e| e.to_string())?;
        let err = run.extrapolated[0]
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let secs = start.elapsed().as_secs_f64();
        ok &= err < 1e-5 && secs <= 60.0;
        parts.push(format!("R={r_sq}: max|dP|={err:.1e} ({secs:.1}s)"));
    }
    verdict(ok, parts.join(", ") + " [tol 1e-5, 60 s]")
}

fn main_result_vs_quadrature() -> Outcome {
    let p = natural();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for pulse in [rectangular(), gaussian(), sinusoidal()] {
        let t = quarter_phase_time(pulse.duration(), &p);
        let ints = integrals_at(&pulse, &p, t, 1e-12).map_err(|e| e.to_string())?;
        let d = ints.displacement(&p);
        let quad = transition_matrix_quadrature(
            idx(5),
            &ints,
            &p,
            QuadSettings::with_tol(1e-10),
            Execution::default(),
        )
        .map_err(|e| e.to_string())?;
        for (n, row) in quad.iter().enumerate() {
            for (m, cell) in row.iter().enumerate() {
                let a = transition_amplitude(idx(n), idx(m), &d, &ints, &p);
                worst = worst.max((a - cell.value).norm());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-6 && secs <= 600.0,
        format!("3 pulses, n,m<=5: max|a - a_quad|={worst:.1e} incl. phase ({secs:.1}s) [tol 1e-6, 600 s]"),
    )
}

fn unitarity() -> Outcome {
    let p = natural();
    let mut worst = 0.0f64;
    for r_sq in [0.25f64, 0.5, 1.0, 2.0, 3.0, 4.0] {
        for phi in [0.0f64, 0.9, 2.2, 4.0] {
            let s = (2.0 * r_sq).sqrt();
            let ints = PulseIntegrals {
                t: 7.0,
                f: s * phi.cos(),
                g: s * phi.sin(),
                h: 0.3,
            };
            worst = worst.max(unitarity_defect(&ints, &p, 60, 10));
        }
    }
    verdict(
        worst < 1e-8,
        format!("R<=4, N=60, columns m<=10: max defect {worst:.1e} [tol 1e-8]"),
    )
}

fn ode_system() -> Outcome {
    let p = natural();
    let a = ode_residual(&gaussian(), &p, 12.0, 100)?;
    let b = ode_residual(&sinusoidal(), &p, 12.0, 100)?;
    let worst = a.max(b);
    verdict(
        worst < 1e-6,
        format!("2 pulses x 100 (t, y): max residual {worst:.1e} [tol 1e-6]"),
    )
}

fn expectation_values() -> Outcome {
    let p = natural();
    let pulse = rectangular();
    let g = grid_comparison(&pulse, &p, &Grid::default_for(&p), 10.0, 100, 0)?;
    let ehrenfest = ehrenfest_residual(&pulse, &p, 10.0)?;
    verdict(
        g.mean_x < 1e-6 && g.mean_p < 1e-6 && ehrenfest < 1e-5,
        format!(
            "rectangular pulse: max|d<x>|={:.1e}, max|d<p>|={:.1e} [tol 1e-6]; Ehrenfest residual {ehrenfest:.1e} (h=1e-3) [tol 1e-5]",
            g.mean_x, g.mean_p
        ),
    )
}

fn constant_width() -> Outcome {
    let p = natural();
    let mut worst = 0.0f64;
    for pulse in [gaussian(), rectangular()] {
        let g = grid_comparison(
            &pulse,
            &p,
            &Grid::default_for(&p),
            pulse.duration() + p.period(),
            100,
            0,
        )?;
        worst = worst.max(g.width);
    }
    verdict(
        worst < 1e-6,
        format!("max|dx^2 - 1/(2 alpha^2)|={worst:.1e} over 2 driven runs [tol 1e-6]"),
    )
}

/// Largest |<x>_grid - <x>_exact| over integer times up to 8.
fn position_error(grid: Grid, pulse: &Pulse, p: &OscillatorParams) -> Result<f64, String> {
    let observers: Vec<f64> = (1..=8).map(f64::from).collect();
    let psi = GridWavefunction::eigenstate(grid, p, idx(0)).map_err(|e| e.to_string())?;
    let states = evolve(&psi, pulse, p, 8.0, &observers).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for s in &states {
        let i = integrals_at(pulse, p, s.time(), 1e-12).map_err(|e| e.to_string())?;
        worst = worst.max((observables(s, p).mean_x - expectations(i.t, &i, p).0).abs());
    }
    Ok(worst)
}

fn convergence_orders() -> Outcome {
    let p = natural();
    let pulse = rectangular();
    let fine_x = Grid::new(-12.0, 12.0, 8192, p.period() / 100.0).map_err(|e| e.to_string())?;
    let dt_ratio = position_error(fine_x, &pulse, &p)?
        / position_error(fine_x.with_dt(p.period() / 200.0).unwrap(), &pulse, &p)?;
    let fine_t = Grid::new(-12.0, 12.0, 256, p.period() / 8000.0).map_err(|e| e.to_string())?;
    let dx_ratio = position_error(fine_t, &pulse, &p)?
        / position_error(fine_t.with_points(511).unwrap(), &pulse, &p)?;
    let ok = (3.5..=4.5).contains(&dt_ratio) && (3.5..=4.5).contains(&dx_ratio);
    verdict(
        ok,
        format!("error ratio on halving dt {dt_ratio:.3}, on halving dx {dx_ratio:.3} [3.5, 4.5]"),
    )
}

fn delta_limit() -> Outcome {
    let p = natural();
    let tests: [TestFunction; 3] = [
        ("gaussian", |y| (-(y - 0.3) * (y - 0.3)).exp()),
        ("polynomial", |y| (1.0 + y) * (-0.5 * y * y).exp()),
        ("cosine", |y| y.cos() * (-0.25 * y * y).exp()),
    ];
    let x = 0.4;
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, f) in tests {
        let mut errors = Vec::new();
        for t in [4e-3, 2e-3, 1e-3] {
            let got = propagate_by_quadrature(
                x,
                &PulseIntegrals::free(t),
                &p,
                (-14.0, 14.0),
                |y| Complex64::new(f(y), 0.0),
                QuadSettings::with_tol(1e-11),
            )
            .map_err(|e| e.to_string())?;
            errors.push((got - f(x)).norm());
        }
        let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        ok &= orders.iter().all(|o| (0.9..=1.1).contains(o));
        parts.push(format!("{name} {:.3}/{:.3}", orders[0], orders[1]));
    }
    verdict(
        ok,
        format!(
            "observed orders as omega*t -> 0: {} [0.9, 1.1]",
            parts.join(", ")
        ),
    )
}

fn negative_control() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = Process::new(env!("CARGO_BIN_EXE_dho"))
        .args(["validate", "--set", "grid.n_points=96", "--out"])
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    let report: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("validation_report.json"))
            .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    let expected = [
        "grid_mean_x",
        "grid_mean_p",
        "grid_width",
        "poisson_populations",
    ];
    let text = String::from_utf8_lossy(&out.stdout);
    let ok = out.status.code() == Some(1)
        && report["passed"] == false
        && expected
            .iter()
            .all(|e| failed.contains(e) && text.contains(&format!("FAIL {e}")));
    verdict(
        ok,
        format!(
            "96-point grid: exit {:?}, failed checks [{}]",
            out.status.code(),
            failed.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 Poisson law from the grid oracle", poisson_law),
        (
            "2 closed form vs overlap quadrature",
            main_result_vs_quadrature,
        ),
        ("3 unitarity", unitarity),
        ("4 ODE system residuals", ode_system),
        ("5 expectation values and Ehrenfest", expectation_values),
        ("6 constant width", constant_width),
        ("7 Crank-Nicolson convergence orders", convergence_orders),
        ("8 delta limit of the propagator", delta_limit),
        ("9 negative control", negative_control),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (status, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{status} criterion {name}: {detail} ({:.1}s)",
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of 9 acceptance criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
