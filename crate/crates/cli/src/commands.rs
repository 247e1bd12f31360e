//! `integrals`, `transitions` and `evolve`.

use anyhow::{bail, Context, Result};
use driven_oscillator::exact::{ground_state_distribution, transition_matrix, CoherentPacket};
use driven_oscillator::oracle::{
    evolve, evolve_with, extrapolated_run, observables, GridWavefunction,
};
use driven_oscillator::pulse::integrate_fgh;
use driven_oscillator::{Execution, PulseIntegrals};
use serde::Serialize;

use crate::config::{OracleMode, Resolved};
use crate::output::{num, numbers, OutputDir};

/// End of the pulse plus one free period.
pub fn run_end(r: &Resolved) -> f64 {
    r.pulse.duration() + r.params.period()
}

/// `count` equally spaced times from 0 to `end`.
pub fn linspace(end: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![end];
    }
    (0..count)
        .map(|i| end * i as f64 / (count - 1) as f64)
        .collect()
}

#[derive(Serialize)]
struct Complex {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct IntegralsSummary {
    t_end: f64,
    pulse_end: f64,
    f: f64,
    g: f64,
    h: f64,
    r: Complex,
    r_sq: f64,
    phase_h: f64,
}

pub fn integrals(r: &Resolved, out: &mut OutputDir) -> Result<()> {
    let samples = r.config.integrals.samples;
    if samples < 2 {
        bail!("integrals.samples must be at least 2");
    }
    let times = linspace(run_end(r), samples);
    let ints = integrate_fgh(&r.pulse, &r.params, &times, r.config.tolerances.integrals)?;
    let rows: Vec<Vec<String>> = ints
        .iter()
        .map(|i| {
            let d = i.displacement(&r.params);
            numbers(&[
                i.t,
                r.pulse.value(i.t),
                i.f,
                i.g,
                i.h,
                d.r.re,
                d.r.im,
                d.r_sq,
            ])
        })
        .collect();
    out.write_csv(
        "integrals.csv",
        &[
            "t [time]",
            "j [force]",
            "F [force*time]",
            "G [force*time]",
            "H [force^2*time^2]",
            "Re r [1]",
            "Im r [1]",
            "R [1]",
        ],
        &rows,
        "pulse integrals F, G, H and displacement r over the pulse and one free period",
    )?;
    let last = ints.last().unwrap();
    let d = last.displacement(&r.params);
    out.write_json(
        "integrals_summary.json",
        &IntegralsSummary {
            t_end: last.t,
            pulse_end: r.pulse.duration(),
            f: last.f,
            g: last.g,
            h: last.h,
            r: Complex {
                re: d.r.re,
                im: d.r.im,
            },
            r_sq: d.r_sq,
            phase_h: last.phase_h(&r.params),
        },
        "final integrals",
    )?;
    Ok(())
}

#[derive(Serialize)]
struct TransitionsSummary {
    time: f64,
    order: usize,
    r: Complex,
    r_sq: f64,
    phase_h: f64,
    max_unitarity_defect: f64,
    unitarity_defects: Vec<f64>,
    tail_bounds: Vec<f64>,
    max_poisson_difference: f64,
}

pub fn transitions(r: &Resolved, out: &mut OutputDir) -> Result<()> {
    let opts = &r.config.transitions;
    let t = opts.time.unwrap_or_else(|| r.pulse.duration());
    let ints = if t > 0.0 {
        integrate_fgh(&r.pulse, &r.params, &[t], r.config.tolerances.integrals)?[0]
    } else {
        PulseIntegrals::free(t)
    };
    let d = ints.displacement(&r.params);
    let order = r.truncation.index(opts.order)?;
    let m = transition_matrix(order, &d, &ints, &r.params, Execution::default());
    let n = m.order();

    let mut header = vec!["n [final level]".to_string()];
    header.extend((0..=n).map(|k| format!("P(n|m={k}) [probability]")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = (0..=n)
        .map(|row| {
            let mut cells = vec![row.to_string()];
            cells.extend((0..=n).map(|col| num(m.probability(row, col))));
            cells
        })
        .collect();
    out.write_csv(
        "transition_probabilities.csv",
        &header_refs,
        &rows,
        "transition probabilities |a_nm|^2, row n final, column m initial",
    )?;

    let poisson = ground_state_distribution(d.r_sq, n)?;
    let mut max_diff = 0.0f64;
    let rows: Vec<Vec<String>> = (0..=n)
        .map(|k| {
            let p = m.probability(k, 0);
            let diff = (p - poisson[k]).abs();
            max_diff = max_diff.max(diff);
            vec![k.to_string(), num(p), num(poisson[k]), num(diff)]
        })
        .collect();
    out.write_csv(
        "ground_state_column.csv",
        &[
            "n [final level]",
            "P(n|0) closed form [probability]",
            "R^n exp(-R)/n! [probability]",
            "abs difference [probability]",
        ],
        &rows,
        "ground-state column against the Poisson law",
    )?;

    let defects: Vec<f64> = (0..=n).map(|c| m.unitarity_defect(c)).collect();
    out.write_json(
        "transitions_summary.json",
        &TransitionsSummary {
            time: t,
            order: n,
            r: Complex {
                re: d.r.re,
                im: d.r.im,
            },
            r_sq: d.r_sq,
            phase_h: ints.phase_h(&r.params),
            max_unitarity_defect: defects.iter().copied().fold(0.0, f64::max),
            unitarity_defects: defects,
            tail_bounds: (0..=n).map(|c| m.tail_bound(c)).collect(),
            max_poisson_difference: max_diff,
        },
        "displacement, unitarity defect and truncation tail bound per column",
    )?;
    Ok(())
}

#[derive(Serialize)]
struct EvolveSummary {
    t_end: f64,
    oracle: OracleMode,
    width_sq: f64,
    max_abs_diff_x: Option<f64>,
    max_abs_diff_p: Option<f64>,
    max_abs_diff_width_sq: Option<f64>,
    snapshots: Vec<String>,
}

pub fn evolve_cmd(r: &Resolved, out: &mut OutputDir) -> Result<()> {
    let opts = &r.config.evolve;
    if opts.samples < 2 {
        bail!("evolve.samples must be at least 2");
    }
    let t_end = run_end(r);
    let times = linspace(t_end, opts.samples);
    let ints = integrate_fgh(&r.pulse, &r.params, &times, r.config.tolerances.integrals)?;
    let exact: Vec<CoherentPacket> = ints
        .iter()
        .map(|i| CoherentPacket::new(i.t, i, &r.params))
        .collect();
    let width_sq = 0.5 / (r.params.alpha() * r.params.alpha());

    let ground = r.truncation.index(0)?;
    let initial = |g| GridWavefunction::eigenstate(g, &r.params, ground);
    let measure = |s: &GridWavefunction| {
        let o = observables(s, &r.params);
        vec![o.mean_x, o.mean_p, o.width_sq, o.norm]
    };
    let grid_rows: Option<Vec<Vec<f64>>> = match opts.oracle {
        OracleMode::Off => None,
        OracleMode::Raw => {
            let psi = initial(r.grid).context("initial state on the grid")?;
            let mut rows = vec![measure(&psi)];
            evolve_with(&psi, &r.pulse, &r.params, t_end, &times[1..], |s| {
                rows.push(measure(s))
            })?;
            Some(rows)
        }
        OracleMode::Extrapolated => {
            let psi = initial(r.grid).context("initial state on the grid")?;
            let run = extrapolated_run(
                &r.grid,
                initial,
                &r.pulse,
                &r.params,
                t_end,
                &times[1..],
                measure,
                Execution::default(),
            )?;
            let mut rows = vec![measure(&psi)];
            rows.extend(run.extrapolated);
            Some(rows)
        }
    };

    let mut header = vec![
        "t [time]",
        "<x> exact [length]",
        "<p> exact [momentum]",
        "dx^2 exact [length^2]",
    ];
    if grid_rows.is_some() {
        header.extend([
            "<x> grid [length]",
            "<p> grid [momentum]",
            "dx^2 grid [length^2]",
            "norm grid [1]",
        ]);
    }
    let mut diffs = [0.0f64; 3];
    let rows: Vec<Vec<String>> = exact
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let mut row = vec![times[k], e.expectation_x, e.expectation_p, e.width_sq];
            if let Some(g) = &grid_rows {
                let g = &g[k];
                diffs[0] = diffs[0].max((g[0] - e.expectation_x).abs());
                diffs[1] = diffs[1].max((g[1] - e.expectation_p).abs());
                diffs[2] = diffs[2].max((g[2] - e.width_sq).abs());
                row.extend_from_slice(g);
            }
            numbers(&row)
        })
        .collect();
    out.write_csv(
        "trajectories.csv",
        &header,
        &rows,
        "position and momentum expectations and width, exact and grid oracle",
    )?;

    let snapshot_times = opts.snapshots.clone().unwrap_or_else(|| vec![t_end]);
    let mut snapshot_times_sorted = snapshot_times.clone();
    snapshot_times_sorted.sort_by(f64::total_cmp);
    if let Some(&bad) = snapshot_times
        .iter()
        .find(|t| !(**t >= 0.0 && t.is_finite()))
    {
        bail!("snapshot time {bad} must be finite and non-negative");
    }
    let snap_ints = integrate_fgh(
        &r.pulse,
        &r.params,
        &snapshot_times_sorted,
        r.config.tolerances.integrals,
    )?;
    let grid_states: Option<Vec<GridWavefunction>> = if opts.oracle == OracleMode::Off {
        None
    } else {
        let psi = initial(r.grid)?;
        let positive: Vec<f64> = snapshot_times_sorted
            .iter()
            .copied()
            .filter(|&t| t > 0.0)
            .collect();
        let mut states: Vec<GridWavefunction> = Vec::new();
        if let Some(&last) = positive.last() {
            states = evolve(&psi, &r.pulse, &r.params, last, &positive)?;
        }
        let zeros = snapshot_times_sorted.len() - positive.len();
        let mut all = vec![psi; zeros];
        all.extend(states);
        Some(all)
    };
    let xs = r.grid.points();
    let mut names = Vec::new();
    for (k, i) in snap_ints.iter().enumerate() {
        let packet = CoherentPacket::new(i.t, i, &r.params);
        let mut header = vec![
            "x [length]",
            "Re psi exact [length^-1/2]",
            "Im psi exact [length^-1/2]",
        ];
        if grid_states.is_some() {
            header.extend(["Re psi grid [length^-1/2]", "Im psi grid [length^-1/2]"]);
        }
        let rows: Vec<Vec<String>> = xs
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                let v = packet.value(x);
                let mut row = vec![x, v.re, v.im];
                if let Some(states) = &grid_states {
                    let g = states[k].values()[j];
                    row.extend([g.re, g.im]);
                }
                numbers(&row)
            })
            .collect();
        let name = format!("snapshot_{k:03}.csv");
        out.write_csv(
            &name,
            &header,
            &rows,
            &format!("wave packet at t = {}", num(i.t)),
        )?;
        names.push(name);
    }

    let has_grid = grid_rows.is_some();
    out.write_json(
        "evolve_summary.json",
        &EvolveSummary {
            t_end,
            oracle: opts.oracle,
            width_sq,
            max_abs_diff_x: has_grid.then_some(diffs[0]),
            max_abs_diff_p: has_grid.then_some(diffs[1]),
            max_abs_diff_width_sq: has_grid.then_some(diffs[2]),
            snapshots: names,
        },
        "largest exact-versus-grid differences",
    )?;
    Ok(())
}
