//! Bundled figure-reproduction presets.
//!
//! Each preset runs the grids behind one published figure of the reference
//! device study and returns plottable datasets (no rendering). Frequencies
//! and rates are emitted in plain GHz (divided by 2π), fluxes in mΦ₀.
//!
//! Rough single-run costs, release build on four cores: most presets finish
//! in a few seconds; the dense minimize-over-amplitude maps (fig6 through
//! fig12) are the slowest at roughly five to fifteen seconds each.

use crate::dynamics::equilibrium_p11;
use crate::error::Error;
use crate::model::{DriveConfig, FluxQubitModel};
use crate::output::Dataset;
use crate::rates::{InterwellActivation, Method};
use crate::sweep::{
    default_amplitude_grid, linear_axis_values, log_axis_values, optimal_amplitude_over,
    pick_minimum, run_sweep, w12_envelope, Axis, AxisKind, CellFailure, SweepGrid, SweepResult,
};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::TAU;

/// One dataset produced by a preset, with the provenance the sidecar needs.
#[derive(Debug, Clone)]
pub struct EmittedDataset {
    pub dataset: Dataset,
    pub axes: Value,
    pub method: &'static str,
    pub failures: Vec<CellFailure>,
}

pub const PRESET_NAMES: [&str; 13] = [
    "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13",
    "fig14", "fig15",
];

fn method_name(method: Method) -> &'static str {
    match method {
        Method::Ordinary => "ordinary",
        Method::NewMethod => "new-method",
    }
}

fn column_name(kind: AxisKind) -> &'static str {
    match kind {
        AxisKind::DetuningDc => "detuning_dc_mphi0",
        AxisKind::PhiRf => "phi_rf_mphi0",
        AxisKind::Omega => "omega_ghz",
        AxisKind::Gamma2 => "gamma2_ghz",
    }
}

/// Internal (rad GHz) value in its emitted unit.
fn emit_value(kind: AxisKind, v: f64) -> f64 {
    match kind {
        AxisKind::Omega | AxisKind::Gamma2 => v / TAU,
        AxisKind::DetuningDc | AxisKind::PhiRf => v,
    }
}

fn axis_entry(kind: AxisKind, values: &[f64]) -> Value {
    let unit = match kind {
        AxisKind::Omega | AxisKind::Gamma2 => "ghz",
        AxisKind::DetuningDc | AxisKind::PhiRf => "mphi0",
    };
    json!({
        "param": serde_json::to_value(kind).unwrap(),
        "unit": unit,
        "count": values.len(),
        "min": emit_value(kind, values[0]),
        "max": emit_value(kind, *values.last().unwrap()),
    })
}

fn grid_axes_json(grid: &SweepGrid) -> Value {
    Value::Array(
        grid.axes
            .iter()
            .map(|a| axis_entry(a.kind, &a.values))
            .collect(),
    )
}

/// Flattens a sweep result into rows of axis values (emitted units) plus p11.
fn sweep_rows(result: &SweepResult) -> Vec<Vec<f64>> {
    let shape = result.grid.shape();
    let mut rows = Vec::with_capacity(result.p11.len());
    let mut idx = vec![0usize; shape.len()];
    for (flat, &p) in result.p11.iter().enumerate() {
        let mut rest = flat;
        for (k, &len) in shape.iter().enumerate().rev() {
            idx[k] = rest % len;
            rest /= len;
        }
        let mut row = Vec::with_capacity(shape.len() + 1);
        for (k, axis) in result.grid.axes.iter().enumerate() {
            row.push(emit_value(axis.kind, axis.values[idx[k]]));
        }
        row.push(p);
        rows.push(row);
    }
    rows
}

/// Runs a sweep grid and packages it as a named dataset with axis columns in
/// emitted units followed by `p11`.
pub fn sweep_dataset(
    name: &str,
    model: &FluxQubitModel,
    grid: &SweepGrid,
) -> Result<(EmittedDataset, SweepResult), Error> {
    let result = run_sweep(model, grid)?;
    let mut columns: Vec<String> = grid
        .axes
        .iter()
        .map(|a| column_name(a.kind).to_string())
        .collect();
    columns.push("p11".into());
    let dataset = Dataset {
        name: name.into(),
        columns,
        rows: sweep_rows(&result),
    };
    let emitted = EmittedDataset {
        dataset,
        axes: grid_axes_json(grid),
        method: method_name(grid.method),
        failures: result.failures.clone(),
    };
    Ok((emitted, result))
}

fn single_axis_dataset(
    name: &str,
    columns: [&str; 2],
    rows: Vec<Vec<f64>>,
    axes: Value,
    method: Method,
) -> EmittedDataset {
    EmittedDataset {
        dataset: Dataset {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        },
        axes,
        method: method_name(method),
        failures: Vec::new(),
    }
}

/// Per-outer-index minimum over the last (amplitude) axis of a 2-axis sweep.
fn per_row_minimum(result: &SweepResult) -> Vec<Option<(f64, f64)>> {
    let shape = result.grid.shape();
    let amp_values = &result.grid.axes[1].values;
    (0..shape[0])
        .map(|i| {
            let slice = &result.p11[i * shape[1]..(i + 1) * shape[1]];
            pick_minimum(amp_values, slice).map(|(j, v)| (amp_values[j], v))
        })
        .collect()
}

/// Map figure built from a frequency x amplitude sweep: the dense map plus
/// the per-frequency minimum population and minimizing amplitude curves.
fn amplitude_frequency_map(
    model: &FluxQubitModel,
    prefix: &str,
    method: Method,
    phi_range: (f64, f64),
    detuning_dc: f64,
    omegas: Vec<f64>,
) -> Result<Vec<EmittedDataset>, Error> {
    let grid = SweepGrid {
        axes: vec![
            Axis {
                kind: AxisKind::Omega,
                values: omegas.clone(),
            },
            Axis {
                kind: AxisKind::PhiRf,
                values: linear_axis_values(phi_range.0, phi_range.1, 0.01)?,
            },
        ],
        drive: DriveConfig {
            waveform: method.waveform(),
            phi_rf: phi_range.0,
            omega: omegas[0],
            detuning_dc,
        },
        method,
        activation: InterwellActivation::ShiftedGap,
    };
    let (map, result) = sweep_dataset(&format!("{prefix}a_population_map"), model, &grid)?;
    let minima = per_row_minimum(&result);
    let mut min_rows = Vec::with_capacity(omegas.len());
    let mut amp_rows = Vec::with_capacity(omegas.len());
    for (i, m) in minima.iter().enumerate() {
        let omega_ghz = omegas[i] / TAU;
        match m {
            Some((amp, p)) => {
                min_rows.push(vec![omega_ghz, *p]);
                amp_rows.push(vec![omega_ghz, *amp]);
            }
            None => {
                min_rows.push(vec![omega_ghz, f64::NAN]);
                amp_rows.push(vec![omega_ghz, f64::NAN]);
            }
        }
    }
    let axes = grid_axes_json(&grid);
    Ok(vec![
        map,
        single_axis_dataset(
            &format!("{prefix}b_min_population"),
            ["omega_ghz", "p11_min"],
            min_rows,
            axes.clone(),
            method,
        ),
        single_axis_dataset(
            &format!("{prefix}c_optimal_amplitude"),
            ["omega_ghz", "phi_rf_star_mphi0"],
            amp_rows,
            axes,
            method,
        ),
    ])
}

/// Minimize p11 over the default amplitude grid at every (omega, detuning)
/// cell. Rows are [omega_ghz, detuning, p11_min, phi_rf_star]; failed cells
/// hold NaN and appear in the failure manifest.
fn min_map_det_omega(
    model: &FluxQubitModel,
    method: Method,
    omegas: &[f64],
    dets: &[f64],
) -> (Vec<Vec<f64>>, Vec<CellFailure>) {
    let total = omegas.len() * dets.len();
    let outcomes: Vec<Result<(f64, f64), String>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let omega = omegas[flat / dets.len()];
            let det = dets[flat % dets.len()];
            let amps = default_amplitude_grid(method, det, model.crossover);
            optimal_amplitude_over(model, det, omega, method, &amps)
                .map(|p| (p.p11_star, p.phi_rf_star))
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut rows = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for (flat, outcome) in outcomes.into_iter().enumerate() {
        let omega_ghz = omegas[flat / dets.len()] / TAU;
        let det = dets[flat % dets.len()];
        match outcome {
            Ok((p, amp)) => rows.push(vec![omega_ghz, det, p, amp]),
            Err(message) => {
                rows.push(vec![omega_ghz, det, f64::NAN, f64::NAN]);
                failures.push(CellFailure {
                    index: flat,
                    message,
                });
            }
        }
    }
    (rows, failures)
}

/// Same minimization over a (gamma2, omega) grid at fixed detuning.
fn min_map_gamma_omega(
    model: &FluxQubitModel,
    method: Method,
    detuning_dc: f64,
    gammas: &[f64],
    omegas: &[f64],
) -> (Vec<Vec<f64>>, Vec<CellFailure>) {
    let total = gammas.len() * omegas.len();
    let outcomes: Vec<Result<(f64, f64), String>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let gamma2 = gammas[flat / omegas.len()];
            let omega = omegas[flat % omegas.len()];
            let cell_model = model.with_gamma2(gamma2);
            let amps = default_amplitude_grid(method, detuning_dc, cell_model.crossover);
            optimal_amplitude_over(&cell_model, detuning_dc, omega, method, &amps)
                .map(|p| (p.p11_star, p.phi_rf_star))
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut rows = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for (flat, outcome) in outcomes.into_iter().enumerate() {
        let gamma_ghz = gammas[flat / omegas.len()] / TAU;
        let omega_ghz = omegas[flat % omegas.len()] / TAU;
        match outcome {
            Ok((p, amp)) => rows.push(vec![gamma_ghz, omega_ghz, p, amp]),
            Err(message) => {
                rows.push(vec![gamma_ghz, omega_ghz, f64::NAN, f64::NAN]);
                failures.push(CellFailure {
                    index: flat,
                    message,
                });
            }
        }
    }
    (rows, failures)
}

/// Per-detuning minimum over the default amplitude grid at one frequency.
fn min_by_detuning(
    model: &FluxQubitModel,
    method: Method,
    omega: f64,
    dets: &[f64],
) -> (Vec<(f64, f64, f64)>, Vec<CellFailure>) {
    let (rows, failures) = min_map_det_omega(model, method, &[omega], dets);
    (
        rows.into_iter().map(|r| (r[1], r[3], r[2])).collect(),
        failures,
    )
}

fn fig3(model: &FluxQubitModel) -> Result<Vec<EmittedDataset>, Error> {
    let method = Method::Ordinary;
    let omegas = log_axis_values(TAU * 0.001, TAU * 2.0, 40.0)?;
    let dets = linear_axis_values(-1.0, 1.0, 0.01)?;
    let drive = DriveConfig {
        waveform: method.waveform(),
        phi_rf: 8.4,
        omega: TAU * 0.005,
        detuning_dc: 0.05,
    };
    let map_grid = SweepGrid {
        axes: vec![
            Axis {
                kind: AxisKind::Omega,
                values: omegas.clone(),
            },
            Axis {
                kind: AxisKind::DetuningDc,
                values: dets.clone(),
            },
        ],
        drive,
        method,
        activation: InterwellActivation::ShiftedGap,
    };
    let (map, _) = sweep_dataset("fig3a_population_map", model, &map_grid)?;
    let slice_grid = SweepGrid {
        axes: vec![Axis {
            kind: AxisKind::Omega,
            values: omegas,
        }],
        drive,
        method,
        activation: InterwellActivation::ShiftedGap,
    };
    let (freq_slice, _) = sweep_dataset("fig3b_frequency_slice", model, &slice_grid)?;
    let det_grid = SweepGrid {
        axes: vec![Axis {
            kind: AxisKind::DetuningDc,
            values: dets,
        }],
        drive: DriveConfig {
            omega: TAU * 1.46,
            ..drive
        },
        method,
        activation: InterwellActivation::ShiftedGap,
    };
    let (det_slice, _) = sweep_dataset("fig3c_detuning_slice", model, &det_grid)?;
    Ok(vec![map, freq_slice, det_slice])
}

fn fig6(model: &FluxQubitModel) -> Result<Vec<EmittedDataset>, Error> {
    let method = Method::Ordinary;
    let omegas = log_axis_values(TAU * 0.002, TAU * 2.0, 12.0)?;
    let dets = linear_axis_values(0.1, 3.0, 0.1)?;
    let (rows, failures) = min_map_det_omega(model, method, &omegas, &dets);
    let axes = json!([
        axis_entry(AxisKind::Omega, &omegas),
        axis_entry(AxisKind::DetuningDc, &dets),
        {"param": "phi_rf", "note": "minimized over the default amplitude grid"},
    ]);
    let slice_det = dets
        .iter()
        .copied()
        .min_by(|a, b| (a - 0.5).abs().total_cmp(&(b - 0.5).abs()))
        .unwrap();
    let slice_rows: Vec<Vec<f64>> = rows
        .iter()
        .filter(|r| r[1] == slice_det)
        .map(|r| vec![r[0], r[2]])
        .collect();
    let map = EmittedDataset {
        dataset: Dataset {
            name: "fig6a_min_population_map".into(),
            columns: vec![
                "omega_ghz".into(),
                "detuning_dc_mphi0".into(),
                "p11_min".into(),
                "phi_rf_star_mphi0".into(),
            ],
            rows,
        },
        axes: axes.clone(),
        method: method_name(method),
        failures,
    };
    let slice = single_axis_dataset(
        "fig6b_min_population_slice",
        ["omega_ghz", "p11_min"],
        slice_rows,
        axes.clone(),
        method,
    );
    let (amp_rows, amp_failures) = min_by_detuning(model, method, TAU * 0.005, &dets);
    let amps = EmittedDataset {
        dataset: Dataset {
            name: "fig6c_optimal_amplitude_5mhz".into(),
            columns: vec!["detuning_dc_mphi0".into(), "phi_rf_star_mphi0".into()],
            rows: amp_rows.iter().map(|&(d, a, _)| vec![d, a]).collect(),
        },
        axes,
        method: method_name(method),
        failures: amp_failures,
    };
    Ok(vec![map, slice, amps])
}

fn fig8(model: &FluxQubitModel) -> Result<Vec<EmittedDataset>, Error> {
    let method = Method::Ordinary;
    let strong = model.with_gamma2(TAU * 1.0);
    let omegas = log_axis_values(TAU * 0.002, TAU * 2.0, 12.0)?;
    let dets = linear_axis_values(0.1, 3.0, 0.1)?;
    let (rows, failures) = min_map_det_omega(&strong, method, &omegas, &dets);
    let map = EmittedDataset {
        dataset: Dataset {
            name: "fig8a_min_population_map".into(),
            columns: vec![
                "omega_ghz".into(),
                "detuning_dc_mphi0".into(),
                "p11_min".into(),
                "phi_rf_star_mphi0".into(),
            ],
            rows,
        },
        axes: json!([
            axis_entry(AxisKind::Omega, &omegas),
            axis_entry(AxisKind::DetuningDc, &dets),
        ]),
        method: method_name(method),
        failures,
    };
    let omega5 = TAU * 0.005;
    let (weak_rows, mut cmp_failures) = min_by_detuning(model, method, omega5, &dets);
    let (strong_rows, strong_failures) = min_by_detuning(&strong, method, omega5, &dets);
    cmp_failures.extend(strong_failures);
    let mut cmp = Vec::with_capacity(dets.len());
    for (i, &det) in dets.iter().enumerate() {
        let eq = equilibrium_p11(model, det)?;
        cmp.push(vec![det, weak_rows[i].2, strong_rows[i].2, eq]);
    }
    let comparison = EmittedDataset {
        dataset: Dataset {
            name: "fig8b_min_population_5mhz".into(),
            columns: vec![
                "detuning_dc_mphi0".into(),
                "p11_min_weak".into(),
                "p11_min_strong".into(),
                "p11_equilibrium".into(),
            ],
            rows: cmp,
        },
        axes: json!([axis_entry(AxisKind::DetuningDc, &dets)]),
        method: method_name(method),
        failures: cmp_failures,
    };
    Ok(vec![map, comparison])
}

fn fig9_or_12(
    model: &FluxQubitModel,
    name: &str,
    method: Method,
) -> Result<Vec<EmittedDataset>, Error> {
    let gammas = log_axis_values(TAU * 0.01, TAU * 2.0, 8.0)?;
    let omegas = log_axis_values(TAU * 0.002, TAU * 2.0, 12.0)?;
    let (rows, failures) = min_map_gamma_omega(model, method, 0.05, &gammas, &omegas);
    Ok(vec![EmittedDataset {
        dataset: Dataset {
            name: format!("{name}_min_population_map"),
            columns: vec![
                "gamma2_ghz".into(),
                "omega_ghz".into(),
                "p11_min".into(),
                "phi_rf_star_mphi0".into(),
            ],
            rows,
        },
        axes: json!([
            axis_entry(AxisKind::Gamma2, &gammas),
            axis_entry(AxisKind::Omega, &omegas),
        ]),
        method: method_name(method),
        failures,
    }])
}

fn fig10(model: &FluxQubitModel) -> Result<Vec<EmittedDataset>, Error> {
    let strong = model.with_gamma2(TAU * 1.0);
    let omega = TAU * 0.005;
    let dets = linear_axis_values(0.1, 3.0, 0.1)?;
    let mut out = Vec::new();
    let mut per_method = Vec::new();
    for (name, method, phi_range) in [
        (
            "fig10a_population_map_ordinary",
            Method::Ordinary,
            (5.2, 9.2),
        ),
        (
            "fig10b_population_map_new_method",
            Method::NewMethod,
            (2.0, 5.0),
        ),
    ] {
        let grid = SweepGrid {
            axes: vec![
                Axis {
                    kind: AxisKind::PhiRf,
                    values: linear_axis_values(phi_range.0, phi_range.1, 0.01)?,
                },
                Axis {
                    kind: AxisKind::DetuningDc,
                    values: dets.clone(),
                },
            ],
            drive: DriveConfig {
                waveform: method.waveform(),
                phi_rf: phi_range.0,
                omega,
                detuning_dc: dets[0],
            },
            method,
            activation: InterwellActivation::ShiftedGap,
        };
        let (map, result) = sweep_dataset(name, &strong, &grid)?;
        out.push(map);
        // Per-detuning minimum over the amplitude (outer) axis.
        let shape = result.grid.shape();
        let phi_values = &result.grid.axes[0].values;
        let mins: Vec<Option<(f64, f64)>> = (0..shape[1])
            .map(|j| {
                let column: Vec<f64> = (0..shape[0])
                    .map(|i| result.p11[i * shape[1] + j])
                    .collect();
                pick_minimum(phi_values, &column).map(|(i, v)| (phi_values[i], v))
            })
            .collect();
        per_method.push(mins);
    }
    let mut min_rows = Vec::with_capacity(dets.len());
    let mut amp_rows = Vec::with_capacity(dets.len());
    for (j, &det) in dets.iter().enumerate() {
        let (a_ord, p_ord) = per_method[0][j].unwrap_or((f64::NAN, f64::NAN));
        let (a_new, p_new) = per_method[1][j].unwrap_or((f64::NAN, f64::NAN));
        let eq = equilibrium_p11(model, det)?;
        min_rows.push(vec![det, p_ord, p_new, eq]);
        amp_rows.push(vec![det, a_ord, a_new]);
    }
    out.push(EmittedDataset {
        dataset: Dataset {
            name: "fig10c_min_population".into(),
            columns: vec![
                "detuning_dc_mphi0".into(),
                "p11_min_ordinary".into(),
                "p11_min_new_method".into(),
                "p11_equilibrium".into(),
            ],
            rows: min_rows,
        },
        axes: json!([axis_entry(AxisKind::DetuningDc, &dets)]),
        method: "both",
        failures: Vec::new(),
    });
    out.push(EmittedDataset {
        dataset: Dataset {
            name: "fig10d_optimal_amplitude".into(),
            columns: vec![
                "detuning_dc_mphi0".into(),
                "phi_rf_star_ordinary_mphi0".into(),
                "phi_rf_star_new_method_mphi0".into(),
            ],
            rows: amp_rows,
        },
        axes: json!([axis_entry(AxisKind::DetuningDc, &dets)]),
        method: "both",
        failures: Vec::new(),
    });
    Ok(out)
}

fn envelope_rows(
    model: &FluxQubitModel,
    detuning_dc: f64,
    gamma2: f64,
    omegas: &[f64],
) -> Result<Vec<Vec<f64>>, Error> {
    Ok(w12_envelope(model, detuning_dc, gamma2, omegas)?
        .into_iter()
        .map(|p| vec![p.omega / TAU, p.w12_max / TAU, p.phi_rf_star])
        .collect())
}

fn fig13(model: &FluxQubitModel) -> Result<Vec<EmittedDataset>, Error> {
    let method = Method::NewMethod;
    let det = 0.05;
    // The rate expression holds in the incoherent regime, drive slower than
    // the dephasing, so each envelope scan stops at omega = gamma2.  Past
    // that point isolated photon resonances inflate the envelope and would
    // misplace the peak frequency.
    let gammas: Vec<f64> = [0.05, 0.1, 0.2, 0.5, 1.0].iter().map(|g| TAU * g).collect();
    let mut stacked = Vec::new();
    let mut peaks = Vec::new();
    let mut by_gamma = Vec::new();
    let mut omegas_by_gamma = Vec::new();
    for &gamma2 in &gammas {
        let omegas = log_axis_values(TAU * 0.001, gamma2, 40.0)?;
        let rows = envelope_rows(model, det, gamma2, &omegas)?;
        let mut best = &rows[0];
        for r in &rows[1..] {
            if r[1] > best[1] {
                best = r;
            }
        }
        peaks.push(vec![gamma2 / TAU, best[0], best[1]]);
        for r in &rows {
            stacked.push(vec![gamma2 / TAU, r[0], r[1], r[2]]);
        }
        by_gamma.push(rows);
        omegas_by_gamma.push(omegas);
    }
    let env_cols = vec![
        "omega_ghz".to_string(),
        "w12_max_ghz".to_string(),
        "phi_rf_star_mphi0".to_string(),
    ];
    let axes_for = |omegas: &[f64]| {
        json!([
            axis_entry(AxisKind::Omega, omegas),
            {"param": "phi_rf", "note": "maximized over the default amplitude grid"},
        ])
    };
    let mut out = vec![
        EmittedDataset {
            dataset: Dataset {
                name: "fig13a_cooling_rate_envelope".into(),
                columns: env_cols.clone(),
                rows: by_gamma[0].clone(),
            },
            axes: axes_for(&omegas_by_gamma[0]),
            method: method_name(method),
            failures: Vec::new(),
        },
        EmittedDataset {
            dataset: Dataset {
                name: "fig13b_cooling_rate_envelope".into(),
                columns: env_cols,
                rows: by_gamma[4].clone(),
            },
            axes: axes_for(&omegas_by_gamma[4]),
            method: method_name(method),
            failures: Vec::new(),
        },
    ];
    let weakest = model.with_gamma2(gammas[0]);
    let (min_rows, min_failures) = min_map_det_omega(&weakest, method, &omegas_by_gamma[0], &[det]);
    out.push(EmittedDataset {
        dataset: Dataset {
            name: "fig13c_min_population".into(),
            columns: vec![
                "omega_ghz".into(),
                "p11_min".into(),
                "phi_rf_star_mphi0".into(),
            ],
            rows: min_rows
                .into_iter()
                .map(|r| vec![r[0], r[2], r[3]])
                .collect(),
        },
        axes: axes_for(&omegas_by_gamma[0]),
        method: method_name(method),
        failures: min_failures,
    });
    out.push(EmittedDataset {
        dataset: Dataset {
            name: "fig13d_peak_frequency".into(),
            columns: vec![
                "gamma2_ghz".into(),
                "omega_peak_ghz".into(),
                "w12_peak_ghz".into(),
            ],
            rows: peaks,
        },
        axes: json!([{"param": "gamma2", "unit": "ghz", "values": [0.05, 0.1, 0.2, 0.5, 1.0]}]),
        method: method_name(method),
        failures: Vec::new(),
    });
    out.push(EmittedDataset {
        dataset: Dataset {
            name: "fig13d_envelopes".into(),
            columns: vec![
                "gamma2_ghz".into(),
                "omega_ghz".into(),
                "w12_max_ghz".into(),
                "phi_rf_star_mphi0".into(),
            ],
            rows: stacked,
        },
        axes: json!([
            {"param": "gamma2", "unit": "ghz", "values": [0.05, 0.1, 0.2, 0.5, 1.0]},
            {"param": "omega", "unit": "ghz", "note": "log grid from 0.001 up to each gamma2"},
        ]),
        method: method_name(method),
        failures: Vec::new(),
    });
    Ok(out)
}

fn fig14(model: &FluxQubitModel) -> Result<Vec<EmittedDataset>, Error> {
    let method = Method::NewMethod;
    let det = 3.0;
    let gamma2 = TAU * 0.05;
    let omegas = log_axis_values(TAU * 0.001, gamma2, 40.0)?;
    let axes = json!([
        axis_entry(AxisKind::Omega, &omegas),
        {"param": "phi_rf", "note": "extremized over the default amplitude grid"},
    ]);
    let envelope = EmittedDataset {
        dataset: Dataset {
            name: "fig14a_cooling_rate_envelope".into(),
            columns: vec![
                "omega_ghz".into(),
                "w12_max_ghz".into(),
                "phi_rf_star_mphi0".into(),
            ],
            rows: envelope_rows(model, det, gamma2, &omegas)?,
        },
        axes: axes.clone(),
        method: method_name(method),
        failures: Vec::new(),
    };
    let scan_model = model.with_gamma2(gamma2);
    let (min_rows, min_failures) = min_map_det_omega(&scan_model, method, &omegas, &[det]);
    let minimum = EmittedDataset {
        dataset: Dataset {
            name: "fig14b_min_population".into(),
            columns: vec![
                "omega_ghz".into(),
                "p11_min".into(),
                "phi_rf_star_mphi0".into(),
            ],
            rows: min_rows
                .into_iter()
                .map(|r| vec![r[0], r[2], r[3]])
                .collect(),
        },
        axes,
        method: method_name(method),
        failures: min_failures,
    };
    Ok(vec![envelope, minimum])
}

fn fig15(model: &FluxQubitModel) -> Result<Vec<EmittedDataset>, Error> {
    let method = Method::NewMethod;
    let det = 0.05;
    let mut amp_rows = Vec::new();
    for gamma_ghz in [0.05, 1.0] {
        let gamma2 = TAU * gamma_ghz;
        let omegas = log_axis_values(TAU * 0.001, gamma2, 40.0)?;
        let rows = envelope_rows(model, det, gamma2, &omegas)?;
        for r in rows {
            amp_rows.push(vec![gamma_ghz, r[0], r[2]]);
        }
    }
    let amps = EmittedDataset {
        dataset: Dataset {
            name: "fig15_optimal_amplitude".into(),
            columns: vec![
                "gamma2_ghz".into(),
                "omega_ghz".into(),
                "phi_rf_star_mphi0".into(),
            ],
            rows: amp_rows,
        },
        axes: json!([
            {"param": "gamma2", "unit": "ghz", "values": [0.05, 1.0]},
            {"param": "omega", "unit": "ghz", "note": "log grid from 0.001 up to each gamma2"},
        ]),
        method: method_name(method),
        failures: Vec::new(),
    };
    let inset_gammas = log_axis_values(TAU * 0.01, TAU * 2.0, 8.0)?;
    let inset_omegas = log_axis_values(TAU * 0.002, TAU * 2.0, 12.0)?;
    let mut inset_rows = Vec::new();
    for &gamma2 in &inset_gammas {
        // Keep the grid rectangular: cells past the incoherent-regime edge
        // (omega above gamma2) carry NaN instead of an extrapolated value.
        let in_range: Vec<f64> = inset_omegas
            .iter()
            .copied()
            .filter(|&omega| omega <= gamma2)
            .collect();
        let rows = if in_range.is_empty() {
            Vec::new()
        } else {
            envelope_rows(model, det, gamma2, &in_range)?
        };
        for (k, &omega) in inset_omegas.iter().enumerate() {
            if k < rows.len() {
                inset_rows.push(vec![gamma2 / TAU, rows[k][0], rows[k][2]]);
            } else {
                inset_rows.push(vec![gamma2 / TAU, omega / TAU, f64::NAN]);
            }
        }
    }
    let inset = EmittedDataset {
        dataset: Dataset {
            name: "fig15_inset_optimal_amplitude".into(),
            columns: vec![
                "gamma2_ghz".into(),
                "omega_ghz".into(),
                "phi_rf_star_mphi0".into(),
            ],
            rows: inset_rows,
        },
        axes: json!([
            axis_entry(AxisKind::Gamma2, &inset_gammas),
            axis_entry(AxisKind::Omega, &inset_omegas),
            {"note": "cells with omega above gamma2 fall outside the incoherent regime and are NaN"},
        ]),
        method: method_name(method),
        failures: Vec::new(),
    };
    Ok(vec![amps, inset])
}

fn fig5(model: &FluxQubitModel) -> Result<Vec<EmittedDataset>, Error> {
    let method = Method::Ordinary;
    let phis = linear_axis_values(5.2, 9.2, 0.01)?;
    let dets = linear_axis_values(-1.0, 1.0, 0.01)?;
    let grid = SweepGrid {
        axes: vec![
            Axis {
                kind: AxisKind::PhiRf,
                values: phis.clone(),
            },
            Axis {
                kind: AxisKind::DetuningDc,
                values: dets.clone(),
            },
        ],
        drive: DriveConfig {
            waveform: method.waveform(),
            phi_rf: 8.4,
            omega: TAU * 0.005,
            detuning_dc: 0.05,
        },
        method,
        activation: InterwellActivation::ShiftedGap,
    };
    let (map, result) = sweep_dataset("fig5a_population_map", model, &grid)?;
    let mut rows = Vec::with_capacity(dets.len());
    for (j, &det) in dets.iter().enumerate() {
        let column: Vec<f64> = (0..phis.len())
            .map(|i| result.p11[i * dets.len() + j])
            .collect();
        match pick_minimum(&phis, &column) {
            Some((i, p)) => rows.push(vec![det, phis[i], p]),
            None => rows.push(vec![det, f64::NAN, f64::NAN]),
        }
    }
    let minima = EmittedDataset {
        dataset: Dataset {
            name: "fig5b_optimal_amplitude".into(),
            columns: vec![
                "detuning_dc_mphi0".into(),
                "phi_rf_star_mphi0".into(),
                "p11_min".into(),
            ],
            rows,
        },
        axes: grid_axes_json(&grid),
        method: method_name(method),
        failures: Vec::new(),
    };
    Ok(vec![map, minima])
}

/// Runs a bundled preset against a device model (normally the reference one)
/// and returns its datasets. Presets that study strong dephasing override the
/// model's `gamma2` as the corresponding figure does.
pub fn run_preset(name: &str, model: &FluxQubitModel) -> Result<Vec<EmittedDataset>, Error> {
    let omegas_full = || log_axis_values(TAU * 0.001, TAU * 2.0, 40.0);
    match name {
        "fig3" => fig3(model),
        "fig4" => amplitude_frequency_map(
            model,
            "fig4",
            Method::Ordinary,
            (5.2, 9.2),
            0.05,
            omegas_full()?,
        ),
        "fig5" => fig5(model),
        "fig6" => fig6(model),
        "fig7" => amplitude_frequency_map(
            &model.with_gamma2(TAU * 1.0),
            "fig7",
            Method::Ordinary,
            (5.2, 9.2),
            0.05,
            omegas_full()?,
        ),
        "fig8" => fig8(model),
        "fig9" => fig9_or_12(model, "fig9", Method::Ordinary),
        "fig10" => fig10(model),
        "fig11" => amplitude_frequency_map(
            &model.with_gamma2(TAU * 1.0),
            "fig11",
            Method::NewMethod,
            (2.0, 5.0),
            0.05,
            omegas_full()?,
        ),
        "fig12" => fig9_or_12(model, "fig12", Method::NewMethod),
        "fig13" => fig13(model),
        "fig14" => fig14(model),
        "fig15" => fig15(model),
        other => Err(Error::Config {
            path: format!("figure {other}"),
            message: format!("unknown preset; valid presets: {}", PRESET_NAMES.join(", ")),
        }),
    }
}
