//! Grid sweeps over operating parameters, optimum extraction, linear
//! amplitude-condition fits, and the peak-cooling-rate frequency analysis.
//!
//! Cells of a sweep are independent steady-state solves; the engine runs
//! them in parallel and reduces positionally, so results are bit-identical
//! regardless of worker count or scheduling.

use crate::dynamics::steady_state;
use crate::error::Error;
use crate::model::{build_channels, DriveConfig, FluxQubitModel};
use crate::output::canonical_hash;
use crate::rates::{assemble_generator, mdlz_rate, InterwellActivation, Method};
use crate::specfun::shared_cache;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Parameter a sweep axis varies. Frequencies and dephasing rates are in
/// internal units (rad GHz); fluxes in mPhi0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    DetuningDc,
    PhiRf,
    Omega,
    Gamma2,
}

/// One sweep axis: the parameter it varies and its strictly increasing
/// values.
#[derive(Debug, Clone, Serialize)]
pub struct Axis {
    pub kind: AxisKind,
    pub values: Vec<f64>,
}

/// A dense sweep specification. `drive` supplies every parameter no axis
/// overrides; the dephasing rate defaults to the model's.
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    pub drive: DriveConfig,
    pub method: Method,
    pub activation: InterwellActivation,
}

const MAX_CELLS: usize = 20_000_000;

impl SweepGrid {
    /// Axis lengths, outermost first (the last axis varies fastest in the
    /// flattened result).
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    /// Total cell count.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// True when any axis is empty.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self) -> Result<(), Error> {
        if self.axes.is_empty() {
            return Err(Error::Domain("a sweep needs at least one axis".into()));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if a.values.is_empty() {
                return Err(Error::Domain(format!(
                    "sweep axis {i} ({:?}) is empty",
                    a.kind
                )));
            }
            for pair in a.values.windows(2) {
                if !(pair[1] > pair[0]) {
                    return Err(Error::Domain(format!(
                        "sweep axis {i} ({:?}) is not strictly increasing at {} -> {}",
                        a.kind, pair[0], pair[1]
                    )));
                }
            }
            if a.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!(
                    "sweep axis {i} ({:?}) contains a nonfinite value",
                    a.kind
                )));
            }
            for other in &self.axes[..i] {
                if other.kind == a.kind {
                    return Err(Error::Domain(format!(
                        "sweep axis {:?} appears more than once",
                        a.kind
                    )));
                }
            }
        }
        if self.drive.waveform != self.method.waveform() {
            return Err(Error::Domain(format!(
                "drive waveform {:?} does not match method {:?}",
                self.drive.waveform, self.method
            )));
        }
        if self.len() > MAX_CELLS {
            return Err(Error::Domain(format!(
                "sweep has {} cells, above the supported maximum {MAX_CELLS}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// A cell whose solve failed; its result slot holds NaN.
#[derive(Debug, Clone, Serialize)]
pub struct CellFailure {
    /// Flattened row-major index (last axis fastest).
    pub index: usize,
    pub message: String,
}

/// Dense sweep output: `p11` in row-major order over the grid shape.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub p11: Vec<f64>,
    pub failures: Vec<CellFailure>,
    /// SHA-256 over the serialized model and grid.
    pub model_hash: String,
    /// Human-readable statement of the sideband cutoff rule used.
    pub truncation_rule: String,
    /// Stamped by the I/O layer at write time; never set by the solver, so
    /// identical runs produce identical results.
    pub timestamp_unix: Option<u64>,
}

impl SweepResult {
    /// Value at a multi-index (one entry per axis).
    pub fn at(&self, indices: &[usize]) -> f64 {
        let shape = self.grid.shape();
        assert_eq!(indices.len(), shape.len());
        let mut flat = 0;
        for (i, (&idx, &len)) in indices.iter().zip(shape.iter()).enumerate() {
            assert!(idx < len, "index {idx} out of bounds for axis {i}");
            flat = flat * len + idx;
        }
        self.p11[flat]
    }
}

/// Statement of the sideband cutoff rule, recorded in sweep metadata.
pub fn truncation_rule() -> String {
    "n_max = ceil((|eps|+amp)/omega) + ceil(10*(amp/omega)^(1/3)) + 50*ceil(width/omega) + 100"
        .into()
}

/// Steady-state `p11` at every grid point.
///
/// Deterministic: the reduction is positional, so the output is bit-identical
/// for any worker count. A failing cell is recorded in `failures` with NaN in
/// its slot rather than aborting the sweep.
pub fn run_sweep(model: &FluxQubitModel, grid: &SweepGrid) -> Result<SweepResult, Error> {
    model.validate()?;
    grid.drive.validate()?;
    grid.validate()?;
    let total = grid.len();
    let shape = grid.shape();
    let outcomes: Vec<Result<f64, String>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let mut drive = grid.drive;
            let mut gamma2 = model.gamma2;
            for (axis, &len) in grid.axes.iter().zip(shape.iter()).rev() {
                let idx = rest % len;
                rest /= len;
                let v = axis.values[idx];
                match axis.kind {
                    AxisKind::DetuningDc => drive.detuning_dc = v,
                    AxisKind::PhiRf => drive.phi_rf = v,
                    AxisKind::Omega => drive.omega = v,
                    AxisKind::Gamma2 => gamma2 = v,
                }
            }
            let cell_model = model.with_gamma2(gamma2);
            assemble_generator(
                &cell_model,
                &drive,
                grid.method,
                grid.activation,
                shared_cache(),
            )
            .and_then(|(gen, _)| steady_state(&gen))
            .map(|state| state.p[1])
            .map_err(|e| e.to_string())
        })
        .collect();
    let mut p11 = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(v) => p11.push(v),
            Err(message) => {
                p11.push(f64::NAN);
                failures.push(CellFailure { index, message });
            }
        }
    }
    Ok(SweepResult {
        grid: grid.clone(),
        p11,
        failures,
        model_hash: canonical_hash(&(model, grid)),
        truncation_rule: truncation_rule(),
        timestamp_unix: None,
    })
}

/// Minimizing amplitude of a scan, with its population and edge flags.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimalPoint {
    /// Amplitude achieving the minimum (ties broken toward smaller values).
    pub phi_rf_star: f64,
    /// Drive frequency the scan was taken at (rad GHz).
    pub omega_star: f64,
    /// Minimized steady-state occupation of state 1.
    pub p11_star: f64,
    /// True when the argmin sits on the first or last scanned amplitude,
    /// meaning the optimum may lie outside the range.
    pub at_range_edge: bool,
}

/// Scan-centering heuristic: the amplitude whose excursion just reaches the
/// left-well excitation crossover.
pub fn predicted_optimal_amplitude(method: Method, detuning_dc: f64, crossover: f64) -> f64 {
    match method {
        Method::Ordinary => crossover - detuning_dc,
        Method::NewMethod => 0.5 * (crossover - detuning_dc),
    }
}

/// Dual-resolution amplitude scan grid: 0.01 mPhi0 within +-0.5 of the
/// predicted optimum, 0.05 from 2 below to 3.5 above it (floored at 0.05).
pub fn default_amplitude_grid(method: Method, detuning_dc: f64, crossover: f64) -> Vec<f64> {
    let pred = predicted_optimal_amplitude(method, detuning_dc, crossover);
    let fine_lo = pred - 0.5;
    let fine_hi = pred + 0.5;
    let mut amps = Vec::with_capacity(200);
    let coarse_lo = (pred - 2.0).max(0.05);
    let mut k = 0;
    loop {
        let v = coarse_lo + k as f64 * 0.05;
        if v >= fine_lo - 1e-9 {
            break;
        }
        amps.push(v);
        k += 1;
    }
    for k in 0..=100 {
        amps.push(fine_lo + k as f64 * 0.01);
    }
    for k in 1..=60 {
        amps.push(fine_hi + k as f64 * 0.05);
    }
    debug_assert!(amps.windows(2).all(|w| w[1] > w[0]));
    amps
}

pub(crate) fn pick_minimum(amps: &[f64], values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.filter(|_| !amps.is_empty())
}

/// Minimizes `p11` over an explicit list of amplitudes at fixed detuning and
/// frequency. The list must be strictly increasing.
pub fn optimal_amplitude_over(
    model: &FluxQubitModel,
    detuning_dc: f64,
    omega: f64,
    method: Method,
    amps: &[f64],
) -> Result<OptimalPoint, Error> {
    if amps.is_empty() {
        return Err(Error::Domain("amplitude scan list is empty".into()));
    }
    if amps.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(
            "amplitude scan list is not strictly increasing".into(),
        ));
    }
    let outcomes: Vec<Result<f64, String>> = amps
        .par_iter()
        .map(|&phi_rf| {
            let drive = DriveConfig {
                waveform: method.waveform(),
                phi_rf,
                omega,
                detuning_dc,
            };
            assemble_generator(
                model,
                &drive,
                method,
                InterwellActivation::ShiftedGap,
                shared_cache(),
            )
            .and_then(|(gen, _)| steady_state(&gen))
            .map(|state| state.p[1])
            .map_err(|e| e.to_string())
        })
        .collect();
    let values: Vec<f64> = outcomes
        .iter()
        .map(|o| *o.as_ref().unwrap_or(&f64::NAN))
        .collect();
    match pick_minimum(amps, &values) {
        Some((idx, p11_star)) => Ok(OptimalPoint {
            phi_rf_star: amps[idx],
            omega_star: omega,
            p11_star,
            at_range_edge: idx == 0 || idx == amps.len() - 1,
        }),
        None => {
            let first = outcomes
                .into_iter()
                .find_map(|o| o.err())
                .unwrap_or_else(|| "empty scan".into());
            Err(Error::Compute(format!(
                "every amplitude in the scan failed; first failure: {first}"
            )))
        }
    }
}

/// Minimizes `p11` over a uniform amplitude scan `lo, lo+step, ... <= hi`.
pub fn optimal_amplitude(
    model: &FluxQubitModel,
    detuning_dc: f64,
    omega: f64,
    method: Method,
    amp_range: (f64, f64),
    amp_step: f64,
) -> Result<OptimalPoint, Error> {
    let (lo, hi) = amp_range;
    if !lo.is_finite() || !hi.is_finite() || !(hi > lo) || lo < 0.0 {
        return Err(Error::Domain(format!(
            "amplitude range ({lo}, {hi}) must be finite, nonnegative, and increasing"
        )));
    }
    if !(amp_step > 0.0) || !amp_step.is_finite() {
        return Err(Error::Domain(format!(
            "amplitude step must be positive and finite, got {amp_step}"
        )));
    }
    let count = ((hi - lo) / amp_step + 1e-9).floor() as usize + 1;
    if count > 2_000_000 {
        return Err(Error::Domain(format!(
            "amplitude scan would have {count} points; widen the step"
        )));
    }
    let amps: Vec<f64> = (0..count).map(|k| lo + k as f64 * amp_step).collect();
    optimal_amplitude_over(model, detuning_dc, omega, method, &amps)
}

/// One detuning of an amplitude-condition fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitPoint {
    pub detuning_dc: f64,
    pub phi_rf_star: f64,
    /// Signed residual `phi_rf_star - (slope*detuning + intercept)`.
    pub residual: f64,
}

/// Least-squares line through per-detuning optimal amplitudes.
#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub points: Vec<FitPoint>,
}

/// Fits `phi_rf_star(detuning) = slope*detuning + intercept` over a detuning
/// list (deduplicated, at least three distinct values), scanning each
/// detuning with a 0.01-step window around the predicted optimum.
pub fn fit_amplitude_condition(
    model: &FluxQubitModel,
    detuning_list: &[f64],
    omega: f64,
    method: Method,
) -> Result<AmplitudeFit, Error> {
    model.validate()?;
    let mut detunings: Vec<f64> = detuning_list.to_vec();
    if detunings.iter().any(|d| !d.is_finite()) {
        return Err(Error::Domain(
            "detuning list contains a nonfinite value".into(),
        ));
    }
    detunings.sort_by(f64::total_cmp);
    detunings.dedup();
    if detunings.len() < 3 {
        return Err(Error::Domain(format!(
            "an amplitude-condition fit needs at least 3 distinct detunings, got {}",
            detunings.len()
        )));
    }
    let mut pairs = Vec::with_capacity(detunings.len());
    for &det in &detunings {
        let pred = predicted_optimal_amplitude(method, det, model.crossover);
        let mut point = optimal_amplitude(
            model,
            det,
            omega,
            method,
            ((pred - 0.5).max(0.01), pred + 0.8),
            0.01,
        )?;
        if point.at_range_edge {
            point = optimal_amplitude(
                model,
                det,
                omega,
                method,
                ((pred - 1.0).max(0.01), pred + 1.6),
                0.01,
            )?;
            if point.at_range_edge {
                return Err(Error::Compute(format!(
                    "optimal amplitude at detuning {det} is pinned to the scan edge {}",
                    point.phi_rf_star
                )));
            }
        }
        pairs.push((det, point.phi_rf_star));
    }
    let n = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|(x, _)| x).sum();
    let sy: f64 = pairs.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pairs.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pairs.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::Compute(
            "detunings are too clustered for a line fit".into(),
        ));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let points: Vec<FitPoint> = pairs
        .iter()
        .map(|&(detuning_dc, phi_rf_star)| FitPoint {
            detuning_dc,
            phi_rf_star,
            residual: phi_rf_star - (slope * detuning_dc + intercept),
        })
        .collect();
    let max_residual = points.iter().fold(0.0_f64, |m, p| m.max(p.residual.abs()));
    Ok(AmplitudeFit {
        slope,
        intercept,
        max_residual,
        points,
    })
}

/// Max-over-amplitude cooling rate at one frequency.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct W12EnvelopePoint {
    /// Drive frequency (rad GHz).
    pub omega: f64,
    /// Largest left-well excitation rate over the amplitude scan (rad GHz).
    pub w12_max: f64,
    /// Amplitude achieving it (ties broken toward smaller values).
    pub phi_rf_star: f64,
}

/// For each frequency, maximizes the one-sided left-well excitation rate
/// `W12` over the default amplitude grid.
pub fn w12_envelope(
    model: &FluxQubitModel,
    detuning_dc: f64,
    gamma2: f64,
    omega_range: &[f64],
) -> Result<Vec<W12EnvelopePoint>, Error> {
    let scan_model = model.with_gamma2(gamma2);
    scan_model.validate()?;
    if omega_range.is_empty() {
        return Err(Error::Domain("frequency list is empty".into()));
    }
    if omega_range.windows(2).any(|w| !(w[1] > w[0]))
        || omega_range.iter().any(|&w| !(w > 0.0) || !w.is_finite())
    {
        return Err(Error::Domain(
            "frequency list must be positive and strictly increasing".into(),
        ));
    }
    let amps = default_amplitude_grid(Method::NewMethod, detuning_dc, scan_model.crossover);
    omega_range
        .par_iter()
        .map(|&omega| {
            let mut best = f64::NEG_INFINITY;
            let mut best_amp = amps[0];
            for &phi_rf in &amps {
                let drive = DriveConfig {
                    waveform: Method::NewMethod.waveform(),
                    phi_rf,
                    omega,
                    detuning_dc,
                };
                let channel = build_channels(&scan_model, &drive)[1];
                let w12 = mdlz_rate(&channel, drive.waveform, omega, shared_cache())?;
                if w12 > best {
                    best = w12;
                    best_amp = phi_rf;
                }
            }
            Ok(W12EnvelopePoint {
                omega,
                w12_max: best,
                phi_rf_star: best_amp,
            })
        })
        .collect()
}

/// Frequency maximizing the max-over-amplitude cooling rate, with that rate.
pub fn peak_w12_frequency(
    model: &FluxQubitModel,
    detuning_dc: f64,
    gamma2: f64,
    omega_range: &[f64],
) -> Result<(f64, f64), Error> {
    let envelope = w12_envelope(model, detuning_dc, gamma2, omega_range)?;
    let mut best = &envelope[0];
    for point in &envelope[1..] {
        if point.w12_max > best.w12_max {
            best = point;
        }
    }
    Ok((best.omega, best.w12_max))
}

/// `start, start+step, ...` up to and including `stop` (within rounding).
pub fn linear_axis_values(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !start.is_finite() || !stop.is_finite() || !(stop >= start) {
        return Err(Error::Domain(format!(
            "linear axis bounds ({start}, {stop}) must be finite and ordered"
        )));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Domain(format!(
            "linear axis step must be positive, got {step}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > MAX_CELLS {
        return Err(Error::Domain(format!(
            "linear axis would have {count} points"
        )));
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// Logarithmically spaced values from `start` to `stop` at a points-per-decade
/// density (endpoints included).
pub fn log_axis_values(start: f64, stop: f64, points_per_decade: f64) -> Result<Vec<f64>, Error> {
    if !(start > 0.0) || !(stop > start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Domain(format!(
            "log axis bounds ({start}, {stop}) must be finite, positive, and increasing"
        )));
    }
    if !(points_per_decade > 0.0) || !points_per_decade.is_finite() {
        return Err(Error::Domain(format!(
            "points per decade must be positive, got {points_per_decade}"
        )));
    }
    let decades = (stop / start).log10();
    let n = ((points_per_decade * decades).round() as usize).max(1) + 1;
    if n > MAX_CELLS {
        return Err(Error::Domain(format!("log axis would have {n} points")));
    }
    let l0 = start.ln();
    let l1 = stop.ln();
    let values: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                start
            } else if k == n - 1 {
                stop
            } else {
                (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect();
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(
            "log axis span is too small to resolve distinct points".into(),
        ));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::equilibrium_p11;
    use crate::model::Waveform;
    use std::f64::consts::TAU;

    fn reference() -> FluxQubitModel {
        FluxQubitModel::reference()
    }

    fn base_drive(method: Method) -> DriveConfig {
        DriveConfig {
            waveform: method.waveform(),
            phi_rf: 8.4,
            omega: TAU * 0.005,
            detuning_dc: 0.05,
        }
    }

    fn grid(axes: Vec<Axis>) -> SweepGrid {
        SweepGrid {
            axes,
            drive: base_drive(Method::Ordinary),
            method: Method::Ordinary,
            activation: InterwellActivation::ShiftedGap,
        }
    }

    #[test]
    fn single_cell_sweep_equals_a_direct_solve() {
        let model = reference();
        let g = grid(vec![Axis {
            kind: AxisKind::Omega,
            values: vec![TAU * 0.005],
        }]);
        let result = run_sweep(&model, &g).unwrap();
        assert_eq!(result.p11.len(), 1);
        let (gen, _) = assemble_generator(
            &model,
            &base_drive(Method::Ordinary),
            Method::Ordinary,
            InterwellActivation::ShiftedGap,
            shared_cache(),
        )
        .unwrap();
        let direct = steady_state(&gen).unwrap().p[1];
        assert_eq!(result.p11[0].to_bits(), direct.to_bits());
        assert!(result.failures.is_empty());
        assert_eq!(result.model_hash.len(), 64);
    }

    #[test]
    fn sweep_is_bit_identical_across_worker_counts() {
        let model = reference();
        let g = grid(vec![
            Axis {
                kind: AxisKind::DetuningDc,
                values: vec![-0.3, 0.05, 0.4],
            },
            Axis {
                kind: AxisKind::Omega,
                values: log_axis_values(TAU * 0.01, TAU * 0.1, 4.0).unwrap(),
            },
        ]);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_sweep(&model, &g))
            .unwrap();
        let eight = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| run_sweep(&model, &g))
            .unwrap();
        assert_eq!(single.p11.len(), eight.p11.len());
        for (a, b) in single.p11.iter().zip(eight.p11.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(single.model_hash, eight.model_hash);
    }

    #[test]
    fn sweep_rows_follow_the_low_frequency_trend() {
        let model = reference();
        let omegas = log_axis_values(TAU * 0.0126, TAU * 0.1, 10.0).unwrap();
        let g = grid(vec![Axis {
            kind: AxisKind::Omega,
            values: omegas.clone(),
        }]);
        let result = run_sweep(&model, &g).unwrap();
        assert!(result.failures.is_empty());
        for pair in result.p11.windows(2) {
            assert!(
                pair[1] > pair[0],
                "population should rise with frequency here"
            );
        }
        assert!(result.p11.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn failing_cells_are_recorded_not_fatal() {
        let model = reference();
        let g = grid(vec![Axis {
            kind: AxisKind::Gamma2,
            values: vec![0.0, TAU * 0.06],
        }]);
        let result = run_sweep(&model, &g).unwrap();
        assert_eq!(result.failures.len(), 1);
        assert_eq!(result.failures[0].index, 0);
        assert!(result.p11[0].is_nan());
        assert!(result.p11[1].is_finite());
    }

    #[test]
    fn grid_validation_catches_malformed_axes() {
        let model = reference();
        assert!(run_sweep(&model, &grid(vec![])).is_err());
        assert!(run_sweep(
            &model,
            &grid(vec![Axis {
                kind: AxisKind::Omega,
                values: vec![],
            }])
        )
        .is_err());
        assert!(run_sweep(
            &model,
            &grid(vec![Axis {
                kind: AxisKind::Omega,
                values: vec![TAU * 0.01, TAU * 0.01],
            }])
        )
        .is_err());
        assert!(run_sweep(
            &model,
            &grid(vec![
                Axis {
                    kind: AxisKind::Omega,
                    values: vec![TAU * 0.01],
                },
                Axis {
                    kind: AxisKind::Omega,
                    values: vec![TAU * 0.02],
                },
            ])
        )
        .is_err());
        let mut mismatched = grid(vec![Axis {
            kind: AxisKind::Omega,
            values: vec![TAU * 0.01],
        }]);
        mismatched.drive.waveform = Waveform::OneSided;
        assert!(run_sweep(&model, &mismatched).is_err());
    }

    #[test]
    fn optimum_lands_at_the_known_weak_decoherence_amplitude() {
        let model = reference();
        let point = optimal_amplitude(
            &model,
            0.05,
            TAU * 0.005,
            Method::Ordinary,
            (7.9, 8.8),
            0.01,
        )
        .unwrap();
        assert!(
            (point.phi_rf_star - 8.35).abs() <= 0.05,
            "phi_rf_star = {}",
            point.phi_rf_star
        );
        assert!(!point.at_range_edge);
        assert!(point.p11_star < 0.5 * equilibrium_p11(&model, 0.05).unwrap());
    }

    #[test]
    fn refining_the_scan_never_worsens_the_optimum() {
        let model = reference();
        let coarse = optimal_amplitude(
            &model,
            0.05,
            TAU * 0.005,
            Method::Ordinary,
            (8.0, 8.7),
            0.02,
        )
        .unwrap();
        let fine = optimal_amplitude(
            &model,
            0.05,
            TAU * 0.005,
            Method::Ordinary,
            (8.0, 8.7),
            0.01,
        )
        .unwrap();
        assert!(fine.p11_star <= coarse.p11_star);
    }

    #[test]
    fn minimum_picking_breaks_ties_toward_smaller_amplitude() {
        let amps = [1.0, 2.0, 3.0, 4.0];
        let values = [0.5, 0.25, 0.25, 0.7];
        let (idx, v) = pick_minimum(&amps, &values).unwrap();
        assert_eq!(idx, 1);
        assert_eq!(v, 0.25);
        let with_nan = [f64::NAN, 0.4, f64::NAN, 0.3];
        let (idx, _) = pick_minimum(&amps, &with_nan).unwrap();
        assert_eq!(idx, 3);
        assert!(pick_minimum(&amps, &[f64::NAN; 4]).is_none());
    }

    #[test]
    fn all_failed_scan_is_an_error() {
        let model = reference().with_gamma2(0.0);
        assert!(matches!(
            optimal_amplitude(
                &model,
                0.05,
                TAU * 0.005,
                Method::Ordinary,
                (8.0, 8.2),
                0.05
            ),
            Err(Error::Compute(_))
        ));
    }

    #[test]
    fn duplicated_detunings_do_not_change_the_fit() {
        let model = reference();
        let base = fit_amplitude_condition(&model, &[0.5, 1.0, 1.5], TAU * 0.005, Method::Ordinary)
            .unwrap();
        let dup = fit_amplitude_condition(
            &model,
            &[0.5, 1.0, 1.0, 1.5, 0.5],
            TAU * 0.005,
            Method::Ordinary,
        )
        .unwrap();
        assert_eq!(base.slope.to_bits(), dup.slope.to_bits());
        assert_eq!(base.intercept.to_bits(), dup.intercept.to_bits());
        assert!((base.slope + 1.0).abs() < 0.1, "slope = {}", base.slope);
        assert!(
            (8.3..=8.55).contains(&base.intercept),
            "intercept = {}",
            base.intercept
        );
        assert!(base.points.len() == 3 && base.max_residual < 0.05);
    }

    #[test]
    fn fit_requires_three_distinct_detunings() {
        let model = reference();
        assert!(matches!(
            fit_amplitude_condition(&model, &[0.5, 0.5, 0.5], TAU * 0.005, Method::Ordinary),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn higher_frequency_cools_better_at_half_detuning() {
        let model = reference();
        let g = SweepGrid {
            axes: vec![Axis {
                kind: AxisKind::Omega,
                values: vec![TAU * 0.005, TAU * 0.010],
            }],
            drive: DriveConfig {
                waveform: Waveform::Symmetric,
                phi_rf: 8.4,
                omega: TAU * 0.005,
                detuning_dc: 0.5,
            },
            method: Method::Ordinary,
            activation: InterwellActivation::ShiftedGap,
        };
        let result = run_sweep(&model, &g).unwrap();
        assert!(result.p11[1] < result.p11[0]);
    }

    #[test]
    fn cooling_rate_envelope_peaks_inside_a_low_frequency_window() {
        let model = reference();
        let omegas = log_axis_values(TAU * 0.002, TAU * 0.05, 12.0).unwrap();
        let envelope = w12_envelope(&model, 0.05, TAU * 0.05, &omegas).unwrap();
        assert_eq!(envelope.len(), omegas.len());
        assert!(envelope.iter().all(|p| p.w12_max > 0.0));
        let (omega_peak, w12_peak) = peak_w12_frequency(&model, 0.05, TAU * 0.05, &omegas).unwrap();
        assert!(w12_peak > 0.0);
        let first = envelope.first().unwrap().omega;
        let last = envelope.last().unwrap().omega;
        assert!(
            omega_peak > first && omega_peak < last,
            "peak at {omega_peak}"
        );
    }

    #[test]
    fn axis_builders_produce_documented_grids() {
        let lin = linear_axis_values(-1.0, 1.0, 0.01).unwrap();
        assert_eq!(lin.len(), 201);
        assert_eq!(lin[0], -1.0);
        assert!((lin[200] - 1.0).abs() < 1e-12);
        assert!(lin.windows(2).all(|w| w[1] > w[0]));

        let log = log_axis_values(0.001, 2.0, 40.0).unwrap();
        assert_eq!(log.len(), 133);
        assert_eq!(log[0], 0.001);
        assert_eq!(log[132], 2.0);
        assert!(log.windows(2).all(|w| w[1] > w[0]));

        let coarse = linear_axis_values(8.0, 8.7, 0.02).unwrap();
        let fine = linear_axis_values(8.0, 8.7, 0.01).unwrap();
        for (k, v) in coarse.iter().enumerate() {
            assert_eq!(v.to_bits(), fine[2 * k].to_bits());
        }

        assert!(linear_axis_values(1.0, 0.0, 0.1).is_err());
        assert!(log_axis_values(0.0, 1.0, 10.0).is_err());
    }

    #[test]
    fn default_grid_is_dual_resolution_and_increasing() {
        for (method, det) in [(Method::Ordinary, 0.05), (Method::NewMethod, 3.0)] {
            let amps = default_amplitude_grid(method, det, 8.4);
            assert!(amps.windows(2).all(|w| w[1] > w[0]));
            let pred = predicted_optimal_amplitude(method, det, 8.4);
            assert!(amps[0] >= 0.05 - 1e-12);
            assert!(amps.iter().any(|&a| (a - pred).abs() < 5e-3));
            assert!((amps.last().unwrap() - (pred + 3.5)).abs() < 1e-9);
            let fine_count = amps
                .windows(2)
                .filter(|w| (w[1] - w[0] - 0.01).abs() < 1e-9)
                .count();
            assert!(fine_count >= 99, "fine region too small: {fine_count}");
        }
    }
}
