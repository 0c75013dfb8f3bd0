//! TOML run configuration.
//!
//! Keys carry their units in their names: `*_ghz` values are plain (divided
//! by 2π) gigahertz, `*_mphi0` values are flux in mΦ₀, and temperature is in
//! millikelvin. Loading converts everything to the crate's internal units
//! (angular rad GHz) and computes a canonical hash of the resolved physics
//! parameters for output provenance. Unknown keys are rejected.

use crate::error::Error;
use crate::model::{temperature_from_millikelvin, DriveConfig, FluxQubitModel};
use crate::output::{canonical_hash, OutputConfig, OutputFormat};
use crate::rates::{InterwellActivation, Method};
use crate::sweep::{linear_axis_values, log_axis_values, Axis, AxisKind, SweepGrid};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

/// Fully resolved run configuration in internal units.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: FluxQubitModel,
    pub drive: DriveConfig,
    pub method: Method,
    pub activation: InterwellActivation,
    pub sweep: Option<SweepGrid>,
    pub optimize: Option<OptimizeSpec>,
    pub output: OutputConfig,
    /// SHA-256 over the resolved physics parameters (model, drive, method,
    /// activation, sweep axes, optimize spec); the output section is plumbing
    /// and deliberately excluded.
    pub hash: String,
}

/// Resolved `[optimize]` section.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizeSpec {
    /// DC detunings to optimize at, mΦ₀.
    pub detunings: Vec<f64>,
    /// Optional uniform scan `(start, stop, step)` in mΦ₀; when absent the
    /// default dual-resolution grid around the predicted optimum is used.
    pub amp_range: Option<(f64, f64, f64)>,
}

fn config_err(file: &Path, message: impl Into<String>) -> Error {
    Error::Config {
        path: file.display().to_string(),
        message: message.into(),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    drive: RawDrive,
    method: Option<Method>,
    interwell_activation: Option<InterwellActivation>,
    sweep: Option<RawSweep>,
    optimize: Option<RawOptimize>,
    output: Option<RawOutput>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    slope_ghz_per_mphi0: [f64; 4],
    gap01_ghz: f64,
    gap12_ghz: f64,
    gap03_ghz: f64,
    gap23_ghz: f64,
    crossover_mphi0: f64,
    gamma20_ghz: f64,
    gamma31_ghz: f64,
    gamma10_inter_ghz: f64,
    gamma2_ghz: f64,
    temperature_mk: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    phi_rf_mphi0: f64,
    omega_ghz: f64,
    detuning_dc_mphi0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Vec<RawAxis>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    param: AxisKind,
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
    log_start: Option<f64>,
    log_stop: Option<f64>,
    points_per_decade: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimize {
    detuning_dc_mphi0: Vec<f64>,
    amp_start_mphi0: Option<f64>,
    amp_stop_mphi0: Option<f64>,
    amp_step_mphi0: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    format: Option<OutputFormat>,
}

fn check_finite(file: &Path, key: &str, v: f64) -> Result<f64, Error> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(file, format!("{key} must be finite, got {v}")))
    }
}

fn check_nonneg(file: &Path, key: &str, v: f64) -> Result<f64, Error> {
    check_finite(file, key, v)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(config_err(
            file,
            format!("{key} must be nonnegative, got {v}"),
        ))
    }
}

fn check_positive(file: &Path, key: &str, v: f64) -> Result<f64, Error> {
    check_finite(file, key, v)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(config_err(file, format!("{key} must be positive, got {v}")))
    }
}

fn resolve_model(file: &Path, raw: &RawModel) -> Result<FluxQubitModel, Error> {
    let mut slope = [0.0; 4];
    for (i, &m) in raw.slope_ghz_per_mphi0.iter().enumerate() {
        slope[i] = TAU * check_positive(file, &format!("model.slope_ghz_per_mphi0[{i}]"), m)?;
    }
    let model = FluxQubitModel {
        slope,
        gap01: TAU * check_nonneg(file, "model.gap01_ghz", raw.gap01_ghz)?,
        gap12: TAU * check_nonneg(file, "model.gap12_ghz", raw.gap12_ghz)?,
        gap03: TAU * check_nonneg(file, "model.gap03_ghz", raw.gap03_ghz)?,
        gap23: TAU * check_nonneg(file, "model.gap23_ghz", raw.gap23_ghz)?,
        crossover: check_positive(file, "model.crossover_mphi0", raw.crossover_mphi0)?,
        gamma20: TAU * check_nonneg(file, "model.gamma20_ghz", raw.gamma20_ghz)?,
        gamma31: TAU * check_nonneg(file, "model.gamma31_ghz", raw.gamma31_ghz)?,
        gamma10_inter: TAU * check_nonneg(file, "model.gamma10_inter_ghz", raw.gamma10_inter_ghz)?,
        gamma2: TAU * check_nonneg(file, "model.gamma2_ghz", raw.gamma2_ghz)?,
        temperature: temperature_from_millikelvin(check_positive(
            file,
            "model.temperature_mk",
            raw.temperature_mk,
        )?)
        .map_err(|e| config_err(file, format!("model.temperature_mk: {e}")))?,
    };
    model
        .validate()
        .map_err(|e| config_err(file, format!("model: {e}")))?;
    Ok(model)
}

fn resolve_axis(file: &Path, index: usize, raw: &RawAxis) -> Result<Axis, Error> {
    let key = format!("sweep.axis[{index}]");
    let explicit = raw.values.is_some();
    let linear = raw.start.is_some() || raw.stop.is_some() || raw.step.is_some();
    let log = raw.log_start.is_some() || raw.log_stop.is_some() || raw.points_per_decade.is_some();
    let forms = usize::from(explicit) + usize::from(linear) + usize::from(log);
    if forms != 1 {
        return Err(config_err(
            file,
            format!(
                "{key} must use exactly one of `values`, `start`/`stop`/`step`, or \
                 `log_start`/`log_stop`/`points_per_decade`"
            ),
        ));
    }
    let values = if explicit {
        let values = raw.values.clone().unwrap();
        if values.is_empty() {
            return Err(config_err(file, format!("{key}.values must be nonempty")));
        }
        for (i, v) in values.iter().enumerate() {
            check_finite(file, &format!("{key}.values[{i}]"), *v)?;
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config_err(
                file,
                format!("{key}.values must be strictly increasing"),
            ));
        }
        values
    } else if linear {
        let (start, stop, step) = match (raw.start, raw.stop, raw.step) {
            (Some(a), Some(b), Some(s)) => (a, b, s),
            _ => {
                return Err(config_err(
                    file,
                    format!("{key} needs all of `start`, `stop`, `step`"),
                ))
            }
        };
        linear_axis_values(start, stop, step)
            .map_err(|e| config_err(file, format!("{key}: {e}")))?
    } else {
        let (lo, hi, ppd) = match (raw.log_start, raw.log_stop, raw.points_per_decade) {
            (Some(a), Some(b), Some(s)) => (a, b, s),
            _ => {
                return Err(config_err(
                    file,
                    format!("{key} needs all of `log_start`, `log_stop`, `points_per_decade`"),
                ))
            }
        };
        log_axis_values(lo, hi, ppd).map_err(|e| config_err(file, format!("{key}: {e}")))?
    };
    // Frequency-like axes are written in plain GHz; convert to angular units.
    let values = match raw.param {
        AxisKind::Omega | AxisKind::Gamma2 => values.into_iter().map(|v| TAU * v).collect(),
        AxisKind::DetuningDc | AxisKind::PhiRf => values,
    };
    Ok(Axis {
        kind: raw.param,
        values,
    })
}

fn resolve_optimize(file: &Path, raw: &RawOptimize) -> Result<OptimizeSpec, Error> {
    if raw.detuning_dc_mphi0.is_empty() {
        return Err(config_err(
            file,
            "optimize.detuning_dc_mphi0 must list at least one detuning",
        ));
    }
    for (i, v) in raw.detuning_dc_mphi0.iter().enumerate() {
        check_finite(file, &format!("optimize.detuning_dc_mphi0[{i}]"), *v)?;
    }
    let amp_range = match (raw.amp_start_mphi0, raw.amp_stop_mphi0, raw.amp_step_mphi0) {
        (None, None, None) => None,
        (Some(start), Some(stop), Some(step)) => {
            check_nonneg(file, "optimize.amp_start_mphi0", start)?;
            check_finite(file, "optimize.amp_stop_mphi0", stop)?;
            check_positive(file, "optimize.amp_step_mphi0", step)?;
            if !(stop > start) {
                return Err(config_err(
                    file,
                    "optimize.amp_stop_mphi0 must exceed optimize.amp_start_mphi0",
                ));
            }
            Some((start, stop, step))
        }
        _ => {
            return Err(config_err(
                file,
                "optimize amplitude range needs all of `amp_start_mphi0`, `amp_stop_mphi0`, \
                 `amp_step_mphi0` (or none of them)",
            ))
        }
    };
    Ok(OptimizeSpec {
        detunings: raw.detuning_dc_mphi0.clone(),
        amp_range,
    })
}

fn resolve(file: &Path, raw: RawConfig) -> Result<RunConfig, Error> {
    let model = resolve_model(file, &raw.model)?;
    let method = raw.method.unwrap_or(Method::Ordinary);
    let activation = raw
        .interwell_activation
        .unwrap_or(InterwellActivation::ShiftedGap);
    let drive = DriveConfig {
        waveform: method.waveform(),
        phi_rf: check_nonneg(file, "drive.phi_rf_mphi0", raw.drive.phi_rf_mphi0)?,
        omega: TAU * check_positive(file, "drive.omega_ghz", raw.drive.omega_ghz)?,
        detuning_dc: check_finite(file, "drive.detuning_dc_mphi0", raw.drive.detuning_dc_mphi0)?,
    };
    drive
        .validate()
        .map_err(|e| config_err(file, format!("drive: {e}")))?;
    let sweep = match &raw.sweep {
        None => None,
        Some(raw_sweep) => {
            if raw_sweep.axis.is_empty() {
                return Err(config_err(file, "sweep needs at least one [[sweep.axis]]"));
            }
            let mut axes = Vec::with_capacity(raw_sweep.axis.len());
            for (i, raw_axis) in raw_sweep.axis.iter().enumerate() {
                axes.push(resolve_axis(file, i, raw_axis)?);
            }
            let grid = SweepGrid {
                axes,
                drive,
                method,
                activation,
            };
            Some(grid)
        }
    };
    let optimize = match &raw.optimize {
        None => None,
        Some(raw_opt) => Some(resolve_optimize(file, raw_opt)?),
    };
    let output = match raw.output {
        None => OutputConfig::default(),
        Some(raw_out) => OutputConfig {
            directory: raw_out.directory.unwrap_or_else(|| PathBuf::from("out")),
            format: raw_out.format.unwrap_or(OutputFormat::Csv),
        },
    };
    let hash = canonical_hash(&(&model, &drive, &method, &activation, &sweep, &optimize));
    Ok(RunConfig {
        model,
        drive,
        method,
        activation,
        sweep,
        optimize,
        output,
        hash,
    })
}

/// Loads and validates a TOML configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(path, format!("cannot read config file: {e}")))?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| config_err(path, e.to_string().trim().to_string()))?;
    resolve(path, raw)
}

/// Built-in configuration used when no `--config` is given: the reference
/// device under a weak 5 MHz ordinary drive near the cooling optimum.
pub fn default_config() -> RunConfig {
    let model = FluxQubitModel::reference();
    let method = Method::Ordinary;
    let activation = InterwellActivation::ShiftedGap;
    let drive = DriveConfig {
        waveform: method.waveform(),
        phi_rf: 8.4,
        omega: TAU * 0.005,
        detuning_dc: 0.05,
    };
    let hash = canonical_hash(&(
        &model,
        &drive,
        &method,
        &activation,
        &None::<SweepGrid>,
        &None::<OptimizeSpec>,
    ));
    RunConfig {
        model,
        drive,
        method,
        activation,
        sweep: None,
        optimize: None,
        output: OutputConfig::default(),
        hash,
    }
}
