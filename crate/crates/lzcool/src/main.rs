//! Command-line interface: point calculations, configured sweeps and
//! optimizations, and bundled figure-reproduction presets.
//!
//! Exit codes: 0 success, 1 input error (configuration, flags, unknown
//! preset), 2 compute error. Failures print one JSON line to stderr with a
//! `category`, `kind`, and `message`.

use clap::{Parser, Subcommand, ValueEnum};
use lzcool::config::{default_config, load_config, RunConfig};
use lzcool::dynamics::{equilibrium_p11, steady_state};
use lzcool::error::Error;
use lzcool::output::{canonical_hash, write_dataset, Dataset, DatasetMeta, OutputFormat};
use lzcool::presets::{run_preset, sweep_dataset};
use lzcool::rates::assemble_generator;
use lzcool::specfun::shared_cache;
use lzcool::sweep::{
    default_amplitude_grid, fit_amplitude_condition, optimal_amplitude, optimal_amplitude_over,
    OptimalPoint,
};
use serde_json::json;
use std::f64::consts::TAU;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Parser)]
#[command(
    name = "lzcool",
    version,
    about = "Microwave sideband-cooling simulator for a four-level two-well flux qubit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file; the built-in reference device when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's output section).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker thread count; overrides the LZCOOL_THREADS environment variable.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Data file format (overrides the config's output section).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the transition rates and generator at the configured point.
    Rates,
    /// Print the stationary populations at the configured point.
    Steady,
    /// Run the configured sweep grid and write its dataset.
    Sweep,
    /// Find optimal drive amplitudes for the configured detunings.
    Optimize,
    /// Reproduce a bundled figure dataset (fig3 .. fig15).
    Figure { preset: String },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        let line = json!({
            "category": if e.exit_code() == 1 { "input" } else { "compute" },
            "kind": e.kind(),
            "message": e.to_string(),
        });
        eprintln!("{line}");
        std::process::exit(e.exit_code());
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), Error> {
    let requested = match flag {
        Some(n) => Some(n),
        None => match std::env::var("LZCOOL_THREADS") {
            Err(_) => None,
            Ok(raw) => Some(raw.parse::<usize>().map_err(|_| Error::Config {
                path: "LZCOOL_THREADS".into(),
                message: format!("must be a positive integer, got `{raw}`"),
            })?),
        },
    };
    match requested {
        None => Ok(()),
        Some(0) => Err(Error::Config {
            path: "--threads".into(),
            message: "thread count must be at least 1".into(),
        }),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Compute(format!("thread pool: {e}"))),
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => default_config(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.directory = dir.clone();
    }
    if let Some(format) = cli.format {
        cfg.output.format = match format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    Ok(cfg)
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Print one line to stdout, exiting quietly when the reading end of a
/// pipe has gone away (e.g. `lzcool steady | head`).
fn print_line(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let result = out
        .write_all(text.as_bytes())
        .and_then(|()| out.write_all(b"\n"));
    if let Err(e) = result {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("stdout: {e}");
        std::process::exit(2);
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    configure_threads(cli.threads)?;
    let cfg = load(&cli)?;
    match &cli.command {
        Command::Rates => rates_cmd(&cfg),
        Command::Steady => steady_cmd(&cfg),
        Command::Sweep => sweep_cmd(&cfg),
        Command::Optimize => optimize_cmd(&cfg),
        Command::Figure { preset } => figure_cmd(&cfg, preset),
    }
}

fn rates_cmd(cfg: &RunConfig) -> Result<(), Error> {
    let (generator, rate_set) = assemble_generator(
        &cfg.model,
        &cfg.drive,
        cfg.method,
        cfg.activation,
        shared_cache(),
    )?;
    let value = json!({
        "config_hash": cfg.hash,
        "rate_set_rad_ghz": rate_set,
        "generator_rad_ghz": generator.entries(),
    });
    print_line(&serde_json::to_string_pretty(&value).expect("serializes"));
    Ok(())
}

fn steady_cmd(cfg: &RunConfig) -> Result<(), Error> {
    let (generator, _) = assemble_generator(
        &cfg.model,
        &cfg.drive,
        cfg.method,
        cfg.activation,
        shared_cache(),
    )?;
    let eps10 = cfg.model.interwell_splitting(cfg.drive.detuning_dc);
    let state = steady_state(&generator)?.with_effective_temperature(eps10);
    let t_eff_mk = state
        .t_eff
        .map(|t| 1000.0 * t / (TAU * lzcool::model::KB_OVER_H_GHZ_PER_K));
    let value = json!({
        "config_hash": cfg.hash,
        "steady": state,
        "t_eff_mk": t_eff_mk,
        "equilibrium_p11": equilibrium_p11(&cfg.model, cfg.drive.detuning_dc)?,
    });
    print_line(&serde_json::to_string_pretty(&value).expect("serializes"));
    Ok(())
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        print_line(&p.display().to_string());
    }
}

fn sweep_cmd(cfg: &RunConfig) -> Result<(), Error> {
    let grid = cfg.sweep.as_ref().ok_or_else(|| Error::Config {
        path: "sweep".into(),
        message: "the sweep command needs a [sweep] section with at least one [[sweep.axis]]"
            .into(),
    })?;
    let (set, _) = sweep_dataset("sweep", &cfg.model, grid)?;
    let meta = DatasetMeta {
        config_hash: cfg.hash.clone(),
        method: set.method.into(),
        axes: set.axes,
        failures: set.failures,
    };
    let paths = write_dataset(&cfg.output, &set.dataset, &meta, now_unix())?;
    report_written(&paths);
    Ok(())
}

fn optimize_cmd(cfg: &RunConfig) -> Result<(), Error> {
    let spec = cfg.optimize.as_ref().ok_or_else(|| Error::Config {
        path: "optimize".into(),
        message: "the optimize command needs an [optimize] section listing detunings".into(),
    })?;
    let mut detunings = spec.detunings.clone();
    detunings.sort_by(f64::total_cmp);
    detunings.dedup();
    let mut rows = Vec::with_capacity(detunings.len());
    for &det in &detunings {
        let point: OptimalPoint = match spec.amp_range {
            Some((lo, hi, step)) => {
                optimal_amplitude(&cfg.model, det, cfg.drive.omega, cfg.method, (lo, hi), step)?
            }
            None => {
                let amps = default_amplitude_grid(cfg.method, det, cfg.model.crossover);
                optimal_amplitude_over(&cfg.model, det, cfg.drive.omega, cfg.method, &amps)?
            }
        };
        rows.push(vec![
            det,
            point.phi_rf_star,
            point.omega_star / TAU,
            point.p11_star,
            f64::from(u8::from(point.at_range_edge)),
        ]);
    }
    let fit = if detunings.len() >= 3 {
        let fit = fit_amplitude_condition(&cfg.model, &detunings, cfg.drive.omega, cfg.method)?;
        json!({
            "slope": fit.slope,
            "intercept_mphi0": fit.intercept,
            "max_residual_mphi0": fit.max_residual,
        })
    } else {
        serde_json::Value::Null
    };
    let dataset = Dataset {
        name: "optimize".into(),
        columns: vec![
            "detuning_dc_mphi0".into(),
            "phi_rf_star_mphi0".into(),
            "omega_ghz".into(),
            "p11_star".into(),
            "at_range_edge".into(),
        ],
        rows,
    };
    let meta = DatasetMeta {
        config_hash: cfg.hash.clone(),
        method: match cfg.method {
            lzcool::rates::Method::Ordinary => "ordinary".into(),
            lzcool::rates::Method::NewMethod => "new-method".into(),
        },
        axes: json!({
            "detunings_mphi0": detunings,
            "amplitude_fit": fit,
        }),
        failures: Vec::new(),
    };
    let paths = write_dataset(&cfg.output, &dataset, &meta, now_unix())?;
    report_written(&paths);
    Ok(())
}

fn figure_cmd(cfg: &RunConfig, preset: &str) -> Result<(), Error> {
    let sets = run_preset(preset, &cfg.model)?;
    let hash = canonical_hash(&(preset, &cfg.model));
    let timestamp = now_unix();
    let mut paths = Vec::new();
    for set in sets {
        let meta = DatasetMeta {
            config_hash: hash.clone(),
            method: set.method.into(),
            axes: set.axes,
            failures: set.failures,
        };
        paths.extend(write_dataset(&cfg.output, &set.dataset, &meta, timestamp)?);
    }
    report_written(&paths);
    Ok(())
}
