//! `rfso` command-line harness.
//!
//! Reproduces the reference experiments as CSV (or gnuplot blocks) with
//! simulation, analytic, and bound overlays, and self-validates bound
//! orderings. See `rfso --help` for subcommands.

mod config;
mod presets;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentSpec, OutputFormat};
use runner::MethodMask;

#[derive(Parser)]
#[command(name = "rfso", about = "Hybrid RF-FSO HARQ link analysis harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML config with one experiment table per section.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in setup (fig3 .. fig11).
    #[arg(long)]
    preset: Option<String>,
    /// Override the experiment seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Output path (stdout when omitted; with multi-section configs the
    /// section name becomes `<out-stem>-<section>.<ext>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output layout: csv or gnuplot.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads (defaults to the core count).
    #[arg(long)]
    threads: Option<usize>,
    /// Directory for persistent numeric caches (product-CDF tables).
    #[arg(long, default_value = ".rfso-cache")]
    cache_dir: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo simulation curves only.
    Simulate(RunArgs),
    /// Closed-form and quadrature curves only (no simulation).
    Analytic(RunArgs),
    /// Small-N product/sum bounds with their simulation reference.
    Bounds(RunArgs),
    /// Power-allocation optimization over the sum-power grid.
    PowerOpt(RunArgs),
    /// Reproduce a figure preset end to end (simulation + analytics).
    Figure(RunArgs),
    /// Re-check an emitted CSV: bound orderings, method disagreements,
    /// dB-gap readouts.
    Validate {
        /// CSV produced by a previous run.
        #[arg(long)]
        input: PathBuf,
        /// Optional machine-readable summary destination.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

fn resolve_specs(args: &RunArgs) -> Result<Vec<(String, ExperimentSpec)>, String> {
    let mut specs = match (&args.config, &args.preset) {
        (Some(path), None) => config::load_config(path).map_err(|e| e.to_string())?,
        (None, Some(name)) => {
            let spec = presets::preset(name).ok_or(format!(
                "unknown preset `{name}` (expected one of {:?})",
                presets::PRESET_NAMES
            ))?;
            vec![(name.clone(), spec)]
        }
        (Some(_), Some(_)) => return Err("pass either --config or --preset, not both".into()),
        (None, None) => return Err("one of --config or --preset is required".into()),
    };
    for (_, spec) in &mut specs {
        if let Some(seed) = args.seed {
            spec.seed = seed;
        }
        if let Some(trials) = args.trials {
            spec.trials = trials;
        }
        if let Some(fmt) = &args.format {
            spec.format = match fmt.as_str() {
                "csv" => OutputFormat::Csv,
                "gnuplot" => OutputFormat::Gnuplot,
                other => return Err(format!("unknown format `{other}` (csv|gnuplot)")),
            };
        }
        spec.validate().map_err(|e| e.to_string())?;
    }
    Ok(specs)
}

fn out_path_for(base: &Option<PathBuf>, name: &str, many: bool) -> Option<PathBuf> {
    let base = base.as_ref()?;
    if !many {
        return Some(base.clone());
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    Some(base.with_file_name(format!("{stem}-{name}.{ext}")))
}

fn execute(args: &RunArgs, mask: MethodMask) -> ExitCode {
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: thread pool already configured: {e}");
        }
    }
    let specs = match resolve_specs(args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let many = specs.len() > 1;
    let mut numeric_failures = 0usize;
    let mut bound_violations = 0usize;
    for (name, spec) in &specs {
        let output = runner::run(spec, mask, Some(&args.cache_dir));
        for e in &output.errors {
            eprintln!("[{name}] numeric failure: {e}");
        }
        numeric_failures += output.errors.len();
        let report = report::compare_report(&output.rows);
        bound_violations += report.bound_violations;
        let dest = out_path_for(&args.out, name, many).or_else(|| spec.out.clone());
        let write_result = match &dest {
            Some(path) => std::fs::File::create(path)
                .and_then(|f| runner::write_rows(&output.rows, spec.format, f))
                .map(|_| eprintln!("[{name}] wrote {} rows to {}", output.rows.len(), path.display())),
            None => runner::write_rows(&output.rows, spec.format, std::io::stdout().lock()),
        };
        if let Err(e) = write_result {
            eprintln!("[{name}] write failed: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
        eprint!("{}", report.text);
    }
    if numeric_failures > 0 {
        ExitCode::from(EXIT_NUMERIC)
    } else if bound_violations > 0 {
        ExitCode::from(EXIT_VALIDATION)
    } else {
        ExitCode::SUCCESS
    }
}

fn validate(input: &PathBuf, json_out: &Option<PathBuf>) -> ExitCode {
    let rows = match runner::read_rows_csv(input) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    // row-level range checks
    let mut range_errors = 0usize;
    for r in &rows {
        let ok = match r.metric {
            runner::Metric::Outage | runner::Metric::OptRatioRf => (0.0..=1.0).contains(&r.value),
            runner::Metric::Throughput => r.value >= 0.0,
        };
        if !ok {
            eprintln!("range violation: {r:?}");
            range_errors += 1;
        }
    }
    let report = report::compare_report(&rows);
    print!("{}", report.text);
    if let Some(path) = json_out {
        if let Err(e) = std::fs::write(path, serde_json::to_string_pretty(&report.summary).unwrap())
        {
            eprintln!("could not write {}: {e}", path.display());
            return ExitCode::from(EXIT_NUMERIC);
        }
    }
    if report.bound_violations + range_errors > 0 {
        ExitCode::from(EXIT_VALIDATION)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Simulate(args) => execute(&args, MethodMask::SIM_ONLY),
        Cmd::Analytic(args) => execute(&args, MethodMask::ANALYTIC_ONLY),
        Cmd::Bounds(args) => {
            // the product/sum bounds exist for Gamma-Gamma turbulence only
            if let Ok(specs) = resolve_specs(&args) {
                if specs
                    .iter()
                    .any(|(_, s)| !matches!(s.fso, config::FsoSpec::GammaGamma { .. }))
                {
                    eprintln!("bounds requires Gamma-Gamma turbulence (fig7-style spec)");
                    return ExitCode::from(EXIT_CONFIG);
                }
            }
            execute(&args, MethodMask::BOUNDS)
        }
        Cmd::PowerOpt(args) => execute(&args, MethodMask::ALL),
        Cmd::Figure(args) => execute(&args, MethodMask::ALL),
        Cmd::Validate { input, json } => validate(&input, &json),
    }
}
