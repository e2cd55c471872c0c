use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use infx::harness::{self, ExperimentConfig, ExperimentKind, OutputFormat};

/// Numerical laboratory for the infinity-Laplace equation with a variable
/// exponent: Dirichlet solvers, auxiliary sandwich equations, exact 1D
/// oracles, stability sweeps and bound calibration.
#[derive(Parser, Debug)]
#[command(name = "infx", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path; stdout when omitted. `calibrate` writes the constants
    /// file here and prints its report to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    /// Worker threads for the solver sweeps; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// One Dirichlet solve; emits the field nodewise.
    Solve,
    /// Sandwich study: lower/middle/upper solutions over an epsilon sweep.
    Aux,
    /// Exact 1D first-integral solution.
    Oracle1d,
    /// One-exponent stability sweep against the unperturbed solution.
    StabilityThm1,
    /// Two-exponent stability sweep.
    StabilityTwoExp,
    /// Doubling-of-variables probe.
    Doubling,
    /// Transform identities, inequalities and the strict-supersolution check.
    TransformCheck,
    /// Solver-vs-oracle error decay under grid refinement.
    Convergence,
    /// Measure once and write the constants file for the bound evaluators.
    Calibrate,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Solve => ExperimentKind::Solve,
            Command::Aux => ExperimentKind::Aux,
            Command::Oracle1d => ExperimentKind::Oracle1d,
            Command::StabilityThm1 => ExperimentKind::StabilityThm1,
            Command::StabilityTwoExp => ExperimentKind::StabilityTwoExp,
            Command::Doubling => ExperimentKind::Doubling,
            Command::TransformCheck => ExperimentKind::TransformCheck,
            Command::Convergence => ExperimentKind::Convergence,
            Command::Calibrate => ExperimentKind::Calibrate,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(passed) => {
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(err) => {
            eprintln!("infx: error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> infx::Result<bool> {
    if let Some(n) = cli.threads {
        // ignore the error if a pool already exists; determinism does not
        // depend on the thread count
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| infx::Error::Config("--config <path> is required".into()))?;
    let cfg = ExperimentConfig::from_path(config_path)?;
    warn_on_transform_params(&cfg);

    let kind = cli.command.kind();
    if let Command::Calibrate = cli.command {
        let out = cli.out.as_ref().ok_or_else(|| {
            infx::Error::Config("calibrate writes the constants file to --out <path>".into())
        })?;
        let (constants, report) = harness::run_calibrate(&cfg)?;
        harness::save_constants(out, &constants)?;
        print!("{}", report.render(cli.format));
        eprintln!(
            "infx: calibrate: wrote {} (scale {:.6e}, two_exp_const {:.6e})",
            out.display(),
            constants.bound.scale,
            constants.bound.two_exp_const
        );
        return Ok(true);
    }

    let report = harness::run(kind, &cfg)?;
    let rendered = report.render(cli.format);
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    let passed = report.passed.unwrap_or(true);
    eprintln!(
        "infx: {}: {} ({} rows)",
        kind.as_str(),
        match report.passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "done",
        },
        report.rows.len()
    );
    Ok(passed)
}

fn warn_on_transform_params(cfg: &ExperimentConfig) {
    let check = |a: f64| {
        if a > 2.0 {
            eprintln!(
                "infx: warning: transform parameter A = {a} > 2; the constant-absorption \
                 argument behind the bounds assumes A <= 2"
            );
        }
    };
    if let Some(t) = &cfg.transform {
        check(t.a);
    }
    if let Some(d) = &cfg.doubling {
        check(d.a);
    }
}
