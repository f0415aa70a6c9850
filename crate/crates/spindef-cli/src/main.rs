//! Command-line runner for the scenario check suites.
//!
//! Scenarios are named builtins or paths to JSON files; each subcommand runs
//! one check sector (or all of them) and prints a report as JSON or CSV.
//! Exit status: 0 when every check passes, 1 when checks fail (the failing
//! names go to stderr), 2 when the run could not be set up at all.

use clap::{Parser, Subcommand, ValueEnum};
use std::process::ExitCode;

use spindef_core::report::Report;
use spindef_core::scenario::{SamplingSpec, ScenarioSpec, UnitsSpec};
use spindef_core::suite::CheckGroup;
use spindef_core::{constants_json, run_groups, Scenario, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "spindef",
    version,
    about = "Residual checks for frame geometry, spinor connections, metric deformations, and spin-1/2 stress tensors",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,

    /// Uniform multiplier on residual tolerances; values below one tighten
    /// every gate, including the convergence-order floor.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,

    /// Run in geometrized units (hbar = c = G = 1, unit mass), overriding
    /// the scenario's declared unit system and mass.
    #[arg(long, global = true)]
    natural_units: bool,

    /// Override the sampling seed; only valid for scenarios that sample
    /// randomly.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Comma-separated deformation sizes: the first becomes the active
    /// size, and with two or more values they form the convergence ladder.
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Vec<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print the constant structure tables and physical constants as JSON.
    DumpConstants,
    /// Print a scenario spec as normalized JSON (builtin name or file).
    DumpScenario {
        /// Builtin scenario name or path to a scenario JSON file.
        scenario: String,
    },
    /// Frame non-degeneracy, orientation, and commutation checks.
    FrameCheck {
        /// Builtin scenario name or path to a scenario JSON file.
        scenario: String,
    },
    /// Metric-connection checks: reduction agreement, metric compatibility,
    /// and transport identities.
    Connection {
        /// Builtin scenario name or path to a scenario JSON file.
        scenario: String,
    },
    /// Covariant constancy of the five constant structure tables.
    Concordance {
        /// Builtin scenario name or path to a scenario JSON file.
        scenario: String,
    },
    /// First-order deformation deltas against finite-transform oracles.
    Deform {
        /// Builtin scenario name or path to a scenario JSON file.
        scenario: String,
    },
    /// Energy-momentum tensor checks, including its variational
    /// characterization.
    StressTensor {
        /// Builtin scenario name or path to a scenario JSON file.
        scenario: String,
    },
    /// Field-equation residual and density checks of the matter field.
    DiracResidual {
        /// Builtin scenario name or path to a scenario JSON file.
        scenario: String,
    },
    /// Every check group.
    FullSuite {
        /// Builtin scenario name or path to a scenario JSON file.
        scenario: String,
    },
}

/// Which records a filtering subcommand keeps.
enum NameFilter {
    StressSector,
    DiracSector,
}

impl NameFilter {
    fn keeps(&self, name: &str) -> bool {
        if matches!(name, "matter_skipped" | "matter_setup") {
            return true;
        }
        match self {
            NameFilter::StressSector => {
                name.starts_with("stress_")
                    || matches!(
                        name,
                        "variational_identity" | "lagrangian_chain_equivalence"
                    )
            }
            NameFilter::DiracSector => {
                matches!(
                    name,
                    "dirac_residual" | "lagrangian_imag" | "onshell_lagrangian"
                )
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    if !(cli.tolerance_scale > 0.0 && cli.tolerance_scale.is_finite()) {
        return Err("--tolerance-scale must be a positive number".to_owned());
    }

    let (scenario_arg, groups, filter): (&str, &[CheckGroup], Option<NameFilter>) =
        match &cli.command {
            Command::DumpConstants => {
                print!("{}", constants_json());
                return Ok(ExitCode::SUCCESS);
            }
            Command::DumpScenario { scenario } => {
                let spec = load_spec(scenario)?;
                Scenario::from_spec(&spec).map_err(|e| e.to_string())?;
                let json = serde_json::to_string_pretty(&spec)
                    .map_err(|e| format!("serializing scenario: {e}"))?;
                println!("{json}");
                return Ok(ExitCode::SUCCESS);
            }
            Command::FrameCheck { scenario } => (scenario, &[CheckGroup::Frame], None),
            Command::Connection { scenario } => (scenario, &[CheckGroup::Connection], None),
            Command::Concordance { scenario } => (scenario, &[CheckGroup::Concordance], None),
            Command::Deform { scenario } => (scenario, &[CheckGroup::Deformation], None),
            Command::StressTensor { scenario } => (
                scenario,
                &[CheckGroup::Matter],
                Some(NameFilter::StressSector),
            ),
            Command::DiracResidual { scenario } => (
                scenario,
                &[CheckGroup::Matter],
                Some(NameFilter::DiracSector),
            ),
            Command::FullSuite { scenario } => (scenario, &CheckGroup::ALL, None),
        };

    let mut spec = load_spec(scenario_arg)?;
    apply_overrides(cli, &mut spec)?;
    let scenario = Scenario::from_spec(&spec).map_err(|e| e.to_string())?;

    let config = SuiteConfig {
        tolerance_scale: cli.tolerance_scale,
    };
    let mut report = run_groups(&scenario, &config, groups);
    if let Some(filter) = filter {
        report = retain_records(report, &filter);
    }

    match cli.output {
        Output::Json => print!("{}", report.to_json()),
        Output::Csv => print!("{}", report.to_csv()),
    }

    if report.all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failing checks: {}", report.failing_names().join(", "));
        Ok(ExitCode::from(1))
    }
}

/// Resolves a scenario argument: a builtin name first, then a JSON file.
fn load_spec(arg: &str) -> Result<ScenarioSpec, String> {
    if Scenario::builtin_names().contains(&arg) {
        return Scenario::builtin_spec(arg).map_err(|e| e.to_string());
    }
    let path = std::path::Path::new(arg);
    if !path.exists() {
        return Err(format!(
            "{arg:?} is neither a builtin scenario ({}) nor an existing file",
            Scenario::builtin_names().join(", ")
        ));
    }
    let src = std::fs::read_to_string(path).map_err(|e| format!("reading {arg:?}: {e}"))?;
    serde_json::from_str(&src).map_err(|e| format!("scenario JSON in {arg:?}: {e}"))
}

fn apply_overrides(cli: &Cli, spec: &mut ScenarioSpec) -> Result<(), String> {
    if cli.natural_units {
        spec.constants.units = UnitsSpec::Natural;
        spec.constants.mass = None;
    }
    if let Some(seed) = cli.seed {
        match &mut spec.sampling {
            SamplingSpec::Random { seed: s, .. } => *s = seed,
            SamplingSpec::Points { .. } => {
                return Err("--seed only applies to scenarios with random sampling".to_owned());
            }
        }
    }
    if !cli.eps.is_empty() {
        if cli.eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err("--eps sizes must all be positive".to_owned());
        }
        let pert = spec
            .perturbation
            .as_mut()
            .ok_or("--eps needs a scenario with a perturbation")?;
        pert.eps = cli.eps[0];
        if cli.eps.len() >= 2 {
            pert.eps_ladder = Some(cli.eps.clone());
        }
    }
    Ok(())
}

/// Rebuilds the report with only the records the filter keeps, refreshing
/// the overall verdict.
fn retain_records(report: Report, filter: &NameFilter) -> Report {
    let mut out = Report::new(&report.scenario, report.seed, report.tolerance_scale);
    for record in report.records {
        if filter.keeps(&record.name) {
            out.push(record);
        }
    }
    out
}
