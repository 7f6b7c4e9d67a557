use clap::{Args, Parser, Subcommand};
use polyscat_harness::commands::run_reported;
use polyscat_harness::config::{load, CgoGrid, ProbeConfig, Scenario};
use polyscat_harness::{
    cmd_cgo_verify, cmd_forward, cmd_passive, cmd_probe, cmd_sweep, cmd_validate, HarnessError,
    Report, RunOptions,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Scattering experiments on polygonal conductive media.
///
/// Exit codes: 0 pass, 1 invalid input or refusal, 2 numerical failure.
#[derive(Parser)]
#[command(name = "polyscat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the geometry, medium and incident field of a scenario.
    Validate(Common),
    /// Solve the forward problem and write the far-field pattern.
    Forward(Common),
    /// Check the CGO identities and bounds on a grid.
    CgoVerify {
        #[command(flatten)]
        common: OptionalConfig,
        /// Perturb the constant of the exact sector identity (negative control).
        #[arg(long)]
        corrupt_constant: bool,
    },
    /// Far-field discrepancy against perturbed media.
    Sweep(Common),
    /// Corner extraction on a manufactured field pair.
    Probe(Common),
    /// Point-source comparison of two media.
    Passive(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct OptionalConfig {
    /// Grid document; the default grid when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Output directory for tables and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Nodes per edge, overriding the scenario mesh.
    #[arg(long)]
    mesh_level: Option<usize>,
    /// Comma-separated CGO parameters for the probe.
    #[arg(long, value_delimiter = ',')]
    s_grid: Option<Vec<f64>>,
    /// Solver, quadrature or identity tolerance, depending on the command.
    #[arg(long)]
    tol: Option<f64>,
}

impl Flags {
    fn options(self, corrupt_constant: bool) -> RunOptions {
        RunOptions {
            out: self.out,
            mesh_level: self.mesh_level,
            s_grid: self.s_grid,
            tol: self.tol,
            corrupt_constant,
        }
    }
}

fn scenario(path: &Path) -> Result<Scenario, HarnessError> {
    load(path)
}

type Runner = Box<dyn FnOnce(&RunOptions) -> Result<Report, HarnessError>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, opts, run): (&str, RunOptions, Runner) = match cli.command {
        Command::Validate(c) => (
            "validate",
            c.flags.options(false),
            Box::new(move |o| cmd_validate(&scenario(&c.config)?, o)),
        ),
        Command::Forward(c) => (
            "forward",
            c.flags.options(false),
            Box::new(move |o| cmd_forward(&scenario(&c.config)?, o)),
        ),
        Command::CgoVerify {
            common,
            corrupt_constant,
        } => (
            "cgo-verify",
            common.flags.options(corrupt_constant),
            Box::new(move |o| {
                let grid = match &common.config {
                    Some(p) => load::<CgoGrid>(p)?,
                    None => CgoGrid::default(),
                };
                cmd_cgo_verify(&grid, o)
            }),
        ),
        Command::Sweep(c) => (
            "sweep",
            c.flags.options(false),
            Box::new(move |o| cmd_sweep(&scenario(&c.config)?, o)),
        ),
        Command::Probe(c) => (
            "probe",
            c.flags.options(false),
            Box::new(move |o| cmd_probe(&load::<ProbeConfig>(&c.config)?, o)),
        ),
        Command::Passive(c) => (
            "passive",
            c.flags.options(false),
            Box::new(move |o| cmd_passive(&scenario(&c.config)?, o)),
        ),
    };
    let (report, err) = run_reported(name, &opts, || run(&opts));
    if let Some(e) = err {
        eprintln!("polyscat {name}: {e}");
        return ExitCode::from(e.exit_code());
    }
    for d in &report.diagnostics {
        eprintln!("polyscat {name}: {d}");
    }
    println!(
        "{name}: {:?} in {:.2} s",
        report.status, report.wall_clock_s
    );
    if opts.out.is_none() {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    }
    ExitCode::from(report.status.exit_code())
}
