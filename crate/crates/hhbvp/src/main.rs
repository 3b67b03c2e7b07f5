use clap::{Parser, Subcommand};
use hhbvp::certify::TheoremTag;
use hhbvp::cli::{self, CliError, Report, RunSettings};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hhbvp",
    version,
    about = "Boundary constants, existence certificates and Picard solutions \
             for n-point nonlocal fractional boundary value problems on (1, e]"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the boundary constants and the operator bound Phi
    Constants {
        /// Problem file
        file: PathBuf,
        /// Write the machine-readable report here
        #[arg(long)]
        json: Option<PathBuf>,
        /// Grid cells (default: file key, then HHBVP_DEFAULT_N, then 1024)
        #[arg(long)]
        grid_n: Option<usize>,
        /// Cells of the point quadrature (default 2048)
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Run the existence/uniqueness checkers
    Certify {
        file: PathBuf,
        /// Comma-separated subset of banach,boyd_wong,krasnoselskii,leray_schauder
        #[arg(long, value_delimiter = ',')]
        theorems: Option<Vec<String>>,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        resolution: Option<usize>,
        /// Upper end of the admissible-bound search range (default 1e6)
        #[arg(long)]
        l_max: Option<f64>,
        /// Bisection tolerance of the admissible-bound search (default 1e-9)
        #[arg(long)]
        l_tol: Option<f64>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Solve by Picard iteration and verify the residuals
    Solve {
        file: PathBuf,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        resolution: Option<usize>,
        /// Step-norm convergence tolerance (default 1e-10)
        #[arg(long)]
        tol: Option<f64>,
        /// Iteration cap (default 200)
        #[arg(long)]
        max_iter: Option<usize>,
        /// Write the solution table (t,u,x) here
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the built-in identity and golden-value suite
    Selftest {
        /// Smaller grids and looser tolerances
        #[arg(long)]
        quick: bool,
        /// Fault-injection hook: scale computed values by (1 + p)
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_gamma: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn finish(report: &Report, json: Option<&Path>) -> i32 {
    print!("{}", report.render_human());
    if let Some(path) = json {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return cli::EXIT_VALIDATION;
        }
    }
    cli::exit_code_for(report)
}

fn fail(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
    e.exit_code()
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Cmd::Constants { file, json, grid_n, resolution } => {
            let settings = RunSettings { grid_n, resolution, ..Default::default() };
            match cli::cmd_constants(&file, &settings) {
                Ok(report) => finish(&report, json.as_deref()),
                Err(e) => fail(&e),
            }
        }
        Cmd::Certify { file, theorems, grid_n, resolution, l_max, l_tol, json } => {
            let settings = RunSettings { grid_n, resolution, ..Default::default() };
            let parsed: Option<Vec<TheoremTag>> = match theorems {
                None => None,
                Some(names) => {
                    let mut tags = Vec::new();
                    for name in names {
                        match name.parse::<TheoremTag>() {
                            Ok(tag) => tags.push(tag),
                            Err(msg) => return fail(&CliError::Usage(msg)),
                        }
                    }
                    Some(tags)
                }
            };
            match cli::cmd_certify(&file, &settings, parsed.as_deref(), l_max, l_tol) {
                Ok(report) => finish(&report, json.as_deref()),
                Err(e) => fail(&e),
            }
        }
        Cmd::Solve { file, grid_n, resolution, tol, max_iter, csv, json } => {
            let settings = RunSettings { grid_n, resolution, tol, max_iter };
            match cli::cmd_solve(&file, &settings) {
                Ok((report, x)) => {
                    if let Some(path) = csv {
                        if let Err(e) = cli::write_csv(&x, &path) {
                            return fail(&e);
                        }
                    }
                    finish(&report, json.as_deref())
                }
                Err(e) => fail(&e),
            }
        }
        Cmd::Selftest { quick, perturb_gamma, json } => {
            let report = cli::cmd_selftest(quick, perturb_gamma);
            finish(&report, json.as_deref())
        }
    }
}

fn main() -> ExitCode {
    // clap's own usage errors exit with 2 by default, which would collide
    // with the documented "certification fails" code; map them to 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(cli::EXIT_VALIDATION as u8)
            };
        }
    };
    ExitCode::from(run(cli) as u8)
}
