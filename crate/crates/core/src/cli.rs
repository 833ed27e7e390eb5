//! The `dbp` command-line surface. All reports go to standard output as
//! JSON with stable key order; exit codes are 0 for success, 1 for usage
//! or parse errors, 2 for validation failures, and 3 for runs that
//! completed but recorded a discrepancy.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::exact::Rational;
use crate::harness::{fuzz_campaign, CampaignConfig};
use crate::instance::{check_perfect, DbpInstance, ValidationError};
use crate::oracle::{check_duality, oracle_value};
use crate::reductions::{
    parse_reduction_input, reduce_boolean_feasibility, reduce_boolean_lp_bigm, reduce_plcp,
    ReductionInput,
};
use crate::solver::{decide_subset, solve, SolveError, SolveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_DISCREPANCY: i32 = 3;

#[derive(Parser)]
#[command(
    name = "dbp",
    about = "Exact solver and brute-force referee for disjoint bilinear programs \
             with a perfect disjoint polytope"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance file and print the result report.
    Solve {
        file: PathBuf,
        /// Skip instance validation and the perfect-polytope check.
        #[arg(long)]
        skip_validation: bool,
        /// Tighten the bisection interval with the minimax bounds.
        #[arg(long)]
        tighten: bool,
        /// Directory for persisted artifacts (defaults to $DBP_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force optimum by vertex enumeration.
    Oracle { file: PathBuf },
    /// Decide whether Y escapes the level set at a given level.
    CheckSubset {
        file: PathBuf,
        /// Level parameter, written as an integer or "p/q".
        #[arg(long = "h", allow_hyphen_values = true)]
        h: String,
    },
    /// Check the perfect-polytope conditions of the Y system.
    CheckPerfect { file: PathBuf },
    /// Rewrite a boolean / boolean-lp / plcp input as an instance file.
    Reduce {
        kind: ReduceKind,
        file: PathBuf,
        /// Write the instance here instead of only printing it.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a randomized solver-vs-oracle campaign from a config file.
    Fuzz {
        #[arg(long)]
        config: PathBuf,
        /// Directory for reproducer artifacts (defaults to $DBP_OUT_DIR,
        /// then ./dbp-artifacts).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the duality cross-checks against the brute-force optimum.
    Duality { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceKind {
    Boolean,
    BooleanLp,
    Plcp,
}

/// Runs the CLI on explicit arguments (the binary passes `std::env::args`)
/// and returns the process exit code.
pub fn run_command<I>(argv: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version through the same path
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

fn invalid(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        message: message.to_string(),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<DbpInstance, Failure> {
    let text = read_file(path)?;
    DbpInstance::from_json_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_validated(path: &Path) -> Result<DbpInstance, Failure> {
    let inst = load_instance(path)?;
    inst.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(inst)
}

fn out_dir(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os("DBP_OUT_DIR").map(PathBuf::from))
}

fn solve_error(e: SolveError) -> Failure {
    match e {
        SolveError::Validation(_)
        | SolveError::RankDeficient(_)
        | SolveError::NotPerfect { .. }
        | SolveError::YEmpty
        | SolveError::NonInteger(_) => invalid(e.to_string()),
        other => invalid(format!("run failed: {other}")),
    }
}

fn dispatch(cmd: Cmd) -> Result<i32, Failure> {
    match cmd {
        Cmd::Solve {
            file,
            skip_validation,
            tighten,
            out,
        } => {
            let inst = load_instance(&file)?;
            let opts = SolveOptions {
                skip_validation,
                tighten_bounds: tighten,
            };
            let result = solve(&inst, &opts).map_err(solve_error)?;
            let report = result.to_json_string();
            println!("{report}");
            if let Some(dir) = out_dir(out) {
                std::fs::create_dir_all(&dir)
                    .and_then(|_| {
                        std::fs::write(
                            dir.join(format!("solve-{:016x}.json", inst.content_hash())),
                            &report,
                        )
                    })
                    .map_err(|e| usage(format!("writing artifacts: {e}")))?;
            }
            Ok(if result.discrepancy.is_some() {
                EXIT_DISCREPANCY
            } else {
                EXIT_OK
            })
        }
        Cmd::Oracle { file } => {
            let inst = load_validated(&file)?;
            let result = oracle_value(&inst).map_err(|e| invalid(e.to_string()))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&result).expect("oracle report")
            );
            Ok(EXIT_OK)
        }
        Cmd::CheckSubset { file, h } => {
            let inst = load_validated(&file)?;
            let h: Rational = h
                .parse()
                .map_err(|e| usage(format!("--h: {e}")))?;
            let decision = decide_subset(&inst, &h).map_err(solve_error)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&decision).expect("decision report")
            );
            Ok(EXIT_OK)
        }
        Cmd::CheckPerfect { file } => {
            let inst = load_instance(&file)?;
            // X-side degeneracy does not matter for a Y-side check
            match inst.validate() {
                Ok(()) | Err(ValidationError::XEmpty | ValidationError::XUnbounded { .. }) => {}
                Err(e) => return Err(invalid(e.to_string())),
            }
            let report =
                check_perfect(&inst.d, &inst.d_rhs).map_err(|e| invalid(e.to_string()))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("perfect report")
            );
            Ok(EXIT_OK)
        }
        Cmd::Reduce { kind, file, out } => {
            let text = read_file(&file)?;
            let input = parse_reduction_input(&text).map_err(|e| usage(e.to_string()))?;
            let expected = match kind {
                ReduceKind::Boolean => "boolean",
                ReduceKind::BooleanLp => "boolean-lp",
                ReduceKind::Plcp => "plcp",
            };
            if input.kind() != expected {
                return Err(usage(format!(
                    "input file is kind {:?}, requested {expected:?}",
                    input.kind()
                )));
            }
            let inst = match input {
                ReductionInput::Boolean(bs) => reduce_boolean_feasibility(&bs),
                ReductionInput::BooleanLp { c, system } => {
                    reduce_boolean_lp_bigm(&c, &system).map_err(|e| invalid(e.to_string()))?
                }
                ReductionInput::Plcp(pp) => {
                    reduce_plcp(&pp).map_err(|e| invalid(e.to_string()))?
                }
            };
            let text = inst.to_json_string();
            println!("{text}");
            if let Some(path) = out {
                std::fs::write(&path, &text)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            }
            Ok(EXIT_OK)
        }
        Cmd::Fuzz { config, out } => {
            let text = read_file(&config)?;
            let cfg = CampaignConfig::from_json_str(&text)
                .map_err(|e| usage(format!("{}: {e}", config.display())))?;
            let dir = out_dir(out).unwrap_or_else(|| PathBuf::from("dbp-artifacts"));
            let report =
                fuzz_campaign(&cfg, Some(&dir)).map_err(|e| invalid(e.to_string()))?;
            println!("{}", report.to_json_string());
            Ok(if report.discrepancy_files.is_empty() {
                EXIT_OK
            } else {
                EXIT_DISCREPANCY
            })
        }
        Cmd::Duality { file } => {
            let inst = load_validated(&file)?;
            let report = check_duality(&inst).map_err(|e| invalid(e.to_string()))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("duality report")
            );
            Ok(if report.passed {
                EXIT_OK
            } else {
                EXIT_DISCREPANCY
            })
        }
    }
}
