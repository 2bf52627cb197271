//! Command-line front end.
//!
//! The primary result goes to standard output as one line of JSON, a short
//! summary and any diagnostics go to standard error. Exit codes: 0 when the
//! order holds or the construction succeeded, 1 when the order fails (a
//! certificate is written), 2 on usage or input errors, 3 on numerical
//! breakdown.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::geometry::wulff_support;
use crate::io::{self, to_json};
use crate::kernels::{glue, inverse_sphere_kernel, sphere_kernel, DiscreteKernel};
use crate::measures::{coarsen, flatten_to_hyperplane, homogeneous_marginal, lift, project, w1, DiscreteMeasure, Norm};
use crate::order::{barycentric_cost, check_cx, check_phc, dual_probe, OrderVerdict};
use crate::{Tolerances, DEFAULT_TOL};

pub const DEFAULT_SEED: u64 = 0;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "phc-order", version, about = "Decide support-function and convex orders between discrete measures")]
struct Cli {
    /// Weight and coordinate tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Seed for randomized subroutines.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Report wall-clock time in verdict stats (output is then not reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide A ⪯ B for the chosen relation and print the verdict.
    CheckOrder {
        #[arg(long, value_enum)]
        relation: Relation,
        a: PathBuf,
        b: PathBuf,
    },
    /// Print a moment-preserving kernel from A to B, or a separating support function.
    FindKernel { a: PathBuf, b: PathBuf },
    /// Barycentric cost from A to B.
    Barcost {
        #[arg(long, value_enum, default_value_t = NormArg::L1)]
        norm: NormArg,
        a: PathBuf,
        b: PathBuf,
    },
    /// Homogeneous marginal on the unit sphere.
    Marginal { a: PathBuf },
    /// Sphere kernel and its inverse, as {"forward", "inverse"}.
    SphereKernels { a: PathBuf },
    /// Mass-preserving grid discretization with cells of side 1/n.
    Coarsen {
        #[arg(long)]
        n: usize,
        a: PathBuf,
    },
    /// Embed into the hyperplane x_{d+1} = 1.
    Lift { a: PathBuf },
    /// Radial projection of an upper half-space measure onto x_{d+1} = 1.
    Project { a: PathBuf },
    /// Radial projection onto x_{d+1} = 1, dropping the last coordinate.
    Flatten { a: PathBuf },
    /// Support function of the Wulff shape of F in direction omega.
    Wulff {
        f: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        omega: Vec<f64>,
    },
    /// Wasserstein-1 distance between A and B.
    W1 {
        #[arg(long, value_enum, default_value_t = NormArg::L2)]
        norm: NormArg,
        a: PathBuf,
        b: PathBuf,
    },
    /// Compose two kernels.
    Glue { p: PathBuf, q: PathBuf },
    /// Test A ⪯phc B against random support functions.
    Probe {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 256)]
        trials: usize,
        /// Gradients per random support function.
        #[arg(long, default_value_t = 4)]
        pieces: usize,
        /// Relative slack before an integral gap counts as a violation.
        #[arg(long, default_value_t = 1e-7)]
        slack: f64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Relation {
    Phc,
    Cx,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NormArg {
    L1,
    L2,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L1 => Norm::L1,
            NormArg::L2 => Norm::L2,
        }
    }
}

/// Failure carrying the exit code and a message for standard error.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NumericalBreakdown(_) => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn in_file(path: &Path, e: Error) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    })
}

fn load_measure(path: &Path) -> Result<DiscreteMeasure, Failure> {
    io::parse_measure(&read(path)?).map_err(|e| in_file(path, e))
}

fn load_kernel(path: &Path) -> Result<DiscreteKernel, Failure> {
    io::parse_kernel(&read(path)?).map_err(|e| in_file(path, e))
}

struct Output {
    json: String,
    summary: String,
    code: i32,
}

impl Output {
    fn ok<T: Serialize + ?Sized>(value: &T, summary: impl Into<String>) -> Self {
        Self {
            json: to_json(value),
            summary: summary.into(),
            code: EXIT_OK,
        }
    }
}

#[derive(Serialize)]
struct Scalar {
    value: f64,
}

#[derive(Serialize)]
struct SpherePair {
    forward: DiscreteKernel,
    inverse: DiscreteKernel,
}

fn verdict_output(mut v: OrderVerdict, timing: bool, relation: &str, witness_only: bool) -> Output {
    if !timing {
        v.stats.runtime_ms = None;
    }
    let summary = if v.holds {
        format!("{relation}: holds ({} pivots)", v.stats.pivots)
    } else {
        format!("{relation}: fails, certificate gap {:e} ({} pivots)", v.gap, v.stats.pivots)
    };
    let json = if witness_only { to_json(&v.witness) } else { to_json(&v) };
    Output {
        json,
        summary,
        code: if v.holds { EXIT_OK } else { EXIT_FAILS },
    }
}

fn execute(cli: Cli) -> Result<Output, Failure> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!("--tol must be positive and finite, got {}", cli.tol),
        });
    }
    let tol = Tolerances::with_tol(cli.tol);
    let out = match cli.command {
        Command::CheckOrder { relation, a, b } => {
            let (mu, nu) = (load_measure(&a)?, load_measure(&b)?);
            match relation {
                Relation::Phc => verdict_output(check_phc(&mu, &nu, &tol)?, cli.timing, "phc", false),
                Relation::Cx => verdict_output(check_cx(&mu, &nu, &tol)?, cli.timing, "cx", false),
            }
        }
        Command::FindKernel { a, b } => {
            let (mu, nu) = (load_measure(&a)?, load_measure(&b)?);
            verdict_output(check_phc(&mu, &nu, &tol)?, cli.timing, "phc", true)
        }
        Command::Barcost { norm, a, b } => {
            let (mu, nu) = (load_measure(&a)?, load_measure(&b)?);
            let mut c = barycentric_cost(&mu, &nu, norm.into(), &tol)?;
            if !cli.timing {
                c.stats.runtime_ms = None;
            }
            let bound = if c.upper_bound { " (upper bound)" } else { "" };
            Output::ok(&c, format!("barycentric cost {:e}{bound}", c.value))
        }
        Command::Marginal { a } => {
            let m = homogeneous_marginal(&load_measure(&a)?, cli.tol);
            Output::ok(&m, format!("{} sphere atoms", m.len()))
        }
        Command::SphereKernels { a } => {
            let m = load_measure(&a)?;
            let pair = SpherePair {
                forward: sphere_kernel(&m, cli.tol),
                inverse: inverse_sphere_kernel(&m, cli.tol)?,
            };
            Output::ok(&pair, "sphere kernels built")
        }
        Command::Coarsen { n, a } => {
            let m = coarsen(&load_measure(&a)?, n)?;
            Output::ok(&m, format!("{} cells", m.len()))
        }
        Command::Lift { a } => Output::ok(&lift(&load_measure(&a)?), "lifted"),
        Command::Project { a } => Output::ok(&project(&load_measure(&a)?)?, "projected"),
        Command::Flatten { a } => Output::ok(&flatten_to_hyperplane(&load_measure(&a)?, cli.tol)?, "flattened"),
        Command::Wulff { f, omega } => {
            let samples = io::parse_spherical_samples(&read(&f)?).map_err(|e| in_file(&f, e))?;
            let value = wulff_support(&samples, &omega)?;
            Output::ok(&Scalar { value }, format!("support {value:e}"))
        }
        Command::W1 { norm, a, b } => {
            let value = w1(&load_measure(&a)?, &load_measure(&b)?, norm.into())?;
            Output::ok(&Scalar { value }, format!("W1 {value:e}"))
        }
        Command::Glue { p, q } => {
            let k = glue(&load_kernel(&p)?, &load_kernel(&q)?)?;
            Output::ok(&k, "glued")
        }
        Command::Probe {
            a,
            b,
            trials,
            pieces,
            slack,
        } => {
            let (mu, nu) = (load_measure(&a)?, load_measure(&b)?);
            let r = dual_probe(&mu, &nu, trials, pieces, cli.seed, slack)?;
            Output {
                json: to_json(&r),
                summary: if r.passed {
                    format!("probe: no violation in {trials} trials")
                } else {
                    format!("probe: violation {:e}", r.violation)
                },
                code: if r.passed { EXIT_OK } else { EXIT_FAILS },
            }
        }
    };
    Ok(out)
}

/// Run the CLI on `args` (including the program name) and return the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_INPUT
                }
            };
        }
    };
    match execute(cli) {
        Ok(o) => {
            let _ = writeln!(out, "{}", o.json);
            let _ = writeln!(err, "{}", o.summary);
            o.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
