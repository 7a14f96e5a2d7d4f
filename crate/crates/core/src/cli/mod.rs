//! The `contstab` command line: exponents, maximizer tables, eps sweeps,
//! Nyström spectra and the verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 numerical failure.

mod commands;
mod output;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Geometry;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping the worker threads of parallel sweeps.
pub const THREADS_ENV: &str = "CONTSTAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "contstab",
    version,
    about = "Stability exponents and maximizers for analytic continuation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form exponent gamma(z) (alpha(z) for the ellipse).
    Exponent {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bound, maximizer, solution norms and dual certificate over an eps grid.
    Sweep {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Geometric eps grid.
        #[arg(long, value_name = "LO,HI,N", default_value = "1e-8,1e-3,11")]
        eps_range: String,
        #[arg(long, value_name = "T", default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Nyström eigenvalues next to the closed-form ones.
    Spectrum {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, value_name = "M", default_value_t = 256)]
        nodes: usize,
        /// Number of rows to print.
        #[arg(long, value_name = "N", default_value_t = 32)]
        count: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate the closed-form maximizer on the data curve.
    Maximizer {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, value_name = "X", default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, value_name = "N", default_value_t = 256)]
        samples: usize,
        #[arg(long, value_name = "T", default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the invariant suite; exits 1 if any check fails.
    Verify {
        /// Emit a JSON report instead of text lines.
        #[arg(long)]
        json: bool,
        /// Decay rates of the switchover-index harness.
        #[arg(long = "lemma-a1", value_name = "A,B", default_value = "2,1")]
        sum_rates: String,
        /// Replace the expected annulus slope (a negative control when set wrong).
        #[arg(long, value_name = "X", allow_hyphen_values = true)]
        slope_target: Option<f64>,
        #[arg(long, value_name = "M", default_value_t = 256)]
        nodes: usize,
        #[arg(long, value_name = "T", default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct GeometryKind {
    /// Annulus rho < |zeta| < 1 with data on |zeta| = r (default 0.25,0.5).
    #[arg(long, value_name = "RHO,R")]
    pub annulus: Option<String>,
    /// Upper half-plane with data on the circle C(i, r).
    #[arg(long, value_name = "R")]
    pub halfplane: Option<f64>,
    /// Bernstein ellipse E_R with data on [-1, 1].
    #[arg(long, value_name = "R")]
    pub ellipse: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    #[command(flatten)]
    pub kind: GeometryKind,
    /// Evaluation point (defaults: 0.75,0 annulus; 0,3 half-plane; 0,0.5 ellipse).
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    pub z: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn parse_floats(s: &str, count: usize, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(Error::InvalidInput(format!(
            "{what} expects {count} comma-separated numbers, got '{s}'"
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("{what}: '{p}' is not a finite number")))
        })
        .collect()
}

pub(crate) fn parse_complex(s: &str) -> Result<Complex64> {
    let v = parse_floats(s, 2, "--z")?;
    Ok(Complex64::new(v[0], v[1]))
}

impl GeometryArgs {
    /// The geometry and the evaluation point, validated.
    pub fn resolve(&self) -> Result<(Geometry, Complex64)> {
        let geometry = if let Some(a) = &self.kind.annulus {
            let v = parse_floats(a, 2, "--annulus")?;
            Geometry::annulus(v[0], v[1])?
        } else if let Some(r) = self.kind.halfplane {
            Geometry::half_plane(r)?
        } else if let Some(r) = self.kind.ellipse {
            Geometry::ellipse(r)?
        } else {
            Geometry::annulus(0.25, 0.5)?
        };
        let z = match &self.z {
            Some(s) => parse_complex(s)?,
            None => match geometry {
                Geometry::Annulus(_) => Complex64::new(0.75, 0.0),
                Geometry::HalfPlane(_) => Complex64::new(0.0, 3.0),
                Geometry::Ellipse(_) => Complex64::new(0.0, 0.5),
            },
        };
        geometry.evaluation_point(z)?;
        Ok((geometry, z))
    }
}

pub(crate) fn parse_eps_range(s: &str) -> Result<(f64, f64, usize)> {
    let v = parse_floats(s, 3, "--eps-range")?;
    if v[2].fract() != 0.0 || v[2] < 5.0 {
        return Err(Error::InvalidInput(format!(
            "--eps-range point count must be an integer >= 5 (got {})",
            v[2]
        )));
    }
    let (lo, hi) = (v[0], v[1]);
    if !(lo >= crate::tikhonov::MIN_EPS && lo < hi && hi <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "--eps-range needs {:e} <= LO < HI <= 0.5 (LO = {lo}, HI = {hi})",
            crate::tikhonov::MIN_EPS
        )));
    }
    Ok((lo, hi, v[2] as usize))
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_input_error() {
        EXIT_INVALID_INPUT
    } else {
        EXIT_NUMERICAL
    }
}

pub(crate) fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Numerical(format!("cannot write to stdout: {e}")))
        }
    }
}

/// Cap the global thread pool from [`THREADS_ENV`].
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("{THREADS_ENV} must be a positive integer (got '{v}')")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Numerical(format!("cannot configure the thread pool: {e}")))
}

/// Run a parsed command; returns the exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Exponent { geometry, output } => commands::exponent(&geometry, &output),
        Command::Sweep {
            geometry,
            eps_range,
            tol,
            output,
        } => commands::sweep(&geometry, &eps_range, tol, &output),
        Command::Spectrum {
            geometry,
            nodes,
            count,
            output,
        } => commands::spectrum(&geometry, nodes, count, &output),
        Command::Maximizer {
            geometry,
            eps,
            samples,
            tol,
            output,
        } => commands::maximizer(&geometry, eps, samples, tol, &output),
        Command::Verify {
            json,
            sum_rates,
            slope_target,
            nodes,
            tol,
            out,
        } => commands::verify(json, &sum_rates, slope_target, nodes, tol, out.as_ref()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("contstab: {e}");
            exit_code(&e)
        }
    }
}

/// Parse `args` (including the program name) and run.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID_INPUT } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("contstab: {e}");
        return exit_code(&e);
    }
    execute(cli)
}
