//! `ruelle-kit` command-line front end.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "ruelle-kit", version)]
#[command(about = "Transfer operators, Poincaré series and stability certificates for rational maps")]
pub struct Cli {
    /// Map specification (JSON with `numerator` and `denominator` arrays of [re, im]).
    #[arg(long, global = true)]
    map: Option<PathBuf>,

    /// Output format.
    #[arg(long, visible_alias = "emit", global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Tolerance (triviality tolerance for `stability`, pass threshold for `verify`).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Truncation order of series.
    #[arg(long, global = true)]
    order: Option<usize>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Gamma,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesKind {
    /// `Σ xⁿ γ_{Rⁿ(a)}(z)/(Rⁿ)'(a)`
    Modified,
    /// `Σ xⁱ (R*)ⁱγ_a(z)`
    Backward,
    /// `Σ 1/(Rⁿ)'(R(a))`
    Forward,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalization status, degree and critical data.
    Analyze,
    /// Forward series and summability verdict at a point.
    Summability {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        point: Complex64,
    },
    /// Closed-form R* of a kernel, optionally checked against preimage sums.
    RuelleApply {
        #[arg(long, value_enum, default_value_t = KernelArg::Gamma)]
        kernel: KernelArg,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        base: Complex64,
        /// Evaluation points (repeatable).
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        at: Vec<Complex64>,
    },
    /// Truncated modified, backward or forward series.
    Series {
        #[arg(long, value_enum, default_value_t = SeriesKind::Modified)]
        kind: SeriesKind,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        base: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "1,0")]
        x: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Option<Complex64>,
    },
    /// Relation coefficients, triviality and certificate for one critical point.
    Stability {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, conflicts_with = "index")]
        point: Option<Complex64>,
        #[arg(long)]
        index: Option<usize>,
    },
    /// Rank of the relation system over the given critical points.
    Rank {
        /// Critical points, repeatable or `;`-separated; none gives the empty system.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, num_args = 1, value_delimiter = ';')]
        points: Vec<Complex64>,
    },
    /// Seeded randomized verification suite.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: ruelle_kit::verify::Suite,
        #[arg(long)]
        trials: Option<usize>,
        /// Monte-Carlo samples per norm (contraction suite).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Orbit and derivative cocycle of a point.
    Orbit {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        point: Complex64,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Escape-time counts on a rectangular grid.
    Grid {
        /// `xmin,xmax,ymin,ymax`
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true, default_value = "-2,2,-2,2")]
        window: [f64; 4],
        #[arg(long, default_value_t = 100)]
        resolution: usize,
    },
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re,im`, got `{s}`")),
    }
}

fn parse_window(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        &[x0, x1, y0, y1] if x0 < x1 && y0 < y1 => Ok([x0, x1, y0, y1]),
        [_, _, _, _] => Err("window needs xmin < xmax and ymin < ymax".into()),
        _ => Err(format!("expected `xmin,xmax,ymin,ymax`, got `{s}`")),
    }
}

fn parse_suite(s: &str) -> Result<ruelle_kit::verify::Suite, String> {
    s.parse().map_err(|e: ruelle_kit::Error| e.to_string())
}

/// Failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<ruelle_kit::Error> for Failure {
    fn from(e: ruelle_kit::Error) -> Self {
        use ruelle_kit::Error as E;
        let code = match e {
            E::InvalidPolynomial(_)
            | E::CommonRoot { .. }
            | E::InvalidArgument(_)
            | E::DegenerateTriple
            | E::IndexOutOfRange { .. } => EXIT_INPUT,
            _ => EXIT_PRECONDITION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("RUELLE_KIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::input(format!("RUELLE_KIT_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::input(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| commands::run(&cli));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_complex("1.5,-2").unwrap(), Complex64::new(1.5, -2.0));
        assert_eq!(parse_complex(" -0.25 ").unwrap(), Complex64::new(-0.25, 0.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("a,b").is_err());
    }

    #[test]
    fn window_arguments() {
        assert_eq!(parse_window("-2,2,-1,1").unwrap(), [-2.0, 2.0, -1.0, 1.0]);
        assert!(parse_window("2,-2,0,1").is_err());
        assert!(parse_window("0,1").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
