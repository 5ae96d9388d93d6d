//! Argument grammar and the resolved run configuration.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conelab_core::{AlgebraShape, ElementClass, Mutation, SuiteId};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "conelab", version, about = "Randomized verification suites for maps between positive cones")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification suites and emit their reports.
    Verify(VerifyArgs),
    /// Search for a non-centrality witness for one element.
    Witness(WitnessArgs),
    /// Generate elements and Jordan maps.
    #[command(subcommand)]
    Elem(ElemCommand),
    /// List the available suites.
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Comma-separated suite ids, `Name` or `Name:p`, or `all`.
    #[arg(long, value_parser = parse_suites)]
    pub suite: SuiteList,
    /// Block sizes such as `2,3`; several shapes separated by `;`.
    #[arg(long, value_parser = parse_shapes, default_value = "2;3;2,3")]
    pub dims: ShapeList,
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8, value_parser = parse_tol)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Element file fixing the weight `a`.
    #[arg(long)]
    pub weight: Option<PathBuf>,
    /// Jordan map file fixing `J`.
    #[arg(long)]
    pub jordan: Option<PathBuf>,
    /// Run as a negative control, e.g. `perturb_unitary(0.05)`.
    #[arg(long)]
    pub mutate: Option<Mutation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessKind {
    Nonadditivity,
    Squaring,
    SeminormGap,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long, value_enum)]
    pub kind: WitnessKind,
    /// Element file holding a positive invertible `a`.
    #[arg(long)]
    pub element: PathBuf,
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum ElemCommand {
    /// Seeded random element of a given class.
    Random {
        #[arg(long, value_parser = parse_shape)]
        dims: AlgebraShape,
        #[arg(long, default_value = "PositiveInvertible")]
        class: ElementClass,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lower end of the spectrum range; defaults depend on the class.
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random Jordan *-automorphism of the algebra.
    Jordan {
        #[arg(long, value_parser = parse_shape)]
        dims: AlgebraShape,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone)]
pub struct SuiteList(pub Vec<SuiteId>);

#[derive(Debug, Clone)]
pub struct ShapeList(pub Vec<AlgebraShape>);

fn parse_suites(s: &str) -> Result<SuiteList, String> {
    let mut ids = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if item.eq_ignore_ascii_case("all") {
            ids.extend(SuiteId::all());
        } else {
            ids.push(item.parse::<SuiteId>().map_err(|e| e.to_string())?);
        }
    }
    if ids.is_empty() {
        return Err("no suite given".into());
    }
    Ok(SuiteList(ids))
}

fn parse_shape(s: &str) -> Result<AlgebraShape, String> {
    let dims = s
        .split(',')
        .map(|d| {
            d.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid block size {d:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    AlgebraShape::new(dims).map_err(|e| e.to_string())
}

fn parse_shapes(s: &str) -> Result<ShapeList, String> {
    let shapes = s
        .split(';')
        .map(parse_shape)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ShapeList(shapes))
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("tolerance must be a positive number, got {s:?}")),
    }
}

/// A fully resolved `verify` invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub suites: Vec<SuiteId>,
    pub shapes: Vec<AlgebraShape>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub out_path: Option<PathBuf>,
    pub format: Format,
    pub weight: Option<PathBuf>,
    pub jordan: Option<PathBuf>,
    pub mutation: Option<Mutation>,
}

impl From<VerifyArgs> for RunConfig {
    fn from(a: VerifyArgs) -> Self {
        Self {
            suites: a.suite.0,
            shapes: a.dims.0,
            trials: a.trials as usize,
            seed: a.seed,
            tol: a.tol,
            out_path: a.out,
            format: a.format,
            weight: a.weight,
            jordan: a.jordan,
            mutation: a.mutate,
        }
    }
}

pub fn parse_cli<I, T>(argv: I) -> Result<Command, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Ok(Cli::try_parse_from(argv)?.command)
}
