//! Command-line front end: runs suites, searches witnesses and moves elements
//! and Jordan maps through canonical JSON files.
//!
//! Exit codes: 0 when everything passes, 1 when any check fails, 2 on usage
//! or input errors, 3 when the worst outcome is inconclusive.

pub mod args;
pub mod io;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use conelab_core::random::rng_for;
use conelab_core::suites::witness::{
    search_nonadditivity_witness, search_seminorm_gap_witness, search_squaring_witness,
};
use conelab_core::{
    mutate_and_expect_failure, random_element, run_suite, ConeError, ElementClass, JordanIso,
    SearchOutcome, SuiteParams, Verdict,
};
use thiserror::Error;

pub use args::{parse_cli, Cli, Command, ElemCommand, Format, RunConfig, WitnessKind};
pub use io::{load_element, load_jordan, save_element, save_jordan};
pub use report::{emit_mutations, emit_report, emit_witness};

/// Environment variable capping the number of trial threads.
pub const THREADS_ENV: &str = "CONELAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Core {
        context: String,
        source: ConeError,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            _ => 2,
        }
    }

    fn core(context: impl Into<String>) -> impl FnOnce(ConeError) -> CliError {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }
}

pub fn exit_code(worst: Verdict) -> i32 {
    match worst {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Inconclusive => 3,
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(v) = std::env::var_os(THREADS_ENV) {
        let v = v.to_string_lossy();
        match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => builder = builder.num_threads(n),
            _ => {
                return Err(CliError::Invalid(format!(
                    "{THREADS_ENV} must be a positive integer, got {v:?}"
                )))
            }
        }
    }
    builder
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))
}

fn write_output(path: Option<&std::path::Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => stdout.write_all(bytes).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

/// Runs the suites of `config` one after another, trials in parallel.
pub fn verify(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let weight = config.weight.as_deref().map(load_element).transpose()?;
    let jordan = config.jordan.as_deref().map(load_jordan).transpose()?;
    let pool = thread_pool()?;
    let mut reports = Vec::new();
    let mut mutations = Vec::new();
    for shape in &config.shapes {
        for &id in &config.suites {
            let mut params = SuiteParams::new(shape.clone(), config.trials, config.seed)
                .with_tol(config.tol);
            if let Some(a) = &weight {
                params = params.with_weight(a.clone());
            }
            if let Some(j) = &jordan {
                params = params.with_jordan(j.clone());
            }
            let context = format!("{id} on {shape}");
            match config.mutation {
                Some(m) => mutations.push(
                    pool.install(|| mutate_and_expect_failure(id, m, &params))
                        .map_err(CliError::core(context))?,
                ),
                None => reports.push(
                    pool.install(|| run_suite(id, &params))
                        .map_err(CliError::core(context))?,
                ),
            }
        }
    }
    let (bytes, worst) = if config.mutation.is_some() {
        let worst = if mutations.iter().all(|m| m.harness_ok) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        (emit_mutations(&mutations, config.format), worst)
    } else {
        let worst = reports.iter().map(|r| r.verdict).max().unwrap_or(Verdict::Pass);
        (emit_report(&reports, config.format), worst)
    };
    write_output(config.out_path.as_deref(), bytes.as_bytes(), stdout)?;
    Ok(exit_code(worst))
}

fn witness(w: &args::WitnessArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let a = load_element(&w.element)?;
    let search = match w.kind {
        WitnessKind::Nonadditivity => search_nonadditivity_witness,
        WitnessKind::Squaring => search_squaring_witness,
        WitnessKind::SeminormGap => search_seminorm_gap_witness,
    };
    let outcome = search(&a, w.budget as usize, w.seed)
        .map_err(CliError::core(w.element.display().to_string()))?;
    let code = match outcome {
        SearchOutcome::Inconclusive { .. } => 3,
        _ => 0,
    };
    let bytes = emit_witness(w.kind, w.budget as usize, w.seed, &outcome, w.format);
    write_output(w.out.as_deref(), bytes.as_bytes(), stdout)?;
    Ok(code)
}

fn default_range(class: ElementClass) -> (f64, f64) {
    match class {
        ElementClass::General | ElementClass::PositiveInvertible => (0.5, 2.0),
        ElementClass::SelfAdjoint => (-1.0, 1.0),
        ElementClass::Positive => (0.0, 2.0),
        ElementClass::Effect => (0.0, 1.0),
    }
}

fn elem(cmd: &ElemCommand, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        ElemCommand::Random {
            dims,
            class,
            seed,
            lo,
            hi,
            out,
        } => {
            let (dlo, dhi) = default_range(*class);
            let range = (lo.unwrap_or(dlo), hi.unwrap_or(dhi));
            let x = random_element(dims, *class, range, *seed)
                .map_err(CliError::core(format!("random {} element", class.name())))?;
            match out {
                Some(p) => save_element(p, &x)?,
                None => write_output(None, io::element_bytes(&x).as_bytes(), stdout)?,
            }
        }
        ElemCommand::Jordan { dims, seed, out } => {
            let j = JordanIso::random(dims, &mut rng_for(*seed, 0));
            match out {
                Some(p) => save_jordan(p, &j)?,
                None => write_output(None, io::jordan_bytes(&j).as_bytes(), stdout)?,
            }
        }
    }
    Ok(0)
}

fn list(stdout: &mut dyn Write) -> Result<i32, CliError> {
    let text: String = conelab_core::SuiteId::all()
        .iter()
        .map(|id| format!("{:<24} {}\n", id.name(), id.statement()))
        .collect();
    write_output(None, text.as_bytes(), stdout)?;
    Ok(0)
}

pub fn execute(command: &Command, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Verify(v) => verify(&RunConfig::from(v.clone()), stdout),
        Command::Witness(w) => witness(w, stdout),
        Command::Elem(e) => elem(e, stdout),
        Command::List => list(stdout),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
/// Errors are reported on `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_cli(argv).and_then(|c| execute(&c, stdout));
    match result {
        Ok(code) => code,
        Err(CliError::Usage(e)) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
