//! Command-line front end.
//!
//! Exit status: 0 success, 1 internal error, 2 usage error, 3 parse error,
//! 4 validation failure, 5 verification failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::realize::{realization, Realization};
use crate::series::{
    self, bernoulli_coeffs, bernoulli_numbers, BernoulliConvention, SeriesError, SeriesFn,
};
use crate::structure::{flatten, parse_spec, validate, AlgebraSpec, FlatStructure, StructureError};
use crate::verify::{
    verify_classical_limit, verify_relations, verify_shift_commutators, VerifyError,
};
use crate::{rational, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_VERIFICATION: i32 = 5;

pub const DEFAULT_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Realize,
    Verify,
    SeriesChecks,
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub order: usize,
    pub format: OutputFormat,
    pub seed: u64,
    /// Emit a realization even when its relations fail to verify.
    pub force: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            input: None,
            order: DEFAULT_ORDER,
            format: OutputFormat::Text,
            seed: 0,
            force: false,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "superweyl",
    version,
    about = "Exact Weyl realizations of Lie (super)algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, clap::Args)]
struct CommonArgs {
    /// Truncation order N.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Check antisymmetry and the Jacobi identities of an algebra file.
    Validate {
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Build the realization of an algebra file.
    Realize {
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Emit the realization even if verification fails.
        #[arg(long)]
        force: bool,
    },
    /// Certify the defining relations and shift-operator commutators.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check the functional equation, the ODE and odd vanishing.
    SeriesChecks {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the Bernoulli coefficient table.
    Bernoulli {
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let (command, input, common, force) = match cli.command {
            CliCommand::Validate { input, common } => {
                (Command::Validate, Some(input), common, false)
            }
            CliCommand::Realize {
                input,
                common,
                force,
            } => (Command::Realize, Some(input), common, force),
            CliCommand::Verify { input, common } => (Command::Verify, Some(input), common, false),
            CliCommand::SeriesChecks { common } => (Command::SeriesChecks, None, common, false),
            CliCommand::Bernoulli { common } => (Command::Bernoulli, None, common, false),
        };
        RunConfig {
            command,
            input,
            order: common.order,
            format: common.format,
            seed: common.seed,
            force,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(format!("output error: {e}"))
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::OrderTooSmall { .. } => Failure::Usage(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

impl From<SeriesError> for Failure {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::OrderTooSmall { .. } => Failure::Usage(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn internal<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Internal(e.to_string())
}

/// Parses command-line arguments (including the program name) and runs.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&RunConfig::from(cli), out, err),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            }
        }
    }
}

/// Executes one command, writing the result to `out` and diagnostics to
/// `err`. Returns the exit status.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = if config.order == 0 {
        Err(Failure::Usage("order must be at least 1".into()))
    } else {
        match config.command {
            Command::Validate => run_validate(config, out),
            Command::Realize => run_realize(config, out, err),
            Command::Verify => run_verify(config, out),
            Command::SeriesChecks => run_series_checks(config, out),
            Command::Bernoulli => run_bernoulli(config, out),
        }
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message());
            failure.code()
        }
    }
}

struct Loaded {
    spec: AlgebraSpec,
    digest: String,
}

fn load(config: &RunConfig) -> Result<Loaded, Failure> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| Failure::Usage("an algebra file is required".into()))?;
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let spec = parse_spec(&bytes).map_err(|e| Failure::Parse(e.to_string()))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    Ok(Loaded { spec, digest })
}

fn emit_json(out: &mut dyn Write, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(internal)?;
    writeln!(out, "{text}")?;
    Ok(())
}

/// Validates and flattens; `Err(code)` carries the validation exit status
/// after the report has been written.
fn load_valid(
    config: &RunConfig,
    out: &mut dyn Write,
) -> Result<Result<(Loaded, FlatStructure), i32>, Failure> {
    let loaded = load(config)?;
    let report = validate(&loaded.spec);
    if !report.is_valid() {
        match config.format {
            OutputFormat::Text => write!(out, "{report}")?,
            OutputFormat::Structured => emit_json(out, &report.to_json())?,
        }
        return Ok(Err(EXIT_VALIDATION));
    }
    match flatten(&loaded.spec) {
        Ok(flat) => Ok(Ok((loaded, flat))),
        Err(StructureError::FlatJacobi(indices)) => {
            writeln!(out, "flattened Jacobi identity fails at {indices:?}")?;
            Ok(Err(EXIT_VALIDATION))
        }
        Err(e) => Err(internal(e)),
    }
}

fn run_validate(config: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let loaded = load(config)?;
    let report = validate(&loaded.spec);
    match config.format {
        OutputFormat::Text => write!(out, "{report}")?,
        OutputFormat::Structured => {
            let mut value = report.to_json();
            value["signature"] = json!({"n": loaded.spec.n(), "m": loaded.spec.m()});
            emit_json(out, &value)?;
        }
    }
    Ok(if report.is_valid() {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    })
}

fn run_realize(
    config: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let (loaded, flat) = match load_valid(config, err)? {
        Ok(pair) => pair,
        Err(code) => return Ok(code),
    };
    let r = realization(&flat, config.order).map_err(internal)?;
    let verified = match verify_relations(&flat, &r) {
        Ok(report) if report.is_success() && verify_classical_limit(&r) => true,
        Ok(report) => {
            writeln!(err, "verification failed:")?;
            emit_json(err, &report.to_json())?;
            false
        }
        Err(e) if config.force => {
            writeln!(err, "not verified: {e}")?;
            false
        }
        Err(e) => return Err(e.into()),
    };
    if !verified && !config.force {
        writeln!(
            err,
            "refusing to emit an unverified realization (use --force)"
        )?;
        return Ok(EXIT_VERIFICATION);
    }
    write_realization(config, out, &r, &loaded.digest)?;
    Ok(if verified { EXIT_OK } else { EXIT_VERIFICATION })
}

fn write_realization(
    config: &RunConfig,
    out: &mut dyn Write,
    r: &Realization,
    digest: &str,
) -> Result<(), Failure> {
    match config.format {
        OutputFormat::Text => {
            let sig = r.signature();
            writeln!(
                out,
                "# order {} signature ({}|{}) sha256 {digest}",
                r.truncation,
                sig.n(),
                sig.m()
            )?;
            write!(out, "{}", r.render_text())?;
        }
        OutputFormat::Structured => emit_json(out, &r.to_json(digest))?,
    }
    Ok(())
}

fn run_verify(config: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let (loaded, flat) = match load_valid(config, out)? {
        Ok(pair) => pair,
        Err(code) => return Ok(code),
    };
    let r = realization(&flat, config.order).map_err(internal)?;
    let relations = verify_relations(&flat, &r)?;
    let classical = verify_classical_limit(&r);
    let shifts = verify_shift_commutators(&flat, &r)?;
    let ok = relations.is_success() && classical && shifts.is_success();
    match config.format {
        OutputFormat::Text => {
            let line = |name: &str, report: &crate::DefectReport| {
                if report.is_success() {
                    format!(
                        "{name}: ok through degree {}\n",
                        report.max_certified_degree
                    )
                } else {
                    let mut s = format!("{name}: {} violation(s)\n", report.violations.len());
                    for d in &report.violations {
                        let idx: Vec<String> =
                            d.indices.iter().map(|i| (i + 1).to_string()).collect();
                        s.push_str(&format!("  ({}): {}\n", idx.join(","), d.residual));
                    }
                    s
                }
            };
            write!(out, "{}", line("relations", &relations))?;
            writeln!(
                out,
                "classical limit: {}",
                if classical { "ok" } else { "violated" }
            )?;
            write!(out, "{}", line("shift commutators", &shifts))?;
            writeln!(
                out,
                "{}",
                if ok {
                    format!(
                        "success, certified degree {}",
                        relations.max_certified_degree
                    )
                } else {
                    "failure".to_string()
                }
            )?;
        }
        OutputFormat::Structured => emit_json(
            out,
            &json!({
                "status": if ok { "ok" } else { "violated" },
                "order": config.order,
                "source_digest": loaded.digest,
                "certified_degree": relations.max_certified_degree,
                "relations": relations.to_json(),
                "classical_limit": classical,
                "shift_commutators": shifts.to_json(),
            }),
        )?,
    }
    Ok(if ok { EXIT_OK } else { EXIT_VERIFICATION })
}

/// Perturbs one Bernoulli coefficient at random and reports whether the
/// functional equation notices.
fn seeded_negative_control(order: usize, seed: u64) -> Result<(usize, Rational, bool), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=order);
    let num = rng.gen_range(1..=9) * if rng.gen_bool(0.5) { 1 } else { -1 };
    let delta = rational(num, rng.gen_range(1..=12));
    let mut coeffs = bernoulli_coeffs(order + 1).coeffs().to_vec();
    coeffs[k] += &delta;
    let residual = series::functional_equation_residual(&SeriesFn::new(coeffs))?;
    Ok((k, delta, !residual.is_zero()))
}

fn run_series_checks(config: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let n = config.order;
    let functional = series::check_functional_equation(n)?;
    let multiplicative = series::check_g_multiplicative(n)?;
    let ode = series::check_ode(n)?;
    let odd = series::check_odd_vanishing(n);
    let (k, delta, detected) = seeded_negative_control(n, config.seed)?;
    let ok = functional.holds && multiplicative && ode && odd && detected;
    let verdict = |b: bool| if b { "ok" } else { "failed" };
    match config.format {
        OutputFormat::Text => {
            writeln!(out, "functional equation: {}", verdict(functional.holds))?;
            writeln!(out, "g multiplicative: {}", verdict(multiplicative))?;
            writeln!(out, "ode: {}", verdict(ode))?;
            writeln!(out, "odd vanishing: {}", verdict(odd))?;
            writeln!(
                out,
                "negative control (b_{k} shifted by {delta}): {}",
                if detected { "detected" } else { "missed" }
            )?;
        }
        OutputFormat::Structured => emit_json(
            out,
            &json!({
                "status": if ok { "ok" } else { "failed" },
                "order": n,
                "functional_equation": functional.holds,
                "g_multiplicative": multiplicative,
                "ode": ode,
                "odd_vanishing": odd,
                "negative_control": {
                    "seed": config.seed,
                    "coefficient": k,
                    "delta": delta.to_string(),
                    "detected": detected,
                },
            }),
        )?,
    }
    Ok(if ok { EXIT_OK } else { EXIT_VERIFICATION })
}

fn run_bernoulli(config: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let n = config.order;
    let taylor = bernoulli_coeffs(n);
    let plus = bernoulli_numbers(n, BernoulliConvention::PlusHalf);
    let minus = bernoulli_numbers(n, BernoulliConvention::MinusHalf);
    match config.format {
        OutputFormat::Text => {
            let rows: Vec<[String; 4]> = (0..=n)
                .map(|k| {
                    [
                        k.to_string(),
                        taylor.coeff(k).to_string(),
                        plus[k].to_string(),
                        minus[k].to_string(),
                    ]
                })
                .collect();
            let header = ["k", "b_k", "B_k(+1/2)", "B_k(-1/2)"];
            let widths: Vec<usize> = (0..4)
                .map(|c| {
                    rows.iter()
                        .map(|r| r[c].len())
                        .chain([header[c].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let fmt_row = |cells: [&str; 4]| {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect();
                padded.join("  ").trim_end().to_string()
            };
            writeln!(out, "{}", fmt_row(header))?;
            for r in &rows {
                writeln!(out, "{}", fmt_row([&r[0], &r[1], &r[2], &r[3]]))?;
            }
        }
        OutputFormat::Structured => {
            let rows: Vec<Value> = (0..=n)
                .map(|k| {
                    json!({
                        "k": k,
                        "taylor": taylor.coeff(k).to_string(),
                        "plus_half": plus[k].to_string(),
                        "minus_half": minus[k].to_string(),
                    })
                })
                .collect();
            emit_json(out, &json!({"order": n, "rows": rows}))?;
        }
    }
    Ok(EXIT_OK)
}
