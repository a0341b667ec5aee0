//! `framedrep` command-line front end. Every successful run prints one JSON
//! document on stdout; exit codes are 0 on success, 1 on domain errors and 2
//! on usage errors.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use framedrep::burau::{full_burau_matrix, reduced_burau_matrix, RepMatrix};
use framedrep::combinat::{rank_formulas, vandermonde_check};
use framedrep::fbraid::parse_word;
use framedrep::framed_alexander;
use framedrep::kz::{directions, flatness_table, random_point, singular_projection_check, GammaZero};
use framedrep::monodromy::{conjecture_report, monodromy_representation, MonodromySetup, TransportOptions};
use framedrep::scalar::{parse_complex, parse_rational};
use framedrep::{checks, par};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "framedrep", version, about = "Framed braid group representations, exact and by KZ monodromy")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Output::Pretty, global = true)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Output {
    Pretty,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Convention {
    /// γ^(0) takes the weight λ.
    Weight,
    /// γ^(0) is zero.
    Vanishing,
}

impl From<Convention> for GammaZero {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Weight => GammaZero::Weight,
            Convention::Vanishing => GammaZero::Vanishing,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Framed Burau matrix of a word.
    Burau {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// Word such as "s1 t2^-1"; empty for the identity.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        /// Use the reduced representation.
        #[arg(long)]
        reduced: bool,
    },
    /// Normalized determinant invariant of a word.
    Invariant {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// Ranks, weight-space dimensions and the rank split.
    Dims {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        r: usize,
    },
    /// Curvature of the KZ connection at random points.
    Flatness {
        #[arg(long)]
        n: usize,
        /// One truncation for all factors, or a comma-separated list.
        #[arg(long)]
        r: String,
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        weights: Weights,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Convention::Weight)]
        convention: Convention,
    },
    /// Monodromy matrices of the generator loops on the singular vectors.
    Monodromy {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        weights: Weights,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Convention::Weight)]
        convention: Convention,
    },
    /// Spectral comparison of weight-one monodromy with the specialized
    /// reduced representation.
    Conjecture {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        weights: Weights,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Convention::Weight)]
        convention: Convention,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Only run criteria whose title contains this text.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Args, Debug)]
struct Weights {
    /// Highest weight, as "a", "p/q" or "a+bi".
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    /// Level, as a decimal or "p/q".
    #[arg(long, allow_hyphen_values = true)]
    kappa: String,
}

impl Weights {
    fn parse(&self) -> Result<(Complex64, f64), CliError> {
        let lambda = parse_complex(&self.lambda).ok_or_else(|| CliError::Usage(format!("cannot parse --lambda {:?}", self.lambda)))?;
        let kappa = parse_real(&self.kappa).ok_or_else(|| CliError::Usage(format!("cannot parse --kappa {:?}", self.kappa)))?;
        if kappa == 0.0 {
            return Err(CliError::Domain("kappa must be nonzero".into()));
        }
        Ok((lambda, kappa))
    }
}

fn parse_real(text: &str) -> Option<f64> {
    use num_traits::ToPrimitive;
    text.trim()
        .parse::<f64>()
        .ok()
        .or_else(|| parse_rational(text).and_then(|q| q.to_f64()))
        .filter(|x| x.is_finite())
}

fn parse_ranks(text: &str, n: usize) -> Result<Vec<usize>, CliError> {
    let parts: Result<Vec<usize>, _> = text.split(',').map(|s| s.trim().parse::<usize>()).collect();
    let parts = parts.map_err(|_| CliError::Usage(format!("cannot parse --r {text:?}")))?;
    let ranks = match parts.len() {
        1 => vec![parts[0]; n],
        len if len == n => parts,
        len => return Err(CliError::Usage(format!("--r lists {len} truncations for {n} factors"))),
    };
    if n == 0 || ranks.contains(&0) {
        return Err(CliError::Domain("need at least one factor and truncations at least 1".into()));
    }
    Ok(ranks)
}

fn rep_json(rep: &RepMatrix) -> Value {
    let text: Vec<Vec<String>> = (0..rep.dim())
        .map(|i| rep.entries.row(i).iter().map(ToString::to_string).collect())
        .collect();
    let mut v = serde_json::to_value(rep).unwrap_or(Value::Null);
    v["entries_text"] = json!(text);
    v
}

/// The JSON document and whether the run counts as a success.
fn run(cmd: Command) -> Result<(Value, bool), CliError> {
    match cmd {
        Command::Burau { n, r, word, reduced } => {
            let w = parse_word(&word, n).map_err(CliError::domain)?;
            let rep = if reduced {
                reduced_burau_matrix(n, r, &w)
            } else {
                full_burau_matrix(n, r, &w)
            }
            .map_err(CliError::domain)?;
            Ok((json!({"word": w.to_string(), "reduced": reduced, "matrix": rep_json(&rep)}), true))
        }
        Command::Invariant { n, r, word } => {
            let w = parse_word(&word, n).map_err(CliError::domain)?;
            let value = framed_alexander(n, r, &w).map_err(CliError::domain)?;
            Ok((
                json!({
                    "word": w.to_string(),
                    "value": value.to_string(),
                    "numerator": value.numerator(),
                    "denominator": value.denominator(),
                }),
                true,
            ))
        }
        Command::Dims { n, m, r } => {
            let table = rank_formulas(n, m, r).map_err(CliError::domain)?;
            let mut v = serde_json::to_value(table).unwrap_or(Value::Null);
            v["vandermonde"] = if n >= 2 {
                serde_json::to_value(vandermonde_check(n, m, r).map_err(CliError::domain)?).unwrap_or(Value::Null)
            } else {
                Value::Null
            };
            Ok((v, true))
        }
        Command::Flatness {
            n,
            r,
            m,
            weights,
            samples,
            seed,
            convention,
        } => {
            let ranks = parse_ranks(&r, n)?;
            let (lambda, kappa) = weights.parse()?;
            let convention = GammaZero::from(convention);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dirs = directions(&ranks);
            let mut pairs: Vec<(String, String, f64)> = Vec::new();
            let mut restriction: f64 = 0.0;
            for _ in 0..samples {
                let mut point = random_point(&mut rng, &ranks, kappa);
                point.lambda = vec![lambda; n];
                let table = flatness_table(&point, m, convention).map_err(CliError::domain)?;
                for (k, e) in table.iter().enumerate() {
                    if pairs.len() <= k {
                        pairs.push((format!("{:?}", e.v), format!("{:?}", e.w), 0.0));
                    }
                    pairs[k].2 = pairs[k].2.max(e.residual);
                }
                restriction = restriction.max(singular_projection_check(&point, m, convention).map_err(CliError::domain)?);
            }
            let max = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
            Ok((json!({
                "ranks": ranks,
                "m": m,
                "lambda": [lambda.re, lambda.im],
                "kappa": kappa,
                "convention": convention,
                "samples": samples,
                "directions": dirs.iter().map(|d| format!("{d:?}")).collect::<Vec<_>>(),
                "pairs": pairs.iter().map(|(v, w, res)| json!({"v": v, "w": w, "max_residual": res})).collect::<Vec<_>>(),
                "max_residual": max,
                "singular_restriction": restriction,
            }), true))
        }
        Command::Monodromy {
            n,
            r,
            m,
            weights,
            tol,
            convention,
        } => {
            let (lambda, kappa) = weights.parse()?;
            let setup = MonodromySetup { n, r, m, lambda, kappa };
            let opts = transport_options(tol, convention)?;
            let (_, result) = monodromy_representation(&setup, &opts).map_err(CliError::domain)?;
            Ok((serde_json::to_value(result).map_err(CliError::domain)?, true))
        }
        Command::Conjecture {
            n,
            r,
            weights,
            tol,
            convention,
        } => {
            let (lambda, kappa) = weights.parse()?;
            let opts = transport_options(tol, convention)?;
            let report = conjecture_report(n, r, lambda, kappa, &opts).map_err(CliError::domain)?;
            let summary = report.summary();
            eprint!("{summary}");
            let mut v = serde_json::to_value(&report).map_err(CliError::domain)?;
            v["summary"] = json!(summary);
            Ok((v, true))
        }
        Command::Selftest { only } => {
            let mut outcomes = Vec::new();
            for (title, check) in checks::ALL {
                if only.as_deref().is_some_and(|f| !title.contains(f)) {
                    continue;
                }
                let outcome = check();
                eprintln!("{}", outcome.line());
                outcomes.push(outcome);
            }
            let passed = outcomes.iter().all(|o| o.passed);
            Ok((json!({"passed": passed, "parallel": par::is_parallel(), "outcomes": outcomes}), passed))
        }
    }
}

fn transport_options(tol: f64, convention: Convention) -> Result<TransportOptions, CliError> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::Usage(format!("--tol must lie in (0, 1), got {tol}")));
    }
    Ok(TransportOptions {
        tol,
        convention: convention.into(),
        ..Default::default()
    })
}

fn configure_threads() -> Result<(), CliError> {
    match std::env::var("FRAMEDREP_THREADS") {
        Ok(text) => {
            let threads: usize = text
                .trim()
                .parse()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| CliError::Usage(format!("FRAMEDREP_THREADS must be a positive integer, got {text:?}")))?;
            par::configure_threads(threads);
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn emit(value: &Value, output: Output) {
    let text = match output {
        Output::Pretty => serde_json::to_string_pretty(value),
        Output::Json => serde_json::to_string(value),
    };
    println!("{}", text.unwrap_or_else(|_| "null".into()));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.code());
    }
    match run(cli.command) {
        Ok((value, ok)) => {
            emit(&value, cli.output);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
