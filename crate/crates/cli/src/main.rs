//! `twistmin`: Hecke traces, dimensions and q-expansion bases from the
//! command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 verification mismatch,
//! 4 internal failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use twistmin::arith::{divisors, sigma0};
use twistmin::basis::{basis_for, dimension, newform_coeffs_from_min, sturm_bound, trace_form};
use twistmin::characters::all_characters;
use twistmin::oracle::{trace_full, trace_min_sieved, trace_new};
use twistmin::quadratic::{
    class_number_character_sum, class_number_forms, is_fundamental, load_cache, populate, save_cache,
};
use twistmin::trace::{gates_pass, trace_min_in, RootChoice};
use twistmin::{CycloNumber, DirichletCharacter, Error, SpaceKind, SpaceSpec};

const CACHE_ENV: &str = "TWISTMIN_CACHE";
const CACHE_DEFAULT: &str = "twistmin-class-numbers.txt";

#[derive(Parser)]
#[command(name = "twistmin", version, about = "Exact Hecke traces on twist-minimal, new and full cusp form spaces")]
struct Cli {
    /// Class-number cache file ("d,h,w" lines), loaded at startup if present.
    #[arg(long, global = true, env = CACHE_ENV, default_value = CACHE_DEFAULT)]
    cache: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Traces of T_1..T_nmax.
    Trace {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 10)]
        nmax: u64,
        /// For kind=min, also compute every trace by the independent path.
        #[arg(long)]
        verify: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Dimension of the space (trace of T_1).
    Dim {
        #[command(flatten)]
        space: SpaceArgs,
    },
    /// Basis of q-expansions certified by exact rank.
    Basis {
        #[command(flatten)]
        space: SpaceArgs,
        /// Number of coefficients; defaults to the Sturm bound.
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Coefficients of the newform equivalent to the twist of the unique
    /// eigenform of a one-dimensional twist-minimal space.
    NewformCoeffs {
        #[arg(long)]
        level: u64,
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        character: String,
        /// Twisting character, as a Conrey label.
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 50)]
        bound: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Fill the class-number cache for fundamental discriminants min < d < 0.
    ClassNumbers {
        #[arg(long, allow_hyphen_values = true)]
        min: i64,
        /// Output file; defaults to the cache path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the consistency checks at the given bounds.
    Selftest {
        #[arg(long, default_value_t = 30)]
        max_level: u64,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        weights: Vec<u32>,
        #[arg(long, default_value_t = 10)]
        nmax: u64,
    },
}

#[derive(Args, Clone)]
struct SpaceArgs {
    #[arg(long)]
    level: u64,
    #[arg(long)]
    weight: u32,
    /// Conrey label "N.q".
    #[arg(long)]
    character: String,
    #[arg(long, default_value = "min")]
    kind: SpaceKind,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Usage(String),
    Mismatch(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn parse_character(label: &str, level: u64) -> Result<DirichletCharacter, Failure> {
    let chi: DirichletCharacter = label.parse()?;
    if chi.modulus() != level {
        return Err(Failure::Usage(format!("character {label} does not have modulus {level}")));
    }
    Ok(chi)
}

fn build_spec(args: &SpaceArgs) -> Result<SpaceSpec, Failure> {
    let chi = parse_character(&args.character, args.level)?;
    Ok(SpaceSpec::new(args.level, args.weight, chi, args.kind)?)
}

fn spec_json(spec: &SpaceSpec) -> serde_json::Value {
    json!({
        "level": spec.level,
        "weight": spec.weight,
        "character": spec.chi.label(),
        "kind": spec.kind,
    })
}

fn trace_value(spec: &SpaceSpec, n: u64) -> twistmin::Result<CycloNumber> {
    let o = spec.chi.order();
    match spec.kind {
        SpaceKind::Min => trace_min_in(spec, n, o, RootChoice::Smallest),
        SpaceKind::New => trace_new(&spec.chi, spec.weight, n, o),
        SpaceKind::Full => trace_full(&spec.chi, spec.weight, n, o),
    }
}

fn pretty(c: &CycloNumber) -> String {
    // Values that round to zero print without a sign.
    let clean = |x: f64| if x.abs() < 5e-7 { 0.0 } else { x };
    let (re, im) = c.to_complex();
    format!("{:.6}{:+.6}i", clean(re), clean(im))
}

fn coeff_list(c: &CycloNumber) -> String {
    c.coefficients().iter().map(|r| r.to_string()).collect::<Vec<_>>().join(";")
}

fn csv_header() -> String {
    "n,value_pretty,order,coeffs\n".to_string()
}

fn csv_line(out: &mut String, prefix: &str, n: u64, c: &CycloNumber) {
    let _ = writeln!(out, "{prefix}{n},{},{},{}", pretty(c), c.order(), coeff_list(c));
}

fn cmd_trace(space: &SpaceArgs, nmax: u64, verify: bool, format: Format) -> Outcome {
    let spec = build_spec(space)?;
    if verify && spec.kind != SpaceKind::Min {
        return Err(Failure::Usage("--verify applies to kind=min only".into()));
    }
    let values: Vec<(u64, CycloNumber)> =
        (1..=nmax).map(|n| Ok((n, trace_value(&spec, n)?))).collect::<Result<_, Error>>()?;
    if verify {
        for (n, v) in &values {
            let other = trace_min_sieved(&spec.chi, spec.weight, *n, spec.chi.order())?;
            if &other != v {
                return Err(Failure::Mismatch(format!("n={n}: direct {v}, independent {other}")));
            }
        }
    }
    match format {
        Format::Json => {
            let traces: Vec<_> = values.iter().map(|(n, v)| json!({ "n": n, "value": v })).collect();
            let mut doc = json!({ "space": spec_json(&spec), "traces": traces });
            if verify {
                doc["verified"] = json!(true);
            }
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        Format::Csv => {
            let mut out = csv_header();
            for (n, v) in &values {
                csv_line(&mut out, "", *n, v);
            }
            Ok(out)
        }
    }
}

fn cmd_dim(space: &SpaceArgs) -> Outcome {
    let spec = build_spec(space)?;
    Ok(format!("{}\n", dimension(&spec)?))
}

#[derive(Serialize)]
struct BasisRow<'a> {
    #[serde(flatten)]
    label: &'a twistmin::basis::RowLabel,
    coeffs: &'a [CycloNumber],
}

fn cmd_basis(space: &SpaceArgs, truncation: Option<usize>, format: Format) -> Outcome {
    let spec = build_spec(space)?;
    let b = truncation.unwrap_or(sturm_bound(&spec) as usize);
    let m = basis_for(&spec, b)?;
    match format {
        Format::Json => {
            let rows: Vec<_> =
                m.rows.iter().zip(&m.entries).map(|(label, coeffs)| BasisRow { label, coeffs }).collect();
            let doc = json!({
                "space": spec_json(&spec),
                "truncation": m.truncation,
                "order": m.order,
                "certified_rank": m.certified_rank,
                "rows": rows,
            });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        Format::Csv => {
            let mut out = format!("row,{}", csv_header());
            for (i, row) in m.entries.iter().enumerate() {
                for (j, c) in row.iter().enumerate() {
                    csv_line(&mut out, &format!("{},", i + 1), j as u64 + 1, c);
                }
            }
            Ok(out)
        }
    }
}

fn cmd_newform_coeffs(
    level: u64,
    weight: u32,
    character: &str,
    psi: &str,
    bound: usize,
    format: Format,
) -> Outcome {
    let chi = parse_character(character, level)?;
    let spec = SpaceSpec::new(level, weight, chi, SpaceKind::Min)?;
    let dim = dimension(&spec)?;
    if dim != 1 {
        return Err(Failure::Usage(format!(
            "the twist-minimal space has dimension {dim}; an eigenform is determined only when it is 1"
        )));
    }
    let psi: DirichletCharacter = psi.parse()?;
    if !psi.is_primitive() {
        return Err(Failure::Usage(format!("twisting character {psi} must be primitive")));
    }
    let f = trace_form(&spec, bound)?;
    let g = newform_coeffs_from_min(&f, &psi)?;
    let expansion = g.expansion(bound)?;
    match format {
        Format::Json => {
            let primes: Vec<_> = g.prime_coeffs.iter().map(|(p, b)| json!({ "p": p, "value": b })).collect();
            let doc = json!({
                "source": spec_json(&spec),
                "psi": g.psi.label(),
                "level": g.level,
                "character": g.character.label(),
                "prime_coeffs": primes,
                "coeffs": expansion.coeffs(),
            });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        Format::Csv => {
            let mut out = csv_header();
            for (i, c) in expansion.coeffs().iter().enumerate() {
                csv_line(&mut out, "", i as u64 + 1, c);
            }
            Ok(out)
        }
    }
}

fn cmd_class_numbers(min: i64, output: Option<PathBuf>, cache: PathBuf) -> Outcome {
    if min >= 0 {
        return Err(Failure::Usage("--min must be negative".into()));
    }
    let path = output.unwrap_or(cache);
    let entries = populate(min);
    save_cache(&path)?;
    Ok(format!("{} fundamental discriminants in ({min}, 0) written to {}\n", entries.len(), path.display()))
}

fn cmd_selftest(max_level: u64, weights: &[u32], nmax: u64) -> Outcome {
    if weights.iter().any(|&k| k < 2) {
        return Err(Failure::Usage("weights must be at least 2".into()));
    }
    let jobs: Vec<(DirichletCharacter, u32)> = (1..=max_level)
        .flat_map(all_characters)
        .filter(|c| c.is_twist_minimal())
        .flat_map(|c| weights.iter().map(move |&k| (c.clone(), k)).collect::<Vec<_>>())
        .collect();
    // (traces, gated, problems) per space.
    type Tally = (usize, usize, Vec<String>);
    let results: Vec<Result<Tally, Error>> = jobs
        .par_iter()
        .map(|(chi, k)| {
            let spec = SpaceSpec::new(chi.modulus(), *k, chi.clone(), SpaceKind::Min)?;
            let o = chi.order();
            let mut problems = Vec::new();
            let (mut traces, mut gated) = (0, 0);
            for n in 1..=nmax {
                let direct = trace_min_in(&spec, n, o, RootChoice::Smallest)?;
                let negated = trace_min_in(&spec, n, o, RootChoice::Negated)?;
                let sieved = trace_min_sieved(chi, *k, n, o)?;
                traces += 1;
                if direct != sieved || direct != negated {
                    problems.push(format!("{chi} k={k} n={n}: {direct} / {negated} / {sieved}"));
                }
                if !direct.is_integral() {
                    problems.push(format!("{chi} k={k} n={n}: {direct} not integral"));
                }
                if !gates_pass(chi, *k, n) {
                    gated += 1;
                    if !direct.is_zero() {
                        problems.push(format!("{chi} k={k} n={n}: gated trace {direct} not zero"));
                    }
                }
            }
            Ok((traces, gated, problems))
        })
        .collect();
    let mut traces = 0;
    let mut gated = 0;
    let mut problems = Vec::new();
    for r in results {
        let (t, g, p) = r?;
        traces += t;
        gated += g;
        problems.extend(p);
    }
    let all_jobs: Vec<(DirichletCharacter, u32)> = (1..=max_level)
        .flat_map(all_characters)
        .flat_map(|c| weights.iter().map(move |&k| (c.clone(), k)).collect::<Vec<_>>())
        .filter(|(c, k)| c.parity() == if k % 2 == 0 { 1 } else { -1 })
        .collect();
    let decomposition: Vec<Result<Option<String>, Error>> = all_jobs
        .par_iter()
        .map(|(chi, k)| {
            let o = chi.order();
            let full = trace_full(chi, *k, 1, o)?;
            let mut sum = CycloNumber::zero(o);
            for l in divisors(chi.modulus()).into_iter().filter(|l| l % chi.conductor() == 0) {
                let chi_l = chi.change_modulus(l)?;
                sum += &trace_new(&chi_l, *k, 1, o)?.scale_integer(sigma0(chi.modulus() / l));
            }
            Ok((full != sum || !full.is_integral()).then(|| format!("{chi} k={k}: full {full}, new sum {sum}")))
        })
        .collect();
    for r in decomposition {
        problems.extend(r?);
    }
    let discs: Vec<i64> = (-1000..0).filter(|&d| is_fundamental(d)).collect();
    for &d in &discs {
        if class_number_forms(d) != class_number_character_sum(d) {
            problems.push(format!("class number mismatch at d={d}"));
        }
    }
    if !problems.is_empty() {
        return Err(Failure::Mismatch(format!("FAIL: {} problems; first: {}", problems.len(), problems[0])));
    }
    Ok(format!(
        "PASS: {} twist-minimal spaces, {traces} traces on both paths and both square roots, {gated} gated zeros, {} old/new dimension decompositions, {} class numbers\n",
        jobs.len(),
        all_jobs.len(),
        discs.len()
    ))
}

fn run(cli: Cli) -> Outcome {
    load_cache(&cli.cache)?;
    match cli.command {
        Command::Trace { space, nmax, verify, format } => cmd_trace(&space, nmax, verify, format),
        Command::Dim { space } => cmd_dim(&space),
        Command::Basis { space, truncation, format } => cmd_basis(&space, truncation, format),
        Command::NewformCoeffs { level, weight, character, psi, bound, format } => {
            cmd_newform_coeffs(level, weight, &character, &psi, bound, format)
        }
        Command::ClassNumbers { min, output } => cmd_class_numbers(min, output, cli.cache),
        Command::Selftest { max_level, weights, nmax } => cmd_selftest(max_level, &weights, nmax),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(4)
        }
    }
}
