use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ijtamari::algebra::AlgebraError;
use ijtamari::construction::{normalize_pair, parse_label_set, validate_pair, PairError, ValidPair};
use ijtamari::geometry::GeometryError;
use ijtamari::graphs::Vertex;
use ijtamari::tamari::{nu_from_pair, LatticePath, TamariError};

mod commands;

/// Subdivision-algebra triangulations of (I,J̄) polytopes and their Tamari complexes.
#[derive(Parser, Debug)]
#[command(name = "ijtamari", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Write the artifact into this directory instead of standard output.
    #[arg(long, env = "IJTAMARI_OUT_DIR", global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build A(I,J̄), its prec quotient, G(I,J̄) and the augmented graph.
    Construct(PairArgs),
    /// Reduce the monomial of G(I,J̄) and print the reduction tree and reduced form.
    Reduce(ReduceArgs),
    /// List the facet simplices of the triangulation and its dual graph.
    Triangulate(TriangulateArgs),
    /// Run every verifier on one pair.
    Verify(PairArgs),
    /// Tabulate ν-Catalan, ν-Narayana and ν-Schröder numbers.
    Count(CountArgs),
    /// Verify every pair up to a size, plus seeded random pairs.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
struct PairArgs {
    /// Labels of I, comma separated.
    #[arg(long = "I", value_name = "LABELS", allow_hyphen_values = false)]
    i: Option<String>,

    /// Labels j of the barred elements j̄, comma separated.
    #[arg(long = "Jbar", value_name = "LABELS")]
    jbar: Option<String>,

    /// Drop elements that lie on no arc instead of rejecting the pair.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[command(flatten)]
    pair: PairArgs,

    #[command(flatten)]
    reduction: ReductionArgs,
}

#[derive(Args, Debug, Clone, Copy)]
struct ReductionArgs {
    #[arg(long, value_enum, default_value_t = Order::Length)]
    order: Order,

    /// Attach only the two full-dimensional children at each reduction.
    #[arg(long)]
    simple: bool,

    #[arg(long, default_value_t = ijtamari::algebra::DEFAULT_MAX_REDUCTIONS, value_parser = positive)]
    max_reductions: usize,
}

#[derive(Args, Debug)]
struct TriangulateArgs {
    #[command(flatten)]
    pair: PairArgs,

    #[command(flatten)]
    reduction: ReductionArgs,

    /// Coordinates for facet vertices: routes of the flow polytope or points (e_i, e_j̄).
    #[arg(long, value_enum, default_value_t = Space::Pair)]
    space: Space,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    pair: PairArgs,

    /// A word over E and N; the pair's own path is used when omitted.
    #[arg(long, conflicts_with_all = ["i", "jbar"])]
    nu: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Verify every valid pair with labels up to this bound.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..=10))]
    max_n: Vertex,

    /// Number of additional random pairs.
    #[arg(long, default_value_t = 0)]
    random: usize,

    /// Label bound for random pairs.
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u32).range(1..=16))]
    random_max_n: Vertex,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Dot,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Json => "json",
            Format::Dot => "dot",
            Format::Csv => "csv",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Order {
    Length,
    Leftmost,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Space {
    Flow,
    Pair,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// Bad arguments that clap cannot detect on its own.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

impl PairArgs {
    fn pair(&self) -> Result<ValidPair> {
        let (Some(i), Some(jbar)) = (&self.i, &self.jbar) else {
            return Err(usage("both --I and --Jbar are required"));
        };
        let i = parse_label_set(i)?;
        let jbar = parse_label_set(jbar)?;
        let vp = if self.normalize {
            normalize_pair(&i, &jbar)?
        } else {
            validate_pair(&i, &jbar)?
        };
        Ok(vp)
    }
}

impl CountArgs {
    fn nu(&self) -> Result<(LatticePath, Option<ValidPair>)> {
        match &self.nu {
            Some(word) => {
                let nu: LatticePath = word.parse()?;
                if nu.steps.contains(&ijtamari::tamari::Step::D) {
                    return Err(usage("--nu takes a word over E and N"));
                }
                Ok((nu, None))
            }
            None => {
                let vp = self.pair.pair()?;
                Ok((nu_from_pair(&vp), Some(vp)))
            }
        }
    }
}

/// What a command produced and whether its checks passed.
pub struct Output {
    pub body: String,
    pub passed: bool,
}

impl Output {
    pub fn ok(body: String) -> Self {
        Output { body, passed: true }
    }
}

fn run(cli: &Cli) -> Result<Output> {
    let format = cli.format;
    match &cli.command {
        Command::Construct(args) => commands::construct(&args.pair()?, format),
        Command::Reduce(args) => commands::reduce(&args.pair.pair()?, &args.reduction.into(), format),
        Command::Triangulate(args) => {
            commands::triangulate(&args.pair.pair()?, &args.reduction.into(), args.space == Space::Flow, format)
        }
        Command::Verify(args) => commands::verify(&args.pair()?, format),
        Command::Count(args) => {
            let (nu, pair) = args.nu()?;
            commands::count(&nu, pair.as_ref(), format)
        }
        Command::Sweep(args) => commands::sweep(args.max_n, args.random, args.random_max_n, args.seed, format),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Construct(_) => "construct",
        Command::Reduce(_) => "reduce",
        Command::Triangulate(_) => "triangulate",
        Command::Verify(_) => "verify",
        Command::Count(_) => "count",
        Command::Sweep(_) => "sweep",
    }
}

/// Settings handed to the reduction commands.
pub struct Reduction {
    pub order: ijtamari::algebra::ReductionOrder,
    pub simple: bool,
    pub max_reductions: usize,
}

impl From<ReductionArgs> for Reduction {
    fn from(a: ReductionArgs) -> Self {
        Reduction {
            order: match a.order {
                Order::Length => ijtamari::algebra::ReductionOrder::length(),
                Order::Leftmost => ijtamari::algebra::ReductionOrder::leftmost(),
            },
            simple: a.simple,
            max_reductions: a.max_reductions,
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<PairError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<TamariError>() {
            if matches!(e, TamariError::BadStep(_)) {
                return 2;
            }
        }
        if let Some(e) = cause.downcast_ref::<AlgebraError>() {
            if matches!(e, AlgebraError::ReductionLimit(_)) {
                return 3;
            }
        }
        if let Some(e) = cause.downcast_ref::<GeometryError>() {
            if matches!(
                e,
                GeometryError::StateLimit(_) | GeometryError::Overflow | GeometryError::Algebra(AlgebraError::ReductionLimit(_))
            ) {
                return 3;
            }
        }
    }
    1
}

fn emit(cli: &Cli, out: &Output) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(format!("{}.{}", command_name(&cli.command), cli.format.extension()));
            fs::write(&path, &out.body).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
        None => print!("{}", out.body),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| emit(&cli, &out).map(|_| out.passed));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
