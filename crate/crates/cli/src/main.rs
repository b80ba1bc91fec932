mod commands;
mod error;
mod io;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use clubforge::linset::{SpectrumMethod, Strategy};
use clubforge::rmcode::WeightMethod;

use crate::error::CliError;

/// Construct, analyze and verify F_q-linear sets and their rank-metric codes.
#[derive(Parser, Debug)]
#[command(name = "clubforge", version)]
struct Cli {
    /// Worker threads for parallel loops (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Omit the timing/metadata block from the output.
    #[arg(long, global = true)]
    no_meta: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a named construction and run its self-checks.
    Construct(ConstructArgs),
    /// Point census, classification and optional hyperplane spectrum.
    Analyze(AnalyzeArgs),
    /// Trace dual of a subspace.
    Dual {
        /// Subspace JSON, or - for stdin.
        file: PathBuf,
    },
    /// Rank-metric code operations.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Transform a weight distribution to that of the dual code.
    Macwilliams(MacwilliamsArgs),
    /// Rank bound for i-clubs, with the B_2 admissibility test when --n is given.
    Bounds(BoundsArgs),
    /// Enumerate subspaces and classify them; prints JSON lines.
    Search(SearchArgs),
    /// Build a construction and run the full verification battery.
    Verify(ConstructArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct ConstructArgs {
    /// Construction name, e.g. trace-club, cone, lift-odd.
    name: Option<String>,
    /// Full construction spec as JSON; flags given alongside override it.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    e: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    n0: Option<u32>,
    #[arg(long)]
    delta: Option<u32>,
    #[arg(long)]
    xi: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<u32>>,
    /// How the subspace S is chosen.
    #[arg(long, value_enum)]
    s_mode: Option<SMode>,
    #[arg(long)]
    seed: Option<u64>,
    /// Basis of S for --s-mode explicit, as integer-encoded elements.
    #[arg(long, value_delimiter = ',')]
    s_basis: Option<Vec<u32>>,
    /// Maximum scattered part, as subspace JSON.
    #[arg(long)]
    part: Option<PathBuf>,
    /// Sample the maximum scattered part with this seed.
    #[arg(long, conflicts_with = "part")]
    sample_part: Option<u64>,
    /// Also write the subspace JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum SMode {
    TraceKernel,
    Random,
    Explicit,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Subspace JSON, or - for stdin.
    file: PathBuf,
    /// Include the hyperplane spectrum.
    #[arg(long)]
    hyperplanes: bool,
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value_t = SpectrumArg::Auto)]
    spectrum_method: SpectrumArg,
    /// Compare point census and hyperplane spectrum against a second subspace.
    #[arg(long)]
    compare: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum StrategyArg {
    Auto,
    Vectors,
    Points,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Vectors => Strategy::Vectors,
            StrategyArg::Points => Strategy::Points,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum SpectrumArg {
    Auto,
    Direct,
    ViaDual,
}

impl From<SpectrumArg> for SpectrumMethod {
    fn from(s: SpectrumArg) -> Self {
        match s {
            SpectrumArg::Auto => SpectrumMethod::Auto,
            SpectrumArg::Direct => SpectrumMethod::Direct,
            SpectrumArg::ViaDual => SpectrumMethod::ViaDual,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum CodeCommand {
    /// Code whose system is the given subspace.
    Build { file: PathBuf },
    /// Rank weight distribution of a code or of the code of a subspace.
    Weights {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Geometric)]
        method: MethodArg,
    },
    /// Dual code with respect to the standard inner product.
    Dual { file: PathBuf },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum MethodArg {
    Enumerate,
    Geometric,
}

impl From<MethodArg> for WeightMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Enumerate => WeightMethod::Enumerate,
            MethodArg::Geometric => WeightMethod::Geometric,
        }
    }
}

#[derive(Args, Debug)]
pub struct MacwilliamsArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    m: usize,
    /// Code length.
    #[arg(long)]
    n: usize,
    /// Code dimension.
    #[arg(long)]
    k: usize,
    /// Distribution A_0,...,A_m as a comma list.
    #[arg(long, value_delimiter = ',', conflicts_with = "dist", required_unless_present = "dist")]
    a: Option<Vec<String>>,
    /// Distribution JSON, e.g. the output of `code weights`.
    #[arg(long)]
    dist: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    i: usize,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct SearchArgs {
    /// Full search spec as JSON; flags given alongside override it.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    e: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// club:<i>, any-club, scattered or census.
    #[arg(long)]
    target: Option<String>,
    /// Only search subspaces containing S at the head e_0, with dim S = i.
    #[arg(long)]
    anchor_i: Option<usize>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long)]
    budget: Option<u64>,
    /// Lift the enumeration budget entirely.
    #[arg(long)]
    big: bool,
    /// Maximum number of hits reported.
    #[arg(long)]
    hit_cap: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand)
            {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return fail(&CliError::Parse(e.to_string().trim_end().to_string()));
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            return fail(&CliError::Validation("--jobs must be at least 1".into()));
        }
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let start = Instant::now();
    let emit = commands::run(&cli.command);
    let meta = json!({
        "meta": {
            "elapsed_ms": start.elapsed().as_millis() as u64,
            "version": env!("CARGO_PKG_VERSION"),
            "jobs": rayon::current_num_threads(),
        }
    });
    match emit {
        Ok(emit) => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            match emit.body {
                commands::Body::Object(mut map) => {
                    if !cli.no_meta {
                        map.insert("meta".into(), meta["meta"].clone());
                    }
                    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&Value::Object(map)).expect("json"));
                }
                commands::Body::Lines(lines) => {
                    for line in lines {
                        let _ = writeln!(out, "{}", serde_json::to_string(&line).expect("json"));
                    }
                    if !cli.no_meta {
                        let _ = writeln!(out, "{meta}");
                    }
                }
            }
            drop(out);
            match emit.failure {
                Some(e) => fail(&e),
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}
