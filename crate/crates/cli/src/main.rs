//! `cbound`: tail bounds, dominance constructions and verification from the
//! command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numeric failure,
//! 3 bound violated.

mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use cbound::bounds::Method;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Format;

#[derive(Parser)]
#[command(name = "cbound", version, about = "Bentkus-type tail bounds for martingales and their verification")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Seed for every randomized step.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one named bound.
    Bound(BoundArgs),
    /// Least log-concave majorant of the Poisson tail or of a given tail.
    Majorant(MajorantArgs),
    /// Splice of two laws at a given level or at mean zero.
    Xi(XiArgs),
    /// The quantile functional Q_alpha(U; delta).
    Qalpha(QalphaArgs),
    /// Check a bound against exact enumeration, Monte Carlo or a search.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Evaluate several bounds over a grid of x, as CSV rows.
    Sweep(SweepArgs),
    /// Search a strategy family for the largest event probability.
    Probe(SearchArgs),
}

/// Parameters shared by `bound` and `sweep`.
#[derive(Args, Serialize, Clone, Debug)]
pub struct ModelArgs {
    /// Horizon.
    #[arg(long)]
    pub n: Option<u64>,
    /// Variance budget.
    #[arg(long)]
    pub v2: Option<f64>,
    /// Scale of the Gaussian comparison.
    #[arg(long)]
    pub v: Option<f64>,
    /// Truncation level.
    #[arg(long)]
    pub y: Option<f64>,
    /// Tail level for quantile-type results.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Distribution spec such as `gauss:mu=0,sd=1` or `lattice:file=p.csv`.
    #[arg(long)]
    pub dist: Option<String>,
    /// `P(max X_i > y)` added by the winsorized bound.
    #[arg(long = "p-exceed", default_value_t = 0.0)]
    pub p_exceed: f64,
    /// Power-tail exponent for the Fuk–Nagaev threshold; bounded if absent.
    #[arg(long = "tail-q")]
    pub tail_q: Option<f64>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|_| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!("unknown method `{s}`; expected one of {}", names.join(", "))
    })
}

#[derive(Args, Serialize, Debug)]
pub struct BoundArgs {
    /// One of chernoff, bentkus1, bentkus2, bentkus5, fan, freedman-binom,
    /// freedman-poisson, poisson-majorant, azuma5, winsorized, fuk-nagaev.
    #[arg(value_parser = parse_method)]
    pub method: Method,
    /// Deviation level.
    #[arg(long)]
    pub x: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct SweepArgs {
    /// Comma-separated method names.
    #[arg(long)]
    pub methods: String,
    /// `lo:hi:step`.
    #[arg(long = "x-grid")]
    pub x_grid: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct MajorantArgs {
    /// Variance of the centered Poisson tail.
    #[arg(long, conflicts_with = "survival")]
    pub v2: Option<f64>,
    /// Comma-separated tail values at 0, 1, 2, ...
    #[arg(long)]
    pub survival: Option<String>,
    /// Evaluate at this point instead of listing the knots.
    #[arg(long)]
    pub x: Option<f64>,
}

#[derive(Args, Serialize, Debug)]
pub struct XiArgs {
    /// Lower law.
    #[arg(long)]
    pub t: String,
    /// Upper law.
    #[arg(long)]
    pub w: String,
    /// Splice level; the mean-zero level if absent.
    #[arg(long)]
    pub q: Option<f64>,
    /// Lattice step used when the splice is not discrete.
    #[arg(long)]
    pub step: Option<f64>,
    /// Write the splice as a lattice CSV file.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Serialize, Debug)]
pub struct QalphaArgs {
    #[arg(long)]
    pub dist: String,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 5.0)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventArg {
    Freedman,
    Azuma,
    Winsorized,
    Conjecture,
}

#[derive(Args, Serialize, Debug)]
pub struct EventArgs {
    #[arg(long, value_enum)]
    pub event: EventArg,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub v2: f64,
    #[arg(long)]
    pub y: Option<f64>,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Exact enumeration of a strategy tree.
    Dp(DpArgs),
    /// Monte Carlo with a Clopper–Pearson upper limit.
    Mc(McArgs),
    /// Ratio of the conjecture event probability to its conjectured bound.
    Probe(ConjectureArgs),
    /// Monte Carlo check of the bound for functions of independent inputs.
    Doob(DoobArgs),
}

#[derive(Args, Serialize, Debug)]
pub struct DpArgs {
    /// Strategy tree in JSON.
    #[arg(long)]
    pub strategy: std::path::PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub event: EventArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct McArgs {
    #[arg(long)]
    pub strategy: std::path::PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub event: EventArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    /// I.i.d. {-s², 1} with s² <= v²/n.
    BudgetTwoPoint,
    /// I.i.d. {a, 1} with free variance.
    UpperAtom,
    /// I.i.d. mean-zero {a, b}, b <= 1.
    TwoPoint,
    /// Adaptive: budget fraction on the first step.
    FrontLoading,
    /// I.i.d. {a, b} with b above y.
    AboveY,
    /// I.i.d. three-point laws with one atom above y.
    ThreePointAboveY,
}

#[derive(Args, Serialize, Debug)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub n: usize,
    /// Members evaluated.
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
}

#[derive(Args, Serialize, Debug)]
pub struct ConjectureArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub v2: f64,
    #[arg(long)]
    pub y: f64,
}

#[derive(Args, Serialize, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub event: EventArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DoobArg {
    Sum,
    Norms,
    Lipschitz,
}

#[derive(Args, Serialize, Debug)]
pub struct DoobArgs {
    #[arg(long, value_enum)]
    pub kind: DoobArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub x: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Trials for the estimate of E[Z]; defaults to `trials`.
    #[arg(long = "mean-trials")]
    pub mean_trials: Option<u64>,
    /// Per-coordinate standard deviation of the Gaussian inputs.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Comma-separated Lipschitz constants.
    #[arg(long)]
    pub lipschitz: Option<String>,
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { code: 1, msg: msg.into() }
    }
}

impl From<cbound::Error> for CliError {
    fn from(e: cbound::Error) -> Self {
        use cbound::Error as E;
        let code = match e {
            E::DivergentMoment { .. } | E::MgfDiverges(_) | E::Overflow(_) | E::Optim(_) | E::StepTooCoarse { .. } => 2,
            _ => 1,
        };
        CliError { code, msg: e.to_string() }
    }
}

fn threads_from_env() -> Result<(), CliError> {
    let Ok(v) = std::env::var("CBOUND_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("CBOUND_THREADS must be a positive integer, got `{v}`")))?;
    // Fails only if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<(String, u8), CliError> {
    threads_from_env()?;
    let g = commands::Globals { format: cli.format, seed: cli.seed };
    match cli.cmd {
        Cmd::Bound(a) => commands::bound(&g, &a),
        Cmd::Majorant(a) => commands::majorant(&g, &a),
        Cmd::Xi(a) => commands::xi(&g, &a),
        Cmd::Qalpha(a) => commands::qalpha(&g, &a),
        Cmd::Verify(VerifyCmd::Dp(a)) => commands::verify_dp(&g, &a),
        Cmd::Verify(VerifyCmd::Mc(a)) => commands::verify_mc(&g, &a),
        Cmd::Verify(VerifyCmd::Probe(a)) => commands::verify_probe(&g, &a),
        Cmd::Verify(VerifyCmd::Doob(a)) => commands::verify_doob(&g, &a),
        Cmd::Sweep(a) => commands::sweep(&g, &a),
        Cmd::Probe(a) => commands::probe(&g, &a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok((text, code)) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            let _ = out.flush();
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
