//! Command line front end: run a test on two CSV files, run simulation
//! scenarios, run the verification oracle, or benchmark the bound paths.
//!
//! Exit codes: 0 = completed (the statistical decision lives in the report),
//! 2 = input/configuration error, 3 = method precondition failure,
//! 1 = verification sweep found violations.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mmd_miss::bench::{run_complexity_bench, MULTI_D_BAND, MULTI_N_BAND, UNI_N_BAND};
use mmd_miss::data::vstack;
use mmd_miss::oracle::{run_verification_sweep, SweepConfig};
use mmd_miss::simulation::parse_scenario;
use mmd_miss::{
    case_delete, hot_deck_impute, load_csv_opts, make_plan, mean_impute, median_heuristic,
    mmd_u, normality_p_bound, permutation_p_bound, permutation_p_exact, run_scenario, Error,
    KernelParams, MaskedMatrix, TwoSampleData,
};

#[derive(Parser)]
#[command(
    name = "mmd-miss",
    version,
    about = "Two-sample MMD testing that stays valid under arbitrarily missing data"
)]
struct Cli {
    /// Worker thread cap (fallback: the MMDMISS_THREADS environment
    /// variable; default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether two CSV samples come from the same distribution.
    Test(TestArgs),
    /// Run a scenario file and write the rejection-rate table as CSV.
    Simulate(SimulateArgs),
    /// Brute-force check of the statistic bounds on random instances.
    Verify(VerifyArgs),
    /// Measure bound-computation scaling against the expected exponents.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    PermBound,
    NormalBound,
    PermExact,
    CaseDeletion,
    MeanImpute,
    HotDeck,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::PermBound => "perm-bound",
            MethodArg::NormalBound => "normal-bound",
            MethodArg::PermExact => "perm-exact",
            MethodArg::CaseDeletion => "case-deletion",
            MethodArg::MeanImpute => "mean-impute",
            MethodArg::HotDeck => "hot-deck",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct TestArgs {
    /// First sample, CSV.
    #[arg(long)]
    x: PathBuf,
    /// Second sample, CSV.
    #[arg(long)]
    y: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::PermBound)]
    method: MethodArg,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Permutation count.
    #[arg(long, default_value_t = 100)]
    b: usize,
    /// Kernel bandwidth: "auto" (median heuristic) or a positive number.
    #[arg(long, default_value = "auto")]
    beta: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Token denoting a missing cell (empty cells always count as missing).
    #[arg(long, default_value = "NA")]
    na_token: String,
    /// Skip one header line in both input files.
    #[arg(long)]
    skip_header: bool,
    /// Output path, or "-" for stdout.
    #[arg(long, default_value = "-")]
    output: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (flat key=value format).
    #[arg(long)]
    scenario: PathBuf,
    /// Output path for the rejection table CSV, or "-" for stdout.
    #[arg(long, default_value = "-")]
    output: String,
    /// Override scenario keys, e.g. --set n1=200 --set n2=200.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on the exhaustive imputation grid per instance.
    #[arg(long, default_value_t = 1_000_000)]
    grid_cap: u128,
}

#[derive(Args)]
struct BenchArgs {
    /// Fewer timing repeats (slopes stay comparable).
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Everything `test` reports; the JSON keys are a stable contract.
#[derive(Serialize)]
struct TestReport {
    method: &'static str,
    n1: usize,
    n2: usize,
    d: usize,
    n_missing_cells: usize,
    beta: f64,
    stat_lower: f64,
    stat_upper: f64,
    p_upper: f64,
    alpha: f64,
    reject: bool,
}

impl TestReport {
    fn to_csv(&self) -> String {
        format!(
            "method,n1,n2,d,n_missing_cells,beta,stat_lower,stat_upper,p_upper,alpha,reject\n\
             {},{},{},{},{},{},{},{},{},{},{}\n",
            self.method,
            self.n1,
            self.n2,
            self.d,
            self.n_missing_cells,
            self.beta,
            self.stat_lower,
            self.stat_upper,
            self.p_upper,
            self.alpha,
            self.reject
        )
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(code) = init_threads(cli.threads) {
        return code;
    }
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn init_threads(flag: Option<usize>) -> Result<(), ExitCode> {
    let from_env = std::env::var("MMDMISS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(n) = flag.or(from_env) {
        if n == 0 {
            eprintln!("error: thread count must be positive");
            return Err(ExitCode::from(2));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return Err(ExitCode::from(2));
        }
    }
    Ok(())
}

/// Input and configuration problems exit 2; statistical preconditions the
/// data fails to meet exit 3.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::Format { .. }
        | Error::EmptyInput
        | Error::Dim { .. }
        | Error::Config(_) => 2,
        Error::SampleSize { .. }
        | Error::IncompleteData { .. }
        | Error::InsufficientCompleteRows { .. }
        | Error::DegenerateScale
        | Error::InvalidBandwidth { .. }
        | Error::EmptySpec
        | Error::GridTooLarge { .. }
        | Error::NoCompleteRows
        | Error::Impute { .. }
        | Error::DegenerateVariance { .. } => 3,
    }
}

fn parse_beta(
    raw: &str,
    fallback: impl FnOnce() -> mmd_miss::Result<KernelParams<f64>>,
) -> mmd_miss::Result<KernelParams<f64>> {
    if raw == "auto" {
        fallback()
    } else {
        let value: f64 = raw.parse().map_err(|_| {
            Error::Config(format!("beta must be \"auto\" or a number, got {raw:?}"))
        })?;
        KernelParams::new(value)
    }
}

fn cmd_test(args: TestArgs) -> mmd_miss::Result<ExitCode> {
    let x: MaskedMatrix<f64> = load_csv_opts(&args.x, &args.na_token, args.skip_header)?;
    let y: MaskedMatrix<f64> = load_csv_opts(&args.y, &args.na_token, args.skip_header)?;
    let data = TwoSampleData::new(x, y)?;
    let n_missing = data.n_missing_cells();
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha must lie in (0, 1), got {}",
            args.alpha
        )));
    }

    let report = match args.method {
        MethodArg::PermBound => {
            let params = parse_beta(&args.beta, || median_heuristic(&vstack(&data.x, &data.y)?))?;
            let plan = make_plan(data.x.n() + data.y.n(), args.b, args.seed)?;
            let outcome = permutation_p_bound(&data, &params, &plan, args.alpha)?;
            report_from(&args, &data, n_missing, params.beta(), &outcome)
        }
        MethodArg::NormalBound => {
            let params = parse_beta(&args.beta, || median_heuristic(&vstack(&data.x, &data.y)?))?;
            let outcome = normality_p_bound(&data, &params, args.alpha)?;
            if let Some(warning) = &outcome.diagnostics.regime_warning {
                eprintln!("warning: {warning}");
            }
            report_from(&args, &data, n_missing, params.beta(), &outcome)
        }
        MethodArg::PermExact => {
            if n_missing > 0 {
                return Err(Error::IncompleteData { missing: n_missing });
            }
            let params = parse_beta(&args.beta, || median_heuristic(&vstack(&data.x, &data.y)?))?;
            let plan = make_plan(data.x.n() + data.y.n(), args.b, args.seed)?;
            let outcome = permutation_p_exact(&data.x, &data.y, &params, &plan, args.alpha)?;
            report_from(&args, &data, n_missing, params.beta(), &outcome)
        }
        MethodArg::CaseDeletion | MethodArg::MeanImpute | MethodArg::HotDeck => {
            let treated = match args.method {
                MethodArg::CaseDeletion => case_delete(&data),
                MethodArg::MeanImpute => mean_impute(&data)?,
                _ => hot_deck_impute(&data, args.seed)?,
            };
            if treated.x.n() < 2 || treated.y.n() < 2 {
                return Err(Error::SampleSize {
                    required: 2,
                    n1: treated.x.n(),
                    n2: treated.y.n(),
                });
            }
            // bandwidth convention: recomputed on the treated data
            let params = parse_beta(&args.beta, || {
                median_heuristic(&vstack(&treated.x, &treated.y)?)
            })?;
            let plan = make_plan(treated.x.n() + treated.y.n(), args.b, args.seed)?;
            let outcome = permutation_p_exact(&treated.x, &treated.y, &params, &plan, args.alpha)?;
            let stat = mmd_u(&treated.x, &treated.y, &params)?;
            TestReport {
                method: args.method.name(),
                n1: treated.x.n(),
                n2: treated.y.n(),
                d: treated.d(),
                n_missing_cells: n_missing,
                beta: params.beta(),
                stat_lower: stat,
                stat_upper: stat,
                p_upper: outcome.p_upper,
                alpha: outcome.alpha,
                reject: outcome.reject,
            }
        }
    };

    let text = match args.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&report).expect("json")),
        Format::Csv => report.to_csv(),
    };
    emit(&args.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn report_from(
    args: &TestArgs,
    data: &TwoSampleData<f64>,
    n_missing: usize,
    beta: f64,
    outcome: &mmd_miss::TestOutcome<f64>,
) -> TestReport {
    TestReport {
        method: args.method.name(),
        n1: data.x.n(),
        n2: data.y.n(),
        d: data.d(),
        n_missing_cells: n_missing,
        beta,
        stat_lower: outcome.diagnostics.stat_bounds.lower,
        stat_upper: outcome.diagnostics.stat_bounds.upper,
        p_upper: outcome.p_upper,
        alpha: outcome.alpha,
        reject: outcome.reject,
    }
}

fn emit(target: &str, text: &str) -> mmd_miss::Result<()> {
    if target == "-" {
        print!("{text}");
        Ok(())
    } else {
        std::fs::write(target, text).map_err(|source| Error::Io {
            path: target.to_string(),
            source,
        })
    }
}

fn cmd_simulate(args: SimulateArgs) -> mmd_miss::Result<ExitCode> {
    let mut text = std::fs::read_to_string(&args.scenario).map_err(|source| Error::Io {
        path: args.scenario.display().to_string(),
        source,
    })?;
    // later assignments win, so overrides are appended lines
    for over in &args.overrides {
        if !over.contains('=') {
            return Err(Error::Config(format!(
                "--set expects KEY=VALUE, got {over:?}"
            )));
        }
        text.push('\n');
        text.push_str(over);
    }
    let cfg = parse_scenario(&text)?;
    let table = run_scenario(&cfg)?;
    emit(&args.output, &table.to_csv())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> mmd_miss::Result<ExitCode> {
    let cfg = SweepConfig {
        instances: args.instances,
        draws_per_instance: args.draws,
        seed: args.seed,
        grid_cap: args.grid_cap,
    };
    let report = run_verification_sweep(&cfg);
    print!("{report}");
    if report.is_clean() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_bench(args: BenchArgs) -> mmd_miss::Result<ExitCode> {
    let report = run_complexity_bench(args.quick, args.seed);
    println!("bound-computation scaling:");
    let table = [
        (
            "d=1 path, n",
            &report.uni_n,
            report.uni_n_slope,
            UNI_N_BAND,
            report.uni_n_pass(),
        ),
        (
            "d>1 path, n",
            &report.multi_n,
            report.multi_n_slope,
            MULTI_N_BAND,
            report.multi_n_pass(),
        ),
        (
            "d>1 path, d",
            &report.multi_d,
            report.multi_d_slope,
            MULTI_D_BAND,
            report.multi_d_pass(),
        ),
    ];
    for (label, points, slope, band, pass) in table {
        for p in points.iter() {
            println!("  {label}: size {:>5}  {:>12.6} ms", p.size, p.seconds * 1e3);
        }
        println!(
            "  {label}: slope {slope:.3}, band [{}, {}] -> {}",
            band.0,
            band.1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(ExitCode::SUCCESS)
}
