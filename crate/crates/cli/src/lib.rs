//! Command-line front end: solve, verify, exact MMS, instance generation and
//! a benchmark sweep.
//!
//! Exit codes: 0 success, 1 failed guarantee check, 2 bad input,
//! 3 internal invariant violation.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use mms_core::io::{
    allocation_to_string, instance_to_string, parse_allocation, parse_instance, pretty,
    rational_to_json,
};
use mms_core::rational::{self, ratio, Rational};
use mms_core::verify::{attach_ratios, check_alpha_mms};
use mms_core::{
    gamma_constant, gen_instance, solve_existence, solve_poly34, Distribution, Error,
    ExistenceMode, GenSpec, Instance, MmsOracle, Solution,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mms", version, about = "Approximate maximin-share allocations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve an instance and write the allocation as JSON.
    Solve(SolveArgs),
    /// Exact maximin share of one valuation row.
    Mms(MmsArgs),
    /// Check an allocation against alpha times each agent's maximin share.
    Verify(VerifyArgs),
    /// Generate a seeded random instance.
    Gen(GenArgs),
    /// Solve a seeded sweep of instances and print CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// 3/4 in strongly polynomial time, no oracle.
    Poly34,
    /// 3/4 with exact maximin shares.
    Exist34,
    /// 3/4 + 1/(12n) with exact maximin shares.
    Exist34plus,
}

impl Algorithm {
    fn guarantee(self, agents: usize) -> Rational {
        match self {
            Algorithm::Poly34 | Algorithm::Exist34 => ratio(3, 4),
            Algorithm::Exist34plus => ratio(3, 4) + gamma_constant(agents),
        }
    }

    fn solve(self, inst: &Instance, oracle: &MmsOracle) -> mms_core::Result<Solution> {
        match self {
            Algorithm::Poly34 => solve_poly34(inst),
            Algorithm::Exist34 => solve_existence(inst, ExistenceMode::ThreeQuarter, oracle),
            Algorithm::Exist34plus => {
                solve_existence(inst, ExistenceMode::ThreeQuarterPlus, oracle)
            }
        }
    }

    fn uses_oracle(self) -> bool {
        self != Algorithm::Poly34
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(
            self.to_possible_value()
                .expect("no skipped variants")
                .get_name(),
        )
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value_t = Algorithm::Poly34)]
    algorithm: Algorithm,
    /// Instance JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Allocation JSON destination; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Certify the allocation with the exact oracle.
    #[arg(long)]
    verify: bool,
    /// Largest item count the oracle accepts.
    #[arg(long, default_value_t = mms_core::oracle::DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
}

#[derive(Debug, Args)]
struct MmsArgs {
    /// Comma-separated values, e.g. 4,3,2,1 or 1/2,0.25,3.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    values: Vec<String>,
    /// Number of bundles.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = mms_core::oracle::DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    allocation: PathBuf,
    /// Approximation factor as P/Q or a decimal.
    #[arg(long, default_value = "3/4")]
    alpha: String,
    #[arg(long, default_value_t = mms_core::oracle::DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Instance JSON destination; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpecArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// uniform:LO:HI, correlated:LO:HI:NOISE or identical:LO:HI.
    #[arg(long, default_value = "uniform:1:100")]
    dist: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SpecArgs {
    fn spec(&self) -> mms_core::Result<GenSpec> {
        Ok(GenSpec {
            n: self.n,
            m: self.m,
            distribution: self.dist.parse::<Distribution>()?,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "poly34")]
    algorithms: Vec<Algorithm>,
    /// Compute ratios with the oracle for every algorithm.
    #[arg(long)]
    verify: bool,
    /// Write 0 in the wall-time column so output is byte-identical across runs.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, default_value_t = mms_core::oracle::DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
}

/// Failure that maps to a non-zero exit code.
#[derive(Debug)]
enum Failure {
    Input(String),
    Internal(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Outcome {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
        }
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Internal(format!("stdout: {e}"))),
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a, out, err),
        Command::Mms(a) => mms(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Gen(a) => gen(a, out),
        Command::Bench(a) => bench(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_INPUT
        }
        Err(Failure::Internal(m)) => {
            let _ = writeln!(err, "internal error: {m}");
            EXIT_INTERNAL
        }
        Err(Failure::Verify(m)) => {
            let _ = writeln!(err, "verification failed: {m}");
            EXIT_VERIFY_FAILED
        }
    }
}

fn solve(a: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let inst = parse_instance(&read(&a.input)?)?;
    let oracle = MmsOracle::with_cap(a.oracle_cap);
    let mut sol = a.algorithm.solve(&inst, &oracle)?;
    let mut failed = None;
    if a.verify {
        let alpha = a.algorithm.guarantee(inst.agents());
        let report = attach_ratios(&inst, &mut sol.allocation, &oracle)?;
        let checked = check_alpha_mms(&inst, &sol.allocation, &alpha, &oracle)?;
        let min = report.min_ratio();
        let _ = writeln!(
            err,
            "verify: alpha {} min ratio {} {}",
            rational::format(&alpha),
            min.as_ref().map_or("n/a".into(), rational::format),
            if checked.overall { "ok" } else { "FAILED" }
        );
        if !checked.overall {
            failed = Some(format!(
                "allocation is not {}-MMS",
                rational::format(&alpha)
            ));
        }
    }
    emit(
        a.output.as_deref(),
        &allocation_to_string(&sol.allocation),
        out,
    )?;
    failed.map_or(Ok(()), |m| Err(Failure::Verify(m)))
}

fn mms(a: MmsArgs, out: &mut dyn Write) -> Outcome {
    let values = a
        .values
        .iter()
        .map(|v| rational::parse(v.trim()))
        .collect::<mms_core::Result<Vec<_>>>()?;
    if let Some(j) = values.iter().position(rational::is_negative) {
        return Err(Error::NegativeValue { agent: 0, item: j }.into());
    }
    let r = MmsOracle::with_cap(a.oracle_cap).exact_mms(&values, a.k)?;
    let bundle_values: Vec<Vec<_>> = r
        .partition
        .iter()
        .map(|b| b.iter().map(|&j| rational_to_json(&values[j])).collect())
        .collect();
    let doc = json!({
        "value": rational_to_json(&r.value),
        "partition": r.partition,
        "partition_values": bundle_values,
    });
    emit(None, &pretty(&doc), out)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Outcome {
    let inst = parse_instance(&read(&a.input)?)?;
    let alloc = parse_allocation(&read(&a.allocation)?)?;
    let alpha = rational::parse(&a.alpha)?;
    let report = check_alpha_mms(&inst, &alloc, &alpha, &MmsOracle::with_cap(a.oracle_cap))?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    emit(None, &text, out)?;
    if report.overall {
        Ok(())
    } else {
        Err(Failure::Verify(format!(
            "some agent gets less than {} of its maximin share",
            a.alpha
        )))
    }
}

fn gen(a: GenArgs, out: &mut dyn Write) -> Outcome {
    let inst = gen_instance(&a.spec.spec()?)?;
    emit(a.output.as_deref(), &instance_to_string(&inst), out)
}

/// Columns of the `bench` CSV.
pub const BENCH_HEADER: &str =
    "trial,seed,algorithm,n,m,min_ratio,min_ratio_f64,guarantee,update_iterations,bag_rounds,wall_time_us";

struct BenchRow {
    trial: u64,
    seed: u64,
    algorithm: Algorithm,
    n: usize,
    m: usize,
    min_ratio: Option<Rational>,
    iterations: usize,
    bag_rounds: usize,
    micros: u128,
}

impl BenchRow {
    fn csv(&self) -> String {
        let (exact, approx) = match &self.min_ratio {
            Some(r) => (rational::format(r), format!("{:.6}", rational::to_f64(r))),
            None => (String::new(), String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.seed,
            self.algorithm,
            self.n,
            self.m,
            exact,
            approx,
            rational::format(&self.algorithm.guarantee(self.n)),
            self.iterations,
            self.bag_rounds,
            self.micros
        )
    }
}

fn bench_trial(
    a: &BenchArgs,
    spec: GenSpec,
    trial: u64,
) -> std::result::Result<Vec<BenchRow>, Error> {
    let spec = GenSpec {
        seed: spec.seed.wrapping_add(trial),
        ..spec
    };
    let inst = gen_instance(&spec)?;
    let oracle = MmsOracle::with_cap(a.oracle_cap);
    a.algorithms
        .iter()
        .map(|&algorithm| {
            let start = Instant::now();
            let mut sol = algorithm.solve(&inst, &oracle)?;
            let micros = if a.no_timing {
                0
            } else {
                start.elapsed().as_micros()
            };
            let min_ratio = if a.verify || algorithm.uses_oracle() {
                attach_ratios(&inst, &mut sol.allocation, &oracle)?.min_ratio()
            } else {
                None
            };
            Ok(BenchRow {
                trial,
                seed: spec.seed,
                algorithm,
                n: inst.agents(),
                m: inst.items(),
                min_ratio,
                iterations: sol.allocation.stats.update_loop_iterations,
                bag_rounds: sol.allocation.stats.bag_rounds,
                micros,
            })
        })
        .collect()
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Outcome {
    let spec = a.spec.spec()?;
    if spec.n == 0 {
        return Err(Error::BadSpec("n must be at least 1".into()).into());
    }
    let results: Vec<_> = (0..a.trials)
        .into_par_iter()
        .map(|t| bench_trial(&a, spec, t))
        .collect();
    let mut text = String::from(BENCH_HEADER);
    text.push('\n');
    let mut shortfall = None;
    for rows in results {
        for row in rows? {
            let guarantee = row.algorithm.guarantee(row.n);
            if row.min_ratio.as_ref().is_some_and(|r| *r < guarantee) && shortfall.is_none() {
                shortfall = Some(format!(
                    "trial {} {} below {}",
                    row.trial,
                    row.algorithm,
                    rational::format(&guarantee)
                ));
            }
            text.push_str(&row.csv());
            text.push('\n');
        }
    }
    emit(None, &text, out)?;
    shortfall.map_or(Ok(()), |m| Err(Failure::Verify(m)))
}
