//! The `locaray` command-line front end.
//!
//! Exit codes: 0 success, 1 a checked property does not hold or a runtime
//! failure, 2 no array within the timeout, 3 coverage index over the memory
//! budget, 64 usage errors.

mod bench;

use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::anneal::{AnnealParams, Strategy};
use crate::cost::DEFAULT_MEMORY_BUDGET;
use crate::error::Error;
use crate::model::{enumerate_interactions, ArrayFile, RowSet, SutModel};
use crate::search::{construct, initial_bounds, SearchBudget};
use crate::verify::{locate_fault, verify};

pub use bench::{parse_suite, run_suite, write_csv, BenchOptions, BenchRecord, RunRecord, SuiteEntry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_TIMEOUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Overrides the coverage index memory budget, in MiB.
pub const MEM_BUDGET_VAR: &str = "LOCARAY_MEM_BUDGET_MB";

/// Human output lists at most this many uncovered interactions or collisions.
const LIST_LIMIT: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "locaray", version, about = "Build and check (1̄,t)-locating arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for a small locating array and write it to a file.
    Generate(GenerateArgs),
    /// Check whether an array file is covering and locating.
    Verify(VerifyArgs),
    /// Print the initial row bounds used by the search.
    Bound(BoundArgs),
    /// List the interactions whose covering rows equal a failing set.
    Locate(LocateArgs),
    /// Run repeated searches over a suite of models and report CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct AnnealArgs {
    #[arg(long, default_value_t = 4.0)]
    weight: f64,
    #[arg(long, default_value_t = 0.5)]
    t_init: f64,
    #[arg(long, default_value_t = 2048)]
    k_max: usize,
    #[arg(long, default_value_t = 0.999)]
    cooling: f64,
    #[arg(long, default_value_t = 3)]
    max_retries: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Proposed)]
    strategy: StrategyArg,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum StrategyArg {
    Proposed,
    Baseline,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Proposed => Strategy::Proposed,
            StrategyArg::Baseline => Strategy::Baseline,
        }
    }
}

impl AnnealArgs {
    fn params(&self, memory_budget: u64) -> AnnealParams {
        AnnealParams {
            weight: self.weight,
            t_init: self.t_init,
            k_max: self.k_max,
            cooling: self.cooling,
            strategy: self.strategy.into(),
            memory_budget,
        }
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Domain sizes, e.g. "2^13 4^5" or "2,2,2,3".
    #[arg(long)]
    model: SutModel,
    #[arg(long)]
    strength: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    anneal: AnnealArgs,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 3600.0)]
    timeout: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    array: PathBuf,
    /// Defaults to the strength recorded in the file.
    #[arg(long)]
    strength: Option<usize>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long)]
    model: SutModel,
    #[arg(long)]
    strength: usize,
}

#[derive(Debug, Args)]
struct LocateArgs {
    #[arg(long)]
    array: PathBuf,
    /// 1-based failing row numbers, comma separated. Empty for none.
    #[arg(long, allow_hyphen_values = true)]
    failing: String,
    #[arg(long)]
    strength: Option<usize>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Lines of `name,model`; `#` starts a comment.
    #[arg(long)]
    suite: PathBuf,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Per-run wall-clock limit in seconds.
    #[arg(long, default_value_t = 3600.0)]
    timeout: f64,
    #[arg(long, default_value_t = 2)]
    strength: usize,
    /// Run `i` of every instance uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    anneal: AnnealArgs,
    /// Runs executed in parallel.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-run log. Defaults to `<out>.runs.log`, or standard error.
    #[arg(long)]
    log: Option<PathBuf>,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Verify(a) => verify_cmd(a, out),
        Command::Bound(a) => bound(a, out),
        Command::Locate(a) => locate(a, out),
        Command::Bench(a) => bench_cmd(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::ModelToken { .. }
        | Error::EmptyModel
        | Error::Strength { .. }
        | Error::Parameter(_)
        | Error::RowOutOfRange { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

type CmdResult = Result<i32, Error>;

fn io(e: std::io::Error) -> Error {
    Error::Io(e)
}

fn memory_budget() -> Result<u64, Error> {
    match std::env::var(MEM_BUDGET_VAR) {
        Err(_) => Ok(DEFAULT_MEMORY_BUDGET),
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .ok()
            .and_then(|mb| mb.checked_mul(1 << 20))
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "{MEM_BUDGET_VAR} must be a whole number of MiB, got `{v}`"
                ))
            }),
    }
}

fn timeout(secs: f64) -> Result<Duration, Error> {
    Duration::try_from_secs_f64(secs)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| {
            Error::Parameter(format!(
                "timeout must be a positive number of seconds, got {secs}"
            ))
        })
}

fn params_lines(out: &mut dyn Write, p: &AnnealParams, max_retries: usize) -> std::io::Result<()> {
    writeln!(out, "strategy={}", p.strategy)?;
    writeln!(out, "weight={}", p.weight)?;
    writeln!(out, "t_init={}", p.t_init)?;
    writeln!(out, "k_max={}", p.k_max)?;
    writeln!(out, "cooling={}", p.cooling)?;
    writeln!(out, "max_retries={max_retries}")
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> CmdResult {
    let params = a.anneal.params(memory_budget()?);
    let budget = SearchBudget {
        max_failures: a.anneal.max_retries,
        timeout: Some(timeout(a.timeout)?),
        seed: a.seed,
        workers: a.workers,
    };
    if a.strength == 0 || a.strength > a.model.factors() {
        return Err(Error::Strength {
            t: a.strength,
            k: a.model.factors(),
        });
    }
    let interactions = enumerate_interactions(&a.model, a.strength)?.len();
    let result = construct(&a.model, a.strength, &params, &budget)?;

    writeln!(out, "model={}", a.model).map_err(io)?;
    writeln!(out, "strength={}", a.strength).map_err(io)?;
    writeln!(out, "interactions={interactions}").map_err(io)?;
    writeln!(out, "seed={}", a.seed).map_err(io)?;
    writeln!(out, "workers={}", a.workers).map_err(io)?;
    params_lines(out, &params, a.anneal.max_retries).map_err(io)?;
    writeln!(out, "bounds={} {}", result.bounds.0, result.bounds.1).map_err(io)?;
    writeln!(out, "runs={}", result.history.len()).map_err(io)?;
    writeln!(out, "timed_out={}", result.timed_out).map_err(io)?;
    writeln!(out, "elapsed_s={:.1}", result.elapsed.as_secs_f64()).map_err(io)?;

    let Some(array) = result.array else {
        writeln!(out, "rows=").map_err(io)?;
        return Ok(EXIT_TIMEOUT);
    };
    // The array came out of the incremental index; check it independently
    // before handing it to anyone.
    if !verify(&array, a.strength)?.is_locating_1bar {
        return Err(Error::Array(
            "search produced an array that does not verify".into(),
        ));
    }
    writeln!(out, "rows={}", array.num_rows()).map_err(io)?;
    if let Some(t) = result.time_to_best {
        writeln!(out, "time_to_best_s={:.1}", t.as_secs_f64()).map_err(io)?;
    }
    ArrayFile::new(array, a.strength).write(&a.out)?;
    writeln!(out, "out={}", a.out.display()).map_err(io)?;
    Ok(EXIT_OK)
}

fn verify_cmd(a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let file = ArrayFile::read(&a.array)?;
    let t = a.strength.unwrap_or(file.strength);
    let array = &file.array;
    let report = verify(array, t)?;
    let interactions = enumerate_interactions(array.model(), t)?.len();

    let mut s = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(s, "model={}", array.model());
    let _ = writeln!(s, "rows={}", array.num_rows());
    let _ = writeln!(s, "strength={t}");
    let _ = writeln!(s, "interactions={interactions}");
    let _ = writeln!(s, "is_covering={}", report.is_covering);
    let _ = writeln!(s, "is_locating_exact1={}", report.is_locating_exact1);
    let _ = writeln!(s, "is_locating_1bar={}", report.is_locating_1bar);
    let _ = writeln!(s, "uncovered={}", report.uncovered.len());
    let _ = writeln!(s, "collisions={}", report.collision_count());

    if report.is_locating_1bar {
        let _ = writeln!(
            s,
            "\n(1̄,{t})-locating: every interaction has its own nonempty set of rows."
        );
    } else {
        let _ = writeln!(s, "\nnot (1̄,{t})-locating.");
        if !report.uncovered.is_empty() {
            let _ = writeln!(s, "uncovered interactions:");
            for it in report.uncovered.iter().take(LIST_LIMIT) {
                let _ = writeln!(s, "  {it}");
            }
            if report.uncovered.len() > LIST_LIMIT {
                let _ = writeln!(s, "  ... {} more", report.uncovered.len() - LIST_LIMIT);
            }
        }
        let nonempty: Vec<_> = report
            .collisions()
            .filter(|(_, _, rows)| !rows.is_empty())
            .collect();
        if !nonempty.is_empty() {
            let _ = writeln!(s, "collisions on nonempty rows:");
            for (t1, t2, rows) in nonempty.iter().take(LIST_LIMIT) {
                let _ = writeln!(s, "  {t1} {t2} rows {rows}");
            }
            if nonempty.len() > LIST_LIMIT {
                let _ = writeln!(s, "  ... {} more", nonempty.len() - LIST_LIMIT);
            }
        }
    }
    out.write_all(s.as_bytes()).map_err(io)?;
    Ok(if report.is_locating_1bar {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn bound(a: BoundArgs, out: &mut dyn Write) -> CmdResult {
    let (low, high) = initial_bounds(&a.model, a.strength)?;
    writeln!(out, "low={low} high={high}").map_err(io)?;
    Ok(EXIT_OK)
}

fn parse_failing(text: &str, rows: usize) -> Result<RowSet, Error> {
    let numbers = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::Parameter(format!("failing rows must be positive integers, got `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    RowSet::from_one_based(numbers, rows)
}

fn locate(a: LocateArgs, out: &mut dyn Write) -> CmdResult {
    let file = ArrayFile::read(&a.array)?;
    let t = a.strength.unwrap_or(file.strength);
    let failing = parse_failing(&a.failing, file.array.num_rows())?;
    let found = locate_fault(&file.array, &failing, t)?;
    writeln!(out, "matches={}", found.len()).map_err(io)?;
    for it in &found {
        writeln!(out, "{it}").map_err(io)?;
    }
    Ok(EXIT_OK)
}

fn bench_cmd(a: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let text = std::fs::read_to_string(&a.suite)
        .map_err(|e| Error::Parameter(format!("cannot read suite {}: {e}", a.suite.display())))?;
    let suite = parse_suite(&text)?;
    if a.workers == 0 {
        return Err(Error::Parameter("at least one worker is required".into()));
    }
    let opts = BenchOptions {
        strength: a.strength,
        runs: a.runs,
        seed: a.seed,
        params: a.anneal.params(memory_budget()?),
        max_failures: a.anneal.max_retries,
        timeout: timeout(a.timeout)?,
        workers: a.workers,
    };
    opts.params.validate()?;

    let log_path = a.log.clone().or_else(|| {
        a.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".runs.log");
            PathBuf::from(s)
        })
    });
    let mut log_file = match &log_path {
        Some(p) => Some(std::fs::File::create(p)?),
        None => None,
    };
    let log: &mut dyn Write = match log_file.as_mut() {
        Some(f) => f,
        None => err,
    };

    let outcome = run_suite(&suite, &opts, log)?;
    match &a.out {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            write_csv(&outcome.records, &mut f)?;
        }
        None => write_csv(&outcome.records, out)?,
    }
    Ok(if outcome.capacity_errors > 0 {
        EXIT_CAPACITY
    } else {
        EXIT_OK
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("locaray").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn bound_output() {
        let (code, out, _) = run_str(&["bound", "--model", "2^3", "--strength", "2"]);
        assert_eq!(code, 0);
        assert_eq!(out, "low=6 high=9\n");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(
            run_str(&["generate", "--strength", "2", "--out", "x"]).0,
            EXIT_USAGE
        );
        assert_eq!(
            run_str(&["bound", "--model", "2^x", "--strength", "2"]).0,
            EXIT_USAGE
        );
        assert_eq!(
            run_str(&["bound", "--model", "2^3", "--strength", "4"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_str(&[]).0, EXIT_USAGE);
    }

    #[test]
    fn help_is_success() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("generate"));
    }

    #[test]
    fn failing_rows() {
        assert_eq!(parse_failing("4,5,10", 10).unwrap().one_based(), vec![4, 5, 10]);
        assert_eq!(parse_failing("10 5, 4", 10).unwrap().one_based(), vec![4, 5, 10]);
        assert!(parse_failing("", 10).unwrap().is_empty());
        assert!(parse_failing("0", 10).is_err());
        assert!(parse_failing("11", 10).is_err());
        assert!(parse_failing("x", 10).is_err());
    }

    #[test]
    fn timeouts_must_be_positive() {
        assert!(timeout(0.0).is_err());
        assert!(timeout(-1.0).is_err());
        assert!(timeout(f64::NAN).is_err());
        assert_eq!(timeout(1.5).unwrap(), Duration::from_millis(1500));
    }
}
