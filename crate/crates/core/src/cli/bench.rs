//! Repeated construction over a suite of models, summarized as CSV.
//!
//! For each instance, `x` counts runs that completed within the timeout and
//! `y` counts runs that produced at least one locating array. A run that
//! completes has necessarily found an array, so `x <= y <= runs`. Means are
//! taken over the `y` runs; the time of a run is the time at which its final
//! array was found.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use crate::anneal::AnnealParams;
use crate::error::{Error, Result};
use crate::model::SutModel;
use crate::search::{construct, SearchBudget};

pub const CSV_HEADER: [&str; 8] = [
    "name",
    "model",
    "x",
    "y",
    "runs",
    "mean_time_s",
    "mean_rows",
    "min_rows",
];

const LOG_HEADER: [&str; 9] = [
    "name",
    "run",
    "seed",
    "finished",
    "found",
    "rows",
    "time_s",
    "elapsed_s",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub name: String,
    pub model: SutModel,
}

/// Parses `name,model` lines. Blank lines and lines starting with `#` are
/// skipped, as is a literal `name,model` header.
pub fn parse_suite(text: &str) -> Result<Vec<SuiteEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parameter(format!("suite: {e}")))?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.len() != 2 {
            return Err(Error::Parameter(format!(
                "suite line {line}: expected `name,model`, found {} fields",
                record.len()
            )));
        }
        if entries.is_empty() && &record[0] == "name" && &record[1] == "model" {
            continue;
        }
        let model = record[1]
            .parse()
            .map_err(|e| Error::Parameter(format!("suite line {line}: {e}")))?;
        entries.push(SuiteEntry {
            name: record[0].to_string(),
            model,
        });
    }
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub strength: usize,
    pub runs: usize,
    /// Run `i` uses seed `seed + i` (wrapping).
    pub seed: u64,
    pub params: AnnealParams,
    pub max_failures: usize,
    /// Per run.
    pub timeout: Duration,
    /// Runs of one instance executed concurrently.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub name: String,
    pub run: usize,
    pub seed: u64,
    pub finished: bool,
    pub rows: Option<usize>,
    pub time_to_best: Option<Duration>,
    pub elapsed: Duration,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub name: String,
    pub model: String,
    pub x: usize,
    pub y: usize,
    pub runs: usize,
    pub mean_time_s: Option<f64>,
    pub mean_rows: Option<f64>,
    pub min_rows: Option<usize>,
}

impl BenchRecord {
    pub fn summarize(entry: &SuiteEntry, runs: &[RunRecord]) -> Self {
        let found: Vec<&RunRecord> = runs.iter().filter(|r| r.rows.is_some()).collect();
        let y = found.len();
        let mean = |f: &dyn Fn(&RunRecord) -> f64| {
            (y > 0).then(|| found.iter().map(|r| f(r)).sum::<f64>() / y as f64)
        };
        Self {
            name: entry.name.clone(),
            model: entry.model.to_string(),
            x: runs.iter().filter(|r| r.finished).count(),
            y,
            runs: runs.len(),
            mean_time_s: mean(&|r| r.time_to_best.unwrap_or_default().as_secs_f64()),
            mean_rows: mean(&|r| r.rows.unwrap_or_default() as f64),
            min_rows: found.iter().filter_map(|r| r.rows).min(),
        }
    }

    fn fields(&self) -> [String; 8] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        [
            self.name.clone(),
            self.model.clone(),
            self.x.to_string(),
            self.y.to_string(),
            self.runs.to_string(),
            opt(self.mean_time_s.map(|v| format!("{v:.1}"))),
            opt(self.mean_rows.map(|v| format!("{v:.1}"))),
            opt(self.min_rows.map(|v| v.to_string())),
        ]
    }
}

pub fn write_csv(records: &[BenchRecord], w: &mut dyn Write) -> Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    let csv_err = |e: csv::Error| Error::Io(e.into());
    out.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        out.write_record(r.fields()).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub records: Vec<BenchRecord>,
    pub runs: Vec<RunRecord>,
    /// Runs abandoned because the coverage index did not fit the budget.
    pub capacity_errors: usize,
}

fn one_run(entry: &SuiteEntry, run: usize, opts: &BenchOptions) -> Result<RunRecord> {
    let seed = opts.seed.wrapping_add(run as u64);
    let budget = SearchBudget {
        max_failures: opts.max_failures,
        timeout: Some(opts.timeout),
        seed,
        workers: 1,
    };
    let base = RunRecord {
        name: entry.name.clone(),
        run,
        seed,
        finished: false,
        rows: None,
        time_to_best: None,
        elapsed: Duration::ZERO,
        error: None,
    };
    match construct(&entry.model, opts.strength, &opts.params, &budget) {
        Ok(r) => Ok(RunRecord {
            finished: !r.timed_out,
            rows: r.rows(),
            time_to_best: r.time_to_best,
            elapsed: r.elapsed,
            ..base
        }),
        Err(e @ Error::Capacity { .. }) => Ok(RunRecord {
            error: Some(e.to_string()),
            ..base
        }),
        Err(e) => Err(e),
    }
}

fn runs_of(entry: &SuiteEntry, opts: &BenchOptions) -> Result<Vec<RunRecord>> {
    let workers = opts.workers.clamp(1, opts.runs.max(1));
    if workers == 1 {
        return (0..opts.runs).map(|i| one_run(entry, i, opts)).collect();
    }
    let next = AtomicUsize::new(0);
    let mut all: Vec<(usize, Result<RunRecord>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut mine = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= opts.runs {
                            break mine;
                        }
                        mine.push((i, one_run(entry, i, opts)));
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("bench worker panicked"))
            .collect()
    });
    all.sort_by_key(|(i, _)| *i);
    all.into_iter().map(|(_, r)| r).collect()
}

/// Runs every instance of `suite`, logging one line per run to `log`.
pub fn run_suite(suite: &[SuiteEntry], opts: &BenchOptions, log: &mut dyn Write) -> Result<SuiteOutcome> {
    let mut log = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(log);
    let csv_err = |e: csv::Error| Error::Io(e.into());
    log.write_record(LOG_HEADER).map_err(csv_err)?;

    let mut records = Vec::with_capacity(suite.len());
    let mut all_runs = Vec::new();
    let mut capacity_errors = 0;
    for entry in suite {
        let runs = runs_of(entry, opts)?;
        for r in &runs {
            capacity_errors += usize::from(r.error.is_some());
            let secs = |d: Duration| format!("{:.1}", d.as_secs_f64());
            log.write_record([
                r.name.clone(),
                r.run.to_string(),
                r.seed.to_string(),
                r.finished.to_string(),
                r.rows.is_some().to_string(),
                r.rows.map(|v| v.to_string()).unwrap_or_default(),
                r.time_to_best.map(secs).unwrap_or_default(),
                secs(r.elapsed),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        log.flush()?;
        records.push(BenchRecord::summarize(entry, &runs));
        all_runs.extend(runs);
    }
    Ok(SuiteOutcome {
        records,
        runs: all_runs,
        capacity_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    fn opts(runs: usize) -> BenchOptions {
        BenchOptions {
            strength: 2,
            runs,
            seed: 0,
            params: AnnealParams::default(),
            max_failures: 3,
            timeout: Duration::from_secs(60),
            workers: 1,
        }
    }

    fn entry(name: &str, model: &str) -> SuiteEntry {
        SuiteEntry {
            name: name.into(),
            model: parse_model(model).unwrap(),
        }
    }

    #[test]
    fn suite_parsing() {
        let text = "# comment\nname,model\nspin-s, 2^13 4^5\n\n7,2^29 3^1\n";
        let s = parse_suite(text).unwrap();
        assert_eq!(s, vec![entry("spin-s", "2^13 4^5"), entry("7", "2^29 3")]);
        assert!(parse_suite("").unwrap().is_empty());
        assert!(parse_suite("a\n").is_err());
        assert!(parse_suite("a,2^x\n").is_err());
        assert!(parse_suite("a,2,3\n").is_err());
    }

    #[test]
    fn bundled_suite_has_35_instances() {
        let s = parse_suite(include_str!("../../data/pairwise_suite.csv")).unwrap();
        assert_eq!(s.len(), 35);
        assert_eq!(s[3], entry("spin-s", "2^13 4^5"));
        let names: std::collections::HashSet<_> = s.iter().map(|e| &e.name).collect();
        assert_eq!(names.len(), 35);
    }

    #[test]
    fn empty_suite_writes_only_the_header() {
        let out = run_suite(&[], &opts(5), &mut Vec::new()).unwrap();
        let mut csv = Vec::new();
        write_csv(&out.records, &mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "name,model,x,y,runs,mean_time_s,mean_rows,min_rows\n"
        );
    }

    #[test]
    fn small_suite() {
        let mut log = Vec::new();
        let out = run_suite(&[entry("2^3", "2^3")], &opts(5), &mut log).unwrap();
        let r = &out.records[0];
        assert_eq!((r.x, r.y, r.runs, r.min_rows), (5, 5, 5, Some(6)));
        assert_eq!(r.model, "2^3");
        let log = String::from_utf8(log).unwrap();
        assert_eq!(log.lines().count(), 6);
        assert!(log.starts_with("name,run,seed,"));
        let seeds: Vec<u64> = out.runs.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn workers_do_not_change_results() {
        let suite = [entry("a", "2^5")];
        let serial = run_suite(&suite, &opts(4), &mut Vec::new()).unwrap();
        let parallel = run_suite(
            &suite,
            &BenchOptions {
                workers: 3,
                ..opts(4)
            },
            &mut Vec::new(),
        )
        .unwrap();
        let rows = |o: &SuiteOutcome| o.runs.iter().map(|r| (r.seed, r.rows)).collect::<Vec<_>>();
        assert_eq!(rows(&serial), rows(&parallel));
    }

    #[test]
    fn capacity_failures_are_recorded() {
        let o = BenchOptions {
            params: AnnealParams {
                memory_budget: 1,
                ..Default::default()
            },
            ..opts(2)
        };
        let out = run_suite(&[entry("a", "2^4")], &o, &mut Vec::new()).unwrap();
        assert_eq!(out.capacity_errors, 2);
        let r = &out.records[0];
        assert_eq!((r.x, r.y, r.runs, r.min_rows, r.mean_rows), (0, 0, 2, None, None));
        let mut csv = Vec::new();
        write_csv(&out.records, &mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().ends_with("a,2^4,0,0,2,,,\n"));
    }

    #[test]
    fn summary_arithmetic() {
        let run = |rows: Option<usize>, finished, secs| RunRecord {
            name: "n".into(),
            run: 0,
            seed: 0,
            finished,
            rows,
            time_to_best: rows.map(|_| Duration::from_secs_f64(secs)),
            elapsed: Duration::from_secs(9),
            error: None,
        };
        let runs = [
            run(Some(10), true, 1.0),
            run(Some(12), false, 2.0),
            run(None, false, 0.0),
        ];
        let r = BenchRecord::summarize(&entry("n", "2^3"), &runs);
        assert_eq!((r.x, r.y, r.runs, r.min_rows), (1, 2, 3, Some(10)));
        assert_eq!(r.mean_rows, Some(11.0));
        assert_eq!(r.mean_time_s, Some(1.5));
    }
}
