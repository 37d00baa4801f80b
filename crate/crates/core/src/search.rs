//! Row-count bounds, binary search over the row count, and the two-phase
//! construction driver.
//!
//! Every annealing run draws its own generator from the root seed:
//! ChaCha8 keyed by `seed_from_u64(root)`, on stream
//! `(worker << 32) | counter`, where `counter` numbers the runs of one worker
//! from zero. A single-worker search is therefore fully reproducible.

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use web_time::Instant;

use crate::anneal::{sa_run, AnnealParams, Deadline, SaOutcome};
use crate::error::{Error, Result};
use crate::model::{binomial, SutModel, TestArray};

/// Lower bound on the rows of a `(1̄, t)`-locating array with `k` factors of
/// `v` values each:
///
/// ```text
/// min { ⌈2·C·v^t / (1 + C)⌉,  ⌈−3/2 − C + √(C² + (3 + 6·v^t)·C + 9/4)⌉ },  C = C(k, t)
/// ```
///
/// Evaluated in exact integer arithmetic. The second term equals
/// `⌈(√D − 3 − 2C) / 2⌉` with `D = 4C² + (12 + 24·v^t)·C + 9`; since
/// `D ≥ (2C + 3)²` the numerator is non-negative.
pub fn tang_lower_bound(k: u64, t: u64, v: u64) -> Result<u64> {
    if t == 0 || t > k {
        return Err(Error::Strength {
            t: t as usize,
            k: k as usize,
        });
    }
    if v < 2 {
        return Err(Error::Parameter(format!(
            "domain size must be at least 2, got {v}"
        )));
    }
    let overflow = || Error::Overflow("the locating-array lower bound");
    let c = binomial(k, t).ok_or_else(overflow)? as u128;
    let vt = u32::try_from(t)
        .ok()
        .and_then(|t| (v as u128).checked_pow(t))
        .ok_or_else(overflow)?;

    let first = (2 * c).checked_mul(vt).ok_or_else(overflow)?.div_ceil(1 + c);

    let d = 4u128
        .checked_mul(c)
        .and_then(|x| x.checked_mul(c))
        .and_then(|x| {
            let lin = vt.checked_mul(24)?.checked_add(12)?.checked_mul(c)?;
            x.checked_add(lin)?.checked_add(9)
        })
        .ok_or_else(overflow)?;
    let s = d.isqrt();
    let n = s - 3 - 2 * c;
    let second = if s * s == d { n.div_ceil(2) } else { n / 2 + 1 };

    u64::try_from(first.min(second)).map_err(|_| overflow())
}

/// Initial `(low, high)` row bounds: the lower bound evaluated at the
/// smallest domain size, and at the largest domain size plus one. The upper
/// value is a heuristic and may undershoot the true optimum.
pub fn initial_bounds(model: &SutModel, t: usize) -> Result<(usize, usize)> {
    let k = model.factors() as u64;
    let low = tang_lower_bound(k, t as u64, model.min_domain() as u64)?;
    let high = tang_lower_bound(k, t as u64, model.max_domain() as u64 + 1)?;
    let conv = |x: u64| usize::try_from(x).map_err(|_| Error::Overflow("row bounds"));
    Ok((conv(low)?, conv(high)?))
}

/// Limits for one construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBudget {
    /// Consecutive failed runs tolerated at one size in the shrinking phase.
    pub max_failures: usize,
    /// Wall-clock limit for the whole construction; `None` for no limit.
    pub timeout: Option<Duration>,
    pub seed: u64,
    /// Independent searches run in parallel; the smallest result wins.
    pub workers: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_failures: 3,
            timeout: Some(Duration::from_secs(3600)),
            seed: 0,
            workers: 1,
        }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_failures == 0 {
            return Err(Error::Parameter("max retries must be at least 1".into()));
        }
        if self.timeout == Some(Duration::ZERO) {
            return Err(Error::Parameter("timeout must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Parameter("at least one worker is required".into()));
        }
        Ok(())
    }
}

/// The generator for run `counter` of `worker` under root seed `root`.
pub fn child_rng(root: u64, worker: u32, counter: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream((u64::from(worker) << 32) | u64::from(counter));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Binary search, repeated until an array is found.
    Binary,
    /// Shrinking one row at a time.
    Shrink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Found,
    Failed,
    TimedOut,
}

/// One annealing run of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub size: usize,
    pub phase: Phase,
    pub outcome: ProbeKind,
    /// Time since the search started, measured when the run ended.
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Smallest locating array found, if any.
    pub array: Option<TestArray>,
    pub history: Vec<Probe>,
    pub timed_out: bool,
    pub bounds: (usize, usize),
    pub elapsed: Duration,
    /// Time at which `array` was found.
    pub time_to_best: Option<Duration>,
    /// Worker that produced this result.
    pub worker: usize,
}

impl SearchResult {
    pub fn rows(&self) -> Option<usize> {
        self.array.as_ref().map(TestArray::num_rows)
    }
}

/// Result of one binary search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryOutcome {
    pub best: Option<TestArray>,
    pub timed_out: bool,
}

/// Binary search over `[low, high]` with an arbitrary size probe.
///
/// Probes `⌊(low + high) / 2⌋`; success lowers `high` below the probed size
/// and keeps the array, failure raises `low` above it. Stops when the range
/// is empty or a probe times out.
pub fn binary_search_with<F>(mut low: usize, mut high: usize, mut probe: F) -> Result<BinaryOutcome>
where
    F: FnMut(usize) -> Result<SaOutcome>,
{
    let mut best = None;
    while low <= high {
        let size = low + (high - low) / 2;
        match probe(size)? {
            SaOutcome::Found(a) => {
                best = Some(a);
                if size == 0 {
                    break;
                }
                high = size - 1;
            }
            SaOutcome::Exhausted => low = size + 1,
            SaOutcome::TimedOut => {
                return Ok(BinaryOutcome {
                    best,
                    timed_out: true,
                })
            }
        }
    }
    Ok(BinaryOutcome {
        best,
        timed_out: false,
    })
}

/// Binary search over `[low, high]` with annealing runs seeded from `seed`.
pub fn binary_search(
    low: usize,
    high: usize,
    model: &SutModel,
    t: usize,
    params: &AnnealParams,
    seed: u64,
    deadline: Deadline,
) -> Result<BinaryOutcome> {
    let mut counter = 0u32;
    binary_search_with(low, high, |size| {
        let mut rng = child_rng(seed, 0, counter);
        counter += 1;
        Ok(sa_run(model, t, size, params, &mut rng, deadline)?.outcome)
    })
}

/// Best array from [`two_phase`] and whether the deadline cut it short.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseOutcome {
    pub best: Option<TestArray>,
    pub timed_out: bool,
}

/// The two-phase driver over an arbitrary probe.
///
/// Phase 1 repeats binary search over `[low, high]` until it yields an
/// array. After a binary search in which every probe failed, `high` is
/// doubled (and raised to at least `low`) before the next attempt, since the
/// initial upper bound is only a heuristic.
///
/// Phase 2 probes one row fewer than the best array so far, moving down a
/// row after each success and stopping after `max_failures` consecutive
/// failures at one size or when the size would drop below `low`.
pub fn two_phase<F>(
    low: usize,
    mut high: usize,
    max_failures: usize,
    deadline: Deadline,
    mut probe: F,
) -> Result<PhaseOutcome>
where
    F: FnMut(usize, Phase) -> Result<SaOutcome>,
{
    let timed_out = |best| {
        Ok(PhaseOutcome {
            best,
            timed_out: true,
        })
    };

    let mut best = loop {
        if deadline.expired() {
            return timed_out(None);
        }
        let round = binary_search_with(low, high, |size| probe(size, Phase::Binary))?;
        if round.timed_out && round.best.is_none() {
            return timed_out(None);
        }
        if let Some(a) = round.best {
            if round.timed_out {
                return timed_out(Some(a));
            }
            break a;
        }
        high = high.saturating_mul(2).max(low);
    };

    let mut failures = 0;
    let mut size = best.num_rows().saturating_sub(1);
    while failures < max_failures && size >= low && size > 0 {
        if deadline.expired() {
            return timed_out(Some(best));
        }
        match probe(size, Phase::Shrink)? {
            SaOutcome::Found(a) => {
                best = a;
                failures = 0;
                size -= 1;
            }
            SaOutcome::Exhausted => failures += 1,
            SaOutcome::TimedOut => return timed_out(Some(best)),
        }
    }
    Ok(PhaseOutcome {
        best: Some(best),
        timed_out: false,
    })
}

/// Builds a small `(1̄, t)`-locating array for `model`.
///
/// With more than one worker, independent searches run on separate threads
/// and the smallest array wins, ties going to the lowest worker index.
pub fn construct(
    model: &SutModel,
    t: usize,
    params: &AnnealParams,
    budget: &SearchBudget,
) -> Result<SearchResult> {
    params.validate()?;
    budget.validate()?;
    if t == 0 || t > model.factors() {
        return Err(Error::Strength {
            t,
            k: model.factors(),
        });
    }
    let deadline = Deadline::from_timeout(budget.timeout);
    if budget.workers == 1 {
        return construct_worker(model, t, params, budget.seed, 0, budget.max_failures, deadline);
    }

    let results: Vec<Result<SearchResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..budget.workers)
            .map(|w| {
                scope.spawn(move || {
                    construct_worker(model, t, params, budget.seed, w, budget.max_failures, deadline)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("search worker panicked"))
            .collect()
    });

    let mut winner: Option<SearchResult> = None;
    for r in results {
        let r = r?;
        let better = match (&winner, r.rows()) {
            (None, _) => true,
            (Some(w), Some(rows)) => w.rows().is_none_or(|best| rows < best),
            (Some(_), None) => false,
        };
        if better {
            winner = Some(r);
        }
    }
    Ok(winner.expect("at least one worker"))
}

fn construct_worker(
    model: &SutModel,
    t: usize,
    params: &AnnealParams,
    seed: u64,
    worker: usize,
    max_failures: usize,
    deadline: Deadline,
) -> Result<SearchResult> {
    let start = Instant::now();
    let (low, high) = initial_bounds(model, t)?;
    let worker_id = u32::try_from(worker).map_err(|_| Error::Parameter("too many workers".into()))?;

    let mut history = Vec::new();
    let mut counter = 0u32;
    let mut time_to_best = None;
    let outcome = two_phase(low.max(1), high, max_failures, deadline, |size, phase| {
        let mut rng = child_rng(seed, worker_id, counter);
        counter = counter.wrapping_add(1);
        let run = sa_run(model, t, size, params, &mut rng, deadline)?;
        let elapsed = start.elapsed();
        let outcome = match run.outcome {
            SaOutcome::Found(_) => {
                time_to_best = Some(elapsed);
                ProbeKind::Found
            }
            SaOutcome::Exhausted => ProbeKind::Failed,
            SaOutcome::TimedOut => ProbeKind::TimedOut,
        };
        history.push(Probe {
            size,
            phase,
            outcome,
            elapsed,
        });
        Ok(run.outcome)
    })?;

    // A binary search can find a smaller array before a larger one; the time
    // that matters is that of the array we kept.
    let time_to_best = outcome.best.as_ref().and(time_to_best).map(|_| {
        let rows = outcome.best.as_ref().map(TestArray::num_rows);
        history
            .iter()
            .rev()
            .find(|p| p.outcome == ProbeKind::Found && Some(p.size) == rows)
            .map_or(Duration::ZERO, |p| p.elapsed)
    });

    Ok(SearchResult {
        array: outcome.best,
        history,
        timed_out: outcome.timed_out,
        bounds: (low, high),
        elapsed: start.elapsed(),
        time_to_best,
        worker,
    })
}
