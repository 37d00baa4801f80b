//! Simulated annealing for a locating array with a fixed number of rows.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rand::Rng;
use web_time::Instant;

use crate::cost::{CoverageIndex, Move, DEFAULT_MEMORY_BUDGET};
use crate::error::{Error, Result};
use crate::model::{random_array, Interaction, SutModel, TestArray};

/// Neighbor-selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Change one uniformly chosen entry to a different value.
    Baseline,
    /// Target an uncovered or colliding interaction directly.
    #[default]
    Proposed,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Baseline => "baseline",
            Strategy::Proposed => "proposed",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Strategy::Baseline),
            "proposed" => Ok(Strategy::Proposed),
            other => Err(Error::Parameter(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealParams {
    /// Multiplier of the uncovered-interaction count in the cost.
    pub weight: f64,
    /// Initial temperature.
    pub t_init: f64,
    /// Iteration cap per run.
    pub k_max: usize,
    /// Geometric cooling rate, in `(0, 1)`.
    pub cooling: f64,
    pub strategy: Strategy,
    /// Memory cap for the coverage index, in bytes.
    pub memory_budget: u64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            weight: 4.0,
            t_init: 0.5,
            k_max: 2048,
            cooling: 0.999,
            strategy: Strategy::Proposed,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::Parameter(s));
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return bad(format!(
                "weight must be a non-negative number, got {}",
                self.weight
            ));
        }
        if !(self.t_init > 0.0 && self.t_init.is_finite()) {
            return bad(format!(
                "initial temperature must be positive, got {}",
                self.t_init
            ));
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return bad(format!("cooling rate must lie in (0, 1), got {}", self.cooling));
        }
        Ok(())
    }
}

/// Wall-clock cut-off shared by a whole search.
#[derive(Debug, Clone, Copy, Default)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Self(None)
    }

    pub fn after(budget: Duration) -> Self {
        Self(Some(Instant::now() + budget))
    }

    pub fn from_timeout(timeout: Option<Duration>) -> Self {
        timeout.map_or(Self::none(), Self::after)
    }

    pub fn expired(&self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }
}

/// Geometric temperature schedule `t_init * r^i`.
#[derive(Debug, Clone, Copy)]
pub struct Cooling {
    temperature: f64,
    rate: f64,
}

impl Cooling {
    pub fn new(t_init: f64, rate: f64) -> Self {
        Self {
            temperature: t_init,
            rate,
        }
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn step(&mut self) {
        self.temperature *= self.rate;
    }
}

/// Metropolis acceptance: always take non-worsening moves, otherwise accept
/// with probability `exp(-delta / temperature)`. The RNG is only consulted
/// for worsening moves.
pub fn accept<R: Rng + ?Sized>(delta: f64, temperature: f64, rng: &mut R) -> bool {
    delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp()
}

fn other_value<R: Rng + ?Sized>(domain: u32, current: u32, rng: &mut R) -> u32 {
    let v = rng.random_range(0..domain - 1);
    if v >= current {
        v + 1
    } else {
        v
    }
}

/// A uniformly random entry set to a uniformly random different value.
pub fn select_neighbor_baseline<R: Rng + ?Sized>(array: &TestArray, rng: &mut R) -> Result<Move> {
    let m = array.num_rows();
    if m == 0 {
        return Err(Error::NoNeighbor);
    }
    let row = rng.random_range(0..m);
    let factor = rng.random_range(0..array.num_factors());
    let value = other_value(array.model().domain(factor), array.get(row, factor), rng);
    Ok(Move::SetEntry { row, factor, value })
}

/// A move aimed at an uncovered interaction if there is one, otherwise at a
/// colliding interaction.
///
/// Uncovered `T`: overwrite a random row with `T`. Colliding `T` (chosen
/// uniformly among colliding interactions): when `|ρ(T)| > 1`, on a fair coin
/// alter one of `T`'s factors in a row of `ρ(T)`; otherwise overwrite a row
/// outside `ρ(T)` with `T`. If every row covers `T` the alteration is used.
pub fn select_neighbor_proposed<R: Rng + ?Sized>(index: &CoverageIndex, rng: &mut R) -> Result<Move> {
    let array = index.array();
    let m = array.num_rows();
    if m == 0 {
        return Err(Error::NoNeighbor);
    }
    let catalog = index.catalog();

    if index.uncovered_len() > 0 {
        let id = index.uncovered_at(rng.random_range(0..index.uncovered_len()));
        let row = rng.random_range(0..m);
        return Ok(Move::OverwriteRow {
            row,
            interaction: catalog.interaction(id),
        });
    }
    if index.colliding_len() == 0 {
        return Err(Error::AlreadyLocating);
    }

    let id = index.colliding_at(rng.random_range(0..index.colliding_len()));
    let covered = index.row_count_of(id);
    let alter = covered == m || (covered > 1 && rng.random_bool(0.5));
    let interaction: Interaction = catalog.interaction(id);
    if alter {
        let row = index
            .nth_covering_row(id, rng.random_range(0..covered))
            .expect("row within ρ(T)");
        let (factor, _) = interaction.pairs()[rng.random_range(0..interaction.strength())];
        let value = other_value(array.model().domain(factor), array.get(row, factor), rng);
        Ok(Move::SetEntry { row, factor, value })
    } else {
        let row = index
            .nth_noncovering_row(id, rng.random_range(0..m - covered))
            .expect("row outside ρ(T)");
        Ok(Move::OverwriteRow { row, interaction })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SaOutcome {
    /// A `(1̄, t)`-locating array of the requested size.
    Found(TestArray),
    /// The iteration cap was reached without success.
    Exhausted,
    /// The deadline passed first.
    TimedOut,
}

impl SaOutcome {
    pub fn array(&self) -> Option<&TestArray> {
        match self {
            SaOutcome::Found(a) => Some(a),
            _ => None,
        }
    }
}

/// Summary of one annealing run.
#[derive(Debug, Clone, PartialEq)]
pub struct SaRun {
    pub outcome: SaOutcome,
    /// Neighbors evaluated.
    pub iterations: usize,
    /// Cost of the current array when the run ended.
    pub final_cost: f64,
}

/// Searches for an `m`-row `(1̄, t)`-locating array.
///
/// Starts from a random array; each iteration draws a neighbor, returns it
/// at once if it is locating, and otherwise accepts or rejects it by the
/// Metropolis rule under a geometrically cooling temperature. A random initial
/// array that already happens to be locating is returned immediately.
pub fn sa_run<R: Rng + ?Sized>(
    model: &SutModel,
    t: usize,
    m: usize,
    params: &AnnealParams,
    rng: &mut R,
    deadline: Deadline,
) -> Result<SaRun> {
    params.validate()?;
    let array = random_array(model, m, rng);
    let mut index = CoverageIndex::build_with_budget(array, t, params.memory_budget)?;
    let finish = |outcome, iterations, index: &CoverageIndex| SaRun {
        outcome,
        iterations,
        final_cost: index.cost(params.weight),
    };

    if index.is_locating() {
        let cost = index.cost(params.weight);
        return Ok(SaRun {
            outcome: SaOutcome::Found(index.into_array()),
            iterations: 0,
            final_cost: cost,
        });
    }
    if m == 0 {
        return Ok(finish(SaOutcome::Exhausted, 0, &index));
    }

    let mut cooling = Cooling::new(params.t_init, params.cooling);
    for i in 0..params.k_max {
        if deadline.expired() {
            return Ok(finish(SaOutcome::TimedOut, i, &index));
        }
        let mv = match params.strategy {
            Strategy::Baseline => select_neighbor_baseline(index.array(), rng)?,
            Strategy::Proposed => select_neighbor_proposed(&index, rng)?,
        };
        let applied = index.apply(&mv)?;
        if index.is_locating() {
            return Ok(SaRun {
                outcome: SaOutcome::Found(index.into_array()),
                iterations: i + 1,
                final_cost: 0.0,
            });
        }
        if !accept(applied.delta(params.weight), cooling.temperature(), rng) {
            index.undo(applied);
        }
        cooling.step();
    }
    Ok(finish(SaOutcome::Exhausted, params.k_max, &index))
}
