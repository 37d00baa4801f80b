//! Incremental coverage index behind the annealing cost `weight * f1 + f2`.
//!
//! `f1` counts uncovered interactions. `f2` counts interactions whose nonempty
//! covering row set is shared with at least one other interaction; pairs of
//! uncovered interactions are left to `f1`.
//!
//! Row sets are fixed-width bit vectors with a Zobrist hash (XOR of per-row
//! random keys) maintained alongside, so toggling one row updates the hash in
//! O(1). Interactions are bucketed by hash; group membership is always
//! confirmed by comparing the bit vectors.

use std::mem;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::model::{Interaction, InteractionCatalog, RowSet, TestArray};

/// Default cap on the memory used by one index.
pub const DEFAULT_MEMORY_BUDGET: u64 = 512 * 1024 * 1024;

const ROW_KEY_SEED: u64 = 0x6c6f_6361_7261_7931;

/// A change to one row of an array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    /// Replace entry `(row, factor)` with a different `value`.
    SetEntry { row: usize, factor: usize, value: u32 },
    /// Set the factors named by `interaction` to its values; other entries of
    /// the row stay as they are.
    OverwriteRow { row: usize, interaction: Interaction },
}

impl Move {
    pub fn row(&self) -> usize {
        match *self {
            Move::SetEntry { row, .. } | Move::OverwriteRow { row, .. } => row,
        }
    }
}

/// Record of an applied move, sufficient to undo it.
#[derive(Debug, Clone)]
pub struct AppliedMove {
    row: usize,
    /// `(factor, previous value)` in application order.
    previous: SmallVec<[(usize, u32); 4]>,
    f1_delta: i64,
    f2_delta: i64,
}

impl AppliedMove {
    /// `f(after) - f(before)` under `weight`.
    pub fn delta(&self, weight: f64) -> f64 {
        weight * self.f1_delta as f64 + self.f2_delta as f64
    }

    pub fn f1_delta(&self) -> i64 {
        self.f1_delta
    }

    pub fn f2_delta(&self) -> i64 {
        self.f2_delta
    }

    /// Number of array entries the move changed.
    pub fn changed_entries(&self) -> usize {
        self.previous.len()
    }
}

/// Set of interaction ids with O(1) insert, remove and uniform indexing.
#[derive(Debug, Clone)]
struct IndexedSet {
    members: Vec<u32>,
    slot: Vec<u32>,
}

impl IndexedSet {
    const ABSENT: u32 = u32::MAX;

    fn new(universe: usize) -> Self {
        Self {
            members: Vec::new(),
            slot: vec![Self::ABSENT; universe],
        }
    }

    fn insert(&mut self, id: u32) {
        if self.slot[id as usize] == Self::ABSENT {
            self.slot[id as usize] = self.members.len() as u32;
            self.members.push(id);
        }
    }

    fn remove(&mut self, id: u32) {
        let s = self.slot[id as usize];
        if s != Self::ABSENT {
            let last = *self.members.last().unwrap();
            self.members.swap_remove(s as usize);
            if last != id {
                self.slot[last as usize] = s;
            }
            self.slot[id as usize] = Self::ABSENT;
        }
    }

    fn sorted(&self) -> Vec<u32> {
        let mut v = self.members.clone();
        v.sort_unstable();
        v
    }
}

/// Covering row sets of every interaction in `I_t` for one array, with the
/// bookkeeping needed for `f1`, `f2` and neighbor selection.
///
/// The index owns the array so the two cannot drift apart.
#[derive(Debug, Clone)]
pub struct CoverageIndex {
    array: TestArray,
    catalog: InteractionCatalog,
    /// For factor `j`, `by_factor[factor_start[j]..factor_start[j + 1]]` lists
    /// `(combination, position of j in it)`.
    factor_start: Vec<usize>,
    by_factor: Vec<(u32, u32)>,
    words: usize,
    bits: Vec<u64>,
    card: Vec<u32>,
    hash: Vec<u64>,
    row_keys: Vec<u64>,
    groups: FxHashMap<u64, SmallVec<[u32; 4]>>,
    uncovered: IndexedSet,
    colliding: IndexedSet,
    f1: usize,
    f2: usize,
    scratch: Vec<(u32, u32)>,
}

fn same_rows(bits: &[u64], words: usize, a: u32, b: u32) -> bool {
    let (a, b) = (a as usize * words, b as usize * words);
    bits[a..a + words] == bits[b..b + words]
}

/// Approximate bytes needed by an index, used for the memory budget.
pub fn estimated_index_bytes(interactions: u64, combinations: u64, t: u64, rows: u64) -> Option<u64> {
    let words = rows.div_ceil(64).max(1);
    // bits + card + hash + two set slots + hash-map share
    let per_interaction = 8 * words + 4 + 8 + 4 + 4 + 24;
    let per_combination = 8 + t * (4 + 8 + 8);
    interactions
        .checked_mul(per_interaction)?
        .checked_add(combinations.checked_mul(per_combination)?)
}

impl CoverageIndex {
    pub fn build(array: TestArray, t: usize) -> Result<Self> {
        Self::build_with_budget(array, t, DEFAULT_MEMORY_BUDGET)
    }

    /// Builds the index, failing with [`Error::Capacity`] when the estimated
    /// size exceeds `budget` bytes.
    pub fn build_with_budget(array: TestArray, t: usize, budget: u64) -> Result<Self> {
        let model = array.model().clone();
        let k = model.factors();
        if t == 0 || t > k {
            return Err(Error::Strength { t, k });
        }
        let interactions = model
            .interaction_count(t)
            .ok_or(Error::Overflow("the number of interactions"))?;
        let combinations = model
            .combination_count(t)
            .ok_or(Error::Overflow("the number of factor combinations"))?;
        let m = array.num_rows();
        let required =
            estimated_index_bytes(interactions, combinations, t as u64, m as u64).unwrap_or(u64::MAX);
        if required > budget || interactions >= u32::MAX as u64 {
            return Err(Error::Capacity {
                interactions,
                required,
                budget,
            });
        }

        let catalog = InteractionCatalog::new(&model, t)?;
        let n = catalog.len();

        let mut lists: Vec<Vec<(u32, u32)>> = vec![Vec::new(); k];
        for c in 0..catalog.num_combinations() {
            for (p, &j) in catalog.combination(c).iter().enumerate() {
                lists[j as usize].push((c as u32, p as u32));
            }
        }
        let mut factor_start = Vec::with_capacity(k + 1);
        let mut by_factor = Vec::new();
        for l in lists {
            factor_start.push(by_factor.len());
            by_factor.extend(l);
        }
        factor_start.push(by_factor.len());

        let mut key_rng = ChaCha8Rng::seed_from_u64(ROW_KEY_SEED);
        let row_keys: Vec<u64> = (0..m).map(|_| key_rng.next_u64()).collect();

        let words = m.div_ceil(64).max(1);
        let mut index = Self {
            catalog,
            factor_start,
            by_factor,
            words,
            bits: vec![0; n * words],
            card: vec![0; n],
            hash: vec![0; n],
            row_keys,
            groups: FxHashMap::default(),
            uncovered: IndexedSet::new(n),
            colliding: IndexedSet::new(n),
            f1: 0,
            f2: 0,
            scratch: Vec::new(),
            array,
        };

        for i in 0..m {
            let row = index.array.row(i);
            for c in 0..index.catalog.num_combinations() {
                let id = index.catalog.index_in_row(c, row);
                index.bits[id * words + i / 64] |= 1 << (i % 64);
                index.card[id] += 1;
                index.hash[id] ^= index.row_keys[i];
            }
        }
        for id in 0..n as u32 {
            index.attach(id);
        }
        Ok(index)
    }

    pub fn array(&self) -> &TestArray {
        &self.array
    }

    pub fn into_array(self) -> TestArray {
        self.array
    }

    pub fn catalog(&self) -> &InteractionCatalog {
        &self.catalog
    }

    pub fn strength(&self) -> usize {
        self.catalog.strength()
    }

    /// Number of uncovered interactions.
    pub fn f1(&self) -> usize {
        self.f1
    }

    /// Number of interactions sharing a nonempty row set with another one.
    pub fn f2(&self) -> usize {
        self.f2
    }

    pub fn cost(&self, weight: f64) -> f64 {
        weight * self.f1 as f64 + self.f2 as f64
    }

    /// `f1 = f2 = 0`, i.e. the array is `(1̄, t)`-locating.
    pub fn is_locating(&self) -> bool {
        self.f1 == 0 && self.f2 == 0
    }

    /// `ρ(T)` for the interaction with catalog index `id`.
    pub fn rows_of(&self, id: usize) -> RowSet {
        let w = &self.bits[id * self.words..(id + 1) * self.words];
        let rows = (0..self.array.num_rows())
            .filter(|&i| w[i / 64] >> (i % 64) & 1 == 1)
            .collect();
        RowSet::new(rows)
    }

    /// `|ρ(T)|` for the interaction with catalog index `id`.
    pub fn row_count_of(&self, id: usize) -> usize {
        self.card[id] as usize
    }

    pub fn covers(&self, id: usize, row: usize) -> bool {
        self.bits[id * self.words + row / 64] >> (row % 64) & 1 == 1
    }

    pub fn uncovered_len(&self) -> usize {
        self.uncovered.members.len()
    }

    /// The `n`-th uncovered interaction id, in an arbitrary but deterministic order.
    pub fn uncovered_at(&self, n: usize) -> usize {
        self.uncovered.members[n] as usize
    }

    pub fn colliding_len(&self) -> usize {
        self.colliding.members.len()
    }

    /// The `n`-th colliding interaction id, in an arbitrary but deterministic order.
    pub fn colliding_at(&self, n: usize) -> usize {
        self.colliding.members[n] as usize
    }

    /// The `n`-th (0-based, increasing) row covering interaction `id`.
    pub fn nth_covering_row(&self, id: usize, n: usize) -> Option<usize> {
        let w = &self.bits[id * self.words..(id + 1) * self.words];
        nth_set_bit(w.iter().copied(), n)
    }

    /// The `n`-th (0-based, increasing) row not covering interaction `id`.
    pub fn nth_noncovering_row(&self, id: usize, n: usize) -> Option<usize> {
        let m = self.array.num_rows();
        let w = &self.bits[id * self.words..(id + 1) * self.words];
        let inverted = w.iter().enumerate().map(|(x, &word)| {
            let valid = match m.saturating_sub(x * 64) {
                r if r >= 64 => u64::MAX,
                r => (1u64 << r) - 1,
            };
            !word & valid
        });
        nth_set_bit(inverted, n)
    }

    /// Applies `mv`, keeping array and index consistent.
    pub fn apply(&mut self, mv: &Move) -> Result<AppliedMove> {
        let m = self.array.num_rows();
        let row = mv.row();
        if row >= m {
            return Err(Error::InvalidMove(format!("row {row} of {m}")));
        }
        let (f1, f2) = (self.f1 as i64, self.f2 as i64);
        let mut previous = SmallVec::new();
        match mv {
            &Move::SetEntry { factor, value, .. } => {
                let model = self.array.model();
                if factor >= model.factors() || value >= model.domain(factor) {
                    return Err(Error::InvalidMove(format!(
                        "entry ({row}, {factor}) cannot take value {value}"
                    )));
                }
                let old = self.array.get(row, factor);
                if old == value {
                    return Err(Error::InvalidMove(format!(
                        "entry ({row}, {factor}) already holds {value}"
                    )));
                }
                previous.push((factor, old));
                self.set_entry(row, factor, value);
            }
            Move::OverwriteRow { interaction, .. } => {
                if !interaction.fits(self.array.model()) {
                    return Err(Error::InvalidMove(format!(
                        "interaction {interaction} does not fit the model"
                    )));
                }
                for &(factor, value) in interaction.pairs() {
                    let old = self.array.get(row, factor);
                    if old != value {
                        previous.push((factor, old));
                        self.set_entry(row, factor, value);
                    }
                }
            }
        }
        Ok(AppliedMove {
            row,
            previous,
            f1_delta: self.f1 as i64 - f1,
            f2_delta: self.f2 as i64 - f2,
        })
    }

    /// Reverts a move returned by the most recent [`apply`](Self::apply).
    pub fn undo(&mut self, applied: AppliedMove) {
        for &(factor, old) in applied.previous.iter().rev() {
            self.set_entry(applied.row, factor, old);
        }
    }

    /// True when every counter, row set and membership set equals that of an
    /// index rebuilt from scratch on the current array.
    pub fn matches_rebuild(&self) -> bool {
        let Ok(fresh) = Self::build_with_budget(self.array.clone(), self.strength(), u64::MAX) else {
            return false;
        };
        self.f1 == fresh.f1
            && self.f2 == fresh.f2
            && self.bits == fresh.bits
            && self.card == fresh.card
            && self.hash == fresh.hash
            && self.uncovered.sorted() == fresh.uncovered.sorted()
            && self.colliding.sorted() == fresh.colliding.sorted()
    }

    fn set_entry(&mut self, i: usize, j: usize, value: u32) {
        let old = self.array.get(i, j);
        let mut pairs = mem::take(&mut self.scratch);
        pairs.clear();
        let row = self.array.row(i);
        for &(c, p) in &self.by_factor[self.factor_start[j]..self.factor_start[j + 1]] {
            let (c, p) = (c as usize, p as usize);
            let stride = self.catalog.strides(c)[p];
            let old_id = self.catalog.index_in_row(c, row) as u64;
            let new_id = old_id - old as u64 * stride + value as u64 * stride;
            pairs.push((old_id as u32, new_id as u32));
        }
        for &(old_id, new_id) in &pairs {
            self.toggle(old_id, i);
            self.toggle(new_id, i);
        }
        self.scratch = pairs;
        self.array.set(i, j, value);
    }

    /// Flips membership of row `i` in the row set of `id`.
    fn toggle(&mut self, id: u32, i: usize) {
        self.detach(id);
        let u = id as usize;
        let bit = 1u64 << (i % 64);
        let w = &mut self.bits[u * self.words + i / 64];
        *w ^= bit;
        if *w & bit != 0 {
            self.card[u] += 1;
        } else {
            self.card[u] -= 1;
        }
        self.hash[u] ^= self.row_keys[i];
        self.attach(id);
    }

    /// Removes `id` from its group, updating `f1`/`f2` and the member sets.
    fn detach(&mut self, id: u32) {
        let u = id as usize;
        if self.card[u] == 0 {
            self.uncovered.remove(id);
            self.f1 -= 1;
            return;
        }
        let h = self.hash[u];
        let bucket = self.groups.get_mut(&h).expect("covered interaction has a bucket");
        let at = bucket
            .iter()
            .position(|&x| x == id)
            .expect("member of its bucket");
        bucket.swap_remove(at);
        let mut equal = 0;
        let mut other = 0;
        for &x in bucket.iter() {
            if same_rows(&self.bits, self.words, x, id) {
                equal += 1;
                other = x;
            }
        }
        if bucket.is_empty() {
            self.groups.remove(&h);
        }
        match equal {
            0 => {}
            1 => {
                self.f2 -= 2;
                self.colliding.remove(id);
                self.colliding.remove(other);
            }
            _ => {
                self.f2 -= 1;
                self.colliding.remove(id);
            }
        }
    }

    /// Inserts `id` into the group matching its current row set.
    fn attach(&mut self, id: u32) {
        let u = id as usize;
        if self.card[u] == 0 {
            self.uncovered.insert(id);
            self.f1 += 1;
            return;
        }
        let bucket = self.groups.entry(self.hash[u]).or_default();
        let mut equal = 0;
        let mut other = 0;
        for &x in bucket.iter() {
            if same_rows(&self.bits, self.words, x, id) {
                equal += 1;
                other = x;
            }
        }
        bucket.push(id);
        match equal {
            0 => {}
            1 => {
                self.f2 += 2;
                self.colliding.insert(id);
                self.colliding.insert(other);
            }
            _ => {
                self.f2 += 1;
                self.colliding.insert(id);
            }
        }
    }
}

fn nth_set_bit(words: impl Iterator<Item = u64>, mut n: usize) -> Option<usize> {
    for (x, mut w) in words.enumerate() {
        let ones = w.count_ones() as usize;
        if n >= ones {
            n -= ones;
            continue;
        }
        for _ in 0..n {
            w &= w - 1;
        }
        return Some(x * 64 + w.trailing_zeros() as usize);
    }
    None
}
