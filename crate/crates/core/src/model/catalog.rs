use crate::error::{Error, Result};

use super::{Interaction, SutModel};

/// Dense numbering of `I_t`, the interactions of one strength.
///
/// Factor sets (combinations) are listed in lexicographic order; within a
/// combination, value tuples are numbered in mixed radix with the first factor
/// most significant. Index order is therefore the canonical interaction order.
#[derive(Debug, Clone)]
pub struct InteractionCatalog {
    model: SutModel,
    t: usize,
    /// `t` factor indices per combination.
    factors: Vec<u32>,
    /// `t` mixed-radix strides per combination, parallel to `factors`.
    strides: Vec<u64>,
    /// First interaction index of each combination, plus a final sentinel.
    offsets: Vec<u64>,
}

/// Enumerates `I_t` for `model` in canonical order.
pub fn enumerate_interactions(model: &SutModel, t: usize) -> Result<InteractionCatalog> {
    InteractionCatalog::new(model, t)
}

impl InteractionCatalog {
    pub fn new(model: &SutModel, t: usize) -> Result<Self> {
        let k = model.factors();
        if t > k {
            return Err(Error::Strength { t, k });
        }
        let combos = model
            .combination_count(t)
            .ok_or(Error::Overflow("the number of factor combinations"))?;
        model
            .interaction_count(t)
            .ok_or(Error::Overflow("the number of interactions"))?;
        let combos = usize::try_from(combos).map_err(|_| Error::Overflow("combination count"))?;

        let mut factors = Vec::with_capacity(combos * t);
        let mut strides = Vec::with_capacity(combos * t);
        let mut offsets = Vec::with_capacity(combos + 1);
        offsets.push(0u64);

        let mut comb: Vec<usize> = (0..t).collect();
        loop {
            let mut stride = 1u64;
            let base = strides.len();
            strides.resize(base + t, 0);
            for (p, &j) in comb.iter().enumerate().rev() {
                strides[base + p] = stride;
                stride *= model.domain(j) as u64;
            }
            factors.extend(comb.iter().map(|&j| j as u32));
            let last = *offsets.last().unwrap();
            offsets.push(last + stride);

            // Advance to the next combination in lexicographic order.
            let Some(p) = (0..t).rev().find(|&p| comb[p] < k - t + p) else {
                break;
            };
            comb[p] += 1;
            for q in p + 1..t {
                comb[q] = comb[q - 1] + 1;
            }
        }

        Ok(Self {
            model: model.clone(),
            t,
            factors,
            strides,
            offsets,
        })
    }

    pub fn model(&self) -> &SutModel {
        &self.model
    }

    pub fn strength(&self) -> usize {
        self.t
    }

    /// `|I_t|`.
    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_combinations(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Factor indices of combination `c`, increasing.
    pub fn combination(&self, c: usize) -> &[u32] {
        &self.factors[c * self.t..(c + 1) * self.t]
    }

    pub(crate) fn strides(&self, c: usize) -> &[u64] {
        &self.strides[c * self.t..(c + 1) * self.t]
    }

    /// Index of the first interaction of combination `c`.
    pub fn offset(&self, c: usize) -> u64 {
        self.offsets[c]
    }

    /// Combination containing interaction `index`.
    pub fn combination_of(&self, index: usize) -> usize {
        self.offsets.partition_point(|&o| o <= index as u64) - 1
    }

    /// Index of the interaction of combination `c` that `row` covers.
    pub fn index_in_row(&self, c: usize, row: &[u32]) -> usize {
        let mut id = self.offsets[c];
        for (&j, &s) in self.combination(c).iter().zip(self.strides(c)) {
            id += row[j as usize] as u64 * s;
        }
        id as usize
    }

    /// Value of the `p`-th factor of combination `c` in interaction `index`.
    pub(crate) fn value_at(&self, index: usize, c: usize, p: usize) -> u32 {
        let local = index as u64 - self.offsets[c];
        let j = self.combination(c)[p] as usize;
        ((local / self.strides(c)[p]) % self.model.domain(j) as u64) as u32
    }

    pub fn interaction(&self, index: usize) -> Interaction {
        assert!(index < self.len(), "interaction index {index} out of range");
        let c = self.combination_of(index);
        let pairs = (0..self.t)
            .map(|p| (self.combination(c)[p] as usize, self.value_at(index, c, p)))
            .collect();
        Interaction::from_sorted(pairs)
    }

    pub fn index_of(&self, interaction: &Interaction) -> Option<usize> {
        if interaction.strength() != self.t || !interaction.fits(&self.model) {
            return None;
        }
        let key: Vec<u32> = interaction.factors().map(|j| j as u32).collect();
        let (mut lo, mut hi) = (0, self.num_combinations());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.combination(mid) < &key[..] {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let c = lo;
        if c == self.num_combinations() || self.combination(c) != &key[..] {
            return None;
        }
        let mut id = self.offsets[c];
        for (&(_, v), &s) in interaction.pairs().iter().zip(self.strides(c)) {
            id += v as u64 * s;
        }
        Some(id as usize)
    }

    /// All interactions in canonical order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = Interaction> + '_ {
        (0..self.len()).map(|i| self.interaction(i))
    }
}
