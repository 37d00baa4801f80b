//! SUT models, test arrays, interactions and the covering relation.
//!
//! Factors and values are 0-based everywhere in the API. Row indices are
//! 0-based internally; [`RowSet`] converts to and from the 1-based numbering
//! used in human-facing output.

mod catalog;
mod file;

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

pub use catalog::{enumerate_interactions, InteractionCatalog};
pub use file::ArrayFile;

/// The factor/value profile `(v_1, ..., v_k)` of a system under test.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SutModel {
    values: Vec<u32>,
}

impl SutModel {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyModel);
        }
        if let Some(&v) = values.iter().find(|&&v| v < 2) {
            return Err(Error::ModelToken {
                token: v.to_string(),
                reason: "every factor needs at least 2 values".into(),
            });
        }
        Ok(Self { values })
    }

    /// Number of factors `k`.
    pub fn factors(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Domain size of factor `j`.
    pub fn domain(&self, j: usize) -> u32 {
        self.values[j]
    }

    pub fn min_domain(&self) -> u32 {
        self.values.iter().copied().min().unwrap_or(0)
    }

    pub fn max_domain(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// `|I_t|`, the number of strength-`t` interactions, or `None` on overflow.
    ///
    /// Evaluated as the degree-`t` elementary symmetric polynomial of the
    /// domain sizes, which equals the sum over all `t`-subsets of factors of
    /// the product of their domain sizes.
    pub fn interaction_count(&self, t: usize) -> Option<u64> {
        if t > self.factors() {
            return Some(0);
        }
        let mut e = vec![0u64; t + 1];
        e[0] = 1;
        for &v in &self.values {
            for d in (1..=t).rev() {
                e[d] = e[d].checked_add(e[d - 1].checked_mul(v as u64)?)?;
            }
        }
        Some(e[t])
    }

    /// `C(k, t)`, or `None` on overflow.
    pub fn combination_count(&self, t: usize) -> Option<u64> {
        binomial(self.factors() as u64, t as u64)
    }
}

/// Formats as runs of equal consecutive domain sizes, e.g. `2^13 4^5`.
impl fmt::Display for SutModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut i = 0;
        while i < self.values.len() {
            let v = self.values[i];
            let run = self.values[i..].iter().take_while(|&&w| w == v).count();
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}^{run}")?;
            first = false;
            i += run;
        }
        Ok(())
    }
}

impl std::str::FromStr for SutModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_model(s)
    }
}

/// Parses a model written as `base^exp` tokens or bare domain sizes,
/// separated by whitespace or commas: `"2^13 4^5"`, `"2,2,2,3"`.
pub fn parse_model(spec: &str) -> Result<SutModel> {
    let mut values = Vec::new();
    for token in spec
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
    {
        let bad = |reason: &str| Error::ModelToken {
            token: token.to_string(),
            reason: reason.to_string(),
        };
        let (base, exp) = match token.split_once('^') {
            Some((b, e)) => (b, e),
            None => (token, "1"),
        };
        let base: u32 = base.parse().map_err(|_| bad("base is not an integer"))?;
        let exp: u32 = exp.parse().map_err(|_| bad("exponent is not an integer"))?;
        if base < 2 {
            return Err(bad("base must be at least 2"));
        }
        if exp < 1 {
            return Err(bad("exponent must be at least 1"));
        }
        if values.len() + exp as usize > u16::MAX as usize {
            return Err(bad("too many factors"));
        }
        values.extend(std::iter::repeat_n(base, exp as usize));
    }
    if values.is_empty() {
        return Err(Error::EmptyModel);
    }
    SutModel::new(values)
}

pub(crate) fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// A set of `(factor, value)` pairs over distinct factors.
///
/// Pairs are kept sorted by factor. Interactions order canonically: first by
/// the factor tuple, then by the value tuple, both lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Interaction {
    pairs: Vec<(usize, u32)>,
}

impl Interaction {
    pub fn new(mut pairs: Vec<(usize, u32)>) -> Result<Self> {
        pairs.sort_unstable_by_key(|&(j, _)| j);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Interaction("factors must be distinct".into()));
        }
        Ok(Self { pairs })
    }

    pub(crate) fn from_sorted(pairs: Vec<(usize, u32)>) -> Self {
        debug_assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0));
        Self { pairs }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn strength(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, u32)] {
        &self.pairs
    }

    pub fn factors(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|&(j, _)| j)
    }

    /// Whether every factor and value lies inside `model`.
    pub fn fits(&self, model: &SutModel) -> bool {
        self.pairs
            .iter()
            .all(|&(j, v)| j < model.factors() && v < model.domain(j))
    }

    /// Whether `row` agrees with every pair of this interaction.
    pub fn is_covered_by(&self, row: &[u32]) -> bool {
        covers(row, self)
    }
}

impl Ord for Interaction {
    fn cmp(&self, other: &Self) -> Ordering {
        self.factors().cmp(other.factors()).then_with(|| {
            let a = self.pairs.iter().map(|&(_, v)| v);
            let b = other.pairs.iter().map(|&(_, v)| v);
            a.cmp(b)
        })
    }
}

impl PartialOrd for Interaction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Formats with 1-based factor numbers, e.g. `{(2, 1), (3, 1)}`.
impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, &(j, v)) in self.pairs.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}, {v})", j + 1)?;
        }
        f.write_str("}")
    }
}

/// True iff `row[j] == v` for every `(j, v)` in `interaction`.
pub fn covers(row: &[u32], interaction: &Interaction) -> bool {
    interaction.pairs.iter().all(|&(j, v)| row[j] == v)
}

/// An `m x k` matrix of factor values; each row is one test.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TestArray {
    model: SutModel,
    rows: usize,
    cells: Vec<u32>,
}

impl TestArray {
    /// An array of no rows.
    pub fn empty(model: SutModel) -> Self {
        Self {
            model,
            rows: 0,
            cells: Vec::new(),
        }
    }

    pub fn from_rows<R: AsRef<[u32]>>(model: SutModel, rows: &[R]) -> Result<Self> {
        let k = model.factors();
        let mut cells = Vec::with_capacity(rows.len() * k);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != k {
                return Err(Error::Array(format!(
                    "row {} has {} entries, expected {k}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= model.domain(j) {
                    return Err(Error::Array(format!(
                        "row {}, factor {}: value {v} is outside 0..{}",
                        i + 1,
                        j + 1,
                        model.domain(j)
                    )));
                }
            }
            cells.extend_from_slice(row);
        }
        Ok(Self {
            model,
            rows: rows.len(),
            cells,
        })
    }

    pub fn model(&self) -> &SutModel {
        &self.model
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_factors(&self) -> usize {
        self.model.factors()
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let k = self.num_factors();
        &self.cells[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        // chunks_exact panics on a zero chunk size; models always have k >= 1.
        self.cells.chunks_exact(self.num_factors())
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.cells[i * self.num_factors() + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: u32) {
        let k = self.num_factors();
        self.cells[i * k + j] = v;
    }

    /// `ρ_A(T)`: the rows covering `interaction`.
    pub fn rho(&self, interaction: &Interaction) -> RowSet {
        RowSet(
            self.rows()
                .enumerate()
                .filter(|(_, row)| covers(row, interaction))
                .map(|(i, _)| i)
                .collect(),
        )
    }
}

/// A set of row indices, stored sorted and 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RowSet(Vec<usize>);

impl RowSet {
    pub fn new(mut rows: Vec<usize>) -> Self {
        rows.sort_unstable();
        rows.dedup();
        Self(rows)
    }

    /// Builds a row set from 1-based row numbers, checking them against `rows`.
    pub fn from_one_based<I: IntoIterator<Item = usize>>(numbers: I, rows: usize) -> Result<Self> {
        let mut out = Vec::new();
        for n in numbers {
            if n == 0 || n > rows {
                return Err(Error::RowOutOfRange { row: n, rows });
            }
            out.push(n - 1);
        }
        Ok(Self::new(out))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, row: usize) -> bool {
        self.0.binary_search(&row).is_ok()
    }

    /// 0-based members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|r| r + 1).collect()
    }
}

/// Formats 1-based, e.g. `{4, 5, 10}`.
impl fmt::Display for RowSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, r) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", r + 1)?;
        }
        f.write_str("}")
    }
}

/// An `m x k` array with every entry drawn uniformly from its factor's domain.
pub fn random_array<R: Rng + ?Sized>(model: &SutModel, m: usize, rng: &mut R) -> TestArray {
    let k = model.factors();
    let mut cells = Vec::with_capacity(m * k);
    for _ in 0..m {
        for &v in model.values() {
            cells.push(rng.random_range(0..v));
        }
    }
    TestArray {
        model: model.clone(),
        rows: m,
        cells,
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_exponent_form() {
        let m = parse_model("2^13 4^5").unwrap();
        assert_eq!(m.factors(), 18);
        assert!(m.values()[..13].iter().all(|&v| v == 2));
        assert!(m.values()[13..].iter().all(|&v| v == 4));
    }

    #[test]
    fn parse_comma_form() {
        assert_eq!(parse_model("2,2,2,3").unwrap().values(), &[2, 2, 2, 3]);
        assert_eq!(parse_model(" 2, 3^2\t5 ").unwrap().values(), &[2, 3, 3, 5]);
    }

    #[test]
    fn parse_errors_name_the_token() {
        for (spec, token) in [
            ("2^0", "2^0"),
            ("1^3", "1^3"),
            ("2 x", "x"),
            ("2^", "2^"),
            ("3^-1", "3^-1"),
        ] {
            match parse_model(spec) {
                Err(Error::ModelToken { token: t, .. }) => assert_eq!(t, token, "{spec}"),
                other => panic!("{spec}: {other:?}"),
            }
        }
        assert!(matches!(parse_model(""), Err(Error::EmptyModel)));
        assert!(matches!(parse_model(" , "), Err(Error::EmptyModel)));
    }

    #[test]
    fn display_round_trips() {
        for spec in ["2^13 4^5", "2^1 3^1 2^2", "6^1"] {
            let m = parse_model(spec).unwrap();
            assert_eq!(m.to_string(), spec);
            assert_eq!(parse_model(&m.to_string()).unwrap(), m);
        }
    }

    #[test]
    fn covers_examples() {
        let t = Interaction::new(vec![(1, 1), (2, 1)]).unwrap();
        assert!(covers(&[0, 1, 1, 0], &t));
        assert!(covers(&[0, 0, 0, 0], &Interaction::empty()));
        assert!(!covers(&[0, 0, 0, 0], &Interaction::new(vec![(0, 1)]).unwrap()));
    }

    #[test]
    fn interaction_rejects_repeated_factor() {
        assert!(Interaction::new(vec![(1, 0), (1, 1)]).is_err());
    }

    #[test]
    fn rho_examples() {
        let a = printer_la();
        let t = Interaction::new(vec![(1, 1), (2, 1)]).unwrap();
        assert_eq!(a.rho(&t), RowSet::from_one_based([4, 5, 10], 10).unwrap());
        assert_eq!(a.rho(&t).to_string(), "{4, 5, 10}");

        let empty = TestArray::empty(printer_model());
        assert!(empty.rho(&t).is_empty());
        assert_eq!(a.rho(&Interaction::empty()).len(), 10);
    }

    #[test]
    fn from_rows_validates() {
        let m = printer_model();
        assert!(TestArray::from_rows(m.clone(), &[[0, 0, 0, 3]]).is_err());
        assert!(TestArray::from_rows(m, &[vec![0, 0, 0]]).is_err());
    }

    #[test]
    fn row_set_bounds() {
        assert!(RowSet::from_one_based([0], 3).is_err());
        assert!(RowSet::from_one_based([4], 3).is_err());
        assert_eq!(
            RowSet::from_one_based([3, 1, 3], 3).unwrap().one_based(),
            vec![1, 3]
        );
    }

    #[test]
    fn random_array_is_seeded() {
        let m = parse_model("2^3 5").unwrap();
        let a = random_array(&m, 7, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_array(&m, 7, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert_eq!(
            random_array(&m, 0, &mut ChaCha8Rng::seed_from_u64(9)).num_rows(),
            0
        );
    }

    #[test]
    fn random_array_is_uniform() {
        // Binomial(10000, 1/5): mean 2000, sigma = sqrt(10000 * 0.2 * 0.8) = 40.
        let m = parse_model("5").unwrap();
        let a = random_array(&m, 10_000, &mut ChaCha8Rng::seed_from_u64(1));
        let mut counts = [0usize; 5];
        for row in a.rows() {
            counts[row[0] as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 - 2000.0).abs() <= 5.0 * 40.0, "{counts:?}");
        }
    }

    #[test]
    fn interaction_count_closed_form() {
        assert_eq!(printer_model().interaction_count(2), Some(30));
        assert_eq!(printer_model().interaction_count(0), Some(1));
        assert_eq!(parse_model("2^3").unwrap().interaction_count(2), Some(12));
    }
}
