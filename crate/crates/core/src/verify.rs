//! Definition-literal checks of the covering and locating properties.
//!
//! Nothing here shares code with [`crate::cost`]: every `ρ_A(T)` is
//! recomputed by scanning rows with [`covers`], and interactions are grouped
//! by their full row sets. This module is the oracle the optimized cost
//! index is tested against.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{covers, enumerate_interactions, Interaction, RowSet, TestArray};

/// Interactions sharing one covering row set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionGroup {
    pub rows: RowSet,
    /// At least two members, in canonical order.
    pub interactions: Vec<Interaction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub strength: usize,
    /// Every interaction is covered.
    pub is_covering: bool,
    /// All covering row sets are pairwise distinct, including empty ones.
    pub is_locating_exact1: bool,
    /// Both of the above: the array is `(1̄, t)`-locating.
    pub is_locating_1bar: bool,
    /// Interactions with an empty row set, in canonical order.
    pub uncovered: Vec<Interaction>,
    /// Groups of two or more interactions with equal row sets, ordered by
    /// their first member. A group with empty `rows` holds the uncovered
    /// interactions when there are at least two of them.
    pub collision_groups: Vec<CollisionGroup>,
}

impl VerifyReport {
    /// Exact number of unordered colliding pairs.
    pub fn collision_count(&self) -> u64 {
        self.collision_groups
            .iter()
            .map(|g| {
                let n = g.interactions.len() as u64;
                n * (n - 1) / 2
            })
            .sum()
    }

    /// Every colliding pair `(T1, T2, rows)` with `T1 < T2`.
    pub fn collisions(&self) -> impl Iterator<Item = (&Interaction, &Interaction, &RowSet)> + '_ {
        self.collision_groups.iter().flat_map(|g| {
            let members = &g.interactions;
            (0..members.len())
                .flat_map(move |a| (a + 1..members.len()).map(move |b| (&members[a], &members[b], &g.rows)))
        })
    }
}

fn check_strength(array: &TestArray, t: usize) -> Result<()> {
    let k = array.num_factors();
    if t == 0 || t > k {
        return Err(Error::Strength { t, k });
    }
    Ok(())
}

fn rho_by_scan(array: &TestArray, interaction: &Interaction) -> RowSet {
    RowSet::new(
        array
            .rows()
            .enumerate()
            .filter(|(_, row)| covers(row, interaction))
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Checks covering and locating properties of `array` at strength `t`.
pub fn verify(array: &TestArray, t: usize) -> Result<VerifyReport> {
    check_strength(array, t)?;
    let catalog = enumerate_interactions(array.model(), t)?;

    let mut groups: HashMap<RowSet, Vec<Interaction>> = HashMap::new();
    let mut uncovered = Vec::new();
    for interaction in catalog.iter() {
        let rows = rho_by_scan(array, &interaction);
        if rows.is_empty() {
            uncovered.push(interaction.clone());
        }
        groups.entry(rows).or_default().push(interaction);
    }

    let mut collision_groups: Vec<CollisionGroup> = groups
        .into_iter()
        .filter(|(_, members)| members.len() > 1)
        .map(|(rows, interactions)| CollisionGroup { rows, interactions })
        .collect();
    collision_groups.sort_by(|a, b| a.interactions[0].cmp(&b.interactions[0]));

    let is_covering = uncovered.is_empty();
    let is_locating_exact1 = collision_groups.is_empty();
    Ok(VerifyReport {
        strength: t,
        is_covering,
        is_locating_exact1,
        is_locating_1bar: is_covering && is_locating_exact1,
        uncovered,
        collision_groups,
    })
}

/// Every strength-`t` interaction whose covering rows are exactly `failing`.
///
/// For a `(1̄, t)`-locating array the result has at most one element. An empty
/// failing set means no fault and yields an empty list.
pub fn locate_fault(array: &TestArray, failing: &RowSet, t: usize) -> Result<Vec<Interaction>> {
    check_strength(array, t)?;
    if let Some(bad) = failing.iter().find(|&r| r >= array.num_rows()) {
        return Err(Error::RowOutOfRange {
            row: bad + 1,
            rows: array.num_rows(),
        });
    }
    if failing.is_empty() {
        return Ok(Vec::new());
    }
    let catalog = enumerate_interactions(array.model(), t)?;
    Ok(catalog
        .iter()
        .filter(|it| rho_by_scan(array, it) == *failing)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{parse_model, random_array};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn it(pairs: &[(usize, u32)]) -> Interaction {
        Interaction::new(pairs.to_vec()).unwrap()
    }

    #[test]
    fn printer_locating_array() {
        let r = verify(&printer_la(), 2).unwrap();
        assert!(r.is_covering && r.is_locating_exact1 && r.is_locating_1bar);
        assert_eq!(r.collision_count(), 0);
    }

    #[test]
    fn printer_covering_array_is_not_locating() {
        let r = verify(&printer_ca(), 2).unwrap();
        assert!(r.is_covering);
        assert!(!r.is_locating_1bar);
        assert!(!r.is_locating_exact1);
        // Brute force: six singleton row sets, each shared by four interactions.
        assert_eq!(r.collision_groups.len(), 6);
        assert_eq!(r.collision_count(), 36);
        assert_eq!(r.collisions().count(), 36);
        // {A4, OneSide} and {Yes, OneSide} are both covered only by row 1.
        let a4_oneside = it(&[(1, 0), (3, 0)]);
        let yes_oneside = it(&[(2, 0), (3, 0)]);
        assert!(r
            .collisions()
            .any(|(a, b, rows)| *a == a4_oneside && *b == yes_oneside && rows.one_based() == [1]));
    }

    #[test]
    fn collisions_are_ordered_pairs_with_equal_rows() {
        let a = printer_ca();
        let r = verify(&a, 2).unwrap();
        for (t1, t2, rows) in r.collisions() {
            assert!(t1 < t2);
            assert_eq!(a.rho(t1), *rows);
            assert_eq!(a.rho(t2), *rows);
        }
    }

    #[test]
    fn empty_array() {
        let r = verify(&TestArray::empty(printer_model()), 2).unwrap();
        assert!(!r.is_covering && !r.is_locating_1bar && !r.is_locating_exact1);
        assert_eq!(r.uncovered.len(), 30);
        assert_eq!(r.collision_count(), 30 * 29 / 2);
    }

    #[test]
    fn strength_range() {
        assert!(verify(&printer_la(), 0).is_err());
        assert!(verify(&printer_la(), 5).is_err());
        assert!(verify(&printer_la(), 4).is_ok());
    }

    #[test]
    fn locate_the_printer_fault() {
        let a = printer_la();
        let failing = RowSet::from_one_based([4, 5, 10], 10).unwrap();
        assert_eq!(
            locate_fault(&a, &failing, 2).unwrap(),
            vec![it(&[(1, 1), (2, 1)])]
        );
        assert!(locate_fault(&a, &RowSet::default(), 2).unwrap().is_empty());
        // No strength-2 interaction is covered by row 1 alone.
        let one = RowSet::from_one_based([1], 10).unwrap();
        assert!(locate_fault(&a, &one, 2).unwrap().is_empty());
    }

    #[test]
    fn locate_rejects_out_of_range_rows() {
        let a = printer_la();
        let bad = RowSet::new(vec![10]);
        assert!(matches!(
            locate_fault(&a, &bad, 2),
            Err(Error::RowOutOfRange { row: 11, rows: 10 })
        ));
    }

    #[test]
    fn locate_inverts_rho_on_locating_arrays() {
        let a = printer_la();
        for t in enumerate_interactions(a.model(), 2).unwrap().iter() {
            assert_eq!(locate_fault(&a, &a.rho(&t), 2).unwrap(), vec![t]);
        }
    }

    #[test]
    fn report_invariants_on_random_arrays() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = parse_model("2,3,2,2").unwrap();
        for rows in 0..12 {
            let a = random_array(&m, rows, &mut rng);
            for t in 1..=3 {
                let r = verify(&a, t).unwrap();
                assert_eq!(
                    r.is_locating_1bar,
                    r.uncovered.is_empty() && r.collision_groups.is_empty()
                );
                assert!(!r.is_locating_1bar || r.is_covering);
                assert_eq!(r.is_covering, r.uncovered.is_empty());
            }
        }
    }
}
