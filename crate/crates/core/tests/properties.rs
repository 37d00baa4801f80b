use proptest::prelude::*;

use locaray::{
    enumerate_interactions, locate_fault, verify, CoverageIndex, Interaction, Move, SutModel, TestArray,
};

/// A model with `k` factors of 2..=4 values, an array of up to `max_rows`
/// rows over it, and a strength in `1..=min(3, k)`.
fn arb_case(max_k: usize, max_rows: usize) -> impl Strategy<Value = (TestArray, usize)> {
    prop::collection::vec(2u32..=4, 1..=max_k)
        .prop_flat_map(move |values| {
            let k = values.len();
            let rows = prop::collection::vec(values.iter().map(|&v| 0..v).collect::<Vec<_>>(), 0..=max_rows);
            (Just(values), rows, 1..=k.min(3))
        })
        .prop_map(|(values, rows, t)| {
            let model = SutModel::new(values).unwrap();
            (TestArray::from_rows(model, &rows).unwrap(), t)
        })
}

fn arb_move(array: &TestArray, t: usize) -> impl Strategy<Value = Move> {
    let model = array.model().clone();
    let rows = array.num_rows();
    let k = model.factors();
    let set = (0..rows, 0..k, any::<u32>()).prop_map({
        let model = model.clone();
        move |(row, factor, raw)| Move::SetEntry {
            row,
            factor,
            value: raw % model.domain(factor),
        }
    });
    let overwrite = (0..rows, any::<u64>()).prop_map(move |(row, raw)| {
        let catalog = enumerate_interactions(&model, t).unwrap();
        let interaction = catalog.interaction(raw as usize % catalog.len());
        Move::OverwriteRow { row, interaction }
    });
    prop_oneof![set, overwrite]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rho_agrees_with_covers((array, t) in arb_case(5, 8)) {
        for it in enumerate_interactions(array.model(), t).unwrap().iter() {
            let rho = array.rho(&it);
            for (i, row) in array.rows().enumerate() {
                prop_assert_eq!(rho.contains(i), it.is_covered_by(row));
            }
        }
    }

    #[test]
    fn catalog_is_sorted_and_indexed((array, t) in arb_case(6, 0)) {
        let catalog = enumerate_interactions(array.model(), t).unwrap();
        let all: Vec<Interaction> = catalog.iter().collect();
        prop_assert_eq!(all.len() as u64, array.model().interaction_count(t).unwrap());
        prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
        for (i, it) in all.iter().enumerate() {
            prop_assert_eq!(catalog.index_of(it), Some(i));
        }
    }

    #[test]
    fn cost_zero_iff_verified((array, t) in arb_case(6, 12)) {
        let report = verify(&array, t).unwrap();
        let index = CoverageIndex::build(array, t).unwrap();
        prop_assert_eq!(index.cost(1.0) == 0.0, report.is_locating_1bar);
        prop_assert_eq!(index.f1(), report.uncovered.len());
        // f2 counts interactions sharing a nonempty row set with another.
        let colliding: usize = report
            .collision_groups
            .iter()
            .filter(|g| !g.rows.is_empty())
            .map(|g| g.interactions.len())
            .sum();
        prop_assert_eq!(index.f2(), colliding);
    }

    #[test]
    fn apply_then_undo_restores_the_index(
        (array, t, moves) in arb_case(5, 8)
            .prop_filter("needs rows", |(a, _)| a.num_rows() > 0)
            .prop_flat_map(|(a, t)| {
                let moves = prop::collection::vec(arb_move(&a, t), 1..20);
                (Just(a), Just(t), moves)
            })
    ) {
        let mut index = CoverageIndex::build(array.clone(), t).unwrap();
        let mut applied = Vec::new();
        for mv in &moves {
            let before = index.cost(4.0);
            let Ok(a) = index.apply(mv) else {
                // Moves that change nothing are rejected and leave no trace.
                prop_assert_eq!(index.cost(4.0), before);
                continue;
            };
            prop_assert!((index.cost(4.0) - before - a.delta(4.0)).abs() < 1e-9);
            prop_assert!(index.matches_rebuild());
            applied.push(a);
        }
        while let Some(a) = applied.pop() {
            index.undo(a);
        }
        prop_assert_eq!(index.array(), &array);
        prop_assert!(index.matches_rebuild());
    }

    #[test]
    fn locate_inverts_rho_on_locating_arrays((array, t) in arb_case(4, 12)) {
        let report = verify(&array, t).unwrap();
        for it in enumerate_interactions(array.model(), t).unwrap().iter() {
            let rows = array.rho(&it);
            if rows.is_empty() {
                continue;
            }
            let found = locate_fault(&array, &rows, t).unwrap();
            prop_assert!(found.contains(&it));
            if report.is_locating_1bar {
                prop_assert_eq!(found, vec![it]);
            }
        }
    }
}

/// Every array over two binary factors with up to three rows.
#[test]
fn exhaustive_small_arrays() {
    let model = SutModel::new(vec![2, 2]).unwrap();
    for m in 0..=3usize {
        for bits in 0u32..(1 << (2 * m)) {
            let rows: Vec<[u32; 2]> = (0..m)
                .map(|i| [(bits >> (2 * i)) & 1, (bits >> (2 * i + 1)) & 1])
                .collect();
            let array = TestArray::from_rows(model.clone(), &rows).unwrap();
            for t in 1..=2 {
                let report = verify(&array, t).unwrap();
                let index = CoverageIndex::build(array.clone(), t).unwrap();
                assert_eq!(index.is_locating(), report.is_locating_1bar, "{rows:?} t={t}");
                assert_eq!(index.f1(), report.uncovered.len());
            }
        }
    }
}
