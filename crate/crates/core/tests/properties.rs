use proptest::prelude::*;
use rand::Rng;

use orgsearch::agents::Allocation;
use orgsearch::analysis::efficiency;
use orgsearch::beliefs::init_beliefs;
use orgsearch::engine::{init_run, run_period, Mode, SimConfig};
use orgsearch::landscape::{
    build_influence_matrix, generate_landscape, DecisionVector, Landscape, MatrixKind,
};
use orgsearch::reallocation::reallocate;
use orgsearch::rng::SeedKey;

fn landscape(n: usize, k: usize, seed: u64) -> Landscape {
    let mut rng = SeedKey::new(seed).rng();
    let matrix = build_influence_matrix(MatrixKind::Random { k }, n, &mut rng).unwrap();
    generate_landscape(matrix, &mut rng).unwrap()
}

fn n_and_k() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=10).prop_flat_map(|n| (Just(n), 0..n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_export_round_trips((n, k) in n_and_k(), seed in any::<u64>()) {
        let l = landscape(n, k, seed);
        let back = Landscape::from_text(&l.to_text()).unwrap();
        prop_assert_eq!(back.tables(), l.tables());
        prop_assert_eq!(back.matrix(), l.matrix());
        prop_assert_eq!(back.optimum().1, l.optimum().1);
    }

    #[test]
    fn flips_only_move_dependent_contributions((n, k) in n_and_k(), seed in any::<u64>(), v in any::<u64>(), j in any::<prop::sample::Index>()) {
        let l = landscape(n, k, seed);
        let d = DecisionVector::from_value(v & ((1 << n) - 1), n);
        let j = j.index(n);
        let e = d.flipped(j);
        for i in 0..n {
            let changed = l.contribution(i, &d) != l.contribution(i, &e);
            prop_assert_eq!(changed, l.matrix().get(i, j));
        }
    }

    #[test]
    fn performance_is_bounded_by_optimum((n, k) in n_and_k(), seed in any::<u64>(), v in any::<u64>()) {
        let l = landscape(n, k, seed);
        let d = DecisionVector::from_value(v & ((1 << n) - 1), n);
        let p = l.performance(&d);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(p <= l.optimum().1);
    }

    #[test]
    fn vector_value_round_trips(n in 1usize..=25, v in any::<u64>()) {
        let v = v & ((1u64 << n) - 1);
        let d = DecisionVector::from_value(v, n);
        prop_assert_eq!(d.value(), v);
        prop_assert_eq!(d.to_string().parse::<DecisionVector>().unwrap(), d);
    }

    #[test]
    fn efficiency_counts_partition_dependencies(seed in any::<u64>(), kind in prop_oneof![Just(MatrixKind::Decomposable2), Just(MatrixKind::Nondecomposable5), (1usize..=6).prop_map(|k| MatrixKind::Random { k })]) {
        let mut rng = SeedKey::new(seed).rng();
        let matrix = build_influence_matrix(kind, 15, &mut rng).unwrap();
        let alloc = Allocation::random_equal(15, 5, &mut rng).unwrap();
        let k = kind.k();
        let mut internal = 0.0;
        for m in 0..5 {
            let eta = efficiency(&alloc, &matrix, m).unwrap();
            prop_assert!((0.0..=1.0).contains(&eta));
            internal += eta * (alloc.area(m).len() * k) as f64;
        }
        let cross = (0..15)
            .flat_map(|n| matrix.dependencies(n).iter().map(move |&j| (n, j)))
            .filter(|&(n, j)| alloc.owner(n) != alloc.owner(j))
            .count();
        prop_assert_eq!(internal.round() as usize + cross, 15 * k);
    }

    #[test]
    fn reallocation_conserves_tasks(seed in any::<u64>(), extra in 0usize..4, observations in 0usize..200) {
        let mut rng = SeedKey::new(seed).rng();
        let alloc = Allocation::random_equal(12, 4, &mut rng).unwrap();
        let mut beliefs = init_beliefs(12, 4);
        for _ in 0..observations {
            let m = rng.gen_range(0..4);
            let i = rng.gen_range(0..12);
            let j = (i + rng.gen_range(1..12)) % 12;
            beliefs[m].observe(i, j, rng.gen_bool(0.5));
        }
        let capacities = vec![3 + extra; 4];
        let (next, log) = reallocate(&alloc, &beliefs, &capacities, 25, &mut rng).unwrap();
        let mut all: Vec<usize> = next.areas().iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..12).collect::<Vec<_>>());
        prop_assert!(next.sizes().iter().all(|&s| (1..=3 + extra).contains(&s)));
        for t in &log {
            prop_assert!(t.signal >= t.threshold);
            prop_assert_eq!(next.owner(t.task), t.buyer);
        }
        if extra == 0 {
            prop_assert!(log.is_empty());
        }
    }

    #[test]
    fn top_down_allocation_never_changes(seed in any::<u64>(), alpha in 0.0f64..=1.0, prob in 0.0f64..=1.0) {
        let cfg = SimConfig {
            horizon: 30,
            ..SimConfig::standard(MatrixKind::Nondecomposable5, Mode::TopDown, alpha, prob, seed)
        };
        let (l, mut state) = init_run(&cfg, 0).unwrap();
        let initial = state.allocation.clone();
        for t in 1..=cfg.horizon {
            let rec = run_period(&mut state, &l, &cfg, 0, t).unwrap();
            prop_assert!(rec.transfers.is_empty());
            prop_assert!(rec.perf_norm <= 1.0);
        }
        prop_assert_eq!(state.allocation, initial);
    }
}
