use cornershuffle::family::{FamilyTag, ShuffleFamily};
use cornershuffle::grid::{Spacing, TGrid};
use cornershuffle::kernel::{marginal_kernel, TupleSpace};
use cornershuffle::perm::{parse_moves, parse_positions};
use cornershuffle::sample::sample_trajectory;
use cornershuffle::transient::{evolve, transient_distribution, Distribution, DEFAULT_TOL};
use cornershuffle::{CornerMove, Partition, Perm, Position, Sign};
use proptest::prelude::*;

fn side() -> impl Strategy<Value = usize> {
    1usize..=7
}

fn corner_move(n: usize) -> impl Strategy<Value = CornerMove> {
    (any::<bool>(), 1..=n, 1..=n).prop_map(|(upper, i, j)| {
        if upper {
            CornerMove::ul(i, j)
        } else {
            CornerMove::lr(i, j)
        }
    })
}

fn word(n: usize) -> impl Strategy<Value = Perm> {
    prop::collection::vec(corner_move(n), 0..12)
        .prop_map(move |moves| Perm::from_moves(n, &moves).unwrap())
}

fn sided_words(count: usize) -> impl Strategy<Value = (usize, Vec<Perm>)> {
    side().prop_flat_map(move |n| (Just(n), prop::collection::vec(word(n), count)))
}

fn family_tag() -> impl Strategy<Value = FamilyTag> {
    prop_oneof![Just(FamilyTag::S0), Just(FamilyTag::S), Just(FamilyTag::R)]
}

proptest! {
    #[test]
    fn composition_is_associative((n, ps) in sided_words(3)) {
        let left = ps[0].compose(&ps[1]).unwrap().compose(&ps[2]).unwrap();
        let right = ps[0].compose(&ps[1].compose(&ps[2]).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(ps[0].compose(&Perm::identity(n)).unwrap(), ps[0].clone());
    }

    #[test]
    fn inverses_cancel((_n, ps) in sided_words(1)) {
        let p = &ps[0];
        prop_assert!(p.compose(&p.inverse()).unwrap().is_identity());
        prop_assert!(p.inverse().compose(p).unwrap().is_identity());
    }

    #[test]
    fn sign_is_multiplicative((_n, ps) in sided_words(2)) {
        let product = ps[0].compose(&ps[1]).unwrap();
        prop_assert_eq!(product.sign(), ps[0].sign() * ps[1].sign());
    }

    #[test]
    fn corner_moves_are_involutions(n in side(), seed in any::<u64>()) {
        let moves = ShuffleFamily::new(FamilyTag::S, n).unwrap().corner_moves().unwrap();
        let m = moves[(seed % moves.len() as u64) as usize];
        let p = m.perm(n).unwrap();
        prop_assert!(p.compose(&p).unwrap().is_identity());
        let moved = (0..n * n).filter(|&x| p.apply(x) != x).count();
        prop_assert!(moved <= m.block_area(n));
    }

    #[test]
    fn cycle_type_sums_to_degree((n, ps) in sided_words(1)) {
        prop_assert_eq!(ps[0].cycle_type().degree(), n * n);
        let parity = ps[0].cycles().iter().map(|c| c.len() - 1).sum::<usize>() % 2;
        prop_assert_eq!(ps[0].sign() == Sign::Odd, parity == 1);
    }

    #[test]
    fn display_round_trips(n in 1usize..=9, i in 1usize..=9, j in 1usize..=9, upper in any::<bool>()) {
        prop_assume!(i <= n && j <= n);
        let p = Position::new(i, j).unwrap();
        prop_assert_eq!(p.to_string().parse::<Position>().unwrap(), p);
        let m = if upper { CornerMove::ul(i, j) } else { CornerMove::lr(i, j) };
        prop_assert_eq!(m.to_string().parse::<CornerMove>().unwrap(), m);
        let words = parse_moves(&format!("{m} {m}")).unwrap();
        prop_assert_eq!(words, vec![m, m]);
        prop_assert_eq!(parse_positions(&format!("{p} -> {p}")).unwrap(), vec![p, p]);
    }

    #[test]
    fn partition_round_trip_and_conjugation(parts in prop::collection::vec(1usize..8, 1..8)) {
        let p = Partition::from_unsorted(parts).unwrap();
        prop_assert_eq!(p.to_string().parse::<Partition>().unwrap(), p.clone());
        prop_assert_eq!(p.conjugate().conjugate(), p.clone());
        prop_assert_eq!(p.conjugate().degree(), p.degree());
        prop_assert_eq!(p.conjugate().first_row(), p.first_column());
    }

    #[test]
    fn grid_round_trip(min in 0.01f64..10.0, span in 0.1f64..100.0, points in 2usize..500, log in any::<bool>()) {
        let spacing = if log { Spacing::Log } else { Spacing::Linear };
        let g = TGrid::new(min, min + span, points, spacing).unwrap();
        let times = g.times();
        prop_assert_eq!(times.len(), points);
        prop_assert!(times.windows(2).all(|w| w[0] < w[1]));
        let back: TGrid = g.to_string().parse().unwrap();
        prop_assert_eq!(back.times().len(), points);
    }

    #[test]
    fn tuple_ranks_are_a_bijection(cells in 3usize..12, k in 1usize..4, seed in any::<u64>()) {
        prop_assume!(k <= cells);
        let space = TupleSpace::new(cells, k, usize::MAX).unwrap();
        let rank = (seed % space.size() as u64) as usize;
        let tuple = space.tuple(rank);
        prop_assert_eq!(tuple.len(), k);
        let mut sorted = tuple.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), k);
        prop_assert_eq!(space.rank(&tuple), rank);
    }

    #[test]
    fn trajectories_are_permutations(tag in family_tag(), n in 2usize..6, t in 0.0f64..30.0, seed in any::<u64>()) {
        let family = ShuffleFamily::new(tag, n).unwrap();
        let p = sample_trajectory(family, t, seed).unwrap();
        prop_assert_eq!(p.n(), n);
        if tag == FamilyTag::R {
            prop_assert_eq!(p.sign(), Sign::Even);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transient_semigroup(tag in family_tag(), n in 2usize..5, k in 1usize..3, s in 0.0f64..6.0, t in 0.0f64..6.0) {
        let family = ShuffleFamily::new(tag, n).unwrap();
        prop_assume!(k < family.cells());
        let kernel = marginal_kernel(family, k).unwrap();
        let start = 0;
        let direct = transient_distribution(&kernel, start, s + t, DEFAULT_TOL).unwrap();
        let first = transient_distribution(&kernel, start, s, DEFAULT_TOL).unwrap();
        let twice = evolve(&kernel, &first, t, DEFAULT_TOL).unwrap();
        prop_assert!(direct.l1_distance(&twice) < 1e-7);
        prop_assert!((direct.mass() - 1.0).abs() < 1e-8);
        prop_assert!(kernel.is_doubly_stochastic());
        prop_assert!(kernel.is_symmetric());
        let uniform = Distribution::new(vec![1.0 / kernel.space().size() as f64; kernel.space().size()]);
        let stays = evolve(&kernel, &uniform, t, DEFAULT_TOL).unwrap();
        prop_assert!(stays.l1_distance(&uniform) < 1e-8);
    }
}
