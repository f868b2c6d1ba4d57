use cornershuffle::decomp::{
    build_w, build_x, build_y, build_z, comparison_constant, decompose_three_cycle, geodesic_word,
    three_cycles, DecompositionCase, Scheme, MAX_GENERAL_LEN, MAX_W_LEN, MAX_Y_LEN, MAX_Z_LEN,
};
use cornershuffle::family::{FamilyTag, ShuffleFamily};
use cornershuffle::group::{full_group_kernel, three_cycle_generators, GroupKernel};
use cornershuffle::{CornerMove, Perm, Position};
use nalgebra::DMatrix;
use num_rational::Ratio;

fn pos(r: usize, c: usize) -> Position {
    Position::new(r, c).unwrap()
}

/// Parses a printed array of two-digit labels `rs` into cells.
fn array(rows: &[&str]) -> Vec<Position> {
    rows.iter()
        .flat_map(|row| row.split_whitespace())
        .map(|label| {
            let digits: Vec<usize> = label
                .chars()
                .map(|c| c.to_digit(10).unwrap() as usize)
                .collect();
            pos(digits[0], digits[1])
        })
        .collect()
}

fn arrangement_after(n: usize, moves: &[CornerMove]) -> Vec<Position> {
    Perm::from_moves(n, moves).unwrap().arrangement()
}

/// The double transposition, built by swapping entries of the identity arrangement.
fn swapped_arrangement(n: usize, cell: Position) -> Vec<Position> {
    let mut cells: Vec<Position> = Position::all(n).collect();
    let at = |p: Position| p.index(n);
    cells.swap(at(pos(1, 1)), at(cell));
    if cell.row() >= 2 && cell.col() >= 2 {
        cells.swap(at(pos(cell.row(), 1)), at(pos(1, cell.col())));
    }
    cells
}

#[test]
fn x55_figure_chain() {
    let chain = [
        (
            5,
            [
                "55 54 53 52 51",
                "45 44 43 42 41",
                "35 34 33 32 31",
                "25 24 23 22 21",
                "15 14 13 12 11",
            ],
        ),
        (
            4,
            [
                "21 22 23 24 25",
                "31 32 33 34 35",
                "41 42 43 44 45",
                "51 52 53 54 55",
                "15 14 13 12 11",
            ],
        ),
        (
            3,
            [
                "45 44 43 42 41",
                "35 34 33 32 31",
                "25 24 23 22 21",
                "51 52 53 54 55",
                "15 14 13 12 11",
            ],
        ),
        (
            4,
            [
                "55 54 53 52 51",
                "21 22 23 24 25",
                "31 32 33 34 35",
                "41 42 43 44 45",
                "15 14 13 12 11",
            ],
        ),
    ];
    let mut moves = Vec::new();
    for (i, rows) in chain {
        moves.push(CornerMove::ul(i, 5));
        assert_eq!(
            arrangement_after(5, &moves),
            array(&rows),
            "after UL({i},5)"
        );
    }
    assert_eq!(build_x(5, 5, 5).unwrap().moves(), moves.as_slice());
}

#[test]
fn y55_figure_chain() {
    let chain = [
        (
            5,
            [
                "55 54 53 52 51",
                "21 22 23 24 25",
                "31 32 33 34 35",
                "41 42 43 44 45",
                "15 14 13 12 11",
            ],
        ),
        // The printed array shows 51 where the first entry of the last row must be 52.
        (
            4,
            [
                "12 13 14 15 51",
                "21 22 23 24 25",
                "31 32 33 34 35",
                "41 42 43 44 45",
                "52 53 54 55 11",
            ],
        ),
        (
            3,
            [
                "54 53 52 15 51",
                "21 22 23 24 25",
                "31 32 33 34 35",
                "41 42 43 44 45",
                "14 13 12 55 11",
            ],
        ),
        (
            4,
            [
                "55 12 13 14 51",
                "21 22 23 24 25",
                "31 32 33 34 35",
                "41 42 43 44 45",
                "15 52 53 54 11",
            ],
        ),
    ];
    let mut moves = Vec::new();
    for (j, rows) in chain {
        moves.extend(build_x(5, 5, j).unwrap().moves().iter().copied());
        assert_eq!(arrangement_after(5, &moves), array(&rows), "after X(5,{j})");
    }
    let printed = array(&[
        "12 13 14 15 51",
        "21 22 23 24 25",
        "31 32 33 34 35",
        "41 42 43 44 45",
        "51 53 54 55 11",
    ]);
    let second = {
        let mut m: Vec<CornerMove> = build_x(5, 5, 5).unwrap().moves().to_vec();
        m.extend(build_x(5, 5, 4).unwrap().moves().iter().copied());
        arrangement_after(5, &m)
    };
    let differing: Vec<usize> = (0..25).filter(|&x| printed[x] != second[x]).collect();
    assert_eq!(differing, vec![pos(5, 1).index(5)]);

    let y = build_y(5, 5, 5).unwrap();
    assert_eq!(y.moves(), moves.as_slice());
    assert_eq!(y.target().arrangement(), swapped_arrangement(5, pos(5, 5)));
}

#[test]
fn y_claim_holds_for_every_interior_pivot() {
    for n in 5..=10 {
        for i in 2..=n {
            for j in 2..=n {
                let y = build_y(n, i, j).unwrap();
                assert!(y.len() <= MAX_Y_LEN);
                assert_eq!(
                    y.target().arrangement(),
                    swapped_arrangement(n, pos(i, j)),
                    "n={n} Y({i},{j})"
                );
            }
        }
    }
}

#[test]
fn y_on_the_border_is_a_single_transposition() {
    for n in 5..=8 {
        for k in 2..=n {
            for cell in [pos(1, k), pos(k, 1)] {
                let y = build_y(n, cell.row(), cell.col()).unwrap();
                assert_eq!(
                    y.target().arrangement(),
                    swapped_arrangement(n, cell),
                    "Y{cell}"
                );
            }
        }
    }
}

#[test]
fn z_words_and_their_swaps() {
    let n = 6;
    let cells: Vec<Position> = Position::all(n).filter(|&p| p != Position::TOP).collect();
    for &p in &cells {
        for &q in &cells {
            if p.row() == q.row() || p.col() == q.col() {
                continue;
            }
            let z = build_z(n, p, q).unwrap();
            assert!(z.len() <= MAX_Z_LEN);
            let expected = Perm::from_cycle(n, &[Position::TOP, q, p]).unwrap();
            assert_eq!(z.target(), &expected);
            assert_eq!(build_z(n, q, p).unwrap().target(), &expected.inverse());
        }
    }
}

#[test]
fn w_words_exhaustively_at_n6() {
    let n = 6;
    let cells: Vec<Position> = Position::all(n).filter(|&p| p != Position::TOP).collect();
    let apart = |a: Position, b: Position| a.row() != b.row() && a.col() != b.col();
    let mut checked = 0;
    for &a in &cells {
        for &b in cells.iter().filter(|&&b| apart(a, b)) {
            for &c in cells.iter().filter(|&&c| apart(a, c) && apart(b, c)) {
                let w = build_w(n, a, b, c).unwrap();
                assert!(w.len() <= MAX_W_LEN);
                let target = Perm::from_cycle(n, &[c, b, a]).unwrap();
                assert_eq!(w.target(), &target);
                if a < b && a < c {
                    // Rotating the inputs gives the same cycle.
                    assert_eq!(build_w(n, b, c, a).unwrap().target(), &target);
                    assert_eq!(build_w(n, c, a, b).unwrap().target(), &target);
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn w_words_sampled_at_larger_sides() {
    for n in [8usize, 10, 12] {
        for k in 0..40 {
            let a = pos(2 + k % (n - 3), 2 + (3 * k) % (n - 3));
            let b = pos(a.row() % n + 1, a.col() % n + 1);
            let c = pos(b.row() % n + 1, b.col() % n + 1);
            if [a, b, c].contains(&Position::TOP) {
                continue;
            }
            let w = build_w(n, a, b, c).unwrap();
            assert_eq!(w.target(), &Perm::from_cycle(n, &[c, b, a]).unwrap());
        }
    }
}

#[test]
fn named_decompositions_at_n10() {
    let n = 10;
    let distinct = Perm::from_cycle(n, &[pos(2, 2), pos(4, 5), pos(7, 3)]).unwrap();
    let d = decompose_three_cycle(n, &distinct).unwrap();
    assert_eq!(d.case, DecompositionCase::W);
    assert!(d.word.len() <= MAX_W_LEN);
    assert_eq!(d.word.target(), &distinct);

    let shared = Perm::from_cycle(n, &[pos(2, 2), pos(2, 5), pos(7, 3)]).unwrap();
    let d = decompose_three_cycle(n, &shared).unwrap();
    assert_eq!(d.case, DecompositionCase::General);
    assert!(d.word.len() <= MAX_GENERAL_LEN);
    assert_eq!(d.word.target(), &shared);

    let with_top = Perm::from_cycle(n, &[pos(1, 1), pos(4, 5), pos(7, 3)]).unwrap();
    let d = decompose_three_cycle(n, &with_top).unwrap();
    assert_eq!(d.case, DecompositionCase::Z);
    assert_eq!(d.word.target(), &with_top);
}

#[test]
fn every_three_cycle_at_n6_decomposes() {
    let n = 6;
    let mut count = 0u64;
    for cycle in three_cycles(n) {
        let target = Perm::from_cycle(n, &cycle).unwrap();
        let d = decompose_three_cycle(n, &target).unwrap();
        assert_eq!(d.word.target(), &target);
        let ceiling = match d.case {
            DecompositionCase::Z => MAX_Z_LEN,
            DecompositionCase::W => MAX_W_LEN,
            _ => MAX_GENERAL_LEN,
        };
        assert!(
            d.word.len() <= ceiling,
            "{} has length {}",
            target,
            d.word.len()
        );
        // Occurrence counts partition the word.
        assert_eq!(d.word.occurrences().values().sum::<usize>(), d.word.len());
        count += 1;
    }
    assert_eq!(count, 2 * (36 * 35 * 34 / 6));
}

#[test]
fn comparison_constant_report() {
    let s0_6 = comparison_constant(6, FamilyTag::S0, Scheme::Explicit).unwrap();
    let s_6 = comparison_constant(6, FamilyTag::S, Scheme::Explicit).unwrap();
    assert_eq!(s_6.b, s0_6.b * Ratio::from_integer(2));
    assert!(s0_6.failures.is_empty());
    for n in [6, 8, 10] {
        let r = if n == 6 {
            s0_6.clone()
        } else {
            comparison_constant(n, FamilyTag::S0, Scheme::Explicit).unwrap()
        };
        assert!(r.max_support_distinct_lines <= 27 * (n as u64).pow(4));
        assert_eq!(r.three_cycles, 2 * binomial3(n * n));
        assert_eq!(r.length_histogram.values().sum::<u64>(), r.three_cycles);
        if n == 10 {
            let ratio = r.b_float / s0_6.b_float;
            assert!((0.25..=4.0).contains(&ratio), "B(10)/B(6) = {ratio}");
        }
    }
}

fn binomial3(m: usize) -> u64 {
    (m * (m - 1) * (m - 2) / 6) as u64
}

#[test]
fn geodesic_words_are_shortest_and_correct() {
    let n = 3;
    let c = Perm::from_cycle(n, &[pos(1, 1), pos(2, 2), pos(3, 3)]).unwrap();
    let w = geodesic_word(n, &c).unwrap();
    assert_eq!(w.target(), &c);
    let s0 = comparison_constant(n, FamilyTag::S0, Scheme::Geodesic).unwrap();
    let s = comparison_constant(n, FamilyTag::S, Scheme::Geodesic).unwrap();
    assert_eq!(s.b, s0.b * Ratio::from_integer(2));
}

fn sorted_eigenvalues(rows: Vec<Vec<f64>>) -> Vec<f64> {
    let order = rows.len();
    let m = DMatrix::from_fn(order, order, |r, c| rows[r][c]);
    // Both walks have inverse-closed uniform generators, so their kernels are symmetric.
    assert!((&m - m.transpose()).abs().max() < 1e-12);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}

fn drop_nearest(values: &mut Vec<f64>, target: f64) {
    let k = (0..values.len())
        .min_by(|&a, &b| {
            (values[a] - target)
                .abs()
                .partial_cmp(&(values[b] - target).abs())
                .unwrap()
        })
        .unwrap();
    values.remove(k);
}

#[test]
fn comparison_inequality_on_s4() {
    let r_walk = GroupKernel::symmetric(4, three_cycle_generators(4)).unwrap();
    let mut r_ev = sorted_eigenvalues(r_walk.dense_matrix().unwrap());
    // The two +1 eigenvalues: trivial and sign.
    r_ev.drain(..2);
    for tag in [FamilyTag::S0, FamilyTag::S] {
        let family = ShuffleFamily::new(tag, 2).unwrap();
        let walk = full_group_kernel(family).unwrap();
        assert_eq!(walk.order(), 24);
        let mut ev = sorted_eigenvalues(walk.dense_matrix().unwrap());
        let sign_mean: f64 = family
            .corner_moves()
            .unwrap()
            .iter()
            .map(|m| m.perm(2).unwrap().sign().value() as f64)
            .sum::<f64>()
            / family.generator_count() as f64;
        drop_nearest(&mut ev, 1.0);
        drop_nearest(&mut ev, sign_mean);
        let b = comparison_constant(2, tag, Scheme::Geodesic)
            .unwrap()
            .b_float;
        for (lr, ls) in r_ev.iter().zip(&ev) {
            assert!(
                1.0 - lr <= b * (1.0 - ls) + 1e-9,
                "{tag}: {lr} vs {ls} with B={b}"
            );
        }
    }
}
