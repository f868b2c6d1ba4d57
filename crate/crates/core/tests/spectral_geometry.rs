use cornershuffle::family::{FamilyTag, ShuffleFamily};
use cornershuffle::geometry::{jump_set, jump_set_formula, min_common_jump, min_rate_into, Region};
use cornershuffle::partition::partitions;
use cornershuffle::spectral::{
    alternating_mean_sign, applicable_bounds, dimension, ingram_r, mn_character, r_spectrum, r_walk,
};
use cornershuffle::{Partition, Position};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive};

#[test]
fn closed_form_matches_border_strip_recursion() {
    for m in 3..=10 {
        let class = Partition::three_cycle_class(m).unwrap();
        for p in partitions(m).unwrap() {
            let chi = mn_character(&p, &class).unwrap();
            let product =
                ingram_r(&p).unwrap() * BigRational::from_integer(BigInt::from(dimension(&p)));
            assert_eq!(product, BigRational::from_integer(chi), "{p}");
        }
    }
}

#[test]
fn conjugate_shapes_share_dimension_and_ratio() {
    for m in 3..=14 {
        for p in partitions(m).unwrap() {
            let q = p.conjugate();
            assert_eq!(dimension(&p), dimension(&q));
            assert_eq!(ingram_r(&p).unwrap(), ingram_r(&q).unwrap());
        }
    }
}

#[test]
fn every_applicable_bound_holds() {
    for m in 3..=14 {
        for p in partitions(m).unwrap() {
            if p == Partition::trivial(m) || p == Partition::alternating(m) {
                continue;
            }
            let bounds = applicable_bounds(&p).unwrap();
            assert!(!bounds.is_empty(), "{p}");
            assert!(bounds.iter().all(|b| b.holds), "{p}");
        }
    }
}

#[test]
fn spectrum_matches_dense_eigenvalues_for_s4() {
    let walk = r_walk(4).unwrap();
    let rows = walk.dense_matrix().unwrap();
    let matrix = DMatrix::from_fn(24, 24, |r, c| rows[r][c]);
    let mut eigen: Vec<f64> = matrix
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigen.sort_by(f64::total_cmp);
    let mut expected = Vec::new();
    for entry in r_spectrum(4).unwrap() {
        let r = entry.r.to_f64().unwrap();
        for _ in 0..entry.multiplicity.to_usize().unwrap() {
            expected.push(r);
        }
    }
    expected.sort_by(f64::total_cmp);
    assert_eq!(eigen.len(), expected.len());
    for (a, b) in eigen.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn sign_eigenvalue_of_s() {
    for n in 4..=16 {
        let value = alternating_mean_sign(ShuffleFamily::new(FamilyTag::S, n).unwrap()).unwrap();
        assert!(value <= Ratio::new(3, 4), "n={n}: {value}");
    }
    assert_eq!(
        alternating_mean_sign(ShuffleFamily::new(FamilyTag::R, 4).unwrap()).unwrap(),
        Ratio::one()
    );
}

#[test]
fn jump_set_formula_agrees_with_enumeration() {
    for n in 1..=12 {
        for p in Position::all(n) {
            assert_eq!(
                jump_set(n, p).unwrap().targets(n),
                jump_set_formula(n, p).unwrap(),
                "n={n} {p}"
            );
        }
    }
}

#[test]
fn corner_rates_and_overlaps() {
    for n in [6usize, 9, 12] {
        let (rate, _) = min_rate_into(n, &Region::Corners).unwrap();
        assert!(rate >= Ratio::new(1, 3 * n as u64));
        let (common, (a, b)) = min_common_jump(n, &Region::Corners).unwrap();
        assert!(9 * common >= n * n);
        assert!(Region::Corners.contains(n, a) && Region::Corners.contains(n, b));
        // Shrinking the region cannot lower the minimum.
        let (upper, _) = min_common_jump(n, &Region::UpperCorner).unwrap();
        assert!(upper >= common);
    }
}
