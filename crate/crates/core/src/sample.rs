//! Monte Carlo sampling of the Poissonized shuffles.
//!
//! Replicate `r` of a run with seed `s` draws from ChaCha8 seeded with `s` on stream
//! `r`, so results do not depend on how replicates are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Poisson};
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::family::{FamilyTag, ShuffleFamily};
use crate::perm::{CornerMove, Perm};

/// One step of a shuffle: a corner rotation or a three-cycle `a → b → c → a` of cell indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Corner(CornerMove),
    Cycle([usize; 3]),
}

impl Generator {
    #[inline]
    pub fn apply_index(self, n: usize, x: usize) -> usize {
        match self {
            Generator::Corner(m) => m.apply_index(n, x),
            Generator::Cycle([a, b, c]) => {
                if x == a {
                    b
                } else if x == b {
                    c
                } else if x == c {
                    a
                } else {
                    x
                }
            }
        }
    }
}

/// The RNG of replicate `rep` under `seed`.
pub fn replicate_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Draws a generator uniformly from the family's generator multiset.
pub fn sample_generator(family: ShuffleFamily, rng: &mut impl Rng) -> Generator {
    let n = family.n;
    let m = family.cells();
    match family.tag {
        FamilyTag::S0 => {
            let x = rng.gen_range(0..m);
            Generator::Corner(CornerMove::ul(x / n + 1, x % n + 1))
        }
        FamilyTag::S => {
            let x = rng.gen_range(0..2 * m);
            let (i, j) = ((x % m) / n + 1, x % n + 1);
            Generator::Corner(if x < m {
                CornerMove::ul(i, j)
            } else {
                CornerMove::lr(i, j)
            })
        }
        FamilyTag::R => {
            let a = rng.gen_range(0..m);
            let mut b = rng.gen_range(0..m - 1);
            if b >= a {
                b += 1;
            }
            let mut c = rng.gen_range(0..m - 2);
            for used in [a.min(b), a.max(b)] {
                if c >= used {
                    c += 1;
                }
            }
            Generator::Cycle([a, b, c])
        }
    }
}

fn poisson_count(mean: f64, rng: &mut impl Rng) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| domain(format!("Poisson({mean}): {e}")))?;
    Ok(dist.sample(rng) as u64)
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "time must be finite and nonnegative, got {t}"
        )))
    }
}

/// A draw of the time-`t` permutation: Poisson(`t`) uniform generators, composed in order.
pub fn sample_trajectory(family: ShuffleFamily, t: f64, seed: u64) -> Result<Perm> {
    check_time(t)?;
    let mut rng = replicate_rng(seed, 0);
    let jumps = poisson_count(t, &mut rng)?;
    let n = family.n;
    let mut image: Vec<usize> = (0..family.cells()).collect();
    for _ in 0..jumps {
        let g = sample_generator(family, &mut rng);
        image.iter_mut().for_each(|y| *y = g.apply_index(n, *y));
    }
    Perm::from_images(n, image)
}

/// Positions of the cards starting at the cells in `start`, observed at each of the
/// nondecreasing `times`, for each replicate. Indexed `[time][replicate][card]`.
pub fn track_cards(
    family: ShuffleFamily,
    start: &[usize],
    times: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<Vec<Vec<usize>>>> {
    for &t in times {
        check_time(t)?;
    }
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(domain("observation times must be nondecreasing"));
    }
    if start.iter().any(|&c| c >= family.cells()) {
        return Err(domain("start cell out of range"));
    }
    let n = family.n;
    let per_rep: Vec<Vec<Vec<usize>>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(seed, rep);
            let mut cards = start.to_vec();
            let mut now = 0.0;
            let mut seen = Vec::with_capacity(times.len());
            for &t in times {
                let jumps = poisson_count(t - now, &mut rng)?;
                for _ in 0..jumps {
                    let g = sample_generator(family, &mut rng);
                    cards.iter_mut().for_each(|c| *c = g.apply_index(n, *c));
                }
                now = t;
                seen.push(cards.clone());
            }
            Ok(seen)
        })
        .collect::<Result<_>>()?;
    Ok((0..times.len())
        .map(|q| per_rep.iter().map(|rep| rep[q].clone()).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_zero_is_identity() {
        for tag in [FamilyTag::S0, FamilyTag::S, FamilyTag::R] {
            let f = ShuffleFamily::new(tag, 4).unwrap();
            assert!(sample_trajectory(f, 0.0, 7).unwrap().is_identity());
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let f = ShuffleFamily::new(FamilyTag::S, 5).unwrap();
        assert_eq!(
            sample_trajectory(f, 9.0, 3).unwrap(),
            sample_trajectory(f, 9.0, 3).unwrap()
        );
        let a = track_cards(f, &[0, 1], &[1.0, 4.0], 50, 11).unwrap();
        let b = track_cards(f, &[0, 1], &[1.0, 4.0], 50, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn three_cycles_are_uniform_over_ordered_triples() {
        let f = ShuffleFamily::new(FamilyTag::R, 2).unwrap();
        let mut counts = std::collections::HashMap::new();
        let mut rng = replicate_rng(1, 0);
        let draws = 48_000;
        for _ in 0..draws {
            let Generator::Cycle(c) = sample_generator(f, &mut rng) else {
                panic!("R draws cycles")
            };
            assert!(c[0] != c[1] && c[1] != c[2] && c[0] != c[2]);
            *counts.entry(c).or_insert(0) += 1;
        }
        // 24 ordered triples, each twice per distinct 3-cycle; expected 2000 each.
        assert_eq!(counts.len(), 24);
        for &c in counts.values() {
            assert!((c as f64 - 2000.0).abs() < 5.0 * 2000f64.sqrt(), "{c}");
        }
    }

    #[test]
    fn rejects_bad_times() {
        let f = ShuffleFamily::new(FamilyTag::S, 3).unwrap();
        assert!(sample_trajectory(f, -1.0, 0).is_err());
        assert!(track_cards(f, &[0], &[2.0, 1.0], 5, 0).is_err());
    }
}
