//! One-jump transition kernels on ordered tuples of distinct cells.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{check_cap, domain, Result};
use crate::family::{FamilyTag, ShuffleFamily};

/// Default cap on the number of tuple states of a marginal kernel.
pub const DEFAULT_STATE_CAP: usize = 20_000;

/// Corner-move transitions allowed per permitted state, before duplicates are merged.
///
/// Every cell is moved by order `n^2` generators, so a state cap alone still lets
/// `k = 1` kernels for large `n` need gigabytes.
pub const TRANSITIONS_PER_STATE: u128 = 1000;

/// Ordered `k`-tuples of distinct cells out of `cells`, ranked lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleSpace {
    cells: usize,
    k: usize,
    size: usize,
}

impl TupleSpace {
    pub fn new(cells: usize, k: usize, cap: usize) -> Result<Self> {
        if k == 0 || k > cells {
            return Err(domain(format!(
                "tuple size must be in 1..={cells}, got {k}"
            )));
        }
        let mut size: u128 = 1;
        for i in 0..k {
            size = size.saturating_mul((cells - i) as u128);
            check_cap("tuple states", size, cap as u128)?;
        }
        Ok(Self {
            cells,
            k,
            size: size as usize,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Rank of a tuple of distinct cell indices.
    pub fn rank(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.k);
        let mut rank = 0;
        for (i, &v) in tuple.iter().enumerate() {
            let smaller_before = tuple[..i].iter().filter(|&&u| u < v).count();
            rank = rank * (self.cells - i) + (v - smaller_before);
        }
        rank
    }

    pub fn unrank(&self, mut rank: usize, out: &mut [usize]) {
        debug_assert_eq!(out.len(), self.k);
        let mut digits = vec![0; self.k];
        for i in (0..self.k).rev() {
            let radix = self.cells - i;
            digits[i] = rank % radix;
            rank /= radix;
        }
        let mut used: Vec<usize> = Vec::with_capacity(self.k);
        for i in 0..self.k {
            // The digit indexes the values not used earlier in the tuple.
            let mut v = digits[i];
            for &u in &used {
                if u <= v {
                    v += 1;
                }
            }
            out[i] = v;
            let at = used.partition_point(|&u| u < v);
            used.insert(at, v);
        }
    }

    pub fn tuple(&self, rank: usize) -> Vec<usize> {
        let mut out = vec![0; self.k];
        self.unrank(rank, &mut out);
        out
    }
}

/// Advancing distributions by one jump, for several vectors at once.
///
/// Vectors are interleaved: entry `b` of state `s` lives at `s * width + b`.
pub trait Propagate: Sync {
    fn states(&self) -> usize;

    /// Writes `y = x K` for each of the `width` interleaved row vectors in `x`.
    fn step(&self, x: &[f64], y: &mut [f64], width: usize);
}

/// A sparse stochastic kernel with integer counts over a common denominator.
#[derive(Debug, Clone)]
pub struct SparseKernel {
    family: ShuffleFamily,
    space: TupleSpace,
    row_ptr: Vec<usize>,
    targets: Vec<u32>,
    counts: Vec<u64>,
    probs: Vec<f64>,
    denominator: u64,
}

impl SparseKernel {
    pub fn family(&self) -> ShuffleFamily {
        self.family
    }

    pub fn space(&self) -> TupleSpace {
        self.space
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn nonzeros(&self) -> usize {
        self.targets.len()
    }

    /// Targets and generator counts of one row.
    pub fn row(&self, state: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let range = self.row_ptr[state]..self.row_ptr[state + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.counts[range])
            .map(|(&v, &c)| (v as usize, c))
    }

    /// Whether every row and every column sums to the denominator exactly.
    pub fn is_doubly_stochastic(&self) -> bool {
        let mut column = vec![0u64; self.states()];
        for u in 0..self.states() {
            let mut total = 0;
            for (v, c) in self.row(u) {
                total += c;
                column[v] += c;
            }
            if total != self.denominator {
                return false;
            }
        }
        column.iter().all(|&c| c == self.denominator)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.states()).all(|u| {
            self.row(u)
                .all(|(v, c)| self.row(v).any(|(w, d)| w == u && d == c))
        })
    }

    /// Exact distribution after exactly `jumps` jumps from `start`.
    pub fn exact_jump_distribution(&self, start: usize, jumps: usize) -> Result<Vec<BigRational>> {
        check_cap("states for exact arithmetic", self.states() as u128, 400)?;
        let denom = BigInt::from(self.denominator);
        let mut x = vec![BigRational::zero(); self.states()];
        x[start] = BigRational::from_integer(1.into());
        for _ in 0..jumps {
            let mut y = vec![BigRational::zero(); self.states()];
            for (u, mass) in x.iter().enumerate() {
                if mass.is_zero() {
                    continue;
                }
                for (v, c) in self.row(u) {
                    y[v] += mass * BigRational::new(BigInt::from(c), denom.clone());
                }
            }
            x = y;
        }
        Ok(x)
    }

    fn from_rows(
        family: ShuffleFamily,
        space: TupleSpace,
        denominator: u64,
        rows: Vec<Vec<(u32, u64)>>,
    ) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut targets = Vec::new();
        let mut counts = Vec::new();
        for mut row in rows {
            row.sort_unstable_by_key(|&(v, _)| v);
            let row_start = targets.len();
            for (v, c) in row {
                if targets.len() > row_start && targets.last() == Some(&v) {
                    *counts.last_mut().expect("nonempty") += c;
                } else {
                    targets.push(v);
                    counts.push(c);
                }
            }
            row_ptr.push(targets.len());
        }
        let probs = counts
            .iter()
            .map(|&c| c as f64 / denominator as f64)
            .collect();
        Self {
            family,
            space,
            row_ptr,
            targets,
            counts,
            probs,
            denominator,
        }
    }
}

impl Propagate for SparseKernel {
    fn states(&self) -> usize {
        self.space.size()
    }

    fn step(&self, x: &[f64], y: &mut [f64], width: usize) {
        y.fill(0.0);
        for u in 0..self.states() {
            let src = &x[u * width..(u + 1) * width];
            if src.iter().all(|&m| m == 0.0) {
                continue;
            }
            for idx in self.row_ptr[u]..self.row_ptr[u + 1] {
                let v = self.targets[idx] as usize;
                let p = self.probs[idx];
                let dst = &mut y[v * width..(v + 1) * width];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += p * s;
                }
            }
        }
    }
}

/// The one-jump kernel of `family` on ordered `k`-tuples of distinct cells.
pub fn marginal_kernel(family: ShuffleFamily, k: usize) -> Result<SparseKernel> {
    marginal_kernel_with_cap(family, k, DEFAULT_STATE_CAP)
}

pub fn marginal_kernel_with_cap(
    family: ShuffleFamily,
    k: usize,
    cap: usize,
) -> Result<SparseKernel> {
    let space = TupleSpace::new(family.cells(), k, cap)?;
    let rows = match family.tag {
        FamilyTag::S0 | FamilyTag::S => {
            check_cap(
                "corner-move transitions",
                space.size() as u128 * family.generator_count() as u128,
                cap as u128 * TRANSITIONS_PER_STATE,
            )?;
            corner_rows(family, space)?
        }
        FamilyTag::R => three_cycle_rows(space),
    };
    Ok(SparseKernel::from_rows(
        family,
        space,
        family.generator_count(),
        rows,
    ))
}

fn corner_rows(family: ShuffleFamily, space: TupleSpace) -> Result<Vec<Vec<(u32, u64)>>> {
    let n = family.n;
    let moves = family.corner_moves()?;
    let mut tuple = vec![0; space.k()];
    let mut image = vec![0; space.k()];
    Ok((0..space.size())
        .map(|u| {
            space.unrank(u, &mut tuple);
            moves
                .iter()
                .map(|m| {
                    for (dst, &src) in image.iter_mut().zip(&tuple) {
                        *dst = m.apply_index(n, src);
                    }
                    (space.rank(&image) as u32, 1)
                })
                .collect()
        })
        .collect())
}

/// Rows of the three-cycle kernel, counted by how many tuple cells a cycle moves.
fn three_cycle_rows(space: TupleSpace) -> Vec<Vec<(u32, u64)>> {
    let m = space.cells() as u64;
    let k = space.k();
    let free = m - k as u64;
    let fixing = if free >= 3 {
        free * (free - 1) * (free - 2) / 3
    } else {
        0
    };
    let mut tuple = vec![0; k];
    let mut image = vec![0; k];
    let mut in_tuple = vec![false; space.cells()];
    (0..space.size())
        .map(|u| {
            space.unrank(u, &mut tuple);
            for &c in &tuple {
                in_tuple[c] = true;
            }
            let outside: Vec<usize> = (0..space.cells()).filter(|&c| !in_tuple[c]).collect();
            let mut row = Vec::new();
            if fixing > 0 {
                row.push((u as u32, fixing));
            }
            // One tuple cell moves to an outside cell w; the third cell is any other outside cell.
            if free >= 2 {
                for i in 0..k {
                    for &w in &outside {
                        image.copy_from_slice(&tuple);
                        image[i] = w;
                        row.push((space.rank(&image) as u32, free - 1));
                    }
                }
            }
            // Cycle u_i -> u_j -> z -> u_i with z outside.
            for i in 0..k {
                for j in 0..k {
                    if i == j {
                        continue;
                    }
                    for &z in &outside {
                        image.copy_from_slice(&tuple);
                        image[i] = tuple[j];
                        image[j] = z;
                        row.push((space.rank(&image) as u32, 1));
                    }
                }
            }
            // Three tuple cells cycled among themselves, both orientations.
            for i in 0..k {
                for j in i + 1..k {
                    for l in j + 1..k {
                        for (a, b, c) in [(j, l, i), (l, i, j)] {
                            image.copy_from_slice(&tuple);
                            image[i] = tuple[a];
                            image[j] = tuple[b];
                            image[l] = tuple[c];
                            row.push((space.rank(&image) as u32, 1));
                        }
                    }
                }
            }
            for &c in &tuple {
                in_tuple[c] = false;
            }
            row
        })
        .collect()
}

/// One representative per class of equivalent starting tuples, with class sizes.
///
/// Two starts are equivalent when a symmetry of the generator set, combined with a
/// reordering of the tuple coordinates, maps one to the other; their distance curves
/// coincide. For `R` all starts are equivalent.
pub fn start_classes(family: ShuffleFamily, space: TupleSpace) -> Vec<(usize, usize)> {
    if family.tag == FamilyTag::R {
        return vec![(0, space.size())];
    }
    let symmetries = family.cell_symmetries();
    let orders = coordinate_orders(space.k());
    let mut representative = vec![usize::MAX; space.size()];
    let mut classes = Vec::new();
    let mut tuple = vec![0; space.k()];
    let mut image = vec![0; space.k()];
    for u in 0..space.size() {
        if representative[u] != usize::MAX {
            continue;
        }
        space.unrank(u, &mut tuple);
        let mut size = 0;
        for sym in &symmetries {
            for order in &orders {
                for (dst, &src) in image.iter_mut().zip(order) {
                    *dst = sym[tuple[src]];
                }
                let v = space.rank(&image);
                if representative[v] == usize::MAX {
                    representative[v] = u;
                    size += 1;
                }
            }
        }
        classes.push((u, size));
    }
    classes
}

fn coordinate_orders(k: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for c in 0..k {
            if !prefix.contains(&c) {
                prefix.push(c);
                extend(prefix, k, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), k, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Position;

    fn family(tag: FamilyTag, n: usize) -> ShuffleFamily {
        ShuffleFamily::new(tag, n).unwrap()
    }

    #[test]
    fn rank_round_trip_and_order() {
        let space = TupleSpace::new(7, 3, 1000).unwrap();
        assert_eq!(space.size(), 210);
        let mut previous: Option<Vec<usize>> = None;
        for r in 0..space.size() {
            let t = space.tuple(r);
            assert_eq!(space.rank(&t), r);
            if let Some(p) = previous {
                assert!(p < t, "lexicographic order");
            }
            previous = Some(t);
        }
    }

    #[test]
    fn cap_error_names_the_cap() {
        let err = TupleSpace::new(100, 3, DEFAULT_STATE_CAP).unwrap_err();
        assert!(err.to_string().contains("20000"), "{err}");
    }

    #[test]
    fn large_single_card_kernels_hit_the_transition_cap() {
        // 99^2 states fit the state cap, but each has 2 * 98^2 moves.
        let err = marginal_kernel(family(FamilyTag::S, 99), 1).unwrap_err();
        assert!(err.to_string().contains("corner-move transitions"), "{err}");
        assert!(marginal_kernel(family(FamilyTag::S, 40), 1).is_ok());
    }

    #[test]
    fn s_n2_k1_rows_are_counts_over_eight() {
        let n = 2;
        let kernel = marginal_kernel(family(FamilyTag::S, n), 1).unwrap();
        assert_eq!(kernel.denominator(), 8);
        let moves = family(FamilyTag::S, n).corner_moves().unwrap();
        for u in 0..4 {
            let mut expected = [0u64; 4];
            for m in &moves {
                expected[m.apply_index(n, u)] += 1;
            }
            let row: Vec<(usize, u64)> = kernel.row(u).collect();
            let want: Vec<(usize, u64)> = expected
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(v, &c)| (v, c))
                .collect();
            assert_eq!(row, want);
        }
    }

    #[test]
    fn top_element_reaches_every_cell() {
        for n in 2..6 {
            let kernel = marginal_kernel(family(FamilyTag::S, n), 1).unwrap();
            assert_eq!(kernel.row(0).count(), n * n);
        }
    }

    #[test]
    fn kernels_are_doubly_stochastic_and_symmetric() {
        for tag in [FamilyTag::S0, FamilyTag::S, FamilyTag::R] {
            for (n, k) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (4, 2)] {
                let kernel = marginal_kernel(family(tag, n), k).unwrap();
                assert!(kernel.is_doubly_stochastic(), "{tag} n={n} k={k}");
                assert!(kernel.is_symmetric(), "{tag} n={n} k={k}");
            }
        }
    }

    /// The combinatorial three-cycle rows against enumeration of every three-cycle.
    #[test]
    fn three_cycle_rows_match_enumeration() {
        for (n, k) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (3, 4)] {
            let m = n * n;
            let kernel = marginal_kernel(family(FamilyTag::R, n), k).unwrap();
            let space = kernel.space();
            let mut cycles = Vec::new();
            for a in 0..m {
                for b in a + 1..m {
                    for c in b + 1..m {
                        for (x, y, z) in [(a, b, c), (a, c, b)] {
                            let mut img: Vec<usize> = (0..m).collect();
                            img[x] = y;
                            img[y] = z;
                            img[z] = x;
                            cycles.push(img);
                        }
                    }
                }
            }
            for u in 0..space.size() {
                let t = space.tuple(u);
                let mut expected = std::collections::BTreeMap::new();
                for cyc in &cycles {
                    let img: Vec<usize> = t.iter().map(|&c| cyc[c]).collect();
                    *expected.entry(space.rank(&img)).or_insert(0u64) += 1;
                }
                let got: std::collections::BTreeMap<usize, u64> = kernel.row(u).collect();
                assert_eq!(got, expected, "n={n} k={k} u={u}");
            }
        }
    }

    #[test]
    fn s0_corner_cell_holds_unless_full_rotation() {
        let n = 4;
        let kernel = marginal_kernel(family(FamilyTag::S0, n), 1).unwrap();
        let corner = Position::new(n, n).unwrap().index(n);
        let stay: u64 = kernel
            .row(corner)
            .filter(|&(v, _)| v == corner)
            .map(|(_, c)| c)
            .sum();
        assert_eq!(stay, (n * n - 1) as u64);
    }

    #[test]
    fn start_classes_partition_the_states() {
        for tag in [FamilyTag::S0, FamilyTag::S, FamilyTag::R] {
            for (n, k) in [(3, 1), (4, 2), (3, 3)] {
                let f = family(tag, n);
                let space = TupleSpace::new(n * n, k, DEFAULT_STATE_CAP).unwrap();
                let classes = start_classes(f, space);
                let total: usize = classes.iter().map(|&(_, s)| s).sum();
                assert_eq!(total, space.size());
            }
        }
    }

    #[test]
    fn exact_rows_sum_to_one() {
        let kernel = marginal_kernel(family(FamilyTag::S, 3), 1).unwrap();
        let dist = kernel.exact_jump_distribution(0, 5).unwrap();
        let total: BigRational = dist.iter().sum();
        assert_eq!(total, BigRational::from_integer(1.into()));
    }
}
