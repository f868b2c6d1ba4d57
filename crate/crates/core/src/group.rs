//! Walks on a whole permutation group, for decks small enough to enumerate.

use rustc_hash::FxHashMap;

use crate::error::{check_cap, domain, Result};
use crate::family::{FamilyTag, ShuffleFamily};
use crate::kernel::Propagate;
use crate::transient::{transient_distribution, Distribution};

type CodeMap = FxHashMap<u64, u32>;

/// Largest number of points a group element may move (4 bits per point in a `u64`).
pub const MAX_GROUP_POINTS: usize = 16;

/// Largest group that will be enumerated.
pub const MAX_GROUP_ORDER: usize = 362_880;

/// Side length limit for full-deck computations on corner shuffles.
pub const MAX_FULL_SIDE: usize = 3;

fn encode(image: &[u8]) -> u64 {
    image
        .iter()
        .enumerate()
        .fold(0u64, |acc, (x, &y)| acc | (u64::from(y) << (4 * x)))
}

fn decode(code: u64, points: usize, out: &mut [u8]) {
    for (x, slot) in out.iter_mut().enumerate().take(points) {
        *slot = ((code >> (4 * x)) & 0xf) as u8;
    }
}

/// The random walk on a finite permutation group driven by a uniform generator multiset.
///
/// Element 0 is the identity. `successor(v, g)` is the element `v` followed by generator `g`.
#[derive(Debug, Clone)]
pub struct GroupKernel {
    points: usize,
    elements: Vec<u64>,
    index: CodeMap,
    generators: Vec<Vec<u8>>,
    successors: Vec<u32>,
}

impl GroupKernel {
    /// The group generated by `generators`, enumerated breadth-first from the identity.
    pub fn generated(points: usize, generators: Vec<Vec<u8>>) -> Result<Self> {
        Self::check_generators(points, &generators)?;
        let identity: Vec<u8> = (0..points as u8).collect();
        let mut elements = vec![encode(&identity)];
        let mut index = CodeMap::default();
        index.insert(elements[0], 0u32);
        let mut successors = Vec::new();
        let mut image = vec![0u8; points];
        let mut next = vec![0u8; points];
        let mut frontier = 0;
        while frontier < elements.len() {
            decode(elements[frontier], points, &mut image);
            for g in &generators {
                for (dst, &y) in next.iter_mut().zip(&image) {
                    *dst = g[y as usize];
                }
                let code = encode(&next);
                let id = match index.get(&code) {
                    Some(&id) => id,
                    None => {
                        check_cap(
                            "group order",
                            elements.len() as u128 + 1,
                            MAX_GROUP_ORDER as u128,
                        )?;
                        let id = elements.len() as u32;
                        index.insert(code, id);
                        elements.push(code);
                        id
                    }
                };
                successors.push(id);
            }
            frontier += 1;
        }
        Ok(Self {
            points,
            elements,
            index,
            generators,
            successors,
        })
    }

    /// The walk on all of `S_points`, whether or not the generators reach every element.
    pub fn symmetric(points: usize, generators: Vec<Vec<u8>>) -> Result<Self> {
        Self::check_generators(points, &generators)?;
        let order: u128 = (1..=points as u128).product();
        check_cap("group order", order, MAX_GROUP_ORDER as u128)?;
        let mut elements = Vec::with_capacity(order as usize);
        let mut current: Vec<u8> = (0..points as u8).collect();
        loop {
            elements.push(encode(&current));
            if !next_permutation(&mut current) {
                break;
            }
        }
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32))
            .collect();
        Self::finish(points, elements, index, generators)
    }

    fn check_generators(points: usize, generators: &[Vec<u8>]) -> Result<()> {
        if points == 0 || points > MAX_GROUP_POINTS {
            return Err(domain(format!(
                "group degree must be in 1..={MAX_GROUP_POINTS}"
            )));
        }
        if generators.is_empty() {
            return Err(domain("no generators"));
        }
        for g in generators {
            let mut seen = vec![false; points];
            if g.len() != points
                || g.iter().any(|&y| {
                    (y as usize) >= points || std::mem::replace(&mut seen[y as usize], true)
                })
            {
                return Err(domain("generator is not a permutation of the points"));
            }
        }
        // The gather step relies on the multiset being closed under inverses.
        let mut forward: Vec<Vec<u8>> = generators.to_vec();
        let mut inverses: Vec<Vec<u8>> = generators
            .iter()
            .map(|g| {
                let mut inv = vec![0u8; points];
                for (x, &y) in g.iter().enumerate() {
                    inv[y as usize] = x as u8;
                }
                inv
            })
            .collect();
        forward.sort();
        inverses.sort();
        if forward != inverses {
            return Err(domain("generator multiset is not closed under inverses"));
        }
        Ok(())
    }

    fn finish(
        points: usize,
        elements: Vec<u64>,
        index: CodeMap,
        generators: Vec<Vec<u8>>,
    ) -> Result<Self> {
        let mut successors = vec![0u32; elements.len() * generators.len()];
        let mut image = vec![0u8; points];
        let mut next = vec![0u8; points];
        for (v, &code) in elements.iter().enumerate() {
            decode(code, points, &mut image);
            for (gi, g) in generators.iter().enumerate() {
                for (dst, &y) in next.iter_mut().zip(&image) {
                    *dst = g[y as usize];
                }
                successors[v * generators.len() + gi] = *index
                    .get(&encode(&next))
                    .ok_or_else(|| domain("generators leave the enumerated set"))?;
            }
        }
        Ok(Self {
            points,
            elements,
            index,
            generators,
            successors,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn element(&self, idx: usize) -> Vec<u8> {
        let mut out = vec![0u8; self.points];
        decode(self.elements[idx], self.points, &mut out);
        out
    }

    pub fn index_of(&self, image: &[u8]) -> Option<usize> {
        if image.len() != self.points {
            return None;
        }
        self.index.get(&encode(image)).map(|&i| i as usize)
    }

    pub fn successor(&self, element: usize, generator: usize) -> usize {
        self.successors[element * self.generators.len() + generator] as usize
    }

    /// Dense one-jump transition matrix, rows indexed by the current element.
    pub fn dense_matrix(&self) -> Result<Vec<Vec<f64>>> {
        check_cap("dense matrix order", self.order() as u128, 5040)?;
        let weight = 1.0 / self.generators.len() as f64;
        let mut m = vec![vec![0.0; self.order()]; self.order()];
        for (v, row) in m.iter_mut().enumerate() {
            for g in 0..self.generators.len() {
                row[self.successor(v, g)] += weight;
            }
        }
        Ok(m)
    }
}

impl Propagate for GroupKernel {
    fn states(&self) -> usize {
        self.order()
    }

    fn step(&self, x: &[f64], y: &mut [f64], width: usize) {
        let gens = self.generators.len();
        let weight = 1.0 / gens as f64;
        if width == 1 {
            for (dst, succ) in y.iter_mut().zip(self.successors.chunks_exact(gens)) {
                *dst = succ.iter().map(|&u| x[u as usize]).sum::<f64>() * weight;
            }
            return;
        }
        for (v, dst) in y.chunks_exact_mut(width).enumerate() {
            dst.fill(0.0);
            for &u in &self.successors[v * gens..(v + 1) * gens] {
                let src = &x[u as usize * width..(u as usize + 1) * width];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += s;
                }
            }
            dst.iter_mut().for_each(|d| *d *= weight);
        }
    }
}

fn next_permutation(v: &mut [u8]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v
        .iter()
        .rposition(|&x| x > v[i])
        .expect("a larger element exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// The walk of a corner shuffle on the group its moves generate (`n ≤ 3`).
pub fn full_group_kernel(family: ShuffleFamily) -> Result<GroupKernel> {
    if family.tag == FamilyTag::R {
        return Err(domain("full-group kernels are built for S0 and S only"));
    }
    check_cap(
        "full-deck side length",
        family.n as u128,
        MAX_FULL_SIDE as u128,
    )?;
    let generators = family
        .corner_moves()?
        .into_iter()
        .map(|m| {
            m.perm(family.n)
                .map(|p| p.images().iter().map(|&y| y as u8).collect())
        })
        .collect::<Result<Vec<Vec<u8>>>>()?;
    GroupKernel::generated(family.cells(), generators)
}

/// The exact time-`t` law of the full deck, over the elements of the generated group.
pub fn full_group_distribution(kernel: &GroupKernel, t: f64, tol: f64) -> Result<Distribution> {
    transient_distribution(kernel, 0, t, tol)
}

/// All three-cycles of `points` points, each orientation once.
pub fn three_cycle_generators(points: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for a in 0..points {
        for b in a + 1..points {
            for c in b + 1..points {
                for (x, y, z) in [(a, b, c), (a, c, b)] {
                    let mut g: Vec<u8> = (0..points as u8).collect();
                    g[x] = y as u8;
                    g[y] = z as u8;
                    g[z] = x as u8;
                    out.push(g);
                }
            }
        }
    }
    out
}
