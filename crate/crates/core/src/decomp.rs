//! Words in the upper-left corner moves realizing every three-cycle of cells, and
//! the comparison constant `B` they induce between the corner shuffles and `R`.
//!
//! Building blocks, for a cell `(i, j)`:
//! - `X(i,j) = UL(i,j) UL(i−1,j) UL(i−2,j) UL(i−1,j)` when `i ≥ 3`, else `UL(i,j)`;
//! - `Y(i,j) = X(i,j) X(i,j−1) X(i,j−2) X(i,j−1)` when `j ≥ 3`, else `X(i,j)`;
//!   except that `X = Y = UL(i,j)` when both `i, j < 3`.
//!
//! `Y(i,j)` swaps `(i,j)` with the top cell `T = (1,1)` and, when `i, j ≥ 2`, also
//! swaps `(i,1)` with `(1,j)`. From these, `Z(p, q) = Y(p) Y(q) Y(p) Y(q)` is the
//! three-cycle `T → q → p → T` and `W(p, q, r) = Z(p, q) Z(q, r)` is `r → q → p → r`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_cap, domain, Error, Result};
use crate::family::{FamilyTag, ShuffleFamily};
use crate::group::{full_group_kernel, GroupKernel, MAX_FULL_SIDE};
use crate::perm::{CornerMove, Perm, Position};

/// Taxicab radius of the neighborhood searched for helper cells.
pub const HELPER_RADIUS: usize = 6;

/// Largest side length for exhaustive comparison-constant computations.
pub const MAX_EXHAUSTIVE_SIDE: usize = 10;

/// Word-length ceilings for each construction.
pub const MAX_X_LEN: usize = 4;
pub const MAX_Y_LEN: usize = 16;
pub const MAX_Z_LEN: usize = 64;
pub const MAX_W_LEN: usize = 128;
pub const MAX_GENERAL_LEN: usize = 640;

/// An ordered list of corner moves together with its left-to-right product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveWord {
    n: usize,
    moves: Vec<CornerMove>,
    target: Perm,
}

impl MoveWord {
    /// A word whose target is its computed product.
    pub fn from_moves(n: usize, moves: Vec<CornerMove>) -> Result<Self> {
        let target = Perm::from_moves(n, &moves)?;
        Ok(Self { n, moves, target })
    }

    /// A word that must multiply out to `target`.
    pub fn new(n: usize, moves: Vec<CornerMove>, target: Perm) -> Result<Self> {
        let product = Perm::from_moves(n, &moves)?;
        if product != target {
            return Err(Error::Verification(format!(
                "word multiplies to {product}, expected {target}"
            )));
        }
        Ok(Self { n, moves, target })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn moves(&self) -> &[CornerMove] {
        &self.moves
    }

    pub fn target(&self) -> &Perm {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// How often each move occurs in the word.
    pub fn occurrences(&self) -> BTreeMap<CornerMove, usize> {
        let mut out = BTreeMap::new();
        for m in &self.moves {
            *out.entry(*m).or_insert(0) += 1;
        }
        out
    }
}

impl fmt::Display for MoveWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, m) in self.moves.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

fn check_pivot(n: usize, i: usize, j: usize) -> Result<()> {
    CornerMove::ul(i, j).check(n).map(|_| ())
}

fn x_moves(i: usize, j: usize) -> Vec<CornerMove> {
    if i >= 3 {
        vec![
            CornerMove::ul(i, j),
            CornerMove::ul(i - 1, j),
            CornerMove::ul(i - 2, j),
            CornerMove::ul(i - 1, j),
        ]
    } else {
        vec![CornerMove::ul(i, j)]
    }
}

fn y_moves(i: usize, j: usize) -> Vec<CornerMove> {
    if i < 3 && j < 3 {
        vec![CornerMove::ul(i, j)]
    } else if j >= 3 {
        [j, j - 1, j - 2, j - 1]
            .into_iter()
            .flat_map(|col| x_moves(i, col))
            .collect()
    } else {
        x_moves(i, j)
    }
}

/// The word `X(i, j)`.
pub fn build_x(n: usize, i: usize, j: usize) -> Result<MoveWord> {
    check_pivot(n, i, j)?;
    MoveWord::from_moves(n, x_moves(i, j))
}

/// The word `Y(i, j)`; its target is the computed product.
pub fn build_y(n: usize, i: usize, j: usize) -> Result<MoveWord> {
    check_pivot(n, i, j)?;
    MoveWord::from_moves(n, y_moves(i, j))
}

/// The permutation `Y(i, j)` is claimed to equal: `(i,j) ↔ T`, plus `(i,1) ↔ (1,j)` when `i, j ≥ 2`.
pub fn y_claim(n: usize, cell: Position) -> Result<Perm> {
    cell.check(n)?;
    let mut image: Vec<usize> = (0..n * n).collect();
    let (top, x) = (Position::TOP.index(n), cell.index(n));
    image.swap(top, x);
    if cell.row() >= 2 && cell.col() >= 2 {
        let a = Position::new(cell.row(), 1)?.index(n);
        let b = Position::new(1, cell.col())?.index(n);
        image.swap(a, b);
    }
    Perm::from_images(n, image)
}

fn check_distinct_lines(cells: &[Position]) -> Result<()> {
    for (k, p) in cells.iter().enumerate() {
        if *p == Position::TOP {
            return Err(domain(format!("cell {p} may not be the top cell")));
        }
        for q in &cells[k + 1..] {
            if p.row() == q.row() || p.col() == q.col() {
                return Err(domain(format!("cells {p} and {q} share a row or a column")));
            }
        }
    }
    Ok(())
}

fn z_cells(p1: Position, p2: Position) -> [Position; 4] {
    [p1, p2, p1, p2]
}

fn w_cells(p1: Position, p2: Position, p3: Position) -> [Position; 8] {
    [p1, p2, p1, p2, p2, p3, p2, p3]
}

fn expand(cells: &[Position]) -> Vec<CornerMove> {
    cells
        .iter()
        .flat_map(|c| y_moves(c.row(), c.col()))
        .collect()
}

/// `Z(p1, p2)`: the three-cycle `T → p2 → p1 → T`.
pub fn build_z(n: usize, p1: Position, p2: Position) -> Result<MoveWord> {
    p1.check(n)?;
    p2.check(n)?;
    check_distinct_lines(&[p1, p2])?;
    let target = Perm::from_cycle(n, &[Position::TOP, p2, p1])?;
    MoveWord::new(n, expand(&z_cells(p1, p2)), target)
}

/// `W(p1, p2, p3)`: the three-cycle `p3 → p2 → p1 → p3`.
pub fn build_w(n: usize, p1: Position, p2: Position, p3: Position) -> Result<MoveWord> {
    for p in [p1, p2, p3] {
        p.check(n)?;
    }
    check_distinct_lines(&[p1, p2, p3])?;
    let target = Perm::from_cycle(n, &[p3, p2, p1])?;
    MoveWord::new(n, expand(&w_cells(p1, p2, p3)), target)
}

/// Which construction a three-cycle decomposition uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompositionCase {
    /// Distinct rows and columns, one cell is `T`.
    Z,
    /// Distinct rows and columns, no cell is `T`.
    W,
    /// A shared row or column: five `W` factors around two helper cells.
    General,
    /// Shortest word found by breadth-first search.
    Geodesic,
}

impl fmt::Display for DecompositionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecompositionCase::Z => "z",
            DecompositionCase::W => "w",
            DecompositionCase::General => "general",
            DecompositionCase::Geodesic => "geodesic",
        })
    }
}

/// A decomposition expressed as a sequence of `Y` blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BlockPlan {
    case: DecompositionCase,
    blocks: Vec<Position>,
    helpers: Option<(Position, Position)>,
}

/// A verified word for a three-cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub case: DecompositionCase,
    pub word: MoveWord,
    /// The helper cells `d`, `e` of the general construction.
    pub helpers: Option<(Position, Position)>,
}

/// `W(p, d, e)`, or the equal three-cycle `Z(d, e)` when `p` is the top cell.
fn w_or_z(p: Position, d: Position, e: Position) -> Vec<Position> {
    if p == Position::TOP {
        z_cells(d, e).to_vec()
    } else {
        w_cells(p, d, e).to_vec()
    }
}

/// Candidate helper cells: within taxicab distance `HELPER_RADIUS` of some cycle cell,
/// off every row and column of the cycle, and not `T`; in row-major order.
fn helper_candidates(n: usize, cycle: &[Position; 3]) -> Vec<Position> {
    Position::all(n)
        .filter(|&p| {
            p != Position::TOP
                && cycle
                    .iter()
                    .all(|c| c.row() != p.row() && c.col() != p.col())
                && cycle.iter().any(|c| c.taxicab(p) <= HELPER_RADIUS)
        })
        .collect()
}

/// The first pair `d < e` (row-major) of candidates in distinct rows and columns.
fn helper_pair(n: usize, cycle: &[Position; 3]) -> Option<(Position, Position)> {
    let candidates = helper_candidates(n, cycle);
    candidates.iter().enumerate().find_map(|(k, &d)| {
        candidates[k + 1..]
            .iter()
            .find(|e| e.row() != d.row() && e.col() != d.col())
            .map(|&e| (d, e))
    })
}

fn distinct_lines(cells: &[Position; 3]) -> bool {
    let [a, b, c] = cells;
    a.row() != b.row()
        && a.row() != c.row()
        && b.row() != c.row()
        && a.col() != b.col()
        && a.col() != c.col()
        && b.col() != c.col()
}

/// Plans the decomposition of the cycle `a → x → y → a`.
fn plan(n: usize, cycle: [Position; 3]) -> Result<Vec<BlockPlan>> {
    let [a, x, y] = cycle;
    if distinct_lines(&cycle) {
        if let Some(k) = cycle.iter().position(|&p| p == Position::TOP) {
            // T → p → q → T is Z(q, p); the other orientation is offered as a fallback.
            let (p, q) = (cycle[(k + 1) % 3], cycle[(k + 2) % 3]);
            return Ok(vec![
                BlockPlan {
                    case: DecompositionCase::Z,
                    blocks: z_cells(q, p).to_vec(),
                    helpers: None,
                },
                BlockPlan {
                    case: DecompositionCase::Z,
                    blocks: z_cells(p, q).to_vec(),
                    helpers: None,
                },
            ]);
        }
        // W(p1, p2, p3) is p1 → p3 → p2 → p1.
        return Ok(vec![BlockPlan {
            case: DecompositionCase::W,
            blocks: w_cells(a, y, x).to_vec(),
            helpers: None,
        }]);
    }
    let (d, e) = helper_pair(n, &cycle).ok_or_else(|| Error::Infeasible {
        n,
        cycle: format!("{a}->{x}->{y}"),
    })?;
    // W_ade W_bde W_cde W_ade W_bde is a → c → b → a.
    let (b, c) = (y, x);
    let blocks = [a, b, c, a, b]
        .into_iter()
        .flat_map(|p| w_or_z(p, d, e))
        .collect();
    Ok(vec![BlockPlan {
        case: DecompositionCase::General,
        blocks,
        helpers: Some((d, e)),
    }])
}

fn cycle_of(c: &Perm) -> Result<[Position; 3]> {
    c.three_cycle()
        .ok_or_else(|| domain(format!("{c} is not a three-cycle")))
}

/// Decomposes a three-cycle of cells into upper-left corner moves.
pub fn decompose_three_cycle(n: usize, c: &Perm) -> Result<Decomposition> {
    if c.n() != n {
        return Err(domain("three-cycle has the wrong side length"));
    }
    let cycle = cycle_of(c)?;
    let mut last_error = None;
    for candidate in plan(n, cycle)? {
        match MoveWord::new(n, expand(&candidate.blocks), c.clone()) {
            Ok(word) => {
                return Ok(Decomposition {
                    case: candidate.case,
                    word,
                    helpers: candidate.helpers,
                })
            }
            Err(e) => last_error = Some(e),
        }
    }
    Err(last_error.unwrap_or_else(|| Error::Verification("no candidate word".into())))
}

/// Every three-cycle of the `n²` cells as `[a, x, y]` with `a → x → y → a`, `a` smallest.
pub fn three_cycles(n: usize) -> impl Iterator<Item = [Position; 3]> {
    let m = n * n;
    (0..m).flat_map(move |a| {
        (a + 1..m).flat_map(move |b| {
            (b + 1..m).flat_map(move |c| {
                let p = |x| Position::from_index(n, x);
                [[p(a), p(b), p(c)], [p(a), p(c), p(b)]]
            })
        })
    })
}

/// How words for three-cycles are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// The `Z`/`W`/general constructions.
    Explicit,
    /// Shortest words in the upper-left moves, by breadth-first search (`n ≤ 3`).
    Geodesic,
}

/// Tally of an exhaustive decomposition pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseStats {
    pub count: u64,
    pub max_len: usize,
}

/// A three-cycle whose decomposition failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionFailure {
    pub cycle: String,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
}

/// The comparison constant and the bookkeeping behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n: usize,
    pub family: FamilyTag,
    pub scheme: Scheme,
    /// `|A1| / |A2| · max_σ Σ_π |π| N(σ, π)`, exact.
    #[serde(with = "ratio_string")]
    pub b: Ratio<u128>,
    pub b_float: f64,
    /// `max_σ Σ_π |π| N(σ, π)`.
    pub max_weighted_occurrences: u64,
    /// The move attaining that maximum.
    pub argmax_move: String,
    /// `max_σ #{π with distinct rows and columns : N(σ, π) > 0}`.
    pub max_support_distinct_lines: u64,
    /// `27 n⁴`.
    pub support_ceiling: u64,
    pub three_cycles: u64,
    pub generators: u64,
    pub cases: BTreeMap<DecompositionCase, CaseStats>,
    /// Number of words of each length.
    pub length_histogram: BTreeMap<usize, u64>,
    pub failures: Vec<DecompositionFailure>,
}

mod ratio_string {
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio<u128>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<u128>, D::Error> {
        let s = String::deserialize(d)?;
        let (num, den) = s
            .split_once('/')
            .ok_or_else(|| serde::de::Error::custom("expected a/b"))?;
        let parse = |v: &str| v.parse::<u128>().map_err(serde::de::Error::custom);
        let den = parse(den)?;
        if den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Ratio::new(parse(num)?, den))
    }
}

/// Per-cycle output of a decomposition pass: word length, per-generator occurrence
/// counts, and the case.
struct WordSummary {
    case: DecompositionCase,
    len: usize,
    occurrences: Vec<(usize, u64)>,
}

/// Source of words for every three-cycle.
trait WordSource: Sync {
    fn summarize(
        &self,
        cycle: [Position; 3],
    ) -> std::result::Result<WordSummary, DecompositionFailure>;
}

/// The explicit constructions, checked at the level of `Y` blocks.
struct ExplicitSource {
    n: usize,
    /// For each cell, the `Y` word's length and per-generator counts.
    y_counts: Vec<(usize, Vec<(usize, u64)>)>,
    /// For each cell, the swaps `Y` performs.
    y_swaps: Vec<Vec<(usize, usize)>>,
}

impl ExplicitSource {
    fn new(n: usize) -> Result<Self> {
        let mut y_counts = Vec::with_capacity(n * n);
        let mut y_swaps = Vec::with_capacity(n * n);
        for cell in Position::all(n) {
            let word = build_y(n, cell.row(), cell.col())?;
            let claim = y_claim(n, cell)?;
            if *word.target() != claim {
                return Err(Error::Verification(format!(
                    "Y{cell} multiplies to {}, expected {claim}",
                    word.target()
                )));
            }
            let counts = word
                .occurrences()
                .into_iter()
                .map(|(m, c)| (CornerMove::ul(m.i, m.j).index_in_upper_left(n), c as u64))
                .collect();
            y_counts.push((word.len(), counts));
            y_swaps.push(claim.cycles().into_iter().map(|c| (c[0], c[1])).collect());
        }
        Ok(Self {
            n,
            y_counts,
            y_swaps,
        })
    }

    /// Multiplies the blocks out by tracking which card sits in each touched cell.
    fn verify(&self, blocks: &[Position], cycle: &[Position; 3]) -> bool {
        let n = self.n;
        let mut cards: BTreeMap<usize, usize> = BTreeMap::new();
        for b in blocks {
            for &(x, y) in &self.y_swaps[b.index(n)] {
                let cx = *cards.get(&x).unwrap_or(&x);
                let cy = *cards.get(&y).unwrap_or(&y);
                cards.insert(x, cy);
                cards.insert(y, cx);
            }
        }
        // The card from cycle[r] must now sit at cycle[r + 1]; every other cell is restored.
        let idx: Vec<usize> = cycle.iter().map(|p| p.index(n)).collect();
        cards
            .iter()
            .all(|(&cell, &card)| match idx.iter().position(|&c| c == cell) {
                Some(r) => card == idx[(r + 2) % 3],
                None => card == cell,
            })
            && idx.iter().all(|c| cards.contains_key(c))
    }
}

impl WordSource for ExplicitSource {
    fn summarize(
        &self,
        cycle: [Position; 3],
    ) -> std::result::Result<WordSummary, DecompositionFailure> {
        let label = || format!("{}->{}->{}", cycle[0], cycle[1], cycle[2]);
        let plans = plan(self.n, cycle).map_err(|e| DecompositionFailure {
            cycle: label(),
            reason: e.to_string(),
            word: None,
        })?;
        let chosen = plans
            .iter()
            .find(|p| self.verify(&p.blocks, &cycle))
            .ok_or_else(|| DecompositionFailure {
                cycle: label(),
                reason: "word does not multiply to the cycle".into(),
                word: Some(
                    plans[0]
                        .blocks
                        .iter()
                        .map(|b| format!("Y{b}"))
                        .collect::<Vec<_>>()
                        .join(" "),
                ),
            })?;
        let mut occurrences: BTreeMap<usize, u64> = BTreeMap::new();
        let mut len = 0;
        for b in &chosen.blocks {
            let (l, counts) = &self.y_counts[b.index(self.n)];
            len += l;
            for &(g, c) in counts {
                *occurrences.entry(g).or_insert(0) += c;
            }
        }
        Ok(WordSummary {
            case: chosen.case,
            len,
            occurrences: occurrences.into_iter().collect(),
        })
    }
}

impl CornerMove {
    /// Row-major index of an upper-left move among the `n²` such moves.
    fn index_in_upper_left(self, n: usize) -> usize {
        (self.i - 1) * n + (self.j - 1)
    }
}

/// Shortest words in the upper-left moves, read off a breadth-first search tree.
struct GeodesicSource {
    n: usize,
    group: GroupKernel,
    parent: Vec<(u32, u8)>,
}

impl GeodesicSource {
    fn new(n: usize) -> Result<Self> {
        check_cap("geodesic side length", n as u128, MAX_FULL_SIDE as u128)?;
        let group = full_group_kernel(ShuffleFamily::new(FamilyTag::S0, n)?)?;
        let mut parent = vec![(u32::MAX, 0u8); group.order()];
        parent[0] = (0, 0);
        // Element indices follow the order of discovery, so this rebuilds the search tree.
        for v in 0..group.order() {
            for g in 0..group.generator_count() {
                let w = group.successor(v, g);
                if w != 0 && parent[w].0 == u32::MAX {
                    parent[w] = (v as u32, g as u8);
                }
            }
        }
        Ok(Self { n, group, parent })
    }

    fn word(&self, cycle: &[Position; 3]) -> Option<Vec<usize>> {
        let n = self.n;
        let mut image: Vec<u8> = (0..(n * n) as u8).collect();
        for r in 0..3 {
            image[cycle[r].index(n)] = cycle[(r + 1) % 3].index(n) as u8;
        }
        let mut v = self.group.index_of(&image)?;
        let mut gens = Vec::new();
        while v != 0 {
            let (p, g) = self.parent[v];
            gens.push(g as usize);
            v = p as usize;
        }
        gens.reverse();
        Some(gens)
    }
}

impl WordSource for GeodesicSource {
    fn summarize(
        &self,
        cycle: [Position; 3],
    ) -> std::result::Result<WordSummary, DecompositionFailure> {
        let gens = self.word(&cycle).ok_or_else(|| DecompositionFailure {
            cycle: format!("{}->{}->{}", cycle[0], cycle[1], cycle[2]),
            reason: "three-cycle not generated by the upper-left moves".into(),
            word: None,
        })?;
        let mut occurrences: BTreeMap<usize, u64> = BTreeMap::new();
        for &g in &gens {
            *occurrences.entry(g).or_insert(0) += 1;
        }
        Ok(WordSummary {
            case: DecompositionCase::Geodesic,
            len: gens.len(),
            occurrences: occurrences.into_iter().collect(),
        })
    }
}

/// The shortest word for a three-cycle (`n ≤ 3`), as a verified [`MoveWord`].
pub fn geodesic_word(n: usize, c: &Perm) -> Result<MoveWord> {
    let source = GeodesicSource::new(n)?;
    let cycle = cycle_of(c)?;
    let gens = source.word(&cycle).ok_or_else(|| Error::Infeasible {
        n,
        cycle: c.to_string(),
    })?;
    let moves = gens
        .into_iter()
        .map(|g| CornerMove::ul(g / n + 1, g % n + 1))
        .collect();
    MoveWord::new(n, moves, c.clone())
}

/// Runs a decomposition scheme over every three-cycle and collects the report,
/// including failures, without erroring on them.
pub fn survey(n: usize, family: FamilyTag, scheme: Scheme) -> Result<ComparisonReport> {
    survey_with_cap(n, family, scheme, MAX_EXHAUSTIVE_SIDE)
}

/// [`survey`] with an explicit limit on the side length.
pub fn survey_with_cap(
    n: usize,
    family: FamilyTag,
    scheme: Scheme,
    side_cap: usize,
) -> Result<ComparisonReport> {
    if family == FamilyTag::R {
        return Err(domain("the comparison constant compares S0 or S against R"));
    }
    let family = ShuffleFamily::new(family, n)?;
    if n < 2 {
        return Err(domain("three-cycles need n >= 2"));
    }
    check_cap("exhaustive side length", n as u128, side_cap as u128)?;
    let source: Box<dyn WordSource> = match scheme {
        Scheme::Explicit => Box::new(ExplicitSource::new(n)?),
        Scheme::Geodesic => Box::new(GeodesicSource::new(n)?),
    };
    let cycles: Vec<[Position; 3]> = three_cycles(n).collect();
    let moves = n * n;

    struct Partial {
        weighted: Vec<u64>,
        support: Vec<u64>,
        cases: BTreeMap<DecompositionCase, CaseStats>,
        histogram: BTreeMap<usize, u64>,
        failures: Vec<DecompositionFailure>,
    }
    let empty = || Partial {
        weighted: vec![0; moves],
        support: vec![0; moves],
        cases: BTreeMap::new(),
        histogram: BTreeMap::new(),
        failures: Vec::new(),
    };
    let partials: Vec<Partial> = cycles
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = empty();
            for &cycle in chunk {
                match source.summarize(cycle) {
                    Ok(summary) => {
                        let stats = acc.cases.entry(summary.case).or_insert(CaseStats {
                            count: 0,
                            max_len: 0,
                        });
                        stats.count += 1;
                        stats.max_len = stats.max_len.max(summary.len);
                        *acc.histogram.entry(summary.len).or_insert(0) += 1;
                        let lines = distinct_lines(&cycle);
                        for (g, c) in summary.occurrences {
                            acc.weighted[g] += summary.len as u64 * c;
                            if lines {
                                acc.support[g] += 1;
                            }
                        }
                    }
                    Err(failure) => acc.failures.push(failure),
                }
            }
            acc
        })
        .collect();

    let mut total = empty();
    for p in partials {
        for g in 0..moves {
            total.weighted[g] += p.weighted[g];
            total.support[g] += p.support[g];
        }
        for (case, stats) in p.cases {
            let t = total.cases.entry(case).or_insert(CaseStats {
                count: 0,
                max_len: 0,
            });
            t.count += stats.count;
            t.max_len = t.max_len.max(stats.max_len);
        }
        for (len, c) in p.histogram {
            *total.histogram.entry(len).or_insert(0) += c;
        }
        total.failures.extend(p.failures);
    }

    let (argmax, &max_weighted) = total
        .weighted
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("at least one move");
    let generators = family.generator_count();
    let three_cycles = cycles.len() as u64;
    let b = Ratio::new(
        generators as u128 * max_weighted as u128,
        three_cycles as u128,
    );
    let n4 = (n as u64).pow(4);
    Ok(ComparisonReport {
        n,
        family: family.tag,
        scheme,
        b_float: *b.numer() as f64 / *b.denom() as f64,
        b,
        max_weighted_occurrences: max_weighted,
        argmax_move: CornerMove::ul(argmax / n + 1, argmax % n + 1).to_string(),
        max_support_distinct_lines: total.support.iter().copied().max().unwrap_or(0),
        support_ceiling: 27 * n4,
        three_cycles,
        generators,
        cases: total.cases,
        length_histogram: total.histogram,
        failures: total.failures,
    })
}

/// The comparison constant `B`; fails if any three-cycle has no word.
pub fn comparison_constant(
    n: usize,
    family: FamilyTag,
    scheme: Scheme,
) -> Result<ComparisonReport> {
    comparison_constant_with_cap(n, family, scheme, MAX_EXHAUSTIVE_SIDE)
}

/// [`comparison_constant`] with an explicit limit on the side length.
pub fn comparison_constant_with_cap(
    n: usize,
    family: FamilyTag,
    scheme: Scheme,
    side_cap: usize,
) -> Result<ComparisonReport> {
    let report = survey_with_cap(n, family, scheme, side_cap)?;
    if let Some(first) = report.failures.first() {
        return Err(Error::Infeasible {
            n,
            cycle: format!(
                "{} ({} failures in total)",
                first.cycle,
                report.failures.len()
            ),
        });
    }
    Ok(report)
}
