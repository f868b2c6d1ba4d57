//! Where a single card can go in one move of `S`, and how large those sets are
//! over the two far corners of the array.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::family::{FamilyTag, ShuffleFamily};
use crate::perm::Position;

/// A set of cells described by a rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// `i, j ≤ ⌊n/3⌋`.
    UpperCorner,
    /// `i, j ≥ ⌈2n/3⌉`.
    LowerCorner,
    /// The union of the two corners.
    Corners,
    /// Rows `top..=bottom`, columns `left..=right`.
    Rectangle {
        top: usize,
        bottom: usize,
        left: usize,
        right: usize,
    },
    /// An explicit list of cells.
    Cells(Vec<Position>),
    /// Every cell.
    Whole,
}

impl Region {
    pub fn contains(&self, n: usize, p: Position) -> bool {
        let upper = |p: Position| p.row() <= n / 3 && p.col() <= n / 3;
        let lower = |p: Position| 3 * p.row() >= 2 * n && 3 * p.col() >= 2 * n;
        match self {
            Region::UpperCorner => upper(p),
            Region::LowerCorner => lower(p),
            Region::Corners => upper(p) || lower(p),
            Region::Rectangle {
                top,
                bottom,
                left,
                right,
            } => (*top..=*bottom).contains(&p.row()) && (*left..=*right).contains(&p.col()),
            Region::Cells(cells) => cells.contains(&p),
            Region::Whole => true,
        }
    }

    /// The member cells in row-major order.
    pub fn cells(&self, n: usize) -> Vec<Position> {
        Position::all(n).filter(|&p| self.contains(n, p)).collect()
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::UpperCorner => f.write_str("upper-corner"),
            Region::LowerCorner => f.write_str("lower-corner"),
            Region::Corners => f.write_str("corners"),
            Region::Rectangle {
                top,
                bottom,
                left,
                right,
            } => write!(f, "rows {top}..={bottom}, cols {left}..={right}"),
            Region::Cells(cells) => write!(f, "{} cells", cells.len()),
            Region::Whole => f.write_str("whole"),
        }
    }
}

/// Cells a card can be carried to by a single move of `S` whose block contains it, with
/// the number of such moves reaching each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JumpSet {
    pub from: Position,
    /// Move counts indexed by target cell (row-major); zero for unreachable cells.
    pub counts: Vec<u32>,
}

impl JumpSet {
    pub fn targets(&self, n: usize) -> Vec<Position> {
        self.counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(x, _)| Position::from_index(n, x))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn bits(&self) -> Vec<u64> {
        let mut bits = vec![0u64; self.counts.len().div_ceil(64)];
        for (x, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                bits[x / 64] |= 1 << (x % 64);
            }
        }
        bits
    }
}

/// Enumerates the `2n²` moves of `S`, keeping those whose block contains `from`.
pub fn jump_set(n: usize, from: Position) -> Result<JumpSet> {
    from.check(n)?;
    let family = ShuffleFamily::new(FamilyTag::S, n)?;
    let mut counts = vec![0u32; n * n];
    for m in family
        .corner_moves()?
        .into_iter()
        .filter(|m| m.covers(from))
    {
        counts[m.apply(n, from).index(n)] += 1;
    }
    Ok(JumpSet { from, counts })
}

/// The cells `(a, b)` with `(n + 1 − a − i)(n + 1 − b − j) ≥ 0`, for `from = (i, j)`.
pub fn jump_set_formula(n: usize, from: Position) -> Result<Vec<Position>> {
    from.check(n)?;
    let (i, j) = (from.row() as i64, from.col() as i64);
    let side = n as i64;
    Ok(Position::all(n)
        .filter(|p| (side + 1 - p.row() as i64 - i) * (side + 1 - p.col() as i64 - j) >= 0)
        .collect())
}

/// The fraction of the `2n²` moves of `S` that carry `from` into `region`.
pub fn jump_rate_into(n: usize, from: Position, region: &Region) -> Result<Ratio<u64>> {
    let jumps = jump_set(n, from)?;
    let hits: u64 = jumps
        .counts
        .iter()
        .enumerate()
        .filter(|&(x, _)| region.contains(n, Position::from_index(n, x)))
        .map(|(_, &c)| u64::from(c))
        .sum();
    Ok(Ratio::new(hits, 2 * (n * n) as u64))
}

/// The smallest rate into `region` over all starting cells, with a minimizing cell
/// (the first in row-major order).
pub fn min_rate_into(n: usize, region: &Region) -> Result<(Ratio<u64>, Position)> {
    let mut best: Option<(Ratio<u64>, Position)> = None;
    for p in Position::all(n) {
        let rate = jump_rate_into(n, p, region)?;
        if best.as_ref().is_none_or(|(b, _)| rate < *b) {
            best = Some((rate, p));
        }
    }
    best.ok_or_else(|| domain("empty array"))
}

/// The smallest `|J(x) ∩ J(y)|` over distinct `x, y` in `region`, with the first minimizing pair.
pub fn min_common_jump(n: usize, region: &Region) -> Result<(usize, (Position, Position))> {
    let cells = region.cells(n);
    if cells.len() < 2 {
        return Err(domain(format!("region {region} has fewer than two cells")));
    }
    let sets = cells
        .iter()
        .map(|&p| jump_set(n, p).map(|j| j.bits()))
        .collect::<Result<Vec<_>>>()?;
    let mut best = (usize::MAX, (cells[0], cells[1]));
    for a in 0..cells.len() {
        for b in a + 1..cells.len() {
            let common: usize = sets[a]
                .iter()
                .zip(&sets[b])
                .map(|(x, y)| (x & y).count_ones() as usize)
                .sum();
            if common < best.0 {
                best = (common, (cells[a], cells[b]));
            }
        }
    }
    Ok(best)
}

/// Rate and intersection minima over the two corners, for the report of one side length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub n: usize,
    pub region_cells: usize,
    pub min_rate: String,
    pub min_rate_value: f64,
    pub min_rate_at: Position,
    /// `1/(3n)`.
    pub rate_threshold: f64,
    pub rate_ok: bool,
    pub min_common: usize,
    pub min_common_pair: (Position, Position),
    /// `n²/9`, the asserted threshold.
    pub common_threshold: f64,
    pub common_ok: bool,
    /// `min_common / (n²/3)`, reported against the stronger claim.
    pub common_over_third: f64,
    pub formula_matches: bool,
}

pub fn geometry_report(n: usize) -> Result<GeometryReport> {
    let region = Region::Corners;
    let (rate, at) = min_rate_into(n, &region)?;
    let (common, pair) = min_common_jump(n, &region)?;
    let mut formula_matches = true;
    for p in Position::all(n) {
        formula_matches &= jump_set(n, p)?.targets(n) == jump_set_formula(n, p)?;
    }
    let rate_value = *rate.numer() as f64 / *rate.denom() as f64;
    let side = n as u64;
    let square = (n * n) as f64;
    Ok(GeometryReport {
        n,
        region_cells: region.cells(n).len(),
        min_rate: rate.to_string(),
        min_rate_value: rate_value,
        min_rate_at: at,
        rate_threshold: 1.0 / (3.0 * n as f64),
        rate_ok: rate >= Ratio::new(1, 3 * side),
        min_common: common,
        min_common_pair: pair,
        common_threshold: square / 9.0,
        common_ok: 9 * common as u64 >= side * side,
        common_over_third: common as f64 / (square / 3.0),
        formula_matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(r: usize, c: usize) -> Position {
        Position::new(r, c).unwrap()
    }

    #[test]
    fn corner_cells_reach_everything() {
        for n in [3, 7] {
            assert_eq!(jump_set(n, pos(1, 1)).unwrap().len(), n * n);
            assert_eq!(jump_set(n, pos(n, n)).unwrap().len(), n * n);
        }
    }

    #[test]
    fn off_corner_reaches_a_hook() {
        let n = 6;
        let set = jump_set(n, pos(1, n)).unwrap();
        assert_eq!(set.len(), 2 * n - 1);
        assert!(set.targets(n).iter().all(|p| p.col() == 1 || p.row() == n));
    }

    #[test]
    fn rates_are_fractions_of_all_moves() {
        let n = 6;
        // (3,4) lies in the blocks UL(i,j) with i >= 3, j >= 4 and LR(i,j) with i <= 3, j <= 4.
        let whole = jump_rate_into(n, pos(3, 4), &Region::Whole).unwrap();
        assert_eq!(whole, Ratio::new(4 * 3 + 3 * 4, 72));
        let region = Region::Cells(vec![pos(1, 1), pos(n, n)]);
        let (common, _) = min_common_jump(n, &region).unwrap();
        assert_eq!(common, n * n);
        assert!(min_common_jump(n, &Region::Cells(vec![pos(1, 1)])).is_err());
    }

    #[test]
    fn corner_regions() {
        let n = 9;
        assert_eq!(Region::UpperCorner.cells(n).len(), 9);
        assert_eq!(Region::LowerCorner.cells(n).len(), 16);
        assert!(Region::Corners.contains(n, pos(6, 6)));
        assert!(!Region::Corners.contains(n, pos(5, 6)));
    }
}
