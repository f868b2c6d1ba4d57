//! Cells of the n×n array, the corner-rotation generators and permutations of the cells.
//!
//! A [`Perm`] records where the card at each cell goes. Products are read left to
//! right: `p.compose(&q)` means "first `p`, then `q`".

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::partition::Partition;

/// Largest side length accepted anywhere in the library.
pub const MAX_SIDE: usize = 256;

/// A cell of the array, 1-based, with `(1, 1)` in the upper-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    row: usize,
    col: usize,
}

impl Position {
    /// The top element `(1, 1)`.
    pub const TOP: Position = Position { row: 1, col: 1 };

    pub fn new(row: usize, col: usize) -> Result<Self> {
        if row == 0 || col == 0 {
            return Err(domain(format!("positions are 1-based, got ({row},{col})")));
        }
        Ok(Self { row, col })
    }

    pub fn row(self) -> usize {
        self.row
    }

    pub fn col(self) -> usize {
        self.col
    }

    /// Checks that the position lies in an `n`×`n` array.
    pub fn check(self, n: usize) -> Result<Self> {
        if self.row > n || self.col > n {
            Err(domain(format!(
                "position {self} lies outside the {n}x{n} array"
            )))
        } else {
            Ok(self)
        }
    }

    /// Row-major cell index, 0-based.
    pub fn index(self, n: usize) -> usize {
        (self.row - 1) * n + (self.col - 1)
    }

    pub fn from_index(n: usize, index: usize) -> Self {
        Self {
            row: index / n + 1,
            col: index % n + 1,
        }
    }

    pub fn taxicab(self, other: Position) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    /// All cells of the array in row-major order.
    pub fn all(n: usize) -> impl Iterator<Item = Position> {
        (0..n * n).map(move |idx| Position::from_index(n, idx))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Parses `(r,s)`, or the bare form `r,s`.
impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim();
        let body = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .unwrap_or(body);
        let (row, col) = body
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected (row,col), got {s:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad coordinate in {s:?}")))
        };
        Position::new(parse(row)?, parse(col)?).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Which corner a rotation is anchored at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Corner {
    UpperLeft,
    LowerRight,
}

/// A 180° rotation of the upper-left `i`×`j` block (`UL`) or of the lower-right
/// block whose upper-left cell is `(i, j)` (`LR`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CornerMove {
    pub corner: Corner,
    pub i: usize,
    pub j: usize,
}

impl CornerMove {
    pub fn ul(i: usize, j: usize) -> Self {
        Self {
            corner: Corner::UpperLeft,
            i,
            j,
        }
    }

    pub fn lr(i: usize, j: usize) -> Self {
        Self {
            corner: Corner::LowerRight,
            i,
            j,
        }
    }

    pub fn check(self, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SIDE {
            return Err(domain(format!(
                "side length must be in 1..={MAX_SIDE}, got {n}"
            )));
        }
        if self.i == 0 || self.j == 0 || self.i > n || self.j > n {
            return Err(domain(format!(
                "pivot of {self} lies outside the {n}x{n} array"
            )));
        }
        Ok(self)
    }

    /// Where this move sends the card at `cell`. The move must be valid for `n`.
    #[inline]
    pub fn apply(self, n: usize, cell: Position) -> Position {
        let Position { row, col } = cell;
        match self.corner {
            Corner::UpperLeft if row <= self.i && col <= self.j => Position {
                row: self.i + 1 - row,
                col: self.j + 1 - col,
            },
            Corner::LowerRight if row >= self.i && col >= self.j => Position {
                row: n + self.i - row,
                col: n + self.j - col,
            },
            _ => cell,
        }
    }

    /// Index form of [`CornerMove::apply`].
    #[inline]
    pub fn apply_index(self, n: usize, index: usize) -> usize {
        let (row, col) = (index / n, index % n);
        match self.corner {
            Corner::UpperLeft if row < self.i && col < self.j => {
                (self.i - 1 - row) * n + (self.j - 1 - col)
            }
            Corner::LowerRight if row + 1 >= self.i && col + 1 >= self.j => {
                (n + self.i - 2 - row) * n + (n + self.j - 2 - col)
            }
            _ => index,
        }
    }

    /// Whether `cell` lies in the rotated block.
    pub fn covers(self, cell: Position) -> bool {
        match self.corner {
            Corner::UpperLeft => cell.row <= self.i && cell.col <= self.j,
            Corner::LowerRight => cell.row >= self.i && cell.col >= self.j,
        }
    }

    /// Number of cells the rotation touches (its block area).
    pub fn block_area(self, n: usize) -> usize {
        match self.corner {
            Corner::UpperLeft => self.i * self.j,
            Corner::LowerRight => (n + 1 - self.i) * (n + 1 - self.j),
        }
    }

    pub fn perm(self, n: usize) -> Result<Perm> {
        self.check(n)?;
        let image = (0..n * n).map(|x| self.apply_index(n, x)).collect();
        Ok(Perm { n, image })
    }
}

impl fmt::Display for CornerMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.corner {
            Corner::UpperLeft => "UL",
            Corner::LowerRight => "LR",
        };
        write!(f, "{tag}({},{})", self.i, self.j)
    }
}

/// Parses `UL(i,j)` or `LR(i,j)` (case-insensitive tag).
impl FromStr for CornerMove {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, rest) = s
            .split_at_checked(2)
            .ok_or_else(|| Error::Parse(format!("expected UL(i,j) or LR(i,j), got {s:?}")))?;
        let corner = match tag.to_ascii_uppercase().as_str() {
            "UL" => Corner::UpperLeft,
            "LR" => Corner::LowerRight,
            _ => return Err(Error::Parse(format!("unknown corner in {s:?}"))),
        };
        if !rest.trim_start().starts_with('(') {
            return Err(Error::Parse(format!(
                "expected a parenthesised pivot in {s:?}"
            )));
        }
        let pivot: Position = rest.parse()?;
        Ok(Self {
            corner,
            i: pivot.row,
            j: pivot.col,
        })
    }
}

/// Splits text into parenthesised items, e.g. `"UL(1,2) LR(3,4)"` or
/// `"(1,2) -> (2,3)"`, ignoring separators between items.
pub(crate) fn split_items(s: &str) -> Result<Vec<&str>> {
    let mut items = Vec::new();
    let mut start = None;
    let mut depth = 0usize;
    for (pos, ch) in s.char_indices() {
        match ch {
            '(' => {
                if depth > 0 {
                    return Err(Error::Parse("nested parentheses".into()));
                }
                depth = 1;
                start.get_or_insert(pos);
            }
            ')' => {
                if depth == 0 {
                    return Err(Error::Parse("unbalanced ')'".into()));
                }
                depth = 0;
                items.push(&s[start.take().unwrap_or(pos)..=pos]);
            }
            c if depth == 0 && (c.is_whitespace() || c == ',' || c == '-' || c == '>') => {
                if start.is_some() {
                    return Err(Error::Parse(format!("unexpected {c:?} inside an item")));
                }
            }
            _ => {
                if depth == 0 && start.is_none() {
                    start = Some(pos);
                }
            }
        }
    }
    if depth != 0 || start.is_some() {
        return Err(Error::Parse("unterminated item".into()));
    }
    Ok(items)
}

/// Parses a whitespace-separated list of moves such as `"UL(5,5) UL(4,5)"`.
pub fn parse_moves(s: &str) -> Result<Vec<CornerMove>> {
    split_items(s)?.into_iter().map(str::parse).collect()
}

/// Parses a list of positions such as `"(1,2) (2,3) (3,1)"` or `"(1,2)->(2,3)->(3,1)"`.
pub fn parse_positions(s: &str) -> Result<Vec<Position>> {
    split_items(s)?.into_iter().map(str::parse).collect()
}

/// Sign of a permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Even,
    Odd,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Even => 1,
            Sign::Odd => -1,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Even
        } else {
            Sign::Odd
        }
    }
}

/// A bijection on the `n²` cells: `image[x]` is where the card at cell `x` goes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Perm {
    n: usize,
    image: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            image: (0..n * n).collect(),
        }
    }

    /// Builds a permutation from 0-based row-major images, checking bijectivity.
    pub fn from_images(n: usize, image: Vec<usize>) -> Result<Self> {
        if image.len() != n * n {
            return Err(domain(format!(
                "expected {} images for n = {n}, got {}",
                n * n,
                image.len()
            )));
        }
        let mut seen = vec![false; image.len()];
        for &y in &image {
            if y >= seen.len() || std::mem::replace(&mut seen[y], true) {
                return Err(domain("images do not form a bijection"));
            }
        }
        Ok(Self { n, image })
    }

    /// The cycle sending `cells[0] → cells[1] → … → cells[0]`.
    pub fn from_cycle(n: usize, cells: &[Position]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n * n).collect();
        let mut seen = std::collections::HashSet::new();
        for cell in cells {
            cell.check(n)?;
            if !seen.insert(*cell) {
                return Err(domain(format!("cell {cell} repeats in the cycle")));
            }
        }
        for (from, to) in cells.iter().zip(cells.iter().cycle().skip(1)) {
            image[from.index(n)] = to.index(n);
        }
        Ok(Self { n, image })
    }

    /// Left-to-right product of moves.
    pub fn from_moves<'a>(
        n: usize,
        moves: impl IntoIterator<Item = &'a CornerMove>,
    ) -> Result<Self> {
        let mut image: Vec<usize> = (0..n * n).collect();
        for m in moves {
            m.check(n)?;
            for y in image.iter_mut() {
                *y = m.apply_index(n, *y);
            }
        }
        Ok(Self { n, image })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cells, `n²`.
    pub fn degree(&self) -> usize {
        self.image.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, index: usize) -> usize {
        self.image[index]
    }

    pub fn apply_position(&self, cell: Position) -> Position {
        Position::from_index(self.n, self.image[cell.index(self.n)])
    }

    /// First `self`, then `other`.
    pub fn compose(&self, other: &Perm) -> Result<Perm> {
        if self.n != other.n {
            return Err(domain(format!(
                "cannot compose permutations of sides {} and {}",
                self.n, other.n
            )));
        }
        let image = self.image.iter().map(|&y| other.image[y]).collect();
        Ok(Perm { n: self.n, image })
    }

    /// Applies a move after `self`, in place.
    pub fn then_move(&mut self, m: CornerMove) -> Result<()> {
        m.check(self.n)?;
        for y in self.image.iter_mut() {
            *y = m.apply_index(self.n, *y);
        }
        Ok(())
    }

    pub fn inverse(&self) -> Perm {
        let mut image = vec![0; self.image.len()];
        for (x, &y) in self.image.iter().enumerate() {
            image[y] = x;
        }
        Perm { n: self.n, image }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(x, &y)| x == y)
    }

    /// Nontrivial cycles as index lists, each starting at its smallest cell, sorted by that cell.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.image.len()];
        let mut out = Vec::new();
        for start in 0..self.image.len() {
            if seen[start] || self.image[start] == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = self.image[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> Partition {
        let mut parts: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        let moved: usize = parts.iter().sum();
        parts.extend(std::iter::repeat_n(1, self.degree() - moved));
        Partition::from_unsorted(parts).expect("cycle lengths are positive")
    }

    pub fn sign(&self) -> Sign {
        let transpositions: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        if transpositions.is_multiple_of(2) {
            Sign::Even
        } else {
            Sign::Odd
        }
    }

    pub fn is_three_cycle(&self) -> bool {
        self.three_cycle().is_some()
    }

    /// For a three-cycle, its cells `[a, b, c]` with `a → b → c → a` and `a` the smallest.
    pub fn three_cycle(&self) -> Option<[Position; 3]> {
        let cycles = self.cycles();
        match cycles.as_slice() {
            [c] if c.len() == 3 => Some([
                Position::from_index(self.n, c[0]),
                Position::from_index(self.n, c[1]),
                Position::from_index(self.n, c[2]),
            ]),
            _ => None,
        }
    }

    /// The arrangement after the shuffle: entry `x` is the original cell of the card now at `x`.
    pub fn arrangement(&self) -> Vec<Position> {
        let inv = self.inverse();
        inv.image
            .iter()
            .map(|&x| Position::from_index(self.n, x))
            .collect()
    }
}

/// Cycle notation over cells, e.g. `((1,1) (1,2))((2,1) (3,3) (2,2))`; `()` for the identity.
impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for cycle in cycles {
            f.write_str("(")?;
            for (k, &x) in cycle.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", Position::from_index(self.n, x))?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(r: usize, c: usize) -> Position {
        Position::new(r, c).unwrap()
    }

    #[test]
    fn position_index_round_trip() {
        for n in 1..8 {
            for idx in 0..n * n {
                assert_eq!(Position::from_index(n, idx).index(n), idx);
            }
        }
        assert!(Position::new(0, 1).is_err());
        assert!(pos(3, 1).check(2).is_err());
    }

    #[test]
    fn apply_index_matches_apply() {
        for n in 1..7 {
            for i in 1..=n {
                for j in 1..=n {
                    for m in [CornerMove::ul(i, j), CornerMove::lr(i, j)] {
                        for cell in Position::all(n) {
                            assert_eq!(m.apply(n, cell).index(n), m.apply_index(n, cell.index(n)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ul_one_one_is_identity_and_lr_one_one_is_full_rotation() {
        assert!(CornerMove::ul(1, 1).perm(5).unwrap().is_identity());
        assert!(CornerMove::lr(5, 5).perm(5).unwrap().is_identity());
        let rot = CornerMove::lr(1, 1).perm(4).unwrap();
        for cell in Position::all(4) {
            assert_eq!(
                rot.apply_position(cell),
                pos(5 - cell.row(), 5 - cell.col())
            );
        }
    }

    #[test]
    fn pivot_out_of_range_is_rejected() {
        assert!(CornerMove::ul(0, 1).perm(3).is_err());
        assert!(CornerMove::lr(4, 1).perm(3).is_err());
    }

    #[test]
    fn single_transposition_sign() {
        let p = CornerMove::ul(1, 2).perm(3).unwrap();
        assert_eq!(p.sign(), Sign::Odd);
        assert_eq!(p.cycles(), vec![vec![0, 1]]);
    }

    #[test]
    fn three_cycle_detection() {
        assert!(!Perm::identity(3).is_three_cycle());
        let c = Perm::from_cycle(3, &[pos(1, 2), pos(2, 3), pos(3, 1)]).unwrap();
        assert!(c.is_three_cycle());
        assert_eq!(c.three_cycle(), Some([pos(1, 2), pos(2, 3), pos(3, 1)]));
        assert!(!CornerMove::ul(2, 2).perm(3).unwrap().is_three_cycle());
        assert_eq!(
            CornerMove::ul(2, 2).perm(3).unwrap().cycle_type().parts(),
            &[2, 2, 1, 1, 1, 1, 1]
        );
    }

    #[test]
    fn compose_order_is_left_to_right() {
        let p = Perm::from_cycle(3, &[pos(1, 1), pos(1, 2)]).unwrap();
        let q = Perm::from_cycle(3, &[pos(1, 2), pos(1, 3)]).unwrap();
        let pq = p.compose(&q).unwrap();
        // (1,1) goes to (1,2) under p, then to (1,3) under q.
        assert_eq!(pq.apply_position(pos(1, 1)), pos(1, 3));
        assert!(p.compose(&Perm::identity(4)).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!(" (2, 3) ".parse::<Position>().unwrap(), pos(2, 3));
        assert_eq!(
            "ul(5,4)".parse::<CornerMove>().unwrap(),
            CornerMove::ul(5, 4)
        );
        assert_eq!(
            parse_moves("UL(5,5) UL(4,5), LR(1,1)").unwrap(),
            vec![
                CornerMove::ul(5, 5),
                CornerMove::ul(4, 5),
                CornerMove::lr(1, 1)
            ]
        );
        assert_eq!(
            parse_positions("(1,2)->(2,3) -> (3,1)").unwrap(),
            vec![pos(1, 2), pos(2, 3), pos(3, 1)]
        );
        for bad in [
            "UL(1,2", "XY(1,2)", "UL(0,1)", "(1,2)(", "((1,2))", "UL 1,2", "1x2", "(a,b)",
        ] {
            assert!(
                parse_moves(bad).is_err() || parse_positions(bad).is_err(),
                "{bad:?} should fail"
            );
        }
        assert!(parse_moves("UL(1,2)x").is_err());
        assert_eq!(CornerMove::lr(2, 3).to_string(), "LR(2,3)");
        assert_eq!(
            CornerMove::lr(2, 3)
                .to_string()
                .parse::<CornerMove>()
                .unwrap(),
            CornerMove::lr(2, 3)
        );
    }

    #[test]
    fn display_cycle_notation() {
        let c = Perm::from_cycle(3, &[pos(2, 2), pos(1, 3), pos(3, 1)]).unwrap();
        assert_eq!(c.to_string(), "((1,3) (3,1) (2,2))");
        assert_eq!(Perm::identity(2).to_string(), "()");
    }
}
