//! The three shuffles: corner rotations from the upper-left only (`S0`), from both
//! corners (`S`), and uniformly random three-cycles of cells (`R`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::perm::{CornerMove, Position, MAX_SIDE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyTag {
    S0,
    S,
    R,
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyTag::S0 => "S0",
            FamilyTag::S => "S",
            FamilyTag::R => "R",
        })
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "S0" | "s0" => Ok(FamilyTag::S0),
            "S" | "s" => Ok(FamilyTag::S),
            "R" | "r" => Ok(FamilyTag::R),
            other => Err(Error::Parse(format!("unknown shuffle family {other:?}"))),
        }
    }
}

/// A shuffle on the `n`×`n` array, run in continuous time at total jump rate 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShuffleFamily {
    pub tag: FamilyTag,
    pub n: usize,
}

impl ShuffleFamily {
    pub fn new(tag: FamilyTag, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SIDE {
            return Err(domain(format!(
                "side length must be in 1..={MAX_SIDE}, got {n}"
            )));
        }
        if tag == FamilyTag::R && n * n < 3 {
            return Err(domain("the three-cycle shuffle needs at least three cells"));
        }
        Ok(Self { tag, n })
    }

    /// Number of cells, `n²`.
    pub fn cells(&self) -> usize {
        self.n * self.n
    }

    /// Size of the generator multiset: `n²`, `2n²` or `2·C(n², 3)`.
    pub fn generator_count(&self) -> u64 {
        let m = self.cells() as u64;
        match self.tag {
            FamilyTag::S0 => m,
            FamilyTag::S => 2 * m,
            FamilyTag::R => m * (m - 1) * (m - 2) / 3,
        }
    }

    /// The corner moves of `S0` or `S`: all `UL(i, j)` in row-major order, then all `LR(i, j)`.
    pub fn corner_moves(&self) -> Result<Vec<CornerMove>> {
        let n = self.n;
        let pivots = || (1..=n).flat_map(move |i| (1..=n).map(move |j| (i, j)));
        match self.tag {
            FamilyTag::S0 => Ok(pivots().map(|(i, j)| CornerMove::ul(i, j)).collect()),
            FamilyTag::S => Ok(pivots()
                .map(|(i, j)| CornerMove::ul(i, j))
                .chain(pivots().map(|(i, j)| CornerMove::lr(i, j)))
                .collect()),
            FamilyTag::R => Err(domain(
                "the three-cycle shuffle has no corner-move generators",
            )),
        }
    }

    /// Cell permutations that map the generator set onto itself, as index maps.
    ///
    /// Used to identify equivalent starting states. For `R` every cell permutation
    /// qualifies; callers treat that case separately, so only the identity is listed.
    pub fn cell_symmetries(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let map = |f: &dyn Fn(usize, usize) -> (usize, usize)| -> Vec<usize> {
            Position::all(n)
                .map(|p| {
                    let (r, c) = f(p.row(), p.col());
                    (r - 1) * n + (c - 1)
                })
                .collect()
        };
        let identity = map(&|r, c| (r, c));
        let transpose = map(&|r, c| (c, r));
        match self.tag {
            FamilyTag::S0 => vec![identity, transpose],
            FamilyTag::S => vec![
                identity,
                transpose,
                map(&|r, c| (n + 1 - r, n + 1 - c)),
                map(&|r, c| (n + 1 - c, n + 1 - r)),
            ],
            FamilyTag::R => vec![identity],
        }
    }
}

impl fmt::Display for ShuffleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={})", self.tag, self.n)
    }
}
