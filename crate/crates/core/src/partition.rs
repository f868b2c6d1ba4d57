//! Integer partitions, used both as cycle types of permutations and as
//! labels of irreducible representations of the symmetric group.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_cap, Error, Result};

/// Largest degree for which [`partitions`] will enumerate.
pub const MAX_PARTITION_DEGREE: usize = 40;

/// A weakly decreasing sequence of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::Domain("partition parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain(format!(
                "partition parts must be weakly decreasing, got {parts:?}"
            )));
        }
        Ok(Self { parts })
    }

    /// Sorts arbitrary positive parts into a partition.
    pub fn from_unsorted(mut parts: Vec<usize>) -> Result<Self> {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(parts)
    }

    /// The one-row partition `(m)`.
    pub fn trivial(m: usize) -> Self {
        Self {
            parts: if m == 0 { vec![] } else { vec![m] },
        }
    }

    /// The one-column partition `(1^m)`.
    pub fn alternating(m: usize) -> Self {
        Self { parts: vec![1; m] }
    }

    /// Cycle type `(3, 1^(m-3))` of a three-cycle in `S_m`.
    pub fn three_cycle_class(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::Domain(format!("S_{m} has no three-cycles")));
        }
        let mut parts = vec![3];
        parts.extend(std::iter::repeat_n(1, m - 3));
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// The degree `m`, i.e. the sum of the parts.
    pub fn degree(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Length of the first row (`t_1`), zero for the empty partition.
    pub fn first_row(&self) -> usize {
        self.parts.first().copied().unwrap_or(0)
    }

    /// Length of the first column (`t_1'`).
    pub fn first_column(&self) -> usize {
        self.parts.len()
    }

    pub fn conjugate(&self) -> Self {
        let cols = self.first_row();
        let parts = (0..cols)
            .map(|j| self.parts.iter().take_while(|&&p| p > j).count())
            .collect();
        Self { parts }
    }

    /// Young-diagram cells as 1-based `(row, col)` pairs, row by row.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &len)| (1..=len).map(move |j| (i + 1, j)))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Self::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

/// Largest degree accepted by the parser, so neither `1^huge` nor one huge part
/// can make later work (the conjugate, for one) allocate unboundedly.
const MAX_PARSED_DEGREE: usize = 1 << 16;

/// Parses `"4,3,1"`, `"(4,3,1)"`, `"4 3 1"` and exponent shorthand such as `"3,1^6"`.
impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim();
        let body = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .unwrap_or(body);
        let mut parts = Vec::new();
        let mut degree = 0usize;
        for token in body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let (value, reps) = match token.split_once('^') {
                Some((v, r)) => (v, r),
                None => (token, "1"),
            };
            let value: usize = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad partition part {token:?}")))?;
            let reps: usize = reps
                .parse()
                .map_err(|_| Error::Parse(format!("bad repetition count in {token:?}")))?;
            if value == 0 {
                return Err(Error::Parse("partition parts must be positive".into()));
            }
            degree = value
                .checked_mul(reps)
                .and_then(|size| degree.checked_add(size))
                .filter(|&d| d <= MAX_PARSED_DEGREE)
                .ok_or_else(|| {
                    Error::Parse(format!("partition degree exceeds {MAX_PARSED_DEGREE}"))
                })?;
            parts.extend(std::iter::repeat_n(value, reps));
        }
        Partition::new(parts).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// All partitions of `m` in lexicographically decreasing order.
pub fn partitions(m: usize) -> Result<Vec<Partition>> {
    check_cap("partition degree", m as u128, MAX_PARTITION_DEGREE as u128)?;
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill(m, m, &mut current, &mut out);
    Ok(out)
}

fn fill(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition {
            parts: current.clone(),
        });
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        current.push(part);
        fill(remaining - part, part, current, out);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Euler's pentagonal-number recurrence, independent of the enumerator.
    fn partition_count(m: usize) -> Vec<u64> {
        let mut p = vec![0i64; m + 1];
        p[0] = 1;
        for k in 1..=m {
            let mut total = 0i64;
            for j in 1.. {
                let j = j as i64;
                let sign = if j % 2 == 1 { 1 } else { -1 };
                let g1 = (j * (3 * j - 1) / 2) as usize;
                let g2 = (j * (3 * j + 1) / 2) as usize;
                if g1 > k {
                    break;
                }
                total += sign * p[k - g1];
                if g2 <= k {
                    total += sign * p[k - g2];
                }
            }
            p[k] = total;
        }
        p.into_iter().map(|v| v as u64).collect()
    }

    #[test]
    fn degree_three() {
        let ps = partitions(3).unwrap();
        let expected: Vec<Partition> = vec![
            "3".parse().unwrap(),
            "2,1".parse().unwrap(),
            "1,1,1".parse().unwrap(),
        ];
        assert_eq!(ps, expected);
    }

    #[test]
    fn counts_match_pentagonal_recurrence() {
        let counts = partition_count(MAX_PARTITION_DEGREE);
        assert_eq!(counts[9], 30);
        for (m, &count) in counts.iter().enumerate() {
            assert_eq!(partitions(m).unwrap().len() as u64, count, "m = {m}");
        }
    }

    #[test]
    fn enumeration_is_strictly_decreasing() {
        let ps = partitions(12).unwrap();
        assert!(ps.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(partitions(41), Err(Error::Cap { .. })));
    }

    #[test]
    fn conjugate_is_an_involution() {
        for p in partitions(10).unwrap() {
            assert_eq!(p.conjugate().conjugate(), p);
            assert_eq!(p.conjugate().degree(), 10);
        }
        let p: Partition = "4,2,1".parse().unwrap();
        assert_eq!(p.conjugate(), "3,2,1,1".parse().unwrap());
    }

    #[test]
    fn parse_forms() {
        let p: Partition = "(3,1^4)".parse().unwrap();
        assert_eq!(p.parts(), &[3, 1, 1, 1, 1]);
        assert_eq!(p.to_string(), "(3,1,1,1,1)");
        assert!("1,2".parse::<Partition>().is_err());
        assert!("0".parse::<Partition>().is_err());
        assert!("x".parse::<Partition>().is_err());
        assert!("1^99999999999".parse::<Partition>().is_err());
        assert!("99999999999999".parse::<Partition>().is_err());
        assert!("0^99999999999".parse::<Partition>().is_err());
        assert!("65536^2".parse::<Partition>().is_err());
        assert_eq!("65536".parse::<Partition>().unwrap().degree(), 65536);
        assert_eq!("".parse::<Partition>().unwrap().degree(), 0);
    }
}
