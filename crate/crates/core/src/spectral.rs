//! Characters of the symmetric group at the three-cycle class, the spectrum of the
//! random three-cycle walk `R`, and the upper-bound-lemma curve for corner shuffles.
//!
//! Throughout, `m` is the degree of the symmetric group (`m = n²` for an `n × n` array).

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_cap, domain, Result};
use crate::family::{FamilyTag, ShuffleFamily};
use crate::group::{three_cycle_generators, GroupKernel};
use crate::partition::{partitions, Partition};

/// Largest degree for which the full spectrum of `R` is listed.
pub const MAX_SPECTRUM_DEGREE: usize = 25;

/// Largest degree for which the walk `R` is built on all of `S_m`.
pub const MAX_DENSE_DEGREE: usize = 7;

fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// `m! / ∏ hooks`: the dimension of the irreducible representation labelled by `p`.
pub fn dimension(p: &Partition) -> BigUint {
    let conj = p.conjugate();
    let mut hooks = BigUint::one();
    for (row, col) in p.cells() {
        let arm = p.parts()[row - 1] - col;
        let leg = conj.parts()[col - 1] - row;
        hooks *= BigUint::from(arm + leg + 1);
    }
    let factorial: BigUint = (1..=p.degree()).map(BigUint::from).product();
    factorial / hooks
}

/// Beta-numbers of a partition padded to `len` parts: `p_i + (len − 1 − i)`.
fn beta_set(parts: &[usize], len: usize) -> Vec<usize> {
    (0..len)
        .map(|i| parts.get(i).copied().unwrap_or(0) + (len - 1 - i))
        .collect()
}

fn from_beta(beta: &mut [usize]) -> Vec<usize> {
    beta.sort_unstable_by(|a, b| b.cmp(a));
    let len = beta.len();
    beta.iter()
        .enumerate()
        .map(|(i, &b)| b - (len - 1 - i))
        .filter(|&part| part > 0)
        .collect()
}

/// Murnaghan–Nakayama recursion, removing the cycles of `cycle_type` in order.
struct MnEvaluator<'a> {
    cycle_type: &'a [usize],
    memo: HashMap<(Vec<usize>, usize), BigInt>,
}

impl MnEvaluator<'_> {
    fn eval(&mut self, parts: &[usize], next: usize) -> BigInt {
        if next == self.cycle_type.len() {
            return if parts.is_empty() {
                BigInt::one()
            } else {
                BigInt::zero()
            };
        }
        let key = (parts.to_vec(), next);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let strip = self.cycle_type[next];
        let beta = beta_set(parts, parts.len());
        let mut total = BigInt::zero();
        for (k, &b) in beta.iter().enumerate() {
            if b < strip || beta.contains(&(b - strip)) {
                continue;
            }
            // Removing a border strip moves one bead down by `strip`; its height is the
            // number of beads jumped over.
            let height = beta.iter().filter(|&&c| c > b - strip && c < b).count();
            let mut moved = beta.clone();
            moved[k] = b - strip;
            let smaller = from_beta(&mut moved);
            let value = self.eval(&smaller, next + 1);
            if height % 2 == 0 {
                total += value;
            } else {
                total -= value;
            }
        }
        self.memo.insert(key, total.clone());
        total
    }
}

/// The irreducible character `χ_p` at the class of cycle type `cycle_type`.
pub fn mn_character(p: &Partition, cycle_type: &Partition) -> Result<BigInt> {
    if p.degree() != cycle_type.degree() {
        return Err(domain(format!(
            "{p} and {cycle_type} are partitions of different integers"
        )));
    }
    let mut evaluator = MnEvaluator {
        cycle_type: cycle_type.parts(),
        memo: HashMap::new(),
    };
    Ok(evaluator.eval(p.parts(), 0))
}

/// `χ_p(τ) / d(p)` at a three-cycle `τ`, by the closed form in the content sum
/// `Σ (i − j)²` over the cells of the diagram.
pub fn ingram_r(p: &Partition) -> Result<BigRational> {
    let m = p.degree();
    if m < 3 {
        return Err(domain(format!("three-cycles need degree >= 3, got {m}")));
    }
    let contents: u64 = p.cells().map(|(i, j)| (i.abs_diff(j) as u64).pow(2)).sum();
    let m = m as u64;
    Ok(ratio(3 * contents, m * (m - 1) * (m - 2)) - ratio(3u64, 2 * (m - 2)))
}

/// Which inequality bounds the three-cycle character ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundCase {
    /// `t₁ ≥ m/2`: `1 − 3(t₁ − 1)(m − t₁) / ((m − 1)(m − 2))`.
    LongRow,
    /// `t₁, t₁′ ≤ m/2`: `max(t₁ − 1, t₁′ − 1) / (m − 2)`.
    Balanced,
    /// `t₁′ > m/2`: the long-row bound applied to the conjugate.
    LongColumn,
}

impl fmt::Display for BoundCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundCase::LongRow => "long-row",
            BoundCase::Balanced => "balanced",
            BoundCase::LongColumn => "long-column",
        })
    }
}

/// A bound on the character ratio and whether the ratio respects it.
#[derive(Debug, Clone, PartialEq)]
pub struct CharBound {
    pub case: BoundCase,
    pub value: BigRational,
    pub holds: bool,
}

fn long_row_bound(first: usize, m: usize) -> BigRational {
    let (t, m) = (first as u64, m as u64);
    BigRational::one() - ratio(3 * (t - 1) * (m - t), (m - 1) * (m - 2))
}

/// Every bound whose hypothesis `p` satisfies, in the order long-row, balanced, long-column.
pub fn applicable_bounds(p: &Partition) -> Result<Vec<CharBound>> {
    let m = p.degree();
    let r = ingram_r(p)?;
    if *p == Partition::trivial(m) || *p == Partition::alternating(m) {
        return Err(domain(format!("{p} is a one-dimensional representation")));
    }
    let (row, col) = (p.first_row(), p.first_column());
    let mut out = Vec::new();
    let mut push = |case, value: BigRational| {
        let holds = r <= value;
        out.push(CharBound { case, value, holds });
    };
    if 2 * row >= m {
        push(BoundCase::LongRow, long_row_bound(row, m));
    }
    if 2 * row <= m && 2 * col <= m {
        push(
            BoundCase::Balanced,
            ratio(row.max(col) as u64 - 1, m as u64 - 2),
        );
    }
    if 2 * col > m {
        push(BoundCase::LongColumn, long_row_bound(col, m));
    }
    Ok(out)
}

/// The first applicable bound on the character ratio of a nontrivial representation.
pub fn char_bounds(p: &Partition) -> Result<CharBound> {
    applicable_bounds(p)?
        .into_iter()
        .next()
        .ok_or_else(|| domain(format!("no bound applies to {p}")))
}

/// One eigenvalue of `R` with its multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub partition: Partition,
    pub r: BigRational,
    pub dimension: BigUint,
    pub multiplicity: BigUint,
}

/// The spectrum of `R` on `S_m`: each partition contributes `r(p)` with multiplicity `d(p)²`.
pub fn r_spectrum(m: usize) -> Result<Vec<SpectrumEntry>> {
    check_cap("spectrum degree", m as u128, MAX_SPECTRUM_DEGREE as u128)?;
    if m < 3 {
        return Err(domain("three-cycles need degree >= 3"));
    }
    partitions(m)?
        .into_par_iter()
        .map(|p| {
            let r = ingram_r(&p)?;
            let d = dimension(&p);
            Ok(SpectrumEntry {
                multiplicity: &d * &d,
                dimension: d,
                r,
                partition: p,
            })
        })
        .collect()
}

/// The one-jump walk `R` on all of `S_m` (including odd permutations).
pub fn r_walk(m: usize) -> Result<GroupKernel> {
    check_cap("dense degree", m as u128, MAX_DENSE_DEGREE as u128)?;
    if m < 3 {
        return Err(domain("three-cycles need degree >= 3"));
    }
    GroupKernel::symmetric(m, three_cycle_generators(m))
}

/// The mean sign of a corner shuffle's generators: its eigenvalue at the sign representation.
pub fn alternating_mean_sign(family: ShuffleFamily) -> Result<Ratio<i64>> {
    if family.tag == FamilyTag::R {
        return Ok(Ratio::one());
    }
    let mut total = 0i64;
    for m in family.corner_moves()? {
        total += m.perm(family.n)?.sign().value();
    }
    Ok(Ratio::new(total, family.generator_count() as i64))
}

/// `(−1)^⌊ij/2⌋`: the sign of rotating an `i × j` block.
pub fn rotation_sign(i: usize, j: usize) -> i64 {
    if (i * j / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Precomputed terms of the upper-bound-lemma sum for `S_m`.
#[derive(Debug, Clone)]
pub struct UblEvaluator {
    m: usize,
    /// `(ln d², 1 − r)` for every partition except the trivial and the alternating one.
    terms: Vec<(f64, f64)>,
}

/// The upper-bound-lemma value at one time, before and after clamping to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UblValue {
    pub raw: f64,
    pub clamped: f64,
}

fn ln_big(x: &BigUint) -> f64 {
    // Shift large integers into f64 range before taking the log.
    let bits = x.bits();
    if bits < 1000 {
        x.to_f64().unwrap_or(f64::INFINITY).ln()
    } else {
        let shift = bits - 900;
        (x >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

impl UblEvaluator {
    pub fn new(m: usize) -> Result<Self> {
        let trivial = Partition::trivial(m);
        let alternating = Partition::alternating(m);
        let terms = r_spectrum(m)?
            .into_iter()
            .filter(|e| e.partition != trivial && e.partition != alternating)
            .map(|e| {
                let gap = (BigRational::one() - &e.r).to_f64().unwrap_or(f64::NAN);
                (ln_big(&e.multiplicity), gap)
            })
            .collect();
        Ok(Self { m, terms })
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    /// `½ √(e^{−2ct(1−λ′)} + Σ* d² e^{−2t(1−r)})`, where `t` is time for `R` and `ct` for the shuffle.
    pub fn bound(&self, t: f64, comparison: f64, lambda_sign: f64) -> Result<UblValue> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(domain(format!(
                "time must be finite and nonnegative, got {t}"
            )));
        }
        if !(comparison > 0.0 && comparison.is_finite()) {
            return Err(domain("the comparison constant must be positive"));
        }
        if !(-1.0..=1.0).contains(&lambda_sign) {
            return Err(domain("the sign eigenvalue must lie in [-1, 1]"));
        }
        let sum: f64 = (-2.0 * comparison * t * (1.0 - lambda_sign)).exp()
            + self
                .terms
                .iter()
                .map(|&(ln_mult, gap)| (ln_mult - 2.0 * t * gap).exp())
                .sum::<f64>();
        let raw = 0.5 * sum.sqrt();
        Ok(UblValue {
            raw,
            clamped: raw.clamp(0.0, 1.0),
        })
    }
}

/// The upper-bound-lemma value for a shuffle of the `n × n` array at time `t`.
pub fn ubl_bound(n: usize, t: f64, comparison: f64, lambda_sign: f64) -> Result<UblValue> {
    UblEvaluator::new(n * n)?.bound(t, comparison, lambda_sign)
}

/// `Σ_p χ_p(class) · d(p)`, which vanishes off the identity class.
pub fn regular_character(m: usize, class: &Partition) -> Result<BigInt> {
    partitions(m)?
        .par_iter()
        .map(|p| Ok(mn_character(p, class)? * BigInt::from(dimension(p))))
        .sum::<Result<BigInt>>()
}

/// Whether the ratio `χ/d` has absolute value at most one.
pub fn is_bounded_ratio(r: &BigRational) -> bool {
    r.abs() <= BigRational::one()
}
