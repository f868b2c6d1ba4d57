//! Transient distributions `x · exp(t(K − I))` by uniformization: a Poisson-weighted
//! sum of powers of the one-jump kernel.

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};
use crate::kernel::Propagate;

/// Default Poisson truncation tolerance (L1).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Number of start vectors advanced together through the kernel.
const BATCH_WIDTH: usize = 8;

/// Kernel powers kept in memory at once; their weighted sums are flushed together.
const SEGMENT: usize = 16;

/// Entries per block when folding a segment of powers into the time accumulators.
const FLUSH_BLOCK: usize = 2048;

/// The Poisson(t) weights on a window `[first, first + len)` whose two tails have
/// total mass below the requested tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonWindow {
    first: usize,
    weights: Vec<f64>,
}

impl PoissonWindow {
    pub fn new(t: f64, tol: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(domain(format!(
                "time must be finite and nonnegative, got {t}"
            )));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(domain(format!("tolerance must lie in (0, 1), got {tol}")));
        }
        if t == 0.0 {
            return Ok(Self {
                first: 0,
                weights: vec![1.0],
            });
        }
        let mode = t.floor() as usize;
        let log_weight = |j: usize| -t + j as f64 * t.ln() - ln_gamma(j as f64 + 1.0);
        let peak = log_weight(mode).exp();
        let half = tol / 2.0;

        let mut right = vec![peak];
        let mut j = mode;
        loop {
            let w = *right.last().expect("nonempty");
            // Beyond j the ratio of successive weights is at most t / (j + 2) < 1.
            let ratio = t / (j + 2) as f64;
            if ratio < 1.0 && w * (t / (j + 1) as f64) / (1.0 - ratio) < half {
                break;
            }
            j += 1;
            right.push(w * t / j as f64);
        }

        let mut left = Vec::new();
        let mut low = mode;
        let mut w = peak;
        while low > 0 {
            // Below low the ratio of successive weights is at most low / t < 1.
            let ratio = low as f64 / t;
            if ratio < 1.0 && w * ratio / (1.0 - ratio) < half {
                break;
            }
            w *= low as f64 / t;
            low -= 1;
            left.push(w);
        }
        left.reverse();
        left.extend(right);
        Ok(Self {
            first: low,
            weights: left,
        })
    }

    /// First jump count with a retained weight.
    pub fn first(&self) -> usize {
        self.first
    }

    /// One past the last retained jump count.
    pub fn end(&self) -> usize {
        self.first + self.weights.len()
    }

    pub fn weight(&self, jumps: usize) -> f64 {
        if jumps < self.first {
            0.0
        } else {
            self.weights.get(jumps - self.first).copied().unwrap_or(0.0)
        }
    }

    /// Retained mass, at least `1 − tol`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// A probability vector over the states of a kernel (mass may fall short of 1 by
/// at most the truncation tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    pub fn new(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn point_mass(states: usize, at: usize) -> Self {
        let mut weights = vec![0.0; states];
        weights[at] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Total variation distance to the uniform distribution on the same states.
    pub fn tv_to_uniform(&self) -> f64 {
        tv_to_uniform(&self.weights)
    }

    pub fn l1_distance(&self, other: &Distribution) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

pub fn tv_to_uniform(weights: &[f64]) -> f64 {
    let u = 1.0 / weights.len() as f64;
    0.5 * weights.iter().map(|w| (w - u).abs()).sum::<f64>()
}

/// The time-`t` distribution of the chain started at `start`.
pub fn transient_distribution(
    kernel: &impl Propagate,
    start: usize,
    t: f64,
    tol: f64,
) -> Result<Distribution> {
    let mut out = transient_map(kernel, &[start], &[t], tol, |_, _, dist| dist.to_vec())?;
    Ok(Distribution::new(out.remove(0).remove(0)))
}

/// Evolves an arbitrary initial vector for time `t`.
pub fn evolve(
    kernel: &impl Propagate,
    initial: &Distribution,
    t: f64,
    tol: f64,
) -> Result<Distribution> {
    let states = kernel.states();
    if initial.weights.len() != states {
        return Err(domain(
            "initial distribution has the wrong number of states",
        ));
    }
    let window = PoissonWindow::new(t, tol)?;
    let mut x = initial.weights.clone();
    let mut y = vec![0.0; states];
    let mut acc = vec![0.0; states];
    for jumps in 0..window.end() {
        let w = window.weight(jumps);
        if w > 0.0 {
            acc.iter_mut().zip(&x).for_each(|(a, v)| *a += w * v);
        }
        if jumps + 1 < window.end() {
            kernel.step(&x, &mut y, 1);
            std::mem::swap(&mut x, &mut y);
        }
    }
    Ok(Distribution::new(acc))
}

/// Evaluates `reduce(time_index, start_index, distribution)` for every start state and
/// every time, sharing one pass of kernel powers across all times.
///
/// Results are indexed `[time][start]`, in the order given.
pub fn transient_map<P, T, F>(
    kernel: &P,
    starts: &[usize],
    times: &[f64],
    tol: f64,
    reduce: F,
) -> Result<Vec<Vec<T>>>
where
    P: Propagate,
    T: Send,
    F: Fn(usize, usize, &[f64]) -> T + Sync,
{
    let states = kernel.states();
    if let Some(&bad) = starts.iter().find(|&&s| s >= states) {
        return Err(domain(format!("start state {bad} out of range")));
    }
    let windows: Vec<PoissonWindow> = times
        .iter()
        .map(|&t| PoissonWindow::new(t, tol))
        .collect::<Result<_>>()?;
    let horizon = windows.iter().map(PoissonWindow::end).max().unwrap_or(0);

    let chunks: Vec<Vec<Vec<T>>> = starts
        .par_chunks(BATCH_WIDTH)
        .enumerate()
        .map(|(chunk_index, chunk)| {
            let width = chunk.len();
            let len = states * width;
            let depth = SEGMENT.min(horizon.max(1));
            // `powers[d]` holds the chunk after `base + d` jumps.
            let mut powers = vec![vec![0.0; len]; depth];
            let mut scratch = vec![0.0; len];
            for (b, &s) in chunk.iter().enumerate() {
                powers[0][s * width + b] = 1.0;
            }
            let mut acc: Vec<Option<Vec<f64>>> = vec![None; windows.len()];
            let mut results: Vec<Vec<Option<T>>> = (0..windows.len())
                .map(|_| (0..width).map(|_| None).collect())
                .collect();
            let mut column = vec![0.0; states];
            let mut base = 0;
            let mut filled = 1;
            loop {
                while filled < depth && base + filled < horizon {
                    let (done, rest) = powers.split_at_mut(filled);
                    kernel.step(&done[filled - 1], &mut rest[0], width);
                    filled += 1;
                }
                let end = base + filled;
                let active: Vec<(usize, Vec<f64>)> = windows
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| w.first() < end && w.end() > base)
                    .map(|(q, w)| (q, (base..end).map(|j| w.weight(j)).collect()))
                    .collect();
                for (q, _) in &active {
                    acc[*q].get_or_insert_with(|| vec![0.0; len]);
                }
                for lo in (0..len).step_by(FLUSH_BLOCK) {
                    let hi = (lo + FLUSH_BLOCK).min(len);
                    for (q, weights) in &active {
                        let a = &mut acc[*q].as_mut().expect("allocated above")[lo..hi];
                        for (power, &w) in powers.iter().zip(weights) {
                            if w > 0.0 {
                                a.iter_mut()
                                    .zip(&power[lo..hi])
                                    .for_each(|(a, v)| *a += w * v);
                            }
                        }
                    }
                }
                for (q, window) in windows.iter().enumerate() {
                    if window.end() > base && window.end() <= end {
                        let a = acc[q].take().unwrap_or_else(|| vec![0.0; len]);
                        for b in 0..width {
                            for (s, c) in column.iter_mut().enumerate() {
                                *c = a[s * width + b];
                            }
                            results[q][b] = Some(reduce(q, chunk_index * BATCH_WIDTH + b, &column));
                        }
                    }
                }
                if end >= horizon {
                    break;
                }
                kernel.step(&powers[filled - 1], &mut scratch, width);
                std::mem::swap(&mut powers[0], &mut scratch);
                base = end;
                filled = 1;
            }
            results
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|r| r.expect("every window closes"))
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut out: Vec<Vec<T>> = (0..windows.len())
        .map(|_| Vec::with_capacity(starts.len()))
        .collect();
    for chunk in chunks {
        for (q, row) in chunk.into_iter().enumerate() {
            out[q].extend(row);
        }
    }
    Ok(out)
}
