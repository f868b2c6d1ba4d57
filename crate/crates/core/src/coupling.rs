//! A Markovian maximal coupling of two copies of the `k`-card chain.
//!
//! Time is cut into epochs of length `epoch`. At each epoch boundary, the next states
//! of the two copies are drawn from the maximal coupling of their exact epoch
//! transition rows, so each copy on its own is the unmodified shuffle observed at
//! epoch boundaries. Once the copies agree they move together.

use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_cap, domain, Result};
use crate::family::ShuffleFamily;
use crate::kernel::{marginal_kernel_with_cap, SparseKernel, DEFAULT_STATE_CAP};
use crate::perm::Position;
use crate::sample::replicate_rng;
use crate::transient::{transient_distribution, transient_map, DEFAULT_TOL};

/// Chains with at most this many states have every epoch row computed up front.
const EAGER_ROWS: usize = 4096;

/// Largest chain for which survival is computed exactly over all pairs of states.
pub const MAX_EXACT_SURVIVAL_STATES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingOptions {
    pub reps: usize,
    pub seed: u64,
    /// Epoch length.
    pub epoch: f64,
    pub tol: f64,
    /// Runs still apart after this many epochs are reported as censored.
    pub max_epochs: usize,
    pub state_cap: usize,
}

impl Default for CouplingOptions {
    fn default() -> Self {
        Self {
            reps: 1000,
            seed: 1,
            epoch: 1.0,
            tol: DEFAULT_TOL,
            max_epochs: 100_000,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// Sampled coupling times from one pair of starting tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingRun {
    pub n: usize,
    pub k: usize,
    pub strategy: String,
    pub seed: u64,
    pub epoch: f64,
    pub start: (Vec<Position>, Vec<Position>),
    /// Meeting times; censored runs appear at `max_epochs · epoch`.
    pub times: Vec<f64>,
    pub censored: usize,
}

impl CouplingRun {
    pub fn mean(&self) -> f64 {
        self.times.iter().sum::<f64>() / self.times.len().max(1) as f64
    }

    /// The lower empirical quantile at level `q ∈ [0, 1]`.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut sorted = self.times.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.is_empty() {
            return f64::NAN;
        }
        let k = ((q.clamp(0.0, 1.0) * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
        sorted[k - 1]
    }

    /// Empirical `P(T > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        self.times.iter().filter(|&&x| x > t).count() as f64 / self.times.len().max(1) as f64
    }
}

/// Starting tuples far apart: for one card `(1,n)` against `(n,1)`; for `k` cards the
/// anti-diagonal `(1,n), (2,n−1), …` against its reflection `(n,1), (n−1,2), …`.
pub fn adversarial_starts(n: usize, k: usize) -> Result<(Vec<Position>, Vec<Position>)> {
    if k == 0 || k > n {
        return Err(domain(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let first = (1..=k)
        .map(|r| Position::new(r, n + 1 - r))
        .collect::<Result<Vec<_>>>()?;
    let second = first
        .iter()
        .map(|p| Position::new(p.col(), p.row()))
        .collect::<Result<Vec<_>>>()?;
    Ok((first, second))
}

/// Draws an index with probability proportional to `weights`.
fn draw(weights: impl Iterator<Item = f64> + Clone, rng: &mut impl Rng) -> usize {
    let total: f64 = weights.clone().sum();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (x, w) in weights.enumerate() {
        if w > 0.0 {
            last = x;
            acc += w;
            if acc > target {
                return x;
            }
        }
    }
    last
}

/// Exact epoch rows of one chain and the coupling built on them.
pub struct MaximalCoupling {
    kernel: SparseKernel,
    epoch: f64,
    tol: f64,
    rows: Vec<OnceLock<Vec<f64>>>,
}

impl MaximalCoupling {
    pub fn new(
        family: ShuffleFamily,
        k: usize,
        epoch: f64,
        tol: f64,
        state_cap: usize,
    ) -> Result<Self> {
        if !(epoch > 0.0 && epoch.is_finite()) {
            return Err(domain("epoch length must be positive"));
        }
        let kernel = marginal_kernel_with_cap(family, k, state_cap)?;
        let states = kernel.space().size();
        let rows: Vec<OnceLock<Vec<f64>>> = (0..states).map(|_| OnceLock::new()).collect();
        if states <= EAGER_ROWS {
            let all: Vec<usize> = (0..states).collect();
            let computed = transient_map(&kernel, &all, &[epoch], tol, |_, _, d| normalized(d))?;
            for (slot, row) in rows
                .iter()
                .zip(computed.into_iter().next().unwrap_or_default())
            {
                let _ = slot.set(row);
            }
        }
        Ok(Self {
            kernel,
            epoch,
            tol,
            rows,
        })
    }

    pub fn kernel(&self) -> &SparseKernel {
        &self.kernel
    }

    pub fn epoch(&self) -> f64 {
        self.epoch
    }

    pub fn states(&self) -> usize {
        self.rows.len()
    }

    /// The law of the state one epoch after `state`.
    pub fn row(&self, state: usize) -> &[f64] {
        self.rows[state].get_or_init(|| {
            transient_distribution(&self.kernel, state, self.epoch, self.tol)
                .map(|d| normalized(d.weights()))
                .expect("epoch and tolerance were validated")
        })
    }

    /// One coupled epoch from `(x, y)`.
    pub fn step(&self, x: usize, y: usize, rng: &mut impl Rng) -> (usize, usize) {
        if x == y {
            let z = draw(self.row(x).iter().copied(), rng);
            return (z, z);
        }
        let (p, q) = (self.row(x), self.row(y));
        let overlap: f64 = p.iter().zip(q).map(|(a, b)| a.min(*b)).sum();
        if rng.gen::<f64>() < overlap {
            let z = draw(p.iter().zip(q).map(|(a, b)| a.min(*b)), rng);
            (z, z)
        } else {
            let x2 = draw(p.iter().zip(q).map(|(a, b)| a - a.min(*b)), rng);
            let y2 = draw(q.iter().zip(p).map(|(b, a)| b - a.min(*b)), rng);
            (x2, y2)
        }
    }

    fn rank(&self, tuple: &[Position]) -> Result<usize> {
        let n = self.kernel.family().n;
        let space = self.kernel.space();
        if tuple.len() != space.k() {
            return Err(domain(format!("expected a tuple of {} cells", space.k())));
        }
        let cells = tuple
            .iter()
            .map(|p| p.check(n).map(|p| p.index(n)))
            .collect::<Result<Vec<_>>>()?;
        for (a, c) in cells.iter().enumerate() {
            if cells[a + 1..].contains(c) {
                return Err(domain("tuple has repeated cells"));
            }
        }
        Ok(space.rank(&cells))
    }

    /// Coupling times from the given pair of tuples.
    pub fn run(
        &self,
        start: (&[Position], &[Position]),
        strategy: &str,
        options: &CouplingOptions,
    ) -> Result<CouplingRun> {
        let (x0, y0) = (self.rank(start.0)?, self.rank(start.1)?);
        let outcomes: Vec<Option<usize>> = (0..options.reps as u64)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replicate_rng(options.seed, rep);
                let (mut x, mut y) = (x0, y0);
                for epochs in 0..options.max_epochs {
                    if x == y {
                        return Some(epochs);
                    }
                    (x, y) = self.step(x, y, &mut rng);
                }
                (x == y).then_some(options.max_epochs)
            })
            .collect();
        let censored = outcomes.iter().filter(|o| o.is_none()).count();
        let times = outcomes
            .into_iter()
            .map(|o| o.unwrap_or(options.max_epochs) as f64 * self.epoch)
            .collect();
        Ok(CouplingRun {
            n: self.kernel.family().n,
            k: self.kernel.space().k(),
            strategy: strategy.to_string(),
            seed: options.seed,
            epoch: self.epoch,
            start: (start.0.to_vec(), start.1.to_vec()),
            times,
            censored,
        })
    }

    /// States of both copies after each of `epochs` epochs, indexed `[epoch][rep]`.
    pub fn trace(
        &self,
        start: (&[Position], &[Position]),
        epochs: usize,
        reps: usize,
        seed: u64,
    ) -> Result<Vec<Vec<(usize, usize)>>> {
        let (x0, y0) = (self.rank(start.0)?, self.rank(start.1)?);
        let per_rep: Vec<Vec<(usize, usize)>> = (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replicate_rng(seed, rep);
                let mut state = (x0, y0);
                (0..epochs)
                    .map(|_| {
                        state = self.step(state.0, state.1, &mut rng);
                        state
                    })
                    .collect()
            })
            .collect();
        Ok((0..epochs)
            .map(|e| per_rep.iter().map(|r| r[e]).collect())
            .collect())
    }

    /// `P(T > e · epoch)` for every pair of starting states and `e = 0..=epochs`,
    /// by evolving the coupled pair chain backwards.
    pub fn exact_survival(&self, epochs: usize) -> Result<SurvivalTable> {
        let states = self.states();
        check_cap(
            "exact survival states",
            states as u128,
            MAX_EXACT_SURVIVAL_STATES as u128,
        )?;
        let rows: Vec<&[f64]> = (0..states).map(|x| self.row(x)).collect();
        let mut current: Vec<f64> = (0..states * states)
            .map(|xy| if xy / states == xy % states { 0.0 } else { 1.0 })
            .collect();
        let mut table = vec![current.clone()];
        for _ in 0..epochs {
            let next: Vec<f64> = (0..states * states)
                .into_par_iter()
                .map(|xy| {
                    let (x, y) = (xy / states, xy % states);
                    if x == y {
                        return 0.0;
                    }
                    let (p, q) = (rows[x], rows[y]);
                    let apart = 1.0 - p.iter().zip(q).map(|(a, b)| a.min(*b)).sum::<f64>();
                    if apart <= 1e-15 {
                        return 0.0;
                    }
                    let mut total = 0.0;
                    for (x2, &a) in p.iter().enumerate() {
                        let px = a - a.min(q[x2]);
                        if px == 0.0 {
                            continue;
                        }
                        let survive = &current[x2 * states..(x2 + 1) * states];
                        let inner: f64 = q
                            .iter()
                            .zip(p)
                            .zip(survive)
                            .map(|((b, a), s)| (b - a.min(*b)) * s)
                            .sum();
                        total += px * inner;
                    }
                    (total / apart).clamp(0.0, 1.0)
                })
                .collect();
            current = next;
            table.push(current.clone());
        }
        Ok(SurvivalTable {
            states,
            epoch: self.epoch,
            values: table,
        })
    }
}

fn normalized(d: &[f64]) -> Vec<f64> {
    let total: f64 = d.iter().sum();
    d.iter().map(|w| (w / total).max(0.0)).collect()
}

/// Exact coupling survival probabilities, indexed by epoch and starting pair.
#[derive(Debug, Clone)]
pub struct SurvivalTable {
    states: usize,
    epoch: f64,
    values: Vec<Vec<f64>>,
}

impl SurvivalTable {
    fn epoch_index(&self, t: f64) -> usize {
        ((t / self.epoch + 1e-12).floor() as usize).min(self.values.len() - 1)
    }

    /// `P(T > t)` from the pair `(x, y)`; the copies only meet at epoch boundaries.
    pub fn pair(&self, x: usize, y: usize, t: f64) -> f64 {
        self.values[self.epoch_index(t)][x * self.states + y]
    }

    /// `max_x Σ_y P(T_xy > t) / states`: the survival of the coupling of the worst start
    /// with a stationary copy, which bounds that start's distance to uniform.
    pub fn worst_against_stationary(&self, t: f64) -> f64 {
        let row = &self.values[self.epoch_index(t)];
        (0..self.states)
            .map(|x| {
                row[x * self.states..(x + 1) * self.states]
                    .iter()
                    .sum::<f64>()
                    / self.states as f64
            })
            .fold(0.0, f64::max)
    }

    /// Whether `t` lies beyond the last tabulated epoch.
    pub fn covers(&self, t: f64) -> bool {
        t / self.epoch < self.values.len() as f64
    }
}

/// Coupling times of `reps` runs from the adversarial starting tuples.
pub fn coupling_times(
    family: ShuffleFamily,
    k: usize,
    options: &CouplingOptions,
) -> Result<CouplingRun> {
    let (a, b) = adversarial_starts(family.n, k)?;
    let coupling = MaximalCoupling::new(family, k, options.epoch, options.tol, options.state_cap)?;
    coupling.run((&a, &b), "adversarial", options)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fitted_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(domain("need at least two points with positive coordinates"));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let count = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FamilyTag;

    fn family(n: usize) -> ShuffleFamily {
        ShuffleFamily::new(FamilyTag::S, n).unwrap()
    }

    #[test]
    fn identical_starts_couple_at_once() {
        let c = MaximalCoupling::new(family(4), 1, 1.0, DEFAULT_TOL, DEFAULT_STATE_CAP).unwrap();
        let p = [Position::new(2, 3).unwrap()];
        let run = c
            .run(
                (&p, &p),
                "identical",
                &CouplingOptions {
                    reps: 20,
                    ..Default::default()
                },
            )
            .unwrap();
        assert!(run.times.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn adversarial_tuples() {
        let (a, b) = adversarial_starts(5, 2).unwrap();
        assert_eq!(
            a,
            vec![Position::new(1, 5).unwrap(), Position::new(2, 4).unwrap()]
        );
        assert_eq!(
            b,
            vec![Position::new(5, 1).unwrap(), Position::new(4, 2).unwrap()]
        );
        assert!(adversarial_starts(3, 4).is_err());
    }

    #[test]
    fn survival_starts_at_one_and_decreases() {
        let c = MaximalCoupling::new(family(3), 1, 1.0, DEFAULT_TOL, DEFAULT_STATE_CAP).unwrap();
        let table = c.exact_survival(30).unwrap();
        assert_eq!(table.pair(0, 1, 0.0), 1.0);
        assert_eq!(table.pair(4, 4, 0.0), 0.0);
        let mut last = 1.0;
        for e in 0..=30 {
            let s = table.pair(2, 6, e as f64);
            assert!(s <= last + 1e-12);
            last = s;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn sampled_survival_tracks_exact() {
        let c = MaximalCoupling::new(family(3), 1, 1.0, DEFAULT_TOL, DEFAULT_STATE_CAP).unwrap();
        let (a, b) = adversarial_starts(3, 1).unwrap();
        let options = CouplingOptions {
            reps: 4000,
            seed: 5,
            ..Default::default()
        };
        let run = c.run((&a, &b), "adversarial", &options).unwrap();
        let table = c.exact_survival(10).unwrap();
        let (x, y) = (a[0].index(3), b[0].index(3));
        for t in [1.0, 2.0, 4.0] {
            let exact = table.pair(x, y, t);
            let se = (exact * (1.0 - exact) / 4000.0).sqrt();
            assert!((run.survival(t) - exact).abs() <= 5.0 * se + 1e-9, "t={t}");
        }
    }

    #[test]
    fn exponent_of_a_power_law() {
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0].iter().map(|&x| (x, 3.0 * x * x)).collect();
        assert!((fitted_exponent(&pts).unwrap() - 2.0).abs() < 1e-12);
    }
}
