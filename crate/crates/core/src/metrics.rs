//! Distances to uniformity: exact k-set curves, Monte Carlo estimates, exact
//! full-deck total variation for tiny decks, and two rigorous lower bounds.

use std::fmt::{self, Write as _};

use rand_distr::{Binomial, Distribution as _};
use serde::{Deserialize, Serialize};
use statrs::distribution::{DiscreteCDF, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};
use crate::family::{FamilyTag, ShuffleFamily};
use crate::group::full_group_kernel;
use crate::kernel::{marginal_kernel_with_cap, start_classes, TupleSpace};
use crate::perm::Position;
use crate::sample::{replicate_rng, track_cards};
use crate::transient::{transient_map, tv_to_uniform};

/// How a reported value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Mc,
    Bound,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Exact => "exact",
            Provenance::Mc => "mc",
            Provenance::Bound => "bound",
        })
    }
}

/// Number of tracked cards, or the whole deck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TupleSize {
    Cards(usize),
    Full,
}

impl fmt::Display for TupleSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TupleSize::Cards(k) => write!(f, "{k}"),
            TupleSize::Full => f.write_str("full"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub method: Provenance,
    /// Starting tuple attaining the maximum, for exact k-set curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Position>>,
    /// Percentile bootstrap interval, for Monte Carlo points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<(f64, f64)>,
}

impl CurvePoint {
    fn certain(t: f64, value: f64, method: Provenance) -> Self {
        Self {
            t,
            value,
            lo: value,
            hi: value,
            method,
            witness: None,
            bootstrap: None,
        }
    }
}

/// Run parameters recorded alongside a curve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A distance (or bound) as a function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCurve {
    pub quantity: String,
    pub family: FamilyTag,
    pub n: usize,
    pub k: TupleSize,
    pub points: Vec<CurvePoint>,
    pub meta: CurveMeta,
}

/// Column header of the CSV form of a [`DistanceCurve`].
pub const CSV_HEADER: &str = "t,value,lo,hi,method";

impl DistanceCurve {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Whether values never increase by more than `slack` from one point to the next.
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].value <= w[0].value + slack)
    }

    /// First time the curve falls to `level`, by linear interpolation.
    pub fn crossing_time(&self, level: f64) -> Option<f64> {
        let pairs: Vec<(f64, f64)> = self.points.iter().map(|p| (p.t, p.value)).collect();
        crossing_time(&pairs, level)
    }

    /// CSV with `# key: value` comment lines first. Floats use shortest round-trip form.
    pub fn to_csv(&self, preamble: &[(String, String)]) -> String {
        let mut out = String::new();
        for (key, value) in preamble {
            let _ = writeln!(out, "# {key}: {value}");
        }
        let _ = writeln!(out, "# quantity: {}", self.quantity);
        let _ = writeln!(out, "# family: {}", self.family);
        let _ = writeln!(out, "# n: {}", self.n);
        let _ = writeln!(out, "# k: {}", self.k);
        if let Some(tol) = self.meta.tol {
            let _ = writeln!(out, "# tol: {tol}");
        }
        if let Some(seed) = self.meta.seed {
            let _ = writeln!(out, "# seed: {seed}");
        }
        if let Some(reps) = self.meta.reps {
            let _ = writeln!(out, "# reps: {reps}");
        }
        for note in &self.meta.notes {
            let _ = writeln!(out, "# note: {note}");
        }
        out.push_str(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{},{}", p.t, p.value, p.lo, p.hi, p.method);
        }
        out
    }
}

/// First `t` at which the sampled curve reaches `level`, interpolating linearly
/// inside the first segment that starts above the level and ends at or below it.
pub fn crossing_time(points: &[(f64, f64)], level: f64) -> Option<f64> {
    if let Some(&(t, v)) = points.first() {
        if v <= level {
            return Some(t);
        }
    }
    points.windows(2).find_map(|w| {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        (v0 > level && v1 <= level).then(|| t0 + (v0 - level) / (v0 - v1) * (t1 - t0))
    })
}

/// Exact k-set distance curve: at each time, the largest total variation distance
/// to uniform over all starting tuples.
pub fn kset_distance_exact_curve(
    family: ShuffleFamily,
    k: usize,
    times: &[f64],
    tol: f64,
    state_cap: usize,
) -> Result<DistanceCurve> {
    let kernel = marginal_kernel_with_cap(family, k, state_cap)?;
    let space = kernel.space();
    let starts: Vec<usize> = start_classes(family, space)
        .into_iter()
        .map(|(u, _)| u)
        .collect();
    let distances = transient_map(&kernel, &starts, times, tol, |_, _, d| tv_to_uniform(d))?;
    let n = family.n;
    let points = times
        .iter()
        .zip(distances)
        .map(|(&t, row)| {
            let (best, value) =
                row.iter()
                    .enumerate()
                    .fold(
                        (0, f64::NEG_INFINITY),
                        |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
                    );
            let witness = space
                .tuple(starts[best])
                .into_iter()
                .map(|c| Position::from_index(n, c))
                .collect();
            CurvePoint {
                witness: Some(witness),
                ..CurvePoint::certain(t, value.clamp(0.0, 1.0), Provenance::Exact)
            }
        })
        .collect();
    Ok(DistanceCurve {
        quantity: "kset_distance".into(),
        family: family.tag,
        n,
        k: TupleSize::Cards(k),
        points,
        meta: CurveMeta {
            tol: Some(tol),
            ..CurveMeta::default()
        },
    })
}

/// Exact k-set distance at a single time, with the default state cap.
pub fn kset_distance_exact(family: ShuffleFamily, k: usize, t: f64, tol: f64) -> Result<f64> {
    let curve = kset_distance_exact_curve(family, k, &[t], tol, crate::kernel::DEFAULT_STATE_CAP)?;
    Ok(curve.points[0].value)
}

/// Exact total variation distance to uniform of the tuple started at `start`.
pub fn tuple_distance_from(
    family: ShuffleFamily,
    start: &[Position],
    times: &[f64],
    tol: f64,
    state_cap: usize,
) -> Result<Vec<f64>> {
    let kernel = marginal_kernel_with_cap(family, start.len(), state_cap)?;
    let cells = start
        .iter()
        .map(|p| p.check(family.n).map(|p| p.index(family.n)))
        .collect::<Result<Vec<usize>>>()?;
    let mut sorted = cells.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != cells.len() {
        return Err(domain("start tuple has repeated cells"));
    }
    let rank = kernel.space().rank(&cells);
    let out = transient_map(&kernel, &[rank], times, tol, |_, _, d| tv_to_uniform(d))?;
    Ok(out.into_iter().map(|row| row[0]).collect())
}

/// Exact total variation distance of the full deck to uniform on the generated group.
pub fn full_tv_exact_curve(
    family: ShuffleFamily,
    times: &[f64],
    tol: f64,
) -> Result<DistanceCurve> {
    let kernel = full_group_kernel(family)?;
    let values = transient_map(&kernel, &[0], times, tol, |_, _, d| tv_to_uniform(d))?;
    let points = times
        .iter()
        .zip(values)
        .map(|(&t, v)| CurvePoint::certain(t, v[0].clamp(0.0, 1.0), Provenance::Exact))
        .collect();
    Ok(DistanceCurve {
        quantity: "full_tv".into(),
        family: family.tag,
        n: family.n,
        k: TupleSize::Full,
        points,
        meta: CurveMeta {
            tol: Some(tol),
            notes: vec![format!("generated group order {}", kernel.order())],
            ..CurveMeta::default()
        },
    })
}

pub fn full_tv_exact(family: ShuffleFamily, t: f64, tol: f64) -> Result<f64> {
    Ok(full_tv_exact_curve(family, &[t], tol)?.points[0].value)
}

/// `max_K [P(Poisson(t) ≤ K) − G^K / (n²)!]` over `K ∈ [0, ⌈t + 10√t⌉]`, clamped to `[0, 1]`,
/// with `G` the number of generators: at most `G^K` arrangements are reachable in `K` jumps.
pub fn counting_lower_bound(family: ShuffleFamily, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(domain(format!(
            "time must be finite and nonnegative, got {t}"
        )));
    }
    let log_generators = (family.generator_count() as f64).ln();
    let log_arrangements = ln_gamma(family.cells() as f64 + 1.0);
    let top = (t + 10.0 * t.sqrt()).ceil() as u64;
    let cdf = |jumps: u64| -> Result<f64> {
        if t == 0.0 {
            return Ok(1.0);
        }
        let poisson = Poisson::new(t).map_err(|e| domain(e.to_string()))?;
        Ok(poisson.cdf(jumps))
    };
    let mut best = f64::NEG_INFINITY;
    for jumps in 0..=top {
        let reachable = (jumps as f64 * log_generators - log_arrangements).exp();
        best = best.max(cdf(jumps)? - reachable);
    }
    Ok(best.clamp(0.0, 1.0))
}

/// `max(0, e^{−t/n²} − 1/n²)`: the card at `(n, n)` moves only under the full rotation.
pub fn stuck_card_lower_bound(n: usize, t: f64) -> f64 {
    let cells = (n * n) as f64;
    ((-t / cells).exp() - 1.0 / cells).max(0.0)
}

/// Settings of a Monte Carlo distance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub reps: usize,
    pub seed: u64,
    /// Miscoverage of the reported interval.
    pub alpha: f64,
    pub bootstrap_resamples: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            reps: 10_000,
            seed: 1,
            alpha: 0.05,
            bootstrap_resamples: 200,
        }
    }
}

/// Note attached to every Monte Carlo curve.
pub const MC_BIAS_NOTE: &str = "plug-in TV is biased upward by at most 0.5*sqrt((N-1)/reps); \
    [lo,hi] = [v - dev - bias, v + dev] with dev = sqrt(ln(2/alpha)/(2 reps))";

/// Plug-in estimate of the k-set distance for the cards starting at `start` (default:
/// the first `k` cells in row-major order).
pub fn kset_distance_mc(
    family: ShuffleFamily,
    start: &[Position],
    times: &[f64],
    options: McOptions,
) -> Result<DistanceCurve> {
    if options.reps == 0 {
        return Err(domain("at least one replicate is required"));
    }
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(domain("alpha must lie in (0, 1)"));
    }
    let n = family.n;
    let k = start.len();
    let space = TupleSpace::new(family.cells(), k, usize::MAX)?;
    let cells = start
        .iter()
        .map(|p| p.check(n).map(|p| p.index(n)))
        .collect::<Result<Vec<usize>>>()?;
    let tracked = track_cards(family, &cells, times, options.reps, options.seed)?;
    let states = space.size() as f64;
    let reps = options.reps as f64;
    let bias = 0.5 * ((states - 1.0) / reps).sqrt();
    let dev = ((2.0 / options.alpha).ln() / (2.0 * reps)).sqrt();
    let points = times
        .iter()
        .zip(tracked)
        .enumerate()
        .map(|(q, (&t, positions))| {
            let mut ranks: Vec<usize> = positions.iter().map(|c| space.rank(c)).collect();
            ranks.sort_unstable();
            let counts = run_lengths(&ranks);
            let value = plug_in_tv(&counts, options.reps, states);
            let bootstrap = bootstrap_interval(&counts, options, states, q as u64)?;
            Ok(CurvePoint {
                t,
                value,
                lo: (value - dev - bias).max(0.0),
                hi: (value + dev).min(1.0),
                method: Provenance::Mc,
                witness: None,
                bootstrap: Some(bootstrap),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceCurve {
        quantity: "kset_distance".into(),
        family: family.tag,
        n,
        k: TupleSize::Cards(k),
        points,
        meta: CurveMeta {
            seed: Some(options.seed),
            reps: Some(options.reps),
            notes: vec![
                format!(
                    "cards start at {}",
                    start
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(" ")
                ),
                MC_BIAS_NOTE.into(),
            ],
            ..CurveMeta::default()
        },
    })
}

fn run_lengths(sorted: &[usize]) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].partition_point(|&r| r == sorted[i]) + i;
        out.push((j - i) as u64);
        i = j;
    }
    out
}

/// Half the L1 distance from the empirical law to uniform on `states` states.
fn plug_in_tv(counts: &[u64], reps: usize, states: f64) -> f64 {
    let u = 1.0 / states;
    let seen: f64 = counts
        .iter()
        .map(|&c| (c as f64 / reps as f64 - u).abs())
        .sum();
    let unseen = (states - counts.len() as f64) * u;
    (0.5 * (seen + unseen)).clamp(0.0, 1.0)
}

fn bootstrap_interval(
    counts: &[u64],
    options: McOptions,
    states: f64,
    stream: u64,
) -> Result<(f64, f64)> {
    if options.bootstrap_resamples == 0 {
        let v = plug_in_tv(counts, options.reps, states);
        return Ok((v, v));
    }
    let mut rng = replicate_rng(options.seed, (1u64 << 63) + stream);
    let mut resampled = vec![0u64; counts.len()];
    let mut values = Vec::with_capacity(options.bootstrap_resamples);
    for _ in 0..options.bootstrap_resamples {
        // Multinomial draw as a chain of conditional binomials.
        let mut left = options.reps as u64;
        let mut mass_left = options.reps as u64;
        for (slot, &c) in resampled.iter_mut().zip(counts) {
            if left == 0 || mass_left == 0 {
                *slot = 0;
                continue;
            }
            let p = (c as f64 / mass_left as f64).min(1.0);
            let draw = Binomial::new(left, p).map_err(|e| domain(e.to_string()))?;
            *slot = draw.sample(&mut rng);
            left -= *slot;
            mass_left -= c;
        }
        let nonzero: Vec<u64> = resampled.iter().copied().filter(|&c| c > 0).collect();
        values.push(plug_in_tv(&nonzero, options.reps, states));
    }
    values.sort_by(f64::total_cmp);
    let quantile = |p: f64| values[((p * (values.len() - 1) as f64).round()) as usize];
    Ok((
        quantile(options.alpha / 2.0),
        quantile(1.0 - options.alpha / 2.0),
    ))
}
