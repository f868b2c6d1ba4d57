//! One function per subcommand, each turning a validated config into an artifact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use cornershuffle::coupling::{coupling_times, CouplingOptions, CouplingRun, MaximalCoupling};
use cornershuffle::decomp::{
    comparison_constant_with_cap, decompose_three_cycle, geodesic_word, survey_with_cap, CaseStats,
    DecompositionCase, DecompositionFailure, Scheme, MAX_GENERAL_LEN, MAX_W_LEN, MAX_Z_LEN,
};
use cornershuffle::family::{FamilyTag, ShuffleFamily};
use cornershuffle::geometry::geometry_report;
use cornershuffle::metrics::{
    counting_lower_bound, full_tv_exact_curve, kset_distance_exact_curve, kset_distance_mc,
    stuck_card_lower_bound, CurveMeta, CurvePoint, DistanceCurve, McOptions, Provenance, TupleSize,
};
use cornershuffle::partition::partitions;
use cornershuffle::sample::replicate_rng;
use cornershuffle::spectral::{
    alternating_mean_sign, char_bounds, dimension, ingram_r, mn_character, UblEvaluator,
};
use cornershuffle::{Partition, Perm, Position};
use num_traits::ToPrimitive;
use rand::seq::index::sample;
use serde::Serialize;

use crate::config::{Command, Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{json, preamble, preamble_text, Artifact};
use crate::selftest;

pub const DEFAULT_MC_REPS: usize = 10_000;
pub const DEFAULT_COUPLING_REPS: usize = 1000;

/// Runs the configured command.
pub fn execute(config: &RunConfig) -> CliResult<Artifact> {
    config.validate()?;
    match config.command {
        Command::Simulate => simulate(config),
        Command::Exact => exact(config),
        Command::ExactFull => exact_full(config),
        Command::Bounds => bounds(config),
        Command::VerifyDecomposition => verify_decomposition(config),
        Command::CompareConstant => compare_constant(config),
        Command::Characters => characters(config),
        Command::SpectralBound => spectral_bound(config),
        Command::Geometry => geometry(config),
        Command::Coupling => coupling(config),
        Command::Selftest => Ok(selftest::artifact(config)),
    }
}

fn curve_artifact(config: &RunConfig, curve: &DistanceCurve, provenance: &str) -> String {
    match config.format() {
        Format::Csv => {
            let mut lines = preamble(config, provenance);
            if curve.meta.seed.is_some() {
                lines.retain(|(k, _)| k != "seed");
            }
            curve.to_csv(&lines)
        }
        Format::Json => json(config, provenance, curve),
    }
}

fn simulate(config: &RunConfig) -> CliResult<Artifact> {
    let family = config.family_or(FamilyTag::S)?;
    let start = match config.start_cells()? {
        Some(cells) => {
            if config.k.is_some_and(|k| k != cells.len()) {
                return Err(CliError::Config(
                    "--k disagrees with the number of --start cells".into(),
                ));
            }
            cells
        }
        None => cornershuffle::coupling::adversarial_starts(family.n, config.k.unwrap_or(1))?.0,
    };
    let options = McOptions {
        reps: config.reps.unwrap_or(DEFAULT_MC_REPS),
        seed: config.seed,
        alpha: config.alpha.unwrap_or(McOptions::default().alpha),
        ..McOptions::default()
    };
    let curve = kset_distance_mc(family, &start, &config.grid()?.times(), options)?;
    Ok(Artifact::ok(curve_artifact(config, &curve, "mc")))
}

fn exact(config: &RunConfig) -> CliResult<Artifact> {
    let family = config.family_or(FamilyTag::S)?;
    let curve = kset_distance_exact_curve(
        family,
        config.k.unwrap_or(1),
        &config.grid()?.times(),
        config.tol,
        config.state_cap()?,
    )?;
    Ok(Artifact::ok(curve_artifact(config, &curve, "exact")))
}

fn exact_full(config: &RunConfig) -> CliResult<Artifact> {
    let family = config.family_or(FamilyTag::S)?;
    let curve = full_tv_exact_curve(family, &config.grid()?.times(), config.tol)?;
    Ok(Artifact::ok(curve_artifact(config, &curve, "exact")))
}

#[derive(Serialize)]
struct BoundRow {
    t: f64,
    counting: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stuck_card: Option<f64>,
}

fn bounds(config: &RunConfig) -> CliResult<Artifact> {
    let family = config.family_or(FamilyTag::S)?;
    let rows = config
        .grid()?
        .times()
        .into_iter()
        .map(|t| {
            Ok(BoundRow {
                t,
                counting: counting_lower_bound(family, t)?,
                stuck_card: (family.tag == FamilyTag::S0)
                    .then(|| stuck_card_lower_bound(family.n, t)),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let body = match config.format() {
        Format::Json => json(config, "bound", &rows),
        Format::Csv => {
            let mut out = preamble_text(&preamble(config, "bound"));
            out.push_str("t,counting,stuck_card\n");
            for r in &rows {
                let stuck = r.stuck_card.map(|v| v.to_string()).unwrap_or_default();
                let _ = writeln!(out, "{},{},{}", r.t, r.counting, stuck);
            }
            out
        }
    };
    Ok(Artifact::ok(body))
}

/// Length ceiling of each construction; geodesic words have none.
pub fn length_ceiling(case: DecompositionCase) -> Option<usize> {
    match case {
        DecompositionCase::Z => Some(MAX_Z_LEN),
        DecompositionCase::W => Some(MAX_W_LEN),
        DecompositionCase::General => Some(MAX_GENERAL_LEN),
        DecompositionCase::Geodesic => None,
    }
}

#[derive(Serialize)]
struct SupportCheck {
    max: u64,
    ceiling: u64,
    ok: bool,
}

#[derive(Serialize)]
struct DecompositionReport {
    n: usize,
    scheme: Scheme,
    mode: &'static str,
    three_cycles_checked: u64,
    cases: BTreeMap<DecompositionCase, CaseStats>,
    max_word_length: usize,
    length_ceilings_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b_float: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    support: Option<SupportCheck>,
    failures: Vec<DecompositionFailure>,
}

fn ceilings_ok(cases: &BTreeMap<DecompositionCase, CaseStats>) -> bool {
    cases
        .iter()
        .all(|(case, stats)| length_ceiling(*case).is_none_or(|cap| stats.max_len <= cap))
}

fn verify_decomposition(config: &RunConfig) -> CliResult<Artifact> {
    let n = config.require_n()?;
    let scheme = config.scheme.unwrap_or(Scheme::Explicit);
    let report = match config.samples {
        None => {
            let survey = survey_with_cap(n, FamilyTag::S, scheme, config.side_cap()?)?;
            let support_ok = survey.max_support_distinct_lines <= survey.support_ceiling;
            DecompositionReport {
                n,
                scheme,
                mode: "exhaustive",
                three_cycles_checked: survey.three_cycles,
                max_word_length: survey.cases.values().map(|s| s.max_len).max().unwrap_or(0),
                length_ceilings_ok: ceilings_ok(&survey.cases),
                b: survey.failures.is_empty().then(|| survey.b.to_string()),
                b_float: survey.failures.is_empty().then_some(survey.b_float),
                support: Some(SupportCheck {
                    max: survey.max_support_distinct_lines,
                    ceiling: survey.support_ceiling,
                    ok: support_ok,
                }),
                cases: survey.cases,
                failures: survey.failures,
            }
        }
        Some(samples) => sampled_decompositions(n, scheme, samples, config.seed)?,
    };
    let mut problems = Vec::new();
    if !report.failures.is_empty() {
        problems.push(format!("{} three-cycles failed", report.failures.len()));
    }
    if !report.length_ceilings_ok {
        problems.push("a word exceeds its length ceiling".to_string());
    }
    if report.support.as_ref().is_some_and(|s| !s.ok) {
        problems.push("support count exceeds 27 n^4".to_string());
    }
    Ok(Artifact {
        body: json(config, "exact", &report),
        failure: (!problems.is_empty()).then(|| problems.join("; ")),
    })
}

/// Decomposes `samples` uniformly drawn three-cycles and re-multiplies every word.
fn sampled_decompositions(
    n: usize,
    scheme: Scheme,
    samples: usize,
    seed: u64,
) -> CliResult<DecompositionReport> {
    if n < 2 {
        return Err(CliError::Config("three-cycles need n >= 2".into()));
    }
    let mut rng = replicate_rng(seed, 0);
    let mut cases: BTreeMap<DecompositionCase, CaseStats> = BTreeMap::new();
    let mut failures = Vec::new();
    for _ in 0..samples {
        let cells: Vec<Position> = sample(&mut rng, n * n, 3)
            .into_iter()
            .map(|x| Position::from_index(n, x))
            .collect();
        let target = Perm::from_cycle(n, &cells)?;
        let label = format!("{}->{}->{}", cells[0], cells[1], cells[2]);
        let outcome = match scheme {
            Scheme::Explicit => decompose_three_cycle(n, &target).map(|d| (d.case, d.word)),
            Scheme::Geodesic => geodesic_word(n, &target).map(|w| (DecompositionCase::Geodesic, w)),
        };
        match outcome {
            Ok((case, word)) => {
                if Perm::from_moves(n, word.moves())? != target {
                    failures.push(DecompositionFailure {
                        cycle: label,
                        reason: "word does not multiply to the cycle".into(),
                        word: Some(word.to_string()),
                    });
                    continue;
                }
                let stats = cases.entry(case).or_insert(CaseStats {
                    count: 0,
                    max_len: 0,
                });
                stats.count += 1;
                stats.max_len = stats.max_len.max(word.len());
            }
            Err(e) => failures.push(DecompositionFailure {
                cycle: label,
                reason: e.to_string(),
                word: None,
            }),
        }
    }
    Ok(DecompositionReport {
        n,
        scheme,
        mode: "samples",
        three_cycles_checked: samples as u64,
        max_word_length: cases.values().map(|s| s.max_len).max().unwrap_or(0),
        length_ceilings_ok: ceilings_ok(&cases),
        b: None,
        b_float: None,
        support: None,
        cases,
        failures,
    })
}

fn default_scheme(n: usize) -> Scheme {
    if n <= 3 {
        Scheme::Geodesic
    } else {
        Scheme::Explicit
    }
}

fn compare_constant(config: &RunConfig) -> CliResult<Artifact> {
    let n = config.require_n()?;
    let family = config.family.unwrap_or(FamilyTag::S);
    let scheme = config.scheme.unwrap_or(default_scheme(n));
    let report = comparison_constant_with_cap(n, family, scheme, config.side_cap()?)?;
    Ok(Artifact::ok(json(config, "exact", &report)))
}

#[derive(Serialize)]
struct CharacterRow {
    partition: String,
    d: String,
    chi3: String,
    r: String,
    bound: String,
    case: String,
}

fn characters(config: &RunConfig) -> CliResult<Artifact> {
    let m = config
        .m
        .ok_or_else(|| CliError::Config("`characters` needs --m".into()))?;
    if m < 3 {
        return Err(CliError::Config(
            "the three-cycle class needs m >= 3".into(),
        ));
    }
    let class = Partition::three_cycle_class(m)?;
    let one_dimensional = [Partition::trivial(m), Partition::alternating(m)];
    let rows = partitions(m)?
        .into_iter()
        .map(|p| {
            let (bound, case) = if one_dimensional.contains(&p) {
                (String::new(), String::new())
            } else {
                let b = char_bounds(&p)?;
                (b.value.to_string(), b.case.to_string())
            };
            Ok(CharacterRow {
                d: dimension(&p).to_string(),
                chi3: mn_character(&p, &class)?.to_string(),
                r: ingram_r(&p)?.to_string(),
                partition: p.to_string(),
                bound,
                case,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let body = match config.format() {
        Format::Json => json(config, "exact", &rows),
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                writer
                    .serialize(row)
                    .map_err(|e| CliError::Config(format!("csv: {e}")))?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| CliError::Config(format!("csv: {e}")))?;
            let mut out = preamble_text(&preamble(config, "exact"));
            out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
            out
        }
    };
    Ok(Artifact::ok(body))
}

/// Upper-bound-lemma curve in shuffle time, with the comparison constant and sign eigenvalue used.
pub fn ubl_curve(
    family: ShuffleFamily,
    times: &[f64],
    comparison: f64,
) -> CliResult<DistanceCurve> {
    let lambda = alternating_mean_sign(family)?;
    let lambda_value = lambda.to_f64().unwrap_or(f64::NAN);
    let evaluator = UblEvaluator::new(family.cells())?;
    let points = times
        .iter()
        .map(|&s| {
            let value = evaluator
                .bound(s / comparison, comparison, lambda_value)?
                .clamped;
            Ok(CurvePoint {
                t: s,
                value,
                lo: value,
                hi: value,
                method: Provenance::Bound,
                witness: None,
                bootstrap: None,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(DistanceCurve {
        quantity: "ubl_bound".into(),
        family: family.tag,
        n: family.n,
        k: TupleSize::Full,
        points,
        meta: CurveMeta {
            notes: vec![
                format!("comparison constant {comparison}"),
                format!("sign eigenvalue {lambda}"),
            ],
            ..CurveMeta::default()
        },
    })
}

fn spectral_bound(config: &RunConfig) -> CliResult<Artifact> {
    let family = config.family_or(FamilyTag::S)?;
    if family.tag == FamilyTag::R {
        return Err(CliError::Config(
            "the bound is for the corner shuffles S0 and S".into(),
        ));
    }
    let comparison = match config.comparison {
        Some(c) => c,
        None => {
            let scheme = config.scheme.unwrap_or(default_scheme(family.n));
            comparison_constant_with_cap(family.n, family.tag, scheme, config.side_cap()?)?.b_float
        }
    };
    let curve = ubl_curve(family, &config.grid()?.times(), comparison)?;
    Ok(Artifact::ok(curve_artifact(config, &curve, "bound")))
}

fn geometry(config: &RunConfig) -> CliResult<Artifact> {
    let report = geometry_report(config.require_n()?)?;
    let failure =
        (!report.formula_matches).then(|| "jump sets disagree with the closed form".to_string());
    Ok(Artifact {
        body: json(config, "exact", &report),
        failure,
    })
}

#[derive(Serialize)]
struct CouplingSummary {
    mean: f64,
    q50: f64,
    q90: f64,
    q99: f64,
    censored: usize,
}

#[derive(Serialize)]
struct CouplingOutput<'a> {
    summary: CouplingSummary,
    run: &'a CouplingRun,
}

fn coupling(config: &RunConfig) -> CliResult<Artifact> {
    let family = config.family_or(FamilyTag::S)?;
    let options = CouplingOptions {
        reps: config.reps.unwrap_or(DEFAULT_COUPLING_REPS),
        seed: config.seed,
        epoch: config.epoch.unwrap_or(1.0),
        tol: config.tol,
        state_cap: config.state_cap()?,
        ..CouplingOptions::default()
    };
    let k = config.k.unwrap_or(1);
    // Build once so cap errors surface before any sampling.
    MaximalCoupling::new(family, k, options.epoch, options.tol, options.state_cap)?;
    let run = coupling_times(family, k, &options)?;
    let summary = CouplingSummary {
        mean: run.mean(),
        q50: run.quantile(0.5),
        q90: run.quantile(0.9),
        q99: run.quantile(0.99),
        censored: run.censored,
    };
    let body = match config.format() {
        Format::Json => json(config, "mc", &CouplingOutput { summary, run: &run }),
        Format::Csv => {
            let mut lines = preamble(config, "mc");
            let starts = |cells: &[Position]| {
                cells
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            lines.push((
                "start".into(),
                format!("{} | {}", starts(&run.start.0), starts(&run.start.1)),
            ));
            lines.push(("epoch".into(), run.epoch.to_string()));
            lines.push(("mean".into(), summary.mean.to_string()));
            lines.push(("q50".into(), summary.q50.to_string()));
            lines.push(("q90".into(), summary.q90.to_string()));
            lines.push(("q99".into(), summary.q99.to_string()));
            lines.push(("censored".into(), summary.censored.to_string()));
            let mut out = preamble_text(&lines);
            out.push_str("rep,time\n");
            for (rep, t) in run.times.iter().enumerate() {
                let _ = writeln!(out, "{rep},{t}");
            }
            out
        }
    };
    Ok(Artifact::ok(body))
}
