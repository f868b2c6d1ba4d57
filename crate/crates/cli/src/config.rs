//! Run configuration: the JSON form embedded in every output, and the command-line flags
//! that produce it.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cornershuffle::decomp::{Scheme, MAX_EXHAUSTIVE_SIDE};
use cornershuffle::family::{FamilyTag, ShuffleFamily};
use cornershuffle::grid::TGrid;
use cornershuffle::kernel::DEFAULT_STATE_CAP;
use cornershuffle::perm::parse_positions;
use cornershuffle::transient::DEFAULT_TOL;
use cornershuffle::Position;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Exact,
    ExactFull,
    Bounds,
    VerifyDecomposition,
    CompareConstant,
    Characters,
    SpectralBound,
    Geometry,
    Coupling,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Exact => "exact",
            Command::ExactFull => "exact-full",
            Command::Bounds => "bounds",
            Command::VerifyDecomposition => "verify-decomposition",
            Command::CompareConstant => "compare-constant",
            Command::Characters => "characters",
            Command::SpectralBound => "spectral-bound",
            Command::Geometry => "geometry",
            Command::Coupling => "coupling",
            Command::Selftest => "selftest",
        }
    }

    /// Options the command reads, besides those every command accepts.
    fn options(self) -> &'static [&'static str] {
        match self {
            Command::Simulate => &["family", "n", "k", "t", "reps", "alpha", "start"],
            Command::Exact => &["family", "n", "k", "t", "state_cap"],
            Command::ExactFull => &["family", "n", "t"],
            Command::Bounds => &["family", "n", "t"],
            Command::VerifyDecomposition => &["n", "scheme", "exhaustive", "samples", "side_cap"],
            Command::CompareConstant => &["family", "n", "scheme", "side_cap"],
            Command::Characters => &["m"],
            Command::SpectralBound => &["family", "n", "t", "comparison", "scheme", "side_cap"],
            Command::Geometry => &["n"],
            Command::Coupling => &["family", "n", "k", "reps", "epoch", "state_cap"],
            Command::Selftest => &[],
        }
    }

    fn formats(self) -> &'static [Format] {
        match self {
            Command::VerifyDecomposition
            | Command::CompareConstant
            | Command::Geometry
            | Command::Selftest => &[Format::Json],
            _ => &[Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

const COMMON_OPTIONS: &[&str] = &["command", "seed", "tol", "output", "format", "unsafe_caps"];

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Everything a run depends on. Serialized verbatim into its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Degree of the symmetric group, for `characters`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Time grid `min:max:points[:log]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Starting cells of the tracked cards, e.g. `"(1,4) (2,3)"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub exhaustive: bool,
    /// Number of randomly drawn three-cycles to verify instead of all of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Comparison constant to use instead of computing one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub unsafe_caps: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            family: None,
            n: None,
            k: None,
            m: None,
            t: None,
            reps: None,
            seed: DEFAULT_SEED,
            tol: DEFAULT_TOL,
            output: None,
            format: None,
            start: None,
            scheme: None,
            exhaustive: false,
            samples: None,
            epoch: None,
            alpha: None,
            comparison: None,
            state_cap: None,
            side_cap: None,
            unsafe_caps: false,
        }
    }

    /// Parses and validates a JSON configuration.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    /// Rejects options the command does not read, bad formats, and malformed values.
    pub fn validate(&self) -> CliResult<()> {
        let value = serde_json::to_value(self).expect("configuration serializes");
        let allowed = self.command.options();
        if let Some(map) = value.as_object() {
            for key in map.keys() {
                if !COMMON_OPTIONS.contains(&key.as_str()) && !allowed.contains(&key.as_str()) {
                    return Err(CliError::Config(format!(
                        "option `{}` does not apply to `{}`",
                        key.replace('_', "-"),
                        self.command.name()
                    )));
                }
            }
        }
        if let Some(format) = self.format {
            if !self.command.formats().contains(&format) {
                return Err(CliError::Config(format!(
                    "`{}` does not write {format:?} output",
                    self.command.name()
                )));
            }
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(CliError::Config(format!(
                "tol must lie in (0, 1), got {}",
                self.tol
            )));
        }
        if let Some(t) = &self.t {
            TGrid::from_str(t)?;
        }
        if let Some(start) = &self.start {
            parse_positions(start)?;
        }
        if self.exhaustive && self.samples.is_some() {
            return Err(CliError::Config(
                "choose either exhaustive or samples".into(),
            ));
        }
        for (name, value) in [("epoch", self.epoch), ("comparison", self.comparison)] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Config(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        if let Some(alpha) = self.alpha {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(CliError::Config(format!(
                    "alpha must lie in (0, 1), got {alpha}"
                )));
            }
        }
        self.state_cap()?;
        self.side_cap()?;
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(self.command.formats()[0])
    }

    pub fn require_n(&self) -> CliResult<usize> {
        self.n
            .ok_or_else(|| CliError::Config(format!("`{}` needs --n", self.command.name())))
    }

    pub fn family_or(&self, default: FamilyTag) -> CliResult<ShuffleFamily> {
        Ok(ShuffleFamily::new(
            self.family.unwrap_or(default),
            self.require_n()?,
        )?)
    }

    pub fn grid(&self) -> CliResult<TGrid> {
        let text = self.t.as_deref().ok_or_else(|| {
            CliError::Config(format!(
                "`{}` needs --t min:max:points",
                self.command.name()
            ))
        })?;
        Ok(TGrid::from_str(text)?)
    }

    pub fn start_cells(&self) -> CliResult<Option<Vec<Position>>> {
        Ok(self.start.as_deref().map(parse_positions).transpose()?)
    }

    pub fn state_cap(&self) -> CliResult<usize> {
        self.cap("state-cap", self.state_cap, DEFAULT_STATE_CAP)
    }

    pub fn side_cap(&self) -> CliResult<usize> {
        self.cap("side-cap", self.side_cap, MAX_EXHAUSTIVE_SIDE)
    }

    fn cap(&self, name: &str, requested: Option<usize>, default: usize) -> CliResult<usize> {
        match requested {
            None => Ok(default),
            Some(v) if v <= default || self.unsafe_caps => Ok(v),
            Some(v) => Err(CliError::Config(format!(
                "raising {name} to {v} above its default {default} requires --unsafe-caps"
            ))),
        }
    }
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s {
        "explicit" => Ok(Scheme::Explicit),
        "geodesic" => Ok(Scheme::Geodesic),
        other => Err(format!(
            "unknown scheme {other:?} (expected explicit or geodesic)"
        )),
    }
}

fn parse_family(s: &str) -> Result<FamilyTag, String> {
    s.parse().map_err(|e: cornershuffle::Error| e.to_string())
}

/// Flags shared by every subcommand; those a command does not read are rejected.
#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    /// Shuffle family: S0, S or R.
    #[arg(long, value_parser = parse_family)]
    pub family: Option<FamilyTag>,
    /// Side length of the array.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of tracked cards.
    #[arg(long)]
    pub k: Option<usize>,
    /// Degree of the symmetric group.
    #[arg(long)]
    pub m: Option<usize>,
    /// Time grid min:max:points[:log].
    #[arg(long)]
    pub t: Option<String>,
    /// Monte Carlo replicates (simulate 10000, coupling 1000).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Master seed; every replicate draws from its own stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Truncation tolerance of the Poisson series.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write the artifact here instead of standard output.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Artifact format; CSV where the command supports it.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Starting cells, e.g. "(1,4) (2,3)".
    #[arg(long)]
    pub start: Option<String>,
    /// Decomposition scheme: explicit or geodesic.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
    /// Verify every three-cycle.
    #[arg(long)]
    pub exhaustive: bool,
    /// Verify this many random three-cycles.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Epoch length of the coupling.
    #[arg(long)]
    pub epoch: Option<f64>,
    /// Miscoverage of Monte Carlo intervals.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comparison constant to use instead of computing one.
    #[arg(long)]
    pub comparison: Option<f64>,
    /// Largest k-set state space to enumerate (default 20000).
    #[arg(long)]
    pub state_cap: Option<usize>,
    /// Largest side length for exhaustive decomposition (default 10).
    #[arg(long)]
    pub side_cap: Option<usize>,
    /// Allow caps to be raised above their defaults.
    #[arg(long)]
    pub unsafe_caps: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Sub {
    /// Monte Carlo k-set distance curve.
    Simulate(Params),
    /// Exact k-set distance curve.
    Exact(Params),
    /// Exact total variation of the whole deck (n <= 3).
    ExactFull(Params),
    /// Counting and stuck-card lower bounds.
    Bounds(Params),
    /// Check corner-move words for three-cycles.
    VerifyDecomposition(Params),
    /// Comparison constant between a corner shuffle and the three-cycle walk.
    CompareConstant(Params),
    /// Characters at the three-cycle class, with bounds.
    Characters(Params),
    /// Upper-bound-lemma curve.
    SpectralBound(Params),
    /// Jump rates and overlaps near the corners.
    Geometry(Params),
    /// Sampled maximal-coupling times.
    Coupling(Params),
    /// Run the acceptance checks.
    Selftest(Params),
}

impl Sub {
    fn split(self) -> (Command, Params) {
        match self {
            Sub::Simulate(p) => (Command::Simulate, p),
            Sub::Exact(p) => (Command::Exact, p),
            Sub::ExactFull(p) => (Command::ExactFull, p),
            Sub::Bounds(p) => (Command::Bounds, p),
            Sub::VerifyDecomposition(p) => (Command::VerifyDecomposition, p),
            Sub::CompareConstant(p) => (Command::CompareConstant, p),
            Sub::Characters(p) => (Command::Characters, p),
            Sub::SpectralBound(p) => (Command::SpectralBound, p),
            Sub::Geometry(p) => (Command::Geometry, p),
            Sub::Coupling(p) => (Command::Coupling, p),
            Sub::Selftest(p) => (Command::Selftest, p),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cornershuffle",
    version,
    about = "Corner-rotation shuffle experiments"
)]
pub struct Cli {
    /// JSON run configuration; flags given after the subcommand override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Sub>,
}

impl Cli {
    /// The validated configuration these arguments describe.
    pub fn into_config(self) -> CliResult<RunConfig> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                Some(
                    serde_json::from_str::<RunConfig>(&text)
                        .map_err(|e| CliError::Config(e.to_string()))?,
                )
            }
            None => None,
        };
        let config = match (base, self.command) {
            (None, None) => return Err(CliError::Config("no subcommand or --config given".into())),
            (Some(base), None) => base,
            (base, Some(sub)) => {
                let (command, params) = sub.split();
                let base = base.unwrap_or_else(|| RunConfig::new(command));
                if base.command != command {
                    return Err(CliError::Config(format!(
                        "configuration is for `{}`, not `{}`",
                        base.command.name(),
                        command.name()
                    )));
                }
                overlay(base, params)
            }
        };
        config.validate()?;
        Ok(config)
    }
}

fn overlay(mut c: RunConfig, p: Params) -> RunConfig {
    fn set<T>(slot: &mut Option<T>, value: Option<T>) {
        if value.is_some() {
            *slot = value;
        }
    }
    set(&mut c.family, p.family);
    set(&mut c.n, p.n);
    set(&mut c.k, p.k);
    set(&mut c.m, p.m);
    set(&mut c.t, p.t);
    set(&mut c.reps, p.reps);
    set(&mut c.output, p.output);
    set(&mut c.format, p.format);
    set(&mut c.start, p.start);
    set(&mut c.scheme, p.scheme);
    set(&mut c.samples, p.samples);
    set(&mut c.epoch, p.epoch);
    set(&mut c.alpha, p.alpha);
    set(&mut c.comparison, p.comparison);
    set(&mut c.state_cap, p.state_cap);
    set(&mut c.side_cap, p.side_cap);
    if let Some(seed) = p.seed {
        c.seed = seed;
    }
    if let Some(tol) = p.tol {
        c.tol = tol;
    }
    c.exhaustive |= p.exhaustive;
    c.unsafe_caps |= p.unsafe_caps;
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> CliResult<RunConfig> {
        let mut full = vec!["cornershuffle"];
        full.extend_from_slice(args);
        Cli::try_parse_from(full).unwrap().into_config()
    }

    #[test]
    fn flags_become_config() {
        let c = parse(&[
            "exact", "--family", "S", "--n", "4", "--k", "1", "--t", "0:40:80",
        ])
        .unwrap();
        assert_eq!(c.command, Command::Exact);
        assert_eq!(c.family, Some(FamilyTag::S));
        assert_eq!(c.grid().unwrap().times().len(), 80);
        assert_eq!(c.format(), Format::Csv);
    }

    #[test]
    fn config_round_trips() {
        let c = parse(&[
            "simulate", "--n", "5", "--t", "0:10:11", "--reps", "50", "--seed", "9",
        ])
        .unwrap();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn foreign_options_are_rejected() {
        assert!(parse(&["geometry", "--n", "6", "--k", "2"]).is_err());
        assert!(parse(&["geometry", "--n", "6", "--format", "csv"]).is_err());
        assert!(RunConfig::from_json(r#"{"command":"geometry","n":6,"bogus":1}"#).is_err());
    }

    #[test]
    fn raised_caps_need_acknowledgment() {
        let err = parse(&[
            "exact",
            "--n",
            "4",
            "--t",
            "0:1:2",
            "--state-cap",
            "99999999",
        ])
        .unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG);
        assert!(parse(&[
            "exact",
            "--n",
            "4",
            "--t",
            "0:1:2",
            "--state-cap",
            "99999999",
            "--unsafe-caps"
        ])
        .is_ok());
        assert!(parse(&["exact", "--n", "4", "--t", "0:1:2", "--state-cap", "10"]).is_ok());
    }
}
