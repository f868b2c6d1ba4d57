//! Artifact assembly. Outputs carry no timestamps, so equal configs give equal bytes.

use serde::Serialize;

use crate::config::RunConfig;

pub const TOOL: &str = "cornershuffle";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Version of the CSV and JSON layouts.
pub const SCHEMA: u32 = 1;

/// A rendered output, plus the reason the run failed verification, if it did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub body: String,
    pub failure: Option<String>,
}

impl Artifact {
    pub fn ok(body: String) -> Self {
        Self {
            body,
            failure: None,
        }
    }
}

/// `# key: value` lines heading every CSV output.
pub fn preamble(config: &RunConfig, provenance: &str) -> Vec<(String, String)> {
    vec![
        ("tool".into(), format!("{TOOL} {VERSION}")),
        ("schema".into(), SCHEMA.to_string()),
        ("config".into(), config.to_json()),
        ("seed".into(), config.seed.to_string()),
        ("provenance".into(), provenance.into()),
    ]
}

pub fn preamble_text(lines: &[(String, String)]) -> String {
    lines.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    schema: u32,
    config: &'a RunConfig,
    seed: u64,
    provenance: &'a str,
    result: &'a T,
}

/// Pretty JSON wrapping `result` with the run metadata.
pub fn json<T: Serialize>(config: &RunConfig, provenance: &str, result: &T) -> String {
    let envelope = Envelope {
        tool: TOOL,
        version: VERSION,
        schema: SCHEMA,
        config,
        seed: config.seed,
        provenance,
        result,
    };
    let mut text = serde_json::to_string_pretty(&envelope).expect("artifact serializes");
    text.push('\n');
    text
}
