//! Judge wire format: a versioned JSON envelope embedded in the judge's
//! reply, extracted with tolerance for surrounding prose, validated
//! against the rubric rules, and re-requested a bounded number of times
//! when invalid.
//!
//! Initial-assessment envelope:
//! `{"kind": "iedr", "version": 1, "indicators": [{"id": "C.1", "level": 2,
//! "evidence": "...", "reasoning": "..."}, ...9 total]}`
//!
//! Window envelope:
//! `{"kind": "mdep", "version": 1, "window_index": 3, "channels":
//! [{"axis": "cognitive", "channel": "prog", "level": 1, "evidence": "...",
//! "reasoning": "..."}, ...6 total]}`
//!
//! Levels are never rounded or clamped; out-of-range values are quoted
//! back to the judge verbatim as repair prompts.

use crate::AgentError;
use epm_core::{IedrAssessment, IedrIndicator, MdepChannelRating, MdepWindowRating, RubricError};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const WIRE_VERSION: u32 = 1;

/// Which rubric the judge was asked to apply. Window ratings validate
/// against the window index the orchestrator expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JudgeMode {
    Iedr,
    Mdep { window_index: u32 },
}

impl JudgeMode {
    fn kind(&self) -> &'static str {
        match self {
            JudgeMode::Iedr => "iedr",
            JudgeMode::Mdep { .. } => "mdep",
        }
    }
}

/// A parsed, rubric-valid judge output.
#[derive(Debug, Clone, PartialEq)]
pub enum JudgeWireOutput {
    Iedr(IedrAssessment),
    Mdep(MdepWindowRating),
}

impl JudgeWireOutput {
    /// Canonical envelope serialization; the inverse of [`parse_judge_output`]
    /// on clean input.
    pub fn to_wire_text(&self) -> String {
        let value = match self {
            JudgeWireOutput::Iedr(a) => serde_json::json!({
                "kind": "iedr",
                "version": WIRE_VERSION,
                "indicators": a.indicators(),
            }),
            JudgeWireOutput::Mdep(w) => serde_json::json!({
                "kind": "mdep",
                "version": WIRE_VERSION,
                "window_index": w.window_index(),
                "channels": w.channels(),
            }),
        };
        serde_json::to_string_pretty(&value).expect("wire value serializes")
    }
}

/// One reason a reply failed to parse or validate. The display text is
/// what gets quoted back to the judge in a repair prompt.
#[derive(Debug, Error)]
pub enum WireFault {
    #[error("no JSON object with \"kind\": \"{expected}\" found in the reply")]
    MissingBlock { expected: &'static str },
    #[error("the \"{kind}\" block does not match the schema: {detail}")]
    BadShape { kind: &'static str, detail: String },
    #[error("unsupported wire version {found}; this harness speaks version {expected}")]
    Version { found: Value, expected: u32 },
    #[error("block says window_index {got} but window {expected} is being rated")]
    WindowIndexMismatch { got: Value, expected: u32 },
    #[error(transparent)]
    Rubric(#[from] RubricError),
}

#[derive(Deserialize)]
struct IedrEnvelope {
    #[allow(dead_code)]
    kind: String,
    #[allow(dead_code)]
    version: u32,
    indicators: Vec<IedrIndicator>,
}

#[derive(Deserialize)]
struct MdepEnvelope {
    #[allow(dead_code)]
    kind: String,
    #[allow(dead_code)]
    version: u32,
    #[allow(dead_code)]
    window_index: Option<u32>,
    channels: Vec<MdepChannelRating>,
}

/// Yields the top-level `{...}` spans of `text` in order, honoring JSON
/// string and escape rules so braces inside quoted text do not count.
pub(crate) fn json_object_spans(text: &str) -> Vec<&str> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' if depth > 0 => in_string = true,
            b'{' => {
                if depth == 0 {
                    start = i;
                }
                depth += 1;
            }
            b'}' => {
                if depth > 0 {
                    depth -= 1;
                    if depth == 0 {
                        spans.push(&text[start..=i]);
                    }
                }
            }
            _ => {}
        }
    }
    spans
}

/// Extracts and validates the structured block from a judge reply. The
/// first JSON object whose `kind` matches the mode is the judge's answer;
/// other objects (examples, scratch work) are skipped. A matching block
/// that fails schema or rubric validation is a fault, not a reason to keep
/// scanning.
pub fn parse_judge_output(text: &str, mode: JudgeMode) -> Result<JudgeWireOutput, WireFault> {
    let expected = mode.kind();
    for span in json_object_spans(text) {
        let Ok(value) = serde_json::from_str::<Value>(span) else {
            continue;
        };
        if value.get("kind").and_then(Value::as_str) != Some(expected) {
            continue;
        }
        let version = value.get("version").cloned().unwrap_or(Value::Null);
        if version.as_u64() != Some(u64::from(WIRE_VERSION)) {
            return Err(WireFault::Version { found: version, expected: WIRE_VERSION });
        }
        return match mode {
            JudgeMode::Iedr => {
                let env: IedrEnvelope = serde_json::from_value(value).map_err(|e| {
                    WireFault::BadShape { kind: expected, detail: e.to_string() }
                })?;
                Ok(JudgeWireOutput::Iedr(IedrAssessment::new(env.indicators)?))
            }
            JudgeMode::Mdep { window_index } => {
                if let Some(got) = value.get("window_index") {
                    if got.as_u64() != Some(u64::from(window_index)) {
                        return Err(WireFault::WindowIndexMismatch {
                            got: got.clone(),
                            expected: window_index,
                        });
                    }
                }
                let env: MdepEnvelope = serde_json::from_value(value).map_err(|e| {
                    WireFault::BadShape { kind: expected, detail: e.to_string() }
                })?;
                Ok(JudgeWireOutput::Mdep(MdepWindowRating::new(window_index, env.channels)?))
            }
        };
    }
    Err(WireFault::MissingBlock { expected })
}

/// How many repair re-prompts a single adjudication may spend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairPolicy {
    pub max_repairs: u32,
}

impl Default for RepairPolicy {
    fn default() -> Self {
        RepairPolicy { max_repairs: 2 }
    }
}

/// Runs the ask-parse-repair loop. `ask(attempt, fault)` produces the
/// judge's reply text; on attempts after the first, `fault` carries the
/// previous validation failure so its text can be quoted back. Transport
/// errors from `ask` abort immediately. When the reply still fails after
/// the repair budget, the window is unadjudicatable and the caller aborts
/// the episode; nothing is ever silently scored zero.
pub fn adjudicate_with_repair<F>(
    mode: JudgeMode,
    policy: RepairPolicy,
    mut ask: F,
) -> Result<JudgeWireOutput, AgentError>
where
    F: FnMut(u32, Option<&WireFault>) -> Result<String, AgentError>,
{
    let attempts = policy.max_repairs + 1;
    let mut last: Option<WireFault> = None;
    for attempt in 0..attempts {
        let text = ask(attempt, last.as_ref())?;
        match parse_judge_output(&text, mode) {
            Ok(out) => return Ok(out),
            Err(fault) => last = Some(fault),
        }
    }
    Err(AgentError::MalformedJudgeOutput {
        attempts,
        last_error: last.expect("at least one attempt ran").to_string(),
    })
}
