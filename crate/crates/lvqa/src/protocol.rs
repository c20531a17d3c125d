//! Grammar layer: renders the prompt templates and parses every model output
//! the engine consumes (planner tool calls, planner finals, inspector
//! verdicts, judge verdicts).
//!
//! The five templates are shipped as versioned text assets and instantiated by
//! literal slot substitution; golden tests pin the rendered bytes.

use crate::timeline::{parse_timestamp, Span, TimelineError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

pub const PLANNER_DECOUPLED_TEMPLATE: &str =
    include_str!("../assets/prompts/planner_decoupled_v1.txt");
pub const PLANNER_COUPLED_TEMPLATE: &str =
    include_str!("../assets/prompts/planner_coupled_v1.txt");
pub const INSPECT_TEMPLATE: &str = include_str!("../assets/prompts/inspect_v1.txt");
pub const FILTER_TEMPLATE: &str = include_str!("../assets/prompts/filter_v1.txt");
pub const JUDGE_TEMPLATE: &str = include_str!("../assets/prompts/judge_v1.txt");

/// All shipped templates, keyed by asset name (used for manifest hashing).
pub fn template_assets() -> Vec<(&'static str, &'static str)> {
    vec![
        ("planner_decoupled_v1", PLANNER_DECOUPLED_TEMPLATE),
        ("planner_coupled_v1", PLANNER_COUPLED_TEMPLATE),
        ("inspect_v1", INSPECT_TEMPLATE),
        ("filter_v1", FILTER_TEMPLATE),
        ("judge_v1", JUDGE_TEMPLATE),
    ]
}

/// Which agent architecture drives the episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentMode {
    Decoupled,
    Coupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Upper bound on spans per visual_inspect call, applied in both modes.
    pub max_spans_per_call: usize,
    /// Confidence gate deriving the sufficiency bit; never trusted to the model.
    pub conf_gate: f64,
    /// Allowed answer alphabet for multiple-choice options.
    pub option_letters: String,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            max_spans_per_call: 10,
            conf_gate: 0.95,
            option_letters: "ABCDEFGH".to_string(),
        }
    }
}

// ---------------------------------------------------------------------------
// Planner output
// ---------------------------------------------------------------------------

/// One parsed planner turn. `parse_planner` is total: any input maps to
/// exactly one variant, with protocol violations landing in `Malformed` so
/// the engine can count them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlannerAction {
    ToolRetrieve { query: String },
    ToolInspect { spans: Vec<Span>, context: String },
    Final { answer: String },
    Malformed { raw: String, reason: String },
}

enum BlockKind {
    ToolCall,
    Final,
}

/// Scan for `<tool_call>`/`<final>` blocks. Returns the blocks in order plus
/// the concatenated text outside them, or an error reason for unterminated
/// blocks.
fn scan_blocks(text: &str) -> Result<(Vec<(BlockKind, String)>, String), String> {
    const TAGS: [(&str, &str, bool); 2] = [
        ("<tool_call>", "</tool_call>", true),
        ("<final>", "</final>", false),
    ];
    let mut blocks = Vec::new();
    let mut outside = String::new();
    let mut rest = text;
    loop {
        let next = TAGS
            .iter()
            .filter_map(|(open, close, is_tool)| {
                rest.find(open).map(|pos| (pos, *open, *close, *is_tool))
            })
            .min_by_key(|(pos, ..)| *pos);
        let Some((pos, open, close, is_tool)) = next else {
            outside.push_str(rest);
            break;
        };
        outside.push_str(&rest[..pos]);
        let after_open = &rest[pos + open.len()..];
        let Some(end) = after_open.find(close) else {
            return Err(format!("unterminated {} block", open));
        };
        let kind = if is_tool { BlockKind::ToolCall } else { BlockKind::Final };
        blocks.push((kind, after_open[..end].to_string()));
        rest = &after_open[end + close.len()..];
    }
    Ok((blocks, outside))
}

fn parse_tool_call(body: &str, cfg: &ProtocolConfig) -> Result<PlannerAction, String> {
    let value: serde_json::Value =
        serde_json::from_str(body.trim()).map_err(|e| format!("invalid tool JSON: {e}"))?;
    let obj = value.as_object().ok_or("tool call must be a JSON object")?;
    let name = obj
        .get("name")
        .and_then(|v| v.as_str())
        .ok_or("tool call missing string field 'name'")?;
    let args = obj
        .get("arguments")
        .and_then(|v| v.as_object())
        .ok_or("tool call missing object field 'arguments'")?;
    match name {
        "visual_retrieve" => {
            let query = args
                .get("query")
                .and_then(|v| v.as_str())
                .ok_or("visual_retrieve missing string argument 'query'")?;
            Ok(PlannerAction::ToolRetrieve { query: query.to_string() })
        }
        "visual_inspect" => {
            let raw_spans = args
                .get("spans")
                .and_then(|v| v.as_array())
                .ok_or("visual_inspect missing array argument 'spans'")?;
            if raw_spans.is_empty() {
                return Err("visual_inspect spans array is empty".to_string());
            }
            if raw_spans.len() > cfg.max_spans_per_call {
                return Err(format!(
                    "too many spans: {} > {}",
                    raw_spans.len(),
                    cfg.max_spans_per_call
                ));
            }
            let mut spans = Vec::with_capacity(raw_spans.len());
            for raw in raw_spans {
                let span_obj = raw.as_object().ok_or("span must be an object")?;
                let get = |key: &str| -> Result<f64, String> {
                    let text = span_obj
                        .get(key)
                        .and_then(|v| v.as_str())
                        .ok_or_else(|| format!("span missing string field '{key}'"))?;
                    parse_timestamp(text.trim())
                        .map(|t| t.seconds())
                        .map_err(|e| e.to_string())
                };
                let start = get("start_time")?;
                let end = get("end_time")?;
                if end <= start {
                    return Err("end<=start".to_string());
                }
                spans.push(Span::new(start, end).expect("validated above"));
            }
            let context = args
                .get("context")
                .and_then(|v| v.as_str())
                .unwrap_or("")
                .to_string();
            Ok(PlannerAction::ToolInspect { spans, context })
        }
        other => Err(format!("unknown tool: {other}")),
    }
}

/// Parse a planner completion into exactly one action.
pub fn parse_planner(text: &str, cfg: &ProtocolConfig) -> PlannerAction {
    parse_planner_with_thought(text, cfg).0
}

/// Like [`parse_planner`] but also returns the text outside the action block
/// (the planner's free-form reasoning, when any).
pub fn parse_planner_with_thought(text: &str, cfg: &ProtocolConfig) -> (PlannerAction, String) {
    let malformed = |reason: String| PlannerAction::Malformed {
        raw: text.to_string(),
        reason,
    };
    let (blocks, outside) = match scan_blocks(text) {
        Ok(v) => v,
        Err(reason) => return (malformed(reason), String::new()),
    };
    let thought = outside.trim().to_string();
    let action = match blocks.len() {
        0 => malformed("no action block".to_string()),
        1 => {
            let (kind, body) = &blocks[0];
            match kind {
                BlockKind::ToolCall => {
                    parse_tool_call(body, cfg).unwrap_or_else(|reason| malformed(reason))
                }
                BlockKind::Final => PlannerAction::Final { answer: body.trim().to_string() },
            }
        }
        n => malformed(format!("multiple actions: {n} blocks")),
    };
    (action, thought)
}

// ---------------------------------------------------------------------------
// Inspector output
// ---------------------------------------------------------------------------

#[derive(Error, Debug, Clone, PartialEq)]
pub enum VerdictParseError {
    #[error("no Answer line in inspector output")]
    NoAnswerLine,
    #[error("invalid answer label {0:?}")]
    InvalidAnswer(String),
    #[error("missing or unparseable Confidence: {0:?}")]
    BadConfidence(String),
}

/// A parsed inspector response: the sufficiency bit plus feedback.
///
/// Invariant: `z` is true iff an answer is present and `confidence` meets the
/// gate; the bit is derived here rather than trusted to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectVerdict {
    pub z: bool,
    /// Normalized option letters ("B", "A,C"); `None` for SEARCH_MORE.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub answer: Option<String>,
    pub evidence: String,
    pub confidence: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub missing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub next_search: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reminder: Option<String>,
}

impl InspectVerdict {
    /// The answer as a letter set, for set-wise comparison.
    pub fn answer_letters(&self) -> Option<BTreeSet<char>> {
        self.answer.as_ref().map(|a| a.split(',').filter_map(|s| s.chars().next()).collect())
    }
}

/// Normalize a comma-separated letter list against the allowed alphabet.
/// Returns the sorted, deduped canonical form.
pub fn normalize_answer_letters(value: &str, alphabet: &str) -> Result<String, String> {
    let mut letters = BTreeSet::new();
    for part in value.split(',') {
        let token = part.trim();
        let mut chars = token.chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            return Err(format!("token {token:?} is not a single letter"));
        };
        let c = c.to_ascii_uppercase();
        if !alphabet.contains(c) {
            return Err(format!("letter {c:?} outside alphabet {alphabet:?}"));
        }
        letters.insert(c);
    }
    if letters.is_empty() {
        return Err("empty letter set".to_string());
    }
    Ok(letters.into_iter().map(String::from).collect::<Vec<_>>().join(","))
}

fn parse_confidence_value(value: &str) -> Option<f64> {
    let candidates = [
        value.trim().to_string(),
        value.split_whitespace().next().unwrap_or("").to_string(),
        value
            .split_whitespace()
            .next()
            .unwrap_or("")
            .trim_end_matches(['.', ','])
            .to_string(),
    ];
    for cand in candidates {
        if let Ok(v) = cand.parse::<f64>() {
            if v.is_finite() && (0.0..=1.0).contains(&v) {
                return Some(v);
            }
        }
    }
    None
}

/// Parse an inspector response. Line-oriented with case-sensitive keys;
/// leading/trailing whitespace is tolerated. The SEARCH_MORE cue lines
/// (Missing / Next search / Reminder) are optional.
pub fn parse_inspector(text: &str, cfg: &ProtocolConfig) -> Result<InspectVerdict, VerdictParseError> {
    let mut answer_value: Option<String> = None;
    let mut evidence: Option<String> = None;
    let mut confidence_value: Option<String> = None;
    let mut missing: Option<String> = None;
    let mut next_search: Option<String> = None;
    let mut reminder: Option<String> = None;

    for line in text.lines() {
        let line = line.trim();
        let mut take = |key: &str, slot: &mut Option<String>| -> bool {
            if let Some(rest) = line.strip_prefix(key) {
                if slot.is_none() {
                    *slot = Some(rest.trim().to_string());
                }
                true
            } else {
                false
            }
        };
        let _ = take("Answer:", &mut answer_value)
            || take("Evidence:", &mut evidence)
            || take("Confidence:", &mut confidence_value)
            || take("Missing:", &mut missing)
            || take("Next search:", &mut next_search)
            || take("Reminder:", &mut reminder);
    }

    let answer_value = answer_value.ok_or(VerdictParseError::NoAnswerLine)?;
    let confidence_raw = confidence_value.unwrap_or_default();
    let confidence = parse_confidence_value(&confidence_raw)
        .ok_or_else(|| VerdictParseError::BadConfidence(confidence_raw.clone()))?;

    let label = answer_value.trim().trim_end_matches('.');
    let answer = if label == "SEARCH_MORE" {
        None
    } else {
        Some(
            normalize_answer_letters(label, &cfg.option_letters)
                .map_err(|_| VerdictParseError::InvalidAnswer(answer_value.clone()))?,
        )
    };

    let z = answer.is_some() && confidence >= cfg.conf_gate;
    Ok(InspectVerdict {
        z,
        answer,
        evidence: evidence.unwrap_or_default(),
        confidence,
        missing,
        next_search,
        reminder,
    })
}

// ---------------------------------------------------------------------------
// Judge output
// ---------------------------------------------------------------------------

#[derive(Error, Debug, Clone, PartialEq)]
pub enum JudgeParseError {
    #[error("no JSON object found in judge output")]
    NoJsonObject,
    #[error("judge JSON invalid: {0}")]
    InvalidJson(String),
    #[error("judge field {field} missing or wrong type")]
    MissingField { field: &'static str },
    #[error("judge field {field} out of range: {value}")]
    OutOfRange { field: &'static str, value: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub hallucination: bool,
    pub trajectory_clarity: u8,
    pub credibility_score: u8,
    pub reasoning: String,
}

/// Extract the first balanced top-level `{...}` object, string-aware.
fn first_json_object(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_str {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_str = false;
            }
            continue;
        }
        match b {
            b'"' => in_str = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

fn score_field(value: &serde_json::Value, field: &'static str) -> Result<u8, JudgeParseError> {
    let n = match value {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i
            } else if let Some(f) = n.as_f64() {
                if f.fract() != 0.0 {
                    return Err(JudgeParseError::MissingField { field });
                }
                f as i64
            } else {
                return Err(JudgeParseError::MissingField { field });
            }
        }
        _ => return Err(JudgeParseError::MissingField { field }),
    };
    if !(0..=10).contains(&n) {
        return Err(JudgeParseError::OutOfRange { field, value: n });
    }
    Ok(n as u8)
}

/// Parse a judge response, stripping any non-JSON framing around the object.
pub fn parse_judge(text: &str) -> Result<JudgeVerdict, JudgeParseError> {
    let slice = first_json_object(text).ok_or(JudgeParseError::NoJsonObject)?;
    let value: serde_json::Value =
        serde_json::from_str(slice).map_err(|e| JudgeParseError::InvalidJson(e.to_string()))?;
    let obj = value.as_object().ok_or(JudgeParseError::NoJsonObject)?;
    let hallucination = match obj.get("hallucination") {
        Some(serde_json::Value::Bool(b)) => *b,
        Some(serde_json::Value::String(s)) if s == "true" => true,
        Some(serde_json::Value::String(s)) if s == "false" => false,
        _ => return Err(JudgeParseError::MissingField { field: "hallucination" }),
    };
    let trajectory_clarity = score_field(
        obj.get("trajectory_clarity")
            .ok_or(JudgeParseError::MissingField { field: "trajectory_clarity" })?,
        "trajectory_clarity",
    )?;
    let credibility_score = score_field(
        obj.get("credibility_score")
            .ok_or(JudgeParseError::MissingField { field: "credibility_score" })?,
        "credibility_score",
    )?;
    let reasoning = obj.get("reasoning").and_then(|v| v.as_str()).unwrap_or("").to_string();
    Ok(JudgeVerdict { hallucination, trajectory_clarity, credibility_score, reasoning })
}

// ---------------------------------------------------------------------------
// Renderers
// ---------------------------------------------------------------------------

/// Comma-joined `HH:MM:SS–HH:MM:SS` labels.
pub fn spans_label(spans: &[Span]) -> String {
    spans.iter().map(Span::render).collect::<Vec<_>>().join(", ")
}

/// Parse a `HH:MM:SS–HH:MM:SS` label back into a span. Accepts an en dash,
/// a double hyphen, or a single hyphen as separator.
pub fn parse_span_label(text: &str) -> Result<Span, TimelineError> {
    let text = text.trim();
    let (left, right) = if let Some(pair) = text.split_once('\u{2013}') {
        pair
    } else if let Some(pair) = text.split_once("--") {
        pair
    } else if let Some(pair) = text.split_once('-') {
        pair
    } else {
        return Err(TimelineError::MalformedTimestamp {
            text: text.to_string(),
            reason: "expected two timestamps separated by a dash".to_string(),
        });
    };
    let start = parse_timestamp(left.trim())?;
    let end = parse_timestamp(right.trim())?;
    Span::new(start.seconds(), end.seconds())
}

/// The system prompt for the planner in the given mode.
pub fn render_planner_system(mode: AgentMode) -> &'static str {
    match mode {
        AgentMode::Decoupled => PLANNER_DECOUPLED_TEMPLATE,
        AgentMode::Coupled => PLANNER_COUPLED_TEMPLATE,
    }
}

const CONTEXT_SLOT: &str = "{Context: <optional prior-search summary, only if provided>}\n";
const FIXED_RANGE_NOTE: &str = "(Fixed-range question: it asks about exactly this time range; \
choose the best-supported option from these spans and do not output SEARCH_MORE.)";

/// Instantiate the inspector prompt. The Context block is included iff
/// `context` is non-empty; `fixed_range` appends an explicit note to the
/// question so the fixed-range rule in the template binds.
pub fn render_inspect_prompt(
    question: &str,
    spans: &[Span],
    context: &str,
    fixed_range: bool,
) -> String {
    assert!(!spans.is_empty(), "inspect prompt requires at least one span");
    let qtext = if fixed_range {
        format!("{question}\n{FIXED_RANGE_NOTE}")
    } else {
        question.to_string()
    };
    let mut out = INSPECT_TEMPLATE.replace("{spans_label}", &spans_label(spans));
    if context.is_empty() {
        out = out.replace(CONTEXT_SLOT, "");
    } else {
        out = out.replace(CONTEXT_SLOT, &format!("Context: {context}\n"));
    }
    out.replace("{qtext}", &qtext)
}

/// Instantiate the retrieval-filter prompt over numbered candidate windows.
pub fn render_filter_prompt(
    question: &str,
    query: &str,
    candidates: &[(Span, String)],
    max_useful: usize,
) -> String {
    let head = FILTER_TEMPLATE
        .split("Candidate windows:")
        .next()
        .expect("filter template has a candidate section")
        .replace("{MAX_USEFUL}", &max_useful.to_string())
        .replace("{USER_QUESTION}", question)
        .replace("{QUERY_TEXT}", query);
    let mut out = head;
    out.push_str("Candidate windows:\n");
    for (i, (span, caption)) in candidates.iter().enumerate() {
        out.push_str(&format!("{}. [{}] {}\n", i + 1, span.render(), caption));
    }
    out
}

/// Instantiate the trajectory-audit judge prompt.
pub fn render_judge_prompt(question: &str, trajectory_log: &str, final_answer: &str) -> String {
    JUDGE_TEMPLATE
        .replace("{{query}}", question)
        .replace("{{trajectory_log}}", trajectory_log)
        .replace("{{final_answer}}", final_answer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ProtocolConfig {
        ProtocolConfig::default()
    }

    fn span(a: f64, b: f64) -> Span {
        Span::new(a, b).unwrap()
    }

    #[test]
    fn parse_planner_retrieve() {
        let action = parse_planner(
            r#"<tool_call>{"name":"visual_retrieve","arguments":{"query":"red stripes"}}</tool_call>"#,
            &cfg(),
        );
        assert_eq!(action, PlannerAction::ToolRetrieve { query: "red stripes".to_string() });
    }

    #[test]
    fn parse_planner_inspect_with_spans() {
        let text = r#"<tool_call>{"name":"visual_inspect","arguments":{"spans":[{"start_time":"00:00:00","end_time":"00:00:16"},{"start_time":"00:15:12","end_time":"00:15:28"}],"context":"look for stripes"}}</tool_call>"#;
        match parse_planner(text, &cfg()) {
            PlannerAction::ToolInspect { spans, context } => {
                assert_eq!(spans, vec![span(0.0, 16.0), span(912.0, 928.0)]);
                assert_eq!(context, "look for stripes");
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn parse_planner_rejects_reversed_span() {
        let text = r#"<tool_call>{"name":"visual_inspect","arguments":{"spans":[{"start_time":"00:10:00","end_time":"00:09:00"}]}}</tool_call>"#;
        match parse_planner(text, &cfg()) {
            PlannerAction::Malformed { reason, .. } => assert_eq!(reason, "end<=start"),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn parse_planner_rejects_multiple_actions() {
        let text = r#"<tool_call>{"name":"visual_retrieve","arguments":{"query":"x"}}</tool_call><final>B</final>"#;
        match parse_planner(text, &cfg()) {
            PlannerAction::Malformed { reason, .. } => {
                assert!(reason.starts_with("multiple actions"), "{reason}")
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn parse_planner_final_and_thought() {
        let (action, thought) =
            parse_planner_with_thought("I am confident now.\n<final>A,C</final>", &cfg());
        assert_eq!(action, PlannerAction::Final { answer: "A,C".to_string() });
        assert_eq!(thought, "I am confident now.");
    }

    #[test]
    fn parse_planner_total_on_junk() {
        for text in ["", "hello", "<tool_call>", "<tool_call>{}</tool_call>", "<final>", "{}"] {
            match parse_planner(text, &cfg()) {
                PlannerAction::Malformed { .. } => {}
                other => panic!("{text:?} parsed as {other:?}"),
            }
        }
    }

    #[test]
    fn parse_planner_enforces_span_cap() {
        let spans: Vec<String> = (0..11)
            .map(|i| {
                format!(
                    r#"{{"start_time":"00:{:02}:00","end_time":"00:{:02}:30"}}"#,
                    i, i
                )
            })
            .collect();
        let text = format!(
            r#"<tool_call>{{"name":"visual_inspect","arguments":{{"spans":[{}]}}}}</tool_call>"#,
            spans.join(",")
        );
        match parse_planner(&text, &cfg()) {
            PlannerAction::Malformed { reason, .. } => {
                assert!(reason.starts_with("too many spans"), "{reason}")
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn parse_inspector_committed_answer() {
        let v = parse_inspector(
            "Answer: B\nEvidence: five stripes at 00:00:07\nConfidence: 0.95",
            &cfg(),
        )
        .unwrap();
        assert!(v.z);
        assert_eq!(v.answer.as_deref(), Some("B"));
        assert_eq!(v.confidence, 0.95);
        assert_eq!(v.evidence, "five stripes at 00:00:07");
    }

    #[test]
    fn parse_inspector_search_more_captures_cues() {
        let v = parse_inspector(
            "Answer: SEARCH_MORE\nEvidence: no weather cues\nConfidence: 0.40\nMissing: weather\nNext search: snowfall\nReminder: do not call visual_inspect next",
            &cfg(),
        )
        .unwrap();
        assert!(!v.z);
        assert_eq!(v.answer, None);
        assert_eq!(v.missing.as_deref(), Some("weather"));
        assert_eq!(v.next_search.as_deref(), Some("snowfall"));
        assert_eq!(v.reminder.as_deref(), Some("do not call visual_inspect next"));
    }

    #[test]
    fn parse_inspector_below_gate_keeps_answer() {
        let v = parse_inspector("Answer: C\nEvidence: blurry\nConfidence: 0.90", &cfg()).unwrap();
        assert!(!v.z);
        assert_eq!(v.answer.as_deref(), Some("C"));
        assert_eq!(v.confidence, 0.90);
    }

    #[test]
    fn parse_inspector_normalizes_multi_letter_sets() {
        let v = parse_inspector("Answer: c, a\nConfidence: 0.99", &cfg()).unwrap();
        assert_eq!(v.answer.as_deref(), Some("A,C"));
        assert!(v.z);
        assert_eq!(v.answer_letters().unwrap().into_iter().collect::<Vec<_>>(), vec!['A', 'C']);
    }

    #[test]
    fn parse_inspector_errors() {
        assert_eq!(
            parse_inspector("Evidence: x\nConfidence: 0.9", &cfg()),
            Err(VerdictParseError::NoAnswerLine)
        );
        assert!(matches!(
            parse_inspector("Answer: B\nConfidence: high", &cfg()),
            Err(VerdictParseError::BadConfidence(_))
        ));
        assert!(matches!(
            parse_inspector("Answer: B", &cfg()),
            Err(VerdictParseError::BadConfidence(_))
        ));
        assert!(matches!(
            parse_inspector("Answer: Z9\nConfidence: 0.99", &cfg()),
            Err(VerdictParseError::InvalidAnswer(_))
        ));
        // out-of-range confidence is unparseable
        assert!(matches!(
            parse_inspector("Answer: B\nConfidence: 1.5", &cfg()),
            Err(VerdictParseError::BadConfidence(_))
        ));
    }

    #[test]
    fn parse_judge_schema_exact() {
        let v = parse_judge(
            r#"{"reasoning":"tool output matches","hallucination":false,"trajectory_clarity":9,"credibility_score":8}"#,
        )
        .unwrap();
        assert!(!v.hallucination);
        assert_eq!(v.trajectory_clarity, 9);
        assert_eq!(v.credibility_score, 8);
    }

    #[test]
    fn parse_judge_range_check() {
        let err = parse_judge(
            r#"{"reasoning":"","hallucination":false,"trajectory_clarity":11,"credibility_score":8}"#,
        )
        .unwrap_err();
        assert_eq!(err, JudgeParseError::OutOfRange { field: "trajectory_clarity", value: 11 });
    }

    #[test]
    fn parse_judge_strips_prose_fencing() {
        let v = parse_judge(
            "Here is my audit:\n```json\n{\"reasoning\":\"the {braces} inside strings are fine\",\"hallucination\":true,\"trajectory_clarity\":4,\"credibility_score\":2}\n```\nDone.",
        )
        .unwrap();
        assert!(v.hallucination);
        assert_eq!(v.reasoning, "the {braces} inside strings are fine");
    }

    #[test]
    fn spans_label_round_trips() {
        let spans = vec![span(0.0, 16.0), span(912.0, 928.0), span(2000.0, 2016.0)];
        let label = spans_label(&spans);
        assert_eq!(label, "00:00:00\u{2013}00:00:16, 00:15:12\u{2013}00:15:28, 00:33:20\u{2013}00:33:36");
        let parsed: Vec<Span> =
            label.split(", ").map(|part| parse_span_label(part).unwrap()).collect();
        assert_eq!(parsed, spans);
    }

    #[test]
    fn parse_span_label_accepts_hyphen_forms() {
        assert_eq!(parse_span_label("00:00:00–00:00:16").unwrap(), span(0.0, 16.0));
        assert_eq!(parse_span_label("00:00:00--00:00:16").unwrap(), span(0.0, 16.0));
        assert_eq!(parse_span_label("00:00:00-00:00:16").unwrap(), span(0.0, 16.0));
        assert!(parse_span_label("00:00:16").is_err());
    }

    #[test]
    fn render_inspect_prompt_slots() {
        let rendered = render_inspect_prompt("How many stripes?", &[span(0.0, 16.0)], "", false);
        assert!(rendered.contains("Spans: 00:00:00\u{2013}00:00:16."));
        assert!(!rendered.contains("{Context:"));
        assert!(!rendered.contains("Context:"));
        assert!(rendered.contains("How many stripes?"));
        assert!(!rendered.contains("{qtext}"));

        let with_ctx =
            render_inspect_prompt("Q", &[span(0.0, 16.0)], "prior hits near the start", false);
        assert!(with_ctx.contains("Context: prior hits near the start\n"));

        let fixed = render_inspect_prompt("Q", &[span(0.0, 16.0)], "", true);
        assert!(fixed.contains("Fixed-range question"));
    }

    #[test]
    fn render_filter_prompt_numbers_candidates() {
        let rendered = render_filter_prompt(
            "What happens?",
            "snowfall",
            &[(span(0.0, 16.0), "a street".to_string()), (span(16.0, 32.0), "snow".to_string())],
            8,
        );
        assert!(rendered.contains("up to 8 lines"));
        assert!(rendered.contains("User question (may include options; use them to disambiguate): What happens?"));
        assert!(rendered.contains("Visual retrieval query: snowfall"));
        assert!(rendered.ends_with("1. [00:00:00\u{2013}00:00:16] a street\n2. [00:00:16\u{2013}00:00:32] snow\n"));
        assert!(!rendered.contains("{MAX_USEFUL}"));
    }

    #[test]
    fn render_judge_prompt_slots() {
        let rendered = render_judge_prompt("Q?", "Turn 1 | a | b | c", "B");
        assert!(rendered.contains("User Query:\nQ?"));
        assert!(rendered.contains("Turn 1 | a | b | c"));
        assert!(rendered.contains("Final Answer:\nB"));
        assert!(!rendered.contains("{{query}}"));
    }
}
