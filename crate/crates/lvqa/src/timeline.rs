//! Temporal primitives: timestamps, spans, temporal IoU, the fixed clip grid,
//! and frame-sampling plans.
//!
//! Time is stored as real seconds everywhere; the zero-padded `HH:MM:SS` text
//! form exists only at protocol boundaries (prompts and logs).

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum TimelineError {
    #[error("malformed timestamp {text:?}: {reason}")]
    MalformedTimestamp { text: String, reason: String },
    #[error("invalid span [{start}, {end}]: end must be strictly greater than start")]
    InvalidSpan { start: f64, end: f64 },
    #[error("timestamp must be a finite non-negative number, got {0}")]
    InvalidSeconds(f64),
    #[error("frame plan is empty: spans cover less than one sample interval")]
    EmptyPlan,
}

/// Seconds from video start. Always finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(f64);

impl Timestamp {
    pub fn new(seconds: f64) -> Result<Self, TimelineError> {
        if !seconds.is_finite() || seconds < 0.0 {
            return Err(TimelineError::InvalidSeconds(seconds));
        }
        Ok(Timestamp(seconds))
    }

    pub fn seconds(&self) -> f64 {
        self.0
    }

    /// Zero-padded `HH:MM:SS`; hours may exceed 23 and grow past two digits.
    /// Sub-second precision is truncated toward zero.
    pub fn render(&self) -> String {
        let total = self.0.floor() as u64;
        format!("{:02}:{:02}:{:02}", total / 3600, (total % 3600) / 60, total % 60)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Parse a `H+:MM:SS` string. Each field must be zero-padded to at least two
/// digits, minutes and seconds must lie in 00-59.
pub fn parse_timestamp(text: &str) -> Result<Timestamp, TimelineError> {
    let err = |reason: &str| TimelineError::MalformedTimestamp {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(err("expected three ':'-separated fields"));
    }
    for part in &parts {
        if part.len() < 2 {
            return Err(err("fields must be zero-padded to at least two digits"));
        }
        if !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("fields must be decimal digits"));
        }
    }
    let h: u64 = parts[0].parse().map_err(|_| err("hours out of range"))?;
    let m: u64 = parts[1].parse().map_err(|_| err("minutes out of range"))?;
    let s: u64 = parts[2].parse().map_err(|_| err("seconds out of range"))?;
    if m > 59 {
        return Err(err("minutes must be in 00-59"));
    }
    if s > 59 {
        return Err(err("seconds must be in 00-59"));
    }
    Timestamp::new((3600 * h + 60 * m + s) as f64)
}

/// A temporal interval in seconds with `end > start` (strict).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct Span {
    start: Timestamp,
    end: Timestamp,
}

impl Span {
    pub fn new(start: f64, end: f64) -> Result<Self, TimelineError> {
        let start = Timestamp::new(start)?;
        let end = Timestamp::new(end)?;
        if end.seconds() <= start.seconds() {
            return Err(TimelineError::InvalidSpan {
                start: start.seconds(),
                end: end.seconds(),
            });
        }
        Ok(Span { start, end })
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn end(&self) -> Timestamp {
        self.end
    }

    pub fn start_s(&self) -> f64 {
        self.start.seconds()
    }

    pub fn end_s(&self) -> f64 {
        self.end.seconds()
    }

    pub fn length(&self) -> f64 {
        self.end_s() - self.start_s()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start_s() <= t && t < self.end_s()
    }

    /// `HH:MM:SS–HH:MM:SS`, the wire form used in prompts and logs.
    pub fn render(&self) -> String {
        format!("{}\u{2013}{}", self.start.render(), self.end.render())
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl TryFrom<(f64, f64)> for Span {
    type Error = TimelineError;
    fn try_from(v: (f64, f64)) -> Result<Self, Self::Error> {
        Span::new(v.0, v.1)
    }
}

impl From<Span> for (f64, f64) {
    fn from(s: Span) -> (f64, f64) {
        (s.start_s(), s.end_s())
    }
}

/// Temporal intersection-over-union of two spans. Returns 0 when disjoint.
pub fn tiou(a: &Span, b: &Span) -> f64 {
    let inter = (a.end_s().min(b.end_s()) - a.start_s().max(b.start_s())).max(0.0);
    let union = a.length() + b.length() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    inter / union
}

/// Largest pairwise [`tiou`] between two span sets; 0 when either set is empty.
pub fn best_tiou(accessed: &[Span], gold: &[Span]) -> f64 {
    let mut best = 0.0f64;
    for a in accessed {
        for g in gold {
            best = best.max(tiou(a, g));
        }
    }
    best
}

/// Identity and duration of one video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub video_id: String,
    pub duration_s: f64,
}

impl VideoMeta {
    pub fn new(video_id: impl Into<String>, duration_s: f64) -> Self {
        VideoMeta { video_id: video_id.into(), duration_s }
    }

    pub fn full_span(&self) -> Span {
        Span::new(0.0, self.duration_s).expect("duration_s > 0")
    }
}

/// Minimum length for a trailing partial clip to be kept in the grid.
pub const MIN_TAIL_CLIP_S: f64 = 1.0;

/// Partition `[0, duration)` into contiguous fixed-length clips. The final
/// partial clip is kept iff it is at least [`MIN_TAIL_CLIP_S`] long.
pub fn clip_grid(video: &VideoMeta, clip_len_s: f64) -> Vec<Span> {
    assert!(clip_len_s > 0.0, "clip_len_s must be positive");
    let mut spans = Vec::new();
    let mut i = 0u64;
    loop {
        let start = i as f64 * clip_len_s;
        if start >= video.duration_s {
            break;
        }
        let end = (start + clip_len_s).min(video.duration_s);
        if end - start < MIN_TAIL_CLIP_S {
            break;
        }
        spans.push(Span::new(start, end).expect("grid spans are non-degenerate"));
        i += 1;
    }
    spans
}

/// An ordered frame-sampling plan over one or more spans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePlan {
    pub timestamps: Vec<Timestamp>,
    pub fps: f64,
    pub cap: usize,
}

/// Sample frames at `1/fps` intervals from each span start (inclusive), then
/// merge, sort and dedupe. When the merged count exceeds `cap`, thin by a
/// uniform stride that keeps the first and last sample.
pub fn plan_frames(spans: &[Span], fps: f64, cap: usize) -> Result<FramePlan, TimelineError> {
    assert!(fps > 0.0, "fps must be positive");
    assert!(cap >= 1, "cap must be positive");
    let mut ticks: Vec<f64> = Vec::new();
    for span in spans {
        let mut i = 0u64;
        loop {
            let t = span.start_s() + i as f64 / fps;
            if t >= span.end_s() - 1e-9 {
                break;
            }
            ticks.push(t);
            i += 1;
        }
    }
    if ticks.is_empty() {
        return Err(TimelineError::EmptyPlan);
    }
    ticks.sort_by(|a, b| a.partial_cmp(b).expect("timestamps are finite"));
    ticks.dedup_by(|a, b| a.to_bits() == b.to_bits());

    let n = ticks.len();
    let selected: Vec<f64> = if n > cap {
        if cap == 1 {
            vec![ticks[0]]
        } else {
            (0..cap)
                .map(|i| {
                    let idx = (i as f64 * (n - 1) as f64 / (cap - 1) as f64).round() as usize;
                    ticks[idx]
                })
                .collect()
        }
    } else {
        ticks
    };

    Ok(FramePlan {
        timestamps: selected
            .into_iter()
            .map(|t| Timestamp::new(t).expect("samples inherit span validity"))
            .collect(),
        fps,
        cap,
    })
}
