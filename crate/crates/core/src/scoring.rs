//! Answer parsing, exact-match scoring, the jump error taxonomy and run
//! aggregation.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::palette::{Color, CIRCUIT_PALETTE, SWIRL_PALETTE};
use crate::task::{DotRecord, ModelResponse, TaskRecord, TaskType};

pub const DEFAULT_THETA_TOL_DEG: f64 = 45.0;
pub const DEFAULT_D_ADJ: f64 = 150.0;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParsedResponse {
    pub colors: Vec<Color>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component_label: Option<String>,
    pub saw_end: bool,
    /// Word tokens after the first `end`.
    pub extra_tokens: usize,
}

fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty())
}

/// Scans `text` for palette colors, component labels and `end`, in order.
///
/// Matching is case-insensitive on whole alphanumeric words, so `red` never
/// matches inside `colored`. Everything after the first `end` is ignored.
/// When several labels appear the last one wins.
pub fn parse_response(text: &str, palette: &[Color], labels: &[String]) -> ParsedResponse {
    let mut out = ParsedResponse::default();
    let mut it = words(text);
    for w in it.by_ref() {
        if w.eq_ignore_ascii_case("end") {
            out.saw_end = true;
            break;
        }
        if let Some(c) = palette.iter().find(|c| c.name().eq_ignore_ascii_case(w)) {
            out.colors.push(*c);
        } else if let Some(l) = labels.iter().find(|l| l.eq_ignore_ascii_case(w)) {
            out.component_label = Some(l.clone());
        }
    }
    out.extra_tokens = it.count();
    out
}

pub fn task_palette(task: &TaskRecord) -> &'static [Color] {
    match task.task_type {
        TaskType::Circuit => &CIRCUIT_PALETTE,
        _ => &SWIRL_PALETTE,
    }
}

pub fn parse_for_task(text: &str, task: &TaskRecord) -> ParsedResponse {
    parse_response(text, task_palette(task), &task.labels())
}

/// Station list before the first `end` word, split on commas and newlines.
pub fn parse_stations(text: &str) -> Vec<String> {
    let mut cut = text.len();
    let lower = text.to_ascii_lowercase();
    let bytes = lower.as_bytes();
    let mut i = 0;
    while let Some(pos) = lower[i..].find("end") {
        let s = i + pos;
        let e = s + 3;
        let before = s == 0 || !(bytes[s - 1] as char).is_alphanumeric();
        let after = e >= bytes.len() || !(bytes[e] as char).is_alphanumeric();
        if before && after {
            cut = s;
            break;
        }
        i = e;
    }
    text[..cut]
        .split([',', '\n'])
        .map(|s| s.trim().trim_end_matches('.').trim())
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Exact match: all colors in order, `end` present, and the component label
/// for circuit tasks.
pub fn score_exact(parsed: &ParsedResponse, task: &TaskRecord) -> bool {
    parsed.saw_end
        && parsed.colors == task.ground_truth.colors
        && (task.task_type != TaskType::Circuit
            || parsed.component_label.as_deref() == task.expected_label())
}

/// Length of the longest common prefix.
pub fn divergence_index(pred: &[Color], gt: &[Color]) -> usize {
    pred.iter().zip(gt).take_while(|(a, b)| a == b).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorClass {
    Correct,
    AdjacentTurnJump,
    AdjacentWireJump,
    Incomplete,
    WrongStart,
    Other,
}

impl ErrorClass {
    pub const ALL: [ErrorClass; 6] = [
        ErrorClass::Correct,
        ErrorClass::AdjacentTurnJump,
        ErrorClass::AdjacentWireJump,
        ErrorClass::Incomplete,
        ErrorClass::WrongStart,
        ErrorClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Correct => "Correct",
            ErrorClass::AdjacentTurnJump => "AdjacentTurnJump",
            ErrorClass::AdjacentWireJump => "AdjacentWireJump",
            ErrorClass::Incomplete => "Incomplete",
            ErrorClass::WrongStart => "WrongStart",
            ErrorClass::Other => "Other",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub theta_tol_deg: f64,
    pub d_adj: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            theta_tol_deg: DEFAULT_THETA_TOL_DEG,
            d_adj: DEFAULT_D_ADJ,
        }
    }
}

/// Shared head of every classifier: `Some` for wrong start or a correct
/// prefix that stops early, `None` when a divergence must be inspected.
fn prefix_class(pred: &[Color], gt: &[Color]) -> (usize, Option<ErrorClass>) {
    let k = divergence_index(pred, gt);
    if k == 0 {
        (k, Some(ErrorClass::WrongStart))
    } else if k == pred.len() {
        (k, Some(ErrorClass::Incomplete))
    } else {
        (k, None)
    }
}

/// Angular distance folded into `[0, π]`.
fn circular_distance(a: f64, b: f64) -> f64 {
    let d = libm::fmod(a - b, TAU).abs();
    d.min(TAU - d)
}

/// Swirl taxonomy at the first divergence `k`.
///
/// The predicted dot counts as an adjacent-turn jump when it sits on a
/// different winding than the expected dot (`round(Δθ / 2π) ≠ 0`) at an
/// angular offset within `theta_tol_deg`.
pub fn classify_swirl_error(pred: &[Color], dots: &[DotRecord], cfg: &ClassifierConfig) -> ErrorClass {
    let gt: Vec<Color> = dots.iter().map(|d| d.color).collect();
    let (k, early) = prefix_class(pred, &gt);
    if let Some(c) = early {
        return c;
    }
    let (Some(expected), Some(got)) = (dots.get(k), dots.iter().find(|d| d.color == pred[k])) else {
        return ErrorClass::Other;
    };
    let (Some(te), Some(tg)) = (expected.theta, got.theta) else {
        return ErrorClass::Other;
    };
    let winding = libm::round((tg - te) / TAU);
    let tol = cfg.theta_tol_deg * PI / 180.0;
    if winding != 0.0 && circular_distance(tg, te) <= tol {
        ErrorClass::AdjacentTurnJump
    } else {
        ErrorClass::Other
    }
}

/// Circuit taxonomy at the first divergence `k`.
///
/// An adjacent-wire jump needs a witness: two consecutive predicted colors
/// (from `k` on) that match two consecutive dots of another wire whose first
/// matched dot is within `d_adj` of the expected dot `k` or `k − 1`, or a
/// predicted label belonging to another wire with a dot that close.
pub fn classify_circuit_error(parsed: &ParsedResponse, task: &TaskRecord, cfg: &ClassifierConfig) -> ErrorClass {
    let gt = &task.ground_truth.colors;
    let pred = &parsed.colors;
    let label_ok = parsed.component_label.is_none() || parsed.component_label.as_deref() == task.expected_label();
    let k = divergence_index(pred, gt);
    if k == 0 {
        return ErrorClass::WrongStart;
    }
    if k == pred.len() && label_ok {
        return ErrorClass::Incomplete;
    }
    let Some(qid) = task.query.as_ref().and_then(|q| q.wire_id) else {
        return ErrorClass::Other;
    };
    let queried = task.queried_dots();
    let anchors: Vec<_> = [k.checked_sub(1), Some(k)]
        .into_iter()
        .flatten()
        .filter_map(|i| queried.get(i).map(|d| d.position()))
        .collect();
    let near = |d: &DotRecord| anchors.iter().any(|a| a.dist(d.position()) <= cfg.d_adj);

    let mut by_wire: BTreeMap<u32, Vec<&DotRecord>> = BTreeMap::new();
    for d in task.dots.iter() {
        if let Some(w) = d.wire_id.filter(|&w| w != qid) {
            by_wire.entry(w).or_default().push(d);
        }
    }
    let mut pairs: BTreeMap<(Color, Color), Vec<&DotRecord>> = BTreeMap::new();
    for dots in by_wire.values() {
        for w in dots.windows(2) {
            pairs.entry((w[0].color, w[1].color)).or_default().push(w[0]);
        }
    }
    if pred.len() > k {
        for w in pred[k..].windows(2) {
            if pairs.get(&(w[0], w[1])).is_some_and(|v| v.iter().any(|d| near(d))) {
                return ErrorClass::AdjacentWireJump;
            }
        }
    }
    if let (Some(label), false) = (&parsed.component_label, label_ok) {
        let other = task
            .wires
            .iter()
            .flatten()
            .filter(|w| &w.component == label && w.wire_id != qid)
            .filter_map(|w| by_wire.get(&w.wire_id));
        for dots in other {
            if dots.iter().any(|d| near(d)) {
                return ErrorClass::AdjacentWireJump;
            }
        }
    }
    ErrorClass::Other
}

/// Prefix-based classes only; used for condition and external tasks.
pub fn classify_generic(pred: &[Color], gt: &[Color]) -> ErrorClass {
    prefix_class(pred, gt).1.unwrap_or(ErrorClass::Other)
}

pub fn classify(parsed: &ParsedResponse, task: &TaskRecord, cfg: &ClassifierConfig) -> ErrorClass {
    if score_exact(parsed, task) {
        return ErrorClass::Correct;
    }
    match task.task_type {
        TaskType::Swirl => classify_swirl_error(&parsed.colors, &task.dots, cfg),
        TaskType::Circuit => classify_circuit_error(parsed, task, cfg),
        _ => classify_generic(&parsed.colors, &task.ground_truth.colors),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub task_id: String,
    pub run: u32,
    pub model: String,
    pub task_type: TaskType,
    /// Level, condition (with mask target) or task type.
    pub group: String,
    pub parsed: ParsedResponse,
    pub exact: bool,
    /// First mismatch position, −1 when exact.
    pub divergence: i64,
    pub error_class: ErrorClass,
    #[serde(default)]
    pub transport_error: bool,
}

pub fn score_response(task: &TaskRecord, resp: &ModelResponse, cfg: &ClassifierConfig) -> ScoreRecord {
    let text = resp.raw.as_deref().unwrap_or("");
    let parsed = parse_for_task(text, task);
    let exact = match &task.ground_truth.station_names {
        Some(names) => {
            let got = parse_stations(text);
            got.len() == names.len() && got.iter().zip(names).all(|(a, b)| a.eq_ignore_ascii_case(b))
        }
        None => score_exact(&parsed, task),
    };
    let error_class = if exact { ErrorClass::Correct } else { classify(&parsed, task, cfg) };
    let error_class = if !exact && error_class == ErrorClass::Correct {
        ErrorClass::Other
    } else {
        error_class
    };
    ScoreRecord {
        task_id: task.task_id.clone(),
        run: resp.run,
        model: resp.model.clone(),
        task_type: task.task_type,
        group: task.group_key(),
        divergence: if exact {
            -1
        } else {
            divergence_index(&parsed.colors, &task.ground_truth.colors) as i64
        },
        parsed,
        exact,
        error_class,
        transport_error: resp.error.is_some() && resp.raw.is_none(),
    }
}

/// Fraction of `(pred, gt)` pairs whose first `min(k, |gt|)` predicted colors
/// match; `None` for an empty set or `k == 0`.
pub fn prefix_accuracy(records: &[(Vec<Color>, Vec<Color>)], k: usize) -> Option<f64> {
    if records.is_empty() || k == 0 {
        return None;
    }
    let hits = records
        .iter()
        .filter(|(pred, gt)| {
            let m = k.min(gt.len());
            pred.len() >= m && pred[..m] == gt[..m]
        })
        .count();
    Some(hits as f64 / records.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlignDirection {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionMatch {
    /// Start index in the prediction.
    pub pred_start: usize,
    /// Start index in the (possibly reversed) window.
    pub window_start: usize,
    pub len: usize,
    pub direction: AlignDirection,
}

pub const MIN_ALIGN_RUN: usize = 3;

fn leftmost_run(pred: &[Color], window: &[Color]) -> Option<(usize, usize, usize)> {
    for i in 0..pred.len() {
        for j in 0..window.len() {
            let len = pred[i..].iter().zip(&window[j..]).take_while(|(a, b)| a == b).count();
            if len >= MIN_ALIGN_RUN {
                return Some((i, j, len));
            }
        }
    }
    None
}

/// Leftmost run of at least three predicted colors equal to a contiguous
/// slice of `window`, tried forward first and then against the reversed
/// window.
pub fn align_region(pred: &[Color], window: &[Color]) -> Option<RegionMatch> {
    if window.len() < MIN_ALIGN_RUN {
        return None;
    }
    if let Some((i, j, len)) = leftmost_run(pred, window) {
        return Some(RegionMatch { pred_start: i, window_start: j, len, direction: AlignDirection::Forward });
    }
    let rev: Vec<Color> = window.iter().rev().copied().collect();
    leftmost_run(pred, &rev).map(|(i, j, len)| RegionMatch {
        pred_start: i,
        window_start: j,
        len,
        direction: AlignDirection::Reverse,
    })
}

/// Mean and population standard deviation; `None` when empty.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, libm::sqrt(var)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAccuracy {
    pub run: u32,
    pub records: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub model: String,
    pub group: String,
    pub runs: Vec<RunAccuracy>,
    /// Percent.
    pub mean: f64,
    /// Population standard deviation across runs, percent.
    pub std: f64,
    pub class_counts: BTreeMap<ErrorClass, usize>,
    pub records: usize,
}

impl AggregateStats {
    pub fn errors(&self) -> usize {
        self.class_counts
            .iter()
            .filter(|(c, _)| **c != ErrorClass::Correct)
            .map(|(_, n)| n)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no score records to aggregate")]
pub struct EmptyGroup;

/// Per `(model, group)` accuracy per run, mean ± population std and class
/// histogram. Groups come out sorted by model then group.
pub fn aggregate_runs(records: &[ScoreRecord]) -> Result<Vec<AggregateStats>, EmptyGroup> {
    if records.is_empty() {
        return Err(EmptyGroup);
    }
    let mut groups: BTreeMap<(&str, &str), Vec<&ScoreRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.model.as_str(), r.group.as_str())).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((model, group), recs)| {
            let mut per_run: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
            let mut class_counts = BTreeMap::new();
            for r in &recs {
                let e = per_run.entry(r.run).or_default();
                e.0 += r.exact as usize;
                e.1 += 1;
                *class_counts.entry(r.error_class).or_insert(0) += 1;
            }
            let runs: Vec<RunAccuracy> = per_run
                .into_iter()
                .map(|(run, (ok, n))| RunAccuracy { run, records: n, accuracy: 100.0 * ok as f64 / n as f64 })
                .collect();
            let accs: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
            let (mean, std) = mean_std(&accs).expect("group is non-empty");
            AggregateStats {
                model: model.into(),
                group: group.into(),
                runs,
                mean,
                std,
                class_counts,
                records: recs.len(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub mean: f64,
    pub samples: usize,
    /// Samples measured by word count because no token count was reported.
    pub word_count_fallbacks: usize,
}

/// Length of one reasoning trace: the reported token count, else the
/// whitespace word count of the trace (second field `true`). `None` without
/// either.
pub fn reasoning_length(resp: &ModelResponse) -> Option<(u64, bool)> {
    if let Some(n) = resp.reasoning_tokens {
        return Some((n, false));
    }
    resp.reasoning
        .as_ref()
        .map(|t| (t.split_whitespace().count() as u64, true))
}

/// Mean reasoning length per group; responses without any trace are skipped.
pub fn reasoning_length_stats<F>(responses: &[ModelResponse], mut group_of: F) -> BTreeMap<String, LengthStats>
where
    F: FnMut(&ModelResponse) -> Option<String>,
{
    let mut acc: BTreeMap<String, (Vec<f64>, usize)> = BTreeMap::new();
    for r in responses {
        let (Some(g), Some((n, fallback))) = (group_of(r), reasoning_length(r)) else {
            continue;
        };
        let e = acc.entry(g).or_default();
        e.0.push(n as f64);
        e.1 += fallback as usize;
    }
    acc.into_iter()
        .map(|(g, (v, fb))| {
            let (mean, _) = mean_std(&v).expect("non-empty");
            (g, LengthStats { mean, samples: v.len(), word_count_fallbacks: fb })
        })
        .collect()
}
