//! Keyword statistics over reasoning traces: self-correction events and
//! substitution-strategy intensity.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelLexicon {
    /// Phrases matched as case-insensitive substrings.
    #[serde(default)]
    pub keywords: Vec<String>,
    /// Stems matched at the start of bold markdown headers (`**Revising ...**`).
    #[serde(default)]
    pub header_stems: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconConfig {
    pub self_correction: BTreeMap<String, ModelLexicon>,
    /// Category name to whole-word keywords.
    pub substitution: BTreeMap<String, Vec<String>>,
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| String::from(*s)).collect()
}

impl Default for LexiconConfig {
    fn default() -> Self {
        let mut sc = BTreeMap::new();
        let kw = |k: &[&str]| ModelLexicon { keywords: strings(k), header_stems: Vec::new() };
        sc.insert("gpt-5.4".into(), kw(&["wait", "actually", "revising", "rechecking", "reconsidering"]));
        sc.insert("sonnet-4.5".into(), kw(&["wait", "actually", "let me check", "let me recheck", "re-examine"]));
        sc.insert(
            "gemini3-flash".into(),
            ModelLexicon { keywords: Vec::new(), header_stems: strings(&["revising", "revisiting", "re-examining"]) },
        );
        sc.insert(
            "qwen3-vl-235b".into(),
            kw(&["wait", "actually", "let me check", "let me recheck", "re-examine", "reconsider"]),
        );
        let mut sub = BTreeMap::new();
        sub.insert(
            "AngularMatching".into(),
            strings(&["angle", "angles", "quadrant", "degrees", "o'clock", "northeast", "northwest", "southeast", "southwest"]),
        );
        sub.insert(
            "RingDecomposition".into(),
            strings(&["ring", "rings", "circle", "circles", "concentric", "innermost", "outermost", "loop", "loops"]),
        );
        sub.insert(
            "DirectionConflict".into(),
            strings(&["clockwise", "counterclockwise", "counter-clockwise", "direction"]),
        );
        Self { self_correction: sc, substitution: sub }
    }
}

impl LexiconConfig {
    /// Lexicon for a model id: exact key first, then the longest key that
    /// the lowercased id contains.
    pub fn for_model(&self, model: &str) -> Option<&ModelLexicon> {
        let m = model.to_lowercase();
        self.self_correction.get(&m).or_else(|| {
            self.self_correction
                .iter()
                .filter(|(k, _)| m.contains(k.as_str()))
                .max_by_key(|(k, _)| k.len())
                .map(|(_, v)| v)
        })
    }
}

fn count_substr(hay: &str, needle: &str) -> usize {
    if needle.is_empty() {
        return 0;
    }
    hay.match_indices(needle).count()
}

/// Bold headers `**...**` whose text starts with one of `stems`.
fn count_headers(lower: &str, stems: &[String]) -> usize {
    let mut n = 0;
    let mut rest = lower;
    while let Some(open) = rest.find("**") {
        let after = &rest[open + 2..];
        let Some(close) = after.find("**") else { break };
        let inner = after[..close].trim_start();
        if stems.iter().any(|s| !s.is_empty() && inner.starts_with(&s.to_lowercase())) {
            n += 1;
        }
        rest = &after[close + 2..];
    }
    n
}

/// Correction events in one trace.
pub fn correction_events(trace: &str, lex: &ModelLexicon) -> usize {
    let lower = trace.to_lowercase();
    let kw: usize = lex.keywords.iter().map(|k| count_substr(&lower, &k.to_lowercase())).sum();
    kw + count_headers(&lower, &lex.header_stems)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCorrection {
    /// Percent of traced samples with at least one event; `None` without traces.
    pub rate: Option<f64>,
    pub events_per_sample: Option<f64>,
    pub samples_with_traces: usize,
    pub samples_with_events: usize,
}

/// Empty traces count as "no trace" and are left out of both denominators.
pub fn self_correction_stats<S: AsRef<str>>(traces: &[S], lex: &ModelLexicon) -> SelfCorrection {
    let events: Vec<usize> = traces
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !t.trim().is_empty())
        .map(|t| correction_events(t, lex))
        .collect();
    let n = events.len();
    let with = events.iter().filter(|&&e| e > 0).count();
    let total: usize = events.iter().sum();
    SelfCorrection {
        rate: (n > 0).then(|| 100.0 * with as f64 / n as f64),
        events_per_sample: (n > 0).then(|| total as f64 / n as f64),
        samples_with_traces: n,
        samples_with_events: with,
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '-'
}

/// Whole-word, case-insensitive occurrences of `keyword`. Word characters
/// are alphanumerics, apostrophes and hyphens, so `clockwise` does not
/// match inside `counterclockwise` or `counter-clockwise`.
pub fn count_word(text_lower: &str, keyword: &str) -> usize {
    let kw = keyword.to_lowercase();
    if kw.is_empty() {
        return 0;
    }
    text_lower
        .match_indices(kw.as_str())
        .filter(|(i, m)| {
            let before = text_lower[..*i].chars().next_back();
            let after = text_lower[i + m.len()..].chars().next();
            !before.is_some_and(is_word_char) && !after.is_some_and(is_word_char)
        })
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intensity {
    /// Category to mean keyword hits per trace.
    pub per_category: BTreeMap<String, f64>,
    pub traces: usize,
    /// Set when the corpus was empty and every value defaulted to zero.
    pub empty_corpus: bool,
}

pub fn substitution_intensity<S: AsRef<str>>(traces: &[S], categories: &BTreeMap<String, Vec<String>>) -> Intensity {
    let lowered: Vec<String> = traces.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let n = lowered.len();
    let per_category = categories
        .iter()
        .map(|(cat, kws)| {
            let hits: usize = lowered
                .iter()
                .map(|t| kws.iter().map(|k| count_word(t, k)).sum::<usize>())
                .sum();
            (cat.clone(), if n == 0 { 0.0 } else { hits as f64 / n as f64 })
        })
        .collect();
    Intensity { per_category, traces: n, empty_corpus: n == 0 }
}
