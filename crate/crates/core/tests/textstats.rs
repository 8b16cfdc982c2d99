use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;
use traceforge_core::rng_from_seed;
use traceforge_core::textstats::{
    correction_events, count_word, self_correction_stats, substitution_intensity, LexiconConfig, ModelLexicon,
};

const WORD: &str = r"[\p{Alphabetic}\p{N}'\-]";

fn regex_word_count(text_lower: &str, kw: &str) -> usize {
    let re = Regex::new(&format!(r"(?:^|[^{w}])({k})(?:[^{w}]|$)", w = &WORD[1..WORD.len() - 1], k = regex::escape(&kw.to_lowercase())))
        .unwrap();
    let mut n = 0;
    let mut pos = 0;
    while let Some(c) = re.captures_at(text_lower, pos) {
        n += 1;
        pos = c.get(1).unwrap().end();
    }
    n
}

fn regex_events(trace: &str, lex: &ModelLexicon) -> usize {
    let lower = trace.to_lowercase();
    let kw: usize = lex.keywords.iter().map(|k| Regex::new(&regex::escape(&k.to_lowercase())).unwrap().find_iter(&lower).count()).sum();
    let headers = Regex::new(r"(?s)\*\*(.*?)\*\*").unwrap();
    let hd = headers
        .captures_iter(&lower)
        .filter(|c| {
            let inner = c[1].trim_start();
            lex.header_stems.iter().any(|s| inner.starts_with(&s.to_lowercase()))
        })
        .count();
    kw + hd
}

const VOCAB: &[&str] = &[
    "ring", "rings", "Ring-road", "string", "o'clock", "clock", "clockwise", "Counterclockwise", "counter-clockwise",
    "direction", "directions", "angle", "ANGLES", "quadrant", "loop", "loopy", "wait", "Wait,", "actually", "let me check",
    "recheck", "**Revising the path**", "**Plan**", "re-examine", "circle.", "innermost", "naïve", "42", "degrees", "and",
    "the", "(ring)", "ring's", "-ring", "ring-", "red", "…", "\n", "**", "revisiting",
];

fn random_trace(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(0..60);
    let seps = [" ", "", ", ", "\n", "; ", "/"];
    let mut s = String::new();
    for _ in 0..n {
        s.push_str(VOCAB.choose(rng).unwrap());
        s.push_str(seps.choose(rng).unwrap());
    }
    s
}

#[test]
fn word_counts_match_regex_oracle() {
    let lex = LexiconConfig::default();
    let mut rng = rng_from_seed(11);
    let traces: Vec<String> = (0..100).map(|_| random_trace(&mut rng)).collect();
    for t in &traces {
        let lower = t.to_lowercase();
        for kws in lex.substitution.values() {
            for k in kws {
                assert_eq!(count_word(&lower, k), regex_word_count(&lower, k), "{k:?} in {t:?}");
            }
        }
    }
    let got = substitution_intensity(&traces, &lex.substitution);
    for (cat, kws) in &lex.substitution {
        let hits: usize = traces.iter().map(|t| kws.iter().map(|k| regex_word_count(&t.to_lowercase(), k)).sum::<usize>()).sum();
        assert!((got.per_category[cat] - hits as f64 / 100.0).abs() < 1e-12, "{cat}");
    }
}

#[test]
fn correction_counts_match_regex_oracle() {
    let lex = LexiconConfig::default();
    let mut rng = rng_from_seed(12);
    for _ in 0..100 {
        let t = random_trace(&mut rng);
        for (model, l) in &lex.self_correction {
            assert_eq!(correction_events(&t, l), regex_events(&t, l), "{model}: {t:?}");
        }
    }
}

#[test]
fn whole_word_boundaries() {
    assert_eq!(count_word("counterclockwise and counter-clockwise", "clockwise"), 0);
    assert_eq!(count_word("clockwise, clockwise.", "clockwise"), 2);
    assert_eq!(count_word("rings ring's ring", "ring"), 1);
    assert_eq!(count_word("anything", ""), 0);
}

#[test]
fn self_correction_rates() {
    let lex = ModelLexicon { keywords: vec!["wait".into(), "actually".into()], header_stems: vec![] };
    assert_eq!(correction_events("Wait, actually", &lex), 2);
    let s = self_correction_stats(&["", "  ", "fine"], &lex);
    assert_eq!(s.samples_with_traces, 1);
    assert_eq!(s.rate, Some(0.0));
    let none: [&str; 0] = [];
    assert_eq!(self_correction_stats(&none, &lex).rate, None);
}

#[test]
fn lexicon_lookup_prefers_longest_contained_key() {
    let lex = LexiconConfig::default();
    assert_eq!(lex.for_model("vendor/Sonnet-4.5-latest"), lex.self_correction.get("sonnet-4.5"));
    assert!(lex.for_model("unknown-model").is_none());
    let mut custom = LexiconConfig { self_correction: BTreeMap::new(), substitution: BTreeMap::new() };
    custom.self_correction.insert("qwen".into(), ModelLexicon::default());
    custom.self_correction.insert("qwen3".into(), ModelLexicon { keywords: vec!["hmm".into()], header_stems: vec![] });
    assert_eq!(custom.for_model("Qwen3-VL").unwrap().keywords, vec!["hmm".to_string()]);
}

#[test]
fn empty_corpus_is_flagged() {
    let lex = LexiconConfig::default();
    let none: [&str; 0] = [];
    let i = substitution_intensity(&none, &lex.substitution);
    assert!(i.empty_corpus);
    assert!(i.per_category.values().all(|&v| v == 0.0));
}
