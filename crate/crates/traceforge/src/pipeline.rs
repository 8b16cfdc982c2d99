//! Scoring and analysis over manifests, response logs and dumps.

use std::collections::BTreeMap;

use traceforge_core::probes::{
    aggregate_by_condition, attn_margin_curve, repr_margin_curve, MarginCurve, MarginKind, ProbeError, RegionDump,
    Stack,
};
use traceforge_core::scoring::{reasoning_length_stats, score_response, ClassifierConfig, LengthStats, ScoreRecord};
use traceforge_core::task::{DatasetManifest, ModelResponse};
use traceforge_core::textstats::{self_correction_stats, substitution_intensity, Intensity, LexiconConfig, SelfCorrection};

#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub records: Vec<ScoreRecord>,
    /// Responses whose task id is not in the manifest.
    pub unmatched: usize,
}

pub fn score_log(manifest: &DatasetManifest, responses: &[ModelResponse], cfg: &ClassifierConfig) -> Scored {
    let index: BTreeMap<&str, _> = manifest.tasks.iter().map(|t| (t.task_id.as_str(), t)).collect();
    let mut records = Vec::with_capacity(responses.len());
    let mut unmatched = 0;
    for r in responses {
        match index.get(r.task_id.as_str()) {
            Some(t) => records.push(score_response(t, r, cfg)),
            None => unmatched += 1,
        }
    }
    records.sort_by(|a, b| (&a.model, &a.task_id, a.run).cmp(&(&b.model, &b.task_id, b.run)));
    Scored { records, unmatched }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningRow {
    pub model: String,
    pub group: String,
    pub self_correction: SelfCorrection,
    pub length: Option<LengthStats>,
    pub intensity: Intensity,
    /// Whether the model had a configured self-correction lexicon.
    pub has_lexicon: bool,
}

/// Reasoning statistics per `(model, group)`. Without a manifest every
/// response falls in the group `all`.
pub fn analyze_reasoning(
    responses: &[ModelResponse],
    manifest: Option<&DatasetManifest>,
    lex: &LexiconConfig,
) -> Vec<ReasoningRow> {
    let groups: BTreeMap<&str, String> = manifest
        .map(|m| m.tasks.iter().map(|t| (t.task_id.as_str(), t.group_key())).collect())
        .unwrap_or_default();
    let group_of = |r: &ModelResponse| groups.get(r.task_id.as_str()).cloned().unwrap_or_else(|| "all".into());
    let mut buckets: BTreeMap<(String, String), Vec<&ModelResponse>> = BTreeMap::new();
    for r in responses {
        buckets.entry((r.model.clone(), group_of(r))).or_default().push(r);
    }
    buckets
        .into_iter()
        .map(|((model, group), rs)| {
            let traces: Vec<&str> = rs.iter().filter_map(|r| r.reasoning.as_deref()).collect();
            let lexicon = lex.for_model(&model);
            let owned: Vec<ModelResponse> = rs.iter().map(|r| (*r).clone()).collect();
            let length = reasoning_length_stats(&owned, |_| Some(String::new())).remove("");
            ReasoningRow {
                self_correction: self_correction_stats(&traces, lexicon.unwrap_or(&Default::default())),
                intensity: substitution_intensity(&traces, &lex.substitution),
                has_lexicon: lexicon.is_some(),
                length,
                model,
                group,
            }
        })
        .collect()
}

/// Per-dump curves of all three kinds; layers missing from a dump's stack
/// simply produce empty curves.
pub fn dump_curves(dumps: &[RegionDump]) -> Result<Vec<MarginCurve>, ProbeError> {
    let mut out = Vec::with_capacity(dumps.len() * 3);
    for d in dumps {
        out.push(attn_margin_curve(d)?);
        out.push(repr_margin_curve(d, Stack::Vision)?);
        out.push(repr_margin_curve(d, Stack::Llm)?);
    }
    Ok(out)
}

/// Mean curve per `(kind, condition)`.
pub fn margin_summary(curves: &[MarginCurve]) -> Result<BTreeMap<(MarginKind, String), MarginCurve>, ProbeError> {
    let mut out = BTreeMap::new();
    for kind in [MarginKind::Attention, MarginKind::ReprVision, MarginKind::ReprLlm] {
        let of_kind: Vec<MarginCurve> = curves.iter().filter(|c| c.kind == kind).cloned().collect();
        if of_kind.is_empty() {
            continue;
        }
        for (cond, c) in aggregate_by_condition(&of_kind)? {
            out.insert((kind, cond), c);
        }
    }
    Ok(out)
}
