//! CSV, markdown and SVG reports. Output is a pure function of the inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use traceforge_core::palette::Color;
use traceforge_core::probes::{MarginCurve, MarginKind};
use traceforge_core::scoring::{prefix_accuracy, AggregateStats, ErrorClass, ScoreRecord};
use traceforge_core::task::DatasetManifest;

use crate::pipeline::ReasoningRow;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("nothing to report")]
    Empty,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv { path: path.to_path_buf(), source }
}

fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ReportError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err(path))
}

/// One row of `accuracy.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub model: String,
    pub group: String,
    pub records: usize,
    /// `run:accuracy` pairs joined by `;`.
    pub run_accuracies: String,
    pub mean: f64,
    pub std: f64,
    pub correct: usize,
    pub adjacent_turn_jump: usize,
    pub adjacent_wire_jump: usize,
    pub incomplete: usize,
    pub wrong_start: usize,
    pub other: usize,
}

impl From<&AggregateStats> for AccuracyRow {
    fn from(s: &AggregateStats) -> Self {
        let c = |k| s.class_counts.get(&k).copied().unwrap_or(0);
        Self {
            model: s.model.clone(),
            group: s.group.clone(),
            records: s.records,
            run_accuracies: s
                .runs
                .iter()
                .map(|r| format!("{}:{}", r.run, r.accuracy))
                .collect::<Vec<_>>()
                .join(";"),
            mean: s.mean,
            std: s.std,
            correct: c(ErrorClass::Correct),
            adjacent_turn_jump: c(ErrorClass::AdjacentTurnJump),
            adjacent_wire_jump: c(ErrorClass::AdjacentWireJump),
            incomplete: c(ErrorClass::Incomplete),
            wrong_start: c(ErrorClass::WrongStart),
            other: c(ErrorClass::Other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixRow {
    pub model: String,
    pub group: String,
    pub k: usize,
    pub accuracy: f64,
}

/// Prefix-accuracy curves per `(model, group)` for `k = 1..=longest answer`.
pub fn prefix_rows(scores: &[ScoreRecord], manifest: &DatasetManifest) -> Vec<PrefixRow> {
    let gt: BTreeMap<&str, &Vec<Color>> =
        manifest.tasks.iter().map(|t| (t.task_id.as_str(), &t.ground_truth.colors)).collect();
    let mut groups: BTreeMap<(&str, &str), Vec<(Vec<Color>, Vec<Color>)>> = BTreeMap::new();
    for s in scores {
        if let Some(g) = gt.get(s.task_id.as_str()) {
            groups
                .entry((s.model.as_str(), s.group.as_str()))
                .or_default()
                .push((s.parsed.colors.clone(), (*g).clone()));
        }
    }
    let mut rows = Vec::new();
    for ((model, group), recs) in groups {
        let max_k = recs.iter().map(|(_, g)| g.len()).max().unwrap_or(0);
        for k in 1..=max_k {
            if let Some(acc) = prefix_accuracy(&recs, k) {
                rows.push(PrefixRow { model: model.into(), group: group.into(), k, accuracy: acc });
            }
        }
    }
    rows
}

const SERIES_COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Minimal deterministic line chart. `None` values break the line.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<Option<f64>>)]) -> String {
    let (w, h) = (720.0, 420.0);
    let (l, r, t, b) = (70.0, 190.0, 40.0, 50.0);
    let n = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0).max(2);
    let vals = series.iter().flat_map(|(_, v)| v.iter().flatten().copied());
    let (mut lo, mut hi) = vals.fold((0.0f64, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let pad = (hi - lo) * 0.05;
    lo -= pad;
    hi += pad;
    let px = |i: usize| l + (w - l - r) * i as f64 / (n - 1) as f64;
    let py = |v: f64| t + (h - t - b) * (hi - v) / (hi - lo);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, (w - r + l) / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<line x1="{l}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{l}" y1="{t}" x2="{l}" y2="{}" stroke="black"/>"#,
        h - b,
        w - r,
        h - b,
        h - b
    );
    if lo < 0.0 && hi > 0.0 {
        let _ = writeln!(s, r##"<line x1="{l}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##, py(0.0), w - r, py(0.0));
    }
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" font-size="11" text-anchor="end">{v:.3}</text>"#, l - 6.0, py(v) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, (w - r + l) / 2.0, h - 14.0, esc(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (h - b + t) / 2.0,
        (h - b + t) / 2.0,
        esc(y_label)
    );
    for (si, (name, v)) in series.iter().enumerate() {
        let color = SERIES_COLORS[si % SERIES_COLORS.len()];
        let mut runs: Vec<Vec<String>> = vec![Vec::new()];
        for (i, y) in v.iter().enumerate() {
            match y {
                Some(y) => runs.last_mut().expect("non-empty").push(format!("{:.2},{:.2}", px(i), py(*y))),
                None => runs.push(Vec::new()),
            }
        }
        for pts in runs.iter().filter(|p| !p.is_empty()) {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        }
        let ly = t + 16.0 * si as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-size="11">{}</text>"#,
            w - r + 10.0,
            w - r + 30.0,
            w - r + 36.0,
            ly + 4.0,
            esc(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `accuracy.csv`, `prefix_accuracy.csv`, `prefix_accuracy.svg` and
/// `summary.md` into `out_dir`.
pub fn emit_report(
    stats: &[AggregateStats],
    scores: &[ScoreRecord],
    manifest: &DatasetManifest,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    if stats.is_empty() {
        return Err(ReportError::Empty);
    }
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let rows: Vec<AccuracyRow> = stats.iter().map(AccuracyRow::from).collect();
    let acc = out_dir.join("accuracy.csv");
    write_csv(&rows, &acc)?;

    let prefix = prefix_rows(scores, manifest);
    let pcsv = out_dir.join("prefix_accuracy.csv");
    write_csv(&prefix, &pcsv)?;
    let mut series: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    for p in &prefix {
        let v = series.entry(format!("{} {}", p.model, p.group)).or_default();
        v.resize(p.k, None);
        v[p.k - 1] = Some(p.accuracy);
    }
    let psvg = out_dir.join("prefix_accuracy.svg");
    let chart = line_chart_svg("Prefix accuracy", "k (answer position, 1-based)", "fraction correct", &series.into_iter().collect::<Vec<_>>());
    fs::write(&psvg, chart).map_err(io(&psvg))?;

    let md = out_dir.join("summary.md");
    fs::write(&md, summary_markdown(&rows)).map_err(io(&md))?;
    Ok(vec![acc, pcsv, psvg, md])
}

pub fn summary_markdown(rows: &[AccuracyRow]) -> String {
    let mut s = String::from("# Accuracy summary\n\n");
    s.push_str("Mean ± population standard deviation of per-run exact-match accuracy (%). ");
    s.push_str("\"Other errors\" folds Incomplete, WrongStart and Other together.\n\n");
    s.push_str("| model | group | records | accuracy | adjacent-turn jumps | adjacent-wire jumps | other errors |\n");
    s.push_str("|---|---|---:|---:|---:|---:|---:|\n");
    for r in rows {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {:.1} ± {:.1} | {} | {} | {} |",
            r.model,
            r.group,
            r.records,
            r.mean,
            r.std,
            r.adjacent_turn_jump,
            r.adjacent_wire_jump,
            r.incomplete + r.wrong_start + r.other
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginRow {
    pub kind: String,
    pub condition: String,
    pub layer: usize,
    pub value: Option<f64>,
    pub count: usize,
}

/// `margins.csv` plus one SVG per margin kind (conditions as series).
pub fn emit_margin_report(
    summary: &BTreeMap<(MarginKind, String), MarginCurve>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    if summary.is_empty() {
        return Err(ReportError::Empty);
    }
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut rows = Vec::new();
    for ((kind, cond), c) in summary {
        for (layer, (v, n)) in c.values.iter().zip(&c.counts).enumerate() {
            rows.push(MarginRow { kind: kind.as_str().into(), condition: cond.clone(), layer, value: *v, count: *n });
        }
    }
    let csv_path = out_dir.join("margins.csv");
    write_csv(&rows, &csv_path)?;
    let mut out = vec![csv_path];
    for kind in [MarginKind::Attention, MarginKind::ReprVision, MarginKind::ReprLlm] {
        let series: Vec<(String, Vec<Option<f64>>)> = summary
            .iter()
            .filter(|((k, _), _)| *k == kind)
            .map(|((_, cond), c)| (cond.clone(), c.values.clone()))
            .collect();
        if series.is_empty() {
            continue;
        }
        let x = if kind == MarginKind::ReprLlm { "decoder layer" } else { "vision block" };
        let p = out_dir.join(format!("margins_{}.svg", kind.as_str()));
        fs::write(&p, line_chart_svg(&format!("{} margin", kind.as_str()), x, "margin", &series)).map_err(io(&p))?;
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningCsvRow {
    pub model: String,
    pub group: String,
    pub samples_with_traces: usize,
    pub self_correction_rate: Option<f64>,
    pub events_per_sample: Option<f64>,
    pub has_lexicon: bool,
    pub mean_reasoning_length: Option<f64>,
    pub length_word_count_fallbacks: usize,
    pub angular_matching: f64,
    pub ring_decomposition: f64,
    pub direction_conflict: f64,
    pub empty_corpus: bool,
}

pub fn emit_reasoning_report(rows: &[ReasoningRow], out_dir: &Path) -> Result<PathBuf, ReportError> {
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let cat = |r: &ReasoningRow, k: &str| r.intensity.per_category.get(k).copied().unwrap_or(0.0);
    let out: Vec<ReasoningCsvRow> = rows
        .iter()
        .map(|r| ReasoningCsvRow {
            model: r.model.clone(),
            group: r.group.clone(),
            samples_with_traces: r.self_correction.samples_with_traces,
            self_correction_rate: r.self_correction.rate,
            events_per_sample: r.self_correction.events_per_sample,
            has_lexicon: r.has_lexicon,
            mean_reasoning_length: r.length.as_ref().map(|l| l.mean),
            length_word_count_fallbacks: r.length.as_ref().map_or(0, |l| l.word_count_fallbacks),
            angular_matching: cat(r, "AngularMatching"),
            ring_decomposition: cat(r, "RingDecomposition"),
            direction_conflict: cat(r, "DirectionConflict"),
            empty_corpus: r.intensity.empty_corpus,
        })
        .collect();
    let p = out_dir.join("reasoning.csv");
    write_csv(&out, &p)?;
    Ok(p)
}
