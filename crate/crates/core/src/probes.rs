//! Token-grid geometry and the attention / representation selectivity margins
//! computed from region dumps.
//!
//! A dump carries, per vision block, the head-averaged post-softmax attention
//! restricted to the union of region tokens, plus region-mean hidden vectors
//! and the image-token mean for every block and decoder layer.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geom::Point2D;

pub const DUMP_SCHEMA: &str = "traceforge-dump/1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProbeError {
    #[error("point ({0}, {1}) lies outside the canvas")]
    OutOfCanvas(f64, f64),
    #[error("region {0:?} missing from dump")]
    MissingRegion(String),
    #[error("dump has no distractor region")]
    NoDistractor,
    #[error("layer index {0} out of range")]
    LayerOutOfRange(usize),
    #[error("malformed dump: {0}")]
    Malformed(String),
    #[error("curves in group {0:?} have different lengths")]
    Ragged(String),
    #[error("empty curve group")]
    EmptyGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: u32,
    pub col: u32,
}

impl Cell {
    pub const fn new(row: u32, col: u32) -> Self {
        Self { row, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenGrid {
    pub patch_px: u32,
    pub width: u32,
    pub height: u32,
    /// Columns, `ceil(width / patch_px)`.
    pub gw: u32,
    /// Rows, `ceil(height / patch_px)`.
    pub gh: u32,
}

impl TokenGrid {
    /// Panics when `patch_px` is zero.
    pub fn new(patch_px: u32, width: u32, height: u32) -> Self {
        assert!(patch_px > 0, "patch size must be positive");
        Self {
            patch_px,
            width,
            height,
            gw: width.div_ceil(patch_px),
            gh: height.div_ceil(patch_px),
        }
    }

    pub fn pixel_to_token(&self, pt: Point2D) -> Result<Cell, ProbeError> {
        let inside = pt.x >= 0.0
            && pt.y >= 0.0
            && pt.x < self.width as f64
            && pt.y < self.height as f64;
        if !inside {
            return Err(ProbeError::OutOfCanvas(pt.x, pt.y));
        }
        let p = self.patch_px as f64;
        Ok(Cell::new(
            libm::floor(pt.y / p) as u32,
            libm::floor(pt.x / p) as u32,
        ))
    }

    /// The 3×3 neighborhood of `cell`, clipped to the grid, in row-major order.
    pub fn neighborhood(&self, cell: Cell) -> Vec<Cell> {
        let mut out = Vec::with_capacity(9);
        for r in cell.row.saturating_sub(1)..=(cell.row + 1).min(self.gh - 1) {
            for c in cell.col.saturating_sub(1)..=(cell.col + 1).min(self.gw - 1) {
                out.push(Cell::new(r, c));
            }
        }
        out
    }

    pub fn region_token_set(&self, center: Point2D) -> Result<Vec<Cell>, ProbeError> {
        Ok(self.neighborhood(self.pixel_to_token(center)?))
    }

    /// Row-major flat index of a cell.
    pub fn flat_index(&self, cell: Cell) -> usize {
        cell.row as usize * self.gw as usize + cell.col as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub name: String,
    pub center: Point2D,
    pub cells: Vec<Cell>,
}

impl RegionSpec {
    pub fn from_center(name: &str, center: Point2D, grid: &TokenGrid) -> Result<Self, ProbeError> {
        Ok(Self {
            name: name.into(),
            center,
            cells: grid.region_token_set(center)?,
        })
    }

    pub fn is_distractor(&self) -> bool {
        self.name.starts_with("DistRed")
    }
}

/// Region-mean vectors keyed by region name, one map per block or layer.
pub type RegionVectors = Vec<BTreeMap<String, Vec<f64>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDump {
    pub schema: String,
    pub model: String,
    pub image: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    pub patch_px: u32,
    pub grid_rows: u32,
    pub grid_cols: u32,
    pub vision_blocks: usize,
    pub llm_layers: usize,
    pub regions: Vec<RegionSpec>,
    /// Token list indexing both axes of every attention submatrix.
    pub tokens: Vec<Cell>,
    /// `[block][source][target]`, head-averaged.
    pub attention_sub: Vec<Vec<Vec<f64>>>,
    pub hidden_vision: RegionVectors,
    pub vision_token_mean: Vec<Vec<f64>>,
    pub hidden_llm: RegionVectors,
    pub llm_token_mean: Vec<Vec<f64>>,
    /// Set when two regions share a token cell.
    #[serde(default)]
    pub overlapping_regions: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginKind {
    Attention,
    ReprVision,
    ReprLlm,
}

impl MarginKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MarginKind::Attention => "attention",
            MarginKind::ReprVision => "repr_vision",
            MarginKind::ReprLlm => "repr_llm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stack {
    Vision,
    Llm,
}

/// Per-block (or per-layer) margins; `None` marks an undefined layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginCurve {
    pub kind: MarginKind,
    pub values: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    /// Number of curves contributing to each value.
    pub counts: Vec<usize>,
}

impl RegionDump {
    pub fn region(&self, name: &str) -> Result<&RegionSpec, ProbeError> {
        self.regions
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| ProbeError::MissingRegion(name.into()))
    }

    fn distractors(&self) -> Result<Vec<&RegionSpec>, ProbeError> {
        let d: Vec<_> = self.regions.iter().filter(|r| r.is_distractor()).collect();
        if d.is_empty() {
            Err(ProbeError::NoDistractor)
        } else {
            Ok(d)
        }
    }

    fn token_indices(&self, region: &RegionSpec) -> Result<Vec<usize>, ProbeError> {
        region
            .cells
            .iter()
            .map(|c| {
                self.tokens.iter().position(|t| t == c).ok_or_else(|| {
                    ProbeError::Malformed(alloc::format!(
                        "cell ({}, {}) of {} not in token list",
                        c.row,
                        c.col,
                        region.name
                    ))
                })
            })
            .collect()
    }

    /// Shape and sign checks.
    pub fn validate(&self) -> Result<(), ProbeError> {
        let bad = |m: &str| Err(ProbeError::Malformed(m.into()));
        if self.schema != DUMP_SCHEMA {
            return bad("schema version");
        }
        if self.attention_sub.len() != self.vision_blocks
            || self.hidden_vision.len() != self.vision_blocks
            || self.vision_token_mean.len() != self.vision_blocks
        {
            return bad("vision stack length");
        }
        if self.hidden_llm.len() != self.llm_layers || self.llm_token_mean.len() != self.llm_layers {
            return bad("llm stack length");
        }
        let n = self.tokens.len();
        for m in &self.attention_sub {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return bad("attention submatrix shape");
            }
            if m.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
                return bad("attention values must be finite and non-negative");
            }
        }
        for r in &self.regions {
            self.token_indices(r)?;
            if r.cells.is_empty() {
                return bad("region without cells");
            }
        }
        for (vectors, means) in [
            (&self.hidden_vision, &self.vision_token_mean),
            (&self.hidden_llm, &self.llm_token_mean),
        ] {
            let dim = means.first().map(Vec::len);
            for (layer, mean) in vectors.iter().zip(means) {
                if Some(mean.len()) != dim || layer.values().any(|v| Some(v.len()) != dim) {
                    return bad("inconsistent vector dimension");
                }
            }
        }
        Ok(())
    }
}

/// `a_{A→B}` at one block: mean over source tokens in `a` of the attention
/// mass they send to all tokens in `b`.
pub fn attn_region_score(dump: &RegionDump, block: usize, a: &str, b: &str) -> Result<f64, ProbeError> {
    let m = dump
        .attention_sub
        .get(block)
        .ok_or(ProbeError::LayerOutOfRange(block))?;
    let src = dump.token_indices(dump.region(a)?)?;
    let dst = dump.token_indices(dump.region(b)?)?;
    let total: f64 = src
        .iter()
        .map(|&s| dst.iter().map(|&t| m[s][t]).sum::<f64>())
        .sum();
    Ok(total / src.len() as f64)
}

/// `a_{Red→Green} − max_j a_{Red→DistRed_j}` per vision block.
pub fn attn_margin_curve(dump: &RegionDump) -> Result<MarginCurve, ProbeError> {
    dump.region("Red")?;
    dump.region("Green")?;
    let dists = dump.distractors()?;
    let values = (0..dump.vision_blocks)
        .map(|l| {
            let green = attn_region_score(dump, l, "Red", "Green")?;
            let mut worst = f64::NEG_INFINITY;
            for d in &dists {
                worst = worst.max(attn_region_score(dump, l, "Red", &d.name)?);
            }
            Ok(Some(green - worst))
        })
        .collect::<Result<Vec<_>, ProbeError>>()?;
    Ok(MarginCurve {
        kind: MarginKind::Attention,
        counts: alloc::vec![1; values.len()],
        values,
        condition: dump.condition.clone(),
    })
}

fn centered(v: &[f64], mean: &[f64]) -> Vec<f64> {
    v.iter().zip(mean).map(|(a, b)| a - b).collect()
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.iter().map(|x| x * x).sum());
    let nb = libm::sqrt(b.iter().map(|x| x * x).sum());
    if na == 0.0 || nb == 0.0 {
        None
    } else {
        Some(dot / (na * nb))
    }
}

/// `cos(h_Red, h_Green) − max_j cos(h_Red, h_DistRed_j)` on layer-mean-centered
/// vectors; a layer with any zero-norm centered vector yields `None`.
pub fn repr_margin_curve(dump: &RegionDump, stack: Stack) -> Result<MarginCurve, ProbeError> {
    let (vectors, means, kind) = match stack {
        Stack::Vision => (&dump.hidden_vision, &dump.vision_token_mean, MarginKind::ReprVision),
        Stack::Llm => (&dump.hidden_llm, &dump.llm_token_mean, MarginKind::ReprLlm),
    };
    let dists = dump.distractors()?;
    let fetch = |layer: &BTreeMap<String, Vec<f64>>, name: &str, mean: &[f64]| {
        layer
            .get(name)
            .map(|v| centered(v, mean))
            .ok_or_else(|| ProbeError::MissingRegion(name.into()))
    };
    let values = vectors
        .iter()
        .zip(means)
        .map(|(layer, mean)| {
            let red = fetch(layer, "Red", mean)?;
            let green = fetch(layer, "Green", mean)?;
            let mut best: Option<f64> = Some(f64::NEG_INFINITY);
            for d in &dists {
                let c = cosine(&red, &fetch(layer, &d.name, mean)?);
                best = match (best, c) {
                    (Some(b), Some(c)) => Some(b.max(c)),
                    _ => None,
                };
            }
            Ok(cosine(&red, &green).zip(best).map(|(g, d)| g - d))
        })
        .collect::<Result<Vec<_>, ProbeError>>()?;
    Ok(MarginCurve {
        kind,
        counts: alloc::vec![1; values.len()],
        values,
        condition: dump.condition.clone(),
    })
}

/// Element-wise mean of equally long curves, skipping missing values.
pub fn aggregate_margin_curves(curves: &[MarginCurve]) -> Result<MarginCurve, ProbeError> {
    let first = curves.first().ok_or(ProbeError::EmptyGroup)?;
    let n = first.values.len();
    if curves.iter().any(|c| c.values.len() != n) {
        return Err(ProbeError::Ragged(first.condition.clone().unwrap_or_default()));
    }
    let mut sums = alloc::vec![0.0; n];
    let mut counts = alloc::vec![0usize; n];
    for c in curves {
        for (i, v) in c.values.iter().enumerate() {
            if let Some(v) = v {
                sums[i] += v;
                counts[i] += 1;
            }
        }
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &k)| (k > 0).then(|| s / k as f64))
        .collect();
    Ok(MarginCurve {
        kind: first.kind,
        values,
        condition: first.condition.clone(),
        counts,
    })
}

/// Groups curves by condition and aggregates each group.
pub fn aggregate_by_condition(curves: &[MarginCurve]) -> Result<BTreeMap<String, MarginCurve>, ProbeError> {
    let mut groups: BTreeMap<String, Vec<MarginCurve>> = BTreeMap::new();
    for c in curves {
        groups
            .entry(c.condition.clone().unwrap_or_default())
            .or_default()
            .push(c.clone());
    }
    groups
        .into_iter()
        .map(|(k, v)| {
            aggregate_margin_curves(&v)
                .map_err(|e| match e {
                    ProbeError::Ragged(_) => ProbeError::Ragged(k.clone()),
                    e => e,
                })
                .map(|c| (k, c))
        })
        .collect()
}
