//! Reference implementations and fixtures shared by the integration tests.
//! Everything here is written independently of the library code it checks.
#![allow(dead_code)]

pub mod mock;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use traceforge_core::circuit::CircuitScene;
use traceforge_core::geom::{Direction, Point2D};
use traceforge_core::palette::Color;
use traceforge_core::probes::{Cell, RegionDump, RegionSpec, DUMP_SCHEMA};
use traceforge_core::scoring::{ErrorClass, ParsedResponse};
use traceforge_core::swirl::SwirlScene;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---- geometry -------------------------------------------------------------

fn cross(o: Point2D, a: Point2D, b: Point2D) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn within_box(p: Point2D, a: Point2D, b: Point2D) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment contact by orientation signs.
pub fn segments_touch(p1: Point2D, p2: Point2D, q1: Point2D, q2: Point2D) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && within_box(p1, q1, q2))
        || (d2 == 0.0 && within_box(p2, q1, q2))
        || (d3 == 0.0 && within_box(q1, p1, p2))
        || (d4 == 0.0 && within_box(q2, p1, p2))
}

fn boxes_overlap(a1: Point2D, a2: Point2D, b1: Point2D, b2: Point2D, pad: f64) -> bool {
    a1.x.min(a2.x) - pad <= b1.x.max(b2.x)
        && b1.x.min(b2.x) - pad <= a1.x.max(a2.x)
        && a1.y.min(a2.y) - pad <= b1.y.max(b2.y)
        && b1.y.min(b2.y) - pad <= a1.y.max(a2.y)
}

/// Any contact between two polylines, by checking every segment pair.
pub fn polylines_touch(a: &[Point2D], b: &[Point2D]) -> bool {
    for s in a.windows(2) {
        for t in b.windows(2) {
            if boxes_overlap(s[0], s[1], t[0], t[1], 0.0) && segments_touch(s[0], s[1], t[0], t[1]) {
                return true;
            }
        }
    }
    false
}

/// Contacts between non-adjacent segments of one polyline.
pub fn self_touching(p: &[Point2D]) -> bool {
    let n = p.len().saturating_sub(1);
    for i in 0..n {
        for j in i + 2..n {
            if boxes_overlap(p[i], p[i + 1], p[j], p[j + 1], 0.0) && segments_touch(p[i], p[i + 1], p[j], p[j + 1]) {
                return true;
            }
        }
    }
    false
}

pub fn point_seg_dist(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0) };
    ((a.x + t * dx - p.x).powi(2) + (a.y + t * dy - p.y).powi(2)).sqrt()
}

pub fn seg_seg_dist(a1: Point2D, a2: Point2D, b1: Point2D, b2: Point2D) -> f64 {
    if segments_touch(a1, a2, b1, b2) {
        return 0.0;
    }
    point_seg_dist(a1, b1, b2)
        .min(point_seg_dist(a2, b1, b2))
        .min(point_seg_dist(b1, a1, a2))
        .min(point_seg_dist(b2, a1, a2))
}

pub fn clearance(a: &[Point2D], b: &[Point2D]) -> f64 {
    let mut best = f64::INFINITY;
    for s in a.windows(2) {
        for t in b.windows(2) {
            best = best.min(seg_seg_dist(s[0], s[1], t[0], t[1]));
        }
    }
    best
}

pub fn dist_to_polyline(p: Point2D, path: &[Point2D]) -> f64 {
    path.windows(2).map(|s| point_seg_dist(p, s[0], s[1])).fold(f64::INFINITY, f64::min)
}

/// Arc positions of vertices where the direction actually changes.
pub fn corner_arcs(p: &[Point2D]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = 0.0;
    for i in 1..p.len() {
        s += p[i - 1].dist(p[i]);
        if i + 1 < p.len() && cross(p[i - 1], p[i], p[i + 1]).abs() > 1e-9 {
            out.push(s);
        }
    }
    out
}

pub fn arc_len(p: &[Point2D]) -> f64 {
    p.windows(2).map(|w| w[0].dist(w[1])).sum()
}

// ---- classifier references ------------------------------------------------

fn lcp(a: &[Color], b: &[Color]) -> usize {
    let mut k = 0;
    while k < a.len() && k < b.len() && a[k] == b[k] {
        k += 1;
    }
    k
}

/// Swirl reference: winding and angle are recovered from pixel positions
/// (atan2 about the spiral center, radial distance over the turn gap).
pub fn swirl_reference(scene: &SwirlScene, pred: &[Color], saw_end: bool, tol_deg: f64) -> ErrorClass {
    let gt = scene.ground_truth();
    if saw_end && pred == gt.as_slice() {
        return ErrorClass::Correct;
    }
    let k = lcp(pred, &gt);
    if k == 0 {
        return ErrorClass::WrongStart;
    }
    if k == pred.len() {
        return ErrorClass::Incomplete;
    }
    let Some(got) = scene.dots.iter().find(|d| d.color == pred[k]) else {
        return ErrorClass::Other;
    };
    let Some(expected) = scene.dots.get(k) else {
        return ErrorClass::Other;
    };
    let c = scene.spec.center;
    let sign = match scene.spec.direction {
        Direction::Counterclockwise => 1.0,
        Direction::Clockwise => -1.0,
    };
    let ang = |p: Point2D| (sign * (p.y - c.y)).atan2(p.x - c.x);
    let gap = scene.level.turn_gap();
    let windings = ((got.position.dist(c) - expected.position.dist(c)) / gap).round();
    let mut d = (ang(got.position) - ang(expected.position)).abs();
    if d > std::f64::consts::PI {
        d = std::f64::consts::TAU - d;
    }
    if windings != 0.0 && d <= tol_deg.to_radians() {
        ErrorClass::AdjacentTurnJump
    } else {
        ErrorClass::Other
    }
}

/// Circuit reference: a naive search over every other wire, every dot
/// offset on it and every predicted position after the divergence.
pub fn circuit_reference(scene: &CircuitScene, wire_id: u32, parsed: &ParsedResponse, d_adj: f64) -> ErrorClass {
    let q = scene.wires.iter().find(|w| w.id == wire_id).expect("queried wire");
    let gt = q.colors();
    let pred = &parsed.colors;
    let label_right = parsed.component_label.as_deref() == Some(q.component_label.as_str());
    if parsed.saw_end && *pred == gt && label_right {
        return ErrorClass::Correct;
    }
    let k = lcp(pred, &gt);
    if k == 0 {
        return ErrorClass::WrongStart;
    }
    let label_ok = parsed.component_label.is_none() || label_right;
    if k == pred.len() && label_ok {
        return ErrorClass::Incomplete;
    }
    let mut anchors = vec![q.dots[k - 1].position];
    if k < q.dots.len() {
        anchors.push(q.dots[k].position);
    }
    let near = |p: Point2D| anchors.iter().any(|a| a.dist(p) <= d_adj);
    for w in scene.wires.iter().filter(|w| w.id != wire_id) {
        for i in 0..w.dots.len().saturating_sub(1) {
            for j in k..pred.len().saturating_sub(1) {
                if pred[j] == w.dots[i].color && pred[j + 1] == w.dots[i + 1].color && near(w.dots[i].position) {
                    return ErrorClass::AdjacentWireJump;
                }
            }
        }
    }
    if !label_ok {
        let label = parsed.component_label.as_deref().expect("label present when not ok");
        for w in scene.wires.iter().filter(|w| w.id != wire_id && w.component_label == label) {
            if w.dots.iter().any(|d| near(d.position)) {
                return ErrorClass::AdjacentWireJump;
            }
        }
    }
    ErrorClass::Other
}

// ---- synthetic probe dumps ------------------------------------------------

/// Raw tensors a dump is distilled from: full attention over every grid
/// token and per-token hidden states.
#[derive(Debug, Clone)]
pub struct RawProbe {
    pub rows: u32,
    pub cols: u32,
    pub patch_px: u32,
    /// `[block][src][dst]` over all `rows·cols` tokens, row-major.
    pub attention: Vec<Vec<Vec<f64>>>,
    /// `[block][token][dim]`.
    pub vision_states: Vec<Vec<Vec<f64>>>,
    pub llm_states: Vec<Vec<Vec<f64>>>,
    pub regions: Vec<(String, Vec<Cell>)>,
    pub condition: String,
}

fn clipped_cells(rows: u32, cols: u32, c: Cell) -> Vec<Cell> {
    let mut out = Vec::new();
    for dr in -1i64..=1 {
        for dc in -1i64..=1 {
            let (r, k) = (c.row as i64 + dr, c.col as i64 + dc);
            if r >= 0 && k >= 0 && r < rows as i64 && k < cols as i64 {
                out.push(Cell::new(r as u32, k as u32));
            }
        }
    }
    out
}

pub fn random_raw_probe(seed: u64) -> RawProbe {
    let mut r = rng(seed);
    let patch_px = [8u32, 14, 16][r.gen_range(0..3)];
    let (rows, cols) = (r.gen_range(3..9u32), r.gen_range(3..9u32));
    let n = (rows * cols) as usize;
    let blocks = r.gen_range(1..5);
    let layers = r.gen_range(1..5);
    let dim = r.gen_range(2..17);
    let attention = (0..blocks)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let logits: Vec<f64> = (0..n).map(|_| r.gen_range(-3.0..3.0)).collect();
                    let z: f64 = logits.iter().map(|l: &f64| l.exp()).sum();
                    logits.iter().map(|l| l.exp() / z).collect()
                })
                .collect()
        })
        .collect();
    let mut states = |count: usize| -> Vec<Vec<Vec<f64>>> {
        (0..count)
            .map(|_| {
                let offset: Vec<f64> = (0..dim).map(|_| r.gen_range(-5.0..5.0)).collect();
                (0..n).map(|_| offset.iter().map(|o| o + r.gen_range(-1.0..1.0)).collect()).collect()
            })
            .collect()
    };
    let vision_states = states(blocks);
    let llm_states = states(layers);
    let n_dist = r.gen_range(1..4);
    let mut names = vec!["Red".to_string(), "Green".to_string()];
    names.extend((1..=n_dist).map(|i| format!("DistRed_{i}")));
    let regions = names
        .into_iter()
        .map(|name| {
            let c = Cell::new(r.gen_range(0..rows), r.gen_range(0..cols));
            (name, clipped_cells(rows, cols, c))
        })
        .collect();
    let condition = ["SharedSegment", "DifferentSegment", "DifferentAngle", "DifferentAll"][r.gen_range(0..4)].into();
    RawProbe { rows, cols, patch_px, attention, vision_states, llm_states, regions, condition }
}

fn flat(p: &RawProbe, c: Cell) -> usize {
    (c.row * p.cols + c.col) as usize
}

fn mean_of(vs: &[&Vec<f64>]) -> Vec<f64> {
    let mut m = vec![0.0; vs[0].len()];
    for v in vs {
        for (a, b) in m.iter_mut().zip(v.iter()) {
            *a += b;
        }
    }
    m.iter().map(|x| x / vs.len() as f64).collect()
}

/// What an extractor would write for `p`.
pub fn distill(p: &RawProbe) -> RegionDump {
    let tokens: Vec<Cell> = p.regions.iter().flat_map(|(_, c)| c.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
    let all_cells: BTreeSet<Cell> = p.regions.iter().flat_map(|(_, c)| c.iter().copied()).collect();
    let overlapping = all_cells.len() < p.regions.iter().map(|(_, c)| c.len()).sum::<usize>();
    let attention_sub = p
        .attention
        .iter()
        .map(|m| tokens.iter().map(|&s| tokens.iter().map(|&t| m[flat(p, s)][flat(p, t)]).collect()).collect())
        .collect();
    let region_means = |states: &Vec<Vec<Vec<f64>>>| -> Vec<BTreeMap<String, Vec<f64>>> {
        states
            .iter()
            .map(|layer| {
                p.regions
                    .iter()
                    .map(|(name, cells)| {
                        let vs: Vec<&Vec<f64>> = cells.iter().map(|&c| &layer[flat(p, c)]).collect();
                        (name.clone(), mean_of(&vs))
                    })
                    .collect()
            })
            .collect()
    };
    let token_means = |states: &Vec<Vec<Vec<f64>>>| -> Vec<Vec<f64>> {
        states.iter().map(|layer| mean_of(&layer.iter().collect::<Vec<_>>())).collect()
    };
    RegionDump {
        schema: DUMP_SCHEMA.into(),
        model: "synthetic".into(),
        image: "synthetic.png".into(),
        condition: Some(p.condition.clone()),
        patch_px: p.patch_px,
        grid_rows: p.rows,
        grid_cols: p.cols,
        vision_blocks: p.attention.len(),
        llm_layers: p.llm_states.len(),
        regions: p
            .regions
            .iter()
            .map(|(name, cells)| RegionSpec {
                name: name.clone(),
                center: Point2D::new(0.0, 0.0),
                cells: cells.clone(),
            })
            .collect(),
        tokens,
        attention_sub,
        hidden_vision: region_means(&p.vision_states),
        vision_token_mean: token_means(&p.vision_states),
        hidden_llm: region_means(&p.llm_states),
        llm_token_mean: token_means(&p.llm_states),
        overlapping_regions: overlapping,
    }
}

fn cells_of<'a>(p: &'a RawProbe, name: &str) -> &'a [Cell] {
    &p.regions.iter().find(|(n, _)| n == name).expect("region").1
}

/// Attention score straight from the full matrix.
pub fn ref_attn_score(p: &RawProbe, block: usize, a: &str, b: &str) -> f64 {
    let (src, dst) = (cells_of(p, a), cells_of(p, b));
    let mut total = 0.0;
    for &s in src {
        for &t in dst {
            total += p.attention[block][flat(p, s)][flat(p, t)];
        }
    }
    total / src.len() as f64
}

fn distractor_names(p: &RawProbe) -> Vec<&str> {
    p.regions.iter().map(|(n, _)| n.as_str()).filter(|n| n.starts_with("DistRed")).collect()
}

pub fn ref_attn_margins(p: &RawProbe) -> Vec<f64> {
    (0..p.attention.len())
        .map(|l| {
            let d = distractor_names(p)
                .into_iter()
                .map(|n| ref_attn_score(p, l, "Red", n))
                .fold(f64::NEG_INFINITY, f64::max);
            ref_attn_score(p, l, "Red", "Green") - d
        })
        .collect()
}

/// Centered-cosine margins recomputed from raw per-token states.
pub fn ref_repr_margins(p: &RawProbe, states: &[Vec<Vec<f64>>]) -> Vec<Option<f64>> {
    states
        .iter()
        .map(|layer| {
            let dim = layer[0].len();
            let n = layer.len() as f64;
            let mu: Vec<f64> = (0..dim).map(|i| layer.iter().map(|v| v[i]).sum::<f64>() / n).collect();
            let centered_mean = |name: &str| -> Vec<f64> {
                let cells = cells_of(p, name);
                (0..dim)
                    .map(|i| cells.iter().map(|&c| layer[flat(p, c)][i]).sum::<f64>() / cells.len() as f64 - mu[i])
                    .collect()
            };
            let cos = |a: &[f64], b: &[f64]| -> Option<f64> {
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                (na > 0.0 && nb > 0.0).then(|| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / na / nb)
            };
            let red = centered_mean("Red");
            let g = cos(&red, &centered_mean("Green"))?;
            let mut best = f64::NEG_INFINITY;
            for name in distractor_names(p) {
                best = best.max(cos(&red, &centered_mean(name))?);
            }
            Some(g - best)
        })
        .collect()
}

pub fn max_abs_diff(a: &[Option<f64>], b: &[Option<f64>]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
            (None, None) => {}
            _ => return None,
        }
    }
    Some(worst)
}

/// Pixel footprint of the clipped 3×3 token block around `center`.
pub fn footprint(center: Point2D, patch: u32, w: u32, h: u32) -> (u32, u32, u32, u32) {
    let col = (center.x / patch as f64).floor() as i64;
    let row = (center.y / patch as f64).floor() as i64;
    let p = patch as i64;
    let x0 = ((col - 1) * p).max(0) as u32;
    let y0 = ((row - 1) * p).max(0) as u32;
    let x1 = ((col + 2) * p).min(w as i64) as u32;
    let y1 = ((row + 2) * p).min(h as i64) as u32;
    (x0, y0, x1, y1)
}

pub fn neighbourhood_cells(center: Point2D, patch: u32, w: u32, h: u32) -> BTreeSet<(i64, i64)> {
    let (gw, gh) = (w.div_ceil(patch) as i64, h.div_ceil(patch) as i64);
    let col = (center.x / patch as f64).floor() as i64;
    let row = (center.y / patch as f64).floor() as i64;
    let mut out = BTreeSet::new();
    for r in row - 1..=row + 1 {
        for c in col - 1..=col + 1 {
            if r >= 0 && c >= 0 && r < gh && c < gw {
                out.insert((r, c));
            }
        }
    }
    out
}
