//! Local-similarity condition scenes and their occlusion masks.
//!
//! A queried path runs left to right with dots `[blue, red, green, orange]`.
//! Two distractors sit one gap above and one gap below it, each carrying
//! `[brown, red, yellow, purple]`. Only the distractor piece between its red
//! and yellow dots changes across the four [`ConditionKind`]s; the queried
//! path is drawn from the RNG before anything kind-specific, so it is
//! identical across kinds for a given seed.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{Point2D, Polyline};
use crate::palette::{Color, Rgb, MASK_GRAY};
use crate::probes::{Cell, TokenGrid};
use crate::rng::{derive_seed, rng_from_seed};

pub const CANVAS: u32 = 1024;
pub const GAP: f64 = 36.0;
pub const ROTATION_DEG: f64 = 35.0;
pub const DEFAULT_PATCH_PX: u32 = 16;
pub const RANDOM_MASK_DRAWS: usize = 1000;

pub const QUERIED_COLORS: [Color; 4] = [Color::Blue, Color::Red, Color::Green, Color::Orange];
pub const DISTRACTOR_COLORS: [Color; 4] = [Color::Brown, Color::Red, Color::Yellow, Color::Purple];

const PIECES: usize = 5;
const MIDDLE: usize = 2;
const SAMPLES_PER_PIECE: usize = 24;
const X_START: f64 = 160.0;
const X_END: f64 = 864.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConditionKind {
    SharedSegment,
    DifferentSegment,
    DifferentAngle,
    DifferentAll,
}

impl ConditionKind {
    pub const ALL: [ConditionKind; 4] = [
        ConditionKind::SharedSegment,
        ConditionKind::DifferentSegment,
        ConditionKind::DifferentAngle,
        ConditionKind::DifferentAll,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConditionKind::SharedSegment => "SharedSegment",
            ConditionKind::DifferentSegment => "DifferentSegment",
            ConditionKind::DifferentAngle => "DifferentAngle",
            ConditionKind::DifferentAll => "DifferentAll",
        }
    }

    fn changes_shape(self) -> bool {
        matches!(self, ConditionKind::DifferentSegment | ConditionKind::DifferentAll)
    }

    fn rotates(self) -> bool {
        matches!(self, ConditionKind::DifferentAngle | ConditionKind::DifferentAll)
    }
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown condition kind {0:?}")]
pub struct UnknownCondition(pub String);

impl FromStr for ConditionKind {
    type Err = UnknownCondition;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConditionKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownCondition(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDot {
    pub color: Color,
    pub arc_s: f64,
    pub position: Point2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionPath {
    pub path: Polyline,
    pub dots: Vec<PathDot>,
    /// Vertex index range `[start, end]` of the piece between the second and
    /// third dots.
    pub middle: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionScene {
    pub kind: ConditionKind,
    pub queried: ConditionPath,
    /// Upper distractor first, then lower.
    pub distractors: Vec<ConditionPath>,
    pub gap: f64,
    pub start_label: Point2D,
    pub seed: u64,
    pub width: u32,
    pub height: u32,
}

impl ConditionScene {
    pub fn ground_truth(&self) -> Vec<Color> {
        self.queried.dots.iter().map(|d| d.color).collect()
    }

    /// Named probe regions: `Red`, `Green`, `DistRed_1`, `DistRed_2`.
    pub fn regions(&self) -> Vec<(String, Point2D)> {
        let mut out = alloc::vec![
            ("Red".into(), self.queried.dots[1].position),
            ("Green".into(), self.queried.dots[2].position),
        ];
        for (i, d) in self.distractors.iter().enumerate() {
            out.push((alloc::format!("DistRed_{}", i + 1), d.dots[1].position));
        }
        out
    }

    pub fn all_dots(&self) -> impl Iterator<Item = &PathDot> {
        self.queried
            .dots
            .iter()
            .chain(self.distractors.iter().flat_map(|d| d.dots.iter()))
    }

    pub fn paths(&self) -> impl Iterator<Item = &Polyline> {
        core::iter::once(&self.queried.path).chain(self.distractors.iter().map(|d| &d.path))
    }
}

/// Knots and per-piece bulge of the queried path.
struct Skeleton {
    knots: [Point2D; PIECES + 1],
    bulges: [f64; PIECES],
}

fn draw_skeleton<R: Rng + ?Sized>(rng: &mut R) -> Skeleton {
    let base_y = 452.0 + rng.gen::<f64>() * 120.0;
    let step = (X_END - X_START) / PIECES as f64;
    let mut knots = [Point2D::default(); PIECES + 1];
    let mut y = base_y;
    for (i, k) in knots.iter_mut().enumerate() {
        if i > 0 {
            y += (rng.gen::<f64>() * 2.0 - 1.0) * 36.0;
        }
        *k = Point2D::new(X_START + step * i as f64, y);
    }
    let mut bulges = [0.0; PIECES];
    for (i, b) in bulges.iter_mut().enumerate() {
        *b = if i == MIDDLE {
            let mag = 6.0 + rng.gen::<f64>() * 4.0;
            if rng.gen::<bool>() { mag } else { -mag }
        } else {
            (rng.gen::<f64>() * 2.0 - 1.0) * 10.0
        };
    }
    Skeleton { knots, bulges }
}

/// Samples a piece from `a` to `b` bowed by `bulge` pixels along the
/// piece's left normal; excludes `a`.
fn piece_points(a: Point2D, b: Point2D, bulge: f64) -> Vec<Point2D> {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len = libm::hypot(dx, dy);
    let (nx, ny) = (-dy / len, dx / len);
    (1..=SAMPLES_PER_PIECE)
        .map(|i| {
            let t = i as f64 / SAMPLES_PER_PIECE as f64;
            let w = libm::sin(core::f64::consts::PI * t) * bulge;
            Point2D::new(a.x + dx * t + nx * w, a.y + dy * t + ny * w)
        })
        .collect()
}

fn build_path(pieces: &[Vec<Point2D>], start: Point2D, colors: [Color; 4]) -> ConditionPath {
    let mut pts = alloc::vec![start];
    let mut piece_end = Vec::with_capacity(pieces.len());
    for p in pieces {
        pts.extend_from_slice(p);
        piece_end.push(pts.len() - 1);
    }
    let path = Polyline::new(pts).expect("condition path vertices are distinct");
    let cum = path.cumulative();
    let middle = (piece_end[MIDDLE - 1], piece_end[MIDDLE]);
    // D1 at the middle of the first piece, red/green bracketing the middle
    // piece, the last dot at the middle of the final piece.
    let arcs = [
        cum[piece_end[0]] / 2.0,
        cum[middle.0],
        cum[middle.1],
        (cum[piece_end[PIECES - 2]] + cum[piece_end[PIECES - 1]]) / 2.0,
    ];
    let dots = arcs
        .iter()
        .zip(colors)
        .map(|(&s, color)| PathDot {
            color,
            arc_s: s,
            position: path.point_at_arc(s).expect("arc inside path"),
        })
        .collect();
    ConditionPath { path, dots, middle }
}

fn queried_pieces(sk: &Skeleton) -> Vec<Vec<Point2D>> {
    (0..PIECES)
        .map(|i| piece_points(sk.knots[i], sk.knots[i + 1], sk.bulges[i]))
        .collect()
}

fn distractor_pieces(sk: &Skeleton, kind: ConditionKind, offset: f64) -> Vec<Vec<Point2D>> {
    let shift = |p: Point2D| p.add(0.0, offset);
    let mut pieces: Vec<Vec<Point2D>> = queried_pieces(sk)
        .into_iter()
        .map(|pts| pts.into_iter().map(shift).collect())
        .collect();
    if kind == ConditionKind::SharedSegment {
        return pieces;
    }
    let a = shift(sk.knots[MIDDLE]);
    let b = shift(sk.knots[MIDDLE + 1]);
    let mut middle = if kind.changes_shape() {
        piece_points(a, b, -sk.bulges[MIDDLE])
    } else {
        pieces[MIDDLE].clone()
    };
    if kind.rotates() {
        // Upper distractor (negative offset) turns up, lower turns down.
        let angle = ROTATION_DEG.to_radians() * offset.signum();
        for p in middle.iter_mut() {
            *p = p.rotate_about(a, angle);
        }
        let end = *middle.last().expect("piece has samples");
        let (dx, dy) = (end.x - b.x, end.y - b.y);
        for piece in pieces.iter_mut().skip(MIDDLE + 1) {
            for p in piece.iter_mut() {
                *p = p.add(dx, dy);
            }
        }
    }
    pieces[MIDDLE] = middle;
    pieces
}

/// Generates one condition scene. Deterministic in `(kind, seed)`.
pub fn gen_condition(kind: ConditionKind, seed: u64) -> ConditionScene {
    let mut rng = rng_from_seed(seed);
    let sk = draw_skeleton(&mut rng);
    let queried = build_path(&queried_pieces(&sk), sk.knots[0], QUERIED_COLORS);
    let distractors = [-GAP, GAP]
        .into_iter()
        .map(|off| {
            build_path(
                &distractor_pieces(&sk, kind, off),
                sk.knots[0].add(0.0, off),
                DISTRACTOR_COLORS,
            )
        })
        .collect();
    ConditionScene {
        kind,
        start_label: sk.knots[0].add(-24.0, 0.0),
        queried,
        distractors,
        gap: GAP,
        seed,
        width: CANVAS,
        height: CANVAS,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaskTarget {
    OnDistractor,
    OnQueriedPath,
    Random,
}

impl MaskTarget {
    pub const ALL: [MaskTarget; 3] = [MaskTarget::OnDistractor, MaskTarget::OnQueriedPath, MaskTarget::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            MaskTarget::OnDistractor => "OnDistractor",
            MaskTarget::OnQueriedPath => "OnQueriedPath",
            MaskTarget::Random => "Random",
        }
    }
}

/// Occlusion of the 3×3 token neighborhood around `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub target: MaskTarget,
    pub center: Point2D,
    pub patch_px: u32,
    /// Token cell containing `center`.
    pub cell: Cell,
    pub fill: Rgb,
}

/// Pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelRect {
    pub fn area(&self) -> u64 {
        (self.x1 - self.x0) as u64 * (self.y1 - self.y0) as u64
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

impl MaskSpec {
    pub fn new(target: MaskTarget, center: Point2D, grid: &TokenGrid) -> Option<Self> {
        Some(Self {
            target,
            center,
            patch_px: grid.patch_px,
            cell: grid.pixel_to_token(center).ok()?,
            fill: MASK_GRAY,
        })
    }

    /// Footprint of the clipped 3×3 cell neighborhood on a `width × height` canvas.
    pub fn pixel_rect(&self, width: u32, height: u32) -> PixelRect {
        let p = self.patch_px;
        let (row, col) = (self.cell.row, self.cell.col);
        PixelRect {
            x0: col.saturating_sub(1) * p,
            y0: row.saturating_sub(1) * p,
            x1: ((col + 2) * p).min(width),
            y1: ((row + 2) * p).min(height),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MaskError {
    #[error("patch size must be positive")]
    ZeroPatch,
    #[error("no admissible random mask position in {0} draws")]
    RandomPlacement(usize),
    #[error("mask target lies outside the canvas")]
    OutOfCanvas,
}

fn neighborhoods_overlap(a: Cell, b: Cell) -> bool {
    a.row.abs_diff(b.row) <= 2 && a.col.abs_diff(b.col) <= 2
}

/// Uniform point whose 3×3 neighborhood is fully inside the canvas and
/// shares no cell with any dot's 3×3 neighborhood.
pub fn random_mask_center<R: Rng + ?Sized>(
    scene: &ConditionScene,
    patch_px: u32,
    rng: &mut R,
) -> Result<Point2D, MaskError> {
    if patch_px == 0 {
        return Err(MaskError::ZeroPatch);
    }
    let grid = TokenGrid::new(patch_px, scene.width, scene.height);
    let dot_cells: Vec<Cell> = scene
        .all_dots()
        .filter_map(|d| grid.pixel_to_token(d.position).ok())
        .collect();
    for _ in 0..RANDOM_MASK_DRAWS {
        let p = Point2D::new(
            rng.gen::<f64>() * scene.width as f64,
            rng.gen::<f64>() * scene.height as f64,
        );
        let Ok(cell) = grid.pixel_to_token(p) else {
            continue;
        };
        let inside = cell.row >= 1
            && cell.col >= 1
            && (cell.row + 2) * patch_px <= scene.height
            && (cell.col + 2) * patch_px <= scene.width;
        if inside && dot_cells.iter().all(|&d| !neighborhoods_overlap(d, cell)) {
            return Ok(p);
        }
    }
    Err(MaskError::RandomPlacement(RANDOM_MASK_DRAWS))
}

/// The three masking interventions: distractor red, queried red, random.
///
/// The random position uses an RNG stream derived from the scene seed.
pub fn gen_mask_variants(scene: &ConditionScene, patch_px: u32) -> Result<[MaskSpec; 3], MaskError> {
    if patch_px == 0 {
        return Err(MaskError::ZeroPatch);
    }
    let grid = TokenGrid::new(patch_px, scene.width, scene.height);
    let red = scene.queried.dots[1].position;
    let nearest = scene
        .distractors
        .iter()
        .map(|d| d.dots[1].position)
        .fold(None::<Point2D>, |best, p| match best {
            Some(b) if b.dist(red) <= p.dist(red) => Some(b),
            _ => Some(p),
        })
        .expect("scene has distractors");
    let mut rng = rng_from_seed(derive_seed(scene.seed, 0x6d61_736b));
    let random = random_mask_center(scene, patch_px, &mut rng)?;
    let mk = |t, c| MaskSpec::new(t, c, &grid).ok_or(MaskError::OutOfCanvas);
    Ok([
        mk(MaskTarget::OnDistractor, nearest)?,
        mk(MaskTarget::OnQueriedPath, red)?,
        mk(MaskTarget::Random, random)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_parse() {
        assert_eq!("differentall".parse::<ConditionKind>(), Ok(ConditionKind::DifferentAll));
        assert!("nope".parse::<ConditionKind>().is_err());
    }

    #[test]
    fn shared_segment_is_a_translated_copy() {
        let s = gen_condition(ConditionKind::SharedSegment, 9);
        let q = s.queried.path.points();
        for (d, off) in s.distractors.iter().zip([-GAP, GAP]) {
            let (a, b) = d.middle;
            let (qa, qb) = s.queried.middle;
            assert_eq!(b - a, qb - qa);
            for (i, p) in d.path.points()[a..=b].iter().enumerate() {
                assert_eq!(*p, q[qa + i].add(0.0, off));
            }
        }
    }

    #[test]
    fn queried_path_is_kind_independent() {
        let base = gen_condition(ConditionKind::SharedSegment, 21);
        for kind in ConditionKind::ALL {
            let s = gen_condition(kind, 21);
            assert_eq!(s.queried, base.queried);
            assert_eq!(s.ground_truth(), QUERIED_COLORS.to_vec());
        }
    }

    #[test]
    fn rotated_distractors_diverge() {
        let s = gen_condition(ConditionKind::DifferentAngle, 4);
        let q_green = s.queried.dots[2].position;
        let upper_yellow = s.distractors[0].dots[2].position;
        let lower_yellow = s.distractors[1].dots[2].position;
        assert!(q_green.y - upper_yellow.y > GAP);
        assert!(lower_yellow.y - q_green.y > GAP);
    }

    #[test]
    fn dist_red_is_one_gap_away() {
        for kind in ConditionKind::ALL {
            let s = gen_condition(kind, 2);
            let red = s.queried.dots[1].position;
            for d in &s.distractors {
                assert!(d.dots[1].position.dist(red) <= 1.5 * GAP);
            }
        }
    }

    #[test]
    fn default_mask_is_48px() {
        let s = gen_condition(ConditionKind::SharedSegment, 3);
        let masks = gen_mask_variants(&s, DEFAULT_PATCH_PX).unwrap();
        let r = masks[1].pixel_rect(CANVAS, CANVAS);
        assert_eq!((r.x1 - r.x0, r.y1 - r.y0), (48, 48));
        let red = s.queried.dots[1].position;
        assert!(r.contains(red.x as u32, red.y as u32));
        assert_eq!(masks[0].center, s.distractors[0].dots[1].position);
    }

    #[test]
    fn corner_mask_clips() {
        let grid = TokenGrid::new(16, 1024, 1024);
        let m = MaskSpec::new(MaskTarget::Random, Point2D::new(3.0, 5.0), &grid).unwrap();
        let r = m.pixel_rect(1024, 1024);
        assert_eq!(r, PixelRect { x0: 0, y0: 0, x1: 32, y1: 32 });
    }

    #[test]
    fn zero_patch_rejected() {
        let s = gen_condition(ConditionKind::SharedSegment, 3);
        assert_eq!(gen_mask_variants(&s, 0), Err(MaskError::ZeroPatch));
    }
}
