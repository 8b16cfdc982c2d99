//! Circuit Connections scenes: a breadboard with numbered ports, labeled
//! external components, and crossing-free single-color wires carrying
//! colored dots.
//!
//! Layout is rejection sampled. Board and components are placed first, then
//! wires are routed one at a time as axis-aligned polylines; a candidate is
//! kept only if [`validate_wire_candidate`] accepts it against everything
//! already placed. A wire that cannot be routed within its attempt budget
//! causes the whole layout to be redrawn from a derived seed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{min_clearance, segment_intersections, Point2D, Polyline, Rect};
use crate::palette::{Color, CIRCUIT_PALETTE};
use crate::rng::{derive_seed, rng_from_seed};

pub const CANVAS: u32 = 1024;
pub const PORT_SIZE: f64 = 18.0;
/// Port centers sit this far inside the board edge.
pub const PORT_INSET: f64 = 16.0;
pub const WIRE_CLEARANCE: f64 = 12.0;
pub const EDGE_HUG_DISTANCE: f64 = 8.0;
pub const EDGE_HUG_LENGTH: f64 = 40.0;
pub const DOT_PITCH: f64 = 120.0;
pub const DOT_END_MARGIN: f64 = 30.0;
pub const DOT_CORNER_MARGIN: f64 = 20.0;
pub const DOT_RADIUS: f64 = 10.0;
pub const COMPONENT_CLEARANCE: f64 = 24.0;
pub const ROUTE_ATTEMPTS: usize = 200;
pub const LAYOUT_RETRIES: usize = 50;
pub const MIN_WIRES: usize = 5;
pub const MAX_WIRES: usize = 9;

const CANVAS_MARGIN: f64 = 28.0;
const BOARD: Rect = Rect::new(322.0, 382.0, 702.0, 642.0);
const COMPONENT_W: f64 = 76.0;
const COMPONENT_H: f64 = 44.0;
/// Minimum board-to-component gap used during placement (stricter than
/// [`COMPONENT_CLEARANCE`] to leave routing room).
const PLACEMENT_BOARD_GAP: f64 = 70.0;
const PLACEMENT_COMPONENT_GAP: f64 = 40.0;
/// Dots keep this far from other wires, ports and rectangles.
const DOT_KEEPOUT_WIRE: f64 = 2.0 * DOT_RADIUS + 4.0;
const DOT_KEEPOUT_RECT: f64 = DOT_RADIUS + 4.0;
/// Interior-exit margin for sampled corner coordinates.
const ROUTE_STANDOFF: f64 = 14.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Top,
    Right,
    Bottom,
    Left,
}

impl Side {
    /// Unit outward normal in pixel space.
    pub fn normal(self) -> (f64, f64) {
        match self {
            Side::Top => (0.0, -1.0),
            Side::Right => (1.0, 0.0),
            Side::Bottom => (0.0, 1.0),
            Side::Left => (-1.0, 0.0),
        }
    }

    fn vertical(self) -> bool {
        matches!(self, Side::Top | Side::Bottom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Port {
    pub number: u32,
    pub center: Point2D,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breadboard {
    pub rect: Rect,
    pub ports: Vec<Port>,
    pub port_size: f64,
}

impl Breadboard {
    pub fn port(&self, number: u32) -> Option<&Port> {
        self.ports.iter().find(|p| p.number == number)
    }

    /// Bounding box of the port-number label drawn inward of a port.
    pub fn label_box(&self, port: &Port) -> Rect {
        let (nx, ny) = port.side.normal();
        let c = port.center.add(-nx * 22.0, -ny * 22.0);
        Rect::centered(c, 24.0, 16.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub label: String,
    pub rect: Rect,
    pub port: Point2D,
    /// Side of the rectangle carrying the port.
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireDot {
    pub color: Color,
    pub arc_s: f64,
    pub position: Point2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WireRoute {
    pub id: u32,
    pub port_number: u32,
    pub component_label: String,
    /// Runs from the breadboard port to the component port.
    pub path: Polyline,
    pub dots: Vec<WireDot>,
}

impl WireRoute {
    pub fn colors(&self) -> Vec<Color> {
        self.dots.iter().map(|d| d.color).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitScene {
    pub board: Breadboard,
    pub components: Vec<Component>,
    pub wires: Vec<WireRoute>,
    pub seed: u64,
    /// Seed of the layout attempt that succeeded.
    pub layout_seed: u64,
    pub width: u32,
    pub height: u32,
}

impl CircuitScene {
    pub fn component(&self, label: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.label == label)
    }

    pub fn wire_for_port(&self, number: u32) -> Option<&WireRoute> {
        self.wires.iter().find(|w| w.port_number == number)
    }
}

/// First rule a wire candidate breaks, in checking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    /// (a) touches an existing wire.
    Collision,
    /// (b) closer than [`WIRE_CLEARANCE`] to an existing wire.
    Clearance,
    /// (c) passes over a port other than its own two endpoints.
    ForeignPort,
    /// (d) enters a component, the board, or a label box.
    Interior,
    /// (e) runs along a board or component edge.
    HugsEdge,
}

impl Violation {
    pub fn as_str(self) -> &'static str {
        match self {
            Violation::Collision => "collision",
            Violation::Clearance => "clearance",
            Violation::ForeignPort => "foreign_port",
            Violation::Interior => "interior",
            Violation::HugsEdge => "hugs_edge",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("wire count {0} outside [{MIN_WIRES}, {MAX_WIRES}]")]
    WireCount(usize),
    #[error("layout infeasible after {0} retries")]
    LayoutInfeasible(usize),
}

/// Outcome of a failed [`route_wire`] call.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub attempts: usize,
    pub last_reason: Option<Violation>,
}

/// Partial scene that wire candidates are validated against.
#[derive(Debug, Clone, Copy)]
pub struct RoutingContext<'a> {
    pub board: &'a Breadboard,
    pub components: &'a [Component],
    pub wires: &'a [WireRoute],
}

fn port_radius(size: f64) -> f64 {
    size / 2.0 * SQRT_2
}

/// Drops the part of the first segment that leaves the board through the
/// wire's own port. Returns `None` if the first segment heads inward.
fn trim_port_stub(candidate: &Polyline, board: &Rect, side: Side) -> Option<Vec<Point2D>> {
    let pts = candidate.points();
    let (nx, ny) = side.normal();
    let (p, a) = (pts[0], pts[1]);
    let outward = (a.x - p.x) * nx + (a.y - p.y) * ny;
    if outward <= 0.0 {
        return None;
    }
    // Perpendicular exit: the boundary crossing shares the port's cross coordinate.
    let exit = match side {
        Side::Top => Point2D::new(p.x, board.y0),
        Side::Bottom => Point2D::new(p.x, board.y1),
        Side::Left => Point2D::new(board.x0, p.y),
        Side::Right => Point2D::new(board.x1, p.y),
    };
    let straight = if side.vertical() { a.x == p.x } else { a.y == p.y };
    let past_edge = (a.x - exit.x) * nx + (a.y - exit.y) * ny >= 0.0;
    if !straight || !past_edge {
        return None;
    }
    let mut rest = Vec::with_capacity(pts.len());
    if exit != a {
        rest.push(exit);
    }
    rest.extend_from_slice(&pts[1..]);
    Some(rest)
}

fn hugs_edge(a: Point2D, b: Point2D, edge: (Point2D, Point2D)) -> bool {
    let (e0, e1) = edge;
    let seg_h = a.y == b.y;
    let seg_v = a.x == b.x;
    let edge_h = e0.y == e1.y;
    if seg_h && edge_h {
        if (a.y - e0.y).abs() > EDGE_HUG_DISTANCE {
            return false;
        }
        let lo = a.x.min(b.x).max(e0.x.min(e1.x));
        let hi = a.x.max(b.x).min(e0.x.max(e1.x));
        hi - lo > EDGE_HUG_LENGTH
    } else if seg_v && !edge_h {
        if (a.x - e0.x).abs() > EDGE_HUG_DISTANCE {
            return false;
        }
        let lo = a.y.min(b.y).max(e0.y.min(e1.y));
        let hi = a.y.max(b.y).min(e0.y.max(e1.y));
        hi - lo > EDGE_HUG_LENGTH
    } else {
        false
    }
}

/// Checks a candidate wire from board port `port` to component `target`.
///
/// Rules, reported in this order: (a) contact with an existing wire,
/// (b) clearance below [`WIRE_CLEARANCE`], (c) passing within the port-square
/// radius of any port other than the two endpoints, (d) entering a component
/// or board interior or a label box, (e) running parallel within
/// [`EDGE_HUG_DISTANCE`] of a board or component edge for more than
/// [`EDGE_HUG_LENGTH`].
pub fn validate_wire_candidate(
    candidate: &Polyline,
    port: &Port,
    target: &Component,
    ctx: &RoutingContext<'_>,
) -> Result<(), Violation> {
    for w in ctx.wires {
        if !segment_intersections(candidate, &w.path).is_empty() {
            return Err(Violation::Collision);
        }
    }
    for w in ctx.wires {
        if min_clearance(candidate, &w.path) < WIRE_CLEARANCE {
            return Err(Violation::Clearance);
        }
    }

    let radius = port_radius(ctx.board.port_size);
    let foreign_board = ctx
        .board
        .ports
        .iter()
        .filter(|p| p.number != port.number)
        .map(|p| p.center);
    let foreign_components = ctx
        .components
        .iter()
        .filter(|c| c.label != target.label)
        .map(|c| c.port);
    for c in foreign_board.chain(foreign_components) {
        if candidate.distance_to_point(c) < radius {
            return Err(Violation::ForeignPort);
        }
    }

    for c in ctx.components {
        if c.rect.polyline_enters_interior(candidate) {
            return Err(Violation::Interior);
        }
    }
    match trim_port_stub(candidate, &ctx.board.rect, port.side) {
        None => return Err(Violation::Interior),
        Some(rest) => {
            if rest.len() >= 2 {
                let trimmed = Polyline::new(rest).map_err(|_| Violation::Interior)?;
                if ctx.board.rect.polyline_enters_interior(&trimmed) {
                    return Err(Violation::Interior);
                }
            }
        }
    }
    for p in &ctx.board.ports {
        if p.number != port.number
            && ctx.board.label_box(p).polyline_enters_interior(candidate)
        {
            return Err(Violation::Interior);
        }
    }

    let rect_edges = core::iter::once(ctx.board.rect)
        .chain(ctx.components.iter().map(|c| c.rect))
        .flat_map(|r| r.edges());
    for edge in rect_edges {
        if candidate.segments().any(|(a, b)| hugs_edge(a, b, edge)) {
            return Err(Violation::HugsEdge);
        }
    }
    Ok(())
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Option<f64> {
    if hi <= lo {
        None
    } else {
        Some(lo + rng.gen::<f64>() * (hi - lo))
    }
}

/// Range for a corner coordinate lying outside `side` of a rectangle.
fn outward_range(rect: &Rect, side: Side) -> (f64, f64) {
    let max = CANVAS as f64 - CANVAS_MARGIN;
    match side {
        Side::Top => (CANVAS_MARGIN, rect.y0 - ROUTE_STANDOFF),
        Side::Bottom => (rect.y1 + ROUTE_STANDOFF, max),
        Side::Left => (CANVAS_MARGIN, rect.x0 - ROUTE_STANDOFF),
        Side::Right => (rect.x1 + ROUTE_STANDOFF, max),
    }
}

fn intersect(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.max(b.0), a.1.min(b.1))
}

/// Draws one axis-aligned candidate with 2–4 segments. The first segment
/// leaves along the port's axis, the last arrives along the component side's
/// normal.
fn draw_candidate<R: Rng + ?Sized>(
    port: &Port,
    target: &Component,
    board: &Rect,
    rng: &mut R,
) -> Option<Polyline> {
    let p = port.center;
    let q = target.port;
    let exit_range = outward_range(board, port.side);
    let entry_range = outward_range(&target.rect, target.side);
    let lo = CANVAS_MARGIN;
    let hi = CANVAS as f64 - CANVAS_MARGIN;
    let pts: Vec<Point2D> = match (port.side.vertical(), target.side.vertical()) {
        (true, true) => {
            let (a, b) = intersect(exit_range, entry_range);
            let y = uniform(rng, a, b)?;
            if p.x == q.x {
                alloc::vec![p, q]
            } else {
                alloc::vec![p, Point2D::new(p.x, y), Point2D::new(q.x, y), q]
            }
        }
        (false, false) => {
            let (a, b) = intersect(exit_range, entry_range);
            let x = uniform(rng, a, b)?;
            if p.y == q.y {
                alloc::vec![p, q]
            } else {
                alloc::vec![p, Point2D::new(x, p.y), Point2D::new(x, q.y), q]
            }
        }
        (true, false) => {
            if rng.gen::<f64>() < 0.3 {
                alloc::vec![p, Point2D::new(p.x, q.y), q]
            } else {
                let y = uniform(rng, exit_range.0, exit_range.1)?;
                let x = uniform(rng, entry_range.0.max(lo), entry_range.1.min(hi))?;
                alloc::vec![p, Point2D::new(p.x, y), Point2D::new(x, y), Point2D::new(x, q.y), q]
            }
        }
        (false, true) => {
            if rng.gen::<f64>() < 0.3 {
                alloc::vec![p, Point2D::new(q.x, p.y), q]
            } else {
                let x = uniform(rng, exit_range.0, exit_range.1)?;
                let y = uniform(rng, entry_range.0.max(lo), entry_range.1.min(hi))?;
                alloc::vec![p, Point2D::new(x, p.y), Point2D::new(x, y), Point2D::new(q.x, y), q]
            }
        }
    };
    let line = Polyline::simplified(&pts).ok()?;
    (1..=4).contains(&line.segment_count()).then_some(line)
}

/// Routes one wire by rejection sampling up to [`ROUTE_ATTEMPTS`] candidates.
pub fn route_wire<R: Rng + ?Sized>(
    port: &Port,
    target: &Component,
    ctx: &RoutingContext<'_>,
    rng: &mut R,
) -> Result<Polyline, Rejection> {
    let mut last_reason = None;
    for _ in 0..ROUTE_ATTEMPTS {
        let Some(candidate) = draw_candidate(port, target, &ctx.board.rect, rng) else {
            continue;
        };
        match validate_wire_candidate(&candidate, port, target, ctx) {
            Ok(()) => return Ok(candidate),
            Err(v) => last_reason = Some(v),
        }
    }
    Err(Rejection {
        attempts: ROUTE_ATTEMPTS,
        last_reason,
    })
}

fn port_slots() -> Vec<(Point2D, Side)> {
    let b = BOARD;
    let mut slots = Vec::new();
    let top_xs = (0..6).map(|i| b.x0 + 55.0 + i as f64 * 54.0);
    for x in top_xs.clone() {
        slots.push((Point2D::new(x, b.y0 + PORT_INSET), Side::Top));
    }
    for i in 0..4 {
        slots.push((Point2D::new(b.x1 - PORT_INSET, b.y0 + 55.0 + i as f64 * 50.0), Side::Right));
    }
    for x in top_xs.rev() {
        slots.push((Point2D::new(x, b.y1 - PORT_INSET), Side::Bottom));
    }
    for i in (0..4).rev() {
        slots.push((Point2D::new(b.x0 + PORT_INSET, b.y0 + 55.0 + i as f64 * 50.0), Side::Left));
    }
    slots
}

fn facing_side(rect: &Rect, board: &Rect) -> Side {
    // Pick the side with the largest clearance toward the board.
    let candidates = [
        (board.y0 - rect.y1, Side::Bottom),
        (rect.y0 - board.y1, Side::Top),
        (board.x0 - rect.x1, Side::Right),
        (rect.x0 - board.x1, Side::Left),
    ];
    candidates
        .iter()
        .copied()
        .fold((f64::NEG_INFINITY, Side::Bottom), |best, c| if c.0 > best.0 { c } else { best })
        .1
}

fn side_midpoint(rect: &Rect, side: Side) -> Point2D {
    let c = rect.center();
    match side {
        Side::Top => Point2D::new(c.x, rect.y0),
        Side::Bottom => Point2D::new(c.x, rect.y1),
        Side::Left => Point2D::new(rect.x0, c.y),
        Side::Right => Point2D::new(rect.x1, c.y),
    }
}

fn polar_angle(p: Point2D, c: Point2D) -> f64 {
    libm::atan2(p.y - c.y, p.x - c.x)
}

struct Layout {
    board: Breadboard,
    components: Vec<Component>,
    /// (port number, component index) per wire.
    pairs: Vec<(u32, usize)>,
}

fn draw_layout<R: Rng + ?Sized>(n_wires: usize, rng: &mut R) -> Option<Layout> {
    let slots = port_slots();
    let n_ports = n_wires + rng.gen_range(2..=3usize);
    let mut chosen: Vec<usize> = rand::seq::index::sample(rng, slots.len(), n_ports).into_vec();
    chosen.sort_unstable();
    let ports: Vec<Port> = chosen
        .iter()
        .enumerate()
        .map(|(i, &s)| Port {
            number: i as u32 + 1,
            center: slots[s].0,
            side: slots[s].1,
        })
        .collect();
    let board = Breadboard {
        rect: BOARD,
        ports,
        port_size: PORT_SIZE,
    };

    let mut rects: Vec<Rect> = Vec::with_capacity(n_wires);
    let max = CANVAS as f64 - CANVAS_MARGIN;
    let mut tries = 0;
    while rects.len() < n_wires {
        tries += 1;
        if tries > 2000 {
            return None;
        }
        let x = CANVAS_MARGIN + rng.gen::<f64>() * (max - CANVAS_MARGIN - COMPONENT_W);
        let y = CANVAS_MARGIN + rng.gen::<f64>() * (max - CANVAS_MARGIN - COMPONENT_H);
        let r = Rect::new(x, y, x + COMPONENT_W, y + COMPONENT_H);
        if r.gap(&BOARD) < PLACEMENT_BOARD_GAP {
            continue;
        }
        if rects.iter().any(|o| o.gap(&r) < PLACEMENT_COMPONENT_GAP) {
            continue;
        }
        rects.push(r);
    }

    // Match the cyclic order of wired ports and components around the board
    // so that a planar routing exists.
    let center = BOARD.center();
    let mut wired: Vec<usize> =
        rand::seq::index::sample(rng, board.ports.len(), n_wires).into_vec();
    wired.sort_by(|&a, &b| {
        polar_angle(board.ports[a].center, center).total_cmp(&polar_angle(board.ports[b].center, center))
    });
    rects.sort_by(|a, b| polar_angle(a.center(), center).total_cmp(&polar_angle(b.center(), center)));
    let cost = |shift: usize| -> f64 {
        (0..n_wires)
            .map(|i| board.ports[wired[i]].center.dist(rects[(i + shift) % n_wires].center()))
            .sum()
    };
    let best_shift = (0..n_wires)
        .min_by(|&a, &b| cost(a).total_cmp(&cost(b)))
        .unwrap_or(0);

    let mut labels: Vec<usize> = (1..=n_wires).collect();
    labels.shuffle(rng);
    let components: Vec<Component> = rects
        .iter()
        .zip(labels.iter())
        .map(|(r, &l)| {
            let side = facing_side(r, &BOARD);
            Component {
                label: format!("C{l}"),
                rect: *r,
                port: side_midpoint(r, side),
                side,
            }
        })
        .collect();
    let pairs = (0..n_wires)
        .map(|i| (board.ports[wired[i]].number, (i + best_shift) % n_wires))
        .collect();
    Some(Layout {
        board,
        components,
        pairs,
    })
}

/// Arc positions (integer-pixel lattice) where a dot may sit on `wire`.
fn allowed_dot_arcs(wire: &Polyline, idx: usize, wires: &[Polyline], scene_rects: &[Rect], foreign_ports: &[Point2D]) -> Vec<f64> {
    let len = wire.arc_length();
    let corners = wire.corner_arcs();
    let mut out = Vec::new();
    let mut s = DOT_END_MARGIN;
    while s <= len - DOT_END_MARGIN {
        let near_corner = corners.iter().any(|c| (s - c).abs() < DOT_CORNER_MARGIN);
        if !near_corner {
            let p = wire.point_at_arc(s).expect("inside wire");
            let clear_wires = wires
                .iter()
                .enumerate()
                .all(|(j, w)| j == idx || w.distance_to_point(p) >= DOT_KEEPOUT_WIRE);
            let clear_rects = scene_rects.iter().all(|r| {
                let inflated = r.inflate(DOT_KEEPOUT_RECT);
                !inflated.contains_strict(p)
            });
            let clear_ports = foreign_ports.iter().all(|c| c.dist(p) >= DOT_KEEPOUT_WIRE);
            if clear_wires && clear_rects && clear_ports {
                out.push(s);
            }
        }
        s += 1.0;
    }
    out
}

fn draw_colors<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Color> {
    let mut out: Vec<Color> = Vec::with_capacity(n);
    for _ in 0..n {
        let choices: Vec<Color> = CIRCUIT_PALETTE
            .iter()
            .copied()
            .filter(|c| out.last() != Some(c))
            .collect();
        out.push(*choices.choose(rng).expect("palette has more than one color"));
    }
    out
}

fn try_layout(seed: u64, layout_seed: u64, n_wires: usize) -> Option<CircuitScene> {
    let mut rng = rng_from_seed(layout_seed);
    let layout = draw_layout(n_wires, &mut rng)?;
    let mut wires: Vec<WireRoute> = Vec::with_capacity(n_wires);
    for (id, &(port_number, comp_idx)) in layout.pairs.iter().enumerate() {
        let port = layout.board.port(port_number).expect("paired port exists");
        let target = &layout.components[comp_idx];
        let ctx = RoutingContext {
            board: &layout.board,
            components: &layout.components,
            wires: &wires,
        };
        let path = route_wire(port, target, &ctx, &mut rng).ok()?;
        wires.push(WireRoute {
            id: id as u32 + 1,
            port_number,
            component_label: target.label.clone(),
            path,
            dots: Vec::new(),
        });
    }

    let paths: Vec<Polyline> = wires.iter().map(|w| w.path.clone()).collect();
    let mut rects: Vec<Rect> = layout.components.iter().map(|c| c.rect).collect();
    rects.push(layout.board.rect);
    for (i, wire) in wires.iter_mut().enumerate() {
        let own_component = layout
            .components
            .iter()
            .find(|c| c.label == wire.component_label)
            .map(|c| c.port);
        let foreign_ports: Vec<Point2D> = layout
            .board
            .ports
            .iter()
            .filter(|p| p.number != wire.port_number)
            .map(|p| p.center)
            .chain(layout.components.iter().map(|c| c.port).filter(|p| Some(*p) != own_component))
            .collect();
        let allowed = allowed_dot_arcs(&wire.path, i, &paths, &rects, &foreign_ports);
        if allowed.is_empty() {
            return None;
        }
        let measure = allowed.len() as f64;
        let n = libm::round(measure / DOT_PITCH).max(1.0) as usize;
        let colors = draw_colors(n, &mut rng);
        wire.dots = (0..n)
            .map(|k| {
                let idx = libm::floor((k as f64 + 0.5) * measure / n as f64) as usize;
                let s = allowed[idx.min(allowed.len() - 1)];
                WireDot {
                    color: colors[k],
                    arc_s: s,
                    position: wire.path.point_at_arc(s).expect("inside wire"),
                }
            })
            .collect();
    }

    Some(CircuitScene {
        board: layout.board,
        components: layout.components,
        wires,
        seed,
        layout_seed,
        width: CANVAS,
        height: CANVAS,
    })
}

/// Generates a crossing-free circuit scene with `n_wires` queried wires.
/// Deterministic in `(seed, n_wires)`.
pub fn gen_circuit(seed: u64, n_wires: usize) -> Result<CircuitScene, CircuitError> {
    if !(MIN_WIRES..=MAX_WIRES).contains(&n_wires) {
        return Err(CircuitError::WireCount(n_wires));
    }
    for attempt in 0..LAYOUT_RETRIES {
        let layout_seed = if attempt == 0 {
            seed
        } else {
            derive_seed(seed, attempt as u64)
        };
        if let Some(scene) = try_layout(seed, layout_seed, n_wires) {
            return Ok(scene);
        }
    }
    Err(CircuitError::LayoutInfeasible(LAYOUT_RETRIES))
}

/// Wires per image for the default 15-image build (107 wires in total).
pub const DEFAULT_WIRE_SCHEDULE: [usize; 15] = [7, 6, 8, 7, 9, 5, 7, 8, 6, 7, 8, 7, 6, 9, 7];
