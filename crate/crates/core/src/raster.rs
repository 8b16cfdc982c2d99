//! Deterministic rasterization of scenes.
//!
//! Scenes are first lowered to a [`Drawing`] (an ordered display list) and
//! then rasterized with pixel-center coverage tests, no anti-aliasing.

use alloc::string::String;
use alloc::vec::Vec;

use crate::circuit::CircuitScene;
use crate::condition::{ConditionScene, MaskSpec};
use crate::font::{glyph, glyph_bit, text_size};
use crate::geom::{point_segment_distance, Point2D, Rect};
use crate::palette::{Rgb, BLACK, BOARD_GRAY, COMPONENT_FILL, WHITE};
use crate::swirl::SwirlScene;

pub const LINE_WIDTH: f64 = 3.0;
pub const DOT_RADIUS: f64 = 10.0;
pub const LABEL_SCALE: u32 = 3;
pub const PORT_NUMBER_SCALE: u32 = 2;
const BORDER: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanvasImage {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB.
    pub data: Vec<u8>,
}

impl CanvasImage {
    pub fn new(width: u32, height: u32) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(&WHITE);
        }
        Self { width, height, data }
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = self.offset(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        let i = self.offset(x, y);
        self.data[i..i + 3].copy_from_slice(&c);
    }

    /// Calls `f` for each pixel whose center lies in the float box, clipped.
    fn for_box(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, mut f: impl FnMut(Point2D) -> Option<Rgb>) {
        let lo = |v: f64, max: u32| libm::floor(v - 0.5).clamp(0.0, max as f64) as u32;
        let hi = |v: f64, max: u32| (libm::ceil(v - 0.5).max(-1.0) + 1.0).clamp(0.0, max as f64) as u32;
        for y in lo(y0, self.height)..hi(y1, self.height) {
            for x in lo(x0, self.width)..hi(x1, self.width) {
                if let Some(c) = f(Point2D::new(x as f64 + 0.5, y as f64 + 0.5)) {
                    self.set(x, y, c);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    FillRect { rect: Rect, color: Rgb },
    StrokeRect { rect: Rect, width: f64, color: Rgb },
    Path { points: Vec<Point2D>, width: f64, color: Rgb },
    /// Text centered on `center`.
    Text { text: String, center: Point2D, scale: u32, color: Rgb },
    Disc { center: Point2D, radius: f64, color: Rgb },
}

/// Ordered display list; later shapes paint over earlier ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Drawing {
    pub width: u32,
    pub height: u32,
    pub shapes: Vec<Shape>,
}

impl Drawing {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, shapes: Vec::new() }
    }

    pub fn push(&mut self, s: Shape) {
        self.shapes.push(s);
    }

    fn path(&mut self, points: &[Point2D]) {
        self.push(Shape::Path { points: points.to_vec(), width: LINE_WIDTH, color: BLACK });
    }

    fn label(&mut self, text: &str, center: Point2D, scale: u32) {
        self.push(Shape::Text { text: text.into(), center, scale, color: BLACK });
    }

    fn dot(&mut self, center: Point2D, color: Rgb) {
        self.push(Shape::Disc { center, radius: DOT_RADIUS, color });
    }

    pub fn render(&self) -> CanvasImage {
        let mut img = CanvasImage::new(self.width, self.height);
        for s in &self.shapes {
            draw_shape(&mut img, s);
        }
        img
    }
}

fn draw_shape(img: &mut CanvasImage, shape: &Shape) {
    match shape {
        Shape::FillRect { rect, color } => {
            img.for_box(rect.x0, rect.y0, rect.x1, rect.y1, |p| rect.contains(p).then_some(*color));
        }
        Shape::StrokeRect { rect, width, color } => {
            let inner = rect.inflate(-width);
            img.for_box(rect.x0, rect.y0, rect.x1, rect.y1, |p| {
                (rect.contains(p) && !inner.contains_strict(p)).then_some(*color)
            });
        }
        Shape::Path { points, width, color } => {
            let h = width / 2.0;
            for w in points.windows(2) {
                let (a, b) = (w[0], w[1]);
                img.for_box(
                    a.x.min(b.x) - h,
                    a.y.min(b.y) - h,
                    a.x.max(b.x) + h,
                    a.y.max(b.y) + h,
                    |p| (point_segment_distance(p, a, b) <= h).then_some(*color),
                );
            }
        }
        Shape::Text { text, center, scale, color } => {
            let (w, h) = text_size(text, *scale);
            let x0 = libm::round(center.x - w as f64 / 2.0) as i64;
            let y0 = libm::round(center.y - h as f64 / 2.0) as i64;
            let s = *scale as i64;
            for (i, ch) in text.chars().enumerate() {
                let Some(rows) = glyph(ch) else { continue };
                let gx0 = x0 + i as i64 * 6 * s;
                for gy in 0..7 {
                    for gx in 0..5 {
                        if !glyph_bit(&rows, gx, gy) {
                            continue;
                        }
                        for dy in 0..s {
                            for dx in 0..s {
                                let x = gx0 + gx as i64 * s + dx;
                                let y = y0 + gy as i64 * s + dy;
                                if x >= 0 && y >= 0 && x < img.width as i64 && y < img.height as i64 {
                                    img.set(x as u32, y as u32, *color);
                                }
                            }
                        }
                    }
                }
            }
        }
        Shape::Disc { center, radius, color } => {
            let r = *radius;
            img.for_box(center.x - r, center.y - r, center.x + r, center.y + r, |p| {
                (p.dist(*center) <= r).then_some(*color)
            });
        }
    }
}

pub fn swirl_drawing(scene: &SwirlScene) -> Drawing {
    let mut d = Drawing::new(scene.width, scene.height);
    d.path(scene.path.points());
    d.label("S", scene.start_label, LABEL_SCALE);
    d.label("E", scene.end_label, LABEL_SCALE);
    for dot in &scene.dots {
        d.dot(dot.position, dot.color.rgb());
    }
    d
}

pub fn circuit_drawing(scene: &CircuitScene) -> Drawing {
    let mut d = Drawing::new(scene.width, scene.height);
    d.push(Shape::FillRect { rect: scene.board.rect, color: BOARD_GRAY });
    for c in &scene.components {
        d.push(Shape::FillRect { rect: c.rect, color: COMPONENT_FILL });
        d.push(Shape::StrokeRect { rect: c.rect, width: BORDER, color: BLACK });
    }
    for w in &scene.wires {
        d.path(w.path.points());
    }
    let half = scene.board.port_size / 2.0;
    for p in &scene.board.ports {
        let sq = Rect::centered(p.center, 2.0 * half, 2.0 * half);
        d.push(Shape::FillRect { rect: sq, color: WHITE });
        d.push(Shape::StrokeRect { rect: sq, width: BORDER, color: BLACK });
    }
    for p in &scene.board.ports {
        d.label(&alloc::format!("{}", p.number), scene.board.label_box(p).center(), PORT_NUMBER_SCALE);
    }
    for c in &scene.components {
        d.label(&c.label, c.rect.center(), LABEL_SCALE);
    }
    for w in &scene.wires {
        for dot in &w.dots {
            d.dot(dot.position, dot.color.rgb());
        }
    }
    d
}

pub fn condition_drawing(scene: &ConditionScene) -> Drawing {
    let mut d = Drawing::new(scene.width, scene.height);
    for p in scene.paths() {
        d.path(p.points());
    }
    d.label("S", scene.start_label, LABEL_SCALE);
    for dot in scene.all_dots() {
        d.dot(dot.position, dot.color.rgb());
    }
    d
}

pub fn render_swirl(scene: &SwirlScene) -> CanvasImage {
    swirl_drawing(scene).render()
}

pub fn render_circuit(scene: &CircuitScene) -> CanvasImage {
    circuit_drawing(scene).render()
}

pub fn render_condition(scene: &ConditionScene) -> CanvasImage {
    condition_drawing(scene).render()
}

/// Fills the clipped 3×3-token footprint of `m`.
pub fn apply_mask(img: &CanvasImage, m: &MaskSpec) -> CanvasImage {
    let mut out = img.clone();
    let r = m.pixel_rect(img.width, img.height);
    for y in r.y0..r.y1 {
        for x in r.x0..r.x1 {
            out.set(x, y, m.fill);
        }
    }
    out
}
