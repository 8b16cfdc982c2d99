//! Swirl scenes: one Archimedean spiral carrying eight uniquely colored dots,
//! with `S` at the inner end and `E` at the outer end.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{
    place_dot_positions, Direction, DotPlacement, Point2D, Polyline, SpiralSpec, DEFAULT_DTHETA,
};
use crate::palette::{Color, SWIRL_PALETTE};
use crate::rng::rng_from_seed;

pub const CANVAS: u32 = 1024;
pub const INNER_RADIUS: f64 = 40.0;
pub const OUTER_RADIUS: f64 = 420.0;
pub const DOT_COUNT: usize = 8;
/// Distance from a path endpoint to its label anchor, along the radial ray.
pub const LABEL_OFFSET: f64 = 24.0;

pub const DOT_PLACEMENT: DotPlacement = DotPlacement {
    count: DOT_COUNT,
    end_margin_frac: 0.05,
    min_sep_frac: 0.06,
    jitter_frac: 0.35,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LevelName {
    Low,
    Moderate,
    High,
}

impl LevelName {
    pub const ALL: [LevelName; 3] = [LevelName::Low, LevelName::Moderate, LevelName::High];

    pub fn as_str(self) -> &'static str {
        match self {
            LevelName::Low => "Low",
            LevelName::Moderate => "Moderate",
            LevelName::High => "High",
        }
    }
}

impl fmt::Display for LevelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown swirl level {0:?} (expected Low, Moderate or High)")]
pub struct UnknownLevel(pub String);

impl FromStr for LevelName {
    type Err = UnknownLevel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LevelName::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownLevel(s.into()))
    }
}

/// Rotation-density level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwirlLevel {
    pub name: LevelName,
    pub turns: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl SwirlLevel {
    /// Radial growth per radian.
    pub fn growth(&self) -> f64 {
        (self.outer_radius - self.inner_radius) / (core::f64::consts::TAU * self.turns)
    }

    /// Radial distance between neighbouring turns.
    pub fn turn_gap(&self) -> f64 {
        (self.outer_radius - self.inner_radius) / self.turns
    }
}

pub fn level_params(name: LevelName) -> SwirlLevel {
    let turns = match name {
        LevelName::Low => 3.0,
        LevelName::Moderate => 6.0,
        LevelName::High => 10.0,
    };
    SwirlLevel {
        name,
        turns,
        inner_radius: INNER_RADIUS,
        outer_radius: OUTER_RADIUS,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwirlDot {
    pub color: Color,
    pub arc_s: f64,
    pub theta: f64,
    pub turn_index: i64,
    pub position: Point2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwirlScene {
    pub level: SwirlLevel,
    pub spec: SpiralSpec,
    pub path: Polyline,
    /// Spiral parameter of every path vertex.
    pub thetas: Vec<f64>,
    /// Dots in S→E order.
    pub dots: Vec<SwirlDot>,
    /// Inner path endpoint (arc 0).
    pub start: Point2D,
    /// Outer path endpoint.
    pub end: Point2D,
    pub start_label: Point2D,
    pub end_label: Point2D,
    pub seed: u64,
    pub width: u32,
    pub height: u32,
}

impl SwirlScene {
    pub fn ground_truth(&self) -> Vec<Color> {
        self.dots.iter().map(|d| d.color).collect()
    }

    /// Spiral parameter at arc position `s`.
    pub fn theta_at_arc(&self, s: f64) -> f64 {
        let (seg, t) = self.path.locate(s).expect("arc position inside the path");
        self.thetas[seg] + t * (self.thetas[seg + 1] - self.thetas[seg])
    }
}

fn radial_point(center: Point2D, through: Point2D, radius: f64) -> Point2D {
    let d = through.dist(center);
    Point2D::new(
        center.x + (through.x - center.x) / d * radius,
        center.y + (through.y - center.y) / d * radius,
    )
}

/// Generates one swirl scene. Deterministic in `(level, seed)`.
///
/// RNG draw order: direction, dot jitter, color permutation.
pub fn gen_swirl(level: SwirlLevel, seed: u64) -> SwirlScene {
    let mut rng = rng_from_seed(seed);
    let direction = if rng.gen::<bool>() {
        Direction::Clockwise
    } else {
        Direction::Counterclockwise
    };
    let center = Point2D::new(CANVAS as f64 / 2.0, CANVAS as f64 / 2.0);
    let spec = SpiralSpec {
        center,
        r0: level.inner_radius,
        growth: level.growth(),
        turns: level.turns,
        direction,
    };
    let thetas = spec.theta_samples(DEFAULT_DTHETA);
    let path = Polyline::new(thetas.iter().map(|&t| spec.point_at(t)).collect())
        .expect("spiral samples are distinct");

    let arcs = place_dot_positions(&path, DOT_PLACEMENT, &mut rng)
        .expect("swirl dot placement parameters are feasible");
    let mut colors = SWIRL_PALETTE;
    colors.shuffle(&mut rng);

    let mut scene = SwirlScene {
        level,
        spec,
        start: path.first(),
        end: path.last(),
        start_label: radial_point(center, path.first(), level.inner_radius - LABEL_OFFSET),
        end_label: radial_point(center, path.last(), level.outer_radius + LABEL_OFFSET),
        path,
        thetas,
        dots: Vec::with_capacity(DOT_COUNT),
        seed,
        width: CANVAS,
        height: CANVAS,
    };
    for (&s, &color) in arcs.iter().zip(colors.iter()) {
        let theta = scene.theta_at_arc(s);
        scene.dots.push(SwirlDot {
            color,
            arc_s: s,
            theta,
            turn_index: libm::floor(theta / core::f64::consts::TAU) as i64,
            position: scene.path.point_at_arc(s).expect("arc inside path"),
        });
    }
    scene
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_gaps() {
        assert!((level_params(LevelName::Low).turn_gap() - 380.0 / 3.0).abs() < 1e-12);
        assert!((level_params(LevelName::Moderate).turn_gap() - 380.0 / 6.0).abs() < 1e-12);
        assert_eq!(level_params(LevelName::High).turn_gap(), 38.0);
    }

    #[test]
    fn level_names_parse() {
        assert_eq!("moderate".parse::<LevelName>(), Ok(LevelName::Moderate));
        assert!("extreme".parse::<LevelName>().is_err());
    }

    #[test]
    fn scene_is_deterministic() {
        let lvl = level_params(LevelName::High);
        assert_eq!(gen_swirl(lvl, 42), gen_swirl(lvl, 42));
        assert_ne!(gen_swirl(lvl, 42).dots, gen_swirl(lvl, 43).dots);
    }

    #[test]
    fn labels_sit_off_the_path() {
        for name in LevelName::ALL {
            let s = gen_swirl(level_params(name), 7);
            assert!(s.path.distance_to_point(s.start_label) >= 18.0);
            assert!(s.path.distance_to_point(s.end_label) >= 18.0);
            assert_eq!(s.start, s.path.first());
        }
    }

    #[test]
    fn dot_theta_matches_radius() {
        let s = gen_swirl(level_params(LevelName::Moderate), 3);
        for d in &s.dots {
            let r = d.position.dist(s.spec.center);
            assert!((r - s.spec.radius_at(d.theta)).abs() < 0.01);
        }
    }
}
