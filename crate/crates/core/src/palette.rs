//! Dot colors and their fixed RGB values.
//!
//! `Purple` and `Violet` share one RGB value but stay distinct answer tokens:
//! swirl and condition scenes use purple, circuit scenes use violet.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Orange,
    Yellow,
    Green,
    Blue,
    Purple,
    Violet,
    Pink,
    Brown,
}

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];
pub const BLACK: Rgb = [0, 0, 0];
pub const BOARD_GRAY: Rgb = [190, 190, 190];
pub const COMPONENT_FILL: Rgb = [235, 235, 235];
pub const MASK_GRAY: Rgb = [128, 128, 128];

pub const SWIRL_PALETTE: [Color; 8] = [
    Color::Red,
    Color::Orange,
    Color::Yellow,
    Color::Green,
    Color::Blue,
    Color::Purple,
    Color::Pink,
    Color::Brown,
];

pub const CIRCUIT_PALETTE: [Color; 8] = [
    Color::Red,
    Color::Orange,
    Color::Yellow,
    Color::Green,
    Color::Blue,
    Color::Violet,
    Color::Pink,
    Color::Brown,
];

pub const ALL_COLORS: [Color; 9] = [
    Color::Red,
    Color::Orange,
    Color::Yellow,
    Color::Green,
    Color::Blue,
    Color::Purple,
    Color::Violet,
    Color::Pink,
    Color::Brown,
];

impl Color {
    pub const fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Orange => "orange",
            Color::Yellow => "yellow",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Purple => "purple",
            Color::Violet => "violet",
            Color::Pink => "pink",
            Color::Brown => "brown",
        }
    }

    pub const fn rgb(self) -> Rgb {
        match self {
            Color::Red => [220, 30, 30],
            Color::Orange => [245, 140, 20],
            Color::Yellow => [240, 210, 40],
            Color::Green => [40, 160, 60],
            Color::Blue => [40, 90, 220],
            Color::Purple | Color::Violet => [130, 60, 200],
            Color::Pink => [240, 120, 180],
            Color::Brown => [140, 90, 50],
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown color name")]
pub struct UnknownColor;

impl FromStr for Color {
    type Err = UnknownColor;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_COLORS
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or(UnknownColor)
    }
}
