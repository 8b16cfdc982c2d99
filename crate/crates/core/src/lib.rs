//! Procedural line-tracing benchmark core.
//!
//! Everything in this crate is a pure function of its inputs (including the
//! seed of any RNG stream passed in), so it builds without `std`. File
//! formats, HTTP and the CLI live in the `traceforge` companion crate.
//!
//! Module map:
//! - [`geom`]: polylines, spirals, intersection/clearance tests, dot placement
//! - [`swirl`], [`circuit`], [`condition`]: scene generators
//! - [`dataset`]: dataset plans and per-job realization
//! - [`raster`]: deterministic rasterizer and token-patch masks
//! - [`task`]: serializable task records and manifests
//! - [`prompt`]: prompt templates
//! - [`scoring`]: answer parsing, exact match, error taxonomy, aggregation
//! - [`probes`]: attention / representation selectivity margins
//! - [`textstats`]: keyword statistics over reasoning traces
//! - [`tracer`]: built-in oracle and greedy responders

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod circuit;
pub mod condition;
pub mod dataset;
pub mod font;
pub mod geom;
pub mod palette;
pub mod probes;
pub mod prompt;
pub mod raster;
pub mod rng;
pub mod scoring;
pub mod swirl;
pub mod task;
pub mod textstats;
pub mod tracer;

pub use geom::{Point2D, Polyline};
pub use palette::Color;
pub use rng::{rng_from_seed, SeededRng};
