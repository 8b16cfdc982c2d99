//! File formats, dataset generation, model harness and reports on top of
//! `traceforge-core`.

pub mod generate;
pub mod harness;
pub mod io;
pub mod pipeline;
pub mod report;
