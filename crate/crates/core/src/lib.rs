//! Design-space tooling for efficient single-shot face detectors.
//!
//! The crate covers four loosely coupled pieces:
//!
//! * [`arch`] and [`flops`]: a backbone / neck / head architecture descriptor
//!   with analytic multiply-add and parameter accounting.
//! * [`search`] and [`pipeline`]: flop-budgeted random sampling of
//!   architectures and the two-step (backbone first, then whole detector)
//!   computation-redistribution search driven by a pluggable evaluator.
//! * [`bootstrap`]: empirical-bootstrap estimation of the computation-ratio
//!   interval in which the best-scoring models fall.
//! * [`widerface`], [`imgsize`] and [`anchors`]: WIDER FACE ingestion and a
//!   geometric simulator for square-crop augmentation, anchor tiling and ATSS
//!   positive assignment.

pub mod anchors;
pub mod arch;
pub mod bootstrap;
pub mod config;
pub mod error;
pub mod flops;
pub mod imgsize;
pub mod pipeline;
pub mod reference;
pub mod rng;
pub mod search;
pub mod svg;
pub mod synthetic;
pub mod widerface;

pub use error::{Error, Result};
