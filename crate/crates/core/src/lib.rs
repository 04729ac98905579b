//! Batch analytics over encoded citizen surveys: top-k legitimacy curves and
//! knee selection, relocation quality metrics, and a quality-of-life
//! classifier with minority oversampling and significance testing.

pub mod error;
pub mod legitimacy;
pub mod qol;
pub mod relocation;
pub mod report;
pub mod rng;
pub mod survey;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
