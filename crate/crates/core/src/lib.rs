//! Design-flaw detection for object-oriented systems.
//!
//! The pipeline has four stages:
//!
//! 1. [`frontend`] turns MiniOO sources or a facts file into a [`model::DesignModel`],
//! 2. [`metrics`] computes design metrics (WMC, DIT, NOC, CBO, RFC, LCOM,
//!    TCC, ATFD, and the method-level CC/MLOC/NOPA helpers) over that model,
//! 3. [`strategy`] filters and combines metric results according to
//!    detection strategies written in the SOD rule language,
//! 4. [`catalog`] ships a registry of known design flaws with ready-to-run
//!    built-in strategies, and [`tuning`] calibrates strategy thresholds
//!    against a labeled corpus.

pub mod catalog;
pub mod frontend;
pub mod metrics;
pub mod model;
pub mod strategy;
pub mod tuning;

pub use model::{DesignModel, EntityId, EntityKind, Visibility};
