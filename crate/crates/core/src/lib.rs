//! Learning-to-rank distillation with privileged features.
//!
//! The crate is organized around a single workflow: ingest a ranking dataset,
//! derive binary labels from graded relevance, split feature columns into a
//! regular set (available at serving time) and a privileged set (training
//! only), train teacher models that may consume privileged columns, and
//! distill students that consume regular columns only. A separate module
//! reproduces the linear-regression analysis that predicts when the two-stage
//! scheme beats plain least squares.
//!
//! Modules:
//!
//! - [`dataset`]: parsing, transforms, label generation, feature splits,
//!   synthetic fixtures.
//! - [`metrics`]: rank-based evaluation (DCG/NDCG and dataset means).
//! - [`losses`]: pointwise and pairwise ranking losses plus the blended
//!   distillation objective.
//! - [`model`]: a small fully connected scorer with manual backprop and an
//!   Adam optimizer with decoupled weight decay.
//! - [`pipelines`]: end-to-end training strategies (baseline, teachers,
//!   distilled students, pretrain/finetune, imputation checks, ablation
//!   sweeps).
//! - [`lintheory`]: closed-form risk formulas for the linear model and Monte
//!   Carlo experiments that verify them.

pub mod dataset;
pub mod error;
pub mod lintheory;
pub mod losses;
pub mod metrics;
pub mod model;
pub mod numeric;
pub mod pipelines;
pub mod rng;

pub use error::{Error, Result};
