//! Variable-precision rough set (VPRS) toolkit for grading braking severity in
//! near-crash driving events.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! - [`quantize`]: raw event records to discrete attribute levels and risk labels.
//! - [`table`]: decision tables and indiscernibility partitions.
//! - [`vprs`]: β-approximations, classification quality, admissible-β bound.
//! - [`reduct`]: exhaustive and greedy β-reduct search.
//! - [`entropy`]: conditional entropy, attribute significance and weights.
//! - [`classifier`]: belief-rule extraction and weighted-similarity classification.
//! - [`kinematics`]: safety distance, TTC and the TTC-threshold baseline.
//! - [`synth`]: seeded synthetic event generator with planted structure.
//! - [`eval`]: confusion counts, ROC/AUC and comparison reports.
//! - [`pipeline`]: end-to-end training glue used by the CLI.

pub mod classifier;
pub mod entropy;
mod error;
pub mod eval;
pub mod kinematics;
pub mod pipeline;
pub mod quantize;
pub mod reduct;
pub mod synth;
pub mod table;
pub mod vprs;

pub use classifier::{MatchKind, Prediction, Rule, VprsModel};
pub use error::{Error, Result};
pub use quantize::{QuantizedRecord, RawEvent, RiskLevel};
pub use table::{DecisionTable, Degree, Level, Partition};
pub use vprs::Precision;
