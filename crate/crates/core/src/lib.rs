//! Optimal grouping of data-pipeline operators onto container images.
//!
//! A pipeline's operators carry tags (runtime requirements); images carry
//! the tags they support. Grouping operators onto images is encoded as a
//! planning task with state-dependent action costs and solved optimally.
//! A deterministic deployment simulator then scores each grouping's setup,
//! execution and total time.

pub mod bench;
pub mod error;
pub mod exec;
pub mod model;
pub mod pddl;
pub mod planning;
pub mod simulator;
pub mod strategies;
pub mod workload;

pub use error::{Error, Result};
pub use model::{
    satisfies, tags, Cost, Edge, EdgeCounts, Group, GroupingConfig, Image, ImageCatalog, Instance,
    Operator, Pipeline, StrategyWeights, Tag, ValidationReport, Violation,
};
