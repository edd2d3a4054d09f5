//! Functional-equation toolkit for small-step quarter-plane walks.
//!
//! Exact kernel algebra and group-of-the-walk detection, big-integer walk
//! enumeration, explicit simple-walk integrals, queueing ergodicity criteria
//! with a CTMC oracle, and a solver for the splitting-tree CRA equation.

pub mod bvp;
pub mod cra;
pub mod enumeration;
pub mod error;
pub mod fit;
pub mod group;
pub mod kernel;
pub mod par;
pub mod poly;
pub mod quad;
pub mod queueing;
pub mod roots;
pub mod stepset;

pub use error::{FqwError, Result};
pub use stepset::{Mode, ModelClass, Step, WeightedStepSet};

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5eed_f00d_2024;
