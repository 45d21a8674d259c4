// SPDX-License-Identifier: Apache-2.0

//! Proper k-degenerate distance graphs, their configuration spheres, and
//! numerical tools for finding scaled copies of them in discretized subsets
//! of the unit cube: a Monte Carlo counting function, the `U^1(L)`
//! uniformity norm, energy-increment localization, and grid search.

// `!(x >= 0.0)` style checks are used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counting;
pub mod geometry;
pub mod graph;
pub mod grid;
mod linalg;
pub mod localization;
pub mod mc;
pub mod search;

pub use counting::{CountingEstimate, CutoffProfile, McParams};
pub use geometry::{Embedding, SphereSection};
pub use graph::{DegeneracyOrdering, DistanceGraph, Family};
pub use grid::{GridFunction, GridSet, SetDescriptor};
pub use localization::{LocalizationResult, ScaleChain};
pub use search::{CopyQuery, ScanReport};
