//! Construction and verification of `(1̄, t)`-locating arrays.
//!
//! A locating array is a test suite for combinatorial interaction testing in
//! which every `t`-way interaction is covered by at least one test, and no two
//! interactions are covered by exactly the same set of tests. When at most one
//! `t`-way interaction is faulty, the set of failing tests then identifies it.
//!
//! The crate is organised around the pipeline that builds such arrays:
//!
//! - [`model`]: SUT models, arrays, interactions and the covering relation.
//! - [`mod@verify`]: a definition-literal checker, used as an independent oracle.
//! - [`cost`]: the incremental coverage index driving the annealer's cost.
//! - [`anneal`]: simulated annealing for a fixed number of rows.
//! - [`search`]: size bounds, binary search over the row count, and the
//!   two-phase construction driver.
//!
//! ```
//! use locaray::{construct, verify, AnnealParams, SearchBudget, SutModel};
//!
//! # fn main() -> locaray::Result<()> {
//! let model: SutModel = "2^13 4^5".parse()?;
//! let result = construct(&model, 2, &AnnealParams::default(), &SearchBudget::default())?;
//! let array = result.array.expect("found within the timeout");
//! assert!(verify(&array, 2)?.is_locating_1bar);
//! # Ok(())
//! # }
//! ```

pub mod anneal;
#[cfg(feature = "cli")]
pub mod cli;
pub mod cost;
mod error;
pub mod model;
pub mod search;
pub mod verify;

pub use anneal::{AnnealParams, Deadline, SaOutcome, Strategy};
pub use cost::{CoverageIndex, Move};
pub use error::{Error, Result};
pub use model::{
    enumerate_interactions, parse_model, random_array, ArrayFile, Interaction, InteractionCatalog, RowSet,
    SutModel, TestArray,
};
pub use search::{construct, initial_bounds, tang_lower_bound, SearchBudget, SearchResult};
pub use verify::{locate_fault, verify, VerifyReport};
