//! Stochastic shortest path problems with nonnegative costs.
//!
//! Computes the optimal cost `J*` and the optimal cost over proper policies
//! `Ĵ`, shows which of the two value iteration converges to from a given
//! start, and checks candidate solutions of Bellman's equation against the
//! function classes that control uniqueness.
//!
//! ```
//! use ssp_core::{bellman, fixtures, ValueFunction};
//!
//! let (model, _) = fixtures::cycle_fixture();
//! let opts = bellman::ViOptions::default();
//! let (from_zero, _) = bellman::value_iteration(&model, &ValueFunction::new(vec![0.0, 0.0]), &opts).unwrap();
//! let (from_five, _) = bellman::value_iteration(&model, &ValueFunction::new(vec![0.0, 5.0]), &opts).unwrap();
//! assert_eq!(from_zero[1], 0.0); // J*
//! assert_eq!(from_five[1], 1.0); // Ĵ
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bellman;
pub mod error;
pub mod ext;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod perturbation;
pub mod policy;
pub mod properness;
pub mod rollout;
pub mod structure;
pub mod truncate;
pub mod value;

pub use error::{Result, SspError};
pub use model::{Control, ModelBuilder, OutcomeBranch, SspModel, StateId, TERMINAL};
pub use policy::{Policy, StationaryPolicy};
pub use value::ValueFunction;
