//! MAP inference in discrete higher-order graphical models via linear
//! programming over the local marginal polytope.
//!
//! The pipeline: parse or build a [`model::Model`], normalize it with
//! [`model::Model::merge_to_frontier`], build one of the relaxations in
//! [`relaxation`], solve it exactly with the rational simplex in
//! [`lp_solver`], extract per-scope marginals, and decode an integral
//! assignment with [`decode::greedy_decode`]. The [`oracle`] module holds
//! the brute-force ground truth and the instance harness that measures
//! tightness of the relaxations and certifies every discrepancy.

pub mod decode;
pub mod deltadist;
pub mod formats;
pub mod hypersites;
pub mod lp_solver;
pub mod model;
pub mod oracle;
pub mod orthomarginal;
pub mod relaxation;
pub mod scalar;

pub use hypersites::{Hypersite, HypersiteSet};
pub use model::{Assignment, FactorTable, Model};
pub use orthomarginal::{DeltaMarginalSet, DenseFunction, PseudoMarginalSet};
pub use scalar::{Rat, Scalar};
