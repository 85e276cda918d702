//! Constructive machinery for realizing noncompact surfaces as leaves of
//! foliations glued from two foliated blocks.
//!
//! The pipeline runs in four layers:
//!
//! - [`tree_codec`]: finite automata presenting colored subtrees of the
//!   binary tree, their unrollings, the end conditions, and branch
//!   decompositions.
//! - [`surface_assembly`]: finite surface complexes built either from tree
//!   vertex pieces or from two families of planar pieces glued by a boundary
//!   bijection, plus the scheduler producing that bijection.
//! - [`end_space`]: finite-resolution classification of codings.
//! - [`circle_diffeo`] and [`block_gluing`]: the smooth circle map carrying
//!   dense orbit families onto each other according to the bijection, and the
//!   leaf reconstruction of the glued model.

pub mod block_gluing;
pub mod circle_diffeo;
pub mod corpus;
pub mod end_space;
mod error;
pub mod surface_assembly;
pub mod tree_codec;

pub use error::{Error, Result};
