//! Finite presentations of colored subtrees of the binary tree.
//!
//! A coding is a rooted subtree of the binary tree without dead ends together
//! with a vertex coloring in `{0, 1}`; color 1 marks a vertex whose piece
//! carries a handle. Infinite codings are presented by finite automata whose
//! unrolling from the start state is the tree.

mod analysis;
mod automaton;
mod branches;
mod ends;
mod parse;
mod unroll;

pub use analysis::{check_conditions, AutomatonAnalysis, ConditionReport, Count};
pub use automaton::{ChildLabel, Side, State, StateId, TreeAutomaton};
pub use branches::{decompose_branches, Branch, BranchDecomposition};
pub use ends::{end_summary, EndClassGroup, EndSummary};
pub(crate) use ends::level_state_counts;
pub use parse::{parse_document, parse_tree_spec, EndAnnotation, ExplicitTree, ExplicitVertex, TreeDocument};
pub use unroll::{unroll, unroll_with_cap, FiniteTree, TreeEdge, TreeVertex, DEFAULT_DEPTH_CAP};
