//! Finite surface complexes and the boundary-gluing scheduler.
//!
//! Two pipelines produce truncations of the same surface. The tree
//! pipeline glues one piece per vertex of a depth-`d` unrolling. The
//! schedule pipeline runs the inductive construction of a bijection between
//! boundary circles of two families of planar pieces (`▷` and `◁`) and
//! glues disks-with-holes accordingly. Planar pieces carry an outer circle
//! standing for the end of the plane, so raw boundary counts differ between
//! the pipelines; genus and component structure agree level by level.

mod assemble;
mod complex;
mod schedule;
mod surgery;
mod truncate;

use serde::{Deserialize, Serialize};

pub use assemble::{assemble_from_schedule, permute_boundaries, Truncation};
pub use complex::{CircleId, ComponentInvariants, GluedComplex, Piece, PieceKind, SurfaceInvariants};
pub use schedule::{
    schedule_gluing, schedule_gluing_with_cap, CaseTag, GluingSchedule, PieceOrigin, ScheduleEntry, SigmaPiece,
};
pub use surgery::{attach_handles, handle_surgery, puncture};
pub use truncate::truncate_pieces;

use crate::tree_codec::{unroll_with_cap, TreeAutomaton, DEFAULT_DEPTH_CAP};
use crate::Result;

/// Both pipelines evaluated at one depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub depth: usize,
    pub tree: SurfaceInvariants,
    pub assembly: SurfaceInvariants,
    pub matches: bool,
}

/// Component signature compared across pipelines: genus and χ after
/// capping boundary circles.
fn signature(inv: &SurfaceInvariants) -> Vec<(u64, i64)> {
    let mut sig: Vec<(u64, i64)> = inv.components.iter().map(|c| (c.genus, c.capped_euler())).collect();
    sig.sort_unstable();
    sig
}

pub fn oracle_check(aut: &TreeAutomaton, depth: usize) -> Result<OracleComparison> {
    oracle_check_with_cap(aut, depth, DEFAULT_DEPTH_CAP)
}

pub fn oracle_check_with_cap(aut: &TreeAutomaton, depth: usize, cap: usize) -> Result<OracleComparison> {
    let sched = schedule_gluing_with_cap(aut, depth, cap)?;
    let assembly = assemble_from_schedule(&sched, Truncation::Watermark)?.invariants()?;
    let tree = truncate_pieces(&unroll_with_cap(aut, depth, cap)?).invariants()?;
    let matches = tree.component_count == assembly.component_count && signature(&tree) == signature(&assembly);
    Ok(OracleComparison {
        depth,
        tree,
        assembly,
        matches,
    })
}
