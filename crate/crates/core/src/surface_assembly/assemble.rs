use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::complex::{CircleId, GluedComplex, PieceKind};
use super::schedule::{GluingSchedule, ScheduleEntry};
use crate::tree_codec::Side;
use crate::{Error, Result};

/// How many holes each planar piece keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Exactly the consumed boundaries of each piece.
    Watermark,
    /// The same number of holes on every piece.
    Fixed(u32),
}

/// Builds the finite stage of the two-family quotient: one disk-with-holes
/// per piece, glued along the schedule's entries.
pub fn assemble_from_schedule(s: &GluingSchedule, truncation: Truncation) -> Result<GluedComplex> {
    let mut ids: BTreeSet<(Side, u32)> = s.pieces.iter().map(|p| (p.side, p.index)).collect();
    for e in &s.entries {
        ids.insert((Side::Right, e.lhs_piece));
        ids.insert((Side::Left, e.rhs_piece));
    }
    let mut c = GluedComplex::new();
    let mut holes: BTreeMap<(Side, u32), Vec<CircleId>> = BTreeMap::new();
    for &(side, index) in &ids {
        let label = format!("{}{index}", side.symbol());
        let h = match truncation {
            Truncation::Watermark => s.watermark(side, index),
            Truncation::Fixed(n) => {
                let w = s.watermark(side, index);
                if w > n {
                    return Err(Error::IndexOutOfRange { piece: label, index: w, holes: n });
                }
                n
            }
        };
        let (_, circles) = c.add_piece(label, PieceKind::SigmaTruncation, h as usize + 1);
        holes.insert((side, index), circles);
    }
    for e in &s.entries {
        let a = holes[&(Side::Right, e.lhs_piece)][e.lhs_index as usize];
        let b = holes[&(Side::Left, e.rhs_piece)][e.rhs_index as usize];
        c.glue(a, b)?;
    }
    Ok(c)
}

/// Renumbers the boundary components of every piece by `perm`, where
/// `perm[j - 1]` is the new index of boundary `j`. Indices beyond the
/// permutation are left alone.
pub fn permute_boundaries(s: &GluingSchedule, perm: &[u32]) -> Result<GluingSchedule> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        let ok = p >= 1 && (p as usize) <= perm.len() && !std::mem::replace(&mut seen[p as usize - 1], true);
        if !ok {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation")));
        }
    }
    let tau = |j: u32| perm.get(j as usize - 1).copied().unwrap_or(j);
    Ok(GluingSchedule {
        entries: s
            .entries
            .iter()
            .map(|e| ScheduleEntry {
                lhs_index: tau(e.lhs_index),
                rhs_index: tau(e.rhs_index),
                ..*e
            })
            .collect(),
        ..s.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_assembly::schedule_gluing;
    use crate::tree_codec::parse_tree_spec;

    #[test]
    fn empty_schedule_leaves_pieces_apart() {
        let s = GluingSchedule {
            depth: 0,
            pieces: Vec::new(),
            entries: Vec::new(),
        };
        let s = GluingSchedule::from_jsonl(&s.to_jsonl()).unwrap();
        let inv = assemble_from_schedule(&s, Truncation::Fixed(2)).unwrap().invariants().unwrap();
        assert_eq!(inv.component_count, 2);
        assert_eq!(inv.genus, 0);
    }

    #[test]
    fn loch_ness_schedule_genus() {
        let a = parse_tree_spec("state a color 1 children left a; start a").unwrap();
        let s = schedule_gluing(&a, 2).unwrap();
        let inv = assemble_from_schedule(&s, Truncation::Watermark).unwrap().invariants().unwrap();
        assert_eq!((inv.component_count, inv.genus, inv.boundary_count), (1, 3, 2));
    }

    #[test]
    fn fixed_truncation_too_small() {
        let a = parse_tree_spec("state a color 1 children left a; start a").unwrap();
        let s = schedule_gluing(&a, 4).unwrap();
        assert!(matches!(
            assemble_from_schedule(&s, Truncation::Fixed(3)),
            Err(Error::IndexOutOfRange { index: 6, holes: 3, .. })
        ));
    }

    #[test]
    fn reversal_keeps_invariants() {
        let a = parse_tree_spec("state a color 1 children left a right b; state b color 0 children only a; start a").unwrap();
        let s = schedule_gluing(&a, 4).unwrap();
        let n = s.pieces.iter().map(|p| s.watermark(p.side, p.index)).max().unwrap();
        let perm: Vec<u32> = (1..=n).rev().collect();
        let base = assemble_from_schedule(&s, Truncation::Fixed(n)).unwrap().invariants().unwrap();
        let moved = assemble_from_schedule(&permute_boundaries(&s, &perm).unwrap(), Truncation::Fixed(n))
            .unwrap()
            .invariants()
            .unwrap();
        assert_eq!(base, moved);
        assert!(permute_boundaries(&s, &[1, 1]).is_err());
    }
}
