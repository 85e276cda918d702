use serde::{Deserialize, Serialize};

use super::analysis::{AutomatonAnalysis, Count};
use super::automaton::TreeAutomaton;
use crate::{Error, Result};

/// Frontier vertices at one resolution sharing an automaton state. Vertices
/// in the same state root isomorphic colored subtrees, so they carry the
/// same end data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndClassGroup {
    pub state: String,
    pub classes: u64,
    pub isolated: bool,
    pub genus_accumulating: bool,
    pub ends_below: Count,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndSummary {
    pub resolution: usize,
    pub end_classes: u64,
    pub isolated_classes: u64,
    pub genus_accumulating_classes: u64,
    pub groups: Vec<EndClassGroup>,
}

/// Number of level-`depth` vertices in each state, saturating.
pub(crate) fn level_state_counts(aut: &TreeAutomaton, depth: usize) -> Vec<u64> {
    let mut counts = vec![0u64; aut.len()];
    counts[aut.start()] = 1;
    for _ in 0..depth {
        let mut next = vec![0u64; aut.len()];
        for (s, &c) in counts.iter().enumerate() {
            for t in aut.successors(s) {
                next[t] = next[t].saturating_add(c);
            }
        }
        counts = next;
    }
    counts
}

/// Groups the level-`resolution` neighborhoods of ends by state.
pub fn end_summary(aut: &TreeAutomaton, resolution: usize) -> Result<EndSummary> {
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be at least 1".into()));
    }
    let an = AutomatonAnalysis::new(aut);
    let counts = level_state_counts(aut, resolution);
    let mut groups = Vec::new();
    for (s, &classes) in counts.iter().enumerate() {
        if classes == 0 {
            continue;
        }
        groups.push(EndClassGroup {
            state: aut.name(s).to_string(),
            classes,
            isolated: an.single_end(s),
            genus_accumulating: an.all_ends_genus(s),
            ends_below: an.ends_from(s),
        });
    }
    let sum = |f: fn(&EndClassGroup) -> bool| {
        groups
            .iter()
            .filter(|g| f(g))
            .map(|g| g.classes)
            .fold(0u64, u64::saturating_add)
    };
    Ok(EndSummary {
        resolution,
        end_classes: sum(|_| true),
        isolated_classes: sum(|g| g.isolated),
        genus_accumulating_classes: sum(|g| g.genus_accumulating),
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_codec::parse_tree_spec;

    #[test]
    fn jacobs_ladder_has_two_isolated_genus_classes() {
        let a = parse_tree_spec(
            "state r color 0 children left h right k; state h color 1 children only h; state k color 1 children only k; start r",
        )
        .unwrap();
        for r in 1..6 {
            let s = end_summary(&a, r).unwrap();
            assert_eq!((s.end_classes, s.isolated_classes, s.genus_accumulating_classes), (2, 2, 2));
        }
    }

    #[test]
    fn cantor_classes_double() {
        let a = parse_tree_spec("state a color 0 children left a right a; start a").unwrap();
        for r in 1..10 {
            let s = end_summary(&a, r).unwrap();
            assert_eq!(s.end_classes, 1 << r);
            assert_eq!(s.isolated_classes, 0);
            assert_eq!(s.groups[0].ends_below, Count::Infinite);
        }
    }

    #[test]
    fn loch_ness_single_class() {
        let a = parse_tree_spec("state a color 1 children left a; start a").unwrap();
        let s = end_summary(&a, 4).unwrap();
        assert_eq!((s.end_classes, s.isolated_classes, s.genus_accumulating_classes), (1, 1, 1));
        assert!(end_summary(&a, 0).is_err());
    }
}
