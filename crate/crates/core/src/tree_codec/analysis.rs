//! Cycle analysis of automata: end counts, genus, and the end conditions.
//!
//! Ends of the unrolled tree are infinite paths from the root. A path is an
//! isolated end exactly when it is eventually trapped in a cycle of
//! out-degree-1 states ("pure cycle"), and the end is accumulated by genus
//! exactly when every vertex along it roots a subtree containing a
//! 1-colored vertex.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::automaton::{StateId, TreeAutomaton};

/// A cardinality that may be countably infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Count {
    Finite(u64),
    Infinite,
}

impl Count {
    pub fn finite(self) -> Option<u64> {
        match self {
            Count::Finite(n) => Some(n),
            Count::Infinite => None,
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Infinite => f.write_str("∞"),
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Count::Finite(n) => s.serialize_u64(*n),
            Count::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Count::Finite(n)),
            Raw::S(s) if s == "infinite" => Ok(Count::Infinite),
            Raw::S(s) => Err(serde::de::Error::custom(format!("invalid count '{s}'"))),
        }
    }
}

/// Precomputed reachability and cycle structure of an automaton.
#[derive(Clone, Debug)]
pub struct AutomatonAnalysis<'a> {
    aut: &'a TreeAutomaton,
    scc_of: Vec<usize>,
    sccs: Vec<Vec<StateId>>,
    recurrent: Vec<bool>,
    pure_scc: Vec<bool>,
    branching_scc: Vec<bool>,
    reaches_one: Vec<bool>,
    reaches_pure: Vec<bool>,
    reaches_branching_cycle: Vec<bool>,
    single_end: Vec<bool>,
    all_reach_one: Vec<bool>,
}

fn reverse_closure(aut: &TreeAutomaton, seeds: impl Fn(StateId) -> bool) -> Vec<bool> {
    let n = aut.len();
    let mut preds = vec![Vec::new(); n];
    for s in 0..n {
        for c in aut.successors(s) {
            preds[c].push(s);
        }
    }
    let mut mark: Vec<bool> = (0..n).map(&seeds).collect();
    let mut queue: VecDeque<StateId> = (0..n).filter(|&s| mark[s]).collect();
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if !mark[p] {
                mark[p] = true;
                queue.push_back(p);
            }
        }
    }
    mark
}

/// Strongly connected components (Kosaraju, iterative).
fn sccs(aut: &TreeAutomaton) -> (Vec<usize>, Vec<Vec<StateId>>) {
    let n = aut.len();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (s, ref mut i)) = stack.last_mut() {
            let kids = aut.children(s);
            if *i < kids.len() {
                let c = kids[*i].1;
                *i += 1;
                if !visited[c] {
                    visited[c] = true;
                    stack.push((c, 0));
                }
            } else {
                order.push(s);
                stack.pop();
            }
        }
    }
    let mut preds = vec![Vec::new(); n];
    for s in 0..n {
        for c in aut.successors(s) {
            preds[c].push(s);
        }
    }
    let mut scc_of = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for &root in order.iter().rev() {
        if scc_of[root] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut comp = vec![root];
        scc_of[root] = id;
        let mut stack = vec![root];
        while let Some(s) = stack.pop() {
            for &p in &preds[s] {
                if scc_of[p] == usize::MAX {
                    scc_of[p] = id;
                    comp.push(p);
                    stack.push(p);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    (scc_of, comps)
}

impl<'a> AutomatonAnalysis<'a> {
    pub fn new(aut: &'a TreeAutomaton) -> Self {
        let n = aut.len();
        let (scc_of, comps) = sccs(aut);
        let recurrent: Vec<bool> = (0..n)
            .map(|s| comps[scc_of[s]].len() > 1 || aut.successors(s).any(|c| c == s))
            .collect();
        let pure_scc: Vec<bool> = comps
            .iter()
            .map(|c| recurrent[c[0]] && c.iter().all(|&s| aut.out_degree(s) == 1))
            .collect();
        let branching_scc: Vec<bool> = comps
            .iter()
            .map(|c| recurrent[c[0]] && c.iter().any(|&s| aut.out_degree(s) == 2))
            .collect();
        let reaches_one = reverse_closure(aut, |s| aut.color(s) == 1);
        let reaches_pure = reverse_closure(aut, |s| pure_scc[scc_of[s]]);
        let reaches_branching_cycle = reverse_closure(aut, |s| branching_scc[scc_of[s]]);
        let reaches_branching = reverse_closure(aut, |s| aut.out_degree(s) == 2);
        let reaches_barren = reverse_closure(aut, |s| !reaches_one[s]);
        AutomatonAnalysis {
            aut,
            scc_of,
            sccs: comps,
            recurrent,
            pure_scc,
            branching_scc,
            reaches_one,
            reaches_pure,
            reaches_branching_cycle,
            single_end: reaches_branching.iter().map(|b| !b).collect(),
            all_reach_one: reaches_barren.iter().map(|b| !b).collect(),
        }
    }

    pub fn automaton(&self) -> &TreeAutomaton {
        self.aut
    }

    /// Whether some 1-colored state is reachable from `s` (inclusive).
    pub fn reaches_one(&self, s: StateId) -> bool {
        self.reaches_one[s]
    }

    /// Whether the subtree below a vertex in state `s` is a single path,
    /// i.e. contains exactly one end.
    pub fn single_end(&self, s: StateId) -> bool {
        self.single_end[s]
    }

    /// Whether every end through a vertex in state `s` is accumulated by
    /// genus.
    pub fn all_ends_genus(&self, s: StateId) -> bool {
        self.all_reach_one[s]
    }

    pub fn is_recurrent(&self, s: StateId) -> bool {
        self.recurrent[s]
    }

    /// Pure out-degree-1 cycles, each listed from its least state id.
    pub fn pure_cycles(&self) -> Vec<Vec<StateId>> {
        let mut out = Vec::new();
        for (i, comp) in self.sccs.iter().enumerate() {
            if !self.pure_scc[i] {
                continue;
            }
            let mut cycle = vec![comp[0]];
            let mut s = self.aut.children(comp[0])[0].1;
            while s != comp[0] {
                cycle.push(s);
                s = self.aut.children(s)[0].1;
            }
            out.push(cycle);
        }
        out.sort();
        out
    }

    fn has_branching_recurrence(&self) -> bool {
        self.branching_scc.iter().any(|&b| b)
    }

    pub fn ends(&self) -> Count {
        self.ends_from(self.aut.start())
    }

    /// Ends of the subtree rooted at a vertex in state `s`.
    pub fn ends_from(&self, s: StateId) -> Count {
        if self.reaches_branching_cycle[s] {
            return Count::Infinite;
        }
        let mut memo = vec![None; self.aut.len()];
        Count::Finite(self.count_paths(s, &mut memo, &|a, s| {
            u64::from(a.pure_scc[a.scc_of[s]])
        }))
    }

    pub fn isolated_ends(&self) -> Count {
        let infinite = self
            .sccs
            .iter()
            .enumerate()
            .any(|(i, c)| self.branching_scc[i] && self.reaches_pure[c[0]]);
        if infinite {
            return Count::Infinite;
        }
        let mut memo = vec![None; self.aut.len()];
        Count::Finite(self.count_paths(self.aut.start(), &mut memo, &|a, s| {
            u64::from(a.pure_scc[a.scc_of[s]])
        }))
    }

    /// Number of ends accumulated by genus, when the end space is finite.
    pub fn nonplanar_ends(&self) -> Option<u64> {
        if self.has_branching_recurrence() {
            return None;
        }
        let mut memo = vec![None; self.aut.len()];
        Some(self.count_paths(self.aut.start(), &mut memo, &|a, s| {
            let comp = &a.sccs[a.scc_of[s]];
            u64::from(a.pure_scc[a.scc_of[s]] && comp.iter().any(|&x| a.aut.color(x) == 1))
        }))
    }

    /// Counts leaves of the path tree that terminate in pure cycles, weighted
    /// by `weight`. Only called when no branching state is recurrent, or for
    /// states that cannot reach a pure cycle through one.
    fn count_paths(
        &self,
        s: StateId,
        memo: &mut Vec<Option<u64>>,
        weight: &dyn Fn(&Self, StateId) -> u64,
    ) -> u64 {
        if let Some(v) = memo[s] {
            return v;
        }
        let v = if self.pure_scc[self.scc_of[s]] {
            weight(self, s)
        } else if !self.reaches_pure[s] {
            0
        } else {
            let kids: Vec<StateId> = self.aut.successors(s).collect();
            kids.into_iter()
                .map(|c| self.count_paths(c, memo, weight))
                .fold(0u64, u64::saturating_add)
        };
        memo[s] = Some(v);
        v
    }

    /// Total genus of the coded surface: the number of 1-colored vertices.
    pub fn genus(&self) -> Count {
        let infinite = (0..self.aut.len()).any(|s| self.recurrent[s] && self.reaches_one[s]);
        if infinite {
            return Count::Infinite;
        }
        let mut memo = vec![None; self.aut.len()];
        Count::Finite(self.count_genus(self.aut.start(), &mut memo))
    }

    fn count_genus(&self, s: StateId, memo: &mut Vec<Option<u64>>) -> u64 {
        if let Some(v) = memo[s] {
            return v;
        }
        let v = if !self.reaches_one[s] {
            0
        } else {
            let kids: Vec<StateId> = self.aut.successors(s).collect();
            kids.into_iter()
                .map(|c| self.count_genus(c, memo))
                .fold(u64::from(self.aut.color(s)), u64::saturating_add)
        };
        memo[s] = Some(v);
        v
    }

    /// No isolated ends at all.
    pub fn perfect(&self) -> bool {
        !self.pure_scc.iter().any(|&p| p)
    }

    pub fn star(&self) -> bool {
        self.star_witness().is_none()
    }

    pub fn star_star(&self) -> bool {
        self.all_reach_one[self.aut.start()]
    }

    /// A pure cycle without 1-colored states, if any.
    pub fn star_witness(&self) -> Option<Vec<StateId>> {
        self.pure_cycles()
            .into_iter()
            .find(|c| c.iter().all(|&s| self.aut.color(s) == 0))
    }

    /// A cycle all of whose states cannot reach a 1-colored state.
    pub fn star_star_witness(&self) -> Option<Vec<StateId>> {
        let first = (0..self.aut.len()).find(|&s| !self.reaches_one[s])?;
        let mut seen = vec![usize::MAX; self.aut.len()];
        let mut path = Vec::new();
        let mut s = first;
        while seen[s] == usize::MAX {
            seen[s] = path.len();
            path.push(s);
            s = self.aut.children(s)[0].1;
        }
        Some(path[seen[s]..].to_vec())
    }
}

/// Outcome of deciding the end conditions on a coding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub star: bool,
    pub star_star: bool,
    pub star_witness: Option<Vec<String>>,
    pub star_star_witness: Option<Vec<String>>,
    pub isolated_end_cycles: Vec<Vec<String>>,
}

pub fn check_conditions(aut: &TreeAutomaton) -> ConditionReport {
    let a = AutomatonAnalysis::new(aut);
    let names = |c: Vec<StateId>| c.into_iter().map(|s| aut.name(s).to_string()).collect();
    ConditionReport {
        star: a.star(),
        star_star: a.star_star(),
        star_witness: a.star_witness().map(names),
        star_star_witness: a.star_star_witness().map(names),
        isolated_end_cycles: a.pure_cycles().into_iter().map(names).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_codec::parse_tree_spec;

    fn aut(s: &str) -> TreeAutomaton {
        parse_tree_spec(s).unwrap()
    }

    #[test]
    fn cantor_tree_conditions() {
        let r = check_conditions(&aut("state a color 0 children left a right a; start a"));
        assert!(r.star);
        assert!(!r.star_star);
        assert!(r.isolated_end_cycles.is_empty());
        assert_eq!(r.star_star_witness, Some(vec!["a".to_string()]));
    }

    #[test]
    fn plane_fails_star_with_witness() {
        let r = check_conditions(&aut("state a color 0 children only a; start a"));
        assert!(!r.star);
        assert!(!r.star_star);
        assert_eq!(r.star_witness, Some(vec!["a".to_string()]));
    }

    #[test]
    fn jacobs_ladder_conditions() {
        let r = check_conditions(&aut(
            "state r color 0 children left h right k; state h color 1 children only h; state k color 1 children only k; start r",
        ));
        assert!(r.star && r.star_star);
        assert_eq!(r.isolated_end_cycles.len(), 2);
    }

    #[test]
    fn counts_for_named_codings() {
        let jl = aut("state r color 0 children left h right h; state h color 1 children only h; start r");
        let a = AutomatonAnalysis::new(&jl);
        assert_eq!(a.ends(), Count::Finite(2));
        assert_eq!(a.isolated_ends(), Count::Finite(2));
        assert_eq!(a.nonplanar_ends(), Some(2));
        assert_eq!(a.genus(), Count::Infinite);

        let cantor = aut("state a color 0 children left a right a; start a");
        let a = AutomatonAnalysis::new(&cantor);
        assert_eq!(a.ends(), Count::Infinite);
        assert_eq!(a.isolated_ends(), Count::Finite(0));
        assert!(a.perfect());
        assert_eq!(a.genus(), Count::Finite(0));

        let mixed = aut("state a color 0 children left a right h; state h color 1 children only h; start a");
        let a = AutomatonAnalysis::new(&mixed);
        assert_eq!(a.isolated_ends(), Count::Infinite);
        assert!(a.star());
        // The all-left end sees handles branching off arbitrarily deep.
        assert!(a.star_star());
    }

    #[test]
    fn finite_genus_is_counted() {
        // Root with a handle, then a Cantor tree: genus 1.
        let a = aut("state r color 1 children left c right c; state c color 0 children left c right c; start r");
        assert_eq!(AutomatonAnalysis::new(&a).genus(), Count::Finite(1));
        // Three handles on a prefix path before a plane end.
        let b = aut("state p color 1 children only q; state q color 1 children only s; state s color 1 children only t; state t color 0 children only t; start p");
        let an = AutomatonAnalysis::new(&b);
        assert_eq!(an.genus(), Count::Finite(3));
        assert_eq!(an.ends(), Count::Finite(1));
        assert!(!an.star());
    }

    #[test]
    fn count_serializes_as_number_or_string() {
        assert_eq!(serde_json::to_string(&Count::Finite(3)).unwrap(), "3");
        assert_eq!(serde_json::to_string(&Count::Infinite).unwrap(), "\"infinite\"");
        let c: Count = serde_json::from_str("\"infinite\"").unwrap();
        assert_eq!(c, Count::Infinite);
    }
}
