use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type StateId = usize;

/// Label of an edge leaving a vertex. `Only` marks out-degree 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChildLabel {
    Left,
    Right,
    Only,
}

impl ChildLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ChildLabel::Left => "left",
            ChildLabel::Right => "right",
            ChildLabel::Only => "only",
        }
    }
}

/// The two families of branches and planar pieces. `Right` is the
/// right-sided family (▷), `Left` the left-sided one (◁).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Right => Side::Left,
            Side::Left => Side::Right,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Side::Right => "▷",
            Side::Left => "◁",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct State {
    pub name: String,
    pub color: u8,
    pub children: Vec<(ChildLabel, StateId)>,
}

/// A validated automaton presenting an infinite colored subtree of the
/// binary tree.
///
/// Every state has out-degree 1 or 2, out-degree-2 states have exactly one
/// left and one right child, and every state is reachable from `start`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAutomaton", into = "RawAutomaton")]
pub struct TreeAutomaton {
    states: Vec<State>,
    start: StateId,
}

impl TreeAutomaton {
    pub fn new(states: Vec<State>, start: StateId) -> Result<Self> {
        if start >= states.len() {
            return Err(Error::Semantic(format!("start state {start} does not exist")));
        }
        let mut seen = BTreeMap::new();
        for (id, s) in states.iter().enumerate() {
            if seen.insert(s.name.as_str(), id).is_some() {
                return Err(Error::Semantic(format!("duplicate state '{}'", s.name)));
            }
            if s.color > 1 {
                return Err(Error::Semantic(format!(
                    "state '{}' has color {}, expected 0 or 1",
                    s.name, s.color
                )));
            }
            match s.children.as_slice() {
                [] => {
                    return Err(Error::Semantic(format!(
                        "state '{}': dead end forbidden",
                        s.name
                    )))
                }
                [_] => {}
                [(a, _), (b, _)] => {
                    let mut labels = [*a, *b];
                    labels.sort();
                    if labels != [ChildLabel::Left, ChildLabel::Right] {
                        return Err(Error::Semantic(format!(
                            "state '{}': duplicate side label or 'only' mixed with left/right",
                            s.name
                        )));
                    }
                }
                _ => {
                    return Err(Error::Semantic(format!(
                        "state '{}' has more than two children",
                        s.name
                    )))
                }
            }
            for &(_, c) in &s.children {
                if c >= states.len() {
                    return Err(Error::Semantic(format!(
                        "state '{}' refers to missing state {c}",
                        s.name
                    )));
                }
            }
        }

        let aut = TreeAutomaton { states, start };
        let reach = aut.reachable();
        if let Some(id) = reach.iter().position(|r| !r) {
            return Err(Error::Semantic(format!(
                "state '{}' is unreachable from start",
                aut.states[id].name
            )));
        }
        // Normalize two-child states to (left, right) order.
        let mut aut = aut;
        for s in &mut aut.states {
            s.children.sort_by_key(|&(l, _)| l);
        }
        Ok(aut)
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id]
    }

    pub fn name(&self, id: StateId) -> &str {
        &self.states[id].name
    }

    pub fn color(&self, id: StateId) -> u8 {
        self.states[id].color
    }

    pub fn out_degree(&self, id: StateId) -> usize {
        self.states[id].children.len()
    }

    pub fn children(&self, id: StateId) -> &[(ChildLabel, StateId)] {
        &self.states[id].children
    }

    pub fn successors(&self, id: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.states[id].children.iter().map(|&(_, c)| c)
    }

    pub fn find(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.name == name)
    }

    /// `deg(v)` of a vertex in this state: out-degree plus one for the
    /// incoming edge, except at the root.
    pub fn degree(&self, id: StateId, is_root: bool) -> usize {
        self.out_degree(id) + usize::from(!is_root)
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.start]);
        seen[self.start] = true;
        while let Some(s) = queue.pop_front() {
            for c in self.successors(s) {
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        }
        seen
    }

    /// Canonical text form accepted by [`parse_tree_spec`](super::parse_tree_spec).
    pub fn to_spec_text(&self) -> String {
        let mut out = String::new();
        for s in &self.states {
            out.push_str(&format!("state {} color {} children", s.name, s.color));
            for &(label, c) in &s.children {
                out.push_str(&format!(" {} {}", label.as_str(), self.states[c].name));
            }
            out.push('\n');
        }
        out.push_str(&format!("start {}\n", self.states[self.start].name));
        out
    }
}

#[derive(Serialize, Deserialize)]
struct RawAutomaton {
    states: Vec<RawState>,
    start: String,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    name: String,
    color: u8,
    children: Vec<(ChildLabel, String)>,
}

impl From<TreeAutomaton> for RawAutomaton {
    fn from(a: TreeAutomaton) -> Self {
        RawAutomaton {
            start: a.states[a.start].name.clone(),
            states: a
                .states
                .iter()
                .map(|s| RawState {
                    name: s.name.clone(),
                    color: s.color,
                    children: s
                        .children
                        .iter()
                        .map(|&(l, c)| (l, a.states[c].name.clone()))
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<RawAutomaton> for TreeAutomaton {
    type Error = Error;

    fn try_from(raw: RawAutomaton) -> Result<Self> {
        let index: BTreeMap<&str, usize> = raw
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.as_str(), i))
            .collect();
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::Semantic(format!("unknown state '{n}'")))
        };
        let mut states = Vec::with_capacity(raw.states.len());
        for s in &raw.states {
            let children = s
                .children
                .iter()
                .map(|(l, c)| Ok((*l, lookup(c)?)))
                .collect::<Result<Vec<_>>>()?;
            states.push(State {
                name: s.name.clone(),
                color: s.color,
                children,
            });
        }
        TreeAutomaton::new(states, lookup(&raw.start)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(name: &str, color: u8, children: Vec<(ChildLabel, StateId)>) -> State {
        State {
            name: name.into(),
            color,
            children,
        }
    }

    #[test]
    fn rejects_dead_end() {
        let err = TreeAutomaton::new(vec![st("a", 0, vec![])], 0).unwrap_err();
        assert!(err.to_string().contains("dead end forbidden"));
    }

    #[test]
    fn rejects_unreachable() {
        let err = TreeAutomaton::new(
            vec![
                st("a", 0, vec![(ChildLabel::Only, 0)]),
                st("b", 0, vec![(ChildLabel::Only, 0)]),
            ],
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unreachable"));
    }

    #[test]
    fn rejects_two_left_children() {
        let err = TreeAutomaton::new(
            vec![st("a", 0, vec![(ChildLabel::Left, 0), (ChildLabel::Left, 0)])],
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate side label"));
    }

    #[test]
    fn json_round_trip_uses_names() {
        let a = TreeAutomaton::new(
            vec![st("a", 1, vec![(ChildLabel::Right, 0), (ChildLabel::Left, 0)])],
            0,
        )
        .unwrap();
        assert_eq!(a.children(0)[0].0, ChildLabel::Left);
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains("\"start\":\"a\""));
        let back: TreeAutomaton = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
    }
}
