use serde::{Deserialize, Serialize};

use super::automaton::{ChildLabel, StateId, TreeAutomaton};
use crate::{Error, Result};

/// Unrolling depth accepted without an explicit override.
pub const DEFAULT_DEPTH_CAP: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeVertex {
    pub id: usize,
    pub level: usize,
    pub color: u8,
    pub state: StateId,
    pub parent_edge: Option<usize>,
    /// Realized child edges, in label order.
    pub children: Vec<(ChildLabel, usize)>,
    /// Out-degree in the infinite tree; differs from `children.len()` only on
    /// the frontier.
    pub out_degree: usize,
    /// Labels along the path from the root.
    pub word: Vec<ChildLabel>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub id: usize,
    pub origin: usize,
    pub target: usize,
    pub label: ChildLabel,
}

/// The levels `0..=depth` of an unrolled coding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteTree {
    pub vertices: Vec<TreeVertex>,
    pub edges: Vec<TreeEdge>,
    pub root: usize,
    pub depth: usize,
    pub frontier: Vec<usize>,
}

impl FiniteTree {
    pub fn is_root(&self, v: usize) -> bool {
        v == self.root
    }

    /// `deg(v)` in the infinite tree.
    pub fn degree(&self, v: usize) -> usize {
        self.vertices[v].out_degree + usize::from(!self.is_root(v))
    }

    pub fn vertices_at(&self, level: usize) -> impl Iterator<Item = &TreeVertex> {
        self.vertices.iter().filter(move |v| v.level == level)
    }

    pub fn level_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.depth + 1];
        for v in &self.vertices {
            counts[v.level] += 1;
        }
        counts
    }

    pub fn word_string(&self, v: usize) -> String {
        word_string(&self.vertices[v].word)
    }
}

pub(crate) fn word_string(word: &[ChildLabel]) -> String {
    if word.is_empty() {
        return "ε".into();
    }
    word.iter()
        .map(|l| match l {
            ChildLabel::Left => 'L',
            ChildLabel::Right => 'R',
            ChildLabel::Only => 'O',
        })
        .collect()
}

pub fn unroll(aut: &TreeAutomaton, depth: usize) -> Result<FiniteTree> {
    unroll_with_cap(aut, depth, DEFAULT_DEPTH_CAP)
}

pub fn unroll_with_cap(aut: &TreeAutomaton, depth: usize, cap: usize) -> Result<FiniteTree> {
    if depth > cap {
        return Err(Error::DepthCap {
            requested: depth,
            cap,
        });
    }
    let start = aut.start();
    let mut vertices = vec![TreeVertex {
        id: 0,
        level: 0,
        color: aut.color(start),
        state: start,
        parent_edge: None,
        children: Vec::new(),
        out_degree: aut.out_degree(start),
        word: Vec::new(),
    }];
    let mut edges = Vec::new();
    let mut layer = vec![0usize];
    for level in 1..=depth {
        let mut next = Vec::with_capacity(layer.len() * 2);
        for &v in &layer {
            let state = vertices[v].state;
            for &(label, child) in aut.children(state) {
                let id = vertices.len();
                let edge = edges.len();
                edges.push(TreeEdge {
                    id: edge,
                    origin: v,
                    target: id,
                    label,
                });
                let mut word = vertices[v].word.clone();
                word.push(label);
                vertices[v].children.push((label, edge));
                vertices.push(TreeVertex {
                    id,
                    level,
                    color: aut.color(child),
                    state: child,
                    parent_edge: Some(edge),
                    children: Vec::new(),
                    out_degree: aut.out_degree(child),
                    word,
                });
                next.push(id);
            }
        }
        layer = next;
    }
    Ok(FiniteTree {
        vertices,
        edges,
        root: 0,
        depth,
        frontier: layer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_codec::parse_tree_spec;

    /// Number of automaton paths of each length, by dynamic programming over
    /// states.
    fn path_counts(aut: &TreeAutomaton, depth: usize) -> Vec<usize> {
        let mut at = vec![0usize; aut.len()];
        at[aut.start()] = 1;
        let mut out = vec![1];
        for _ in 0..depth {
            let mut next = vec![0usize; aut.len()];
            for (s, &n) in at.iter().enumerate() {
                for c in aut.successors(s) {
                    next[c] += n;
                }
            }
            out.push(next.iter().sum());
            at = next;
        }
        out
    }

    #[test]
    fn cantor_depth_three_has_fifteen_vertices() {
        let a = parse_tree_spec("state a color 0 children left a right a; start a").unwrap();
        let t = unroll(&a, 3).unwrap();
        assert_eq!(t.vertices.len(), 1 + 2 + 4 + 8);
        assert!(t.vertices.iter().all(|v| v.color == 0));
        assert_eq!(t.frontier.len(), 8);
    }

    #[test]
    fn loch_ness_unrolls_to_path() {
        let a = parse_tree_spec("state a color 1 children left a; start a").unwrap();
        let t = unroll(&a, 5).unwrap();
        assert_eq!(t.vertices.len(), 6);
        assert!(t.vertices.iter().all(|v| v.color == 1 && v.children.len() <= 1));
    }

    #[test]
    fn depth_zero_is_root_only() {
        let a = parse_tree_spec("state a color 0 children left a right a; start a").unwrap();
        let t = unroll(&a, 0).unwrap();
        assert_eq!(t.vertices.len(), 1);
        assert_eq!(t.frontier, vec![0]);
        assert!(t.edges.is_empty());
    }

    #[test]
    fn depth_cap_enforced() {
        let a = parse_tree_spec("state a color 0 children left a right a; start a").unwrap();
        assert!(matches!(unroll(&a, 17), Err(Error::DepthCap { .. })));
        assert!(unroll_with_cap(&a, 17, 17).is_ok());
    }

    #[test]
    fn level_counts_match_path_counts() {
        let a = parse_tree_spec(
            "state a color 0 children left a right b; state b color 1 children only c; state c color 0 children left a right c; start a",
        )
        .unwrap();
        let t = unroll(&a, 10).unwrap();
        assert_eq!(t.level_counts(), path_counts(&a, 10));
        // Frontier is exactly the maximal level.
        assert!(t.frontier.iter().all(|&v| t.vertices[v].level == 10));
        assert_eq!(t.frontier.len(), *t.level_counts().last().unwrap());
    }

    #[test]
    fn levels_increase_along_edges() {
        let a = parse_tree_spec("state a color 0 children left a right b; state b color 1 children only a; start a").unwrap();
        let t = unroll(&a, 8).unwrap();
        for e in &t.edges {
            assert_eq!(t.vertices[e.target].level, t.vertices[e.origin].level + 1);
            assert_eq!(t.vertices[e.target].parent_edge, Some(e.id));
        }
        assert_eq!(t.edges.len() + 1, t.vertices.len());
    }

    #[test]
    fn unroll_is_deterministic() {
        let a = parse_tree_spec("state a color 0 children left a right b; state b color 1 children only a; start a").unwrap();
        let x = serde_json::to_string(&unroll(&a, 9).unwrap()).unwrap();
        let y = serde_json::to_string(&unroll(&a, 9).unwrap()).unwrap();
        assert_eq!(x, y);
    }
}
