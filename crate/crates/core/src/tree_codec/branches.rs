use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::automaton::{ChildLabel, Side};
use super::unroll::FiniteTree;
use crate::{Error, Result};

/// A maximal linear subtree following one side from its origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub id: usize,
    pub origin: usize,
    pub side: Side,
    /// Vertices in order, starting with the origin.
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchDecomposition {
    pub branches: Vec<Branch>,
    pub edge_to_branch: BTreeMap<usize, usize>,
}

impl BranchDecomposition {
    /// The branch containing `v` as a non-initial vertex, or `None` for the
    /// root.
    pub fn branch_through(&self, tree: &FiniteTree, v: usize) -> Option<&Branch> {
        let e = tree.vertices[v].parent_edge?;
        Some(&self.branches[self.edge_to_branch[&e]])
    }

    /// The branch originating at a degree-3 non-root vertex.
    pub fn branch_from(&self, v: usize) -> Option<&Branch> {
        self.branches.iter().find(|b| b.origin == v)
    }

    pub fn root_branch(&self, side: Side) -> &Branch {
        match side {
            Side::Right => &self.branches[0],
            Side::Left => &self.branches[1],
        }
    }
}

fn side_of(label: ChildLabel) -> Option<Side> {
    match label {
        ChildLabel::Right => Some(Side::Right),
        ChildLabel::Left => Some(Side::Left),
        ChildLabel::Only => None,
    }
}

/// Child edge of `v` continuing a branch of the given side.
fn next_edge(tree: &FiniteTree, v: usize, side: Side) -> Result<Option<usize>> {
    let vert = &tree.vertices[v];
    match vert.out_degree {
        1 => Ok(vert.children.first().map(|&(_, e)| e)),
        2 => {
            if vert.children.is_empty() {
                return Ok(None);
            }
            let labels: Vec<_> = vert.children.iter().map(|&(l, _)| side_of(l)).collect();
            if vert.children.len() != 2 || !labels.contains(&Some(Side::Left)) || !labels.contains(&Some(Side::Right)) {
                return Err(Error::MalformedTree(format!(
                    "vertex {v} has out-degree 2 without one left and one right child"
                )));
            }
            Ok(vert
                .children
                .iter()
                .find(|&&(l, _)| side_of(l) == Some(side))
                .map(|&(_, e)| e))
        }
        d => Err(Error::MalformedTree(format!("vertex {v} has out-degree {d}"))),
    }
}

/// Partitions the edges of `tree` into branches. The root originates the
/// right-sided branch (id 0) and the left-sided one (id 1); an out-degree-1
/// root sends its only edge to the right-sided branch.
pub fn decompose_branches(tree: &FiniteTree) -> Result<BranchDecomposition> {
    let root = tree.root;
    let mut branches = Vec::new();
    let mut edge_to_branch = BTreeMap::new();
    let mut queue = VecDeque::new();

    let root_v = &tree.vertices[root];
    let (right_start, left_start) = match root_v.out_degree {
        1 => (root_v.children.first().map(|&(_, e)| e), None),
        2 => (next_edge(tree, root, Side::Right)?, next_edge(tree, root, Side::Left)?),
        d => return Err(Error::MalformedTree(format!("root has out-degree {d}"))),
    };
    queue.push_back((root, Side::Right, right_start));
    queue.push_back((root, Side::Left, left_start));

    while let Some((origin, side, first)) = queue.pop_front() {
        let id = branches.len();
        let mut vertices = vec![origin];
        let mut edges = Vec::new();
        let mut next = first;
        while let Some(e) = next {
            if edge_to_branch.insert(e, id).is_some() {
                return Err(Error::MalformedTree(format!("edge {e} reached twice")));
            }
            edges.push(e);
            let v = tree.edges[e].target;
            vertices.push(v);
            next = next_edge(tree, v, side)?;
            if tree.vertices[v].out_degree == 2 {
                // Frontier vertices realize no edges and originate nothing.
                if let Some(other) = next_edge(tree, v, side.opposite())? {
                    queue.push_back((v, side.opposite(), Some(other)));
                }
            }
        }
        branches.push(Branch {
            id,
            origin,
            side,
            vertices,
            edges,
        });
    }
    if edge_to_branch.len() != tree.edges.len() {
        return Err(Error::MalformedTree("tree is not connected to its root".into()));
    }
    Ok(BranchDecomposition {
        branches,
        edge_to_branch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_codec::{parse_tree_spec, unroll};

    fn decomp(spec: &str, depth: usize) -> (FiniteTree, BranchDecomposition) {
        let t = unroll(&parse_tree_spec(spec).unwrap(), depth).unwrap();
        let d = decompose_branches(&t).unwrap();
        (t, d)
    }

    #[test]
    fn cantor_depth_three_has_eight_branches() {
        let (t, d) = decomp("state a color 0 children left a right a; start a", 3);
        assert_eq!(d.branches.len(), 8);
        assert_eq!(d.edge_to_branch.len(), t.edges.len());
        assert_eq!(d.root_branch(Side::Right).edges.len(), 3);
    }

    #[test]
    fn loch_ness_has_only_root_branches() {
        let (_, d) = decomp("state a color 1 children left a; start a", 7);
        assert_eq!(d.branches.len(), 2);
        assert_eq!(d.branches[0].side, Side::Right);
        assert_eq!(d.branches[0].edges.len(), 7);
        assert!(d.branches[1].edges.is_empty());
    }

    #[test]
    fn depth_zero_gives_two_empty_branches() {
        let (_, d) = decomp("state a color 0 children left a right a; start a", 0);
        assert_eq!(d.branches.len(), 2);
        assert!(d.branches.iter().all(|b| b.edges.is_empty() && b.vertices.len() == 1));
    }

    #[test]
    fn new_branches_take_the_opposite_side() {
        let (t, d) = decomp("state a color 0 children left a right a; start a", 4);
        for b in &d.branches[2..] {
            let parent = d.branch_through(&t, b.origin).unwrap();
            assert_eq!(parent.side, b.side.opposite());
        }
    }

    #[test]
    fn interior_degree_three_vertices_each_originate_one_branch() {
        let (t, d) = decomp("state a color 0 children left a right b; state b color 1 children only a; start a", 5);
        let interior = t
            .vertices
            .iter()
            .filter(|v| v.level > 0 && v.level < t.depth && v.out_degree == 2)
            .count();
        assert_eq!(d.branches.len(), 2 + interior);
    }
}
