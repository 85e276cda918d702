use super::complex::{GluedComplex, PieceKind};
use crate::tree_codec::FiniteTree;

/// The truncation of the coded surface at the tree's depth: one piece per
/// vertex with a circle for every edge of its star, glued along realized
/// edges. Outgoing circles of frontier vertices stay free.
pub fn truncate_pieces(tree: &FiniteTree) -> GluedComplex {
    let mut c = GluedComplex::new();
    // Circle of each edge on its origin and target side.
    let mut at_origin = vec![0; tree.edges.len()];
    let mut at_target = vec![0; tree.edges.len()];
    for v in &tree.vertices {
        let kind = if v.color == 1 {
            PieceKind::TorusMinusDisks
        } else {
            PieceKind::SphereMinusDisks
        };
        let incoming = usize::from(v.parent_edge.is_some());
        let (_, circles) = c.add_piece(format!("K{}", tree.word_string(v.id)), kind, incoming + v.out_degree);
        if let Some(e) = v.parent_edge {
            at_target[e] = circles[0];
        }
        for (k, &(_, e)) in v.children.iter().enumerate() {
            at_origin[e] = circles[incoming + k];
        }
    }
    c.gluings = tree
        .edges
        .iter()
        .map(|e| (at_origin[e.id], at_target[e.id]))
        .collect();
    c
}
