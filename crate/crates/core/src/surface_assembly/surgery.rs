use std::collections::BTreeSet;

use super::complex::{CircleId, GluedComplex, PieceKind};
use crate::{Error, Result};

/// Removes a disk from a piece, returning the new free circle.
pub fn puncture(c: &GluedComplex, piece: usize) -> Result<(GluedComplex, CircleId)> {
    if piece >= c.pieces.len() {
        return Err(Error::InvalidParameter(format!("no piece with index {piece}")));
    }
    let mut out = c.clone();
    let circle = c.next_circle();
    out.pieces[piece].boundary_circles.push(circle);
    Ok((out, circle))
}

/// Caps each named free circle with a one-holed torus.
pub fn attach_handles(c: &GluedComplex, circles: &BTreeSet<CircleId>) -> Result<GluedComplex> {
    let free = c.free_boundaries();
    if let Some(&bad) = circles.iter().find(|x| !free.contains(x)) {
        return Err(Error::CircleNotFree(bad));
    }
    let mut out = c.clone();
    let first = c.pieces.iter().filter(|p| p.id.starts_with('H')).count();
    for (k, &circle) in circles.iter().enumerate() {
        let (_, h) = out.add_piece(format!("H{}", first + k + 1), PieceKind::TorusMinusDisks, 1);
        out.glue(circle, h[0])?;
    }
    Ok(out)
}

/// Adds one handle to every listed piece without touching its existing
/// boundary: a puncture capped by a one-holed torus.
pub fn handle_surgery(c: &GluedComplex, pieces: &[usize]) -> Result<GluedComplex> {
    let mut out = c.clone();
    let mut fresh = BTreeSet::new();
    for &p in pieces {
        let (next, circle) = puncture(&out, p)?;
        out = next;
        fresh.insert(circle);
    }
    attach_handles(&out, &fresh)
}
