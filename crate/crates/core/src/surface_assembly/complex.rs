use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type CircleId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceKind {
    SphereMinusDisks,
    TorusMinusDisks,
    /// A disk with holes; the first circle is the outer boundary.
    SigmaTruncation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub id: String,
    pub kind: PieceKind,
    pub boundary_circles: Vec<CircleId>,
    pub genus_contribution: u8,
}

impl Piece {
    pub fn euler_characteristic(&self) -> i64 {
        // A disk with h holes has χ = 1 − h, which is the sphere formula
        // once the outer boundary is counted among the circles.
        2 - 2 * i64::from(self.genus_contribution) - self.boundary_circles.len() as i64
    }
}

/// Pieces with some pairs of boundary circles identified.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluedComplex {
    pub pieces: Vec<Piece>,
    pub gluings: Vec<(CircleId, CircleId)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentInvariants {
    /// Indices into the complex's pieces, ascending.
    pub pieces: Vec<usize>,
    pub euler_characteristic: i64,
    pub boundary_count: u64,
    pub genus: u64,
}

impl ComponentInvariants {
    /// χ of the surface with every boundary circle capped by a disk.
    pub fn capped_euler(&self) -> i64 {
        self.euler_characteristic + self.boundary_count as i64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceInvariants {
    pub components: Vec<ComponentInvariants>,
    pub component_count: usize,
    pub euler_characteristic: i64,
    pub boundary_count: u64,
    pub genus: u64,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // Keep the least index as representative.
        if ra < rb {
            self.0[rb] = ra;
        } else {
            self.0[ra] = rb;
        }
    }
}

impl GluedComplex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Smallest circle id not used by any piece.
    pub fn next_circle(&self) -> CircleId {
        self.pieces
            .iter()
            .flat_map(|p| p.boundary_circles.iter().copied())
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn piece_index(&self, id: &str) -> Option<usize> {
        self.pieces.iter().position(|p| p.id == id)
    }

    /// Map from circle id to owning piece index.
    pub fn circle_owners(&self) -> Result<BTreeMap<CircleId, usize>> {
        let mut owners = BTreeMap::new();
        for (i, p) in self.pieces.iter().enumerate() {
            for &c in &p.boundary_circles {
                if owners.insert(c, i).is_some() {
                    return Err(Error::InconsistentComplex(format!("circle {c} appears twice")));
                }
            }
        }
        Ok(owners)
    }

    pub fn free_boundaries(&self) -> BTreeSet<CircleId> {
        let glued: BTreeSet<CircleId> = self.gluings.iter().flat_map(|&(a, b)| [a, b]).collect();
        self.pieces
            .iter()
            .flat_map(|p| p.boundary_circles.iter().copied())
            .filter(|c| !glued.contains(c))
            .collect()
    }

    /// Checks circle ownership, piece formulas and that every circle is
    /// glued at most once and never to itself.
    pub fn validate(&self) -> Result<BTreeMap<CircleId, usize>> {
        let owners = self.circle_owners()?;
        let mut ids = BTreeSet::new();
        for p in &self.pieces {
            if !ids.insert(p.id.as_str()) {
                return Err(Error::InconsistentComplex(format!("duplicate piece id {}", p.id)));
            }
            let ok = match p.kind {
                PieceKind::SphereMinusDisks => p.genus_contribution == 0,
                PieceKind::TorusMinusDisks => p.genus_contribution == 1,
                PieceKind::SigmaTruncation => p.genus_contribution == 0 && !p.boundary_circles.is_empty(),
            };
            if !ok {
                return Err(Error::InconsistentComplex(format!("piece {} has an invalid shape", p.id)));
            }
        }
        let mut used = BTreeSet::new();
        for &(a, b) in &self.gluings {
            if a == b {
                return Err(Error::InconsistentComplex(format!("circle {a} glued to itself")));
            }
            for c in [a, b] {
                if !owners.contains_key(&c) {
                    return Err(Error::InconsistentComplex(format!("gluing references unknown circle {c}")));
                }
                if !used.insert(c) {
                    return Err(Error::InconsistentComplex(format!("circle {c} glued twice")));
                }
            }
        }
        Ok(owners)
    }

    /// Appends a piece with `circles` fresh boundary circles and returns its
    /// index together with the new circle ids.
    pub fn add_piece(&mut self, id: impl Into<String>, kind: PieceKind, circles: usize) -> (usize, Vec<CircleId>) {
        let first = self.next_circle();
        let ids: Vec<CircleId> = (first..first + circles as u64).collect();
        self.pieces.push(Piece {
            id: id.into(),
            kind,
            boundary_circles: ids.clone(),
            genus_contribution: u8::from(kind == PieceKind::TorusMinusDisks),
        });
        (self.pieces.len() - 1, ids)
    }

    /// Identifies two free circles.
    pub fn glue(&mut self, a: CircleId, b: CircleId) -> Result<()> {
        let free = self.free_boundaries();
        for c in [a, b] {
            if !free.contains(&c) {
                return Err(Error::CircleNotFree(c));
            }
        }
        if a == b {
            return Err(Error::InconsistentComplex(format!("circle {a} glued to itself")));
        }
        self.gluings.push((a, b));
        Ok(())
    }

    /// Disjoint union; circle ids of `other` are shifted past ours and
    /// clashing piece ids get primes appended.
    pub fn disjoint_union(&self, other: &GluedComplex) -> GluedComplex {
        let shift = self.next_circle();
        let mut out = self.clone();
        let mut taken: BTreeSet<String> = self.pieces.iter().map(|p| p.id.clone()).collect();
        for p in &other.pieces {
            let mut id = p.id.clone();
            while taken.contains(&id) {
                id.push('\'');
            }
            taken.insert(id.clone());
            out.pieces.push(Piece {
                id,
                boundary_circles: p.boundary_circles.iter().map(|c| c + shift).collect(),
                ..p.clone()
            });
        }
        out.gluings
            .extend(other.gluings.iter().map(|&(a, b)| (a + shift, b + shift)));
        out
    }

    pub fn invariants(&self) -> Result<SurfaceInvariants> {
        let owners = self.validate()?;
        let n = self.pieces.len();
        let mut uf = UnionFind((0..n).collect());
        for &(a, b) in &self.gluings {
            uf.union(owners[&a], owners[&b]);
        }
        let free = self.free_boundaries();
        let mut by_root: BTreeMap<usize, ComponentInvariants> = BTreeMap::new();
        for i in 0..n {
            let r = uf.find(i);
            let comp = by_root.entry(r).or_insert_with(|| ComponentInvariants {
                pieces: Vec::new(),
                euler_characteristic: 0,
                boundary_count: 0,
                genus: 0,
            });
            let p = &self.pieces[i];
            comp.pieces.push(i);
            comp.euler_characteristic += p.euler_characteristic();
            comp.boundary_count += p.boundary_circles.iter().filter(|c| free.contains(c)).count() as u64;
        }
        let mut components: Vec<ComponentInvariants> = by_root.into_values().collect();
        for c in &mut components {
            let twice = 2 - c.euler_characteristic - c.boundary_count as i64;
            if twice < 0 || twice % 2 != 0 {
                return Err(Error::InconsistentComplex(format!(
                    "non-orientable or inconsistent complex (2 - χ - b = {twice})"
                )));
            }
            c.genus = (twice / 2) as u64;
        }
        // Representatives are least indices, so components are already
        // ordered by least piece.
        Ok(SurfaceInvariants {
            component_count: components.len(),
            euler_characteristic: components.iter().map(|c| c.euler_characteristic).sum(),
            boundary_count: components.iter().map(|c| c.boundary_count).sum(),
            genus: components.iter().map(|c| c.genus).sum(),
            components,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_pair(n: usize) -> GluedComplex {
        let mut c = GluedComplex::new();
        let (_, a) = c.add_piece("a", PieceKind::SigmaTruncation, n + 1);
        let (_, b) = c.add_piece("b", PieceKind::SigmaTruncation, n + 1);
        for j in 1..=n {
            c.glue(a[j], b[j]).unwrap();
        }
        c
    }

    #[test]
    fn two_sigma_pieces_glued_along_holes() {
        let inv = sigma_pair(3).invariants().unwrap();
        assert_eq!(inv.component_count, 1);
        assert_eq!(inv.euler_characteristic, -4);
        assert_eq!(inv.boundary_count, 2);
        assert_eq!(inv.genus, 2);
    }

    #[test]
    fn single_sphere_with_three_disks() {
        let mut c = GluedComplex::new();
        c.add_piece("s", PieceKind::SphereMinusDisks, 3);
        let inv = c.invariants().unwrap();
        assert_eq!((inv.euler_characteristic, inv.boundary_count, inv.genus), (-1, 3, 0));
    }

    #[test]
    fn unglued_pieces_are_separate_components() {
        let mut c = GluedComplex::new();
        c.add_piece("x", PieceKind::TorusMinusDisks, 1);
        c.add_piece("y", PieceKind::SphereMinusDisks, 2);
        let inv = c.invariants().unwrap();
        assert_eq!(inv.component_count, 2);
        assert_eq!(inv.components[0].genus, 1);
        assert_eq!(inv.components[1].pieces, vec![1]);
    }

    #[test]
    fn gluing_twice_is_rejected() {
        let mut c = sigma_pair(1);
        assert!(matches!(c.glue(1, 3), Err(Error::CircleNotFree(1))));
        c.gluings.push((1, 1));
        assert!(c.invariants().is_err());
    }

    #[test]
    fn disjoint_union_shifts_circles() {
        let a = sigma_pair(2);
        let u = a.disjoint_union(&a);
        assert_eq!(u.invariants().unwrap().component_count, 2);
        assert_eq!(u.free_boundaries().len(), 4);
    }
}
