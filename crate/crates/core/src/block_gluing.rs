//! Foliated blocks as rotation-orbit systems and the leaves of their gluing.
//!
//! Leaves are tracked by family id. The matched pairs of a [`DiffeoChain`]
//! are the only identifications between tracked leaves, so no topology is
//! read off floating-point orbits.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circle_diffeo::{DensePointFamily, DiffeoChain};
use crate::end_space::{SurfaceTag, TruncationRecord};
use crate::surface_assembly::{GluedComplex, GluingSchedule, PieceKind};
use crate::tree_codec::{Count, Side};
use crate::{Error, Result};

pub type Slot = (u32, u32);

/// Orbit length over which block families are checked to be disjoint.
pub const BLOCK_HORIZON: u64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub id: u32,
    pub alpha: f64,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoliatedBlockModel {
    pub side: Side,
    pub leaf_families: Vec<DensePointFamily>,
    /// Orbit length up to which families were checked to be disjoint.
    pub horizon: u64,
}

impl FoliatedBlockModel {
    pub fn family(&self, id: u32) -> Option<&DensePointFamily> {
        self.leaf_families.iter().find(|f| f.id == id)
    }

    /// Tracked family whose orbit contains the fixed-point position `theta`
    /// within the horizon, with the signed index offset from its base point.
    pub fn locate(&self, theta: u64) -> Option<(u32, i128)> {
        self.leaf_families.iter().find_map(|f| {
            f.index_of_shift(theta.wrapping_sub(f.fixed_point(0)), self.horizon)
                .or_else(|| (theta == f.fixed_point(0)).then_some(0))
                .map(|j| (f.id, j))
        })
    }
}

/// A block whose tracked leaves are orbits of one rotation. Orbits of a
/// common angle either coincide or are disjoint, so disjointness reduces to
/// the offsets not differing by a multiple of the angle.
pub fn build_block(side: Side, specs: &[FamilySpec]) -> Result<FoliatedBlockModel> {
    build_block_with_horizon(side, specs, BLOCK_HORIZON)
}

pub fn build_block_with_horizon(side: Side, specs: &[FamilySpec], horizon: u64) -> Result<FoliatedBlockModel> {
    let mut families: Vec<DensePointFamily> = Vec::with_capacity(specs.len());
    for s in specs {
        let f = DensePointFamily::new(s.id, s.alpha, s.offset)?;
        for g in &families {
            if g.id == f.id {
                return Err(Error::InvalidParameter(format!("family id {} used twice", f.id)));
            }
            if g.alpha_fixed != f.alpha_fixed {
                return Err(Error::InvalidParameter(format!(
                    "families {} and {} use different angles; a block has one holonomy angle",
                    g.id, f.id
                )));
            }
            let shift = f.fixed_point(0).wrapping_sub(g.fixed_point(0));
            if shift == 0 || g.index_of_shift(shift, horizon).is_some() {
                return Err(Error::OverlappingFamilies(g.id, f.id));
            }
        }
        families.push(f);
    }
    Ok(FoliatedBlockModel {
        side,
        leaf_families: families,
        horizon,
    })
}

/// Holonomy angles of the two blocks in [`model_from_delta`].
pub const RIGHT_ALPHA: f64 = 0.618_033_988_749_894_8;
pub const LEFT_ALPHA: f64 = 0.414_213_562_373_095_1;

/// `count` families of angle `alpha` with offsets drawn from `seed`.
pub fn seeded_family_specs(count: u32, alpha: f64, seed: u64) -> Vec<FamilySpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=count)
        .map(|id| FamilySpec {
            id,
            alpha,
            offset: rng.gen::<f64>(),
        })
        .collect()
}

/// Blocks with one family per piece named by `delta`, glued by the chain
/// built over `steps` index rectangles.
pub fn model_from_delta(delta: &BTreeMap<Slot, Slot>, steps: usize, seed: u64) -> Result<GluedFoliationModel> {
    let n_right = delta.keys().map(|s| s.0).max().unwrap_or(1);
    let n_left = delta.values().map(|s| s.0).max().unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let right = build_block(Side::Right, &seeded_family_specs(n_right, RIGHT_ALPHA, rng.gen()))?;
    let left = build_block(Side::Left, &seeded_family_specs(n_left, LEFT_ALPHA, rng.gen()))?;
    let chain = crate::circle_diffeo::build_matching_diffeo(&right.leaf_families, &left.leaf_families, delta, steps)?;
    glue_blocks(&right, &left, &chain)
}

/// One identification of boundary circles, `B^▷_{lhs} ~ B^◁_{rhs}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AdjacencyEdge {
    pub lhs: Slot,
    pub rhs: Slot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluedFoliationModel {
    pub right: FoliatedBlockModel,
    pub left: FoliatedBlockModel,
    pub chain: DiffeoChain,
    pub leaf_adjacency: Vec<AdjacencyEdge>,
}

impl GluedFoliationModel {
    pub fn block(&self, side: Side) -> &FoliatedBlockModel {
        match side {
            Side::Right => &self.right,
            Side::Left => &self.left,
        }
    }

    /// The identifications as a map from ▷ slots to ◁ slots.
    pub fn delta(&self) -> BTreeMap<Slot, Slot> {
        self.leaf_adjacency.iter().map(|e| (e.lhs, e.rhs)).collect()
    }

    /// Whether the adjacency is exactly the part of `delta` handled by the
    /// back-and-forth passes over the rectangle `1..=n`.
    pub fn consistent_with(&self, delta: &BTreeMap<Slot, Slot>, n: u32) -> bool {
        let inside = |s: Slot| s.0 <= n && s.1 <= n;
        let expected: BTreeSet<AdjacencyEdge> = delta
            .iter()
            .filter(|(&l, &r)| inside(l) || inside(r))
            .map(|(&lhs, &rhs)| AdjacencyEdge { lhs, rhs })
            .collect();
        expected == self.leaf_adjacency.iter().copied().collect()
    }
}

pub fn glue_blocks(right: &FoliatedBlockModel, left: &FoliatedBlockModel, chain: &DiffeoChain) -> Result<GluedFoliationModel> {
    if right.side != Side::Right || left.side != Side::Left {
        return Err(Error::InvalidParameter("expected a ▷ block and a ◁ block".into()));
    }
    let mut seen = BTreeSet::new();
    let mut edges = Vec::with_capacity(chain.matched_pairs.len());
    for p in &chain.matched_pairs {
        let xf = right
            .family(p.lhs.0)
            .ok_or_else(|| Error::DanglingFamily(format!("▷ family {} is not in the block", p.lhs.0)))?;
        let yf = left
            .family(p.rhs.0)
            .ok_or_else(|| Error::DanglingFamily(format!("◁ family {} is not in the block", p.rhs.0)))?;
        if xf.point(p.x_index) != p.x || yf.point(p.y_index) != p.y {
            return Err(Error::InconsistentComplex(format!(
                "matched pair {:?} ~ {:?} is not on its families",
                p.lhs, p.rhs
            )));
        }
        if !seen.insert((Side::Right, p.lhs)) || !seen.insert((Side::Left, p.rhs)) {
            return Err(Error::InconsistentComplex(format!(
                "boundary {:?} or {:?} is glued twice",
                p.lhs, p.rhs
            )));
        }
        edges.push(AdjacencyEdge { lhs: p.lhs, rhs: p.rhs });
    }
    edges.sort();
    Ok(GluedFoliationModel {
        right: right.clone(),
        left: left.clone(),
        chain: chain.clone(),
        leaf_adjacency: edges,
    })
}

/// The truncation of the leaf through `seed` at `radius`: leaves within
/// `radius` identifications of the seed, using only boundaries of index at
/// most `radius`. Pieces carry their highest used boundary plus the outer
/// circle, as in schedule assembly.
pub fn reconstruct_leaf(m: &GluedFoliationModel, seed: (Side, u32), radius: u32) -> Result<GluedComplex> {
    if m.block(seed.0).family(seed.1).is_none() {
        return Err(Error::DanglingFamily(format!("no {} family {}", seed.0.symbol(), seed.1)));
    }
    explore(&m.leaf_adjacency, seed, radius)
}

/// The same truncation read directly off a gluing schedule.
pub fn schedule_leaf(s: &GluingSchedule, seed: (Side, u32), radius: u32) -> Result<GluedComplex> {
    let edges: Vec<AdjacencyEdge> = s
        .entries
        .iter()
        .map(|e| AdjacencyEdge {
            lhs: (e.lhs_piece, e.lhs_index),
            rhs: (e.rhs_piece, e.rhs_index),
        })
        .collect();
    explore(&edges, seed, radius)
}

fn explore(edges: &[AdjacencyEdge], seed: (Side, u32), radius: u32) -> Result<GluedComplex> {
    let kept: Vec<&AdjacencyEdge> = edges.iter().filter(|e| e.lhs.1 <= radius && e.rhs.1 <= radius).collect();
    let mut incident: BTreeMap<(Side, u32), Vec<usize>> = BTreeMap::new();
    for (i, e) in kept.iter().enumerate() {
        incident.entry((Side::Right, e.lhs.0)).or_default().push(i);
        incident.entry((Side::Left, e.rhs.0)).or_default().push(i);
    }
    let mut dist = BTreeMap::from([(seed, 0u32)]);
    let mut queue = VecDeque::from([seed]);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if d == radius {
            continue;
        }
        for &i in incident.get(&v).into_iter().flatten() {
            let e = kept[i];
            let w = match v.0 {
                Side::Right => (Side::Left, e.rhs.0),
                Side::Left => (Side::Right, e.lhs.0),
            };
            if !dist.contains_key(&w) {
                dist.insert(w, d + 1);
                queue.push_back(w);
            }
        }
    }
    let inner: Vec<&AdjacencyEdge> = kept
        .into_iter()
        .filter(|e| dist.contains_key(&(Side::Right, e.lhs.0)) && dist.contains_key(&(Side::Left, e.rhs.0)))
        .collect();
    let mut watermark: BTreeMap<(Side, u32), u32> = dist.keys().map(|&v| (v, 0)).collect();
    for e in &inner {
        let a = watermark.get_mut(&(Side::Right, e.lhs.0)).unwrap();
        *a = (*a).max(e.lhs.1);
        let b = watermark.get_mut(&(Side::Left, e.rhs.0)).unwrap();
        *b = (*b).max(e.rhs.1);
    }
    let mut c = GluedComplex::new();
    let mut holes = BTreeMap::new();
    for (&(side, index), &w) in &watermark {
        let (_, circles) = c.add_piece(format!("{}{index}", side.symbol()), PieceKind::SigmaTruncation, w as usize + 1);
        holes.insert((side, index), circles);
    }
    for e in inner {
        let a = holes[&(Side::Right, e.lhs.0)][e.lhs.1 as usize];
        let b = holes[&(Side::Left, e.rhs.0)][e.rhs.1 as usize];
        c.glue(a, b)?;
    }
    Ok(c)
}

/// Truncation of a leaf meeting no tracked family: every boundary of every
/// piece within `radius` is glued to a fresh piece of the other block.
pub fn generic_leaf(seed_side: Side, radius: u32) -> GluedComplex {
    let mut c = GluedComplex::new();
    let mut counter: BTreeMap<Side, u32> = BTreeMap::new();
    let mut fresh = |c: &mut GluedComplex, side: Side, holes: u32| {
        let n = counter.entry(side).or_insert(0);
        *n += 1;
        c.add_piece(format!("{}g{n}", side.symbol()), PieceKind::SigmaTruncation, holes as usize + 1).1
    };
    // (side, circles, hop, first hole still to glue)
    let root = fresh(&mut c, seed_side, radius);
    let mut queue = VecDeque::from([(seed_side, root, 0u32, 1usize)]);
    while let Some((side, circles, hop, from)) = queue.pop_front() {
        if hop == radius {
            continue;
        }
        for j in from..circles.len() {
            let other = side.opposite();
            let grow = hop + 1 < radius;
            let child = fresh(&mut c, other, if grow { radius } else { 1 });
            c.glue(circles[j], child[1]).expect("fresh circles are free");
            queue.push_back((other, child, hop + 1, 2));
        }
    }
    c
}

/// Classifies a leaf from its truncations at increasing radius. Each end of
/// a glued leaf is seen from both blocks, so free boundaries count ends
/// twice.
pub fn classify_glued(records: &[TruncationRecord]) -> SurfaceTag {
    if records.len() < 2 || records.iter().any(|r| r.components != 1) {
        return SurfaceTag::Unresolved;
    }
    let strictly = |f: fn(&TruncationRecord) -> u64| records.windows(2).all(|w| f(&w[0]) < f(&w[1]));
    let b = records[0].free_boundary;
    let b_const = records.iter().all(|r| r.free_boundary == b);
    let g = records[0].genus;
    let g_const = records.iter().all(|r| r.genus == g);
    if g_const && g == 0 && strictly(|r| r.free_boundary) {
        SurfaceTag::CantorTree
    } else if strictly(|r| r.genus) && strictly(|r| r.free_boundary) {
        SurfaceTag::CantorTreeWithHandles
    } else if strictly(|r| r.genus) && b_const && b <= 2 {
        SurfaceTag::LochNess
    } else if strictly(|r| r.genus) && b_const && b <= 4 {
        SurfaceTag::JacobsLadder
    } else if g_const && b_const {
        SurfaceTag::FiniteType {
            genus: Count::Finite(g),
            ends: b.div_ceil(2),
            nonplanar_ends: None,
        }
    } else {
        SurfaceTag::Unresolved
    }
}

fn leaf_records(radius: u32, mut at: impl FnMut(u32) -> Result<GluedComplex>) -> Result<Vec<TruncationRecord>> {
    (1..=radius)
        .map(|r| TruncationRecord::from_complex(r as usize, &at(r)?))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedLeaf {
    pub side: Side,
    pub family: u32,
    pub tag: String,
    pub genus: u64,
    pub free_boundary: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub samples: u64,
    pub radius: u32,
    pub seed: u64,
    /// Tag counts over sampled transversal points.
    pub histogram: BTreeMap<String, u64>,
    /// Sampled points lying on a tracked orbit within the horizon.
    pub tracked_hits: u64,
    /// Largest genus seen among sampled truncations.
    pub max_sampled_genus: u64,
    pub tracked: Vec<TrackedLeaf>,
}

/// Samples transversal points from a seeded generator and classifies the
/// leaves through them. Points on a tracked orbit reconstruct that leaf;
/// all others give the generic model. Every tracked leaf is also classified
/// once. The sample is evidence about the generic leaf, not a proof of
/// genericity.
pub fn survey_generic(m: &GluedFoliationModel, samples: u64, radius: u32, seed: u64) -> Result<SurveyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SurveyReport {
        samples,
        radius,
        seed,
        histogram: BTreeMap::new(),
        tracked_hits: 0,
        max_sampled_genus: 0,
        tracked: Vec::new(),
    };
    let mut cache: BTreeMap<Option<(Side, u32)>, (String, u64)> = BTreeMap::new();
    for _ in 0..samples {
        let side = if rng.gen::<bool>() { Side::Right } else { Side::Left };
        let theta: u64 = rng.gen();
        let hit = m.block(side).locate(theta).map(|(id, _)| (side, id));
        report.tracked_hits += u64::from(hit.is_some());
        if !cache.contains_key(&hit) {
            let records = match hit {
                Some(s) => leaf_records(radius, |r| reconstruct_leaf(m, s, r))?,
                None => leaf_records(radius, |r| Ok(generic_leaf(side, r)))?,
            };
            let genus = records.iter().map(|r| r.genus).max().unwrap_or(0);
            cache.insert(hit, (classify_glued(&records).name().to_string(), genus));
        }
        let (tag, genus) = &cache[&hit];
        *report.histogram.entry(tag.clone()).or_default() += 1;
        report.max_sampled_genus = report.max_sampled_genus.max(*genus);
    }
    for side in [Side::Right, Side::Left] {
        for f in &m.block(side).leaf_families {
            let records = leaf_records(radius, |r| reconstruct_leaf(m, (side, f.id), r))?;
            let last = records.last();
            report.tracked.push(TrackedLeaf {
                side,
                family: f.id,
                tag: classify_glued(&records).name().to_string(),
                genus: last.map_or(0, |r| r.genus),
                free_boundary: last.map_or(0, |r| r.free_boundary),
            });
        }
    }
    Ok(report)
}
