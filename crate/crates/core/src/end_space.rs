//! Finite-resolution classification of codings against the named surface
//! types.
//!
//! End counts, isolation and genus are decided exactly from the cycle
//! structure of the automaton. Per-depth evidence (end classes at each
//! resolution and the genus of each truncation) is reported alongside, and a
//! named tag is only issued when that evidence at the deepest tested level
//! shows the tag's signature.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus;
use crate::surface_assembly::{GluedComplex, PieceKind};
use crate::tree_codec::{end_summary, level_state_counts, AutomatonAnalysis, Count, TreeAutomaton};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum SurfaceTag {
    Plane,
    Cylinder,
    LochNess,
    JacobsLadder,
    CantorTree,
    CantorTreeWithHandles,
    FiniteType {
        genus: Count,
        ends: u64,
        nonplanar_ends: Option<u64>,
    },
    Unresolved,
}

impl SurfaceTag {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceTag::Plane => "plane",
            SurfaceTag::Cylinder => "cylinder",
            SurfaceTag::LochNess => "loch_ness",
            SurfaceTag::JacobsLadder => "jacobs_ladder",
            SurfaceTag::CantorTree => "cantor_tree",
            SurfaceTag::CantorTreeWithHandles => "cantor_tree_with_handles",
            SurfaceTag::FiniteType { .. } => "finite_type",
            SurfaceTag::Unresolved => "unresolved",
        }
    }

    /// The type obtained by adding a handle at every vertex piece.
    pub fn with_handles(&self) -> SurfaceTag {
        match self {
            SurfaceTag::Plane => SurfaceTag::LochNess,
            SurfaceTag::Cylinder => SurfaceTag::JacobsLadder,
            SurfaceTag::CantorTree => SurfaceTag::CantorTreeWithHandles,
            SurfaceTag::LochNess | SurfaceTag::JacobsLadder | SurfaceTag::CantorTreeWithHandles => self.clone(),
            SurfaceTag::FiniteType { .. } | SurfaceTag::Unresolved => SurfaceTag::Unresolved,
        }
    }
}

impl fmt::Display for SurfaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceTag::FiniteType {
                genus,
                ends,
                nonplanar_ends,
            } => {
                write!(f, "finite_type(genus {genus}, {ends} ends")?;
                if let Some(n) = nonplanar_ends {
                    write!(f, ", {n} nonplanar")?;
                }
                f.write_str(")")
            }
            other => f.write_str(other.name()),
        }
    }
}

/// Invariants of the coding visible at one depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceRow {
    pub depth: usize,
    pub end_classes: u64,
    pub isolated_classes: u64,
    pub genus_accumulating_classes: u64,
    /// Genus of the depth-`depth` truncation: 1-colored vertices so far.
    pub truncation_genus: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceClass {
    pub tag: SurfaceTag,
    pub ends: Count,
    pub isolated_ends: Count,
    pub genus: Count,
    pub star: bool,
    pub star_star: bool,
    pub evidence: Vec<EvidenceRow>,
    pub note: Option<String>,
}

pub fn evidence(aut: &TreeAutomaton, max_depth: usize) -> Result<Vec<EvidenceRow>> {
    let mut rows = Vec::with_capacity(max_depth);
    let mut genus = u64::from(aut.color(aut.start()));
    for depth in 1..=max_depth {
        let counts = level_state_counts(aut, depth);
        genus = counts
            .iter()
            .enumerate()
            .filter(|&(s, _)| aut.color(s) == 1)
            .fold(genus, |g, (_, &c)| g.saturating_add(c));
        let s = end_summary(aut, depth)?;
        rows.push(EvidenceRow {
            depth,
            end_classes: s.end_classes,
            isolated_classes: s.isolated_classes,
            genus_accumulating_classes: s.genus_accumulating_classes,
            truncation_genus: genus,
        });
    }
    Ok(rows)
}

/// Tag from exact automaton-level invariants alone.
fn generic_tag(an: &AutomatonAnalysis<'_>) -> SurfaceTag {
    let genus = an.genus();
    match an.ends() {
        Count::Finite(1) => match genus {
            Count::Finite(0) => SurfaceTag::Plane,
            Count::Infinite => SurfaceTag::LochNess,
            g => SurfaceTag::FiniteType {
                genus: g,
                ends: 1,
                nonplanar_ends: an.nonplanar_ends(),
            },
        },
        Count::Finite(2) if genus == Count::Finite(0) => SurfaceTag::Cylinder,
        Count::Finite(2) if an.nonplanar_ends() == Some(2) => SurfaceTag::JacobsLadder,
        Count::Finite(n) => SurfaceTag::FiniteType {
            genus,
            ends: n,
            nonplanar_ends: an.nonplanar_ends(),
        },
        Count::Infinite if an.perfect() && genus == Count::Finite(0) => SurfaceTag::CantorTree,
        Count::Infinite if an.perfect() && an.star_star() => SurfaceTag::CantorTreeWithHandles,
        Count::Infinite => SurfaceTag::Unresolved,
    }
}

/// Checks the deepest evidence against the tag's signature; returns why it
/// fails, if it does.
fn evidence_mismatch(tag: &SurfaceTag, rows: &[EvidenceRow]) -> Option<String> {
    let last = rows.last()?;
    let half = &rows[(rows.len() - 1) / 2];
    let genus_grows = last.truncation_genus > half.truncation_genus;
    let classes_grow = last.end_classes > half.end_classes;
    let flat_genus = rows.iter().all(|r| r.truncation_genus == 0);
    let (ok, want) = match tag {
        SurfaceTag::Plane => (last.end_classes == 1 && flat_genus, "1 end class and no genus"),
        SurfaceTag::Cylinder => (
            last.end_classes == 2 && last.isolated_classes == 2 && flat_genus,
            "2 isolated end classes and no genus",
        ),
        SurfaceTag::LochNess => (last.end_classes == 1 && genus_grows, "1 end class with growing genus"),
        SurfaceTag::JacobsLadder => (
            last.end_classes == 2 && last.isolated_classes == 2 && genus_grows,
            "2 isolated end classes with growing genus",
        ),
        SurfaceTag::CantorTree => (classes_grow && flat_genus, "growing end classes and no genus"),
        SurfaceTag::CantorTreeWithHandles => (
            classes_grow && genus_grows && last.genus_accumulating_classes == last.end_classes,
            "growing end classes, all accumulated by genus",
        ),
        SurfaceTag::FiniteType { ends, .. } => (last.end_classes == *ends, "stabilized end count"),
        SurfaceTag::Unresolved => (true, ""),
    };
    (!ok).then(|| format!("evidence up to depth {} does not yet show {want}", last.depth))
}

/// Classifies a coding; evidence covers depths `1..=max_depth`.
pub fn classify(aut: &TreeAutomaton, max_depth: usize) -> Result<SurfaceClass> {
    if max_depth < 2 {
        return Err(Error::InvalidParameter("max_depth must be at least 2".into()));
    }
    let an = AutomatonAnalysis::new(aut);
    let rows = evidence(aut, max_depth)?;
    let mut tag = generic_tag(&an);
    let mut note = None;
    if let Some(why) = evidence_mismatch(&tag, &rows) {
        note = Some(format!("{tag}: {why}"));
        tag = SurfaceTag::Unresolved;
    } else if tag == SurfaceTag::Unresolved {
        note = Some("infinitely many ends that are not all alike".into());
    }
    Ok(SurfaceClass {
        tag,
        ends: an.ends(),
        isolated_ends: an.isolated_ends(),
        genus: an.genus(),
        star: an.star(),
        star_star: an.star_star(),
        evidence: rows,
        note,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    EqualAtResolution,
    Distinct,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub verdict: Verdict,
    pub resolution: usize,
    /// Invariants that differ, each with both values.
    pub differences: Vec<String>,
}

fn exact_invariants(aut: &TreeAutomaton) -> BTreeMap<&'static str, String> {
    let an = AutomatonAnalysis::new(aut);
    BTreeMap::from([
        ("ends", an.ends().to_string()),
        ("isolated_ends", an.isolated_ends().to_string()),
        ("genus", an.genus().to_string()),
        ("nonplanar_ends", format!("{:?}", an.nonplanar_ends())),
        ("perfect", an.perfect().to_string()),
        ("star", an.star().to_string()),
        ("star_star", an.star_star().to_string()),
    ])
}

/// Compares two codings. Exact end and genus invariants can separate them;
/// per-depth signatures depend on the coding, so a mismatch there alone is
/// inconclusive.
pub fn compare(a: &TreeAutomaton, b: &TreeAutomaton, resolution: usize) -> Result<Comparison> {
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be at least 1".into()));
    }
    let (ia, ib) = (exact_invariants(a), exact_invariants(b));
    let mut differences: Vec<String> = ia
        .iter()
        .filter(|(k, v)| ib[*k] != **v)
        .map(|(k, v)| format!("{k}: {v} vs {}", ib[k]))
        .collect();
    if !differences.is_empty() {
        return Ok(Comparison {
            verdict: Verdict::Distinct,
            resolution,
            differences,
        });
    }
    let (ea, eb) = (evidence(a, resolution)?, evidence(b, resolution)?);
    for (ra, rb) in ea.iter().zip(&eb) {
        if ra != rb {
            differences.push(format!("depth {} signature: {ra:?} vs {rb:?}", ra.depth));
        }
    }
    Ok(Comparison {
        verdict: if differences.is_empty() {
            Verdict::EqualAtResolution
        } else {
            Verdict::Inconclusive
        },
        resolution,
        differences,
    })
}

/// Invariants of one truncation, as fed to [`classify_truncations`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationRecord {
    pub depth: usize,
    pub components: usize,
    pub genus: u64,
    pub free_boundary: u64,
    /// Pieces other than one-holed tori capping a circle of another piece.
    pub core_pieces: usize,
    /// Core pieces that are tori or carry such a cap.
    pub genus_bearing_pieces: usize,
}

impl TruncationRecord {
    pub fn from_complex(depth: usize, c: &GluedComplex) -> Result<Self> {
        let inv = c.invariants()?;
        let owners = c.circle_owners()?;
        let mut partner = BTreeMap::new();
        for &(a, b) in &c.gluings {
            partner.insert(a, owners[&b]);
            partner.insert(b, owners[&a]);
        }
        let is_cap = |i: usize| {
            let p = &c.pieces[i];
            p.kind == PieceKind::TorusMinusDisks
                && p.boundary_circles.len() == 1
                && partner.get(&p.boundary_circles[0]).is_some_and(|&q| c.pieces[q].boundary_circles.len() > 1)
        };
        let mut core = 0;
        let mut bearing = 0;
        for (i, p) in c.pieces.iter().enumerate() {
            if is_cap(i) {
                continue;
            }
            core += 1;
            let capped = p.boundary_circles.iter().any(|x| partner.get(x).is_some_and(|&q| is_cap(q)));
            if p.kind == PieceKind::TorusMinusDisks || capped {
                bearing += 1;
            }
        }
        Ok(TruncationRecord {
            depth,
            components: inv.component_count,
            genus: inv.genus,
            free_boundary: inv.boundary_count,
            core_pieces: core,
            genus_bearing_pieces: bearing,
        })
    }
}

/// Classifies a sequence of tree truncations at increasing depths by the
/// growth of their genus and free boundary.
pub fn classify_truncations(records: &[TruncationRecord]) -> SurfaceTag {
    if records.len() < 2 || records.iter().any(|r| r.components != 1) {
        return SurfaceTag::Unresolved;
    }
    let strictly = |f: fn(&TruncationRecord) -> u64| records.windows(2).all(|w| f(&w[0]) < f(&w[1]));
    let constant = |f: fn(&TruncationRecord) -> u64, v: u64| records.iter().all(|r| f(r) == v);
    let boundary_grows = strictly(|r| r.free_boundary);
    let b0 = records[0].free_boundary;
    if constant(|r| r.genus, 0) {
        if boundary_grows {
            SurfaceTag::CantorTree
        } else if constant(|r| r.free_boundary, 1) {
            SurfaceTag::Plane
        } else if constant(|r| r.free_boundary, 2) {
            SurfaceTag::Cylinder
        } else {
            SurfaceTag::Unresolved
        }
    } else if strictly(|r| r.genus) {
        if boundary_grows && records.iter().all(|r| r.genus_bearing_pieces == r.core_pieces) {
            SurfaceTag::CantorTreeWithHandles
        } else if constant(|r| r.free_boundary, 1) {
            SurfaceTag::LochNess
        } else if constant(|r| r.free_boundary, 2) {
            SurfaceTag::JacobsLadder
        } else {
            SurfaceTag::Unresolved
        }
    } else if constant(|r| r.genus, records[0].genus) && constant(|r| r.free_boundary, b0) {
        SurfaceTag::FiniteType {
            genus: Count::Finite(records[0].genus),
            ends: b0,
            nonplanar_ends: None,
        }
    } else {
        SurfaceTag::Unresolved
    }
}

/// The leaf-topology column of the table of realizable leaves, indexed by
/// the generic leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafRequirement {
    NoConditions,
    Star,
    StarStar,
    JacobsLadderOrLochNess,
    /// The generic leaf does not appear in the table.
    NotTabulated,
}

impl LeafRequirement {
    pub fn label(self) -> &'static str {
        match self {
            LeafRequirement::NoConditions => "No Conditions",
            LeafRequirement::Star => "Condition (★)",
            LeafRequirement::StarStar => "Condition (★★)",
            LeafRequirement::JacobsLadderOrLochNess => "Jacob's Ladder or Loch Ness Monster",
            LeafRequirement::NotTabulated => "not tabulated",
        }
    }
}

pub fn leaf_requirement(generic: &SurfaceTag) -> LeafRequirement {
    match generic {
        SurfaceTag::Plane => LeafRequirement::NoConditions,
        SurfaceTag::CantorTree => LeafRequirement::Star,
        SurfaceTag::LochNess | SurfaceTag::CantorTreeWithHandles => LeafRequirement::StarStar,
        SurfaceTag::JacobsLadder => LeafRequirement::JacobsLadderOrLochNess,
        _ => LeafRequirement::NotTabulated,
    }
}

/// Whether `leaf` may occur as a leaf when the generic leaf has type
/// `generic`; `None` when the table says nothing.
pub fn leaf_admissible(generic: &SurfaceTag, leaf: &TreeAutomaton, max_depth: usize) -> Result<Option<bool>> {
    let an = AutomatonAnalysis::new(leaf);
    Ok(match leaf_requirement(generic) {
        LeafRequirement::NoConditions => Some(true),
        LeafRequirement::Star => Some(an.star()),
        LeafRequirement::StarStar => Some(an.star_star()),
        LeafRequirement::JacobsLadderOrLochNess => Some(matches!(
            classify(leaf, max_depth)?.tag,
            SurfaceTag::JacobsLadder | SurfaceTag::LochNess
        )),
        LeafRequirement::NotTabulated => None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Row {
    pub coding: String,
    pub tag: SurfaceTag,
    pub star: bool,
    pub star_star: bool,
    pub requirement: LeafRequirement,
    /// Whether the generic leaf itself meets its row's requirement.
    pub self_admissible: Option<bool>,
}

/// Runs classification and the condition deciders over the named codings.
pub fn table1_matrix(max_depth: usize) -> Result<Vec<Table1Row>> {
    corpus::named()
        .into_iter()
        .map(|(name, aut)| {
            let class = classify(&aut, max_depth)?;
            Ok(Table1Row {
                coding: name.to_string(),
                requirement: leaf_requirement(&class.tag),
                self_admissible: leaf_admissible(&class.tag, &aut, max_depth)?,
                tag: class.tag,
                star: class.star,
                star_star: class.star_star,
            })
        })
        .collect()
}
