use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tree_codec::{
    decompose_branches, unroll_with_cap, AutomatonAnalysis, Side, TreeAutomaton, DEFAULT_DEPTH_CAP,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "root0")]
    Root0,
    #[serde(rename = "root1")]
    Root1,
    #[serde(rename = "deg3-0")]
    Deg3Plain,
    #[serde(rename = "deg3-1")]
    Deg3Handle,
    #[serde(rename = "deg2-handle")]
    Deg2Handle,
    #[serde(rename = "isolated-end")]
    IsolatedEnd,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::Root0 => "root0",
            CaseTag::Root1 => "root1",
            CaseTag::Deg3Plain => "deg3-0",
            CaseTag::Deg3Handle => "deg3-1",
            CaseTag::Deg2Handle => "deg2-handle",
            CaseTag::IsolatedEnd => "isolated-end",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One identification `B^▷_{lhs_index}(lhs_piece) ~ B^◁_{rhs_index}(rhs_piece)`.
/// Piece ids are numbered from 1 within each family; boundary indices are
/// 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub step: usize,
    pub case: CaseTag,
    pub lhs_piece: u32,
    pub lhs_index: u32,
    pub rhs_piece: u32,
    pub rhs_index: u32,
}

impl ScheduleEntry {
    pub fn slot(&self, side: Side) -> (u32, u32) {
        match side {
            Side::Right => (self.lhs_piece, self.lhs_index),
            Side::Left => (self.rhs_piece, self.rhs_index),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PieceOrigin {
    /// The piece of the branch starting at the vertex with this path word.
    Branch { vertex: String },
    /// The piece of the isolated end reached by the branch from `vertex`.
    IsolatedEnd { vertex: String, branch_side: Side },
    /// Read back from an exported schedule.
    Imported,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaPiece {
    pub side: Side,
    pub index: u32,
    pub origin: PieceOrigin,
}

impl SigmaPiece {
    pub fn label(&self) -> String {
        format!("{}{}", self.side.symbol(), self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingSchedule {
    pub depth: usize,
    pub pieces: Vec<SigmaPiece>,
    pub entries: Vec<ScheduleEntry>,
}

impl GluingSchedule {
    /// The partial bijection δ as a map.
    pub fn delta(&self) -> BTreeMap<(u32, u32), (u32, u32)> {
        self.entries
            .iter()
            .map(|e| (e.slot(Side::Right), e.slot(Side::Left)))
            .collect()
    }

    /// Highest boundary index consumed on a piece.
    pub fn watermark(&self, side: Side, piece: u32) -> u32 {
        self.entries
            .iter()
            .map(|e| e.slot(side))
            .filter(|&(p, _)| p == piece)
            .map(|(_, j)| j)
            .max()
            .unwrap_or(0)
    }

    pub fn piece(&self, side: Side, index: u32) -> Option<&SigmaPiece> {
        self.pieces.iter().find(|p| p.side == side && p.index == index)
    }

    /// Checks injectivity of δ, that indices are positive and that each
    /// piece's consumed indices form an initial segment `1..=watermark`.
    pub fn validate(&self) -> Result<()> {
        for side in [Side::Right, Side::Left] {
            let mut used: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
            for e in &self.entries {
                let (p, j) = e.slot(side);
                if p == 0 || j == 0 {
                    return Err(Error::InvalidSchedule(format!("zero piece or index in step {}", e.step)));
                }
                if !used.entry(p).or_default().insert(j) {
                    return Err(Error::InvalidSchedule(format!(
                        "boundary {j} of piece {}{p} used twice",
                        side.symbol()
                    )));
                }
            }
            for (p, js) in used {
                if js.iter().copied().ne(1..=js.len() as u32) {
                    return Err(Error::InvalidSchedule(format!(
                        "consumed boundaries of {}{p} are not an initial segment",
                        side.symbol()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Keeps the entries satisfying `keep`, dropping pieces left unused
    /// except the two root pieces.
    pub fn restrict(&self, keep: impl Fn(&ScheduleEntry) -> bool) -> GluingSchedule {
        let entries: Vec<ScheduleEntry> = self.entries.iter().copied().filter(|e| keep(e)).collect();
        let used: BTreeSet<(Side, u32)> = entries
            .iter()
            .flat_map(|e| [(Side::Right, e.lhs_piece), (Side::Left, e.rhs_piece)])
            .collect();
        GluingSchedule {
            depth: self.depth,
            pieces: self
                .pieces
                .iter()
                .filter(|p| p.index == 1 || used.contains(&(p.side, p.index)))
                .cloned()
                .collect(),
            entries,
        }
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entries serialize"));
            out.push('\n');
        }
        out
    }

    /// Reads entries exported by [`GluingSchedule::to_jsonl`]. Piece
    /// provenance is not part of the format.
    pub fn from_jsonl(text: &str) -> Result<GluingSchedule> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e: ScheduleEntry = serde_json::from_str(line).map_err(|err| Error::Syntax {
                line: i + 1,
                column: err.column(),
                message: err.to_string(),
            })?;
            entries.push(e);
        }
        let mut ids: BTreeSet<(Side, u32)> = [(Side::Right, 1), (Side::Left, 1)].into();
        for e in &entries {
            ids.insert((Side::Right, e.lhs_piece));
            ids.insert((Side::Left, e.rhs_piece));
        }
        let s = GluingSchedule {
            depth: entries.iter().map(|e| e.step).max().unwrap_or(0),
            pieces: ids
                .into_iter()
                .map(|(side, index)| SigmaPiece {
                    side,
                    index,
                    origin: PieceOrigin::Imported,
                })
                .collect(),
            entries,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Scheduler state: pieces per family with their consumed watermarks.
struct Builder {
    pieces: Vec<SigmaPiece>,
    watermarks: BTreeMap<(Side, u32), u32>,
    /// Partner slot of every consumed boundary.
    partner: BTreeMap<(Side, u32, u32), (u32, u32)>,
    entries: Vec<ScheduleEntry>,
    next_index: [u32; 2],
}

fn fam(side: Side) -> usize {
    match side {
        Side::Right => 0,
        Side::Left => 1,
    }
}

impl Builder {
    fn new() -> Self {
        Builder {
            pieces: Vec::new(),
            watermarks: BTreeMap::new(),
            partner: BTreeMap::new(),
            entries: Vec::new(),
            next_index: [1, 1],
        }
    }

    fn open(&mut self, side: Side, origin: PieceOrigin) -> u32 {
        let index = self.next_index[fam(side)];
        self.next_index[fam(side)] += 1;
        self.pieces.push(SigmaPiece { side, index, origin });
        self.watermarks.insert((side, index), 0);
        index
    }

    /// Next unattached boundary of a piece, `n` in the usual notation.
    fn first_free(&self, side: Side, piece: u32) -> u32 {
        self.watermarks[&(side, piece)] + 1
    }

    /// Attaches the first free boundaries of two pieces on opposite sides.
    fn attach(&mut self, step: usize, case: CaseTag, a: (Side, u32), b: (Side, u32)) {
        debug_assert_ne!(a.0, b.0);
        let (r, l) = if a.0 == Side::Right { (a.1, b.1) } else { (b.1, a.1) };
        let rj = self.first_free(Side::Right, r);
        let lj = self.first_free(Side::Left, l);
        self.watermarks.insert((Side::Right, r), rj);
        self.watermarks.insert((Side::Left, l), lj);
        self.partner.insert((Side::Right, r, rj), (l, lj));
        self.partner.insert((Side::Left, l, lj), (r, rj));
        self.entries.push(ScheduleEntry {
            step,
            case,
            lhs_piece: r,
            lhs_index: rj,
            rhs_piece: l,
            rhs_index: lj,
        });
    }

    fn finish(self, depth: usize) -> GluingSchedule {
        GluingSchedule {
            depth,
            pieces: self.pieces,
            entries: self.entries,
        }
    }
}

/// Runs the inductive construction of the boundary bijection up to tree
/// level `depth`, using the default depth cap.
pub fn schedule_gluing(aut: &TreeAutomaton, depth: usize) -> Result<GluingSchedule> {
    schedule_gluing_with_cap(aut, depth, DEFAULT_DEPTH_CAP)
}

pub fn schedule_gluing_with_cap(aut: &TreeAutomaton, depth: usize, cap: usize) -> Result<GluingSchedule> {
    let an = AutomatonAnalysis::new(aut);
    if let Some(cycle) = an.star_witness() {
        return Err(Error::StarViolated {
            witness: cycle.into_iter().map(|s| aut.name(s).to_string()).collect(),
        });
    }
    if depth > cap {
        return Err(Error::DepthCap { requested: depth, cap });
    }
    let mut b = Builder::new();
    let root_case = if aut.color(aut.start()) == 1 { CaseTag::Root1 } else { CaseTag::Root0 };
    let r = b.open(Side::Right, PieceOrigin::Branch { vertex: "ε".into() });
    let l = b.open(Side::Left, PieceOrigin::Branch { vertex: "ε".into() });
    b.attach(0, root_case, (Side::Right, r), (Side::Left, l));
    if root_case == CaseTag::Root1 {
        b.attach(0, root_case, (Side::Right, r), (Side::Left, l));
    }

    if an.single_end(aut.start()) {
        // One end: the two root pieces glued index by index, one extra pair
        // per handle.
        let mut s = aut.start();
        for k in 1..=depth {
            s = aut.children(s)[0].1;
            if aut.color(s) == 1 {
                b.attach(k, CaseTag::Deg2Handle, (Side::Right, r), (Side::Left, l));
            }
        }
        return Ok(b.finish(depth));
    }

    let tree = unroll_with_cap(aut, depth, cap)?;
    let branches = decompose_branches(&tree)?;
    // Piece of the branch with a given origin vertex and side.
    let mut branch_piece: BTreeMap<(usize, Side), u32> = BTreeMap::new();
    branch_piece.insert((tree.root, Side::Right), r);
    branch_piece.insert((tree.root, Side::Left), l);
    let mut end_piece: BTreeMap<(usize, Side), u32> = BTreeMap::new();

    for k in 1..=depth {
        let mut level: Vec<usize> = tree.vertices_at(k).map(|v| v.id).collect();
        level.sort_by(|&x, &y| {
            let (vx, vy) = (&tree.vertices[x], &tree.vertices[y]);
            (vx.state, &vx.word).cmp(&(vy.state, &vy.word))
        });
        for v in level {
            let vert = &tree.vertices[v];
            let branch = branches
                .branch_through(&tree, v)
                .expect("non-root vertices lie on a branch");
            let bullet = branch.side;
            let p = branch_piece[&(branch.origin, bullet)];
            match (vert.out_degree, vert.color) {
                (2, color) => {
                    let q = b.open(
                        bullet.opposite(),
                        PieceOrigin::Branch {
                            vertex: tree.word_string(v),
                        },
                    );
                    branch_piece.insert((v, bullet.opposite()), q);
                    let case = if color == 1 { CaseTag::Deg3Handle } else { CaseTag::Deg3Plain };
                    b.attach(k, case, (bullet, p), (bullet.opposite(), q));
                    if color == 1 {
                        b.attach(k, case, (bullet, p), (bullet.opposite(), q));
                    }
                }
                (_, 0) => {}
                _ if !an.single_end(vert.state) => {
                    // Handle towards the piece holding the previous attachment
                    // of this branch piece. Every branch piece consumes its
                    // first boundary when it is opened, so that attachment
                    // always exists.
                    let prev = b.first_free(bullet, p) - 1;
                    let (w, _) = b.partner[&(bullet, p, prev)];
                    b.attach(k, CaseTag::Deg2Handle, (bullet, p), (bullet.opposite(), w));
                }
                _ => {
                    let key = (branch.origin, bullet);
                    let e = match end_piece.get(&key) {
                        Some(&e) => e,
                        None => {
                            let e = b.open(
                                bullet.opposite(),
                                PieceOrigin::IsolatedEnd {
                                    vertex: tree.word_string(branch.origin),
                                    branch_side: bullet,
                                },
                            );
                            end_piece.insert(key, e);
                            // Opening with two attachments creates the handle
                            // of this vertex right away.
                            b.attach(k, CaseTag::IsolatedEnd, (bullet, p), (bullet.opposite(), e));
                            e
                        }
                    };
                    b.attach(k, CaseTag::IsolatedEnd, (bullet, p), (bullet.opposite(), e));
                }
            }
        }
    }
    Ok(b.finish(depth))
}
