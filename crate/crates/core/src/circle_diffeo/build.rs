use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::bump::circle_offset;
use super::chain::{BudgetEntry, DiffeoChain, MatchedPair, Pass};
use super::family::{DensePointFamily, DEFAULT_HORIZON};
use super::norm::{ck_norm_capped, MAX_ORDER, MIN_GRID};
use super::perturb::{backward, forward, Perturbation};
use crate::{Error, Result};

pub type Slot = (u32, u32);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub horizon: u64,
    pub max_order: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            horizon: DEFAULT_HORIZON,
            max_order: MAX_ORDER,
        }
    }
}

/// Back-and-forth construction of a circle map sending `x_{i,j}` to
/// `y_{δ(i,j)}` over the index rectangles `1..=n` for `n ≤ steps`.
pub fn build_matching_diffeo(
    xs: &[DensePointFamily],
    ys: &[DensePointFamily],
    delta: &BTreeMap<Slot, Slot>,
    steps: usize,
) -> Result<DiffeoChain> {
    build_matching_diffeo_with(xs, ys, delta, steps, &BuildConfig::default())
}

struct Side<'a> {
    families: BTreeMap<u32, &'a DensePointFamily>,
    used: BTreeMap<u32, BTreeSet<u64>>,
    chosen: BTreeMap<Slot, (f64, u64)>,
}

impl<'a> Side<'a> {
    fn new(families: &'a [DensePointFamily], what: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for f in families {
            if map.insert(f.id, f).is_some() {
                return Err(Error::InvalidParameter(format!("{what} family {} listed twice", f.id)));
            }
        }
        Ok(Side {
            families: map,
            used: BTreeMap::new(),
            chosen: BTreeMap::new(),
        })
    }

    fn family(&self, id: u32) -> Result<&'a DensePointFamily> {
        self.families
            .get(&id)
            .copied()
            .ok_or_else(|| Error::DanglingFamily(format!("no point family for piece {id}")))
    }

    fn first_unused(&self, id: u32) -> u64 {
        let used = self.used.get(&id);
        (0..).find(|j| used.map_or(true, |u| !u.contains(j))).unwrap()
    }

    fn take(&mut self, slot: Slot, point: f64, index: u64) {
        self.used.entry(slot.0).or_default().insert(index);
        self.chosen.insert(slot, (point, index));
    }
}

pub fn build_matching_diffeo_with(
    xs: &[DensePointFamily],
    ys: &[DensePointFamily],
    delta: &BTreeMap<Slot, Slot>,
    steps: usize,
    cfg: &BuildConfig,
) -> Result<DiffeoChain> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be positive".into()));
    }
    let mut inverse = BTreeMap::new();
    for (&a, &b) in delta {
        if let Some(prev) = inverse.insert(b, a) {
            return Err(Error::InvalidSchedule(format!(
                "δ sends {prev:?} and {a:?} to the same slot {b:?}"
            )));
        }
    }
    let mut xside = Side::new(xs, "▷")?;
    let mut yside = Side::new(ys, "◁")?;
    let first = *delta
        .get(&(1, 1))
        .ok_or_else(|| Error::InvalidSchedule("δ(1,1) undefined".into()))?;
    let (xf, yf) = (xside.family(1)?, yside.family(first.0)?);
    let (x0, y0) = (xf.point(0), yf.point(0));
    let mut chain = DiffeoChain::rotation(y0 - x0);
    xside.take((1, 1), x0, 0);
    yside.take(first, y0, 0);
    chain.matched_pairs.push(MatchedPair {
        lhs: (1, 1),
        rhs: first,
        x: x0,
        x_index: 0,
        y: y0,
        y_index: 0,
    });

    let mut k = 1usize;
    for n in 1..=steps as u32 {
        for pass in [Pass::Forward, Pass::Backward] {
            for i in 1..=n {
                for j in 1..=n {
                    let slot = (i, j);
                    let (lhs, rhs) = match pass {
                        Pass::Forward => match delta.get(&slot) {
                            Some(&r) if !xside.chosen.contains_key(&slot) => (slot, r),
                            _ => continue,
                        },
                        Pass::Backward => match inverse.get(&slot) {
                            Some(&l) if !yside.chosen.contains_key(&slot) => (l, slot),
                            _ => continue,
                        },
                    };
                    k += 1;
                    let order = k.min(cfg.max_order);
                    let bound = 1.0 / k as f64;
                    let images: Vec<f64> = chain.matched_pairs.iter().map(|p| p.y).collect();
                    let p: Perturbation = match pass {
                        Pass::Forward => {
                            let xf = xside.family(lhs.0)?;
                            let xi = xside.first_unused(lhs.0);
                            let yf = yside.family(rhs.0)?;
                            let used = yside.used.get(&rhs.0).cloned().unwrap_or_default();
                            let mut p = forward(&chain, xf.point(xi), yf, &images, &|j| used.contains(&j), bound, order, cfg.horizon)?;
                            p.x_index = Some(xi);
                            p
                        }
                        Pass::Backward => {
                            let yf = yside.family(rhs.0)?;
                            let yi = yside.first_unused(rhs.0);
                            let xf = xside.family(lhs.0)?;
                            let used = xside.used.get(&lhs.0).cloned().unwrap_or_default();
                            let mut p = backward(&chain, yf.point(yi), xf, &images, &|j| used.contains(&j), bound, order, cfg.horizon)?;
                            p.y_index = Some(yi);
                            p
                        }
                    };
                    let (xi, yi) = (p.x_index.unwrap(), p.y_index.unwrap());
                    xside.take(lhs, p.x, xi);
                    yside.take(rhs, p.y, yi);
                    let log = std::mem::take(&mut chain.budget_log);
                    let pairs = std::mem::take(&mut chain.matched_pairs);
                    chain = p.chain;
                    chain.budget_log = log;
                    chain.matched_pairs = pairs;
                    chain.matched_pairs.push(MatchedPair {
                        lhs,
                        rhs,
                        x: p.x,
                        x_index: xi,
                        y: p.y,
                        y_index: yi,
                    });
                    chain.budget_log.push(BudgetEntry {
                        step: k,
                        order,
                        estimate: p.estimate,
                        bound,
                        ok: p.estimate < bound,
                        snapped: p.snapped,
                        pass,
                        lhs,
                        rhs,
                        radius: p.radius,
                        factor_count: chain.factors.len(),
                    });
                }
            }
        }
    }
    Ok(chain)
}

/// Whether the realized point map is a well-defined injection between
/// `(family, index)` labels.
pub fn injectivity_check(chain: &DiffeoChain) -> bool {
    let mut xs = BTreeSet::new();
    let mut ys = BTreeSet::new();
    chain
        .matched_pairs
        .iter()
        .all(|p| xs.insert((p.lhs.0, p.x_index)) && ys.insert((p.rhs.0, p.y_index)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub order: usize,
    pub p: usize,
    pub q: usize,
    pub estimate: f64,
    /// `Σ_{q<k≤p} 1/k`.
    pub tail_bound: f64,
    pub ok: bool,
}

/// Compares `‖f_p − f_q‖_m` with the budget tail for a few step pairs
/// `p > q > m` and each `m ≤ max_order`.
pub fn cauchy_check(chain: &DiffeoChain, max_order: usize) -> Result<Vec<CauchyRow>> {
    let mut factor_counts = BTreeMap::from([(1usize, 0usize)]);
    for e in &chain.budget_log {
        factor_counts.insert(e.step, e.factor_count);
    }
    let last = *factor_counts.keys().next_back().unwrap();
    let mut rows = Vec::new();
    for m in 0..=max_order.min(MAX_ORDER) {
        let q0 = m + 1;
        if q0 >= last {
            continue;
        }
        let mid = (q0 + last) / 2;
        let mut pairs = vec![(last, q0), (mid, q0), (last, mid)];
        pairs.retain(|&(p, q)| p > q);
        pairs.dedup();
        for (p, q) in pairs {
            let fp = chain.prefix(factor_counts[&p]);
            let fq = chain.prefix(factor_counts[&q]);
            let estimate = ck_norm_capped(&fq, &fp, m, MIN_GRID << 2, 1 << 20)?.value;
            let tail_bound: f64 = (q + 1..=p).map(|k| 1.0 / k as f64).sum();
            rows.push(CauchyRow {
                order: m,
                p,
                q,
                estimate,
                tail_bound,
                ok: estimate <= tail_bound,
            });
        }
    }
    Ok(rows)
}

/// Largest circle distance by which any matched pair is missed.
pub fn pair_errors(chain: &DiffeoChain) -> Vec<f64> {
    chain
        .matched_pairs
        .iter()
        .map(|p| circle_offset(chain.eval(p.x), p.y).abs())
        .collect()
}
