use serde::{Deserialize, Serialize};

use super::bump::circle_offset;
use super::chain::DiffeoChain;
use crate::{Error, Result};

pub const MAX_ORDER: usize = 6;
pub const MIN_GRID: u64 = 1 << 12;
/// Grid points per support radius when the grid is refined locally.
const POINTS_PER_RADIUS: f64 = 256.0;
const DEFAULT_MAX_GRID: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// Maximum over orders `0..=k`.
    pub value: f64,
    /// Sup norm of the difference of order-`m` derivatives, per `m`.
    pub per_order: Vec<f64>,
    pub grid_size: u64,
    pub step: f64,
}

/// Finite-difference estimate of the `C^k` distance between two chains.
///
/// The difference is formed from displacements rather than by subtracting
/// two evaluations, so it keeps relative precision when the chains differ by
/// a tiny perturbation. When the rotations agree only the preimage of the
/// supports of non-shared factors is sampled, on a grid refined to resolve
/// the narrowest of those supports. The estimate is not a certified bound.
pub fn ck_norm_estimate(a: &DiffeoChain, b: &DiffeoChain, k: usize, grid_size: u64) -> Result<NormEstimate> {
    ck_norm_capped(a, b, k, grid_size, DEFAULT_MAX_GRID)
}

pub(crate) fn ck_norm_capped(
    a: &DiffeoChain,
    b: &DiffeoChain,
    k: usize,
    grid_size: u64,
    max_grid: u64,
) -> Result<NormEstimate> {
    if k > MAX_ORDER {
        return Err(Error::InvalidParameter(format!("order {k} exceeds the cap {MAX_ORDER}")));
    }
    if grid_size < MIN_GRID {
        return Err(Error::InvalidParameter(format!("grid size {grid_size} below {MIN_GRID}")));
    }
    let same_rotation = a.rotation == b.rotation;
    let shared = if same_rotation {
        a.factors.iter().zip(&b.factors).take_while(|(x, y)| x == y).count()
    } else {
        0
    };
    let prefix = a.prefix(shared);
    let (ta, tb) = (&a.factors[shared..], &b.factors[shared..]);
    let rot = if same_rotation {
        0.0
    } else {
        circle_offset(a.rotation, b.rotation)
    };
    // Difference at x: rotation gap plus the displacement sums of both tails.
    let diff = |x: f64| {
        let y0 = if same_rotation { prefix.lift(x) } else { x };
        let mut da = if same_rotation { 0.0 } else { a.rotation };
        for f in ta {
            da += f.displacement(y0 + da);
        }
        let mut db = if same_rotation { 0.0 } else { b.rotation };
        for f in tb {
            db += f.displacement(y0 + db);
        }
        if same_rotation {
            da - db
        } else {
            // Keep the rotation gap in (−1/2, 1/2].
            rot + (da - a.rotation) - (db - b.rotation)
        }
    };

    if same_rotation && ta.is_empty() && tb.is_empty() {
        return Ok(NormEstimate {
            value: 0.0,
            per_order: vec![0.0; k + 1],
            grid_size,
            step: 1.0 / grid_size as f64,
        });
    }

    if !same_rotation {
        return Ok(periodic(&diff, k, grid_size));
    }

    let r_min = ta.iter().chain(tb).map(|f| f.radius).fold(f64::INFINITY, f64::min);
    let wanted = (POINTS_PER_RADIUS / r_min).ceil().min(max_grid as f64) as u64;
    let n = grid_size.max(wanted.next_power_of_two()).min(max_grid.max(grid_size));
    let pad = 2 * k as i64 + 2;
    let mut ranges: Vec<(i64, i64)> = Vec::new();
    for f in ta.iter().chain(tb) {
        let lo = prefix.inverse(f.center - f.radius);
        let hi = prefix.inverse(f.center + f.radius);
        let mut s = (lo * n as f64).floor() as i64 - pad;
        let mut e = (hi * n as f64).ceil() as i64 + pad;
        if hi < lo {
            e += n as i64;
        }
        if e - s >= n as i64 {
            s = 0;
            e = n as i64;
        }
        ranges.push((s.rem_euclid(n as i64), s.rem_euclid(n as i64) + (e - s)));
    }
    let covered: i64 = ranges.iter().map(|(s, e)| e - s).sum();
    if covered * 2 >= n as i64 {
        return Ok(periodic(&diff, k, n));
    }
    // Split at the seam and merge.
    let mut pieces: Vec<(i64, i64)> = Vec::new();
    for (s, e) in ranges {
        if e > n as i64 {
            pieces.push((s, n as i64));
            pieces.push((0, e - n as i64));
        } else {
            pieces.push((s, e));
        }
    }
    pieces.sort_unstable();
    let mut merged: Vec<(i64, i64)> = Vec::new();
    for (s, e) in pieces {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    let h = 1.0 / n as f64;
    let mut per_order = vec![0.0f64; k + 1];
    for (s, e) in merged {
        // Extend across the seam with true values; D vanishes beyond the pads.
        let mut vals: Vec<f64> = (s - pad..e + pad)
            .map(|i| diff(i.rem_euclid(n as i64) as f64 * h))
            .collect();
        for (m, slot) in per_order.iter_mut().enumerate() {
            if m > 0 {
                vals = vals.windows(3).map(|w| (w[2] - w[0]) / (2.0 * h)).collect();
            }
            *slot = vals.iter().fold(*slot, |acc, v| acc.max(v.abs()));
        }
    }
    Ok(NormEstimate {
        value: per_order.iter().copied().fold(0.0, f64::max),
        per_order,
        grid_size: n,
        step: h,
    })
}

fn periodic(diff: &dyn Fn(f64) -> f64, k: usize, n: u64) -> NormEstimate {
    let h = 1.0 / n as f64;
    let len = n as usize;
    let mut vals: Vec<f64> = (0..len).map(|i| diff(i as f64 * h)).collect();
    let mut per_order = Vec::with_capacity(k + 1);
    for m in 0..=k {
        if m > 0 {
            vals = (0..len)
                .map(|i| (vals[(i + 1) % len] - vals[(i + len - 1) % len]) / (2.0 * h))
                .collect();
        }
        per_order.push(vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
    }
    NormEstimate {
        value: per_order.iter().copied().fold(0.0, f64::max),
        per_order,
        grid_size: n,
        step: h,
    }
}
