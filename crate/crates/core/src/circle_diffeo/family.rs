use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64
const MOD: u128 = 1 << 64;

/// Default bound on enumeration indices searched for window hits.
pub const DEFAULT_HORIZON: u64 = 1 << 50;

/// Largest denominator checked when rejecting near-rational angles.
pub const MAX_DENOMINATOR: u64 = 64;

/// Orbit `j ↦ offset + j·α mod 1` of a rotation, in exact 64-bit fixed point:
/// the angle is `alpha_fixed / 2^64` and every point is computed with
/// wrapping integer arithmetic, so indices far beyond f64 resolution remain
/// exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensePointFamily {
    pub id: u32,
    pub alpha_fixed: u64,
    pub offset_fixed: u64,
}

fn to_fixed(x: f64) -> u64 {
    // x in [0, 1); the product stays below 2^64 except at rounding edge.
    let v = (x * SCALE).round();
    if v >= SCALE {
        u64::MAX
    } else {
        v as u64
    }
}

fn to_real(v: u64) -> f64 {
    v as f64 / SCALE
}

/// Least `x ≥ 0` with `(a·x + b) mod m ∈ [l, r]`, for `a, b, l ≤ r < m`.
///
/// For `y` wraps past `m`, some `x` works iff the interval
/// `[l + m·y − b, r + m·y − b]` holds a multiple of `a`; that is a problem
/// of the same shape modulo `a`. Reflecting `a` into `m − a` when `2a > m`
/// halves the modulus each round.
pub(crate) fn min_affine_hit(a: u128, b: u128, m: u128, l: u128, r: u128) -> Option<u128> {
    debug_assert!(a < m && b < m && l <= r && r < m);
    if l <= b && b <= r {
        return Some(0);
    }
    if a == 0 {
        return None;
    }
    if 2 * a > m {
        return min_affine_hit(m - a, m - 1 - b, m, m - 1 - r, m - 1 - l);
    }
    if b < l {
        // No wrap: first x with a·x + b ≥ l.
        let x = (l - b).div_ceil(a);
        if a * x + b <= r {
            return Some(x);
        }
    }
    // Need y ≥ 1 with (b − l − m·y) mod a ≤ r − l.
    let w = r - l;
    let y = if w + 1 >= a {
        1
    } else {
        let ap = (a - m % a) % a; // −m mod a
        let bp = ((b % a) + a - (l % a)) % a; // (b − l) mod a
        let shifted = (ap + bp) % a; // value at y = 1
        1 + min_affine_hit(ap, shifted, a, 0, w)?
    };
    let lo = (l + m.checked_mul(y)?).checked_sub(b)?;
    Some(lo.div_ceil(a))
}

impl DensePointFamily {
    /// Checks the angle against rationals with small denominators and builds
    /// the family.
    pub fn new(id: u32, alpha: f64, offset: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("rotation angle {alpha} not in (0, 1)")));
        }
        if !(0.0..1.0).contains(&offset) {
            return Err(Error::InvalidParameter(format!("offset {offset} not in [0, 1)")));
        }
        for q in 1..=MAX_DENOMINATOR {
            let p = (alpha * q as f64).round();
            if (alpha - p / q as f64).abs() < 1e-12 {
                return Err(Error::RationalRotation { alpha, p: p as u64, q });
            }
        }
        Ok(DensePointFamily {
            id,
            // An odd angle gives the full orbit period 2^64; f64 angles are
            // otherwise divisible by a power of two and the orbit closes early.
            alpha_fixed: to_fixed(alpha) | 1,
            offset_fixed: to_fixed(offset),
        })
    }

    pub fn alpha(&self) -> f64 {
        to_real(self.alpha_fixed)
    }

    pub fn offset(&self) -> f64 {
        to_real(self.offset_fixed)
    }

    pub fn fixed_point(&self, j: u64) -> u64 {
        self.offset_fixed.wrapping_add(j.wrapping_mul(self.alpha_fixed))
    }

    pub fn point(&self, j: u64) -> f64 {
        let v = to_real(self.fixed_point(j));
        // Rounding of values just below 2^64 lands on 1.0.
        if v >= 1.0 {
            0.0
        } else {
            v
        }
    }

    /// Least index `j ≥ start`, `j < horizon`, whose point lies in the closed
    /// arc from `lo` to `hi` (counterclockwise; `lo > hi` wraps through 0).
    pub fn first_in_arc(&self, lo: f64, hi: f64, start: u64, horizon: u64) -> Option<u64> {
        let lo = lo.rem_euclid(1.0);
        let hi = hi.rem_euclid(1.0);
        let fl = (lo * SCALE).ceil().min(SCALE - 1.0) as u128;
        let fh = ((hi * SCALE).floor().min(SCALE - 1.0)) as u128;
        let base = self.fixed_point(start) as u128;
        let a = self.alpha_fixed as u128;
        let hit = if lo <= hi {
            if fl > fh {
                return None;
            }
            min_affine_hit(a, base, MOD, fl, fh)
        } else {
            let h1 = min_affine_hit(a, base, MOD, fl, MOD - 1);
            let h2 = min_affine_hit(a, base, MOD, 0, fh);
            match (h1, h2) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            }
        }?;
        let j = (start as u128).checked_add(hit)?;
        (j < horizon as u128).then_some(j as u64)
    }

    /// Least index at or after `start` in the arc whose index is not
    /// rejected by `used`.
    pub fn first_unused_in_arc(
        &self,
        lo: f64,
        hi: f64,
        mut start: u64,
        horizon: u64,
        used: impl Fn(u64) -> bool,
    ) -> Result<u64> {
        loop {
            match self.first_in_arc(lo, hi, start, horizon) {
                Some(j) if used(j) => start = j + 1,
                Some(j) => return Ok(j),
                None => {
                    return Err(Error::HorizonExhausted {
                        family: self.id,
                        horizon,
                    })
                }
            }
        }
    }

    /// Smallest `|j| ≤ horizon`, `j ≠ 0`, with `point(j) = point(0)` shifted
    /// by `delta` (in fixed point), used for overlap checks between families
    /// with a common angle.
    pub(crate) fn index_of_shift(&self, delta: u64, horizon: u64) -> Option<i128> {
        let a = self.alpha_fixed as u128;
        // j·α ≡ delta  or  j·α ≡ −delta.
        let pos = min_affine_hit(a, 0, MOD, delta as u128, delta as u128);
        let neg_target = (MOD - delta as u128) % MOD;
        let neg = min_affine_hit(a, 0, MOD, neg_target, neg_target);
        let pos = pos.filter(|&j| j <= horizon as u128).map(|j| j as i128);
        let neg = neg.filter(|&j| j <= horizon as u128).map(|j| -(j as i128));
        match (pos, neg) {
            (Some(p), Some(n)) => Some(if p <= -n { p } else { n }),
            (p, n) => p.or(n),
        }
    }

    /// Star discrepancy of the first `n` points.
    pub fn discrepancy(&self, n: u64) -> f64 {
        let mut pts: Vec<f64> = (0..n).map(|j| self.point(j)).collect();
        pts.sort_by(f64::total_cmp);
        let n = n as f64;
        pts.iter()
            .enumerate()
            .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
            .fold(0.0, f64::max)
    }
}

/// Builds the orbit family `j ↦ offset + j·α`.
pub fn make_orbit_family(id: u32, alpha: f64, offset: f64) -> Result<DensePointFamily> {
    DensePointFamily::new(id, alpha, offset)
}
