use serde::{Deserialize, Serialize};

use super::bump::{circle_offset, BumpFlow};
use super::chain::DiffeoChain;
use super::family::{DensePointFamily, DEFAULT_HORIZON};
use super::norm::{ck_norm_capped, MAX_ORDER, MIN_GRID};
use crate::{Error, Result};

/// Distance below which a target counts as already reached.
pub const SNAP_DISTANCE: f64 = 1e-12;
/// Upper bound on the support radius of a single perturbation.
pub const MAX_RADIUS: f64 = 0.25;
/// Budgets are met with this fraction of the allowed norm.
pub const SAFETY: f64 = 0.5;
const MAX_GRID: u64 = 1 << 22;
/// Narrowest support the norm grid can still resolve.
const MIN_RESOLVED_RADIUS: f64 = 256.0 / MAX_GRID as f64;
const MATCH_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub chain: DiffeoChain,
    /// Source point and its index in its family (forward: the given point).
    pub x: f64,
    pub x_index: Option<u64>,
    pub y: f64,
    pub y_index: Option<u64>,
    pub estimate: f64,
    pub radius: f64,
    pub snapped: bool,
}

struct Candidate {
    x: f64,
    x_index: Option<u64>,
    /// `φ(x)`.
    source: f64,
    y: f64,
    y_index: Option<u64>,
}

/// Composes `φ` with one bump flow near `φ(x_new)` so that `x_new` lands on
/// a point of `family`, keeping the images of `pinned` fixed and the
/// estimated `C^{k+1}` change below `ε`.
pub fn perturb_to_match(
    phi: &DiffeoChain,
    x_new: f64,
    family: &DensePointFamily,
    pinned: &[f64],
    eps: f64,
    k: usize,
) -> Result<Perturbation> {
    if k + 1 > MAX_ORDER {
        return Err(Error::InvalidParameter(format!("order {} exceeds the cap {MAX_ORDER}", k + 1)));
    }
    let images: Vec<f64> = pinned.iter().map(|&p| phi.eval(p)).collect();
    forward(phi, x_new, family, &images, &|_| false, eps, k + 1, DEFAULT_HORIZON)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn forward(
    phi: &DiffeoChain,
    x_new: f64,
    family: &DensePointFamily,
    pinned_images: &[f64],
    used: &dyn Fn(u64) -> bool,
    eps: f64,
    order: usize,
    horizon: u64,
) -> Result<Perturbation> {
    let z = phi.eval(x_new);
    let mut pick = |a: f64| {
        let j = family.first_unused_in_arc(z - a, z + a, 0, horizon, used)?;
        Ok(Candidate {
            x: x_new,
            x_index: None,
            source: z,
            y: family.point(j),
            y_index: Some(j),
        })
    };
    realize(phi, z, pinned_images, eps, order, &mut pick)
}

/// Finds a point of `family` whose image can be moved onto `y`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn backward(
    phi: &DiffeoChain,
    y: f64,
    family: &DensePointFamily,
    pinned_images: &[f64],
    used: &dyn Fn(u64) -> bool,
    eps: f64,
    order: usize,
    horizon: u64,
) -> Result<Perturbation> {
    let mut pick = |a: f64| {
        let (lo, hi) = (phi.inverse(y - a), phi.inverse(y + a));
        let j = family.first_unused_in_arc(lo, hi, 0, horizon, used)?;
        let x = family.point(j);
        Ok(Candidate {
            x,
            x_index: Some(j),
            source: phi.eval(x),
            y,
            y_index: None,
        })
    };
    realize(phi, y, pinned_images, eps, order, &mut pick)
}

fn realize(
    phi: &DiffeoChain,
    center: f64,
    pinned_images: &[f64],
    eps: f64,
    order: usize,
    pick: &mut dyn FnMut(f64) -> Result<Candidate>,
) -> Result<Perturbation> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("ε must be positive".into()));
    }
    let clearance = pinned_images
        .iter()
        .map(|&p| circle_offset(p, center).abs())
        .fold(1.0, f64::min);
    if clearance == 0.0 {
        return Err(Error::InvalidParameter("new point coincides with a pinned image".into()));
    }
    let radius = (clearance / 2.0).min(MAX_RADIUS);
    let target = SAFETY * eps;
    let estimate = |next: &DiffeoChain| ck_norm_capped(phi, next, order, MIN_GRID, MAX_GRID).map(|e| e.value);

    let snap = |pick: &mut dyn FnMut(f64) -> Result<Candidate>| -> Result<Perturbation> {
        let c = pick(SNAP_DISTANCE)?;
        Ok(finish(phi.clone(), c, 0.0, radius, true))
    };
    if radius < MIN_RESOLVED_RADIUS {
        return snap(pick);
    }
    // Norm per unit displacement, read off a short trial flow.
    let probe = radius * 1e-3;
    let trial = BumpFlow::to_target(center, radius, center, center + probe)?;
    let ratio = estimate(&phi.then(trial))? / probe;
    let mut reach = (0.9 * target / ratio).min(radius / 2.0);
    while reach >= SNAP_DISTANCE {
        let c = pick(reach)?;
        if circle_offset(c.source, c.y).abs() <= SNAP_DISTANCE {
            return Ok(finish(phi.clone(), c, 0.0, radius, true));
        }
        let flow = BumpFlow::to_target(center, radius, c.source, c.y)?;
        let next = phi.then(flow);
        let est = estimate(&next)?;
        if est < target {
            let achieved = circle_offset(next.eval(c.x), c.y).abs();
            if achieved > MATCH_TOLERANCE {
                return Err(Error::ToleranceUnmet { achieved });
            }
            return Ok(finish(next, c, est, radius, false));
        }
        reach /= 2.0;
    }
    snap(pick)
}

fn finish(chain: DiffeoChain, c: Candidate, estimate: f64, radius: f64, snapped: bool) -> Perturbation {
    Perturbation {
        chain,
        x: c.x,
        x_index: c.x_index,
        y: c.y,
        y_index: c.y_index,
        estimate,
        radius,
        snapped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_diffeo::norm::ck_norm_estimate;

    const GOLDEN: f64 = 0.618_033_988_749_894_8;

    #[test]
    fn unpinned_match_meets_budget() {
        let y = DensePointFamily::new(2, GOLDEN, 0.1).unwrap();
        let phi = DiffeoChain::rotation(0.05);
        let p = perturb_to_match(&phi, 0.3, &y, &[], 0.5, 1).unwrap();
        assert!(circle_offset(p.chain.eval(0.3), p.y).abs() < 1e-9);
        assert_eq!(p.y, y.point(p.y_index.unwrap()));
        let e = ck_norm_estimate(&phi, &p.chain, 2, 1 << 12).unwrap();
        assert!(e.value < 0.5);
    }

    #[test]
    fn pinned_images_fixed_exactly() {
        let y = DensePointFamily::new(2, GOLDEN, 0.0).unwrap();
        let phi = DiffeoChain::rotation(0.2);
        let pinned = [0.1, 0.15, 0.7];
        let p = perturb_to_match(&phi, 0.12, &y, &pinned, 0.1, 2).unwrap();
        for &q in &pinned {
            assert_eq!(p.chain.eval(q), phi.eval(q));
        }
        assert!(p.radius <= 0.015);
    }

    #[test]
    fn already_matched_is_identity() {
        let y = DensePointFamily::new(2, GOLDEN, 0.0).unwrap();
        let phi = DiffeoChain::rotation(y.point(7));
        let p = perturb_to_match(&phi, 0.0, &y, &[], 0.5, 0).unwrap();
        assert!(p.snapped);
        assert_eq!(p.chain, phi);
        assert_eq!(p.estimate, 0.0);
    }

    #[test]
    fn order_cap() {
        let y = DensePointFamily::new(2, GOLDEN, 0.0).unwrap();
        assert!(perturb_to_match(&DiffeoChain::identity(), 0.1, &y, &[], 0.5, 6).is_err());
    }
}
