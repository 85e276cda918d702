use serde::{Deserialize, Serialize};

use super::bump::{circle_offset, BumpFlow};

/// A point of the ▷ family matched with a point of the ◁ family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    /// Boundary slot `(piece, index)` on the ▷ side.
    pub lhs: (u32, u32),
    /// Boundary slot on the ◁ side.
    pub rhs: (u32, u32),
    pub x: f64,
    pub x_index: u64,
    pub y: f64,
    pub y_index: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pass {
    Forward,
    Backward,
}

/// Norm budget record of one induction step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetEntry {
    pub step: usize,
    pub order: usize,
    pub estimate: f64,
    pub bound: f64,
    pub ok: bool,
    /// The target point was within snapping distance; no factor was added.
    pub snapped: bool,
    pub pass: Pass,
    pub lhs: (u32, u32),
    pub rhs: (u32, u32),
    pub radius: f64,
    /// Number of flow factors of `f_step`.
    pub factor_count: usize,
}

/// `x ↦ s_n ∘ … ∘ s_1 (x + rotation)` with recorded matches and budgets.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiffeoChain {
    pub rotation: f64,
    pub factors: Vec<BumpFlow>,
    pub matched_pairs: Vec<MatchedPair>,
    pub budget_log: Vec<BudgetEntry>,
}

impl DiffeoChain {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn rotation(rho: f64) -> Self {
        DiffeoChain {
            rotation: rho.rem_euclid(1.0),
            ..Self::default()
        }
    }

    /// Same map with `s` composed after it.
    pub fn then(&self, s: BumpFlow) -> Self {
        let mut out = self.clone();
        out.factors.push(s);
        out
    }

    /// The map built from the rotation and the first `n` factors.
    pub fn prefix(&self, n: usize) -> Self {
        DiffeoChain {
            rotation: self.rotation,
            factors: self.factors[..n.min(self.factors.len())].to_vec(),
            ..Self::default()
        }
    }

    /// Degree-one lift evaluated at `x`, with `lift(x + 1) = lift(x) + 1`.
    pub fn lift(&self, x: f64) -> f64 {
        let mut y = x + self.rotation;
        for f in &self.factors {
            y += f.displacement(y);
        }
        y
    }

    pub fn eval(&self, x: f64) -> f64 {
        let y = self.lift(x).rem_euclid(1.0);
        if y >= 1.0 {
            0.0
        } else {
            y
        }
    }

    /// Point `x ∈ [0, 1)` with `eval(x) = y`, by bisection on the lift.
    pub fn inverse(&self, y: f64) -> f64 {
        let base = self.lift(0.0);
        let target = base + (y - base).rem_euclid(1.0);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.lift(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = if (self.lift(lo) - target).abs() <= (self.lift(hi) - target).abs() { lo } else { hi };
        x.rem_euclid(1.0)
    }

    /// Largest circle distance between `f(x)` and `y` over matched pairs.
    pub fn max_pair_error(&self) -> f64 {
        self.matched_pairs
            .iter()
            .map(|p| circle_offset(self.eval(p.x), p.y).abs())
            .fold(0.0, f64::max)
    }

    /// Whether the lift is strictly increasing on a uniform grid and has
    /// degree one.
    pub fn is_orientation_preserving(&self, grid: usize) -> bool {
        let lifts: Vec<f64> = (0..=grid).map(|i| self.lift(i as f64 / grid as f64)).collect();
        lifts.windows(2).all(|w| w[0] < w[1]) && (lifts[grid] - lifts[0] - 1.0).abs() < 1e-9
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_and_inverse() {
        let c = DiffeoChain::rotation(0.3).then(BumpFlow::new(0.5, 0.1, 0.2, 1.0).unwrap());
        for &y in &[0.0, 0.12, 0.55, 0.9] {
            let x = c.inverse(y);
            assert!(circle_offset(c.eval(x), y).abs() < 1e-13);
        }
        assert!(c.is_orientation_preserving(1 << 12));
        assert!((DiffeoChain::rotation(0.25).eval(0.9) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn prefix_drops_factors() {
        let c = DiffeoChain::rotation(0.1).then(BumpFlow::new(0.5, 0.1, 0.2, 1.0).unwrap());
        assert_eq!(c.prefix(0), DiffeoChain::rotation(0.1));
        assert_eq!(c.prefix(5).factors.len(), 1);
    }
}
