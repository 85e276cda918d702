use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance on the accumulated embedded error estimate.
pub const FLOW_TOLERANCE: f64 = 1e-12;
const MIN_STEPS: u32 = 8;
const MAX_STEPS: u32 = 1 << 20;
const PROBES: usize = 33;

/// Standard mollifier profile `exp(−1/(1−u²))` on `|u| < 1`.
pub fn psi(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / ((1.0 - u) * (1.0 + u))).exp()
    }
}

/// Signed offset of `x` from `c` on the circle, in `[−1/2, 1/2)`.
pub fn circle_offset(x: f64, c: f64) -> f64 {
    (x - c + 0.5).rem_euclid(1.0) - 0.5
}

/// Time-`time` map of the flow of `height·ψ((θ−center)/radius)·∂θ`.
///
/// `steps` is the fixed number of Dormand–Prince steps used for every
/// starting point. A uniform step count makes the computed map a smooth
/// function of the starting point, which finite-difference norm estimates
/// rely on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpFlow {
    pub center: f64,
    pub radius: f64,
    pub height: f64,
    pub time: f64,
    pub steps: u32,
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl BumpFlow {
    /// Builds a flow and calibrates its step count.
    pub fn new(center: f64, radius: f64, height: f64, time: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= 0.5) {
            return Err(Error::InvalidParameter(format!("bump radius {radius} not in (0, 1/2]")));
        }
        if !center.is_finite() || !height.is_finite() || !time.is_finite() {
            return Err(Error::InvalidParameter("non-finite bump parameter".into()));
        }
        let mut bf = BumpFlow {
            center: center.rem_euclid(1.0),
            radius,
            height,
            time,
            steps: MIN_STEPS,
        };
        bf.steps = bf.calibrate()?;
        Ok(bf)
    }

    fn field(&self, s: f64) -> f64 {
        self.height * psi(s / self.radius)
    }

    /// Displacement after the flow from local offset `s0`, with the
    /// accumulated embedded error estimate.
    fn integrate(&self, s0: f64, steps: u32) -> (f64, f64) {
        let dt = self.time / f64::from(steps);
        let mut u = 0.0;
        let mut err = 0.0;
        let mut k = [0.0; 7];
        for _ in 0..steps {
            k[0] = self.field(s0 + u);
            for i in 0..6 {
                let du: f64 = (0..=i).map(|j| A[i][j] * k[j]).sum();
                k[i + 1] = self.field(s0 + u + dt * du);
            }
            let (mut d5, mut d4) = (0.0, 0.0);
            for i in 0..7 {
                d5 += B5[i] * k[i];
                d4 += B4[i] * k[i];
            }
            u += dt * d5;
            err += (dt * (d5 - d4)).abs();
        }
        (u, err)
    }

    /// Doubles the step count until the error estimate meets the tolerance
    /// at every probe point across the support.
    fn calibrate(&self) -> Result<u32> {
        if self.time == 0.0 || self.height == 0.0 {
            return Ok(MIN_STEPS);
        }
        let mut steps = MIN_STEPS;
        loop {
            let worst = (0..PROBES)
                .map(|i| {
                    let s0 = self.radius * (-0.96 + 1.92 * i as f64 / (PROBES - 1) as f64);
                    self.integrate(s0, steps).1
                })
                .fold(0.0, f64::max);
            if worst <= FLOW_TOLERANCE {
                return Ok(steps);
            }
            if steps >= MAX_STEPS {
                return Err(Error::ToleranceUnmet { achieved: worst });
            }
            steps *= 2;
        }
    }

    pub fn in_support(&self, x: f64) -> bool {
        circle_offset(x, self.center).abs() < self.radius
    }

    /// `φ_t(x) − x`, exactly zero off the support.
    pub fn displacement(&self, x: f64) -> f64 {
        let s0 = circle_offset(x, self.center);
        if s0.abs() >= self.radius || self.time == 0.0 {
            return 0.0;
        }
        self.integrate(s0, self.steps).0
    }

    /// Time needed to carry local offset `s0` to `s1`, both inside the
    /// support, with unit speed profile in the right direction. Returns the
    /// flow.
    pub fn to_target(center: f64, radius: f64, x: f64, y: f64) -> Result<BumpFlow> {
        let (s0, s1) = (circle_offset(x, center), circle_offset(y, center));
        if s0.abs() >= radius || s1.abs() >= radius {
            return Err(Error::InvalidParameter("flow endpoints must lie inside the support".into()));
        }
        let gap = s1 - s0;
        if gap == 0.0 {
            return BumpFlow::new(center, radius, 0.0, 0.0);
        }
        let height = gap.signum();
        let probe = |t: f64, steps: u32| {
            let bf = BumpFlow {
                center,
                radius,
                height,
                time: t,
                steps,
            };
            bf.integrate(s0, steps).0
        };
        // Bracket: the speed along the way is at least the speed at the
        // endpoint closer to the edge.
        let slow = psi(s0 / radius).min(psi(s1 / radius)).max(1e-300);
        let mut hi = gap.abs() / slow;
        let mut bf = BumpFlow::new(center, radius, height, hi)?;
        while probe(hi, bf.steps).abs() < gap.abs() {
            hi *= 2.0;
            bf = BumpFlow::new(center, radius, height, hi)?;
        }
        let steps = bf.steps;
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if probe(mid, steps).abs() < gap.abs() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Of the two bracket ends, keep the closer one.
        let t = if (probe(lo, steps) - gap).abs() <= (probe(hi, steps) - gap).abs() { lo } else { hi };
        Ok(BumpFlow {
            center,
            radius,
            height,
            time: t,
            steps,
        })
    }
}

/// Evaluates the flow at `x`; points off the support are returned as is.
pub fn bump_flow_eval(bf: &BumpFlow, x: f64) -> f64 {
    let d = bf.displacement(x);
    if d == 0.0 {
        x
    } else {
        (x + d).rem_euclid(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_support_and_zero_time_are_exact() {
        let bf = BumpFlow::new(0.5, 0.1, 0.05, 1.0).unwrap();
        assert_eq!(bump_flow_eval(&bf, 0.2), 0.2);
        assert_eq!(bump_flow_eval(&bf, 0.6), 0.6);
        let z = BumpFlow::new(0.5, 0.1, 0.05, 0.0).unwrap();
        assert_eq!(bump_flow_eval(&z, 0.5), 0.5);
    }

    #[test]
    fn center_moves_forward_by_less_than_height() {
        let bf = BumpFlow::new(0.5, 0.1, 0.05, 1.0).unwrap();
        let d = bump_flow_eval(&bf, 0.5) - 0.5;
        assert!(d > 0.0 && d < 0.05, "{d}");
        // Speed at the center is h/e and decreases along the way.
        assert!(d < 0.05 / std::f64::consts::E);
    }

    #[test]
    fn flow_is_monotone() {
        let bf = BumpFlow::new(0.3, 0.2, 0.5, 1.0).unwrap();
        let xs: Vec<f64> = (0..2000).map(|i| 0.1 + 0.4 * i as f64 / 2000.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| bump_flow_eval(&bf, x)).collect();
        assert!(ys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn flow_matches_inverse_quadrature() {
        // Time to travel = ∫ dθ / b(θ); integrate by Simpson and compare.
        let bf = BumpFlow::new(0.5, 0.1, 0.05, 1.0).unwrap();
        let y = bump_flow_eval(&bf, 0.5);
        let n = 20_000;
        let h = (y - 0.5) / n as f64;
        let f = |x: f64| 1.0 / (0.05 * psi((x - 0.5) / 0.1));
        let mut s = f(0.5) + f(y);
        for i in 1..n {
            s += f(0.5 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        assert!((s * h / 3.0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn target_is_reached() {
        for (x, y) in [(0.5, 0.53), (0.52, 0.49), (0.98, 0.01)] {
            let c = if x > 0.9 { 0.99 } else { 0.5 };
            let bf = BumpFlow::to_target(c, 0.05, x, y).unwrap();
            let got = bump_flow_eval(&bf, x);
            assert!(circle_offset(got, y).abs() < 1e-14, "{x} -> {got} vs {y}");
        }
    }

    #[test]
    fn wraps_through_zero() {
        let bf = BumpFlow::new(0.0, 0.1, 0.1, 1.0).unwrap();
        let y = bump_flow_eval(&bf, 0.99);
        assert!(y > 0.99 || y < 0.05);
    }
}
