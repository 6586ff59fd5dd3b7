//! The play map `u = b(p)` and its δ-regularization.
//!
//! The slope is built from the primary curves as
//!
//! ```text
//! b'(p) = -½ max( 1 / p_c^(i)'(p_c^(i)⁻¹(p)),  1 / p_c^(d)'(p_c^(d)⁻¹(p)) ),   p > 0
//! ```
//!
//! and `b' = 0` for `p <= 0`. This keeps `b'(p_c^(j)(S)) · |p_c^(j)'(S)| <= ½` on
//! both branches. The regularized slope is `b_δ' = max(b', δ)` and
//! `b_δ(p) = ∫₀ᵖ b_δ'`, so `b_δ(0) = 0` for every δ. On the cut interval
//! `(p_l^δ, p_r^δ)` the two maps share their slope and differ by the constant
//! `∫₀^{p_l} (δ - b')`, which is at most `δ p_l`.
//!
//! Values of `b_δ` come from a cumulative table of adaptive-Simpson integrals on
//! geometrically spaced knots plus one short integral from the nearest knot.

use super::capillary::{Branch, CapillaryCurvePair};
use super::quadrature::adaptive_simpson;
use crate::error::{domain, numeric, Result};

/// Bound on the neglected tail `∫_{p_cap}^∞ b'` used to define `U_M`.
pub const TAIL_TOL: f64 = 1e-10;
/// Absolute tolerance for `play_eval(play_inverse(u)) = u`.
pub const TOL_INV: f64 = 1e-10;

const KNOT_TOL: f64 = 1e-14;
const EVAL_TOL: f64 = 1e-14;
const KNOT_RATIO: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct PlayMap {
    curves: CapillaryCurvePair,
    delta: f64,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
    cut: Option<(f64, f64)>,
    slope_cap: f64,
}

impl PlayMap {
    pub fn new(curves: CapillaryCurvePair, delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(domain("play map", format!("delta must be >= 0, got {delta}")));
        }
        // tail of b' beyond P is at most ½ S_j(P) for either branch
        let p_cap = Branch::BOTH
            .iter()
            .map(|&b| curves.curve(b).pressure(2.0 * TAIL_TOL))
            .fold(f64::INFINITY, f64::min);
        let scale = 0.05 * curves.imbibition.alpha.min(curves.drainage.alpha);
        let mut knots = vec![0.0];
        let mut k = 1;
        loop {
            let p = scale * ((k as f64 * KNOT_RATIO).exp() - 1.0);
            if p >= p_cap {
                knots.push(p_cap);
                break;
            }
            knots.push(p);
            k += 1;
        }

        let mut map = Self {
            curves,
            delta,
            knots,
            cumulative: Vec::new(),
            cut: None,
            slope_cap: 0.0,
        };

        let mut cap: f64 = 0.0;
        for w in map.knots.windows(2) {
            for p in [w[0], 0.5 * (w[0] + w[1])] {
                cap = cap.max(map.base_slope(p));
            }
        }
        map.slope_cap = cap.max(delta);

        if delta > 0.0 {
            map.cut = map.locate_cut();
        }

        let mut cumulative = Vec::with_capacity(map.knots.len());
        cumulative.push(0.0);
        let slope = |p: f64| map.slope(p);
        let mut acc = 0.0;
        for w in map.knots.windows(2) {
            acc += adaptive_simpson(&slope, w[0], w[1], KNOT_TOL)?;
            cumulative.push(acc);
        }
        map.cumulative = cumulative;
        Ok(map)
    }

    fn locate_cut(&self) -> Option<(f64, f64)> {
        let above = |p: f64| self.base_slope(p) > self.delta;
        let first = self.knots.iter().position(|&p| above(p))?;
        let last = self.knots.iter().rposition(|&p| above(p))?;
        let refine = |mut lo: f64, mut hi: f64, rising: bool| {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if above(mid) == rising {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let p_l = refine(self.knots[first.saturating_sub(1)], self.knots[first], true);
        let p_r = if last + 1 < self.knots.len() {
            refine(self.knots[last], self.knots[last + 1], false)
        } else {
            self.knots[last]
        };
        Some((p_l, p_r))
    }

    pub fn curves(&self) -> &CapillaryCurvePair {
        &self.curves
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `(p_l^δ, p_r^δ)`; `None` for δ = 0 or when δ exceeds `max b'`.
    pub fn cut_points(&self) -> Option<(f64, f64)> {
        self.cut
    }

    /// `b_M = max b_δ'`.
    pub fn slope_cap(&self) -> f64 {
        self.slope_cap
    }

    /// Upper end of the quadrature table.
    pub fn p_cap(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// `|dS/dp|` along one branch, by composing the inverse with the curve slope.
    pub fn branch_slope(&self, branch: Branch, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        let c = self.curves.curve(branch);
        let s = c.saturation(p);
        let ds = c.slope(s);
        let r = -1.0 / ds;
        if r.is_finite() {
            r.max(0.0)
        } else {
            0.0
        }
    }

    /// Unregularized slope `b'(p)`.
    pub fn base_slope(&self, p: f64) -> f64 {
        0.5 * self
            .branch_slope(Branch::Imbibition, p)
            .min(self.branch_slope(Branch::Drainage, p))
    }

    /// `b_δ'(p)`.
    pub fn slope(&self, p: f64) -> f64 {
        self.base_slope(p).max(self.delta)
    }

    /// `U_m = b_δ(p_c(1))`.
    pub fn u_min(&self) -> f64 {
        0.0
    }

    /// `U_M = b(p_cap)`; for δ > 0 this is only the table end, `b_δ` keeps growing.
    pub fn u_max(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Difference `b_δ - b` on the cut interval.
    pub fn cut_offset(&self) -> Result<f64> {
        match self.cut {
            None => Ok(0.0),
            Some((p_l, _)) => {
                let base = |p: f64| self.base_slope(p);
                Ok(self.delta * p_l - adaptive_simpson(&base, 0.0, p_l, EVAL_TOL)?)
            }
        }
    }

    fn eval_from(&self, k: usize, p: f64) -> Result<f64> {
        let slope = |x: f64| self.slope(x);
        Ok(self.cumulative[k] + adaptive_simpson(&slope, self.knots[k], p, EVAL_TOL)?)
    }

    fn knot_index(&self, p: f64) -> usize {
        self.knots.partition_point(|&x| x <= p).saturating_sub(1)
    }

    /// `u = b_δ(p) = ∫₀ᵖ b_δ'`.
    pub fn play_eval(&self, p: f64) -> Result<f64> {
        if !p.is_finite() {
            return Err(domain("play_eval", format!("non-finite pressure {p}")));
        }
        if p <= 0.0 {
            return Ok(self.delta * p);
        }
        self.eval_from(self.knot_index(p), p)
    }

    /// `p = b_δ⁻¹(u)`.
    pub fn play_inverse(&self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(domain("play_inverse", format!("non-finite value {u}")));
        }
        let top = self.u_max();
        if self.delta == 0.0 {
            if u < 0.0 || u >= top {
                return Err(domain(
                    "play_inverse",
                    format!("u = {u} outside the range [{}, {top}) of the unregularized play map", 0.0),
                ));
            }
            if u == 0.0 {
                return Ok(0.0);
            }
        } else if u <= 0.0 {
            return Ok(u / self.delta);
        }
        let (k, lo, hi) = if u > top {
            let last = self.knots.len() - 1;
            (last, self.knots[last], self.knots[last] + (u - top) / self.delta)
        } else {
            let k = self.cumulative.partition_point(|&c| c <= u).saturating_sub(1);
            let k = k.min(self.knots.len() - 2);
            (k, self.knots[k], self.knots[k + 1])
        };
        self.solve_in_bracket(u, k, lo, hi)
    }

    fn solve_in_bracket(&self, u: f64, k: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
        let base = self.cumulative[k];
        let span = if k + 1 < self.cumulative.len() {
            self.cumulative[k + 1] - base
        } else {
            0.0
        };
        let mut p = if span > 0.0 {
            lo + (hi - lo) * ((u - base) / span).clamp(0.0, 1.0)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..200 {
            let f = self.eval_from(k, p)? - u;
            if f.abs() <= 1e-3 * TOL_INV {
                return Ok(p);
            }
            if f > 0.0 {
                hi = p;
            } else {
                lo = p;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1e-300) {
                return Ok(p);
            }
            let d = self.slope(p);
            let newton = p - f / d;
            p = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Err(numeric("play_inverse", format!("no convergence for u = {u}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> PlayMap {
        PlayMap::new(CapillaryCurvePair::default(), 0.0).unwrap()
    }

    #[test]
    fn zero_maps_to_zero() {
        for d in [0.0, 1e-3, 0.05] {
            let m = PlayMap::new(CapillaryCurvePair::default(), d).unwrap();
            assert_eq!(m.play_eval(0.0).unwrap(), 0.0);
            assert_eq!(m.play_inverse(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn saturates_without_regularization() {
        let m = base();
        assert!(m.play_inverse(m.u_max()).is_err());
        assert!(m.play_inverse(-1e-6).is_err());
        assert!(m.play_inverse(m.u_max() - 1e-3).is_ok());
    }

    #[test]
    fn regularized_map_is_total() {
        let m = PlayMap::new(CapillaryCurvePair::default(), 0.05).unwrap();
        for u in [-3.0, -0.1, 0.2, 0.5, 2.0, 40.0] {
            let p = m.play_inverse(u).unwrap();
            assert!((m.play_eval(p).unwrap() - u).abs() < TOL_INV, "u = {u}");
        }
    }

    #[test]
    fn flat_slope_beyond_cut() {
        let m = PlayMap::new(CapillaryCurvePair::default(), 0.05).unwrap();
        let (_, p_r) = m.cut_points().unwrap();
        let p = p_r + 3.0;
        let h = 0.25;
        let fd = (m.play_eval(p + h).unwrap() - m.play_eval(p).unwrap()) / h;
        assert!((fd - 0.05).abs() < 1e-9);
    }

    #[test]
    fn cut_points_bracket_the_large_slope_region() {
        let m = PlayMap::new(CapillaryCurvePair::default(), 0.02).unwrap();
        let (l, r) = m.cut_points().unwrap();
        assert!(0.0 < l && l < r);
        assert!((m.base_slope(l) - 0.02).abs() < 1e-9);
        assert!((m.base_slope(r) - 0.02).abs() < 1e-9);
    }
}
