//! Primary capillary pressure curves.
//!
//! Both branches use the van Genuchten form
//!
//! ```text
//! p_c(S) = α (S^(-1/m) - 1)^(1/n),   m = 1 - 1/n
//! ```
//!
//! which vanishes at `S = 1`, blows up as `S → 0⁺` and has an infinite slope at
//! `S = 1`. The drainage branch must lie strictly above the imbibition branch
//! on `(0, 1)`; with equal `n` this is the same as `α_i < α_d`.

use crate::error::{domain, HysteraError, Result};

/// Which primary curve to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Imbibition,
    Drainage,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Imbibition, Branch::Drainage];

    pub fn name(self) -> &'static str {
        match self {
            Branch::Imbibition => "imbibition",
            Branch::Drainage => "drainage",
        }
    }
}

/// One van Genuchten retention curve in dimensionless pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanGenuchten {
    pub alpha: f64,
    pub n: f64,
}

impl VanGenuchten {
    pub fn new(alpha: f64, n: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(HysteraError::Inconsistent(format!(
                "van Genuchten alpha must be positive, got {alpha}"
            )));
        }
        if !(n > 1.0 && n.is_finite()) {
            return Err(HysteraError::Inconsistent(format!(
                "van Genuchten n must exceed 1, got {n}"
            )));
        }
        Ok(Self { alpha, n })
    }

    pub fn m(&self) -> f64 {
        1.0 - 1.0 / self.n
    }

    /// Pressure on the curve. Unchecked: callers validate `0 < s <= 1`.
    pub fn pressure(&self, s: f64) -> f64 {
        let m = self.m();
        let base = (s.powf(-1.0 / m) - 1.0).max(0.0);
        self.alpha * base.powf(1.0 / self.n)
    }

    /// `dp_c/dS`; `-inf` at `S = 1`.
    pub fn slope(&self, s: f64) -> f64 {
        let m = self.m();
        let n = self.n;
        let base = (s.powf(-1.0 / m) - 1.0).max(0.0);
        -(self.alpha / (n * m)) * s.powf(-1.0 / m - 1.0) * base.powf(1.0 / n - 1.0)
    }

    /// Saturation at pressure `p >= 0`.
    pub fn saturation(&self, p: f64) -> f64 {
        (1.0 + (p / self.alpha).powf(self.n)).powf(-self.m())
    }
}

/// The imbibition/drainage pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapillaryCurvePair {
    pub imbibition: VanGenuchten,
    pub drainage: VanGenuchten,
}

impl CapillaryCurvePair {
    /// Builds the pair and checks `p_c^(d) > p_c^(i)` on a sample grid.
    pub fn new(imbibition: VanGenuchten, drainage: VanGenuchten) -> Result<Self> {
        let pair = Self {
            imbibition,
            drainage,
        };
        for k in 1..1000 {
            let s = k as f64 / 1000.0;
            let (pi, pd) = (imbibition.pressure(s), drainage.pressure(s));
            if !(pd > pi) {
                return Err(HysteraError::Inconsistent(format!(
                    "drainage curve must lie above imbibition curve; at S = {s} got p_d = {pd}, p_i = {pi}"
                )));
            }
        }
        Ok(pair)
    }

    pub fn curve(&self, branch: Branch) -> &VanGenuchten {
        match branch {
            Branch::Imbibition => &self.imbibition,
            Branch::Drainage => &self.drainage,
        }
    }

    /// `p_c^(j)(S)` for `0 < S <= 1`.
    pub fn pc_eval(&self, branch: Branch, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(domain(
                "pc_eval",
                format!("saturation {s} is at or below the degenerate point 0"),
            ));
        }
        if s > 1.0 {
            return Err(domain("pc_eval", format!("saturation {s} exceeds 1")));
        }
        Ok(self.curve(branch).pressure(s))
    }

    /// Inverse of [`pc_eval`](Self::pc_eval) on `p >= 0`.
    pub fn pc_inverse(&self, branch: Branch, p: f64) -> Result<f64> {
        if !(p >= 0.0) {
            return Err(domain(
                "pc_inverse",
                format!("pressure {p} is outside the curve range [0, inf)"),
            ));
        }
        Ok(self.curve(branch).saturation(p))
    }

    /// `dp_c^(j)/dS`.
    pub fn pc_slope(&self, branch: Branch, s: f64) -> Result<f64> {
        self.pc_eval(branch, s)?;
        Ok(self.curve(branch).slope(s))
    }
}

impl Default for CapillaryCurvePair {
    fn default() -> Self {
        Self {
            imbibition: VanGenuchten { alpha: 1.0, n: 2.0 },
            drainage: VanGenuchten { alpha: 2.0, n: 2.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_saturation_is_zero_pressure() {
        let c = CapillaryCurvePair::default();
        for b in Branch::BOTH {
            assert_eq!(c.pc_eval(b, 1.0).unwrap(), 0.0);
            assert_eq!(c.pc_inverse(b, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn drainage_half_saturation_matches_hand_value() {
        // alpha = 2, n = 2, m = 1/2: 2 * (0.5^-2 - 1)^(1/2) = 2 * sqrt(3)
        let c = CapillaryCurvePair::default();
        let p = c.pc_eval(Branch::Drainage, 0.5).unwrap();
        assert!((p - 3.464_101_615_137_754_6).abs() < 1e-14);
    }

    #[test]
    fn degenerate_saturations_are_rejected() {
        let c = CapillaryCurvePair::default();
        assert!(c.pc_eval(Branch::Imbibition, 0.0).is_err());
        assert!(c.pc_eval(Branch::Drainage, -0.1).is_err());
        assert!(c.pc_eval(Branch::Drainage, 1.0 + 1e-12).is_err());
        assert!(c.pc_inverse(Branch::Drainage, -1e-9).is_err());
    }

    #[test]
    fn inverted_ordering_is_rejected() {
        let r = CapillaryCurvePair::new(
            VanGenuchten::new(2.0, 2.0).unwrap(),
            VanGenuchten::new(1.0, 2.0).unwrap(),
        );
        assert!(matches!(r, Err(HysteraError::Inconsistent(_))));
    }

    #[test]
    fn slope_matches_finite_difference() {
        let c = CapillaryCurvePair::default();
        for b in Branch::BOTH {
            for &s in &[0.05, 0.3, 0.7, 0.95] {
                let h = 1e-6;
                let fd = (c.pc_eval(b, s + h).unwrap() - c.pc_eval(b, s - h).unwrap()) / (2.0 * h);
                let an = c.pc_slope(b, s).unwrap();
                assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "{b:?} {s}");
            }
        }
    }
}
