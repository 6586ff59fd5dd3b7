//! Mualem relative permeability with an optional floor and a low-saturation cut.

use crate::error::{HysteraError, Result};

/// `k(S) = √S (1 - (1 - S^(1/m))^m)² + k₀`, clamped outside `[0, 1]`.
///
/// With `mu > 0` the curve is frozen at `k(mu)` for `S < mu`, which keeps the
/// diffusivity away from zero when `k(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermeabilityCurve {
    pub m: f64,
    pub floor: f64,
    pub cut: f64,
}

impl PermeabilityCurve {
    pub fn new(m: f64, floor: f64, cut: f64) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) {
            return Err(HysteraError::Inconsistent(format!(
                "Mualem exponent m must lie in (0, 1), got {m}"
            )));
        }
        if !(floor >= 0.0 && floor.is_finite()) {
            return Err(HysteraError::Inconsistent(format!(
                "permeability floor must be non-negative, got {floor}"
            )));
        }
        if !(0.0..1.0).contains(&cut) {
            return Err(HysteraError::Inconsistent(format!(
                "permeability cut mu must lie in [0, 1), got {cut}"
            )));
        }
        Ok(Self { m, floor, cut })
    }

    fn mualem(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let inner = 1.0 - (1.0 - s.powf(1.0 / self.m)).max(0.0).powf(self.m);
        s.sqrt() * inner * inner
    }

    /// Base curve without the `mu` cut.
    pub fn base(&self, s: f64) -> f64 {
        self.mualem(s) + self.floor
    }

    /// `k_mu(S)`; total on ℝ.
    pub fn rel_perm(&self, s: f64) -> f64 {
        let s = if s < self.cut { self.cut } else { s };
        self.base(s)
    }

    /// Smallest value `rel_perm` can return.
    pub fn min_value(&self) -> f64 {
        self.base(self.cut)
    }
}
