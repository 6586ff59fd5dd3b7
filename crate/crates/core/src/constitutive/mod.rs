//! Pointwise closure relations.

pub mod capillary;
pub mod permeability;
pub mod play;
pub mod quadrature;
pub mod rho;

pub use capillary::{Branch, CapillaryCurvePair, VanGenuchten};
pub use permeability::PermeabilityCurve;
pub use play::{PlayMap, TAIL_TOL, TOL_INV};
pub use rho::{BoxBounds, RhoCurves, TOL_TABLE};

use crate::error::{domain, HysteraError, Result};

/// Scalar parameters of the closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstitutiveParams {
    pub alpha_i: f64,
    pub alpha_d: f64,
    pub n_i: f64,
    pub n_d: f64,
    pub k0: f64,
    pub mu: f64,
    pub delta: f64,
    pub tau: f64,
    pub n_rho: usize,
}

impl Default for ConstitutiveParams {
    fn default() -> Self {
        Self {
            alpha_i: 1.0,
            alpha_d: 2.0,
            n_i: 2.0,
            n_d: 2.0,
            k0: 0.0,
            mu: 1e-3,
            delta: 1e-6,
            tau: 0.1,
            n_rho: 4096,
        }
    }
}

/// Everything needed to evaluate `D`, `F` and `Φ_τ` at a node.
#[derive(Debug, Clone)]
pub struct ConstitutiveSet {
    pub params: ConstitutiveParams,
    pub curves: CapillaryCurvePair,
    pub perm: PermeabilityCurve,
    /// `b_δ`, used for `p` and the diffusivity.
    pub play: PlayMap,
    /// `b`, used for the ρ tables and for initial data.
    pub play_base: PlayMap,
    pub rho: RhoCurves,
}

impl ConstitutiveSet {
    pub fn new(params: ConstitutiveParams) -> Result<Self> {
        if !(params.tau > 0.0 && params.tau.is_finite()) {
            return Err(HysteraError::Inconsistent(format!("tau must be positive, got {}", params.tau)));
        }
        let curves = CapillaryCurvePair::new(
            VanGenuchten::new(params.alpha_i, params.n_i)?,
            VanGenuchten::new(params.alpha_d, params.n_d)?,
        )?;
        let perm = PermeabilityCurve::new(curves.imbibition.m(), params.k0, params.mu)?;
        let play_base = PlayMap::new(curves, 0.0)?;
        let play = if params.delta == 0.0 {
            play_base.clone()
        } else {
            PlayMap::new(curves, params.delta)?
        };
        let rho = RhoCurves::build(&curves, &play_base, params.n_rho)?;
        Ok(Self {
            params,
            curves,
            perm,
            play,
            play_base,
            rho,
        })
    }

    pub fn tau(&self) -> f64 {
        self.params.tau
    }

    pub fn phi(&self, u: f64, v: f64) -> f64 {
        self.rho.phi_tau(u, v, self.params.tau)
    }

    /// `p = b_δ⁻¹(u)`.
    pub fn pressure(&self, u: f64) -> Result<f64> {
        self.play.play_inverse(u)
    }

    /// `D(u, v) = k_μ(v - u) / b_δ'(b_δ⁻¹(u))`.
    pub fn diffusivity(&self, u: f64, v: f64) -> Result<f64> {
        let slope = self.play.slope(self.pressure(u)?);
        Ok(self.perm.rel_perm(v - u) / slope)
    }

    /// `k_μ(v - u)`, the magnitude of the gravity flux.
    pub fn conductivity(&self, u: f64, v: f64) -> f64 {
        self.perm.rel_perm(v - u)
    }

    /// `(u, v)` for saturation `s` at relative position `theta` between the
    /// curves: `p = p_i + θ (p_d - p_i)`.
    pub fn band_state(&self, s: f64, theta: f64) -> Result<(f64, f64)> {
        if !(s > 0.0 && s < 1.0) {
            return Err(domain("band_state", format!("saturation {s} must lie in (0, 1)")));
        }
        let pi = self.curves.pc_eval(Branch::Imbibition, s)?;
        let pd = self.curves.pc_eval(Branch::Drainage, s)?;
        let u = self.play_base.play_eval(pi + theta * (pd - pi))?;
        Ok((u, s + u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_set_builds() {
        let c = ConstitutiveSet::new(ConstitutiveParams {
            n_rho: 256,
            ..Default::default()
        })
        .unwrap();
        let (u, v) = c.band_state(0.5, 0.5).unwrap();
        assert_eq!(c.phi(u, v), 0.0);
        assert!(c.diffusivity(u, v).unwrap() > 0.0);
    }

    #[test]
    fn zero_tau_is_rejected() {
        let r = ConstitutiveSet::new(ConstitutiveParams {
            tau: 0.0,
            ..Default::default()
        });
        assert!(r.is_err());
    }

    #[test]
    fn band_edges_sit_on_the_curves() {
        let c = ConstitutiveSet::new(ConstitutiveParams {
            n_rho: 4096,
            ..Default::default()
        })
        .unwrap();
        let (u, v) = c.band_state(0.4, 1.0).unwrap();
        assert!((c.rho.rho(Branch::Drainage, v) - u).abs() < 1e-6);
        let (u, v) = c.band_state(0.4, 0.0).unwrap();
        assert!((c.rho.rho(Branch::Imbibition, v) - u).abs() < 1e-6);
    }
}
