//! The primary curves in the `(v, u)` plane, the rate operator `Φ_τ` and the
//! invariant box spanned by the initial data.
//!
//! For each branch the table holds `v_j(u) = S_j(b⁻¹(u)) + u` on a uniform
//! `u` grid over `[U_m, U_M]`. Since `b' <= ½ |dS_j/dp|`, every `v_j` is strictly
//! decreasing with `dv_j/du <= -1`, so it inverts to a decreasing `ρ_j(v)`
//! with slopes in `[-1, 0)`. Outside `[V_m, V_M]` both curves are continued by
//! constants.

use std::io::Write;

use super::capillary::{Branch, CapillaryCurvePair};
use super::play::PlayMap;
use crate::error::{HysteraError, Result};

/// Absolute tolerance for table self-refinement.
pub const TOL_TABLE: f64 = 1e-6;

#[derive(Debug, Clone)]
struct Table {
    // ascending in v, descending in u
    v: Vec<f64>,
    u: Vec<f64>,
    // ∫_{V_m}^{v[k]} ρ
    area: Vec<f64>,
}

impl Table {
    fn eval(&self, v: f64, lo: f64, hi: f64) -> f64 {
        let n = self.v.len();
        if v <= self.v[0] {
            return hi;
        }
        if v >= self.v[n - 1] {
            return lo;
        }
        let k = self.v.partition_point(|&x| x <= v) - 1;
        let t = (v - self.v[k]) / (self.v[k + 1] - self.v[k]);
        self.u[k] + t * (self.u[k + 1] - self.u[k])
    }

    fn antiderivative(&self, v: f64, lo: f64, hi: f64) -> f64 {
        let n = self.v.len();
        let (v_m, v_big) = (self.v[0], self.v[n - 1]);
        if v <= v_m {
            return hi * (v - v_m);
        }
        if v >= v_big {
            return self.area[n - 1] + lo * (v - v_big);
        }
        let k = self.v.partition_point(|&x| x <= v) - 1;
        let w = v - self.v[k];
        self.area[k] + 0.5 * w * (self.u[k] + self.eval(v, lo, hi))
    }
}

/// Tabulated `ρ⁽ⁱ⁾`, `ρ⁽ᵈ⁾` with the range constants `U_m, U_M, V_m, V_M`.
#[derive(Debug, Clone)]
pub struct RhoCurves {
    imbibition: Table,
    drainage: Table,
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Largest observed `|ρ'|`.
    pub slope_bound: f64,
}

impl RhoCurves {
    /// Builds both tables from the unregularized play map.
    pub fn build(curves: &CapillaryCurvePair, play: &PlayMap, n_rho: usize) -> Result<Self> {
        if n_rho < 2 {
            return Err(HysteraError::Inconsistent(format!("rho table size must be >= 2, got {n_rho}")));
        }
        if play.delta() != 0.0 {
            return Err(HysteraError::Inconsistent(
                "rho tables must be built from the unregularized play map".into(),
            ));
        }
        let u_min = play.u_min();
        let u_max = play.u_max();
        let v_min = u_max;
        let v_max = 1.0 + u_min;
        let du = (u_max - u_min) / n_rho as f64;
        let us: Vec<f64> = (0..=n_rho).map(|k| u_min + k as f64 * du).collect();
        let pressures: Vec<f64> = us[1..n_rho]
            .iter()
            .map(|&u| play.play_inverse(u))
            .collect::<Result<_>>()?;

        let mut slope_bound: f64 = 0.0;
        let mut build = |branch: Branch| -> Result<Table> {
            let mut v = Vec::with_capacity(n_rho + 1);
            v.push(v_max);
            for (k, &p) in pressures.iter().enumerate() {
                v.push(curves.pc_inverse(branch, p)? + us[k + 1]);
            }
            v.push(v_min);
            for k in 0..n_rho {
                if !(v[k + 1] < v[k]) {
                    return Err(HysteraError::Inconsistent(format!(
                        "{} table not strictly decreasing at u = {} (v = {} then {}); play map slope exceeds the consistency bound",
                        branch.name(),
                        us[k + 1],
                        v[k],
                        v[k + 1]
                    )));
                }
                slope_bound = slope_bound.max(du / (v[k] - v[k + 1]));
            }
            v.reverse();
            let u: Vec<f64> = us.iter().rev().copied().collect();
            let mut area = Vec::with_capacity(v.len());
            area.push(0.0);
            for k in 0..n_rho {
                area.push(area[k] + 0.5 * (v[k + 1] - v[k]) * (u[k] + u[k + 1]));
            }
            Ok(Table { v, u, area })
        };
        let imbibition = build(Branch::Imbibition)?;
        let drainage = build(Branch::Drainage)?;
        Ok(Self {
            imbibition,
            drainage,
            u_min,
            u_max,
            v_min,
            v_max,
            slope_bound,
        })
    }

    fn table(&self, branch: Branch) -> &Table {
        match branch {
            Branch::Imbibition => &self.imbibition,
            Branch::Drainage => &self.drainage,
        }
    }

    /// `ρ⁽ʲ⁾(v)` with constant continuation outside `[V_m, V_M]`.
    pub fn rho(&self, branch: Branch, v: f64) -> f64 {
        self.table(branch).eval(v, self.u_min, self.u_max)
    }

    /// `∫_a^b ρ⁽ʲ⁾`, exact for the piecewise-linear table.
    pub fn integral(&self, branch: Branch, a: f64, b: f64) -> f64 {
        let t = self.table(branch);
        t.antiderivative(b, self.u_min, self.u_max) - t.antiderivative(a, self.u_min, self.u_max)
    }

    /// Table knots `(v, ρ)` in ascending `v`.
    pub fn knots(&self, branch: Branch) -> impl Iterator<Item = (f64, f64)> + '_ {
        let t = self.table(branch);
        t.v.iter().copied().zip(t.u.iter().copied())
    }

    /// `Φ_τ(u, v) = -(1/τ)[u - ρ⁽ᵈ⁾(v)]₊ - (1/τ)[u - ρ⁽ⁱ⁾(v)]₋`.
    pub fn phi_tau(&self, u: f64, v: f64, tau: f64) -> f64 {
        let rd = self.rho(Branch::Drainage, v);
        let ri = self.rho(Branch::Imbibition, v);
        -(u - rd).max(0.0) / tau - (u - ri).min(0.0) / tau
    }

    /// The three-branch form of [`phi_tau`](Self::phi_tau).
    pub fn phi_tau_branches(&self, u: f64, v: f64, tau: f64) -> f64 {
        let rd = self.rho(Branch::Drainage, v);
        let ri = self.rho(Branch::Imbibition, v);
        if u > rd {
            (rd - u) / tau
        } else if u < ri {
            (ri - u) / tau
        } else {
            0.0
        }
    }

    /// Writes `v,rho_i` or `v,rho_d` rows.
    pub fn write_csv<W: Write>(&self, branch: Branch, mut w: W) -> Result<()> {
        let header = match branch {
            Branch::Imbibition => "v,rho_i",
            Branch::Drainage => "v,rho_d",
        };
        writeln!(w, "{header}")?;
        for (v, r) in self.knots(branch) {
            writeln!(w, "{v},{r}")?;
        }
        Ok(())
    }
}

/// Corners of the invariant rectangle in `(u, v)` and the implied saturation range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBounds {
    pub u_l: f64,
    pub u_r: f64,
    pub v_l: f64,
    pub v_r: f64,
    pub s_l: f64,
    pub s_r: f64,
}

impl BoxBounds {
    pub fn new(u0: (f64, f64), v0: (f64, f64), rho: &RhoCurves, tau: f64) -> Result<Self> {
        let (v_l, v_r) = v0;
        if !(rho.v_min < v_l && v_l <= v_r && v_r < rho.v_max) {
            return Err(HysteraError::Precondition(format!(
                "v range [{v_l}, {v_r}] must satisfy {} < v_l <= v_r < {}",
                rho.v_min, rho.v_max
            )));
        }
        let u_r = rho.rho(Branch::Drainage, v_l);
        let u_l = rho.rho(Branch::Imbibition, v_r);
        if !(u0.0 >= u_l && u0.1 <= u_r && u0.0 <= u0.1) {
            return Err(HysteraError::Precondition(format!(
                "initial u range [{}, {}] is not inside [rho_i(v_r), rho_d(v_l)] = [{u_l}, {u_r}]; initial pressure must lie between the primary curves",
                u0.0, u0.1
            )));
        }
        for (u, v) in [(u_r, v_l), (u_l, v_r)] {
            let phi = rho.phi_tau(u, v, tau);
            if phi != 0.0 {
                return Err(HysteraError::Inconsistent(format!(
                    "rate does not vanish at box corner (u, v) = ({u}, {v}): {phi}"
                )));
            }
        }
        Ok(Self {
            u_l,
            u_r,
            v_l,
            v_r,
            s_l: v_l - u_r,
            s_r: v_r - u_l,
        })
    }
}
