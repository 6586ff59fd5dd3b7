//! Diagnostics over completed trajectories.

pub mod interpolant;
pub mod scan;
pub mod sweep;

pub use interpolant::{interpolant_eval, interpolant_gaps, Interpolant};
pub use scan::{band_drift, loop_area, scan_loop_0d, triangle_forcing, ScanTrajectory};
pub use sweep::{fit_log_slope, RunSummary, SweepRow, SweepTable};

use std::io::Write;

use crate::constitutive::{Branch, BoxBounds, ConstitutiveSet, RhoCurves};
use crate::error::Result;
use crate::grid::Grid;
use crate::stepper::Trajectory;

/// Extremes of the nodal fields over all nodes and time levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub s: (f64, f64),
    pub p: (f64, f64),
}

pub fn extrema(traj: &Trajectory) -> Extrema {
    let span = |f: &dyn Fn(&crate::stepper::State) -> &[f64]| {
        traj.states.iter().flat_map(|s| f(s).iter().copied()).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), x| (lo.min(x), hi.max(x)),
        )
    };
    Extrema {
        u: span(&|s| &s.u),
        v: span(&|s| &s.v),
        s: span(&|s| &s.s),
        p: span(&|s| &s.p),
    }
}

/// Outcome of a bound check; `worst` is the largest violation (0 if none).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub passed: bool,
    pub worst: f64,
    pub extrema: Extrema,
}

fn excess(x: (f64, f64), lo: f64, hi: f64) -> f64 {
    (lo - x.0).max(x.1 - hi).max(0.0)
}

/// `u ∈ [u_l, u_r]` and `v ∈ [v_l, v_r]` everywhere, up to `tol`.
pub fn check_box_bounds(traj: &Trajectory, b: &BoxBounds, tol: f64) -> BoundCheck {
    let e = extrema(traj);
    let worst = excess(e.u, b.u_l, b.u_r).max(excess(e.v, b.v_l, b.v_r));
    BoundCheck {
        passed: worst <= tol,
        worst,
        extrema: e,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationCheck {
    pub bounds: BoundCheck,
    /// `p_c⁽ⁱ⁾(S_r)` and `p_c⁽ᵈ⁾(S_l)`.
    pub p_range: (f64, f64),
    /// `μ < S_l`, so the permeability cut never acts on the orbit.
    pub mu_below_s_l: bool,
}

impl SaturationCheck {
    pub fn passed(&self) -> bool {
        self.bounds.passed && self.mu_below_s_l
    }
}

/// `S ∈ [S_l, S_r]` and `p ∈ [p_c⁽ⁱ⁾(S_r), p_c⁽ᵈ⁾(S_l)]`, up to `tol`.
pub fn check_saturation_bounds(
    traj: &Trajectory,
    b: &BoxBounds,
    cons: &ConstitutiveSet,
    tol: f64,
) -> Result<SaturationCheck> {
    let e = extrema(traj);
    let p_lo = cons.curves.pc_eval(Branch::Imbibition, b.s_r)?;
    let p_hi = cons.curves.pc_eval(Branch::Drainage, b.s_l)?;
    let worst = excess(e.s, b.s_l, b.s_r).max(excess(e.p, p_lo, p_hi));
    Ok(SaturationCheck {
        bounds: BoundCheck {
            passed: worst <= tol,
            worst,
            extrema: e,
        },
        p_range: (p_lo, p_hi),
        mu_below_s_l: cons.params.mu < b.s_l,
    })
}

/// `A = Σ(‖u_k - u_{k-1}‖² + ‖v_k - v_{k-1}‖²)`, `B = Σ Δt ‖∇u_k‖²`,
/// `M∞ = max_k(‖u_k‖² + ‖v_k‖²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLedger {
    pub a: f64,
    pub b: f64,
    pub m_inf: f64,
}

pub fn energy_ledger(traj: &Trajectory, grid: &Grid) -> Result<EnergyLedger> {
    let k = grid.unit_stiffness();
    let mut a = 0.0;
    let mut b = 0.0;
    let s0 = traj.initial();
    let mut m_inf = grid.l2_norm_sq(&s0.u)? + grid.l2_norm_sq(&s0.v)?;
    for (n, s) in traj.states.iter().enumerate().skip(1) {
        let prev = &traj.states[n - 1];
        let du: Vec<f64> = s.u.iter().zip(prev.u.iter()).map(|(x, y)| x - y).collect();
        let dv: Vec<f64> = s.v.iter().zip(prev.v.iter()).map(|(x, y)| x - y).collect();
        a += grid.l2_norm_sq(&du)? + grid.l2_norm_sq(&dv)?;
        b += (traj.times[n] - traj.times[n - 1]) * k.quadratic_form(&s.u);
        m_inf = m_inf.max(grid.l2_norm_sq(&s.u)? + grid.l2_norm_sq(&s.v)?);
    }
    Ok(EnergyLedger { a, b, m_inf })
}

/// `E = Σ_n Δt (‖[u_n - ρ⁽ᵈ⁾(v_n)]₊‖² + ‖[ρ⁽ⁱ⁾(v_n) - u_n]₊‖²)`, right-endpoint rule.
pub fn tau_mismatch(traj: &Trajectory, rho: &RhoCurves, grid: &Grid) -> Result<f64> {
    let mut e = 0.0;
    for n in 1..traj.states.len() {
        let s = &traj.states[n];
        let over: Vec<f64> = s
            .u
            .iter()
            .zip(s.v.iter())
            .map(|(&u, &v)| (u - rho.rho(Branch::Drainage, v)).max(0.0))
            .collect();
        let under: Vec<f64> = s
            .u
            .iter()
            .zip(s.v.iter())
            .map(|(&u, &v)| (rho.rho(Branch::Imbibition, v) - u).max(0.0))
            .collect();
        e += (traj.times[n] - traj.times[n - 1]) * (grid.l2_norm_sq(&over)? + grid.l2_norm_sq(&under)?);
    }
    Ok(e)
}

/// `½‖u₀‖² + ‖∫_{v₀}^{v_T} ρ⁽ᵈ⁾‖₁`, the data term that bounds `E / τ`.
pub fn mismatch_bound(traj: &Trajectory, rho: &RhoCurves, grid: &Grid) -> Result<f64> {
    let (s0, st) = (traj.initial(), traj.last());
    let m = grid.lumped_mass();
    let l1: f64 = (0..grid.n_nodes())
        .map(|k| m[k] * rho.integral(Branch::Drainage, s0.v[k], st.v[k]).abs())
        .sum();
    Ok(0.5 * grid.l2_norm_sq(&s0.u)? + l1)
}

/// Least-squares slope of `ln(‖u‖² + ‖v‖²)` against `t`.
pub fn gronwall_slope(traj: &Trajectory, grid: &Grid) -> Result<f64> {
    let mut pts = Vec::with_capacity(traj.states.len());
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let q = grid.l2_norm_sq(&s.u)? + grid.l2_norm_sq(&s.v)?;
        if q > 0.0 {
            pts.push((*t, q.ln()));
        }
    }
    Ok(sweep::least_squares(&pts).map_or(0.0, |f| f.slope))
}

/// One pass/fail line of a diagnostics report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub tol: f64,
    /// Reported only; outside the hypotheses of the corresponding estimate.
    pub informational: bool,
}

/// Per-run scalars and check outcomes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsReport {
    pub values: Vec<(String, f64)>,
    pub checks: Vec<CheckResult>,
}

impl DiagnosticsReport {
    pub fn push(&mut self, key: impl Into<String>, value: f64) {
        self.values.push((key.into(), value));
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, worst: f64, tol: f64) {
        self.checks.push(CheckResult {
            name: name.into(),
            passed,
            worst,
            tol,
            informational: false,
        });
    }

    pub fn note(&mut self, name: impl Into<String>, passed: bool, worst: f64, tol: f64) {
        self.checks.push(CheckResult {
            name: name.into(),
            passed,
            worst,
            tol,
            informational: true,
        });
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// First failing non-informational check.
    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed && !c.informational)
    }

    pub fn all_passed(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn add_extrema(&mut self, e: &Extrema) {
        for (name, (lo, hi)) in [("u", e.u), ("v", e.v), ("S", e.s), ("p", e.p)] {
            self.push(format!("{name}_min"), lo);
            self.push(format!("{name}_max"), hi);
        }
    }

    /// Writes `key,value` rows; checks become `check.<name>` with 1/0 and the
    /// worst violation as `worst.<name>`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "key,value")?;
        for (k, v) in &self.values {
            writeln!(w, "{k},{v}")?;
        }
        for c in &self.checks {
            writeln!(w, "check.{},{}", c.name, u8::from(c.passed))?;
            writeln!(w, "worst.{},{}", c.name, c.worst)?;
        }
        Ok(())
    }
}
