//! Implicit Euler in time with a fixed-point inner loop.
//!
//! One step solves
//!
//! ```text
//! (u_n, φ) + Δt (D_{n-1} ∇u_n, ∇φ) = (u_{n-1}, φ) + Δt (F_{n-1}, ∇φ) + Δt (Φ_τ(u_n, v_n), φ)
//! v_n = v_{n-1} + Δt Φ_τ(u_n, v_n)
//! ```
//!
//! by iterating the map `B(ũ, ṽ) = (u*, v*)` that puts `Φ_τ(ũ, ṽ)` on the right
//! of both equations. `B` contracts in the norm
//! `√(‖u‖² + 2 Δt D_m ‖∇u‖² + ‖v‖²)` once Δt is small enough; a step that fails
//! to contract is retried with half the step.

use crate::constitutive::ConstitutiveSet;
use crate::error::{HysteraError, Result};
use crate::grid::{assemble_step_system, FieldVector, Grid, Role, SparseOperator, StepSystem};
use crate::linalg::solve_linear;

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Tolerance on successive fixed-point differences.
    pub eps_fp: f64,
    pub max_iter: usize,
    pub max_halvings: u32,
    pub gravity: [f64; 2],
    /// Include the gravity flux `F = g k(S)`.
    pub flux: bool,
    /// On a failed step, restart the whole run at the halved Δt instead of
    /// subdividing only that step.
    pub rebase_on_halving: bool,
    /// Require `ρ⁽ⁱ⁾(v₀) <= u₀ <= ρ⁽ᵈ⁾(v₀)` at every node.
    pub check_initial_band: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_final: 1.0,
            eps_fp: 1e-10,
            max_iter: 200,
            max_halvings: 20,
            gravity: [0.0, 0.0],
            flux: false,
            rebase_on_halving: true,
            check_initial_band: true,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(HysteraError::Usage(what.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad("t_final must be non-negative");
        }
        if !(self.eps_fp > 0.0) {
            return bad("eps_fp must be positive");
        }
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1");
        }
        Ok(())
    }

    /// Number of steps of size `dt` in `[0, t_final]`.
    pub fn steps(&self, dt: f64) -> Result<usize> {
        let n = (self.t_final / dt).round();
        if (n * dt - self.t_final).abs() > 1e-9 * self.t_final.max(dt) {
            return Err(HysteraError::Usage(format!(
                "t_final = {} is not a multiple of dt = {dt}",
                self.t_final
            )));
        }
        Ok(n as usize)
    }
}

/// Nodal fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: FieldVector,
    pub v: FieldVector,
    /// `S = v - u`.
    pub s: FieldVector,
    /// `p = b_δ⁻¹(u)`.
    pub p: FieldVector,
}

impl State {
    pub fn new(grid: &Grid, cons: &ConstitutiveSet, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let u = FieldVector::new(Role::U, u, grid)?;
        let v = FieldVector::new(Role::V, v, grid)?;
        let s = u.iter().zip(v.iter()).map(|(a, b)| b - a).collect();
        let p = u.iter().map(|&x| cons.pressure(x)).collect::<Result<_>>()?;
        Ok(Self {
            s: FieldVector::new(Role::S, s, grid)?,
            p: FieldVector::new(Role::P, p, grid)?,
            u,
            v,
        })
    }

    /// Builds `(u₀, v₀)` from saturation `S₀(x)` and band position `θ(x)`,
    /// `p₀ = p_c⁽ⁱ⁾(S₀) + θ (p_c⁽ᵈ⁾(S₀) - p_c⁽ⁱ⁾(S₀))`.
    pub fn from_saturation<F>(grid: &Grid, cons: &ConstitutiveSet, f: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> (f64, f64),
    {
        let mut u = Vec::with_capacity(grid.n_nodes());
        let mut v = Vec::with_capacity(grid.n_nodes());
        for k in 0..grid.n_nodes() {
            let (s, theta) = f(grid.coords(k));
            let (a, b) = cons.band_state(s, theta)?;
            u.push(a);
            v.push(b);
        }
        Self::new(grid, cons, u, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Time at the end of the step.
    pub t: f64,
    pub iters: usize,
    pub residual: f64,
    /// Last ratio of successive residuals; 0 if the last residual vanished.
    pub contraction: f64,
    pub dt: f64,
    pub linear_iters: usize,
}

/// States at `t_0 = 0, t_1, …` with one report per step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub reports: Vec<StepReport>,
    /// Step size of the emitted time grid.
    pub dt: f64,
    /// Number of Δt halvings that were needed.
    pub halvings: u32,
}

impl Trajectory {
    pub fn initial(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states.last().unwrap()
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().unwrap()
    }
}

/// Everything that stays fixed during one step's fixed-point loop.
pub struct StepContext<'a> {
    grid: &'a Grid,
    cons: &'a ConstitutiveSet,
    prev: &'a State,
    system: StepSystem,
    base_rhs: Vec<f64>,
    unit_k: &'a SparseOperator,
    d_min: f64,
    dt: f64,
}

impl<'a> StepContext<'a> {
    pub fn new(
        grid: &'a Grid,
        cons: &'a ConstitutiveSet,
        cfg: &StepperConfig,
        unit_k: &'a SparseOperator,
        prev: &'a State,
        dt: f64,
    ) -> Result<Self> {
        let n = grid.n_nodes();
        let mut d = Vec::with_capacity(n);
        let mut f = Vec::with_capacity(n);
        for k in 0..n {
            let (u, v) = (prev.u[k], prev.v[k]);
            let kr = cons.conductivity(u, v);
            d.push(kr / cons.play.slope(prev.p[k]));
            f.push(if cfg.flux {
                [cfg.gravity[0] * kr, cfg.gravity[1] * kr]
            } else {
                [0.0, 0.0]
            });
        }
        let system = assemble_step_system(grid, &d, &f, dt)?;
        let mass = grid.lumped_mass();
        let base_rhs = (0..n).map(|k| mass[k] * prev.u[k] + dt * system.load[k]).collect();
        let d_min = d.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            grid,
            cons,
            prev,
            system,
            base_rhs,
            unit_k,
            d_min,
            dt,
        })
    }

    /// Smallest nodal diffusivity at the previous level.
    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    /// One application of `B`; returns `(u*, v*)` and the linear-solve iterations.
    pub fn map_b(&self, u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>, usize)> {
        let n = self.grid.n_nodes();
        if u.len() != n || v.len() != n {
            return Err(HysteraError::Usage(format!("iterate length differs from {n} nodes")));
        }
        let mass = self.grid.lumped_mass();
        let mut rhs = self.base_rhs.clone();
        let mut v_new = Vec::with_capacity(n);
        for k in 0..n {
            if !(u[k].is_finite() && v[k].is_finite()) {
                return Err(HysteraError::Corrupted(format!(
                    "non-finite iterate (u, v) = ({}, {}) at node {k}",
                    u[k], v[k]
                )));
            }
            let phi = self.cons.phi(u[k], v[k]);
            rhs[k] += self.dt * mass[k] * phi;
            v_new.push(self.prev.v[k] + self.dt * phi);
        }
        let condensed = self.system.condense_rhs(self.grid, &rhs, &self.prev.u);
        let (x, iters) = solve_linear(&self.system.matrix, &condensed)?;
        let mut u_new = self.prev.u.values.clone();
        for (&k, xi) in self.grid.interior().iter().zip(x) {
            u_new[k] = xi;
        }
        Ok((u_new, v_new, iters))
    }

    /// `√(‖du‖² + 2 Δt D_m ‖∇du‖² + ‖dv‖²)`.
    pub fn norm(&self, du: &[f64], dv: &[f64]) -> f64 {
        let g = self.grid;
        let a = g.l2_norm_sq(du).unwrap_or(f64::NAN);
        let b = self.unit_k.quadratic_form(du).max(0.0);
        let c = g.l2_norm_sq(dv).unwrap_or(f64::NAN);
        (a + 2.0 * self.dt * self.d_min * b + c).sqrt()
    }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Advances a state by time steps.
pub struct Stepper<'a> {
    pub grid: &'a Grid,
    pub cons: &'a ConstitutiveSet,
    pub cfg: StepperConfig,
    unit_k: SparseOperator,
}

impl<'a> Stepper<'a> {
    pub fn new(grid: &'a Grid, cons: &'a ConstitutiveSet, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            grid,
            cons,
            cfg,
            unit_k: grid.unit_stiffness(),
        })
    }

    pub fn context<'b>(&'b self, prev: &'b State, dt: f64) -> Result<StepContext<'b>> {
        StepContext::new(self.grid, self.cons, &self.cfg, &self.unit_k, prev, dt)
    }

    /// `‖∇w‖²` through the unit stiffness.
    pub fn grad_norm_sq(&self, w: &[f64]) -> f64 {
        self.unit_k.quadratic_form(w)
    }

    /// Iterates `B` from `(u_{n-1}, v_{n-1})` until successive iterates differ
    /// by at most `eps_fp`. `t` is the time at the end of the step.
    pub fn fixed_point_solve(&self, prev: &State, t: f64, dt: f64) -> Result<(State, StepReport)> {
        let ctx = self.context(prev, dt)?;
        let mut u = prev.u.values.clone();
        let mut v = prev.v.values.clone();
        let mut last: Option<f64> = None;
        let mut ratio = 0.0;
        let mut linear_iters = 0;
        for it in 1..=self.cfg.max_iter {
            let (un, vn, li) = ctx.map_b(&u, &v)?;
            linear_iters += li;
            let res = ctx.norm(&diff(&un, &u), &diff(&vn, &v));
            if !res.is_finite() {
                return Err(HysteraError::Corrupted(format!("non-finite fixed-point residual at t = {t}")));
            }
            if let Some(r0) = last {
                ratio = if res == 0.0 { 0.0 } else { res / r0 };
                if ratio >= 1.0 && res > self.cfg.eps_fp {
                    return Err(HysteraError::NonContraction {
                        t,
                        detail: format!(
                            "dt = {dt}, iteration {it}: residual {res:e} after {r0:e} (ratio {ratio:.4})"
                        ),
                    });
                }
            }
            u = un;
            v = vn;
            if res <= self.cfg.eps_fp {
                let state = State::new(self.grid, self.cons, u, v)?;
                let report = StepReport {
                    t,
                    iters: it,
                    residual: res,
                    contraction: ratio,
                    dt,
                    linear_iters,
                };
                return Ok((state, report));
            }
            last = Some(res);
        }
        Err(HysteraError::NonContraction {
            t,
            detail: format!(
                "dt = {dt}: residual {:e} after {} iterations (ratio {ratio:.4})",
                last.unwrap_or(f64::NAN),
                self.cfg.max_iter
            ),
        })
    }

    fn check_initial(&self, s: &State) -> Result<()> {
        if !self.cfg.check_initial_band {
            return Ok(());
        }
        let rho = &self.cons.rho;
        for k in 0..self.grid.n_nodes() {
            let (u, v) = (s.u[k], s.v[k]);
            let lo = rho.rho(crate::constitutive::Branch::Imbibition, v);
            let hi = rho.rho(crate::constitutive::Branch::Drainage, v);
            let tol = 1e-9;
            if u < lo - tol || u > hi + tol {
                return Err(HysteraError::Precondition(format!(
                    "initial data at node {k} is off the band: u = {u}, [rho_i, rho_d](v = {v}) = [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Runs from `initial` to `t_final`.
    pub fn time_march(&self, initial: State) -> Result<Trajectory> {
        self.check_initial(&initial)?;
        let mut dt = self.cfg.dt;
        let mut halvings = 0;
        loop {
            let attempt = if self.cfg.rebase_on_halving {
                self.march_uniform(&initial, dt)
            } else {
                self.march_subdividing(&initial, dt)
            };
            match attempt {
                Ok(mut traj) => {
                    traj.halvings += halvings;
                    return Ok(traj);
                }
                Err(HysteraError::NonContraction { t, detail }) if self.cfg.rebase_on_halving => {
                    halvings += 1;
                    if halvings > self.cfg.max_halvings {
                        return Err(HysteraError::Aborted {
                            t,
                            halvings: halvings - 1,
                            detail,
                        });
                    }
                    dt *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn march_uniform(&self, initial: &State, dt: f64) -> Result<Trajectory> {
        let n = self.cfg.steps(dt)?;
        let mut traj = Trajectory {
            times: vec![0.0],
            states: vec![initial.clone()],
            reports: Vec::with_capacity(n),
            dt,
            halvings: 0,
        };
        for step in 1..=n {
            let t = step as f64 * dt;
            let (s, r) = self.fixed_point_solve(traj.last(), t, dt)?;
            traj.times.push(t);
            traj.states.push(s);
            traj.reports.push(r);
        }
        Ok(traj)
    }

    fn march_subdividing(&self, initial: &State, dt: f64) -> Result<Trajectory> {
        let n = self.cfg.steps(dt)?;
        let mut traj = Trajectory {
            times: vec![0.0],
            states: vec![initial.clone()],
            reports: Vec::with_capacity(n),
            dt,
            halvings: 0,
        };
        for step in 1..=n {
            let t0 = (step - 1) as f64 * dt;
            let prev = traj.last().clone();
            self.advance(&mut traj, prev, t0, dt, 0)?;
        }
        Ok(traj)
    }

    fn advance(&self, traj: &mut Trajectory, prev: State, t0: f64, dt: f64, depth: u32) -> Result<()> {
        match self.fixed_point_solve(&prev, t0 + dt, dt) {
            Ok((s, r)) => {
                traj.times.push(t0 + dt);
                traj.states.push(s);
                traj.reports.push(r);
                Ok(())
            }
            Err(HysteraError::NonContraction { t, detail }) => {
                if depth >= self.cfg.max_halvings {
                    return Err(HysteraError::Aborted {
                        t,
                        halvings: depth,
                        detail,
                    });
                }
                traj.halvings = traj.halvings.max(depth + 1);
                traj.dt = traj.dt.min(0.5 * dt);
                let half = 0.5 * dt;
                self.advance(traj, prev, t0, half, depth + 1)?;
                let mid = traj.last().clone();
                self.advance(traj, mid, t0 + half, half, depth + 1)
            }
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::ConstitutiveParams;

    fn cons(tau: f64) -> ConstitutiveSet {
        ConstitutiveSet::new(ConstitutiveParams {
            tau,
            n_rho: 512,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn zero_final_time_keeps_initial() {
        let c = cons(0.1);
        let g = Grid::line(1.0, 11).unwrap();
        let s0 = State::from_saturation(&g, &c, |_| (0.5, 0.5)).unwrap();
        let st = Stepper::new(&g, &c, StepperConfig { t_final: 0.0, ..Default::default() }).unwrap();
        let tr = st.time_march(s0.clone()).unwrap();
        assert_eq!(tr.states.len(), 1);
        assert_eq!(tr.states[0], s0);
    }

    #[test]
    fn uniform_band_state_is_stationary() {
        let c = cons(0.1);
        let g = Grid::line(1.0, 11).unwrap();
        let s0 = State::from_saturation(&g, &c, |_| (0.5, 0.5)).unwrap();
        let st = Stepper::new(&g, &c, StepperConfig { t_final: 0.1, ..Default::default() }).unwrap();
        let tr = st.time_march(s0.clone()).unwrap();
        for s in &tr.states {
            assert_eq!(s.v, s0.v);
            for (a, b) in s.u.iter().zip(s0.u.iter()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        assert!(tr.reports.iter().all(|r| r.iters <= 2));
    }

    #[test]
    fn off_band_initial_data_is_rejected() {
        let c = cons(0.1);
        let g = Grid::line(1.0, 5).unwrap();
        let s0 = State::from_saturation(&g, &c, |_| (0.5, 1.5)).unwrap();
        let st = Stepper::new(&g, &c, StepperConfig::default()).unwrap();
        assert!(matches!(st.time_march(s0), Err(HysteraError::Precondition(_))));
    }

    #[test]
    fn non_multiple_final_time_is_rejected() {
        let cfg = StepperConfig { dt: 0.3, t_final: 1.0, ..Default::default() };
        assert!(cfg.steps(cfg.dt).is_err());
        let cfg = StepperConfig { dt: 0.1, t_final: 1.0, ..Default::default() };
        assert_eq!(cfg.steps(cfg.dt).unwrap(), 10);
    }
}
