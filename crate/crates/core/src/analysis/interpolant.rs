//! Piecewise-constant and piecewise-linear time interpolants of a trajectory.

use crate::error::{domain, Result};
use crate::grid::Grid;
use crate::stepper::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolant {
    /// `w_n` on `(t_{n-1}, t_n]`.
    Hat,
    /// `w_{n-1}` on `(t_{n-1}, t_n]`.
    Check,
    /// Linear between `w_{n-1}` and `w_n`.
    Bar,
}

/// Step index `n` with `t ∈ (t_{n-1}, t_n]`, or 0 at `t = 0`.
fn locate(traj: &Trajectory, t: f64) -> Result<usize> {
    let t_end = traj.t_final();
    if !(t >= 0.0 && t <= t_end) {
        return Err(domain("interpolant_eval", format!("t = {t} outside [0, {t_end}]")));
    }
    if t == 0.0 {
        return Ok(0);
    }
    Ok(traj.times.partition_point(|&x| x < t))
}

fn eval_at(traj: &Trajectory, kind: Interpolant, n: usize, t: f64, field: impl Fn(usize) -> f64) -> f64 {
    if n == 0 {
        return field(0);
    }
    match kind {
        Interpolant::Hat => field(n),
        Interpolant::Check => field(n - 1),
        Interpolant::Bar => {
            let (t0, t1) = (traj.times[n - 1], traj.times[n]);
            let s = (t - t0) / (t1 - t0);
            field(n - 1) + s * (field(n) - field(n - 1))
        }
    }
}

/// `(u, v)` of the chosen interpolant at time `t` and node `node`.
pub fn interpolant_eval(traj: &Trajectory, kind: Interpolant, t: f64, node: usize) -> Result<(f64, f64)> {
    let n = locate(traj, t)?;
    Ok((
        eval_at(traj, kind, n, t, |k| traj.states[k].u[node]),
        eval_at(traj, kind, n, t, |k| traj.states[k].v[node]),
    ))
}

/// `(∫‖hat - bar‖², ∫‖check - hat‖²)` over `[0, T]` for the pair `(u, v)`,
/// with two-point Gauss quadrature per step (exact for these quadratics).
pub fn interpolant_gaps(traj: &Trajectory, grid: &Grid) -> Result<(f64, f64)> {
    let g = 0.5 / 3f64.sqrt();
    let nodes = grid.n_nodes();
    let mut hat_bar = 0.0;
    let mut check_hat = 0.0;
    for n in 1..traj.states.len() {
        let (t0, t1) = (traj.times[n - 1], traj.times[n]);
        let dt = t1 - t0;
        for s in [0.5 - g, 0.5 + g] {
            let t = t0 + s * dt;
            let mut d1 = vec![0.0; 2 * nodes];
            let mut d2 = vec![0.0; 2 * nodes];
            for k in 0..nodes {
                let h = interpolant_eval(traj, Interpolant::Hat, t, k)?;
                let b = interpolant_eval(traj, Interpolant::Bar, t, k)?;
                let c = interpolant_eval(traj, Interpolant::Check, t, k)?;
                d1[k] = h.0 - b.0;
                d1[nodes + k] = h.1 - b.1;
                d2[k] = c.0 - h.0;
                d2[nodes + k] = c.1 - h.1;
            }
            let (u1, v1) = d1.split_at(nodes);
            let (u2, v2) = d2.split_at(nodes);
            hat_bar += 0.5 * dt * (grid.l2_norm_sq(u1)? + grid.l2_norm_sq(v1)?);
            check_hat += 0.5 * dt * (grid.l2_norm_sq(u2)? + grid.l2_norm_sq(v2)?);
        }
    }
    Ok((hat_bar, check_hat))
}
