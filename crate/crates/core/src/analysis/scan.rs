//! Pointwise (0-D) scanning dynamics `dv/dt = Φ_τ(u(t), v)` under a prescribed `u(t)`.

use crate::constitutive::{Branch, ConstitutiveSet};
use crate::error::{domain, HysteraError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanTrajectory {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub s: Vec<f64>,
    pub p: Vec<f64>,
}

/// Piecewise-linear interpolation of `(t, u)` samples, clamped at the ends.
fn forcing_at(path: &[(f64, f64)], t: f64) -> f64 {
    let k = path.partition_point(|&(s, _)| s <= t);
    if k == 0 {
        return path[0].1;
    }
    if k == path.len() {
        return path[k - 1].1;
    }
    let (t0, u0) = path[k - 1];
    let (t1, u1) = path[k];
    u0 + (t - t0) / (t1 - t0) * (u1 - u0)
}

/// Triangle wave between `lo` and `hi`, starting at `lo`.
pub fn triangle_forcing(lo: f64, hi: f64, period: f64, cycles: usize) -> Vec<(f64, f64)> {
    let mut path = vec![(0.0, lo)];
    for c in 0..cycles {
        let t0 = c as f64 * period;
        path.push((t0 + 0.5 * period, hi));
        path.push((t0 + period, lo));
    }
    path
}

/// Implicit Euler for `dv/dt = Φ_τ(u(t), v)` over the span of the forcing path.
///
/// When `Φ_τ(u_n, v_{n-1}) = 0` the step keeps `v` unchanged; otherwise the
/// scalar equation `v - v_{n-1} - Δt Φ_τ(u_n, v) = 0`, whose left side is
/// strictly increasing in `v`, is solved by bisection on a sign-changing bracket.
pub fn scan_loop_0d(
    cons: &ConstitutiveSet,
    path: &[(f64, f64)],
    v0: f64,
    dt: f64,
) -> Result<ScanTrajectory> {
    let rho = &cons.rho;
    if path.len() < 2 || path.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(HysteraError::Usage("forcing path needs increasing sample times".into()));
    }
    if let Some(&(t, u)) = path.iter().find(|&&(_, u)| !(u >= rho.u_min && u <= rho.u_max)) {
        return Err(domain(
            "scan_loop_0d",
            format!("forcing u = {u} at t = {t} outside [{}, {}]", rho.u_min, rho.u_max),
        ));
    }
    if !(v0 > rho.v_min && v0 < rho.v_max) {
        return Err(domain(
            "scan_loop_0d",
            format!("v0 = {v0} outside ({}, {})", rho.v_min, rho.v_max),
        ));
    }
    if !(dt > 0.0) {
        return Err(HysteraError::Usage(format!("dt must be positive, got {dt}")));
    }
    let (t_start, t_end) = (path[0].0, path[path.len() - 1].0);
    let steps = ((t_end - t_start) / dt).round() as usize;
    let mut out = ScanTrajectory::default();
    let mut v = v0;
    for n in 0..=steps {
        let t = t_start + n as f64 * dt;
        let u = forcing_at(path, t);
        if n > 0 {
            v = implicit_step(cons, u, v, dt);
        }
        out.t.push(t);
        out.u.push(u);
        out.v.push(v);
        out.s.push(v - u);
        out.p.push(cons.pressure(u)?);
    }
    Ok(out)
}

fn implicit_step(cons: &ConstitutiveSet, u: f64, v_prev: f64, dt: f64) -> f64 {
    let phi0 = cons.phi(u, v_prev);
    if phi0 == 0.0 {
        return v_prev;
    }
    let g = |v: f64| v - v_prev - dt * cons.phi(u, v);
    // Φ is non-increasing in v, so the root lies between v_prev and v_prev + Δt Φ(u, v_prev)
    let other = v_prev + dt * phi0;
    let (mut lo, mut hi) = if phi0 > 0.0 { (v_prev, other) } else { (other, v_prev) };
    if g(hi) == 0.0 {
        return hi;
    }
    if g(lo) == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if g(hi).abs() < g(lo).abs() {
        hi
    } else {
        lo
    }
}

/// Largest `|v_n - v_{n-1}|` over steps that end strictly inside the band
/// `ρ⁽ⁱ⁾(v_n) < u_n < ρ⁽ᵈ⁾(v_n)`.
pub fn band_drift(cons: &ConstitutiveSet, traj: &ScanTrajectory) -> f64 {
    let rho = &cons.rho;
    (1..traj.t.len())
        .filter(|&n| {
            let (u, v) = (traj.u[n], traj.v[n]);
            rho.rho(Branch::Imbibition, v) < u && u < rho.rho(Branch::Drainage, v)
        })
        .map(|n| (traj.v[n] - traj.v[n - 1]).abs())
        .fold(0.0, f64::max)
}

/// Shoelace area of the `(S, p)` orbit over samples with `t >= t_from`.
pub fn loop_area(traj: &ScanTrajectory, t_from: f64) -> f64 {
    let k0 = traj.t.partition_point(|&t| t < t_from);
    let s = &traj.s[k0..];
    let p = &traj.p[k0..];
    let n = s.len();
    if n < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        a += s[i] * p[j] - s[j] * p[i];
    }
    0.5 * a.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::ConstitutiveParams;

    fn cons(tau: f64) -> ConstitutiveSet {
        ConstitutiveSet::new(ConstitutiveParams {
            tau,
            n_rho: 1024,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn constant_forcing_inside_band_keeps_v() {
        let c = cons(0.1);
        let (u, v) = c.band_state(0.5, 0.5).unwrap();
        let tr = scan_loop_0d(&c, &[(0.0, u), (1.0, u)], v, 0.01).unwrap();
        assert!(tr.v.iter().all(|&x| x == v));
    }

    #[test]
    fn forcing_outside_range_is_rejected() {
        let c = cons(0.1);
        let r = scan_loop_0d(&c, &[(0.0, 0.1), (1.0, c.rho.u_max + 0.1)], 0.6, 0.01);
        assert!(r.is_err());
    }

    #[test]
    fn square_area() {
        let tr = ScanTrajectory {
            t: vec![0.0, 1.0, 2.0, 3.0],
            u: vec![0.0; 4],
            v: vec![0.0; 4],
            s: vec![0.0, 1.0, 1.0, 0.0],
            p: vec![0.0, 0.0, 2.0, 2.0],
        };
        assert_eq!(loop_area(&tr, 0.0), 2.0);
    }

    #[test]
    fn held_step_relaxes_onto_drainage_curve() {
        let tau = 0.05;
        let c = cons(tau);
        let (u0, v0) = c.band_state(0.5, 0.5).unwrap();
        let u1 = c.rho.rho(Branch::Drainage, v0) + 0.02;
        let tr = scan_loop_0d(&c, &[(0.0, u0), (1e-3, u1), (2.0, u1)], v0, 1e-3).unwrap();
        let v_end = *tr.v.last().unwrap();
        assert!((u1 - c.rho.rho(Branch::Drainage, v_end)).abs() < 1e-6);
        assert!(v_end < v0);
    }
}
