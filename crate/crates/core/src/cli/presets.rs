//! Experiment presets and the checks each one runs.

use rayon::prelude::*;

use super::config::{Preset, RunConfig};
use crate::analysis::{
    band_drift, check_box_bounds, check_saturation_bounds, energy_ledger, extrema, gronwall_slope,
    interpolant_gaps, loop_area, mismatch_bound, scan_loop_0d, tau_mismatch, triangle_forcing,
    DiagnosticsReport, RunSummary, ScanTrajectory, SweepTable,
};
use crate::constitutive::{BoxBounds, ConstitutiveParams, ConstitutiveSet};
use crate::error::{HysteraError, Result};
use crate::grid::Grid;
use crate::stepper::{State, Stepper, StepperConfig, Trajectory};

/// Slope window for the τ sweep.
pub const SLOPE_BAND: (f64, f64) = (0.9, 1.3);
/// Ceiling on `max B / min B` across a sweep.
pub const B_RATIO_MAX: f64 = 5.0;
/// Slack factor on the per-run mismatch inequality.
pub const MISMATCH_SLACK: f64 = 2.0;
/// Tolerance for the interpolant identities, relative to `max(1, A)`.
pub const INTERPOLANT_TOL: f64 = 1e-12;

/// A grid, closure and initial state ready to march.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: Grid,
    pub cons: ConstitutiveSet,
    pub stepper: StepperConfig,
    pub initial: State,
}

impl Scenario {
    pub fn run(&self) -> Result<Trajectory> {
        Stepper::new(&self.grid, &self.cons, self.stepper.clone())?.time_march(self.initial.clone())
    }
}

fn params_with_tau(cfg: &RunConfig, tau: f64) -> ConstitutiveParams {
    ConstitutiveParams {
        tau,
        ..cfg.constitutive
    }
}

/// Saturation and band position of the redistribution initial data at `x`.
pub fn redistribution_profile(cfg: &RunConfig, x: f64) -> (f64, f64) {
    let mid = 0.5 * (cfg.s_left + cfg.s_right);
    let half = 0.5 * (cfg.s_left - cfg.s_right);
    let s = mid - half * ((x - 0.5 * cfg.length) / cfg.interface_width).tanh();
    (s, cfg.theta)
}

/// Builds the PDE scenario of a preset at relaxation time `tau`.
pub fn scenario(cfg: &RunConfig, tau: f64) -> Result<Scenario> {
    let cons = ConstitutiveSet::new(params_with_tau(cfg, tau))?;
    let grid = Grid::line(cfg.length, cfg.nodes)?;
    let initial = match cfg.preset {
        Preset::Equilibrium => State::from_saturation(&grid, &cons, |_| (cfg.s0, cfg.theta0))?,
        Preset::Redistribution => State::from_saturation(&grid, &cons, |x| redistribution_profile(cfg, x[0]))?,
        Preset::DrainageDrive | Preset::TauSweep => {
            let (u_in, v_in) = cons.band_state(cfg.s0, cfg.theta0)?;
            let n = grid.n_nodes();
            let mut u = Vec::with_capacity(n);
            let mut v = Vec::with_capacity(n);
            for k in 0..n {
                // boundary held saturated: Φ(0, 1) = 0
                let (a, b) = if grid.is_boundary(k) { (0.0, 1.0) } else { (u_in, v_in) };
                u.push(a);
                v.push(b);
            }
            State::new(&grid, &cons, u, v)?
        }
        Preset::ScanLoop => {
            return Err(HysteraError::Usage("scan-loop has no spatial scenario".into()));
        }
    };
    Ok(Scenario {
        grid,
        cons,
        stepper: cfg.stepper.clone(),
        initial,
    })
}

/// Box spanned by the initial data ranges.
pub fn initial_box(sc: &Scenario) -> Result<BoxBounds> {
    let range = |x: &[f64]| {
        x.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(a), hi.max(a)))
    };
    BoxBounds::new(range(&sc.initial.u), range(&sc.initial.v), &sc.cons.rho, sc.cons.tau())
}

/// Diagnostics shared by every PDE run.
pub fn diagnose(cfg: &RunConfig, sc: &Scenario, traj: &Trajectory) -> Result<DiagnosticsReport> {
    let mut r = DiagnosticsReport::default();
    let g = &sc.grid;
    let tau = sc.cons.tau();
    r.push("tau", tau);
    r.push("dt", traj.dt);
    r.push("steps", traj.reports.len() as f64);
    r.push("halvings", traj.halvings as f64);
    r.add_extrema(&extrema(traj));

    let worst_ratio = traj.reports.iter().map(|x| x.contraction).fold(0.0, f64::max);
    let worst_res = traj.reports.iter().map(|x| x.residual).fold(0.0, f64::max);
    r.push("contraction_max", worst_ratio);
    r.push("residual_max", worst_res);
    r.check(
        "contraction",
        worst_ratio < 1.0 && worst_res <= sc.stepper.eps_fp,
        worst_ratio,
        1.0,
    );

    let ledger = energy_ledger(traj, g)?;
    r.push("A", ledger.a);
    r.push("B", ledger.b);
    r.push("M_inf", ledger.m_inf);

    let e = tau_mismatch(traj, &sc.cons.rho, g)?;
    let bound = mismatch_bound(traj, &sc.cons.rho, g)?;
    r.push("E", e);
    r.push("mismatch_bound", bound);
    r.check("mismatch_bound", e <= MISMATCH_SLACK * tau * bound, e, MISMATCH_SLACK * tau * bound);

    let (hb, ch) = interpolant_gaps(traj, g)?;
    let dt = traj.dt;
    let scale = ledger.a.max(1.0);
    let gap = (hb - dt / 3.0 * ledger.a).abs().max((ch - dt * ledger.a).abs());
    r.push("hat_bar_gap", hb);
    r.push("check_hat_gap", ch);
    r.check("interpolant_identities", gap <= INTERPOLANT_TOL * scale, gap, INTERPOLANT_TOL * scale);

    let slope = gronwall_slope(traj, g)?;
    r.push("gronwall_slope", slope);
    r.check("gronwall", slope < cfg.gronwall_ceiling, slope, cfg.gronwall_ceiling);

    // the invariant box needs zero flux and initial data inside the band
    let in_hypotheses = !(sc.stepper.flux && sc.stepper.gravity != [0.0, 0.0]);
    match initial_box(sc) {
        Ok(b) => {
            for (k, v) in [
                ("u_l", b.u_l),
                ("u_r", b.u_r),
                ("v_l", b.v_l),
                ("v_r", b.v_r),
                ("S_l", b.s_l),
                ("S_r", b.s_r),
            ] {
                r.push(k, v);
            }
            let bc = check_box_bounds(traj, &b, cfg.bound_tol);
            let sat = check_saturation_bounds(traj, &b, &sc.cons, cfg.bound_tol)?;
            if in_hypotheses {
                r.check("box_bounds", bc.passed, bc.worst, cfg.bound_tol);
                r.check("saturation_bounds", sat.bounds.passed, sat.bounds.worst, cfg.bound_tol);
                r.check("mu_below_S_l", sat.mu_below_s_l, sc.cons.params.mu, b.s_l);
            } else {
                r.note("box_bounds", bc.passed, bc.worst, cfg.bound_tol);
                r.note("saturation_bounds", sat.bounds.passed, sat.bounds.worst, cfg.bound_tol);
            }
        }
        Err(_) if !sc.stepper.check_initial_band => {
            r.note("box_bounds", false, f64::NAN, cfg.bound_tol);
        }
        Err(e) => return Err(e),
    }

    if cfg.preset == Preset::Equilibrium {
        let drift = traj
            .states
            .iter()
            .flat_map(|s| s.u.iter().zip(traj.initial().u.iter()).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        r.check("stationary", drift <= cfg.bound_tol, drift, cfg.bound_tol);
    }
    Ok(r)
}

/// Result of one sweep member.
#[derive(Debug, Clone)]
pub struct SweepMember {
    pub tau: f64,
    pub outcome: std::result::Result<(Scenario, Trajectory, DiagnosticsReport), HysteraError>,
}

/// Runs the drainage-drive scenario for every τ on a pool of `jobs` threads.
pub fn run_sweep(cfg: &RunConfig, jobs: usize) -> Result<(Vec<SweepMember>, SweepTable, DiagnosticsReport)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HysteraError::Usage(format!("thread pool: {e}")))?;
    let members: Vec<SweepMember> = pool.install(|| {
        cfg.taus
            .par_iter()
            .map(|&tau| SweepMember {
                tau,
                outcome: scenario(cfg, tau).and_then(|sc| {
                    let tr = sc.run()?;
                    let d = diagnose(cfg, &sc, &tr)?;
                    Ok((sc, tr, d))
                }),
            })
            .collect()
    });
    let runs: Vec<(f64, Option<RunSummary>)> = members
        .iter()
        .map(|m| {
            let row = m.outcome.as_ref().ok().map(|(_, _, d)| {
                let e = d.get("E").unwrap_or(f64::NAN);
                let b = d.get("B").unwrap_or(f64::NAN);
                let bound = d.get("mismatch_bound").unwrap_or(f64::NAN);
                (e, b, e <= MISMATCH_SLACK * m.tau * bound)
            });
            (m.tau, row)
        })
        .collect();
    let table = SweepTable::new(&runs);
    let r = sweep_report(&table);
    Ok((members, table, r))
}

/// Checks on a completed sweep table.
pub fn sweep_report(table: &SweepTable) -> DiagnosticsReport {
    let mut r = DiagnosticsReport::default();
    let aborted = table.rows.iter().filter(|x| x.aborted).count();
    r.push("aborted_runs", aborted as f64);
    r.check("sweep_complete", aborted == 0, aborted as f64, 0.0);
    let slope = table.slope.unwrap_or(f64::NAN);
    r.push("slope", slope);
    r.push("slope_ci_lo", table.ci.0);
    r.push("slope_ci_hi", table.ci.1);
    r.check("sweep_monotone", table.monotone(), f64::NAN, 0.0);
    let in_band = slope >= SLOPE_BAND.0 && slope <= SLOPE_BAND.1;
    r.check("sweep_slope", in_band, slope, SLOPE_BAND.0);
    let all_bounded = table.rows.iter().all(|x| x.bound_holds);
    r.check("sweep_mismatch_bound", all_bounded, f64::NAN, MISMATCH_SLACK);
    let ratio = table.b_ratio();
    r.push("B_ratio", ratio);
    r.check("sweep_gradient_bound", ratio < B_RATIO_MAX, ratio, B_RATIO_MAX);
    r
}

/// `(τ, trajectory, loop area)` of one 0-D run.
pub type ScanRun = (f64, ScanTrajectory, f64);

/// 0-D loops for every τ.
pub fn run_scan(cfg: &RunConfig) -> Result<(Vec<ScanRun>, DiagnosticsReport)> {
    let path = triangle_forcing(cfg.scan_u_lo, cfg.scan_u_hi, cfg.scan_period, cfg.scan_cycles);
    let t_last = (cfg.scan_cycles - 1) as f64 * cfg.scan_period;
    let mut r = DiagnosticsReport::default();
    let mut out = Vec::with_capacity(cfg.taus.len());
    let mut drift: f64 = 0.0;
    for &tau in &cfg.taus {
        let cons = ConstitutiveSet::new(params_with_tau(cfg, tau))?;
        let (_, v0) = cons.band_state(cfg.s0, cfg.theta0)?;
        let tr = scan_loop_0d(&cons, &path, v0, cfg.scan_dt)?;
        let area = loop_area(&tr, t_last);
        drift = drift.max(band_drift(&cons, &tr));
        r.push(format!("area_tau_{tau}"), area);
        out.push((tau, tr, area));
    }
    let areas: Vec<f64> = out.iter().map(|x| x.2).collect();
    r.check("loop_area_positive", areas.iter().all(|&a| a > 0.0), areas.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
    r.check("loop_area_decreasing", areas.windows(2).all(|w| w[1] < w[0]), f64::NAN, 0.0);
    r.push("band_drift", drift);
    r.check("band_v_constant", drift <= cfg.stepper.eps_fp, drift, cfg.stepper.eps_fp);
    Ok((out, r))
}
