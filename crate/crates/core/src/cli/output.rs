//! CSV writers for run artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::analysis::{DiagnosticsReport, ScanTrajectory, SweepTable};
use crate::constitutive::{Branch, RhoCurves};
use crate::error::Result;
use super::presets::ScanRun;
use crate::grid::Grid;
use crate::stepper::Trajectory;

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let f = File::create(&path)?;
    Ok((path, BufWriter::new(f)))
}

/// `t,node_index,x,u,v,S,p` for every time level and node.
pub fn write_trajectory<W: Write>(traj: &Trajectory, grid: &Grid, mut w: W) -> Result<()> {
    writeln!(w, "t,node_index,x,u,v,S,p")?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        for k in 0..grid.n_nodes() {
            let x = grid.coords(k)[0];
            writeln!(w, "{t},{k},{x},{},{},{},{}", s.u[k], s.v[k], s.s[k], s.p[k])?;
        }
    }
    Ok(())
}

/// `t,iters,residual,contraction,dt` per accepted step.
pub fn write_steps<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    writeln!(w, "t,iters,residual,contraction,dt")?;
    for r in &traj.reports {
        writeln!(w, "{},{},{},{},{}", r.t, r.iters, r.residual, r.contraction, r.dt)?;
    }
    Ok(())
}

/// `t,u,v,S,p` of a 0-D scanning run.
pub fn write_scan<W: Write>(tr: &ScanTrajectory, mut w: W) -> Result<()> {
    writeln!(w, "t,u,v,S,p")?;
    for k in 0..tr.t.len() {
        writeln!(w, "{},{},{},{},{}", tr.t[k], tr.u[k], tr.v[k], tr.s[k], tr.p[k])?;
    }
    Ok(())
}

/// Writes the files of one PDE run into `dir` and returns their paths.
pub fn write_pde_run(
    dir: &Path,
    run_id: &str,
    echo: &str,
    traj: &Trajectory,
    grid: &Grid,
    rho: &RhoCurves,
    diag: &DiagnosticsReport,
) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let (p, mut w) = create(dir, &format!("{run_id}_traj.csv"))?;
    write_trajectory(traj, grid, &mut w)?;
    w.flush()?;
    out.push(p);
    let (p, mut w) = create(dir, &format!("{run_id}_steps.csv"))?;
    write_steps(traj, &mut w)?;
    w.flush()?;
    out.push(p);
    let (p, mut w) = create(dir, &format!("{run_id}_diag.csv"))?;
    diag.write_csv(&mut w)?;
    w.flush()?;
    out.push(p);
    let (p, mut w) = create(dir, &format!("{run_id}_config.txt"))?;
    w.write_all(echo.as_bytes())?;
    w.flush()?;
    out.push(p);
    let (p, mut w) = create(dir, &format!("{run_id}_nodes.csv"))?;
    grid.write_nodes_csv(&mut w)?;
    w.flush()?;
    out.push(p);
    for b in Branch::BOTH {
        let (p, mut w) = create(dir, &format!("{run_id}_rho_{}.csv", b.name()))?;
        rho.write_csv(b, &mut w)?;
        w.flush()?;
        out.push(p);
    }
    Ok(out)
}

/// Writes `<run_id>_sweep.csv`, the sweep diagnostics and the config echo.
pub fn write_sweep(dir: &Path, run_id: &str, echo: &str, table: &SweepTable, diag: &DiagnosticsReport) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let (p, mut w) = create(dir, &format!("{run_id}_sweep.csv"))?;
    table.write_csv(&mut w)?;
    w.flush()?;
    out.push(p);
    let (p, mut w) = create(dir, &format!("{run_id}_diag.csv"))?;
    diag.write_csv(&mut w)?;
    w.flush()?;
    out.push(p);
    let (p, mut w) = create(dir, &format!("{run_id}_config.txt"))?;
    w.write_all(echo.as_bytes())?;
    w.flush()?;
    out.push(p);
    Ok(out)
}

/// One `<run_id>_scan_tau_<k>.csv` per τ plus diagnostics and config echo.
pub fn write_scan_run(
    dir: &Path,
    run_id: &str,
    echo: &str,
    runs: &[ScanRun],
    diag: &DiagnosticsReport,
) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for (k, (_, tr, _)) in runs.iter().enumerate() {
        let (p, mut w) = create(dir, &format!("{run_id}_scan_tau_{k}.csv"))?;
        write_scan(tr, &mut w)?;
        w.flush()?;
        out.push(p);
    }
    let (p, mut w) = create(dir, &format!("{run_id}_diag.csv"))?;
    diag.write_csv(&mut w)?;
    w.flush()?;
    out.push(p);
    let (p, mut w) = create(dir, &format!("{run_id}_config.txt"))?;
    w.write_all(echo.as_bytes())?;
    w.flush()?;
    out.push(p);
    Ok(out)
}
