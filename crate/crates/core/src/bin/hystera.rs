use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use hystera::analysis::DiagnosticsReport;
use hystera::cli::{output, presets, Preset, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "hystera", version, about = "Unsaturated flow with extended play-type hysteresis")]
struct Args {
    /// equilibrium | redistribution | drainage-drive | scan-loop | tau-sweep
    preset: Preset,
    /// key=value configuration file
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for sweeps
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory, overrides `out_dir`
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Outcome {
    Passed,
    Failed(String),
}

fn verdict(diag: &DiagnosticsReport) -> Outcome {
    match diag.first_failure() {
        None => Outcome::Passed,
        Some(c) => Outcome::Failed(format!("check {} failed: worst {:e} (tol {:e})", c.name, c.worst, c.tol)),
    }
}

fn run(args: &Args) -> hystera::Result<Outcome> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = RunConfig::parse(&text, args.preset)?;
    if let Some(o) = &args.out {
        cfg.out_dir = o.clone();
    }
    let echo = cfg.echo();
    let dir = cfg.out_dir.clone();
    let files = match cfg.preset {
        Preset::Equilibrium | Preset::Redistribution | Preset::DrainageDrive => {
            let sc = presets::scenario(&cfg, cfg.constitutive.tau)?;
            let traj = sc.run()?;
            let diag = presets::diagnose(&cfg, &sc, &traj)?;
            let files = output::write_pde_run(&dir, &cfg.run_id, &echo, &traj, &sc.grid, &sc.cons.rho, &diag)?;
            (files, verdict(&diag))
        }
        Preset::TauSweep => {
            let (members, table, diag) = presets::run_sweep(&cfg, args.jobs)?;
            let mut files = Vec::new();
            for (k, m) in members.iter().enumerate() {
                let id = format!("{}_tau_{k}", cfg.run_id);
                match &m.outcome {
                    Ok((sc, traj, d)) => {
                        files.extend(output::write_pde_run(&dir, &id, &echo, traj, &sc.grid, &sc.cons.rho, d)?);
                    }
                    Err(e) => eprintln!("tau = {}: {e}", m.tau),
                }
            }
            files.extend(output::write_sweep(&dir, &cfg.run_id, &echo, &table, &diag)?);
            if let Some(e) = members.iter().find_map(|m| m.outcome.as_ref().err()) {
                return Err(e.clone());
            }
            (files, verdict(&diag))
        }
        Preset::ScanLoop => {
            let (runs, diag) = presets::run_scan(&cfg)?;
            (output::write_scan_run(&dir, &cfg.run_id, &echo, &runs, &diag)?, verdict(&diag))
        }
    };
    for f in &files.0 {
        println!("{}", f.display());
    }
    Ok(files.1)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::Failed(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
