//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use hystera::analysis::{energy_ledger, interpolant_gaps, DiagnosticsReport};
use hystera::cli::{presets, Preset, RunConfig};
use hystera::constitutive::{Branch, ConstitutiveParams, ConstitutiveSet, PlayMap, TOL_INV};
use hystera::stepper::Trajectory;

const SAMPLES: usize = 10_000;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn median(mut x: Vec<f64>) -> f64 {
    x.sort_by(|a, b| a.total_cmp(b));
    let n = x.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        x[n / 2]
    } else {
        0.5 * (x[n / 2 - 1] + x[n / 2])
    }
}

fn check_named<'a>(d: &'a DiagnosticsReport, name: &str) -> Option<&'a hystera::analysis::CheckResult> {
    d.checks.iter().find(|c| c.name == name)
}

fn redistribution(scale: usize, refine_space: bool) -> (presets::Scenario, Trajectory, DiagnosticsReport, RunConfig) {
    let mut cfg = RunConfig::defaults(Preset::Redistribution);
    cfg.stepper.dt /= scale as f64;
    if refine_space {
        cfg.nodes = (cfg.nodes - 1) * scale + 1;
    }
    let sc = presets::scenario(&cfg, cfg.constitutive.tau).expect("scenario");
    let tr = sc.run().expect("run");
    let d = presets::diagnose(&cfg, &sc, &tr).expect("diagnose");
    (sc, tr, d, cfg)
}

fn constitutive_consistency() -> Verdict {
    let cons = ConstitutiveSet::new(ConstitutiveParams::default()).unwrap();
    let c = &cons.curves;
    let mut failures = Vec::new();

    let s_grid: Vec<f64> = (1..=SAMPLES).map(|k| k as f64 / SAMPLES as f64).collect();
    let mut worst_round = 0.0f64;
    for b in Branch::BOTH {
        let p: Vec<f64> = s_grid.iter().map(|&s| c.pc_eval(b, s).unwrap()).collect();
        if !p.windows(2).all(|w| w[1] < w[0]) {
            failures.push(format!("p_c {} not strictly decreasing", b.name()));
        }
        if p.iter().any(|x| !x.is_finite()) || p[SAMPLES - 1] != 0.0 {
            failures.push(format!("p_c {} endpoint", b.name()));
        }
        for (&s, &pp) in s_grid.iter().zip(&p) {
            worst_round = worst_round.max((c.pc_inverse(b, pp).unwrap() - s).abs());
        }
    }
    if worst_round > TOL_INV {
        failures.push(format!("p_c round trip {worst_round:e}"));
    }
    for &s in &s_grid[..SAMPLES - 1] {
        if !(c.pc_eval(Branch::Drainage, s).unwrap() > c.pc_eval(Branch::Imbibition, s).unwrap()) {
            failures.push(format!("branch ordering at S = {s}"));
            break;
        }
    }

    let k: Vec<f64> = (0..SAMPLES)
        .map(|i| cons.perm.rel_perm(-0.5 + 2.0 * i as f64 / (SAMPLES - 1) as f64))
        .collect();
    if !k.windows(2).all(|w| w[1] >= w[0]) || k[0] < cons.perm.min_value() || *k.last().unwrap() > 1.0 {
        failures.push("rel_perm range or monotonicity".into());
    }

    // consistency margin b'·|p_c'| <= 1/2 on both branches
    let base = &cons.play_base;
    let p_cap = base.p_cap();
    let p_grid: Vec<f64> = (1..=SAMPLES)
        .map(|i| p_cap * ((i as f64 / SAMPLES as f64 * 12.0).exp() - 1.0) / (12f64.exp() - 1.0))
        .collect();
    let mut worst_margin = 0.0f64;
    for &p in &p_grid {
        for b in Branch::BOTH {
            let sj = base.branch_slope(b, p);
            if sj > 0.0 {
                worst_margin = worst_margin.max(base.base_slope(p) / sj);
            }
        }
    }
    if worst_margin > 0.5 * (1.0 + 1e-12) {
        failures.push(format!("consistency margin {worst_margin}"));
    }

    let mut worst_play = 0.0f64;
    for play in [&cons.play, &cons.play_base] {
        let mut prev = f64::NEG_INFINITY;
        for &p in &p_grid {
            let u = play.play_eval(p).unwrap();
            if !(u > prev) {
                failures.push(format!("play map not increasing at p = {p}, delta = {}", play.delta()));
                break;
            }
            prev = u;
            if play.delta() > 0.0 || u < play.u_max() - 1e-9 {
                let q = play.play_inverse(u).unwrap();
                worst_play = worst_play.max((play.play_eval(q).unwrap() - u).abs());
            }
        }
        if play.play_eval(0.0).unwrap() != 0.0 {
            failures.push("play map at 0".into());
        }
    }
    if worst_play > TOL_INV {
        failures.push(format!("play round trip {worst_play:e}"));
    }
    let regularized = PlayMap::new(*c, 0.05).unwrap();
    if let Some((_, p_r)) = regularized.cut_points() {
        let h = 1e-3;
        let slope = (regularized.play_eval(p_r + 2.0 * h).unwrap() - regularized.play_eval(p_r + h).unwrap()) / h;
        if (slope - 0.05).abs() > 1e-8 {
            failures.push(format!("flat-slope region {slope}"));
        }
    }

    let rho = &cons.rho;
    let end_err = (rho.rho(Branch::Imbibition, rho.v_min) - rho.u_max)
        .abs()
        .max((rho.rho(Branch::Drainage, rho.v_min) - rho.u_max).abs())
        .max((rho.rho(Branch::Imbibition, rho.v_max) - rho.u_min).abs())
        .max((rho.rho(Branch::Drainage, rho.v_max) - rho.u_min).abs());
    if end_err > 1e-8 {
        failures.push(format!("rho endpoints off by {end_err:e}"));
    }
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for i in 1..SAMPLES {
        let v = rho.v_min + (rho.v_max - rho.v_min) * i as f64 / SAMPLES as f64;
        let (ri, rd) = (rho.rho(Branch::Imbibition, v), rho.rho(Branch::Drainage, v));
        if !(rd > ri) || ri > prev.0 || rd > prev.1 {
            failures.push(format!("rho ordering or monotonicity at v = {v}"));
            break;
        }
        prev = (ri, rd);
    }

    let u_max = rho.u_max;
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "consistency margin {worst_margin:.3}, rho endpoint error {end_err:.1e}, U_M = {u_max:.6}, round trips {:.1e}/{:.1e}",
                worst_round, worst_play
            )
        } else {
            failures.join("; ")
        },
    )
}

fn phi_dual_form() -> Verdict {
    let cons = ConstitutiveSet::new(ConstitutiveParams::default()).unwrap();
    let rho = &cons.rho;
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut mismatches = 0;
    for _ in 0..SAMPLES {
        let u = rng.random_range(rho.u_min - 0.2..rho.u_max + 0.2);
        let v = rng.random_range(rho.v_min - 0.2..rho.v_max + 0.2);
        let tau = 10f64.powf(rng.random_range(-4.0..1.0));
        if rho.phi_tau(u, v, tau) != rho.phi_tau_branches(u, v, tau) {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("{mismatches} mismatches in {SAMPLES} random triples"))
}

fn contraction() -> Verdict {
    let (_, coarse, _, cfg) = redistribution(1, false);
    let (_, fine, _, _) = redistribution(2, false);
    let eps = cfg.stepper.eps_fp;
    let all_ok = coarse
        .reports
        .iter()
        .chain(&fine.reports)
        .all(|r| r.contraction < 1.0 && r.residual <= eps);
    // steps with every node in the band converge in one sweep and report 0
    let active = |t: &Trajectory| median(t.reports.iter().map(|r| r.contraction).filter(|&c| c > 0.0).collect());
    let (m1, m2) = (active(&coarse), active(&fine));
    let ratio = m2 / m1;
    verdict(
        all_ok && (0.3..=0.7).contains(&ratio),
        format!("all factors < 1: {all_ok}; median {m1:.4} -> {m2:.4}, ratio {ratio:.3} (band [0.3, 0.7])"),
    )
}

fn box_and_saturation() -> (Verdict, Verdict) {
    let (_, _, d, cfg) = redistribution(1, false);
    let zero_g = cfg.stepper.gravity == [0.0, 0.0];
    let b = check_named(&d, "box_bounds");
    let s = check_named(&d, "saturation_bounds");
    let mu = check_named(&d, "mu_below_S_l");
    let box_v = match b {
        Some(b) => verdict(
            zero_g && b.passed && !b.informational,
            format!(
                "u in [{:.6}, {:.6}], v in [{:.6}, {:.6}], worst violation {:.1e} (tol {:.0e})",
                d.get("u_l").unwrap(),
                d.get("u_r").unwrap(),
                d.get("v_l").unwrap(),
                d.get("v_r").unwrap(),
                b.worst,
                b.tol
            ),
        ),
        None => verdict(false, "box check missing"),
    };
    let sat_v = match (s, mu) {
        (Some(s), Some(mu)) => verdict(
            s.passed && mu.passed && !s.informational,
            format!(
                "S in [{:.6}, {:.6}], worst violation {:.1e}; mu = {} < S_l: {}",
                d.get("S_l").unwrap(),
                d.get("S_r").unwrap(),
                s.worst,
                cfg.constitutive.mu,
                mu.passed
            ),
        ),
        _ => verdict(false, "saturation check missing"),
    };
    (box_v, sat_v)
}

fn energy_stability() -> Verdict {
    let mut rows = Vec::new();
    for scale in [1, 2, 4] {
        let (sc, tr, _, _) = redistribution(scale, false);
        rows.push(energy_ledger(&tr, &sc.grid).unwrap());
    }
    let spread = |f: &dyn Fn(usize) -> f64| {
        let v: Vec<f64> = (0..3).map(f).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / lo
    };
    let b = spread(&|i| rows[i].b);
    let m = spread(&|i| rows[i].m_inf);
    let a_ok = rows.windows(2).all(|w| w[1].a <= w[0].a);
    verdict(
        b < 0.2 && m < 0.2 && a_ok,
        format!(
            "B spread {:.2}%, M spread {:.2e}%, A = {:.3e}, {:.3e}, {:.3e}",
            100.0 * b,
            100.0 * m,
            rows[0].a,
            rows[1].a,
            rows[2].a
        ),
    )
}

fn interpolant_identities() -> Verdict {
    let (sc, tr, _, _) = redistribution(1, false);
    let a = energy_ledger(&tr, &sc.grid).unwrap().a;
    let (hb, ch) = interpolant_gaps(&tr, &sc.grid).unwrap();
    let e1 = (hb - tr.dt / 3.0 * a).abs();
    let e2 = (ch - tr.dt * a).abs();
    verdict(
        e1 <= 1e-12 && e2 <= 1e-12,
        format!("|hat-bar - dt A/3| = {e1:.1e}, |check-hat - dt A| = {e2:.1e}"),
    )
}

fn sweep() -> (Verdict, Verdict) {
    let cfg = RunConfig::defaults(Preset::TauSweep);
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let (_, table, d) = presets::run_sweep(&cfg, jobs).unwrap();
    let es: Vec<String> = table.rows.iter().map(|r| format!("{:.3e}", r.e)).collect();
    let pass = |n: &str| check_named(&d, n).is_some_and(|c| c.passed);
    let v8 = verdict(
        pass("sweep_complete") && pass("sweep_monotone") && pass("sweep_slope") && pass("sweep_mismatch_bound"),
        format!(
            "E = [{}], slope {:.3} (band [0.9, 1.3]), bound holds for all: {}",
            es.join(", "),
            d.get("slope").unwrap_or(f64::NAN),
            pass("sweep_mismatch_bound")
        ),
    );
    let v9 = verdict(pass("sweep_gradient_bound"), format!("max/min B = {:.3} (< 5)", table.b_ratio()));
    (v8, v9)
}

fn scan_loop() -> Verdict {
    let cfg = RunConfig::defaults(Preset::ScanLoop);
    let (runs, d) = presets::run_scan(&cfg).unwrap();
    let areas: Vec<String> = runs.iter().map(|r| format!("{:.4}", r.2)).collect();
    verdict(
        d.all_passed(),
        format!(
            "areas [{}] for tau {:?}, band drift {:.1e}",
            areas.join(", "),
            cfg.taus,
            d.get("band_drift").unwrap()
        ),
    )
}

fn self_convergence() -> Verdict {
    let runs: Vec<_> = [1, 2, 4].into_iter().map(|s| redistribution(s, true)).collect();
    let diff = |c: usize| {
        let (coarse, fine) = (&runs[c], &runs[c + 1]);
        let m = coarse.0.grid.lumped_mass();
        let (a, b) = (coarse.1.last(), fine.1.last());
        (0..coarse.0.grid.n_nodes())
            .map(|k| m[k] * ((a.u[k] - b.u[2 * k]).powi(2) + (a.v[k] - b.v[2 * k]).powi(2)))
            .sum::<f64>()
            .sqrt()
    };
    let (d1, d2) = (diff(0), diff(1));
    let order = (d1 / d2).log2();
    verdict(order >= 0.8, format!("differences {d1:.3e}, {d2:.3e}, observed order {order:.3} (>= 0.8)"))
}

fn main() -> ExitCode {
    let t0 = Instant::now();
    let (c4, c5) = box_and_saturation();
    let (c8, c9) = sweep();
    let results = [
        ("constitutive consistency", constitutive_consistency()),
        ("phi dual-form equivalence", phi_dual_form()),
        ("fixed-point contraction", contraction()),
        ("maximum principle", c4),
        ("saturation confinement", c5),
        ("energy ledger stability", energy_stability()),
        ("interpolant identities", interpolant_identities()),
        ("tau scaling of mismatch", c8),
        ("gradient boundedness", c9),
        ("0-D hysteresis loop", scan_loop()),
        ("self-convergence", self_convergence()),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name}: {}", i + 1, v.detail);
        failed += usize::from(!v.passed);
    }
    println!(
        "acceptance: {}/{} passed in {:.1} s",
        results.len() - failed,
        results.len(),
        t0.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
