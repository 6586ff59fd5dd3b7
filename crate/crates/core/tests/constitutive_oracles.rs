use approx::assert_abs_diff_eq;

use hystera::constitutive::{
    BoxBounds, Branch, CapillaryCurvePair, ConstitutiveParams, ConstitutiveSet, PermeabilityCurve, PlayMap,
    RhoCurves, TOL_INV, TOL_TABLE,
};
use hystera::HysteraError;

fn cons() -> ConstitutiveSet {
    ConstitutiveSet::new(ConstitutiveParams::default()).unwrap()
}

// van Genuchten with n = 2: S(p) = (1 + (p/α)²)^(-1/2)
fn sat(alpha: f64, p: f64) -> f64 {
    (1.0 + (p / alpha).powi(2)).powf(-0.5)
}

/// Crossing point of |dS/dp| for α = 1 and α = 2 at n = 2.
fn crossing() -> f64 {
    let c = 2f64.powf(2.0 / 3.0);
    ((4.0 - c) / (c - 1.0)).sqrt()
}

#[test]
fn drainage_pressure_at_half_saturation() {
    let c = CapillaryCurvePair::default();
    let direct = 2.0 * (0.5f64.powf(-1.0 / 0.5) - 1.0).powf(0.5);
    assert_abs_diff_eq!(c.pc_eval(Branch::Drainage, 0.5).unwrap(), direct, epsilon = 1e-14);
    assert_abs_diff_eq!(direct, 2.0 * 3f64.sqrt(), epsilon = 1e-14);
}

#[test]
fn pressure_vanishes_at_full_saturation() {
    let c = CapillaryCurvePair::default();
    for b in Branch::BOTH {
        assert_eq!(c.pc_eval(b, 1.0).unwrap(), 0.0);
        assert_eq!(c.pc_inverse(b, 0.0).unwrap(), 1.0);
    }
}

#[test]
fn inverse_of_forward_value() {
    let c = CapillaryCurvePair::default();
    let p = c.pc_eval(Branch::Drainage, 0.3).unwrap();
    assert_abs_diff_eq!(c.pc_inverse(Branch::Drainage, p).unwrap(), 0.3, epsilon = TOL_INV);
}

#[test]
fn degenerate_saturations_are_rejected() {
    let c = CapillaryCurvePair::default();
    for s in [0.0, -0.1, 1.2] {
        assert!(matches!(c.pc_eval(Branch::Imbibition, s), Err(HysteraError::Domain { .. })));
    }
    assert!(c.pc_inverse(Branch::Drainage, -1.0).is_err());
}

#[test]
fn permeability_endpoints() {
    let k = PermeabilityCurve::new(0.5, 0.0, 0.0).unwrap();
    assert_eq!(k.rel_perm(-0.5), k.base(0.0));
    assert_abs_diff_eq!(k.rel_perm(1.0), 1.0, epsilon = 1e-15);
    let cut = PermeabilityCurve::new(0.5, 0.0, 0.1).unwrap();
    assert_eq!(cut.rel_perm(0.05), cut.rel_perm(0.1));
    assert!(cut.rel_perm(0.1) > 0.0);
}

#[test]
fn play_map_upper_limit_matches_closed_form() {
    let c = cons();
    let ps = crossing();
    let u_max = 0.5 * ((1.0 - sat(2.0, ps)) + sat(1.0, ps));
    assert_abs_diff_eq!(c.play_base.u_max(), u_max, epsilon = 1e-8);
    assert_abs_diff_eq!(c.rho.u_max, u_max, epsilon = 1e-8);
}

#[test]
fn play_map_follows_the_flatter_branch() {
    let c = cons();
    let ps = crossing();
    for p in [0.1, 0.5, 0.9 * ps] {
        let exact = 0.5 * (1.0 - sat(2.0, p));
        assert_abs_diff_eq!(c.play_base.play_eval(p).unwrap(), exact, epsilon = 1e-9);
    }
    for p in [1.2 * ps, 3.0, 20.0] {
        let exact = 0.5 * (1.0 - sat(2.0, ps)) + 0.5 * (sat(1.0, ps) - sat(1.0, p));
        assert_abs_diff_eq!(c.play_base.play_eval(p).unwrap(), exact, epsilon = 1e-9);
    }
}

#[test]
fn play_map_at_imbibition_half_saturation() {
    let c = cons();
    let p = c.curves.pc_eval(Branch::Imbibition, 0.5).unwrap();
    // composite Simpson on b'(q) = ½ min(q(1+q²)^-3/2, (q/4)(1+q²/4)^-3/2)
    let f = |q: f64| 0.5 * (q * (1.0 + q * q).powf(-1.5)).min(0.25 * q * (1.0 + 0.25 * q * q).powf(-1.5));
    let n = 20_000;
    let h = p / n as f64;
    let mut s = f(0.0) + f(p);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    assert_abs_diff_eq!(c.play_base.play_eval(p).unwrap(), s * h / 3.0, epsilon = 1e-9);
}

#[test]
fn unregularized_inverse_saturates() {
    let c = cons();
    let u_max = c.play_base.u_max();
    assert!(c.play_base.play_inverse(u_max + 1e-6).is_err());
    assert!(c.play_base.play_inverse(-1e-3).is_err());
    assert_eq!(c.play_base.play_inverse(0.0).unwrap(), 0.0);
}

#[test]
fn regularized_map_has_flat_slope_tail() {
    let play = PlayMap::new(CapillaryCurvePair::default(), 0.05).unwrap();
    let (_, p_r) = play.cut_points().unwrap();
    let h = 1e-2;
    let slope = (play.play_eval(p_r + 3.0 * h).unwrap() - play.play_eval(p_r + 2.0 * h).unwrap()) / h;
    assert_abs_diff_eq!(slope, 0.05, epsilon = 1e-9);
}

#[test]
fn rho_endpoints_and_ordering() {
    let c = cons();
    let r = &c.rho;
    for b in Branch::BOTH {
        assert_abs_diff_eq!(r.rho(b, r.v_min), r.u_max, epsilon = 1e-8);
        assert_abs_diff_eq!(r.rho(b, r.v_max), r.u_min, epsilon = 1e-8);
    }
    for k in 1..100 {
        let v = r.v_min + (r.v_max - r.v_min) * k as f64 / 100.0;
        assert!(r.rho(Branch::Drainage, v) > r.rho(Branch::Imbibition, v));
    }
}

#[test]
fn doubling_table_size_is_below_table_tolerance() {
    let curves = CapillaryCurvePair::default();
    let play = PlayMap::new(curves, 0.0).unwrap();
    let a = RhoCurves::build(&curves, &play, 4096).unwrap();
    let b = RhoCurves::build(&curves, &play, 8192).unwrap();
    let mut worst = 0.0f64;
    for k in 0..=200 {
        let v = a.v_min + (a.v_max - a.v_min) * k as f64 / 200.0;
        for br in Branch::BOTH {
            worst = worst.max((a.rho(br, v) - b.rho(br, v)).abs());
        }
    }
    assert!(worst < TOL_TABLE, "worst change {worst:e}");
}

#[test]
fn table_build_requires_unregularized_map() {
    let curves = CapillaryCurvePair::default();
    let play = PlayMap::new(curves, 1e-3).unwrap();
    assert!(RhoCurves::build(&curves, &play, 256).is_err());
}

/// `v` with `ρ(v) = target`, by bisection on the decreasing table.
fn level(r: &RhoCurves, b: Branch, target: f64) -> f64 {
    let (mut lo, mut hi) = (r.v_min, r.v_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if r.rho(b, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn rate_on_each_branch() {
    let c = cons();
    let r = &c.rho;
    let v = level(r, Branch::Drainage, 0.3);
    assert_abs_diff_eq!(r.phi_tau(0.4, v, 0.1), -1.0, epsilon = 1e-9);
    let v = level(r, Branch::Imbibition, 0.2);
    assert_abs_diff_eq!(r.phi_tau(0.1, v, 0.1), 1.0, epsilon = 1e-9);
    let (u, v) = c.band_state(0.5, 0.5).unwrap();
    assert_eq!(r.phi_tau(u, v, 0.1), 0.0);
}

#[test]
fn box_collapses_on_single_scanning_line() {
    let c = cons();
    let (u, v) = c.band_state(0.4, 0.5).unwrap();
    let b = BoxBounds::new((u, u), (v, v), &c.rho, c.tau()).unwrap();
    assert_eq!(b.s_l, v - c.rho.rho(Branch::Drainage, v));
    assert_eq!(b.s_r, v - c.rho.rho(Branch::Imbibition, v));
    assert!(b.s_l > 0.0);
    assert_eq!(c.phi(b.u_r, b.v_l), 0.0);
    assert_eq!(c.phi(b.u_l, b.v_r), 0.0);
}

#[test]
fn box_rejects_off_band_data() {
    let c = cons();
    let (_, v) = c.band_state(0.4, 0.5).unwrap();
    let u_hi = c.rho.rho(Branch::Drainage, v) + 0.01;
    assert!(matches!(
        BoxBounds::new((u_hi, u_hi), (v, v), &c.rho, c.tau()),
        Err(HysteraError::Precondition(_))
    ));
}

#[test]
fn nonpositive_tau_is_rejected() {
    for tau in [0.0, -1.0] {
        assert!(ConstitutiveSet::new(ConstitutiveParams {
            tau,
            ..Default::default()
        })
        .is_err());
    }
}
