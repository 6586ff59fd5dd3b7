//! Adaptive Simpson quadrature with Richardson correction.

use crate::error::{numeric, Result};

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Returns a numeric error if some subinterval still misses its share of the
/// tolerance after `MAX_DEPTH` bisections.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol).map(|v| -v);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut failed = None;
    let v = recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut failed);
    match failed {
        None if v.is_finite() => Ok(v),
        None => Err(numeric("quadrature", format!("non-finite integral on [{a}, {b}]"))),
        Some(x) => Err(numeric(
            "quadrature",
            format!("no convergence near x = {x:e} on [{a:e}, {b:e}] (tol {tol:e})"),
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    failed: &mut Option<f64>,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || m <= a || b <= m {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        failed.get_or_insert(m);
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, failed)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
    }

    #[test]
    fn kink_converges() {
        let v = adaptive_simpson(&|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-12).unwrap();
        let exact = 0.5 * 0.3 * 0.3 + 0.5 * 0.7 * 0.7;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let f = |x: f64| x.exp();
        let a = adaptive_simpson(&f, 0.0, 1.0, 1e-12).unwrap();
        let b = adaptive_simpson(&f, 1.0, 0.0, 1e-12).unwrap();
        assert_eq!(a, -b);
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn singular_integrand_reports_failure() {
        let r = adaptive_simpson(&|x: f64| 1.0 / x.abs().max(1e-300), -1.0, 1.0, 1e-12);
        assert!(r.is_err());
    }
}
