//! Linear solves for the condensed step systems.

use crate::error::{numeric, HysteraError, Result};
use crate::grid::SparseOperator;

/// Relative residual every returned solution satisfies.
pub const SOLVE_TOL: f64 = 1e-12;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(a: &SparseOperator, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

/// Solves `A x = b`; returns the solution and the iteration count.
///
/// Tridiagonal operators use elimination with iterative refinement, all others
/// Jacobi-preconditioned conjugate gradients.
pub fn solve_linear(a: &SparseOperator, b: &[f64]) -> Result<(Vec<f64>, usize)> {
    if b.len() != a.n() {
        return Err(HysteraError::Usage(format!(
            "right-hand side of length {} for a {}x{} system",
            b.len(),
            a.n(),
            a.n()
        )));
    }
    if a.is_tridiagonal() {
        tridiagonal(a, b)
    } else {
        pcg(a, b)
    }
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    for i in 0..n {
        if i > 0 {
            piv = diag[i] - lower[i] * c[i - 1];
        }
        if piv == 0.0 || !piv.is_finite() {
            return Err(numeric("tridiagonal solve", format!("zero pivot in row {i}")));
        }
        c[i] = upper[i] / piv;
        d[i] = (b[i] - if i > 0 { lower[i] * d[i - 1] } else { 0.0 }) / piv;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

fn tridiagonal(a: &SparseOperator, b: &[f64]) -> Result<(Vec<f64>, usize)> {
    let n = a.n();
    let diag = a.diag();
    let lower: Vec<f64> = (0..n).map(|i| if i > 0 { a.get(i, i - 1) } else { 0.0 }).collect();
    let upper: Vec<f64> = (0..n).map(|i| if i + 1 < n { a.get(i, i + 1) } else { 0.0 }).collect();
    let target = SOLVE_TOL * norm(b);
    let mut x = thomas(&lower, &diag, &upper, b)?;
    for pass in 1..=4 {
        let r = residual(a, &x, b);
        if norm(&r) <= target {
            return Ok((x, pass));
        }
        let dx = thomas(&lower, &diag, &upper, &r)?;
        x.iter_mut().zip(dx).for_each(|(xi, d)| *xi += d);
    }
    let r = norm(&residual(a, &x, b));
    if r <= target {
        Ok((x, 5))
    } else {
        Err(numeric(
            "tridiagonal solve",
            format!("residual {r:e} above {target:e} after refinement"),
        ))
    }
}

fn pcg(a: &SparseOperator, b: &[f64]) -> Result<(Vec<f64>, usize)> {
    let n = a.n();
    let bn = norm(b);
    let mut x = vec![0.0; n];
    if bn == 0.0 {
        return Ok((x, 0));
    }
    let target = 0.5 * SOLVE_TOL * bn;
    let inv: Vec<f64> = a
        .diag()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(ri, m)| ri * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let max_iter = 20 * n + 100;
    for it in 1..=max_iter {
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(numeric("conjugate gradients", format!("breakdown p·Ap = {pap:e} at iteration {it}")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = norm(&r);
        if rn <= target {
            let true_r = norm(&residual(a, &x, b));
            if true_r <= SOLVE_TOL * bn {
                return Ok((x, it));
            }
            r = residual(a, &x, b);
        }
        if rn < 0.9 * best {
            best = rn;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 2 * n + 50 {
                return Err(numeric(
                    "conjugate gradients",
                    format!("stagnated at residual {rn:e} after {it} iterations"),
                ));
            }
        }
        z = r.iter().zip(&inv).map(|(ri, m)| ri * m).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(numeric("conjugate gradients", format!("no convergence in {max_iter} iterations")))
}
