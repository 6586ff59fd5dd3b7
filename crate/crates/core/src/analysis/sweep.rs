//! Log-log fits of the mismatch against τ.

use std::io::Write;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; `NaN` with fewer than three points.
    pub slope_se: f64,
    pub n: usize,
}

/// Ordinary least squares through `(x, y)` points; `None` with fewer than two
/// points or no spread in `x`.
pub fn least_squares(pts: &[(f64, f64)]) -> Option<LinearFit> {
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if n > 2 {
        let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_se,
        n,
    })
}

/// Slope of `ln E` against `ln τ` over rows with `E > 0`, with a 95%
/// confidence interval from the Student t quantile.
pub fn fit_log_slope(rows: &[(f64, f64)]) -> Option<(f64, (f64, f64))> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.0 > 0.0 && r.1 > 0.0)
        .map(|r| (r.0.ln(), r.1.ln()))
        .collect();
    let fit = least_squares(&pts)?;
    let half = if fit.n > 2 {
        let t = StudentsT::new(0.0, 1.0, (fit.n - 2) as f64)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(f64::NAN);
        t * fit.slope_se
    } else {
        f64::INFINITY
    };
    Some((fit.slope, (fit.slope - half, fit.slope + half)))
}

/// One sweep member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub e: f64,
    pub b: f64,
    /// Slope fitted over this and all earlier rows.
    pub slope_running: f64,
    /// `E ≤ 2τ · (½‖u₀‖² + ‖∫ρ⁽ᵈ⁾‖₁)` for this run.
    pub bound_holds: bool,
    pub aborted: bool,
}

/// `(E, B, bound_holds)` of a completed run.
pub type RunSummary = (f64, f64, bool);

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// `None` when every mismatch vanishes.
    pub slope: Option<f64>,
    pub ci: (f64, f64),
}

impl SweepTable {
    /// Builds the table from `(τ, E, B, bound_holds)` per run, `None` for aborted runs.
    pub fn new(runs: &[(f64, Option<RunSummary>)]) -> Self {
        let mut rows = Vec::with_capacity(runs.len());
        let mut pts = Vec::new();
        for &(tau, r) in runs {
            let row = match r {
                Some((e, b, ok)) => {
                    pts.push((tau, e));
                    SweepRow {
                        tau,
                        e,
                        b,
                        slope_running: fit_log_slope(&pts).map_or(f64::NAN, |f| f.0),
                        bound_holds: ok,
                        aborted: false,
                    }
                }
                None => SweepRow {
                    tau,
                    e: f64::NAN,
                    b: f64::NAN,
                    slope_running: f64::NAN,
                    bound_holds: false,
                    aborted: true,
                },
            };
            rows.push(row);
        }
        let fit = fit_log_slope(&pts);
        Self {
            rows,
            slope: fit.map(|f| f.0),
            ci: fit.map_or((f64::NAN, f64::NAN), |f| f.1),
        }
    }

    /// `E` strictly decreasing down the table.
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].e < w[0].e)
    }

    /// `max B / min B` over completed rows.
    pub fn b_ratio(&self) -> f64 {
        let bs = self.rows.iter().filter(|r| !r.aborted).map(|r| r.b);
        let (lo, hi) = bs.fold((f64::INFINITY, 0.0f64), |(lo, hi), b| (lo.min(b), hi.max(b)));
        hi / lo
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "tau,E,B,slope_running")?;
        for r in &self.rows {
            if r.aborted {
                writeln!(w, "{},aborted,aborted,NaN", r.tau)?;
            } else {
                writeln!(w, "{},{},{},{}", r.tau, r.e, r.b, r.slope_running)?;
            }
        }
        Ok(())
    }
}
