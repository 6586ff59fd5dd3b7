//! Flat `key=value` run configuration.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::constitutive::ConstitutiveParams;
use crate::error::{HysteraError, Result};
use crate::stepper::StepperConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Equilibrium,
    Redistribution,
    DrainageDrive,
    ScanLoop,
    TauSweep,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Equilibrium,
        Preset::Redistribution,
        Preset::DrainageDrive,
        Preset::ScanLoop,
        Preset::TauSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Equilibrium => "equilibrium",
            Preset::Redistribution => "redistribution",
            Preset::DrainageDrive => "drainage-drive",
            Preset::ScanLoop => "scan-loop",
            Preset::TauSweep => "tau-sweep",
        }
    }
}

impl FromStr for Preset {
    type Err = HysteraError;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| HysteraError::Usage(format!("unknown preset '{s}'")))
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Every effective parameter of one CLI run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    pub run_id: String,
    pub out_dir: PathBuf,
    pub constitutive: ConstitutiveParams,
    pub stepper: StepperConfig,
    pub length: f64,
    pub nodes: usize,
    /// Saturation left and right of the interface (redistribution).
    pub s_left: f64,
    pub s_right: f64,
    /// Band position of the initial pressure, 0 on imbibition, 1 on drainage.
    pub theta: f64,
    pub interface_width: f64,
    /// Uniform interior saturation and band position (equilibrium, drainage-drive, scan-loop).
    pub s0: f64,
    pub theta0: f64,
    pub taus: Vec<f64>,
    pub scan_period: f64,
    pub scan_cycles: usize,
    pub scan_u_lo: f64,
    pub scan_u_hi: f64,
    pub scan_dt: f64,
    pub bound_tol: f64,
    pub gronwall_ceiling: f64,
}

impl RunConfig {
    /// Defaults for a preset.
    pub fn defaults(preset: Preset) -> Self {
        let mut c = Self {
            preset,
            run_id: String::new(),
            out_dir: PathBuf::from("."),
            constitutive: ConstitutiveParams::default(),
            stepper: StepperConfig::default(),
            length: 1.0,
            nodes: 51,
            s_left: 0.7,
            s_right: 0.3,
            theta: 0.5,
            interface_width: 0.1,
            s0: 0.5,
            theta0: 0.5,
            taus: vec![0.1, 0.01, 0.001],
            scan_period: 20.0,
            scan_cycles: 2,
            scan_u_lo: 0.02,
            scan_u_hi: 0.33,
            scan_dt: 2e-4,
            bound_tol: 1e-8,
            gronwall_ceiling: 1.0,
        };
        match preset {
            Preset::Equilibrium => {
                c.stepper.dt = 0.01;
                c.stepper.t_final = 0.1;
            }
            Preset::Redistribution => {
                c.nodes = 101;
                c.stepper.dt = 0.02;
                c.stepper.t_final = 1.0;
            }
            Preset::DrainageDrive | Preset::TauSweep => {
                c.length = 16.0;
                c.s0 = 0.6;
                c.theta0 = 1.5;
                c.stepper.dt = 1e-4;
                c.stepper.t_final = 0.2;
                c.stepper.check_initial_band = false;
            }
            Preset::ScanLoop => {}
        }
        c
    }

    /// Parses `key=value` lines over the preset defaults. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str, preset: Preset) -> Result<Self> {
        let mut c = Self::defaults(preset);
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let (k, v) = s.split_once('=').ok_or_else(|| HysteraError::Config {
                line,
                detail: format!("expected key=value, got '{s}'"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if let Some(prev) = seen.insert(k.to_string(), line) {
                return Err(HysteraError::Config {
                    line,
                    detail: format!("duplicate key '{k}' (first set on line {prev})"),
                });
            }
            c.set(k, v).map_err(|detail| HysteraError::Config { line, detail })?;
        }
        if c.run_id.is_empty() {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            c.run_id = format!("run-{secs}");
        }
        let line_of = |k: &str| seen.get(k).copied().unwrap_or(0);
        c.validate().map_err(|(k, detail)| HysteraError::Config { line: line_of(k), detail })?;
        Ok(c)
    }

    fn set(&mut self, k: &str, v: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(k: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("invalid value '{v}' for '{k}'"))
        }
        fn flag(k: &str, v: &str) -> std::result::Result<bool, String> {
            match v {
                "true" | "1" => Ok(true),
                "false" | "0" => Ok(false),
                _ => Err(format!("invalid boolean '{v}' for '{k}'")),
            }
        }
        let p = &mut self.constitutive;
        let s = &mut self.stepper;
        match k {
            "run_id" => {
                if v.is_empty() || v.contains(['/', '\\']) {
                    return Err(format!("invalid run_id '{v}'"));
                }
                self.run_id = v.to_string();
            }
            "out_dir" => self.out_dir = PathBuf::from(v),
            "alpha_i" => p.alpha_i = num(k, v)?,
            "alpha_d" => p.alpha_d = num(k, v)?,
            "n_i" => p.n_i = num(k, v)?,
            "n_d" => p.n_d = num(k, v)?,
            "k0" => p.k0 = num(k, v)?,
            "mu" => p.mu = num(k, v)?,
            "delta" => p.delta = num(k, v)?,
            "tau" => p.tau = num(k, v)?,
            "n_rho" => p.n_rho = num(k, v)?,
            "dt" => s.dt = num(k, v)?,
            "t_final" => s.t_final = num(k, v)?,
            "eps_fp" => s.eps_fp = num(k, v)?,
            "max_iter" => s.max_iter = num(k, v)?,
            "max_halvings" => s.max_halvings = num(k, v)?,
            "gravity" => s.gravity = [num(k, v)?, 0.0],
            "flux" => s.flux = flag(k, v)?,
            "rebase_on_halving" => s.rebase_on_halving = flag(k, v)?,
            "check_initial_band" => s.check_initial_band = flag(k, v)?,
            "length" => self.length = num(k, v)?,
            "nodes" => self.nodes = num(k, v)?,
            "s_left" => self.s_left = num(k, v)?,
            "s_right" => self.s_right = num(k, v)?,
            "theta" => self.theta = num(k, v)?,
            "interface_width" => self.interface_width = num(k, v)?,
            "s0" => self.s0 = num(k, v)?,
            "theta0" => self.theta0 = num(k, v)?,
            "taus" => {
                self.taus = v
                    .split(',')
                    .map(|x| num::<f64>(k, x.trim()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "scan_period" => self.scan_period = num(k, v)?,
            "scan_cycles" => self.scan_cycles = num(k, v)?,
            "scan_u_lo" => self.scan_u_lo = num(k, v)?,
            "scan_u_hi" => self.scan_u_hi = num(k, v)?,
            "scan_dt" => self.scan_dt = num(k, v)?,
            "bound_tol" => self.bound_tol = num(k, v)?,
            "gronwall_ceiling" => self.gronwall_ceiling = num(k, v)?,
            _ => return Err(format!("unknown key '{k}'")),
        }
        Ok(())
    }

    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let p = &self.constitutive;
        let s = &self.stepper;
        let pos = |k: &'static str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err((k, format!("{k} must be positive, got {x}")))
            }
        };
        let unit = |k: &'static str, x: f64| {
            if x > 0.0 && x < 1.0 {
                Ok(())
            } else {
                Err((k, format!("{k} must lie in (0, 1), got {x}")))
            }
        };
        pos("tau", p.tau)?;
        pos("alpha_i", p.alpha_i)?;
        pos("alpha_d", p.alpha_d)?;
        if !(p.n_i > 1.0) {
            return Err(("n_i", format!("n_i must exceed 1, got {}", p.n_i)));
        }
        if !(p.n_d > 1.0) {
            return Err(("n_d", format!("n_d must exceed 1, got {}", p.n_d)));
        }
        if !(p.k0 >= 0.0) {
            return Err(("k0", format!("k0 must be non-negative, got {}", p.k0)));
        }
        if !(p.mu >= 0.0 && p.mu < 1.0) {
            return Err(("mu", format!("mu must lie in [0, 1), got {}", p.mu)));
        }
        if !(p.delta >= 0.0 && p.delta.is_finite()) {
            return Err(("delta", format!("delta must be non-negative, got {}", p.delta)));
        }
        if p.n_rho < 16 {
            return Err(("n_rho", format!("n_rho must be at least 16, got {}", p.n_rho)));
        }
        pos("dt", s.dt)?;
        if !(s.t_final >= 0.0 && s.t_final.is_finite()) {
            return Err(("t_final", format!("t_final must be non-negative, got {}", s.t_final)));
        }
        s.steps(s.dt).map_err(|e| ("t_final", e.to_string()))?;
        pos("eps_fp", s.eps_fp)?;
        if s.max_iter < 1 {
            return Err(("max_iter", "max_iter must be at least 1".into()));
        }
        if !s.gravity[0].is_finite() {
            return Err(("gravity", "gravity must be finite".into()));
        }
        pos("length", self.length)?;
        if self.nodes < 3 {
            return Err(("nodes", format!("nodes must be at least 3, got {}", self.nodes)));
        }
        unit("s_left", self.s_left)?;
        unit("s_right", self.s_right)?;
        unit("s0", self.s0)?;
        pos("interface_width", self.interface_width)?;
        if !self.theta.is_finite() || !self.theta0.is_finite() {
            return Err(("theta", "band positions must be finite".into()));
        }
        if self.taus.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(("taus", "every tau must be positive".into()));
        }
        if self.taus.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(("taus", "taus must be strictly decreasing".into()));
        }
        let need = match self.preset {
            Preset::TauSweep => 3,
            _ => 1,
        };
        if self.taus.len() < need {
            return Err(("taus", format!("{} needs at least {need} taus, got {}", self.preset, self.taus.len())));
        }
        pos("scan_period", self.scan_period)?;
        pos("scan_dt", self.scan_dt)?;
        if self.scan_cycles < 1 {
            return Err(("scan_cycles", "scan_cycles must be at least 1".into()));
        }
        if !(self.scan_u_lo >= 0.0 && self.scan_u_lo < self.scan_u_hi) {
            return Err(("scan_u_lo", "need 0 <= scan_u_lo < scan_u_hi".into()));
        }
        pos("bound_tol", self.bound_tol)?;
        pos("gronwall_ceiling", self.gronwall_ceiling)?;
        Ok(())
    }

    /// Effective configuration in a fixed key order; parses back to `self`.
    pub fn echo(&self) -> String {
        let p = &self.constitutive;
        let s = &self.stepper;
        let taus: Vec<String> = self.taus.iter().map(|t| t.to_string()).collect();
        let rows: Vec<(&str, String)> = vec![
            ("run_id", self.run_id.clone()),
            ("out_dir", self.out_dir.display().to_string()),
            ("alpha_i", p.alpha_i.to_string()),
            ("alpha_d", p.alpha_d.to_string()),
            ("n_i", p.n_i.to_string()),
            ("n_d", p.n_d.to_string()),
            ("k0", p.k0.to_string()),
            ("mu", p.mu.to_string()),
            ("delta", p.delta.to_string()),
            ("tau", p.tau.to_string()),
            ("n_rho", p.n_rho.to_string()),
            ("dt", s.dt.to_string()),
            ("t_final", s.t_final.to_string()),
            ("eps_fp", s.eps_fp.to_string()),
            ("max_iter", s.max_iter.to_string()),
            ("max_halvings", s.max_halvings.to_string()),
            ("gravity", s.gravity[0].to_string()),
            ("flux", s.flux.to_string()),
            ("rebase_on_halving", s.rebase_on_halving.to_string()),
            ("check_initial_band", s.check_initial_band.to_string()),
            ("length", self.length.to_string()),
            ("nodes", self.nodes.to_string()),
            ("s_left", self.s_left.to_string()),
            ("s_right", self.s_right.to_string()),
            ("theta", self.theta.to_string()),
            ("interface_width", self.interface_width.to_string()),
            ("s0", self.s0.to_string()),
            ("theta0", self.theta0.to_string()),
            ("taus", taus.join(",")),
            ("scan_period", self.scan_period.to_string()),
            ("scan_cycles", self.scan_cycles.to_string()),
            ("scan_u_lo", self.scan_u_lo.to_string()),
            ("scan_u_hi", self.scan_u_hi.to_string()),
            ("scan_dt", self.scan_dt.to_string()),
            ("bound_tol", self.bound_tol.to_string()),
            ("gronwall_ceiling", self.gronwall_ceiling.to_string()),
        ];
        let mut out = String::new();
        writeln!(out, "# preset: {}", self.preset).unwrap();
        for (k, v) in rows {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }
}
