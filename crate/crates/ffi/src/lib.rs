//! C ABI over the hystera solver.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns a [`HysteraStatus`]; on failure the message is
//! available from [`hystera_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use hystera::analysis::energy_ledger;
use hystera::cli::{output, presets, Preset, RunConfig};
use hystera::constitutive::{Branch, ConstitutiveParams, ConstitutiveSet};
use hystera::grid::Grid;
use hystera::stepper::{State, Stepper, StepperConfig, Trajectory};
use hystera::HysteraError;

#[doc(hidden)]
pub const GENERATED_HEADER: &str = include_str!(concat!(env!("OUT_DIR"), "/hystera.h"));

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HysteraStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Numeric = 4,
    Inconsistent = 5,
    Degenerate = 6,
    Precondition = 7,
    Corrupted = 8,
    NonContraction = 9,
    Aborted = 10,
    Config = 11,
    Io = 12,
    Panic = 13,
}

impl From<&HysteraError> for HysteraStatus {
    fn from(e: &HysteraError) -> Self {
        match e {
            HysteraError::Domain { .. } => Self::Domain,
            HysteraError::Numeric { .. } => Self::Numeric,
            HysteraError::Inconsistent(_) => Self::Inconsistent,
            HysteraError::Degenerate { .. } => Self::Degenerate,
            HysteraError::Usage(_) => Self::InvalidArgument,
            HysteraError::Precondition(_) => Self::Precondition,
            HysteraError::Corrupted(_) => Self::Corrupted,
            HysteraError::NonContraction { .. } => Self::NonContraction,
            HysteraError::Aborted { .. } => Self::Aborted,
            HysteraError::Config { .. } => Self::Config,
            HysteraError::Io(_) => Self::Io,
        }
    }
}

/// Capillary branch selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HysteraBranch {
    Imbibition = 0,
    Drainage = 1,
}

impl From<HysteraBranch> for Branch {
    fn from(b: HysteraBranch) -> Self {
        match b {
            HysteraBranch::Imbibition => Branch::Imbibition,
            HysteraBranch::Drainage => Branch::Drainage,
        }
    }
}

/// Constitutive parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HysteraParams {
    pub alpha_i: f64,
    pub alpha_d: f64,
    pub n_i: f64,
    pub n_d: f64,
    pub k0: f64,
    pub mu: f64,
    pub delta: f64,
    pub tau: f64,
    pub n_rho: usize,
}

impl From<ConstitutiveParams> for HysteraParams {
    fn from(p: ConstitutiveParams) -> Self {
        Self {
            alpha_i: p.alpha_i,
            alpha_d: p.alpha_d,
            n_i: p.n_i,
            n_d: p.n_d,
            k0: p.k0,
            mu: p.mu,
            delta: p.delta,
            tau: p.tau,
            n_rho: p.n_rho,
        }
    }
}

impl From<HysteraParams> for ConstitutiveParams {
    fn from(p: HysteraParams) -> Self {
        Self {
            alpha_i: p.alpha_i,
            alpha_d: p.alpha_d,
            n_i: p.n_i,
            n_d: p.n_d,
            k0: p.k0,
            mu: p.mu,
            delta: p.delta,
            tau: p.tau,
            n_rho: p.n_rho,
        }
    }
}

/// Time-stepping parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HysteraStepperConfig {
    pub dt: f64,
    pub t_final: f64,
    pub eps_fp: f64,
    pub max_iter: usize,
    pub max_halvings: u32,
    pub gravity_x: f64,
    pub gravity_y: f64,
    /// Nonzero to include the gravity flux.
    pub flux: c_int,
    /// Nonzero to restart the whole run at the halved step.
    pub rebase_on_halving: c_int,
    /// Nonzero to require initial data inside the hysteresis band.
    pub check_initial_band: c_int,
}

impl From<StepperConfig> for HysteraStepperConfig {
    fn from(c: StepperConfig) -> Self {
        Self {
            dt: c.dt,
            t_final: c.t_final,
            eps_fp: c.eps_fp,
            max_iter: c.max_iter,
            max_halvings: c.max_halvings,
            gravity_x: c.gravity[0],
            gravity_y: c.gravity[1],
            flux: c.flux.into(),
            rebase_on_halving: c.rebase_on_halving.into(),
            check_initial_band: c.check_initial_band.into(),
        }
    }
}

impl From<HysteraStepperConfig> for StepperConfig {
    fn from(c: HysteraStepperConfig) -> Self {
        Self {
            dt: c.dt,
            t_final: c.t_final,
            eps_fp: c.eps_fp,
            max_iter: c.max_iter,
            max_halvings: c.max_halvings,
            gravity: [c.gravity_x, c.gravity_y],
            flux: c.flux != 0,
            rebase_on_halving: c.rebase_on_halving != 0,
            check_initial_band: c.check_initial_band != 0,
        }
    }
}

/// Tensor-product grid; `ny = 0` selects a line of `nx` nodes on `[0, lx]`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HysteraGridSpec {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Energy ledger of a completed run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HysteraLedger {
    pub a: f64,
    pub b: f64,
    pub m_inf: f64,
}

/// Opaque constitutive closure.
pub struct HysteraConstitutive {
    inner: ConstitutiveSet,
}

/// Opaque simulation: grid, closure, initial state and, after a run, the trajectory.
pub struct HysteraSimulation {
    grid: Grid,
    cons: ConstitutiveSet,
    config: StepperConfig,
    initial: State,
    trajectory: Option<Trajectory>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn guard(f: impl FnOnce() -> Result<(), (HysteraStatus, String)>) -> HysteraStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HysteraStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HysteraStatus::Panic
        }
    }
}

fn lift<T>(r: hystera::Result<T>) -> Result<T, (HysteraStatus, String)> {
    r.map_err(|e| (HysteraStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (HysteraStatus, String) {
    (HysteraStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (HysteraStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (HysteraStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (HysteraStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string(p: *const c_char, what: &str) -> Result<String, (HysteraStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| (HysteraStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hystera_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hystera_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default constitutive parameters.
///
/// # Safety
/// `out` must be null or point to writable memory for one `HysteraParams`.
#[no_mangle]
pub unsafe extern "C" fn hystera_default_params(out_params: *mut HysteraParams) -> HysteraStatus {
    guard(|| {
        *out(out_params, "out_params")? = ConstitutiveParams::default().into();
        Ok(())
    })
}

/// Default stepper settings.
///
/// # Safety
/// `out` must be null or point to writable memory for one `HysteraStepperConfig`.
#[no_mangle]
pub unsafe extern "C" fn hystera_default_stepper_config(out_config: *mut HysteraStepperConfig) -> HysteraStatus {
    guard(|| {
        *out(out_config, "out_config")? = StepperConfig::default().into();
        Ok(())
    })
}

/// Builds curves, play map and ρ tables.
///
/// # Safety
/// `params` must be null or valid; `out_handle` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hystera_constitutive_new(
    params: *const HysteraParams,
    out_handle: *mut *mut HysteraConstitutive,
) -> HysteraStatus {
    guard(|| {
        let p = *deref(params, "params")?;
        let slot = out(out_handle, "out_handle")?;
        let inner = lift(ConstitutiveSet::new(p.into()))?;
        *slot = Box::into_raw(Box::new(HysteraConstitutive { inner }));
        Ok(())
    })
}

/// Releases a closure; null is ignored.
///
/// # Safety
/// `handle` must come from `hystera_constitutive_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hystera_constitutive_free(handle: *mut HysteraConstitutive) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// `p_c` on a branch at saturation `s`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hystera_pc_eval(
    handle: *const HysteraConstitutive,
    branch: HysteraBranch,
    s: f64,
    out_p: *mut f64,
) -> HysteraStatus {
    guard(|| {
        let c = deref(handle, "handle")?;
        *out(out_p, "out_p")? = lift(c.inner.curves.pc_eval(branch.into(), s))?;
        Ok(())
    })
}

/// Regularized play map `u = b_δ(p)`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hystera_play_eval(handle: *const HysteraConstitutive, p: f64, out_u: *mut f64) -> HysteraStatus {
    guard(|| {
        let c = deref(handle, "handle")?;
        *out(out_u, "out_u")? = lift(c.inner.play.play_eval(p))?;
        Ok(())
    })
}

/// Pressure `p = b_δ⁻¹(u)`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hystera_play_inverse(handle: *const HysteraConstitutive, u: f64, out_p: *mut f64) -> HysteraStatus {
    guard(|| {
        let c = deref(handle, "handle")?;
        *out(out_p, "out_p")? = lift(c.inner.pressure(u))?;
        Ok(())
    })
}

/// Tabulated `ρ` on a branch.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hystera_rho(
    handle: *const HysteraConstitutive,
    branch: HysteraBranch,
    v: f64,
    out_u: *mut f64,
) -> HysteraStatus {
    guard(|| {
        let c = deref(handle, "handle")?;
        *out(out_u, "out_u")? = c.inner.rho.rho(branch.into(), v);
        Ok(())
    })
}

/// Relaxation rate `Φ_τ(u, v)` at the closure's τ.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hystera_phi(handle: *const HysteraConstitutive, u: f64, v: f64, out_rate: *mut f64) -> HysteraStatus {
    guard(|| {
        let c = deref(handle, "handle")?;
        *out(out_rate, "out_rate")? = c.inner.phi(u, v);
        Ok(())
    })
}

/// `(u, v)` at saturation `s` and band position `theta ∈ [0, 1]`
/// (0 on the imbibition curve, 1 on the drainage curve).
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hystera_band_state(
    handle: *const HysteraConstitutive,
    s: f64,
    theta: f64,
    out_u: *mut f64,
    out_v: *mut f64,
) -> HysteraStatus {
    guard(|| {
        let c = deref(handle, "handle")?;
        let (u, v) = lift(c.inner.band_state(s, theta))?;
        *out(out_u, "out_u")? = u;
        *out(out_v, "out_v")? = v;
        Ok(())
    })
}

/// Creates a simulation from a closure (copied), grid, stepper settings and
/// nodal initial data of length `n`.
///
/// # Safety
/// `u0` and `v0` must hold `n` doubles; other pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hystera_simulation_new(
    cons: *const HysteraConstitutive,
    grid: *const HysteraGridSpec,
    config: *const HysteraStepperConfig,
    u0: *const f64,
    v0: *const f64,
    n: usize,
    out_handle: *mut *mut HysteraSimulation,
) -> HysteraStatus {
    guard(|| {
        let c = deref(cons, "cons")?;
        let g = *deref(grid, "grid")?;
        let cfg: StepperConfig = (*deref(config, "config")?).into();
        let slot = out(out_handle, "out_handle")?;
        let grid = lift(if g.ny == 0 {
            Grid::line(g.lx, g.nx)
        } else {
            Grid::rect(g.lx, g.ly, g.nx, g.ny)
        })?;
        lift(cfg.validate())?;
        let u = slice(u0, n, "u0")?.to_vec();
        let v = slice(v0, n, "v0")?.to_vec();
        let initial = lift(State::new(&grid, &c.inner, u, v))?;
        *slot = Box::into_raw(Box::new(HysteraSimulation {
            grid,
            cons: c.inner.clone(),
            config: cfg,
            initial,
            trajectory: None,
        }));
        Ok(())
    })
}

/// Releases a simulation; null is ignored.
///
/// # Safety
/// `handle` must come from `hystera_simulation_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hystera_simulation_free(handle: *mut HysteraSimulation) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Marches to the final time, replacing any previous trajectory.
///
/// # Safety
/// `handle` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hystera_simulation_run(handle: *mut HysteraSimulation) -> HysteraStatus {
    guard(|| {
        let sim = out(handle, "handle")?;
        sim.trajectory = None;
        let stepper = lift(Stepper::new(&sim.grid, &sim.cons, sim.config.clone()))?;
        sim.trajectory = Some(lift(stepper.time_march(sim.initial.clone()))?);
        Ok(())
    })
}

fn trajectory(sim: &HysteraSimulation) -> Result<&Trajectory, (HysteraStatus, String)> {
    sim.trajectory
        .as_ref()
        .ok_or_else(|| (HysteraStatus::InvalidArgument, "simulation has not been run".into()))
}

/// Number of grid nodes.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hystera_simulation_nodes(handle: *const HysteraSimulation, out_n: *mut usize) -> HysteraStatus {
    guard(|| {
        let sim = deref(handle, "handle")?;
        *out(out_n, "out_n")? = sim.grid.n_nodes();
        Ok(())
    })
}

/// Number of stored time levels, including the initial one.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hystera_simulation_levels(handle: *const HysteraSimulation, out_n: *mut usize) -> HysteraStatus {
    guard(|| {
        let sim = deref(handle, "handle")?;
        *out(out_n, "out_n")? = trajectory(sim)?.states.len();
        Ok(())
    })
}

/// Time and nodal fields at a stored level. Any of `u`, `v`, `s`, `p` may be
/// null; non-null buffers must hold `n` doubles, with `n` the node count.
///
/// # Safety
/// Buffers must be null or hold `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hystera_simulation_state(
    handle: *const HysteraSimulation,
    level: usize,
    n: usize,
    out_t: *mut f64,
    u: *mut f64,
    v: *mut f64,
    s: *mut f64,
    p: *mut f64,
) -> HysteraStatus {
    guard(|| {
        let sim = deref(handle, "handle")?;
        let tr = trajectory(sim)?;
        let st = tr.states.get(level).ok_or_else(|| {
            (
                HysteraStatus::InvalidArgument,
                format!("level {level} out of range 0..{}", tr.states.len()),
            )
        })?;
        if n != sim.grid.n_nodes() {
            return Err((
                HysteraStatus::InvalidArgument,
                format!("buffer length {n} differs from {} nodes", sim.grid.n_nodes()),
            ));
        }
        if let Some(t) = out_t.as_mut() {
            *t = tr.times[level];
        }
        for (dst, src) in [(u, &st.u), (v, &st.v), (s, &st.s), (p, &st.p)] {
            if !dst.is_null() {
                std::slice::from_raw_parts_mut(dst, n).copy_from_slice(src);
            }
        }
        Ok(())
    })
}

/// Energy ledger of the completed run.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hystera_simulation_ledger(handle: *const HysteraSimulation, out_ledger: *mut HysteraLedger) -> HysteraStatus {
    guard(|| {
        let sim = deref(handle, "handle")?;
        let l = lift(energy_ledger(trajectory(sim)?, &sim.grid))?;
        *out(out_ledger, "out_ledger")? = HysteraLedger {
            a: l.a,
            b: l.b,
            m_inf: l.m_inf,
        };
        Ok(())
    })
}

/// Runs a named preset with `key=value` configuration text, writing outputs to
/// `out_dir` (null keeps the configured directory). `out_passed` receives 1 if
/// every check passed and 0 otherwise.
///
/// # Safety
/// Strings must be null or NUL-terminated; `out_passed` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hystera_run_preset(
    preset: *const c_char,
    config_text: *const c_char,
    out_dir: *const c_char,
    out_passed: *mut c_int,
) -> HysteraStatus {
    guard(|| {
        let name = string(preset, "preset")?;
        let text = string(config_text, "config_text")?;
        let passed = out(out_passed, "out_passed")?;
        let preset: Preset = lift(name.parse())?;
        let mut cfg = lift(RunConfig::parse(&text, preset))?;
        if !out_dir.is_null() {
            cfg.out_dir = PathBuf::from(string(out_dir, "out_dir")?);
        }
        let echo = cfg.echo();
        let dir = cfg.out_dir.clone();
        let ok = match preset {
            Preset::ScanLoop => {
                let (runs, d) = lift(presets::run_scan(&cfg))?;
                lift(output::write_scan_run(&dir, &cfg.run_id, &echo, &runs, &d))?;
                d.all_passed()
            }
            Preset::TauSweep => {
                let (members, table, d) = lift(presets::run_sweep(&cfg, 1))?;
                for (k, m) in members.iter().enumerate() {
                    let (sc, tr, md) = m.outcome.as_ref().map_err(|e| (HysteraStatus::from(e), e.to_string()))?;
                    let id = format!("{}_tau_{k}", cfg.run_id);
                    lift(output::write_pde_run(&dir, &id, &echo, tr, &sc.grid, &sc.cons.rho, md))?;
                }
                lift(output::write_sweep(&dir, &cfg.run_id, &echo, &table, &d))?;
                d.all_passed()
            }
            _ => {
                let sc = lift(presets::scenario(&cfg, cfg.constitutive.tau))?;
                let tr = lift(sc.run())?;
                let d = lift(presets::diagnose(&cfg, &sc, &tr))?;
                lift(output::write_pde_run(&dir, &cfg.run_id, &echo, &tr, &sc.grid, &sc.cons.rho, &d))?;
                d.all_passed()
            }
        };
        *passed = ok.into();
        Ok(())
    })
}
