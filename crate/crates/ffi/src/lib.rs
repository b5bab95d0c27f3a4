//! C ABI for pcvi.
//!
//! Handles are opaque and owned by the caller, who must release them with
//! the matching `_free` function. Every fallible call returns a
//! [`PcviStatus`]; on failure a description is available from
//! [`pcvi_last_error_message`] on the same thread until the next failing
//! call. Panics are caught at the boundary and reported as
//! `PCVI_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pcvi::discrete_lagrangian::DiscreteLagrangian;
use pcvi::integrator::{self, Method, MethodConfig, PhasePoint};
use pcvi::systems::{Builtin, MechanicalSystem};
use pcvi::Error;

/// Result of an API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcviStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid argument: unknown name, bad order, dimension mismatch.
    Usage = 2,
    /// A Newton iteration failed to converge.
    Solver = 3,
    /// The system cannot supply the derivatives the method needs.
    Capability = 4,
    Oracle = 5,
    Io = 6,
    /// Internal panic; the library state is unaffected.
    Panic = 7,
}

/// A mechanical system.
pub struct PcviSystem {
    inner: MechanicalSystem<Builtin>,
}

/// A configured one-step method with a fixed step size.
pub struct PcviIntegrator {
    system: MechanicalSystem<Builtin>,
    config: MethodConfig,
    h: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PcviStatus {
    match e {
        Error::Usage(_) => PcviStatus::Usage,
        Error::Capability(_) => PcviStatus::Capability,
        Error::Solver { .. } => PcviStatus::Solver,
        Error::Oracle(_) => PcviStatus::Oracle,
        Error::Io(_) => PcviStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (PcviStatus, String)>) -> PcviStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcviStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PcviStatus::Panic
        }
    }
}

fn lib(e: Error) -> (PcviStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PcviStatus, String) {
    (PcviStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PcviStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (PcviStatus::Usage, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (PcviStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pcvi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pcvi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a builtin system: `"sho"`, `"pendulum"` or `"duffing"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcvi_system_builtin(name: *const c_char, out: *mut *mut PcviSystem) -> PcviStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = str_arg(name, "name")?;
        let inner = pcvi::systems::builtin(name).map_err(lib)?;
        *out = Box::into_raw(Box::new(PcviSystem { inner }));
        Ok(())
    })
}

/// Release a system. Null is ignored.
///
/// # Safety
/// `system` must come from [`pcvi_system_builtin`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pcvi_system_free(system: *mut PcviSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Configuration dimension, or 0 for a null handle.
///
/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pcvi_system_dim(system: *const PcviSystem) -> usize {
    system.as_ref().map_or(0, |s| s.inner.dim())
}

/// Total energy `H(q, p)`.
///
/// # Safety
/// `q` and `p` must point to `dim` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pcvi_system_energy(
    system: *const PcviSystem,
    q: *const f64,
    p: *const f64,
    dim: usize,
    out: *mut f64,
) -> PcviStatus {
    guard(|| {
        let sys = system.as_ref().ok_or_else(|| null("system"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let state = PhasePoint::new(slice_arg(q, dim, "q")?.to_vec(), slice_arg(p, dim, "p")?.to_vec(), 0.0);
        *out = pcvi::systems::energy(&sys.inner, &state).map_err(lib)?;
        Ok(())
    })
}

/// Create an integrator for `method` (`"hem(n,m)"`, `"gauss2"` or
/// `"midpoint"`) with step `h`. The system is copied.
///
/// # Safety
/// `system` must be live, `method` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pcvi_integrator_new(
    system: *const PcviSystem,
    method: *const c_char,
    h: f64,
    out: *mut *mut PcviIntegrator,
) -> PcviStatus {
    guard(|| {
        let sys = system.as_ref().ok_or_else(|| null("system"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let method: Method = str_arg(method, "method")?.parse().map_err(lib)?;
        if h == 0.0 || !h.is_finite() {
            return Err((PcviStatus::Usage, "step size h must be finite and nonzero".into()));
        }
        *out = Box::into_raw(Box::new(PcviIntegrator {
            system: sys.inner.clone(),
            config: MethodConfig::new(method),
            h,
        }));
        Ok(())
    })
}

/// Release an integrator. Null is ignored.
///
/// # Safety
/// `integrator` must come from [`pcvi_integrator_new`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pcvi_integrator_free(integrator: *mut PcviIntegrator) {
    if !integrator.is_null() {
        drop(Box::from_raw(integrator));
    }
}

/// Set the Newton tolerance and iteration cap (defaults 1e-12 and 50).
///
/// # Safety
/// `integrator` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pcvi_integrator_set_tolerance(
    integrator: *mut PcviIntegrator,
    tol: f64,
    max_iter: usize,
) -> PcviStatus {
    guard(|| {
        let it = integrator.as_mut().ok_or_else(|| null("integrator"))?;
        let cfg = MethodConfig { tol, max_iter, ..it.config };
        cfg.validate().map_err(lib)?;
        it.config = cfg;
        Ok(())
    })
}

/// Advance `(q, p)` by one step in place. On failure the state is unchanged.
///
/// # Safety
/// `q` and `p` must point to `dim` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pcvi_integrator_step(
    integrator: *const PcviIntegrator,
    q: *mut f64,
    p: *mut f64,
    dim: usize,
) -> PcviStatus {
    guard(|| {
        let it = integrator.as_ref().ok_or_else(|| null("integrator"))?;
        let state = PhasePoint::new(slice_arg(q, dim, "q")?.to_vec(), slice_arg(p, dim, "p")?.to_vec(), 0.0);
        let next = integrator::step(&it.system, &it.config, &state, it.h).map_err(lib)?;
        std::slice::from_raw_parts_mut(q, dim).copy_from_slice(&next.q);
        std::slice::from_raw_parts_mut(p, dim).copy_from_slice(&next.p);
        Ok(())
    })
}

/// Integrate `steps` steps from `(q0, p0)`. Points are written row by row
/// to `out_q` and `out_p`, each of capacity `(steps + 1) * dim`, starting
/// with the initial state; `out_len` receives the number of points. A
/// failure after the first step keeps the computed prefix and returns the
/// failure status.
///
/// # Safety
/// All pointers must be valid for the stated sizes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pcvi_integrator_run(
    integrator: *const PcviIntegrator,
    q0: *const f64,
    p0: *const f64,
    dim: usize,
    steps: usize,
    out_q: *mut f64,
    out_p: *mut f64,
    out_len: *mut usize,
) -> PcviStatus {
    guard(|| {
        let it = integrator.as_ref().ok_or_else(|| null("integrator"))?;
        if out_q.is_null() || out_p.is_null() || out_len.is_null() {
            return Err(null("output buffer"));
        }
        *out_len = 0;
        let start = PhasePoint::new(slice_arg(q0, dim, "q0")?.to_vec(), slice_arg(p0, dim, "p0")?.to_vec(), 0.0);
        let traj = integrator::run(&it.system, &it.config, &start, it.h, steps).map_err(lib)?;
        let total = steps.checked_add(1).and_then(|k| k.checked_mul(dim)).ok_or_else(|| {
            (PcviStatus::Usage, "steps * dim overflows".to_string())
        })?;
        let qs = std::slice::from_raw_parts_mut(out_q, total);
        let ps = std::slice::from_raw_parts_mut(out_p, total);
        for (k, x) in traj.points.iter().enumerate() {
            qs[k * dim..(k + 1) * dim].copy_from_slice(&x.q);
            ps[k * dim..(k + 1) * dim].copy_from_slice(&x.p);
        }
        *out_len = traj.points.len();
        match traj.truncated {
            Some(e) => Err(lib(e)),
            None => Ok(()),
        }
    })
}

/// Discrete Lagrangian `L_d(q0, q1, h)` of orders `(n, m)`, and optionally
/// its partial derivatives. `d1` and `d2` may be null; otherwise they
/// receive `dim` doubles each.
///
/// # Safety
/// Non-null pointers must be valid for `dim` doubles; `value` must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pcvi_discrete_lagrangian(
    system: *const PcviSystem,
    n: usize,
    m: usize,
    h: f64,
    q0: *const f64,
    q1: *const f64,
    dim: usize,
    value: *mut f64,
    d1: *mut f64,
    d2: *mut f64,
) -> PcviStatus {
    guard(|| {
        let sys = system.as_ref().ok_or_else(|| null("system"))?;
        if value.is_null() {
            return Err(null("value"));
        }
        let (q0, q1) = (slice_arg(q0, dim, "q0")?, slice_arg(q1, dim, "q1")?);
        let want_gradient = !d1.is_null() || !d2.is_null();
        let ld = DiscreteLagrangian::new(&sys.inner, n, m, h).map_err(lib)?;
        let e = ld.evaluate(q0, q1, None, want_gradient, Default::default()).map_err(lib)?;
        *value = e.value;
        if let (false, Some(g)) = (d1.is_null(), &e.d1) {
            std::slice::from_raw_parts_mut(d1, dim).copy_from_slice(g);
        }
        if let (false, Some(g)) = (d2.is_null(), &e.d2) {
            std::slice::from_raw_parts_mut(d2, dim).copy_from_slice(g);
        }
        Ok(())
    })
}
