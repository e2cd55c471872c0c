//! C ABI for the infx numerical laboratory.
//!
//! Conventions:
//! * Every function returns an [`InfxStatus`]; results come back through out
//!   pointers. `INFX_STATUS_OK` is 0.
//! * Grids, boundary data, exponent fields and solved fields are opaque
//!   handles created by `infx_*_new*` constructors and released with the
//!   matching `infx_*_free` (null-safe).
//! * On failure, `infx_last_error_message()` returns a thread-local,
//!   NUL-terminated description valid until the next failing call on the
//!   same thread.
//! * Handles are immutable after construction and may be shared across
//!   threads; the solve entry points themselves are safe to call
//!   concurrently on distinct outputs.
//!
//! # Safety
//!
//! Every entry point taking pointers is `unsafe` with one shared contract:
//! handle arguments must be live pointers from the matching constructor (or
//! null only where documented), out pointers must be valid for writes,
//! buffer pointers must cover the stated length, and callbacks must be sound
//! for any x in the stated interval. All pointers are null-checked before
//! use; anything else that violates the contract is undefined behavior, as
//! in any C API.

// the per-function safety story is the crate-level contract above
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use infx::domain::{BoundaryData, ExponentField, Grid, ScalarField};
use infx::error::Error;
use infx::estimates;
use infx::oracle1d;
use infx::solvers::{self, SolveConfig};
use infx::transform::{self, TransformParams};

/// Status codes for every FFI entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfxStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    GridMismatch = 3,
    NotInterior = 4,
    NoRoot = 5,
    QuadratureDiverged = 6,
    Io = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> InfxStatus {
    match err {
        Error::InvalidArgument(_) | Error::Config(_) | Error::Json(_) => {
            InfxStatus::InvalidArgument
        }
        Error::GridMismatch(_) => InfxStatus::GridMismatch,
        Error::NotInterior(_) => InfxStatus::NotInterior,
        Error::NoRoot(_) => InfxStatus::NoRoot,
        Error::QuadratureDiverged { .. } => InfxStatus::QuadratureDiverged,
        Error::Io(_) => InfxStatus::Io,
    }
}

/// Runs a fallible body, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), InfxStatus>) -> InfxStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => InfxStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("panic crossed the FFI boundary");
            InfxStatus::Panic
        }
    }
}

fn fail(err: Error) -> InfxStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn null_arg(name: &str) -> InfxStatus {
    set_error(&format!("null argument: {name}"));
    InfxStatus::NullArgument
}

macro_rules! nonnull {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return null_arg(stringify!($ptr)),
        }
    };
}

macro_rules! nonnull_mut {
    ($ptr:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => return null_arg(stringify!($ptr)),
        }
    };
}

/// Opaque grid handle.
pub struct InfxGrid(Arc<Grid>);
/// Opaque Dirichlet data handle.
pub struct InfxBoundary(BoundaryData);
/// Opaque exponent-field handle.
pub struct InfxExponent(ExponentField);
/// Opaque scalar-field handle.
pub struct InfxField(ScalarField);

/// Solver options; mirror of the library's solve configuration.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct InfxSolveOptions {
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_iterations: u64,
    pub gradient_floor: f64,
    pub relaxation: f64,
}

impl From<InfxSolveOptions> for SolveConfig {
    fn from(o: InfxSolveOptions) -> Self {
        SolveConfig {
            epsilon: o.epsilon,
            tolerance: o.tolerance,
            max_iterations: o.max_iterations as usize,
            gradient_floor: o.gradient_floor,
            relaxation: o.relaxation,
        }
    }
}

/// Convergence statistics of one solve.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct InfxSolveStats {
    pub iterations: u64,
    pub final_residual: f64,
    /// 1 when the final sweep update fell below the tolerance.
    pub converged: u8,
}

/// Which equation a solve targets.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfxSolveKind {
    /// The unconstrained equation (infinity-harmonic, or the
    /// variable-exponent equation when an exponent handle is supplied).
    Unconstrained = 0,
    /// Upper auxiliary equation: superharmonic with descending slope >= eps.
    Upper = 1,
    /// Lower auxiliary equation, the mirror image.
    Lower = 2,
}

/// Constants entering the stability-bound evaluators.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct InfxBoundParams {
    pub c: f64,
    pub a: f64,
    pub f_sup: f64,
    pub f_lip: f64,
    pub kappa: f64,
    pub b: f64,
    pub scale: f64,
    pub two_exp_const: f64,
}

impl From<InfxBoundParams> for estimates::BoundParams {
    fn from(p: InfxBoundParams) -> Self {
        estimates::BoundParams {
            c: p.c,
            a: p.a,
            f_sup: p.f_sup,
            f_lip: p.f_lip,
            kappa: p.kappa,
            b: p.b,
            scale: p.scale,
            two_exp_const: p.two_exp_const,
        }
    }
}

/// Result of the exhaustive doubling-of-variables probe.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct InfxDoublingResult {
    pub j: f64,
    pub m_j: f64,
    pub sigma: f64,
    pub x_index: u64,
    pub y_index: u64,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub distance: f64,
    pub j_dist: f64,
}

/// Pointwise exponent callback for the 1D oracle: receives x and the opaque
/// user pointer, returns p(x) > 0.
pub type InfxExponentFn = extern "C" fn(x: f64, user: *mut c_void) -> f64;

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn infx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

// ---------------------------------------------------------------- grid

/// Uniform 1D grid on [lower, upper] with n >= 3 nodes.
#[no_mangle]
pub unsafe extern "C" fn infx_grid_new_1d(
    lower: f64,
    upper: f64,
    n: u64,
    out: *mut *mut InfxGrid,
) -> InfxStatus {
    guard(|| {
        let out = match unsafe { out.as_mut() } {
            Some(o) => o,
            None => return Err(null_arg("out")),
        };
        let grid = Grid::new_1d(lower, upper, n as usize).map_err(fail)?;
        *out = Box::into_raw(Box::new(InfxGrid(Arc::new(grid))));
        Ok(())
    })
}

/// Uniform 2D grid on the rectangle with n >= 3 nodes per axis.
#[no_mangle]
pub unsafe extern "C" fn infx_grid_new_2d(
    lower_x: f64,
    lower_y: f64,
    upper_x: f64,
    upper_y: f64,
    n: u64,
    out: *mut *mut InfxGrid,
) -> InfxStatus {
    guard(|| {
        let out = match unsafe { out.as_mut() } {
            Some(o) => o,
            None => return Err(null_arg("out")),
        };
        let grid =
            Grid::new_2d([lower_x, lower_y], [upper_x, upper_y], n as usize).map_err(fail)?;
        *out = Box::into_raw(Box::new(InfxGrid(Arc::new(grid))));
        Ok(())
    })
}

/// # Safety
/// `grid` must be a pointer returned by a grid constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn infx_grid_free(grid: *mut InfxGrid) {
    if !grid.is_null() {
        drop(unsafe { Box::from_raw(grid) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn infx_grid_node_count(grid: *const InfxGrid, out: *mut u64) -> InfxStatus {
    let g = nonnull!(grid);
    let out = nonnull_mut!(out);
    *out = g.0.node_count() as u64;
    InfxStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn infx_grid_boundary_count(grid: *const InfxGrid, out: *mut u64) -> InfxStatus {
    let g = nonnull!(grid);
    let out = nonnull_mut!(out);
    *out = g.0.boundary_count() as u64;
    InfxStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn infx_grid_diameter(grid: *const InfxGrid, out: *mut f64) -> InfxStatus {
    let g = nonnull!(grid);
    let out = nonnull_mut!(out);
    *out = g.0.diameter();
    InfxStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn infx_grid_spacing(
    grid: *const InfxGrid,
    out_hx: *mut f64,
    out_hy: *mut f64,
) -> InfxStatus {
    let g = nonnull!(grid);
    let hx = nonnull_mut!(out_hx);
    let hy = nonnull_mut!(out_hy);
    let h = g.0.spacing();
    *hx = h[0];
    *hy = h[1];
    InfxStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn infx_grid_node_coords(
    grid: *const InfxGrid,
    node: u64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> InfxStatus {
    let g = nonnull!(grid);
    let x = nonnull_mut!(out_x);
    let y = nonnull_mut!(out_y);
    if node as usize >= g.0.node_count() {
        set_error("node index out of range");
        return InfxStatus::InvalidArgument;
    }
    let c = g.0.coords(node as usize);
    *x = c[0];
    *y = c[1];
    InfxStatus::Ok
}

// ---------------------------------------------------------------- boundary

/// Dirichlet data from one value per boundary node, in ascending node-index
/// order; `len` must equal the grid's boundary count.
#[no_mangle]
pub unsafe extern "C" fn infx_boundary_from_values(
    grid: *const InfxGrid,
    values: *const f64,
    len: u64,
    out: *mut *mut InfxBoundary,
) -> InfxStatus {
    guard(|| {
        let g = match unsafe { grid.as_ref() } {
            Some(g) => g,
            None => return Err(null_arg("grid")),
        };
        if values.is_null() {
            return Err(null_arg("values"));
        }
        let out = match unsafe { out.as_mut() } {
            Some(o) => o,
            None => return Err(null_arg("out")),
        };
        let slice = unsafe { std::slice::from_raw_parts(values, len as usize) };
        let data = BoundaryData::new(&g.0, slice.to_vec()).map_err(fail)?;
        *out = Box::into_raw(Box::new(InfxBoundary(data)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn infx_boundary_constant(
    grid: *const InfxGrid,
    value: f64,
    out: *mut *mut InfxBoundary,
) -> InfxStatus {
    guard(|| {
        let g = match unsafe { grid.as_ref() } {
            Some(g) => g,
            None => return Err(null_arg("grid")),
        };
        let out = match unsafe { out.as_mut() } {
            Some(o) => o,
            None => return Err(null_arg("out")),
        };
        let data = BoundaryData::constant(&g.0, value).map_err(fail)?;
        *out = Box::into_raw(Box::new(InfxBoundary(data)));
        Ok(())
    })
}

/// # Safety
/// `boundary` must come from a boundary constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn infx_boundary_free(boundary: *mut InfxBoundary) {
    if !boundary.is_null() {
        drop(unsafe { Box::from_raw(boundary) });
    }
}

/// Exhaustive Lipschitz constant over boundary node pairs.
#[no_mangle]
pub unsafe extern "C" fn infx_boundary_lipschitz(
    boundary: *const InfxBoundary,
    out: *mut f64,
) -> InfxStatus {
    let b = nonnull!(boundary);
    let out = nonnull_mut!(out);
    *out = b.0.lipschitz_constant();
    InfxStatus::Ok
}

// ---------------------------------------------------------------- exponent

#[no_mangle]
pub unsafe extern "C" fn infx_exponent_constant(
    grid: *const InfxGrid,
    p0: f64,
    out: *mut *mut InfxExponent,
) -> InfxStatus {
    guard(|| {
        let g = match unsafe { grid.as_ref() } {
            Some(g) => g,
            None => return Err(null_arg("grid")),
        };
        let out = match unsafe { out.as_mut() } {
            Some(o) => o,
            None => return Err(null_arg("out")),
        };
        let f = ExponentField::constant(g.0.clone(), p0).map_err(fail)?;
        *out = Box::into_raw(Box::new(InfxExponent(f)));
        Ok(())
    })
}

/// p(x) = p0 * exp(delta_x x + delta_y y); grad ln p is exactly the delta
/// vector.
#[no_mangle]
pub unsafe extern "C" fn infx_exponent_exponential(
    grid: *const InfxGrid,
    p0: f64,
    delta_x: f64,
    delta_y: f64,
    out: *mut *mut InfxExponent,
) -> InfxStatus {
    guard(|| {
        let g = match unsafe { grid.as_ref() } {
            Some(g) => g,
            None => return Err(null_arg("grid")),
        };
        let out = match unsafe { out.as_mut() } {
            Some(o) => o,
            None => return Err(null_arg("out")),
        };
        let f = ExponentField::exponential(g.0.clone(), p0, [delta_x, delta_y]).map_err(fail)?;
        *out = Box::into_raw(Box::new(InfxExponent(f)));
        Ok(())
    })
}

/// Tabulated exponent: `p` has one entry per node, `grad_ln_p` two entries
/// (x then y component) per node.
#[no_mangle]
pub unsafe extern "C" fn infx_exponent_tabulated(
    grid: *const InfxGrid,
    p: *const f64,
    grad_ln_p: *const f64,
    out: *mut *mut InfxExponent,
) -> InfxStatus {
    guard(|| {
        let g = match unsafe { grid.as_ref() } {
            Some(g) => g,
            None => return Err(null_arg("grid")),
        };
        if p.is_null() {
            return Err(null_arg("p"));
        }
        if grad_ln_p.is_null() {
            return Err(null_arg("grad_ln_p"));
        }
        let out = match unsafe { out.as_mut() } {
            Some(o) => o,
            None => return Err(null_arg("out")),
        };
        let n = g.0.node_count();
        let pv = unsafe { std::slice::from_raw_parts(p, n) }.to_vec();
        let gv = unsafe { std::slice::from_raw_parts(grad_ln_p, 2 * n) };
        let grads: Vec<[f64; 2]> = gv.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        let f = ExponentField::tabulated(g.0.clone(), pv, grads).map_err(fail)?;
        *out = Box::into_raw(Box::new(InfxExponent(f)));
        Ok(())
    })
}

/// # Safety
/// `exponent` must come from an exponent constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn infx_exponent_free(exponent: *mut InfxExponent) {
    if !exponent.is_null() {
        drop(unsafe { Box::from_raw(exponent) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn infx_exponent_sup_grad_ln_p(
    exponent: *const InfxExponent,
    out: *mut f64,
) -> InfxStatus {
    let e = nonnull!(exponent);
    let out = nonnull_mut!(out);
    *out = e.0.sup_norm_grad_ln_p();
    InfxStatus::Ok
}

// ---------------------------------------------------------------- solving

/// Recommended options for a grid/boundary pair: scale-free tolerance,
/// gradient floor = grid spacing, no relaxation, eps = 0.
#[no_mangle]
pub unsafe extern "C" fn infx_solve_options_default(
    grid: *const InfxGrid,
    boundary: *const InfxBoundary,
    out: *mut InfxSolveOptions,
) -> InfxStatus {
    let g = nonnull!(grid);
    let b = nonnull!(boundary);
    let out = nonnull_mut!(out);
    let cfg = SolveConfig::recommended(&g.0, &b.0);
    *out = InfxSolveOptions {
        epsilon: cfg.epsilon,
        tolerance: cfg.tolerance,
        max_iterations: cfg.max_iterations as u64,
        gradient_floor: cfg.gradient_floor,
        relaxation: cfg.relaxation,
    };
    InfxStatus::Ok
}

fn write_solution(
    result: solvers::SolveResult,
    grid: &Arc<Grid>,
    out_field: &mut *mut InfxField,
    out_stats: *mut InfxSolveStats,
) {
    debug_assert!(result.field.grid().as_ref() == grid.as_ref());
    if let Some(stats) = unsafe { out_stats.as_mut() } {
        *stats = InfxSolveStats {
            iterations: result.iterations as u64,
            final_residual: result.final_residual,
            converged: result.converged as u8,
        };
    }
    *out_field = Box::into_raw(Box::new(InfxField(result.field)));
}

/// Solves one Dirichlet problem. `exponent` may be null for the constant
/// case; `out_stats` may be null.
#[no_mangle]
pub unsafe extern "C" fn infx_solve(
    grid: *const InfxGrid,
    boundary: *const InfxBoundary,
    exponent: *const InfxExponent,
    kind: InfxSolveKind,
    options: *const InfxSolveOptions,
    out_field: *mut *mut InfxField,
    out_stats: *mut InfxSolveStats,
) -> InfxStatus {
    guard(|| {
        let g = match unsafe { grid.as_ref() } {
            Some(g) => g,
            None => return Err(null_arg("grid")),
        };
        let b = match unsafe { boundary.as_ref() } {
            Some(b) => b,
            None => return Err(null_arg("boundary")),
        };
        let opts = match unsafe { options.as_ref() } {
            Some(o) => o,
            None => return Err(null_arg("options")),
        };
        let out = match unsafe { out_field.as_mut() } {
            Some(o) => o,
            None => return Err(null_arg("out_field")),
        };
        let cfg: SolveConfig = (*opts).into();
        let p = unsafe { exponent.as_ref() }.map(|e| &e.0);
        let result = match (kind, p) {
            (InfxSolveKind::Unconstrained, None) => {
                solvers::solve_infinity_harmonic(&g.0, &b.0, &cfg)
            }
            (InfxSolveKind::Unconstrained, Some(p)) => {
                solvers::solve_infinity_x(&g.0, &b.0, p, &cfg)
            }
            (InfxSolveKind::Upper, None) => solvers::solve_upper(&g.0, &b.0, &cfg),
            (InfxSolveKind::Upper, Some(p)) => solvers::solve_upper_x(&g.0, &b.0, p, &cfg),
            (InfxSolveKind::Lower, None) => solvers::solve_lower(&g.0, &b.0, &cfg),
            (InfxSolveKind::Lower, Some(p)) => solvers::solve_lower_x(&g.0, &b.0, p, &cfg),
        }
        .map_err(fail)?;
        write_solution(result, &g.0, out, out_stats);
        Ok(())
    })
}

/// Solves lower, middle and upper in lockstep; the returned fields satisfy
/// lower <= middle <= upper at every node exactly. `out_stats` (nullable)
/// receives the middle solve's statistics.
#[no_mangle]
pub unsafe extern "C" fn infx_solve_sandwich(
    grid: *const InfxGrid,
    boundary: *const InfxBoundary,
    exponent: *const InfxExponent,
    options: *const InfxSolveOptions,
    out_lower: *mut *mut InfxField,
    out_middle: *mut *mut InfxField,
    out_upper: *mut *mut InfxField,
    out_stats: *mut InfxSolveStats,
) -> InfxStatus {
    guard(|| {
        let g = match unsafe { grid.as_ref() } {
            Some(g) => g,
            None => return Err(null_arg("grid")),
        };
        let b = match unsafe { boundary.as_ref() } {
            Some(b) => b,
            None => return Err(null_arg("boundary")),
        };
        let opts = match unsafe { options.as_ref() } {
            Some(o) => o,
            None => return Err(null_arg("options")),
        };
        let (ol, om, ou) = match (
            unsafe { out_lower.as_mut() },
            unsafe { out_middle.as_mut() },
            unsafe { out_upper.as_mut() },
        ) {
            (Some(a), Some(b2), Some(c)) => (a, b2, c),
            _ => return Err(null_arg("out field")),
        };
        let cfg: SolveConfig = (*opts).into();
        let p = unsafe { exponent.as_ref() }.map(|e| &e.0);
        let s = solvers::solve_sandwich(&g.0, &b.0, p, &cfg).map_err(fail)?;
        write_solution(s.middle, &g.0, om, out_stats);
        write_solution(s.lower, &g.0, ol, std::ptr::null_mut());
        write_solution(s.upper, &g.0, ou, std::ptr::null_mut());
        Ok(())
    })
}

// ---------------------------------------------------------------- fields

#[no_mangle]
pub unsafe extern "C" fn infx_field_len(field: *const InfxField, out: *mut u64) -> InfxStatus {
    let f = nonnull!(field);
    let out = nonnull_mut!(out);
    *out = f.0.values().len() as u64;
    InfxStatus::Ok
}

/// Copies all node values into `buffer`, which must hold `len` doubles
/// (= the grid node count).
#[no_mangle]
pub unsafe extern "C" fn infx_field_copy_values(
    field: *const InfxField,
    buffer: *mut f64,
    len: u64,
) -> InfxStatus {
    let f = nonnull!(field);
    if buffer.is_null() {
        return null_arg("buffer");
    }
    let values = f.0.values();
    if len as usize != values.len() {
        set_error(&format!(
            "buffer length {} does not match node count {}",
            len,
            values.len()
        ));
        return InfxStatus::InvalidArgument;
    }
    let out = unsafe { std::slice::from_raw_parts_mut(buffer, values.len()) };
    out.copy_from_slice(values);
    InfxStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn infx_field_value_at(
    field: *const InfxField,
    node: u64,
    out: *mut f64,
) -> InfxStatus {
    let f = nonnull!(field);
    let out = nonnull_mut!(out);
    if node as usize >= f.0.values().len() {
        set_error("node index out of range");
        return InfxStatus::InvalidArgument;
    }
    *out = f.0.value(node as usize);
    InfxStatus::Ok
}

/// Sup-norm distance between two fields on the same grid.
#[no_mangle]
pub unsafe extern "C" fn infx_field_sup_diff(
    a: *const InfxField,
    b: *const InfxField,
    out: *mut f64,
) -> InfxStatus {
    let fa = nonnull!(a);
    let fb = nonnull!(b);
    let out = nonnull_mut!(out);
    match fa.0.sup_diff(&fb.0) {
        Ok(v) => {
            *out = v;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Sup over interior nodes of the pointwise operator residual
/// |Delta_inf u + drift|, measuring how well a field solves the equation.
#[no_mangle]
pub unsafe extern "C" fn infx_field_operator_residual(
    field: *const InfxField,
    exponent: *const InfxExponent,
    out: *mut f64,
) -> InfxStatus {
    let f = nonnull!(field);
    let e = nonnull!(exponent);
    let out = nonnull_mut!(out);
    match infx::operators::sup_interior_residual(&f.0, &e.0) {
        Ok(v) => {
            *out = v;
            InfxStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// # Safety
/// `field` must come from a solve or transform call, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn infx_field_free(field: *mut InfxField) {
    if !field.is_null() {
        drop(unsafe { Box::from_raw(field) });
    }
}

// ---------------------------------------------------------------- transform

/// g(t) = ln(1 + A (exp(alpha t) - 1)) / alpha for t >= 0.
#[no_mangle]
pub unsafe extern "C" fn infx_g_eval(t: f64, a: f64, alpha: f64, out: *mut f64) -> InfxStatus {
    let out = nonnull_mut!(out);
    let prm = match TransformParams::new(a, alpha) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    match transform::g_eval(t, &prm) {
        Ok(v) => {
            *out = v;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn infx_g_derivatives(
    t: f64,
    a: f64,
    alpha: f64,
    out_first: *mut f64,
    out_second: *mut f64,
) -> InfxStatus {
    let o1 = nonnull_mut!(out_first);
    let o2 = nonnull_mut!(out_second);
    let prm = match TransformParams::new(a, alpha) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    match transform::g_derivatives(t, &prm) {
        Ok((g1, g2)) => {
            *o1 = g1;
            *o2 = g2;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Applies g nodewise to a nonnegative field.
#[no_mangle]
pub unsafe extern "C" fn infx_g_apply(
    field: *const InfxField,
    a: f64,
    alpha: f64,
    out: *mut *mut InfxField,
) -> InfxStatus {
    guard(|| {
        let f = match unsafe { field.as_ref() } {
            Some(f) => f,
            None => return Err(null_arg("field")),
        };
        let out = match unsafe { out.as_mut() } {
            Some(o) => o,
            None => return Err(null_arg("out")),
        };
        let prm = TransformParams::new(a, alpha).map_err(fail)?;
        let w = transform::g_apply(&f.0, &prm).map_err(fail)?;
        *out = Box::into_raw(Box::new(InfxField(w)));
        Ok(())
    })
}

/// Strict-supersolution margin mu = alpha (A-1) A^-1 exp(-alpha v_sup) eps^4.
#[no_mangle]
pub unsafe extern "C" fn infx_mu_strict(
    a: f64,
    alpha: f64,
    epsilon: f64,
    v_sup: f64,
    out: *mut f64,
) -> InfxStatus {
    let out = nonnull_mut!(out);
    let prm = match TransformParams::new(a, alpha) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    match transform::mu_strict(&prm, epsilon, v_sup) {
        Ok(v) => {
            *out = v;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// The normalized margin with alpha = 1 / v_sup:
/// mu = (A-1) eps^4 / (A e v_sup).
#[no_mangle]
pub unsafe extern "C" fn infx_mu_strict_normalized(
    a: f64,
    epsilon: f64,
    v_sup: f64,
    out: *mut f64,
) -> InfxStatus {
    let out = nonnull_mut!(out);
    match transform::mu_strict_normalized(a, epsilon, v_sup) {
        Ok(v) => {
            *out = v;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Two-exponent margin; also reports the implied alpha = (1 + grad) / eps.
#[no_mangle]
pub unsafe extern "C" fn infx_mu_strict_two_exponent(
    a: f64,
    epsilon: f64,
    v_sup: f64,
    grad_ln_p_sup: f64,
    out_mu: *mut f64,
    out_alpha: *mut f64,
) -> InfxStatus {
    let om = nonnull_mut!(out_mu);
    let oa = nonnull_mut!(out_alpha);
    match transform::mu_strict_two_exponent(a, epsilon, v_sup, grad_ln_p_sup) {
        Ok(m) => {
            *om = m.mu;
            *oa = m.alpha;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Checks max over interior nodes of the discrete infinity-Laplacian
/// against -mu + slack; writes the max and whether the check passed.
#[no_mangle]
pub unsafe extern "C" fn infx_strict_supersolution_check(
    field: *const InfxField,
    mu: f64,
    slack: f64,
    out_max: *mut f64,
    out_passed: *mut u8,
) -> InfxStatus {
    let f = nonnull!(field);
    let om = nonnull_mut!(out_max);
    let op = nonnull_mut!(out_passed);
    match transform::strict_supersolution_check(&f.0, mu, slack) {
        Ok(report) => {
            *om = report.max_interior_value;
            *op = report.passed as u8;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

// ---------------------------------------------------------------- bounds

/// Default bound constants (all 1, kappa 2).
#[no_mangle]
pub unsafe extern "C" fn infx_bound_params_default(out: *mut InfxBoundParams) -> InfxStatus {
    let out = nonnull_mut!(out);
    let d = estimates::BoundParams::default();
    *out = InfxBoundParams {
        c: d.c,
        a: d.a,
        f_sup: d.f_sup,
        f_lip: d.f_lip,
        kappa: d.kappa,
        b: d.b,
        scale: d.scale,
        two_exp_const: d.two_exp_const,
    };
    InfxStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn infx_doubling_bound(
    epsilon: f64,
    c: f64,
    u2plus_sup: f64,
    grad_ln_p_sup: f64,
    out: *mut f64,
) -> InfxStatus {
    let out = nonnull_mut!(out);
    match estimates::doubling_bound(epsilon, c, u2plus_sup, grad_ln_p_sup) {
        Ok(v) => {
            *out = v;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Near-optimal epsilon and its majorant for the one-exponent bound.
#[no_mangle]
pub unsafe extern "C" fn infx_choose_epsilon_one_exp(
    grad_ln_p_sup: f64,
    a: f64,
    c: f64,
    out_epsilon: *mut f64,
    out_majorant: *mut f64,
) -> InfxStatus {
    let oe = nonnull_mut!(out_epsilon);
    let om = nonnull_mut!(out_majorant);
    match estimates::choose_epsilon_one_exp(grad_ln_p_sup, a, c) {
        Ok((eps, maj)) => {
            *oe = eps;
            *om = maj;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn infx_one_exponent_bound(
    grad_ln_p_sup: f64,
    params: *const InfxBoundParams,
    out: *mut f64,
) -> InfxStatus {
    let p = nonnull!(params);
    let out = nonnull_mut!(out);
    match estimates::one_exponent_bound(grad_ln_p_sup, &(*p).into()) {
        Ok(v) => {
            *out = v;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn infx_two_exponent_bound(
    delta_grad: f64,
    params: *const InfxBoundParams,
    out: *mut f64,
) -> InfxStatus {
    let p = nonnull!(params);
    let out = nonnull_mut!(out);
    match estimates::two_exponent_bound(delta_grad, &(*p).into()) {
        Ok(v) => {
            *out = v;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Root of exp(K / eps) delta = eps^(kappa + 2) with
/// K = (1 + grad_ln_p2) v2_sup.
#[no_mangle]
pub unsafe extern "C" fn infx_choose_epsilon_two_exp(
    delta_grad: f64,
    grad_ln_p2_sup: f64,
    v2_sup: f64,
    kappa: f64,
    out: *mut f64,
) -> InfxStatus {
    let out = nonnull_mut!(out);
    match estimates::choose_epsilon_two_exp(delta_grad, grad_ln_p2_sup, v2_sup, kappa) {
        Ok(v) => {
            *out = v;
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Exhaustive doubling probe over all node pairs of the shared grid.
#[no_mangle]
pub unsafe extern "C" fn infx_doubling_probe(
    u1: *const InfxField,
    w2: *const InfxField,
    j: f64,
    out: *mut InfxDoublingResult,
) -> InfxStatus {
    let a = nonnull!(u1);
    let b = nonnull!(w2);
    let out = nonnull_mut!(out);
    match estimates::doubling_probe(&a.0, &b.0, j) {
        Ok(r) => {
            *out = InfxDoublingResult {
                j: r.j,
                m_j: r.m_j,
                sigma: r.sigma,
                x_index: r.x_index as u64,
                y_index: r.y_index as u64,
                x0: r.x[0],
                x1: r.x[1],
                y0: r.y[0],
                y1: r.y[1],
                distance: r.distance,
                j_dist: r.j_dist,
            };
            InfxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

// ---------------------------------------------------------------- oracle

/// Exact 1D solution via the first integral. `p` is evaluated through the
/// callback; `out_values` (nullable) must hold `n` doubles; `out_c` and
/// `out_sign` (nullable) receive the stream-line constant and the sign of
/// the derivative.
#[no_mangle]
pub unsafe extern "C" fn infx_oracle1d_solve(
    p: InfxExponentFn,
    user: *mut c_void,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    n: u64,
    quad_tol: f64,
    out_c: *mut f64,
    out_sign: *mut i32,
    out_values: *mut f64,
) -> InfxStatus {
    guard(|| {
        let sol = oracle1d::solve_first_integral(
            |x| p(x, user),
            a,
            b,
            fa,
            fb,
            n as usize,
            quad_tol,
        )
        .map_err(fail)?;
        if let Some(oc) = unsafe { out_c.as_mut() } {
            *oc = sol.c;
        }
        if let Some(os) = unsafe { out_sign.as_mut() } {
            *os = sol.sign as i32;
        }
        if !out_values.is_null() {
            let buf = unsafe { std::slice::from_raw_parts_mut(out_values, n as usize) };
            buf.copy_from_slice(&sol.values);
        }
        Ok(())
    })
}

/// Exact sup distance between the 1D solutions for two exponents with the
/// same boundary values.
#[no_mangle]
pub unsafe extern "C" fn infx_oracle1d_stability(
    p1: InfxExponentFn,
    user1: *mut c_void,
    p2: InfxExponentFn,
    user2: *mut c_void,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    samples: u64,
    quad_tol: f64,
    out: *mut f64,
) -> InfxStatus {
    guard(|| {
        let out = match unsafe { out.as_mut() } {
            Some(o) => o,
            None => return Err(null_arg("out")),
        };
        let d = oracle1d::stability_1d_exact(
            |x| p1(x, user1),
            |x| p2(x, user2),
            a,
            b,
            fa,
            fb,
            samples as usize,
            quad_tol,
        )
        .map_err(fail)?;
        *out = d;
        Ok(())
    })
}
