//! C ABI over `qtsolve`.
//!
//! Quaternion arrays are flat `double` buffers holding four components per
//! entry in the order `(a0, a1, a2, a3)` for `a0 + a1 p + a2 q + a3 r`, so a
//! length-`n` vector occupies `4 n` doubles. Handles are opaque and owned by the
//! caller until passed to the matching `_free`. Every fallible call returns a
//! [`QtStatus`]; on failure [`qt_last_error`] gives a message for the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use qtsolve::pcg::Identity;
use qtsolve::{
    CirculantPreconditioner, Error, HermitianToeplitz, PcgError, Quaternion, SolveConfig,
    SolveReport, StopRule, SymbolModel,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidModel = 3,
    /// The circulant preconditioner has a singular eigen-block.
    Singular = 4,
    /// The iteration cap was hit; outputs hold the last iterate.
    NotConverged = 5,
    Breakdown = 6,
    Numerical = 7,
    Panic = 8,
}

/// Values accepted by the `model` argument of [`qt_toeplitz_from_model`].
#[repr(C)]
pub enum QtModel {
    Ar1 = 0,
    Ma1 = 1,
}

/// Values accepted by [`QtSolveOptions::stop`].
#[repr(C)]
pub enum QtStop {
    /// `|r_k| <= tol |r_0|`
    Relative = 0,
    /// `|r_k| <= tol`
    Absolute = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QtSolveOptions {
    pub tol: f64,
    /// A [`QtStop`] value.
    pub stop: i32,
    /// 0 means `10 n`.
    pub max_iter: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QtSolveResult {
    pub iterations: usize,
    /// `|b - T x|` for the returned `x`.
    pub final_error: f64,
    pub converged: bool,
    pub time_ms: f64,
}

/// Hermitian quaternion Toeplitz matrix.
pub struct QtToeplitz(HermitianToeplitz);

/// Factored circulant preconditioner, ready for repeated inverse applications.
pub struct QtStrang(CirculantPreconditioner);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: QtStatus, msg: impl Into<String>) -> QtStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> QtStatus {
    match e {
        Error::Dimension(_)
        | Error::Domain(_)
        | Error::DenseCapExceeded { .. }
        | Error::Parse(_) => QtStatus::InvalidArgument,
        Error::InvalidModel(_) => QtStatus::InvalidModel,
        Error::SingularBlock { .. } | Error::NotPositiveDefinite(_) => QtStatus::Singular,
        Error::Solve(p) => pcg_status(p),
        _ => QtStatus::Numerical,
    }
}

fn pcg_status(e: &PcgError) -> QtStatus {
    match e {
        PcgError::Dimension { .. } => QtStatus::InvalidArgument,
        PcgError::NonRealScalar { .. } | PcgError::Breakdown { .. } => QtStatus::Breakdown,
        PcgError::MaxIterations(_) => QtStatus::NotConverged,
    }
}

fn check(e: Error) -> QtStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, turning a panic into [`QtStatus::Panic`].
fn guard(f: impl FnOnce() -> QtStatus) -> QtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == QtStatus::Ok {
                set_error("");
            }
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(QtStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn read_quats(p: *const f64, n: usize) -> Vec<Quaternion> {
    slice::from_raw_parts(p, 4 * n)
        .chunks_exact(4)
        .map(|c| Quaternion::new(c[0], c[1], c[2], c[3]))
        .collect()
}

unsafe fn write_quats(p: *mut f64, v: &[Quaternion]) {
    let out = slice::from_raw_parts_mut(p, 4 * v.len());
    for (dst, q) in out.chunks_exact_mut(4).zip(v) {
        dst.copy_from_slice(&q.to_array());
    }
}

unsafe fn give<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

macro_rules! nonnull {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(QtStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// NUL-terminated when `len > 0`) and returns its full length in bytes, not
/// counting the terminator. Empty after a successful call.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn qt_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let k = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, k);
            *buf.add(k) = 0;
        }
        bytes.len()
    })
}

#[no_mangle]
pub extern "C" fn qt_solve_options_default() -> QtSolveOptions {
    QtSolveOptions {
        tol: 1e-7,
        stop: QtStop::Relative as i32,
        max_iter: 0,
    }
}

/// Builds `T` from its first column `col` (`n` quaternions, `col[0]` real).
///
/// # Safety
/// `col` must hold `4 n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_toeplitz_from_column(
    col: *const f64,
    n: usize,
    out: *mut *mut QtToeplitz,
) -> QtStatus {
    nonnull!(col, out);
    guard(|| match HermitianToeplitz::new(read_quats(col, n)) {
        Ok(t) => {
            give(out, QtToeplitz(t));
            QtStatus::Ok
        }
        Err(e) => check(e),
    })
}

/// Builds the `n x n` Toeplitz matrix generated by the symbol of a first-order
/// autoregressive (`QtModel::Ar1`) or moving-average (`QtModel::Ma1`)
/// quaternion process with coefficient `beta` (4 doubles) and noise scale
/// `delta`.
///
/// # Safety
/// `beta` must hold 4 doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_toeplitz_from_model(
    model: i32,
    beta: *const f64,
    delta: f64,
    n: usize,
    out: *mut *mut QtToeplitz,
) -> QtStatus {
    nonnull!(beta, out);
    guard(|| {
        let b = read_quats(beta, 1)[0];
        let m = match model {
            0 => SymbolModel::ar1(b, delta),
            1 => Ok(SymbolModel::ma1(b, delta)),
            _ => return fail(QtStatus::InvalidArgument, format!("unknown model {model}")),
        };
        match m.and_then(|m| HermitianToeplitz::from_symbol(&m, n)) {
            Ok(t) => {
                give(out, QtToeplitz(t));
                QtStatus::Ok
            }
            Err(e) => check(e),
        }
    })
}

/// # Safety
/// `t` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qt_toeplitz_free(t: *mut QtToeplitz) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Order of `t`, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qt_toeplitz_size(t: *const QtToeplitz) -> usize {
    t.as_ref().map_or(0, |t| t.0.size())
}

/// `y = T x` via FFTs. `x` and `y` hold `4 n` doubles each.
///
/// # Safety
/// `t` must be a live handle; `x` and `y` must be valid for `4 n` doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_toeplitz_matvec(
    t: *const QtToeplitz,
    x: *const f64,
    y: *mut f64,
) -> QtStatus {
    nonnull!(t, x, y);
    let t = &(*t).0;
    guard(|| match t.matvec(&read_quats(x, t.size())) {
        Ok(v) => {
            write_quats(y, &v);
            QtStatus::Ok
        }
        Err(e) => check(e),
    })
}

/// Ascending eigenvalues of `T` (`n` doubles, one per conjugate pair) from a
/// dense eigensolve. Fails with `InvalidArgument` above the dense size cap.
///
/// # Safety
/// `t` must be a live handle; `out` must be valid for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_toeplitz_spectrum(t: *const QtToeplitz, out: *mut f64) -> QtStatus {
    nonnull!(t, out);
    let t = &(*t).0;
    guard(|| {
        match t
            .densify()
            .and_then(|a| qtsolve::spectra::dense_spectrum(&a))
        {
            Ok(rep) => {
                slice::from_raw_parts_mut(out, rep.eigenvalues.len())
                    .copy_from_slice(&rep.eigenvalues);
                QtStatus::Ok
            }
            Err(e) => check(e),
        }
    })
}

/// Factors the Strang circulant preconditioner of `t`. Fails with
/// `Singular` when an eigen-block is singular.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qt_strang_new(t: *const QtToeplitz, out: *mut *mut QtStrang) -> QtStatus {
    nonnull!(t, out);
    guard(|| match CirculantPreconditioner::strang(&(*t).0) {
        Ok(p) => {
            give(out, QtStrang(p));
            QtStatus::Ok
        }
        Err(e) => check(e),
    })
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qt_strang_free(p: *mut QtStrang) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `z = C^{-1} r`.
///
/// # Safety
/// `p` must be a live handle; `r` and `z` must be valid for `4 n` doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_strang_apply_inverse(
    p: *const QtStrang,
    r: *const f64,
    z: *mut f64,
) -> QtStatus {
    nonnull!(p, r, z);
    let p = &(*p).0;
    guard(
        || match p.factor().solve_apply(&read_quats(r, p.factor().size())) {
            Ok(v) => {
                write_quats(z, &v);
                QtStatus::Ok
            }
            Err(e) => check(e),
        },
    )
}

/// Ascending eigenvalues of the circulant (`n` doubles) from its 2x2 blocks.
///
/// # Safety
/// `p` must be a live handle; `out` must be valid for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_strang_spectrum(p: *const QtStrang, out: *mut f64) -> QtStatus {
    nonnull!(p, out);
    guard(|| match (*p).0.factor().spectrum() {
        Ok(eig) => {
            slice::from_raw_parts_mut(out, eig.len()).copy_from_slice(&eig);
            QtStatus::Ok
        }
        Err(e) => check(e),
    })
}

fn config(opts: Option<&QtSolveOptions>) -> Result<SolveConfig, QtStatus> {
    let o = opts.copied().unwrap_or_else(|| qt_solve_options_default());
    let stop = match o.stop {
        0 => StopRule::Relative,
        1 => StopRule::Absolute,
        s => {
            return Err(fail(
                QtStatus::InvalidArgument,
                format!("unknown stopping rule {s}"),
            ))
        }
    };
    if !(o.tol.is_finite() && o.tol > 0.0) {
        return Err(fail(
            QtStatus::InvalidArgument,
            format!("tolerance must be positive, got {}", o.tol),
        ));
    }
    Ok(SolveConfig {
        tol_rel: o.tol,
        stop,
        max_iter: (o.max_iter > 0).then_some(o.max_iter),
        record_history: false,
        assume_hpd: true,
    })
}

fn fill(result: *mut QtSolveResult, rep: &SolveReport) {
    if let Some(r) = unsafe { result.as_mut() } {
        *r = QtSolveResult {
            iterations: rep.iterations,
            final_error: rep.final_error,
            converged: rep.converged,
            time_ms: rep.wall_time.as_secs_f64() * 1e3,
        };
    }
}

/// Solves `T x = b` by conjugate gradients from a zero start, preconditioned by
/// `precond` when it is non-null. `opts` and `result` may be null. On
/// `NotConverged`, `x` and `result` describe the last iterate.
///
/// # Safety
/// Handles must be live and of matching order; `b` and `x` must be valid for
/// `4 n` doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_solve(
    t: *const QtToeplitz,
    precond: *const QtStrang,
    b: *const f64,
    opts: *const QtSolveOptions,
    x: *mut f64,
    result: *mut QtSolveResult,
) -> QtStatus {
    nonnull!(t, b, x);
    let t = &(*t).0;
    let cfg = match config(opts.as_ref()) {
        Ok(c) => c,
        Err(s) => return s,
    };
    guard(|| {
        let rhs = read_quats(b, t.size());
        let out = match precond.as_ref() {
            Some(p) => qtsolve::pcg_solve(t, &p.0, &rhs, &cfg),
            None => qtsolve::pcg_solve(t, &Identity(t.size()), &rhs, &cfg),
        };
        match out {
            Ok((sol, rep)) => {
                write_quats(x, &sol);
                fill(result, &rep);
                QtStatus::Ok
            }
            Err(PcgError::MaxIterations(p)) => {
                write_quats(x, &p.x);
                fill(result, &p.report);
                fail(
                    QtStatus::NotConverged,
                    PcgError::MaxIterations(p).to_string(),
                )
            }
            Err(e) => fail(pcg_status(&e), e.to_string()),
        }
    })
}
