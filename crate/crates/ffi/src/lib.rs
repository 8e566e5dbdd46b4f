//! C ABI over `rbfkan` models.
//!
//! Models are opaque `RbfkanModel` handles. Every fallible call returns an
//! `RbfkanStatus`; on failure `rbfkan_last_error` describes the most recent
//! error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rbfkan::layers::{init_model, Architecture, Model, ModelSpec, Network};
use rbfkan::Error;

/// Opaque model handle.
pub struct RbfkanModel {
    model: Model,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbfkanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    Io = 4,
    Format = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbfkanArch {
    Mlp = 0,
    Kan = 1,
    RbfKan = 2,
    FreeRbfKan = 3,
}

impl From<RbfkanArch> for Architecture {
    fn from(a: RbfkanArch) -> Self {
        match a {
            RbfkanArch::Mlp => Architecture::Mlp,
            RbfkanArch::Kan => Architecture::Kan,
            RbfkanArch::RbfKan => Architecture::RbfKan,
            RbfkanArch::FreeRbfKan => Architecture::FreeRbfKan,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn status_of(err: &Error) -> RbfkanStatus {
    match err {
        Error::Shape(_) | Error::Axis { .. } => RbfkanStatus::ShapeMismatch,
        Error::Io(_) | Error::MissingData(_) => RbfkanStatus::Io,
        Error::Json(_) | Error::Format(_) => RbfkanStatus::Format,
        Error::NonFinite(_) | Error::Numerical(_) => RbfkanStatus::Numerical,
        _ => RbfkanStatus::InvalidArgument,
    }
}

fn fail(status: RbfkanStatus, msg: impl Into<String>) -> RbfkanStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> RbfkanStatus) -> RbfkanStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(RbfkanStatus::Panic, "internal panic"),
    }
}

fn from_result(r: rbfkan::Result<()>) -> RbfkanStatus {
    match r {
        Ok(()) => RbfkanStatus::Ok,
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// # Safety
/// `path` must be null or a valid NUL-terminated string.
unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, RbfkanStatus> {
    if path.is_null() {
        return Err(fail(RbfkanStatus::NullPointer, "path is null"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(RbfkanStatus::InvalidArgument, "path is not UTF-8"))
}

/// Creates a freshly initialized model. `widths` holds `n_widths` node
/// counts; `grid_size` is ignored for MLPs; `domain_lo < domain_hi` is the
/// first-layer grid range.
///
/// # Safety
/// `widths` must point to `n_widths` readable values and `out` must be a
/// valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn rbfkan_model_create(
    arch: RbfkanArch,
    widths: *const usize,
    n_widths: usize,
    grid_size: usize,
    domain_lo: f64,
    domain_hi: f64,
    seed: u64,
    out: *mut *mut RbfkanModel,
) -> RbfkanStatus {
    guard(|| {
        if widths.is_null() || out.is_null() {
            return fail(RbfkanStatus::NullPointer, "widths or out is null");
        }
        let w = std::slice::from_raw_parts(widths, n_widths);
        let arch = Architecture::from(arch);
        let mut spec = ModelSpec::new(arch, w).domain(domain_lo, domain_hi);
        if arch.is_kan() {
            spec = spec.grid(grid_size);
        }
        match init_model(&spec, seed) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(RbfkanModel { model }));
                RbfkanStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Loads a JSON checkpoint.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rbfkan_model_load(path: *const c_char, out: *mut *mut RbfkanModel) -> RbfkanStatus {
    guard(|| {
        if out.is_null() {
            return fail(RbfkanStatus::NullPointer, "out is null");
        }
        let p = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Model::load(p) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(RbfkanModel { model }));
                RbfkanStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Writes a JSON checkpoint.
///
/// # Safety
/// `model` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rbfkan_model_save(model: *const RbfkanModel, path: *const c_char) -> RbfkanStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return fail(RbfkanStatus::NullPointer, "model is null");
        };
        match path_arg(path) {
            Ok(p) => from_result(m.model.save(p)),
            Err(s) => s,
        }
    })
}

/// Evaluates the model at one input point.
///
/// # Safety
/// `x` must hold `n_x` values and `y` must have room for `n_y` values.
#[no_mangle]
pub unsafe extern "C" fn rbfkan_model_forward(
    model: *const RbfkanModel,
    x: *const f64,
    n_x: usize,
    y: *mut f64,
    n_y: usize,
) -> RbfkanStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return fail(RbfkanStatus::NullPointer, "model is null");
        };
        if x.is_null() || y.is_null() {
            return fail(RbfkanStatus::NullPointer, "input or output buffer is null");
        }
        if n_y != m.model.n_outputs() {
            return fail(
                RbfkanStatus::ShapeMismatch,
                format!("output buffer holds {n_y} values, model has {} outputs", m.model.n_outputs()),
            );
        }
        let input = std::slice::from_raw_parts(x, n_x);
        match m.model.try_predict(input) {
            Ok(v) => {
                std::slice::from_raw_parts_mut(y, n_y).copy_from_slice(&v);
                RbfkanStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Number of trainable parameters, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rbfkan_model_param_count(model: *const RbfkanModel) -> usize {
    model.as_ref().map_or(0, |m| rbfkan::layers::count_parameters(&m.model))
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rbfkan_model_n_inputs(model: *const RbfkanModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.n_inputs())
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rbfkan_model_n_outputs(model: *const RbfkanModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.n_outputs())
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rbfkan_model_free(model: *mut RbfkanModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rbfkan_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
