//! C ABI over the pure parts of `nlslab`: geometry, fields, evolution, I-energies, the resonance
//! classifier, the census and the budget arithmetic.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns an [`NlsStatus`]; the message of the last failure on the calling
//! thread is available from [`nlslab_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nlslab::dynamics::{evolve_from, EvolutionConfig, InitialData, Integrator};
use nlslab::energies::{EnergyEvaluator, Sign};
use nlslab::resonance::{classify6, resonance_census, SymbolParams, Thresholds};
use nlslab::smoothing::{gwp_budget, BudgetOptions};
use nlslab::spectral::{SpectralField, TorusGeometry};
use nlslab::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BudgetExceeded = 3,
    Consistency = 4,
    NonFinite = 5,
    Unsupported = 6,
    Quadrature = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// Opaque torus geometry.
pub struct NlsGeometry(TorusGeometry);

/// Opaque truncated spectral field.
pub struct NlsField(SpectralField);

/// Opaque I-energy evaluator bound to one lattice and one smoothing symbol.
pub struct NlsEvaluator(EnergyEvaluator);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NlsEnergyReport {
    pub mass: f64,
    pub energy: f64,
    pub e_i1: f64,
    pub correction: f64,
    pub e_i2: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NlsBudget {
    pub lambda_exponent: f64,
    pub lambda: f64,
    pub per_step_time: f64,
    pub step_count: f64,
    pub total_existence_exponent: f64,
    pub total_time: f64,
    pub zero_crossing: f64,
    pub global: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NlsCensusSummary {
    pub total: u64,
    pub expected_total: u64,
    pub violations: u64,
    pub nonresonant_constant: f64,
    pub passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NlsStatus {
    match e {
        Error::Invalid { .. } | Error::GridTooSmall { .. } | Error::Config(_) => NlsStatus::InvalidArgument,
        Error::Budget { .. } => NlsStatus::BudgetExceeded,
        Error::Classification { .. } | Error::Consistency(_) => NlsStatus::Consistency,
        Error::NonFinite { .. } => NlsStatus::NonFinite,
        Error::Unsupported(_) => NlsStatus::Unsupported,
        Error::Quadrature(_) => NlsStatus::Quadrature,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => NlsStatus::Internal,
    }
}

/// Run `f`, mapping library errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), NlsStatus>) -> NlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside nlslab".into());
            NlsStatus::Internal
        }
    }
}

fn lib<T>(r: nlslab::Result<T>) -> Result<T, NlsStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

fn null(what: &str) -> NlsStatus {
    set_error(format!("{what} is null"));
    NlsStatus::NullPointer
}

fn bad(msg: impl Into<String>) -> NlsStatus {
    set_error(msg.into());
    NlsStatus::InvalidArgument
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, NlsStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, NlsStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

fn sign_of(defocusing: bool) -> Sign {
    if defocusing {
        Sign::Defocusing
    } else {
        Sign::Focusing
    }
}

/// Message of the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn nlslab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `dim` is 1 or 2; `gamma` points to `dim − 1` aspect ratios (may be null in 1d).
///
/// # Safety
/// `gamma` must point to `dim − 1` readable values when `dim == 2`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlslab_geometry_new(
    dim: usize,
    gamma: *const f64,
    lambda: f64,
    out_geom: *mut *mut NlsGeometry,
) -> NlsStatus {
    guard(|| {
        let slot = out(out_geom, "out_geom")?;
        let g: &[f64] = if dim == 2 {
            std::slice::from_raw_parts(deref(gamma, "gamma")?, 1)
        } else {
            &[]
        };
        let geom = lib(TorusGeometry::new(dim, g, lambda))?;
        *slot = Box::into_raw(Box::new(NlsGeometry(geom)));
        Ok(())
    })
}

/// # Safety
/// `geom` must come from [`nlslab_geometry_new`] and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nlslab_geometry_free(geom: *mut NlsGeometry) {
    if !geom.is_null() {
        drop(Box::from_raw(geom));
    }
}

/// Number of coefficients of a field with this cutoff: `(2K+1)^dim`.
///
/// # Safety
/// `geom` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlslab_field_len(geom: *const NlsGeometry, cutoff: usize) -> usize {
    match geom.as_ref() {
        Some(g) => (2 * cutoff + 1).pow(g.0.dim() as u32),
        None => 0,
    }
}

/// Field from `len` coefficients (real and imaginary parts) in row-major mode order with offset
/// `K` on each axis.
///
/// # Safety
/// `re` and `im` must point to `len` readable values; `out_field` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlslab_field_new(
    geom: *const NlsGeometry,
    cutoff: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    out_field: *mut *mut NlsField,
) -> NlsStatus {
    guard(|| {
        let g = deref(geom, "geom")?;
        let slot = out(out_field, "out_field")?;
        let re = std::slice::from_raw_parts(deref(re, "re")?, len);
        let im = std::slice::from_raw_parts(deref(im, "im")?, len);
        let coef = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let f = lib(SpectralField::from_coefficients(&g.0, cutoff, coef))?;
        *slot = Box::into_raw(Box::new(NlsField(f)));
        Ok(())
    })
}

/// Copy the coefficients into caller buffers of length `len`.
///
/// # Safety
/// `re` and `im` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn nlslab_field_coefficients(
    field: *const NlsField,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> NlsStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let c = f.0.coefficients();
        if len < c.len() {
            set_error(format!("buffer holds {len} values, field has {}", c.len()));
            return Err(NlsStatus::BufferTooSmall);
        }
        let re = std::slice::from_raw_parts_mut(out(re, "re")?, c.len());
        let im = std::slice::from_raw_parts_mut(out(im, "im")?, c.len());
        for (i, z) in c.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `field` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nlslab_field_free(field: *mut NlsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Evolve to `t_end` with step `dt`. `integrator`: 0 strang, 1 strang-phase, 2 rk4-galerkin.
///
/// # Safety
/// `field` must be a live handle and `out_field` writable.
#[no_mangle]
pub unsafe extern "C" fn nlslab_field_evolve(
    field: *const NlsField,
    integrator: u32,
    defocusing: bool,
    dt: f64,
    t_end: f64,
    out_field: *mut *mut NlsField,
) -> NlsStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let slot = out(out_field, "out_field")?;
        let integrator = match integrator {
            0 => Integrator::Strang,
            1 => Integrator::StrangPhase,
            2 => Integrator::Rk4Galerkin,
            other => return Err(bad(format!("integrator {other} is not 0, 1 or 2"))),
        };
        let cfg = EvolutionConfig {
            geometry: f.0.geometry().clone(),
            cutoff: f.0.cutoff(),
            initial: InitialData::Modes { modes: Vec::new() },
            sign: sign_of(defocusing),
            integrator,
            dt,
            t_end,
            sample_stride: usize::MAX,
            nonlinear: true,
        };
        let traj = lib(evolve_from(f.0.clone(), &cfg))?;
        *slot = Box::into_raw(Box::new(NlsField(traj.last().clone())));
        Ok(())
    })
}

/// Evaluator for fields on the lattice of `field` with threshold `n`, regularity `s` and gap `gap`.
///
/// # Safety
/// `field` must be a live handle and `out_eval` writable.
#[no_mangle]
pub unsafe extern "C" fn nlslab_evaluator_new(
    field: *const NlsField,
    n: f64,
    s: f64,
    gap: f64,
    defocusing: bool,
    out_eval: *mut *mut NlsEvaluator,
) -> NlsStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let slot = out(out_eval, "out_eval")?;
        let params = lib(SymbolParams::new(f.0.dim(), n, s, gap))?;
        let ev = lib(EnergyEvaluator::new(&f.0, &params, sign_of(defocusing)))?;
        *slot = Box::into_raw(Box::new(NlsEvaluator(ev)));
        Ok(())
    })
}

/// # Safety
/// `eval` must come from [`nlslab_evaluator_new`] and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nlslab_evaluator_free(eval: *mut NlsEvaluator) {
    if !eval.is_null() {
        drop(Box::from_raw(eval));
    }
}

/// Mass, energy and both I-energies of `field`.
///
/// # Safety
/// Both handles must be live and `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn nlslab_energy_report(
    eval: *const NlsEvaluator,
    field: *const NlsField,
    out_report: *mut NlsEnergyReport,
) -> NlsStatus {
    guard(|| {
        let ev = deref(eval, "eval")?;
        let f = deref(field, "field")?;
        let slot = out(out_report, "out_report")?;
        let r = lib(ev.0.report(0.0, &f.0, 2))?;
        *slot = NlsEnergyReport {
            mass: r.mass,
            energy: r.energy,
            e_i1: r.e_i1,
            correction: r.correction,
            e_i2: r.e_i2,
        };
        Ok(())
    })
}

/// Classify a 1d sextuple (physical frequencies) and write its NUL-terminated verdict label.
///
/// # Safety
/// `k` must point to 6 values and `label` to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn nlslab_classify6(
    k: *const f64,
    n: f64,
    gap: f64,
    label: *mut c_char,
    capacity: usize,
) -> NlsStatus {
    guard(|| {
        let k = std::slice::from_raw_parts(deref(k, "k")?, 6);
        let buf = out(label, "label")?;
        let th = lib(Thresholds::new(gap))?;
        let x: [f64; 6] = std::array::from_fn(|i| k[i]);
        if x.iter().any(|v| !v.is_finite()) || !(n > 0.0) {
            return Err(bad("frequencies must be finite and N positive"));
        }
        let text = classify6(x, n, &th).verdict.label();
        if capacity < text.len() + 1 {
            set_error(format!("label needs {} bytes", text.len() + 1));
            return Err(NlsStatus::BufferTooSmall);
        }
        let dst = std::slice::from_raw_parts_mut(buf as *mut c_char as *mut u8, text.len() + 1);
        dst[..text.len()].copy_from_slice(text.as_bytes());
        dst[text.len()] = 0;
        Ok(())
    })
}

/// Exhaustive census of `Γ_6 ∩ [−kmax, kmax]^6` (1d) or `Γ_4` (2d) on `geom`.
///
/// # Safety
/// `geom` must be live and `out_summary` writable.
#[no_mangle]
pub unsafe extern "C" fn nlslab_census(
    geom: *const NlsGeometry,
    kmax: i64,
    n: f64,
    s: f64,
    gap: f64,
    out_summary: *mut NlsCensusSummary,
) -> NlsStatus {
    guard(|| {
        let g = deref(geom, "geom")?;
        let slot = out(out_summary, "out_summary")?;
        let params = lib(SymbolParams::new(g.0.dim(), n, s, gap))?;
        let r = lib(resonance_census(&g.0, kmax, &params))?;
        *slot = NlsCensusSummary {
            total: r.total,
            expected_total: r.expected_total,
            violations: r.violation_count,
            nonresonant_constant: r.nonresonant_constant,
            passed: r.passed(),
        };
        Ok(())
    })
}

/// Scaling plan of the global iteration in dimension `d` at regularity `s` and threshold `n`.
///
/// # Safety
/// `out_budget` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlslab_gwp_budget(
    d: usize,
    s: f64,
    n: f64,
    epsilon: f64,
    delta: f64,
    slack: f64,
    out_budget: *mut NlsBudget,
) -> NlsStatus {
    guard(|| {
        let slot = out(out_budget, "out_budget")?;
        let p = lib(gwp_budget(d, s, n, BudgetOptions { epsilon, delta, slack }))?;
        *slot = NlsBudget {
            lambda_exponent: p.lambda_exponent,
            lambda: p.lambda,
            per_step_time: p.per_step_time,
            step_count: p.step_count,
            total_existence_exponent: p.total_existence_exponent,
            total_time: p.total_time,
            zero_crossing: p.zero_crossing,
            global: p.global,
        };
        Ok(())
    })
}
