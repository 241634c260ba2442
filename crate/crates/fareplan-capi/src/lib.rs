//! C ABI for the fareplan toolkit.
//!
//! Instances and zone design results are opaque handles; every fallible
//! call returns a [`FareplanStatus`] and writes its result through out
//! pointers. On any failure a thread-local message is kept and can be
//! read back with [`fareplan_last_error_message`]. The header is
//! generated into `include/fareplan.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fareplan::io::{self, Instance};
use fareplan::milp::{build_milp, write_lp_file};
use fareplan::{
    affine_design, flat_design, solve_exact, CountingMode, DesignConfig, DesignResult, DistanceMetric,
    DistancePoint, Error, MedianPick,
};

/// Result code of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FareplanStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A document could not be parsed or failed validation.
    Parse = 3,
    /// Inputs violate a precondition.
    InvalidInput = 4,
    /// The LP subsolver reported an infeasible program.
    Infeasible = 5,
    /// The LP subsolver reported an unbounded program.
    Unbounded = 6,
    /// An internal invariant failed.
    Internal = 7,
}

/// Which journey length an affine tariff prices.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FareplanMetric {
    Network = 0,
    Beeline = 1,
}

/// How traversed zones are counted.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FareplanCounting {
    Multiple = 0,
    Single = 1,
}

/// Which weighted median to report when the optimum is an interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FareplanMedian {
    Lower = 0,
    Upper = 1,
}

/// Zone tariff design problem configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FareplanZoneConfig {
    pub counting: FareplanCounting,
    /// Require every zone to induce a connected subgraph.
    pub connected: bool,
    /// Upper bound on the number of zones.
    pub max_zones: usize,
    /// Require monotonically increasing prices.
    pub no_elongation: bool,
    /// Require the no-stopover price condition.
    pub no_stopover: bool,
}

/// A parsed and validated instance. Opaque.
pub struct FareplanInstance {
    instance: Instance,
    station_names: Vec<CString>,
}

/// An optimal zone tariff. Opaque.
pub struct FareplanZoneResult {
    result: DesignResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = sanitized);
}

fn status_of(err: &Error) -> FareplanStatus {
    match err {
        Error::InvalidInput(_) => FareplanStatus::InvalidInput,
        Error::Schema { .. } | Error::Parse(_) => FareplanStatus::Parse,
        Error::Infeasible => FareplanStatus::Infeasible,
        Error::Unbounded => FareplanStatus::Unbounded,
        Error::Io(_) => FareplanStatus::InvalidInput,
    }
}

/// Runs `f` with panics contained, mapping results onto statuses.
fn guarded(f: impl FnOnce() -> Result<FareplanStatus, Error>) -> FareplanStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(err)) => {
            set_error(&err.to_string());
            status_of(&err)
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in fareplan".to_string());
            set_error(&message);
            FareplanStatus::Internal
        }
    }
}

macro_rules! require_nonnull {
    ($ptr:expr) => {
        if $ptr.is_null() {
            set_error(concat!("null argument: ", stringify!($ptr)));
            return FareplanStatus::NullArgument;
        }
    };
}

/// Message describing the most recent failure on this thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fareplan_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses an instance document (see the project README for the schema).
/// On success writes a handle that must be released with
/// [`fareplan_instance_free`].
///
/// # Safety
/// `text` must point to a NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn fareplan_instance_parse(
    text: *const c_char,
    out: *mut *mut FareplanInstance,
) -> FareplanStatus {
    require_nonnull!(text);
    require_nonnull!(out);
    guarded(|| {
        let text = CStr::from_ptr(text).to_str().map_err(|_| {
            Error::InvalidInput("instance text is not valid UTF-8".into())
        });
        let text = match text {
            Ok(t) => t,
            Err(e) => {
                set_error(&e.to_string());
                return Ok(FareplanStatus::InvalidUtf8);
            }
        };
        let instance = io::load_instance(text)?;
        let station_names = instance
            .ptn
            .station_names()
            .iter()
            .map(|n| CString::new(n.as_str()).unwrap_or_default())
            .collect();
        *out = Box::into_raw(Box::new(FareplanInstance { instance, station_names }));
        Ok(FareplanStatus::Ok)
    })
}

/// Releases an instance handle. Null is a no-op.
///
/// # Safety
/// `instance` must come from [`fareplan_instance_parse`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn fareplan_instance_free(instance: *mut FareplanInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of stations.
///
/// # Safety
/// `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_instance_station_count(instance: *const FareplanInstance) -> usize {
    if instance.is_null() {
        return 0;
    }
    (*instance).instance.ptn.station_count()
}

/// Number of OD pairs.
///
/// # Safety
/// `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_instance_od_count(instance: *const FareplanInstance) -> usize {
    if instance.is_null() {
        return 0;
    }
    (*instance).instance.demand.len()
}

/// Name of the station at `index` in canonical order, or null when out
/// of range. The pointer stays valid while the instance lives.
///
/// # Safety
/// `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_instance_station_name(
    instance: *const FareplanInstance,
    index: usize,
) -> *const c_char {
    if instance.is_null() {
        return ptr::null();
    }
    let names = &(*instance).station_names;
    match names.get(index) {
        Some(name) => name.as_ptr(),
        None => ptr::null(),
    }
}

/// Optimal flat tariff: the picked weighted median of the reference
/// prices and the deviation objective.
///
/// # Safety
/// All pointers must be valid; `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_flat_design(
    instance: *const FareplanInstance,
    median: FareplanMedian,
    out_price: *mut f64,
    out_objective: *mut f64,
) -> FareplanStatus {
    require_nonnull!(instance);
    require_nonnull!(out_price);
    require_nonnull!(out_objective);
    guarded(|| {
        let pick = match median {
            FareplanMedian::Lower => MedianPick::Lower,
            FareplanMedian::Upper => MedianPick::Upper,
        };
        let solution = flat_design(&(*instance).instance.demand, pick)?;
        *out_price = solution.price;
        *out_objective = solution.objective;
        Ok(FareplanStatus::Ok)
    })
}

/// Optimal affine distance tariff over the chosen metric.
///
/// # Safety
/// All pointers must be valid; `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_affine_design(
    instance: *const FareplanInstance,
    metric: FareplanMetric,
    out_rate: *mut f64,
    out_base: *mut f64,
    out_objective: *mut f64,
) -> FareplanStatus {
    require_nonnull!(instance);
    require_nonnull!(out_rate);
    require_nonnull!(out_base);
    require_nonnull!(out_objective);
    guarded(|| {
        let metric = match metric {
            FareplanMetric::Network => DistanceMetric::Network,
            FareplanMetric::Beeline => DistanceMetric::Beeline,
        };
        let inst = &(*instance).instance;
        let points = DistancePoint::from_demand(&inst.ptn, &inst.demand, metric)?;
        let solution = affine_design(&points)?;
        *out_rate = solution.rate;
        *out_base = solution.base;
        *out_objective = solution.objective;
        Ok(FareplanStatus::Ok)
    })
}

fn design_config(config: &FareplanZoneConfig) -> DesignConfig {
    DesignConfig {
        mode: match config.counting {
            FareplanCounting::Multiple => CountingMode::Multiple,
            FareplanCounting::Single => CountingMode::Single,
        },
        connected: config.connected,
        max_zones: config.max_zones,
        require_no_elongation: config.no_elongation,
        require_no_stopover: config.no_stopover,
    }
}

/// Exact zone tariff design. On success writes a result handle that must
/// be released with [`fareplan_zone_result_free`].
///
/// # Safety
/// All pointers must be valid; `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_zone_design(
    instance: *const FareplanInstance,
    config: *const FareplanZoneConfig,
    out: *mut *mut FareplanZoneResult,
) -> FareplanStatus {
    require_nonnull!(instance);
    require_nonnull!(config);
    require_nonnull!(out);
    guarded(|| {
        let inst = &(*instance).instance;
        let result = solve_exact(&inst.ptn, &inst.demand, &design_config(&*config))?;
        *out = Box::into_raw(Box::new(FareplanZoneResult { result }));
        Ok(FareplanStatus::Ok)
    })
}

/// Releases a zone design result. Null is a no-op.
///
/// # Safety
/// `result` must come from [`fareplan_zone_design`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn fareplan_zone_result_free(result: *mut FareplanZoneResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Deviation objective of the result.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_zone_result_objective(result: *const FareplanZoneResult) -> f64 {
    if result.is_null() {
        return f64::NAN;
    }
    (*result).result.objective
}

/// Number of nonempty zones the optimal partition uses.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_zone_result_zone_count(result: *const FareplanZoneResult) -> usize {
    if result.is_null() {
        return 0;
    }
    (*result).result.partition.zone_count()
}

/// 1-based zone number of a station (canonical station order).
///
/// # Safety
/// All pointers must be valid; `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_zone_result_zone_of(
    result: *const FareplanZoneResult,
    station: usize,
    out_zone: *mut usize,
) -> FareplanStatus {
    require_nonnull!(result);
    require_nonnull!(out_zone);
    guarded(|| {
        let zone = (*result).result.partition.zone_of(station)?;
        *out_zone = zone + 1;
        Ok(FareplanStatus::Ok)
    })
}

/// Length of the optimal price list.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_zone_result_price_count(result: *const FareplanZoneResult) -> usize {
    if result.is_null() {
        return 0;
    }
    (*result).result.prices.len()
}

/// Price for traversing `zones >= 1` zones (clamped to the list length).
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_zone_result_price(
    result: *const FareplanZoneResult,
    zones: usize,
) -> f64 {
    if result.is_null() || zones == 0 {
        return f64::NAN;
    }
    (*result).result.prices.price(zones)
}

/// Writes the zone design MILP in LP file format. The returned string
/// must be released with [`fareplan_string_free`].
///
/// # Safety
/// All pointers must be valid; `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fareplan_export_milp(
    instance: *const FareplanInstance,
    config: *const FareplanZoneConfig,
    out_text: *mut *mut c_char,
) -> FareplanStatus {
    require_nonnull!(instance);
    require_nonnull!(config);
    require_nonnull!(out_text);
    guarded(|| {
        let inst = &(*instance).instance;
        let model = build_milp(&inst.ptn, &inst.demand, &design_config(&*config))?;
        let text = write_lp_file(&model);
        let text = CString::new(text).map_err(|_| Error::InvalidInput("model text contains NUL".into()))?;
        *out_text = text.into_raw();
        Ok(FareplanStatus::Ok)
    })
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `text` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fareplan_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}
