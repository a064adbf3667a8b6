//! C ABI over the connscan routing library.
//!
//! Every entry point returns a [`CsStatus`]. On failure the message for the
//! calling thread is available through [`cs_last_error`]. Handles are opaque
//! and must be released with the matching `*_free` function. Strings are
//! copied into caller buffers; `needed` receives the size including the NUL.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use connscan::ea::{EaEngine, EaOptions};
use connscan::meat::{
    compact_representation, contract_footpaths, solve_alpha_bounded, solve_unbounded, write_dot_compact,
    write_dot_expanded, write_text, DelayModel, MeatError, MeatOptions,
};
use connscan::overlay::{customize, partition_stops, read_index, write_index, OverlayError, OverlayIndex};
use connscan::profile::{ea_profile, ProfileOptions, ProfileStore};
use connscan::timetable::{load_timetable, parse_timetable, LoadOptions, TimetableError};
use connscan::{AuxIndexes, QueryError, Timetable};

/// Arrival value reported for unreachable targets.
pub const CS_INFINITY: u32 = u32::MAX;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ParseError = 4,
    IoError = 5,
    Mismatch = 6,
    BufferTooSmall = 7,
    NotContracted = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsGraphFormat {
    Text = 0,
    Dot = 1,
    DotCompact = 2,
}

/// Parameters of a delay-robust query.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CsMeatParams {
    /// Largest delay in seconds.
    pub max_delay: u32,
    /// Latest-arrival factor; 0 solves without a bound.
    pub alpha: f64,
    pub beta: f64,
    /// Display window in seconds; `CS_INFINITY` keeps the full graph.
    pub kappa: u32,
    /// Largest compact arc count; 0 means no budget.
    pub arc_budget: u32,
}

pub struct CsTimetable(Timetable);

pub struct CsOverlay(OverlayIndex);

pub struct CsProfile(ProfileStore);

pub struct CsDecisionGraph {
    eat: f64,
    esat: u32,
    legs: usize,
    arcs: usize,
    text: String,
    dot: String,
    dot_compact: String,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let bytes = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(bytes).unwrap_or_default());
}

struct Fail(CsStatus, String);

impl Fail {
    fn null(what: &str) -> Self {
        Fail(CsStatus::NullPointer, format!("{what} is null"))
    }
    fn arg(msg: impl Into<String>) -> Self {
        Fail(CsStatus::InvalidArgument, msg.into())
    }
}

impl From<TimetableError> for Fail {
    fn from(e: TimetableError) -> Self {
        let code = match e {
            TimetableError::Io(_) => CsStatus::IoError,
            _ => CsStatus::ParseError,
        };
        Fail(code, e.to_string())
    }
}

impl From<QueryError> for Fail {
    fn from(e: QueryError) -> Self {
        Fail::arg(e.to_string())
    }
}

impl From<OverlayError> for Fail {
    fn from(e: OverlayError) -> Self {
        let code = match e {
            OverlayError::HashMismatch => CsStatus::Mismatch,
            OverlayError::Format { .. } => CsStatus::ParseError,
            _ => CsStatus::InvalidArgument,
        };
        Fail(code, e.to_string())
    }
}

impl From<MeatError> for Fail {
    fn from(e: MeatError) -> Self {
        let code = match e {
            MeatError::InterstopFootpath(..) => CsStatus::NotContracted,
            _ => CsStatus::InvalidArgument,
        };
        Fail(code, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CsStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            CsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail::null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail::null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn copy_out(s: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> Result<(), Fail> {
    let len = s.len() + 1;
    if let Some(n) = needed.as_mut() {
        *n = len;
    }
    if buf.is_null() || cap < len {
        return Err(Fail(CsStatus::BufferTooSmall, format!("buffer of {cap} bytes, {len} needed")));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_timetable_parse(text: *const c_char, out_tt: *mut *mut CsTimetable) -> CsStatus {
    guard(|| {
        let o = out(out_tt, "out")?;
        let tt = parse_timetable(string(text, "text")?, LoadOptions::default())?;
        *o = boxed(CsTimetable(tt));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_timetable_load(path: *const c_char, out_tt: *mut *mut CsTimetable) -> CsStatus {
    guard(|| {
        let o = out(out_tt, "out")?;
        let tt = load_timetable(string(path, "path")?, LoadOptions::default())?;
        *o = boxed(CsTimetable(tt));
        Ok(())
    })
}

/// Merges footpath-connected stops so that delay-robust queries accept the result.
///
/// # Safety
/// `tt` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_timetable_contract(tt: *const CsTimetable, out_tt: *mut *mut CsTimetable) -> CsStatus {
    guard(|| {
        let o = out(out_tt, "out")?;
        let c = contract_footpaths(&deref(tt, "timetable")?.0)?;
        *o = boxed(CsTimetable(c.timetable));
        Ok(())
    })
}

/// # Safety
/// `tt` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_timetable_free(tt: *mut CsTimetable) {
    if !tt.is_null() {
        drop(Box::from_raw(tt));
    }
}

/// # Safety
/// `tt` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_timetable_num_stops(tt: *const CsTimetable) -> usize {
    tt.as_ref().map_or(0, |t| t.0.num_stops())
}

/// # Safety
/// `tt` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_timetable_num_connections(tt: *const CsTimetable) -> usize {
    tt.as_ref().map_or(0, |t| t.0.num_connections())
}

/// # Safety
/// `tt` must be a live handle, `key` a NUL-terminated string, `out_id` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_timetable_stop_id(tt: *const CsTimetable, key: *const c_char, out_id: *mut u32) -> CsStatus {
    guard(|| {
        let o = out(out_id, "out")?;
        let key = string(key, "key")?;
        *o = deref(tt, "timetable")?.0.stop_id(key).ok_or_else(|| Fail::arg(format!("unknown stop {key:?}")))?;
        Ok(())
    })
}

/// Content hash as lowercase hex.
///
/// # Safety
/// `tt` must be a live handle and `buf` hold `cap` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn cs_timetable_hash(
    tt: *const CsTimetable,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> CsStatus {
    guard(|| copy_out(&deref(tt, "timetable")?.0.content_hash(), buf, cap, needed))
}

/// Earliest arrival at `t`; `CS_INFINITY` when unreachable.
///
/// # Safety
/// `tt` must be a live handle and `out_arrival` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_earliest_arrival(
    tt: *const CsTimetable,
    s: u32,
    tau: u32,
    t: u32,
    out_arrival: *mut u32,
) -> CsStatus {
    guard(|| {
        let o = out(out_arrival, "out")?;
        let tt = &deref(tt, "timetable")?.0;
        *o = EaEngine::new(tt).query(s, tau, t, EaOptions::default())?.arrival.unwrap_or(CS_INFINITY);
        Ok(())
    })
}

/// Profile of every stop towards `t`.
///
/// # Safety
/// `tt` must be a live handle and `out_profile` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_profile_build(tt: *const CsTimetable, t: u32, out_profile: *mut *mut CsProfile) -> CsStatus {
    guard(|| {
        let o = out(out_profile, "out")?;
        let store = ea_profile(&deref(tt, "timetable")?.0, t, &ProfileOptions::default())?;
        *o = boxed(CsProfile(store));
        Ok(())
    })
}

/// Arrival at the profile's target when departing `s` at or after `tau`
/// with at least one connection.
///
/// # Safety
/// `p` must be a live handle and `out_arrival` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_profile_arrival(p: *const CsProfile, s: u32, tau: u32, out_arrival: *mut u32) -> CsStatus {
    guard(|| {
        let o = out(out_arrival, "out")?;
        let p = &deref(p, "profile")?.0;
        if s as usize >= p.num_stops() {
            return Err(Fail::arg(format!("invalid stop id {s}")));
        }
        *o = p.arrival(s, tau);
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_profile_free(p: *mut CsProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Partitions into `k` parts per level and customizes with `threads` workers
/// (0 picks the number of cores).
///
/// # Safety
/// `tt` must be a live handle and `out_overlay` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_overlay_build(
    tt: *const CsTimetable,
    k: u32,
    levels: u32,
    seed: u64,
    threads: u32,
    out_overlay: *mut *mut CsOverlay,
) -> CsStatus {
    guard(|| {
        let o = out(out_overlay, "out")?;
        let tt = &deref(tt, "timetable")?.0;
        let p = partition_stops(tt, k, levels, seed).map_err(|e| Fail::arg(e.to_string()))?;
        *o = boxed(CsOverlay(customize(tt, &p, threads as usize)?));
        Ok(())
    })
}

/// # Safety
/// `tt` must be a live handle, `path` a NUL-terminated string, `out_overlay` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_overlay_read(
    tt: *const CsTimetable,
    path: *const c_char,
    out_overlay: *mut *mut CsOverlay,
) -> CsStatus {
    guard(|| {
        let o = out(out_overlay, "out")?;
        let path = string(path, "path")?;
        let text = std::fs::read_to_string(path).map_err(|e| Fail(CsStatus::IoError, format!("{path}: {e}")))?;
        *o = boxed(CsOverlay(read_index(&text, &deref(tt, "timetable")?.0)?));
        Ok(())
    })
}

/// # Safety
/// `ov` and `tt` must be live handles and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cs_overlay_write(ov: *const CsOverlay, tt: *const CsTimetable, path: *const c_char) -> CsStatus {
    guard(|| {
        let text = write_index(&deref(ov, "overlay")?.0, &deref(tt, "timetable")?.0);
        let path = string(path, "path")?;
        std::fs::write(path, text).map_err(|e| Fail(CsStatus::IoError, format!("{path}: {e}")))
    })
}

/// Earliest arrival over the overlay's connection set. `out_scanned` may be null.
///
/// # Safety
/// `ov` and `tt` must be live handles and `out_arrival` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_overlay_earliest_arrival(
    ov: *const CsOverlay,
    tt: *const CsTimetable,
    s: u32,
    tau: u32,
    t: u32,
    out_arrival: *mut u32,
    out_scanned: *mut usize,
) -> CsStatus {
    guard(|| {
        let o = out(out_arrival, "out")?;
        let r = deref(ov, "overlay")?.0.earliest_arrival(&deref(tt, "timetable")?.0, s, tau, t)?;
        *o = r.arrival.unwrap_or(CS_INFINITY);
        if let Some(n) = out_scanned.as_mut() {
            *n = r.scanned;
        }
        Ok(())
    })
}

/// # Safety
/// `ov` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_overlay_free(ov: *mut CsOverlay) {
    if !ov.is_null() {
        drop(Box::from_raw(ov));
    }
}

/// Delay-robust decision graph from `s` at `tau` to `t`. Writes null to
/// `out_graph` when no safe journey exists. The timetable must be contracted.
///
/// # Safety
/// `tt` must be a live handle, `params` readable and `out_graph` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_meat_solve(
    tt: *const CsTimetable,
    s: u32,
    tau: u32,
    t: u32,
    params: *const CsMeatParams,
    out_graph: *mut *mut CsDecisionGraph,
) -> CsStatus {
    guard(|| {
        let o = out(out_graph, "out")?;
        *o = ptr::null_mut();
        let tt = &deref(tt, "timetable")?.0;
        let p = *deref(params, "params")?;
        let model = DelayModel::new(p.max_delay).ok_or_else(|| Fail::arg("max_delay out of range"))?;
        let opts = MeatOptions {
            beta: p.beta,
            kappa: (p.kappa != CS_INFINITY).then_some(p.kappa),
            arc_budget: (p.arc_budget > 0).then_some(p.arc_budget as usize),
        };
        let aux = AuxIndexes::build(tt);
        let solved = if p.alpha == 0.0 {
            solve_unbounded(tt, &aux, s, tau, t, model, &opts)?.map(|(_, g)| (g, CS_INFINITY))
        } else {
            solve_alpha_bounded(tt, &aux, s, tau, t, p.alpha, model, &opts)?.map(|sol| (sol.graph, sol.esat))
        };
        if let Some((g, esat)) = solved {
            let compact = compact_representation(tt, &g);
            *o = boxed(CsDecisionGraph {
                eat: g.eat(),
                esat,
                legs: g.num_legs(),
                arcs: compact.num_arcs(),
                text: write_text(tt, &g),
                dot: write_dot_expanded(tt, &g),
                dot_compact: write_dot_compact(tt, &compact),
            });
        }
        Ok(())
    })
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_decision_graph_eat(g: *const CsDecisionGraph) -> f64 {
    g.as_ref().map_or(f64::NAN, |g| g.eat)
}

/// Earliest safe arrival for bounded solves, `CS_INFINITY` otherwise.
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_decision_graph_esat(g: *const CsDecisionGraph) -> u32 {
    g.as_ref().map_or(CS_INFINITY, |g| g.esat)
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_decision_graph_num_legs(g: *const CsDecisionGraph) -> usize {
    g.as_ref().map_or(0, |g| g.legs)
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_decision_graph_num_arcs(g: *const CsDecisionGraph) -> usize {
    g.as_ref().map_or(0, |g| g.arcs)
}

/// Renders in one of the `CsGraphFormat` values.
///
/// # Safety
/// `g` must be a live handle and `buf` hold `cap` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn cs_decision_graph_render(
    g: *const CsDecisionGraph,
    format: u32,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> CsStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let s = match format {
            f if f == CsGraphFormat::Text as u32 => &g.text,
            f if f == CsGraphFormat::Dot as u32 => &g.dot,
            f if f == CsGraphFormat::DotCompact as u32 => &g.dot_compact,
            f => return Err(Fail::arg(format!("unknown graph format {f}"))),
        };
        copy_out(s, buf, cap, needed)
    })
}

/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_decision_graph_free(g: *mut CsDecisionGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}
