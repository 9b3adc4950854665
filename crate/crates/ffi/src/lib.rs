//! C interface to `commweights`.
//!
//! Objects cross the boundary as opaque handles created by `cw_*_new` style
//! constructors and released with the matching `cw_*_free`. Every fallible
//! function returns a [`CwStatus`]; on failure a description is available
//! from [`cw_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use commweights::graph::{make_topology, Graph, GraphFile, Topology};
use commweights::heuristics::{self, HeuristicId, HeuristicOptions};
use commweights::pep::{evaluate, AlgorithmId, Criterion, FunctionClass, PepSetting, PepStatus, Rate};
use commweights::spectral::{averaging_from_weights, slem, AveragingMatrix};
use commweights::tuner::{tune_alpha, AlphaGrid, SearchOptions};
use commweights::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwStatus {
    Ok = 0,
    /// Null pointer, malformed string or out-of-range parameter.
    InvalidArgument = 1,
    /// The graph is not connected.
    Disconnected = 2,
    /// No finite worst case exists for any candidate (e.g. `W` does not
    /// reach consensus).
    Infeasible = 3,
    /// The SDP solver failed.
    Solver = 4,
    /// Malformed JSON or schema violation.
    Parse = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Values for [`CwSetting::algorithm`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwAlgorithm {
    Diging = 0,
    AtcDiging = 1,
    Extra = 2,
}

/// Values for [`CwSetting::criterion`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwCriterion {
    Rate = 0,
    FunctionalAtMean = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwPepStatus {
    Optimal = 0,
    LowAccuracy = 1,
    Unbounded = 2,
    NotConsensual = 3,
}

/// Problem setting. `algorithm` and `criterion` hold [`CwAlgorithm`] and
/// [`CwCriterion`] values; fill with [`cw_setting_default`] first.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CwSetting {
    pub algorithm: c_int,
    pub criterion: c_int,
    pub k: usize,
    pub mu: f64,
    pub l: f64,
    pub tracking_weight: f64,
    /// Negative disables the bound.
    pub heterogeneity_bound: f64,
    pub tol: f64,
    pub max_iter: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CwEvaluation {
    /// Worst-case value; `+inf` when unbounded or not consensual.
    pub value: f64,
    /// Rate for the rate criterion, NaN otherwise.
    pub rho: f64,
    pub tau: f64,
    pub status: CwPepStatus,
    pub iterations: usize,
}

/// Opaque graph handle.
pub struct CwGraph(Graph);

/// Opaque averaging-matrix handle.
pub struct CwWeights(AveragingMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next `cw_*` call on the same thread.
#[no_mangle]
pub extern "C" fn cw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

struct Failure(CwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Disconnected | Error::NoConnectedSample { .. } => CwStatus::Disconnected,
            Error::InfeasibleStart(_) => CwStatus::Infeasible,
            Error::Solver(_) | Error::Recovery(_) => CwStatus::Solver,
            Error::Json(_) | Error::Schema(_) => CwStatus::Parse,
            _ => CwStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(CwStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CwStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CwStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CwStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(invalid(&format!("{what} is NULL")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| invalid(&format!("{what} is NULL")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid(&format!("{what} is NULL")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

// Graphs

/// Builds `complete`, `star`, `cycle` or `grid` on `n` nodes.
///
/// # Safety
/// `topology` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_graph_topology(topology: *const c_char, n: usize, out: *mut *mut CwGraph) -> CwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let kind: Topology = str_arg(topology, "topology")?.parse()?;
        *out = boxed(CwGraph(make_topology(kind, n)?));
        Ok(())
    })
}

/// Builds a graph from `m` edges stored as `2m` node indices.
///
/// # Safety
/// `edges` must point to `2 * m` readable values (or be NULL when `m == 0`).
#[no_mangle]
pub unsafe extern "C" fn cw_graph_from_edges(
    n: usize,
    edges: *const usize,
    m: usize,
    out: *mut *mut CwGraph,
) -> CwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let flat: &[usize] = if m == 0 {
            &[]
        } else if edges.is_null() {
            return Err(invalid("edges is NULL"));
        } else {
            std::slice::from_raw_parts(edges, 2 * m)
        };
        let pairs = flat.chunks_exact(2).map(|e| (e[0], e[1]));
        *out = boxed(CwGraph(Graph::new(n, pairs)?));
        Ok(())
    })
}

/// Parses graph JSON (`{"n": .., "edges": [[i, j], ..]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_graph_from_json(json: *const c_char, out: *mut *mut CwGraph) -> CwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let file: GraphFile = serde_json::from_str(str_arg(json, "json")?).map_err(Error::from)?;
        *out = boxed(CwGraph(Graph::from_file(file)?));
        Ok(())
    })
}

/// Serializes a graph to JSON. Release the string with [`cw_string_free`].
///
/// # Safety
/// `g` must be a live graph handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_graph_to_json(g: *const CwGraph, out: *mut *mut c_char) -> CwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = handle(g, "graph")?;
        let text = serde_json::to_string(&g.0.to_file()).map_err(Error::from)?;
        *out = CString::new(text).map_err(|_| invalid("JSON contains NUL"))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `g` must be a live graph handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cw_graph_node_count(g: *const CwGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.node_count())
}

/// # Safety
/// `g` must be a live graph handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cw_graph_edge_count(g: *const CwGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.edge_count())
}

/// # Safety
/// `g` must come from a `cw_graph_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cw_graph_free(g: *mut CwGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// Weights

/// Runs a heuristic by label (`metropolis`, `min-slem`, ...) with default
/// parameters.
///
/// # Safety
/// `g` must be a live graph handle, `name` a NUL-terminated string and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_weights_heuristic(
    g: *const CwGraph,
    name: *const c_char,
    out: *mut *mut CwWeights,
) -> CwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = handle(g, "graph")?;
        let id: HeuristicId = str_arg(name, "name")?.parse()?;
        let h = heuristics::compute(&g.0, &id, &HeuristicOptions::default())?;
        *out = boxed(CwWeights(h.matrix));
        Ok(())
    })
}

/// Wraps explicit edge weights, one per edge in the graph's edge order.
///
/// # Safety
/// `g` must be a live graph handle and `w` must point to `m` readable values.
#[no_mangle]
pub unsafe extern "C" fn cw_weights_from_values(
    g: *const CwGraph,
    w: *const f64,
    m: usize,
    out: *mut *mut CwWeights,
) -> CwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = handle(g, "graph")?;
        let values: &[f64] = if m == 0 {
            &[]
        } else if w.is_null() {
            return Err(invalid("weights is NULL"));
        } else {
            std::slice::from_raw_parts(w, m)
        };
        *out = boxed(CwWeights(averaging_from_weights(&g.0, values)?));
        Ok(())
    })
}

/// Copies the edge weights into `buf`, which must hold exactly `len` values.
///
/// # Safety
/// `w` must be a live weights handle and `buf` must point to `len` writable
/// values.
#[no_mangle]
pub unsafe extern "C" fn cw_weights_get(w: *const CwWeights, buf: *mut f64, len: usize) -> CwStatus {
    guard(|| {
        let w = handle(w, "weights")?;
        let src = w.0.weights();
        if len != src.len() {
            return Err(invalid(&format!("buffer holds {len} values, need {}", src.len())));
        }
        if len > 0 {
            if buf.is_null() {
                return Err(invalid("buf is NULL"));
            }
            std::slice::from_raw_parts_mut(buf, len).copy_from_slice(src);
        }
        Ok(())
    })
}

/// # Safety
/// `w` must be a live weights handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cw_weights_len(w: *const CwWeights) -> usize {
    w.as_ref().map_or(0, |w| w.0.weights().len())
}

/// Second-largest eigenvalue modulus of `W`.
///
/// # Safety
/// `w` must be a live weights handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_weights_slem(w: *const CwWeights, out: *mut f64) -> CwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = slem(&handle(w, "weights")?.0);
        Ok(())
    })
}

/// # Safety
/// `w` must come from a `cw_weights_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cw_weights_free(w: *mut CwWeights) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

// Performance estimation

fn to_setting(s: &CwSetting) -> Result<PepSetting, Failure> {
    let algorithm = match s.algorithm {
        0 => AlgorithmId::Diging,
        1 => AlgorithmId::AtcDiging,
        2 => AlgorithmId::Extra,
        other => return Err(invalid(&format!("unknown algorithm {other}"))),
    };
    let criterion = match s.criterion {
        0 => Criterion::RateIterates,
        1 => Criterion::FunctionalAtMean,
        other => return Err(invalid(&format!("unknown criterion {other}"))),
    };
    let fclass = FunctionClass::new(s.mu, s.l)?;
    let mut setting = PepSetting::new(algorithm, criterion, s.k, fclass);
    setting.tracking_weight = s.tracking_weight;
    setting.heterogeneity_bound = (s.heterogeneity_bound >= 0.0).then_some(s.heterogeneity_bound);
    setting.solver.tol = s.tol;
    setting.solver.max_iter = s.max_iter;
    setting.validate()?;
    Ok(setting)
}

/// Fills `out` with the library defaults for an algorithm and criterion
/// (`K = 1`, `mu = 0.1`, `L = 1`).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_setting_default(algorithm: CwAlgorithm, criterion: CwCriterion, out: *mut CwSetting) -> CwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let crit = match criterion {
            CwCriterion::Rate => Criterion::RateIterates,
            CwCriterion::FunctionalAtMean => Criterion::FunctionalAtMean,
        };
        let s = PepSetting::new(AlgorithmId::Diging, crit, 1, FunctionClass::default());
        *out = CwSetting {
            algorithm: algorithm as c_int,
            criterion: criterion as c_int,
            k: s.k,
            mu: s.fclass.mu,
            l: s.fclass.l,
            tracking_weight: s.tracking_weight,
            heterogeneity_bound: s.heterogeneity_bound.unwrap_or(-1.0),
            tol: s.solver.tol,
            max_iter: s.solver.max_iter,
        };
        Ok(())
    })
}

fn pep_status(s: PepStatus) -> CwPepStatus {
    match s {
        PepStatus::Optimal => CwPepStatus::Optimal,
        PepStatus::LowAccuracy => CwPepStatus::LowAccuracy,
        PepStatus::Unbounded => CwPepStatus::Unbounded,
        PepStatus::NotConsensual => CwPepStatus::NotConsensual,
    }
}

/// Worst-case value of the setting at `(W, alpha)`.
///
/// # Safety
/// `w` must be a live weights handle; `setting` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cw_evaluate(
    w: *const CwWeights,
    setting: *const CwSetting,
    alpha: f64,
    out: *mut CwEvaluation,
) -> CwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let w = handle(w, "weights")?;
        let setting = to_setting(handle(setting, "setting")?)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(&format!("step size must be positive, got {alpha}")));
        }
        let r = evaluate(&setting, &w.0, alpha)?;
        let rate = Rate::for_setting(&setting, r.value);
        *out = CwEvaluation {
            value: r.value,
            rho: rate.map_or(f64::NAN, |r| r.rho),
            tau: rate.map_or(f64::NAN, |r| r.tau),
            status: pep_status(r.status),
            iterations: r.iterations,
        };
        Ok(())
    })
}

/// Tunes the step size for fixed weights over the default grid.
///
/// # Safety
/// `w` must be a live weights handle; `setting`, `alpha` and `value` valid
/// pointers.
#[no_mangle]
pub unsafe extern "C" fn cw_tune_alpha(
    w: *const CwWeights,
    setting: *const CwSetting,
    alpha: *mut f64,
    value: *mut f64,
) -> CwStatus {
    guard(|| {
        let alpha = out_arg(alpha, "alpha")?;
        let value = out_arg(value, "value")?;
        let w = handle(w, "weights")?;
        let setting = to_setting(handle(setting, "setting")?)?;
        let t = tune_alpha(&setting, &w.0, &AlphaGrid::default(), &SearchOptions::default())?;
        *alpha = t.alpha;
        *value = t.value;
        Ok(())
    })
}
