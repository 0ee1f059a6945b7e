//! C ABI for `sbm-vips`.
//!
//! Graphs and results are opaque heap handles created by `sbm_*` functions
//! and released with the matching `*_free`. Every fallible call returns an
//! [`SbmStatus`]; on failure a message is available from
//! [`sbm_last_error_message`] on the same thread until the next failing
//! call. Panics never cross the boundary; they surface as
//! [`SbmStatus::Internal`].
//!
//! The header `include/sbm_vips.h` is generated by cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sbm_vips::baselines::{run_bp, run_mfvi, run_spectral, BpConfig, MfviConfig, SpectralConfig};
use sbm_vips::metrics::{hard_labels, TrialRecord};
use sbm_vips::pairing::random_pairing;
use sbm_vips::sbm::{generate_sbm, Backend, Graph, SbmConfig};
use sbm_vips::vips::{run_vips, InitMode, VipsConfig};
use sbm_vips::Error;

/// Outcome of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SbmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument or configuration value was rejected.
    InvalidArgument = 2,
    /// A non-finite value or failed estimate stopped the computation.
    Numeric = 3,
    /// The requested quantity does not exist for this handle (e.g.
    /// soft memberships of a spectral result).
    Unavailable = 4,
    /// A bug: the library panicked.
    Internal = 5,
}

/// An SBM graph with its ground-truth labels.
pub struct SbmGraph {
    inner: Graph,
}

/// The output of one inference run.
pub struct SbmResult {
    labels: Vec<usize>,
    /// Class-1 probabilities in node order; two-class variational runs
    /// only.
    membership: Option<Vec<f64>>,
    record: TrialRecord,
    params: (f64, f64),
}

/// Options for the variational runs. Obtain defaults from
/// [`sbm_vips_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SbmVipsOptions {
    pub p_hat: f64,
    pub q_hat: f64,
    /// Prior probability of class 1.
    pub pi: f64,
    /// Re-estimate `p_hat`, `q_hat` during the run.
    pub update_params: bool,
    /// First iteration followed by a parameter update.
    pub param_update_start: u32,
    /// Meta iterations for VIPS; MFVI gets three sweeps per meta iteration.
    pub max_meta_iters: u32,
    pub tol: f64,
    /// Initial memberships are i.i.d. Bernoulli(`init_mu`).
    pub init_mu: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SbmStatus {
    match err {
        Error::Numeric(_) | Error::Estimation { .. } | Error::Domain(_) => SbmStatus::Numeric,
        _ => SbmStatus::InvalidArgument,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard<F>(f: F) -> SbmStatus
where
    F: FnOnce() -> Result<(), (SbmStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SbmStatus::Ok,
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
            set_error(format!("internal error: {msg}"));
            SbmStatus::Internal
        }
    }
}

fn lib<T>(r: sbm_vips::Result<T>) -> Result<T, (SbmStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SbmStatus, String) {
    (SbmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn graph_ref<'a>(g: *const SbmGraph) -> Result<&'a Graph, (SbmStatus, String)> {
    g.as_ref().map(|g| &g.inner).ok_or_else(|| null("graph"))
}

unsafe fn result_ref<'a>(r: *const SbmResult) -> Result<&'a SbmResult, (SbmStatus, String)> {
    r.as_ref().ok_or_else(|| null("result"))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), (SbmStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sbm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn sbm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Samples a balanced `k`-class planted-partition graph on `n` nodes
/// (within-class probability `p`, across `q`).
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_generate(n: usize, k: usize, p: f64, q: f64, seed: u64, out: *mut *mut SbmGraph) -> SbmStatus {
    guard(|| {
        let graph = lib(generate_sbm(&SbmConfig::planted(n, k, p, q), seed))?;
        emit(out, SbmGraph { inner: graph })
    })
}

/// Builds a graph from `n_edges` undirected edges given as consecutive
/// `(i, j)` node pairs in `edges`, with `n` ground-truth `labels` in
/// `0..k`.
///
/// # Safety
/// `edges` must point to `2 * n_edges` values, `labels` to `n` values and
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_from_edges(
    n: usize,
    k: usize,
    edges: *const u32,
    n_edges: usize,
    labels: *const u32,
    out: *mut *mut SbmGraph,
) -> SbmStatus {
    guard(|| {
        if (edges.is_null() && n_edges > 0) || (labels.is_null() && n > 0) {
            return Err(null("edges or labels"));
        }
        let flat = if n_edges == 0 { &[][..] } else { std::slice::from_raw_parts(edges, 2 * n_edges) };
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|e| (e[0] as usize, e[1] as usize)).collect();
        let labels = if n == 0 { Vec::new() } else { std::slice::from_raw_parts(labels, n).iter().map(|&l| l as usize).collect() };
        let graph = lib(Graph::from_edges(n, k, &pairs, labels, Backend::auto(n)))?;
        emit(out, SbmGraph { inner: graph })
    })
}

/// Node count, or 0 for a null graph.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_node_count(graph: *const SbmGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.n())
}

/// Undirected edge count, or 0 for a null graph.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_edge_count(graph: *const SbmGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.edge_count())
}

/// Copies the ground-truth labels into `buf`, which must hold `len`
/// values with `len` equal to the node count.
///
/// # Safety
/// `graph` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_labels(graph: *const SbmGraph, buf: *mut u32, len: usize) -> SbmStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        copy_out(g.labels().iter().map(|&l| l as u32), g.n(), buf, len)
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_free(graph: *mut SbmGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

unsafe fn copy_out<T, I: Iterator<Item = T>>(values: I, count: usize, buf: *mut T, len: usize) -> Result<(), (SbmStatus, String)> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len != count {
        return Err((SbmStatus::InvalidArgument, format!("buffer holds {len} values, expected {count}")));
    }
    for (i, v) in values.enumerate() {
        buf.add(i).write(v);
    }
    Ok(())
}

/// Defaults: fixed `(p_hat, q_hat)`, `pi = 0.5`, Bernoulli(½) start, at
/// most 100 meta iterations, tolerance `1e-6`, updates (if enabled) from
/// iteration 3.
#[no_mangle]
pub extern "C" fn sbm_vips_options_default(p_hat: f64, q_hat: f64) -> SbmVipsOptions {
    SbmVipsOptions {
        p_hat,
        q_hat,
        pi: 0.5,
        update_params: false,
        param_update_start: 3,
        max_meta_iters: 100,
        tol: 1e-6,
        init_mu: 0.5,
    }
}

fn vips_config(o: &SbmVipsOptions) -> VipsConfig {
    VipsConfig {
        pi: o.pi,
        update_params: o.update_params,
        param_update_start: o.param_update_start as usize,
        max_meta_iters: o.max_meta_iters as usize,
        tol: o.tol,
        record_elbo: false,
        ..VipsConfig::new(o.p_hat, o.q_hat).with_init(InitMode::Bernoulli(o.init_mu))
    }
}

fn binary_result(u: Vec<f64>, record: TrialRecord) -> SbmResult {
    let params = (*record.p_hat.last().unwrap_or(&f64::NAN), *record.q_hat.last().unwrap_or(&f64::NAN));
    SbmResult { labels: hard_labels(&u), membership: Some(u), record, params }
}

/// Runs two-class VIPS over a random pairing drawn from `pairing_seed`,
/// starting from an initialization drawn from `init_seed`.
///
/// # Safety
/// `graph` and `options` must be live, `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn sbm_run_vips(
    graph: *const SbmGraph,
    options: *const SbmVipsOptions,
    pairing_seed: u64,
    init_seed: u64,
    out: *mut *mut SbmResult,
) -> SbmStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let o = options.as_ref().ok_or_else(|| null("options"))?;
        if g.k() != 2 {
            return Err((SbmStatus::InvalidArgument, format!("VIPS needs a two-class graph, got K = {}", g.k())));
        }
        let pairing = lib(random_pairing(g.n(), pairing_seed))?;
        let (state, record) = lib(run_vips(g, &pairing, &vips_config(o), init_seed))?;
        emit(out, binary_result(state.u_node_order(&pairing), record))
    })
}

/// Runs two-class batch mean-field inference with the same options
/// (`max_meta_iters` × 3 sweeps).
///
/// # Safety
/// `graph` and `options` must be live, `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn sbm_run_mfvi(
    graph: *const SbmGraph,
    options: *const SbmVipsOptions,
    init_seed: u64,
    out: *mut *mut SbmResult,
) -> SbmStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let o = options.as_ref().ok_or_else(|| null("options"))?;
        let v = vips_config(o);
        let config = MfviConfig {
            pi: v.pi,
            update_params: v.update_params,
            param_update_start: v.param_update_start,
            max_iters: 3 * v.max_meta_iters,
            tol: v.tol,
            ..MfviConfig::new(v.p_hat, v.q_hat).with_init(v.init)
        };
        let (u, record) = lib(run_mfvi(g, &config, init_seed))?;
        emit(out, binary_result(u, record))
    })
}

/// Spectral clustering into the graph's class count.
///
/// # Safety
/// `graph` must be live, `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn sbm_run_spectral(graph: *const SbmGraph, seed: u64, out: *mut *mut SbmResult) -> SbmStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let (labels, record) = lib(run_spectral(g, g.k(), &SpectralConfig::default(), seed))?;
        emit(out, SbmResult { labels, membership: None, record, params: (f64::NAN, f64::NAN) })
    })
}

/// Belief propagation with connectivity `(p, q)` and a uniform prior.
///
/// # Safety
/// `graph` must be live, `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn sbm_run_bp(graph: *const SbmGraph, p: f64, q: f64, seed: u64, out: *mut *mut SbmResult) -> SbmStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let prior = vec![1.0 / g.k() as f64; g.k()];
        let res = lib(run_bp(g, p, q, &prior, &BpConfig::default(), seed))?;
        emit(out, SbmResult { labels: res.labels, membership: None, record: res.record, params: (p, q) })
    })
}

/// Final minimum-permutation ℓ1 error against the graph's labels (NaN for
/// a null result).
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_result_l1_error(result: *const SbmResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.record.final_l1())
}

/// Final NMI against the graph's labels (NaN for a null result).
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_result_nmi(result: *const SbmResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.record.final_nmi())
}

/// Iterations performed (meta iterations for VIPS, sweeps for MFVI and
/// BP, eigensolver steps for spectral).
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_result_iterations(result: *const SbmResult) -> usize {
    result.as_ref().map_or(0, |r| r.record.iterations)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_result_converged(result: *const SbmResult) -> bool {
    result.as_ref().is_some_and(|r| r.record.converged)
}

/// Final working parameters `(p_hat, q_hat)`; NaN for spectral results.
///
/// # Safety
/// `result` must be live and both output pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sbm_result_params(result: *const SbmResult, p_hat: *mut f64, q_hat: *mut f64) -> SbmStatus {
    guard(|| {
        let r = result_ref(result)?;
        if p_hat.is_null() || q_hat.is_null() {
            return Err(null("output pointer"));
        }
        *p_hat = r.params.0;
        *q_hat = r.params.1;
        Ok(())
    })
}

/// Copies the hard labels (node order) into `buf` of length `len`, which
/// must equal the node count.
///
/// # Safety
/// `result` must be live and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sbm_result_labels(result: *const SbmResult, buf: *mut u32, len: usize) -> SbmStatus {
    guard(|| {
        let r = result_ref(result)?;
        copy_out(r.labels.iter().map(|&l| l as u32), r.labels.len(), buf, len)
    })
}

/// Copies the class-1 probabilities (node order) into `buf`. Only
/// variational two-class results carry them; others give
/// [`SbmStatus::Unavailable`].
///
/// # Safety
/// `result` must be live and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sbm_result_membership(result: *const SbmResult, buf: *mut f64, len: usize) -> SbmStatus {
    guard(|| {
        let r = result_ref(result)?;
        let u = r
            .membership
            .as_ref()
            .ok_or_else(|| (SbmStatus::Unavailable, format!("{} results carry no soft memberships", r.record.algorithm)))?;
        copy_out(u.iter().copied(), u.len(), buf, len)
    })
}

/// Releases a result. Null is ignored.
///
/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sbm_result_free(result: *mut SbmResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
