//! C ABI over the topocl library.
//!
//! Every fallible call returns a [`TopoclStatus`]. On failure a message is
//! stored per thread and can be read with [`topocl_last_error`]. Objects are
//! handed out as opaque pointers and must be released with the matching
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use topocl::nn::Mlp;
use topocl::seeding::{stream_rng, Stream};
use topocl::topo::{
    barycenter_online_update, birth_death_decompose, cycle_barycenter, wasserstein_cycle_distance,
    wasserstein_cycle_gradient, CycleBarycenter, PersistenceDescriptor, WeightedGraph,
};
use topocl::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopoclStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DisconnectedGraph = 3,
    CardinalityMismatch = 4,
    ShapeMismatch = 5,
    Io = 6,
    Format = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Weighted undirected graph.
pub struct TopoclGraph(WeightedGraph);

/// Birth and death sets of a graph.
pub struct TopoclDescriptor(PersistenceDescriptor);

/// Multilayer perceptron.
pub struct TopoclMlp(Mlp);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> TopoclStatus {
    match err {
        Error::DisconnectedGraph { .. } => TopoclStatus::DisconnectedGraph,
        Error::CardinalityMismatch { .. } => TopoclStatus::CardinalityMismatch,
        Error::ShapeMismatch { .. } => TopoclStatus::ShapeMismatch,
        Error::Io { .. } => TopoclStatus::Io,
        Error::BadMagic { .. } | Error::Format(_) => TopoclStatus::Format,
        _ => TopoclStatus::InvalidArgument,
    }
}

struct Fail(TopoclStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, turning errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TopoclStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TopoclStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TopoclStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(TopoclStatus::NullPointer, format!("{what} is null"))
}

/// Borrows `len` elements; a null pointer is accepted only when `len` is 0.
unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn check_len(needed: usize, given: usize) -> Result<(), Fail> {
    if given < needed {
        return Err(Fail(
            TopoclStatus::BufferTooSmall,
            format!("buffer holds {given} values, {needed} needed"),
        ));
    }
    Ok(())
}

/// Message for the most recent call on this thread if it failed, or null. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn topocl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a connected simple graph on `node_count` nodes from parallel edge
/// arrays. Fails with `DisconnectedGraph` when it is not connected.
///
/// # Safety
/// `src`, `dst` and `weights` must each point to `edge_count` readable values.
#[no_mangle]
pub unsafe extern "C" fn topocl_graph_new(
    node_count: usize,
    src: *const usize,
    dst: *const usize,
    weights: *const f64,
    edge_count: usize,
    out: *mut *mut TopoclGraph,
) -> TopoclStatus {
    guard(|| {
        let (s, d, w) = (
            input(src, edge_count, "src")?,
            input(dst, edge_count, "dst")?,
            input(weights, edge_count, "weights")?,
        );
        let edges: Vec<(usize, usize, f64)> = (0..edge_count).map(|i| (s[i], d[i], w[i])).collect();
        put(out, TopoclGraph(WeightedGraph::new(node_count, &edges)?))
    })
}

/// # Safety
/// `graph` must come from [`topocl_graph_new`] and not be freed already.
#[no_mangle]
pub unsafe extern "C" fn topocl_graph_free(graph: *mut TopoclGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn topocl_graph_edge_count(graph: *const TopoclGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Splits the edges of a graph into births and deaths.
///
/// # Safety
/// `graph` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn topocl_decompose(graph: *const TopoclGraph, out: *mut *mut TopoclDescriptor) -> TopoclStatus {
    guard(|| {
        let g = handle(graph, "graph")?;
        put(out, TopoclDescriptor(birth_death_decompose(&g.0)?))
    })
}

/// # Safety
/// `desc` must come from [`topocl_decompose`] and not be freed already.
#[no_mangle]
pub unsafe extern "C" fn topocl_descriptor_free(desc: *mut TopoclDescriptor) {
    if !desc.is_null() {
        drop(Box::from_raw(desc));
    }
}

/// # Safety
/// `desc` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn topocl_descriptor_birth_count(desc: *const TopoclDescriptor) -> usize {
    desc.as_ref().map_or(0, |d| d.0.births.len())
}

/// # Safety
/// `desc` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn topocl_descriptor_death_count(desc: *const TopoclDescriptor) -> usize {
    desc.as_ref().map_or(0, |d| d.0.deaths.len())
}

unsafe fn copy_features(
    features: &[topocl::topo::Feature],
    values: *mut f64,
    edge_ids: *mut usize,
    len: usize,
) -> Result<(), Fail> {
    check_len(features.len(), len)?;
    let vals = output(values, features.len(), "values")?;
    for (v, f) in vals.iter_mut().zip(features) {
        *v = f.value;
    }
    if !edge_ids.is_null() {
        for (id, f) in output(edge_ids, features.len(), "edge_ids")?.iter_mut().zip(features) {
            *id = f.edge_id;
        }
    }
    Ok(())
}

/// Copies birth values (ascending) and, if `edge_ids` is not null, their
/// edge ids.
///
/// # Safety
/// `values` and a non-null `edge_ids` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn topocl_descriptor_births(
    desc: *const TopoclDescriptor,
    values: *mut f64,
    edge_ids: *mut usize,
    len: usize,
) -> TopoclStatus {
    guard(|| copy_features(&handle(desc, "desc")?.0.births, values, edge_ids, len))
}

/// Copies death values (ascending) and, if `edge_ids` is not null, their
/// edge ids.
///
/// # Safety
/// `values` and a non-null `edge_ids` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn topocl_descriptor_deaths(
    desc: *const TopoclDescriptor,
    values: *mut f64,
    edge_ids: *mut usize,
    len: usize,
) -> TopoclStatus {
    guard(|| copy_features(&handle(desc, "desc")?.0.deaths, values, edge_ids, len))
}

/// Squared cycle distance between two death sets of equal length.
///
/// # Safety
/// `a` and `b` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn topocl_distance(a: *const f64, b: *const f64, len: usize, out: *mut f64) -> TopoclStatus {
    guard(|| {
        let d = wasserstein_cycle_distance(input(a, len, "a")?, input(b, len, "b")?)?;
        *output(out, 1, "out")?.first_mut().unwrap() = d;
        Ok(())
    })
}

/// Gradient of the squared distance to `target` for every edge, indexed by
/// edge id. `grad` must hold at least the graph's edge count.
///
/// # Safety
/// `target` must hold `target_len` values and `grad` `grad_len` values.
#[no_mangle]
pub unsafe extern "C" fn topocl_gradient(
    desc: *const TopoclDescriptor,
    target: *const f64,
    target_len: usize,
    grad: *mut f64,
    grad_len: usize,
) -> TopoclStatus {
    guard(|| {
        let d = &handle(desc, "desc")?.0;
        let t = CycleBarycenter::from_deaths(input(target, target_len, "target")?);
        let g = wasserstein_cycle_gradient(d, &t)?;
        check_len(g.len(), grad_len)?;
        output(grad, g.len(), "grad")?.copy_from_slice(&g);
        Ok(())
    })
}

/// Weighted barycenter of `set_count` sorted death sets stored row-major in
/// `sets`, each of length `len`. Writes `len` values to `out`.
///
/// # Safety
/// `sets` must hold `set_count * len` values, `weights` `set_count` and
/// `out` `len`.
#[no_mangle]
pub unsafe extern "C" fn topocl_barycenter(
    sets: *const f64,
    set_count: usize,
    len: usize,
    weights: *const f64,
    out: *mut f64,
) -> TopoclStatus {
    guard(|| {
        let total = set_count
            .checked_mul(len)
            .ok_or_else(|| Fail(TopoclStatus::InvalidArgument, "set_count * len overflows".into()))?;
        let flat = input(sets, total, "sets")?;
        let rows: Vec<Vec<f64>> = (0..set_count).map(|i| flat[i * len..(i + 1) * len].to_vec()).collect();
        let b = cycle_barycenter(&rows, input(weights, set_count, "weights")?)?;
        output(out, len, "out")?.copy_from_slice(&b.death_values);
        Ok(())
    })
}

/// Online update `(p * prev + q * next) / (p + q)`, written to `out`.
///
/// # Safety
/// `prev`, `next` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn topocl_barycenter_update(
    prev: *const f64,
    next: *const f64,
    len: usize,
    p: f64,
    q: f64,
    out: *mut f64,
) -> TopoclStatus {
    guard(|| {
        let prev = CycleBarycenter::from_deaths(input(prev, len, "prev")?);
        let b = barycenter_online_update(&prev, input(next, len, "next")?, p, q)?;
        output(out, len, "out")?.copy_from_slice(&b.death_values);
        Ok(())
    })
}

/// Freshly initialised network with the given layer sizes.
///
/// # Safety
/// `sizes` must hold `layer_count` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn topocl_mlp_new(
    sizes: *const usize,
    layer_count: usize,
    seed: u64,
    out: *mut *mut TopoclMlp,
) -> TopoclStatus {
    guard(|| {
        let sizes = input(sizes, layer_count, "sizes")?;
        put(out, TopoclMlp(Mlp::new(sizes, &mut stream_rng(seed, Stream::Init))?))
    })
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, Fail> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(Path::new)
        .map_err(|_| Fail(TopoclStatus::InvalidArgument, "path is not UTF-8".into()))
}

/// Loads a checkpoint written by `topocl_mlp_save` or the Rust library.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn topocl_mlp_load(path: *const c_char, out: *mut *mut TopoclMlp) -> TopoclStatus {
    guard(|| put(out, TopoclMlp(Mlp::load(path_arg(path)?)?)))
}

/// # Safety
/// `mlp` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn topocl_mlp_save(mlp: *const TopoclMlp, path: *const c_char) -> TopoclStatus {
    guard(|| Ok(handle(mlp, "mlp")?.0.save(path_arg(path)?)?))
}

/// # Safety
/// `mlp` must come from `topocl_mlp_new` or `topocl_mlp_load`.
#[no_mangle]
pub unsafe extern "C" fn topocl_mlp_free(mlp: *mut TopoclMlp) {
    if !mlp.is_null() {
        drop(Box::from_raw(mlp));
    }
}

/// # Safety
/// `mlp` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn topocl_mlp_input_dim(mlp: *const TopoclMlp) -> usize {
    mlp.as_ref().map_or(0, |m| m.0.input_dim())
}

/// # Safety
/// `mlp` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn topocl_mlp_output_dim(mlp: *const TopoclMlp) -> usize {
    mlp.as_ref().map_or(0, |m| m.0.output_dim())
}

/// Predicted class for each of `rows` inputs stored row-major in `inputs`.
///
/// # Safety
/// `inputs` must hold `rows * input_dim` values and `labels` `rows`.
#[no_mangle]
pub unsafe extern "C" fn topocl_mlp_predict(
    mlp: *const TopoclMlp,
    inputs: *const f32,
    rows: usize,
    labels: *mut usize,
) -> TopoclStatus {
    guard(|| {
        let net = &handle(mlp, "mlp")?.0;
        let dim = net.input_dim();
        let total = rows
            .checked_mul(dim)
            .ok_or_else(|| Fail(TopoclStatus::InvalidArgument, "rows * input_dim overflows".into()))?;
        let flat = input(inputs, total, "inputs")?;
        let xs: Vec<&[f32]> = (0..rows).map(|i| &flat[i * dim..(i + 1) * dim]).collect();
        let pred = net.predict(&xs)?;
        output(labels, rows, "labels")?.copy_from_slice(&pred);
        Ok(())
    })
}
