//! C ABI over the sparse recovery core: opaque handles, status codes and
//! plain-old-data parameter structs, so other languages can drive single
//! recoveries without touching Rust types.
//!
//! Ownership: `ap_problem_*` and `ap_result_*` constructors hand out heap
//! handles that must be released with the matching `_free` function exactly
//! once. Accessors never take ownership. All functions are thread-safe as
//! long as a handle is not freed while another call uses it.

use std::ptr;

use astar_pursuit::baselines::{recover_omp, recover_sp};
use astar_pursuit::cost::CostModel;
use astar_pursuit::linalg::{Matrix, Vector};
use astar_pursuit::search::{recover_astar_omp, PruneScope, SearchParams, Termination};
use astar_pursuit::synth::{
    gen_matrix, gen_sparse_signal, observe, CoeffDist, MatrixKind, ProblemInstance,
};

/// Result of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Parameters violate their documented constraints.
    InvalidArgument = 2,
    /// Array lengths do not agree.
    DimensionMismatch = 3,
    /// Numerical failure (non-finite input, degenerate system).
    NumericalFailure = 4,
}

fn status_of(e: &astar_pursuit::Error) -> ApStatus {
    use astar_pursuit::Error as E;
    match e {
        E::DimensionMismatch { .. } => ApStatus::DimensionMismatch,
        E::NonFinite { .. } | E::DegenerateAtom { .. } => ApStatus::NumericalFailure,
        _ => ApStatus::InvalidArgument,
    }
}

/// Opaque recovery problem handle.
pub struct ApProblem {
    inner: ProblemInstance,
}

/// Opaque recovery result handle.
pub struct ApResult {
    signal: Vec<f64>,
    support: Vec<usize>,
    residue_norm: f64,
    iterations: u64,
    equivalent_prunes: u64,
    termination: ApTermination,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApTermination {
    CompletePath = 0,
    ResidueThreshold = 1,
    IterationCap = 2,
    /// Greedy baselines: the fixed iteration budget ran out.
    FixedIterations = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApCostModel {
    Additive = 0,
    Adaptive = 1,
    Multiplicative = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApCoeffDist {
    Uniform = 0,
    Gaussian = 1,
    Binary = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApMatrixKind {
    Gaussian = 0,
    Bernoulli = 1,
}

/// Tree-search knobs. `max_iterations == 0` selects the default cap and
/// `residue_stop <= 0` disables the residue-threshold early stop.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ApSearchParams {
    pub initial_paths: usize,
    pub extensions: usize,
    pub beam_width: usize,
    pub cost_model: ApCostModel,
    pub alpha: f64,
    pub beta: f64,
    pub max_iterations: u64,
    pub residue_stop: f64,
    /// Non-zero restricts equivalent-path pruning to live beam slots.
    pub live_slot_pruning: u8,
}

/// Stock search parameters: I=3, B=2, P=200, multiplicative cost with
/// alpha 0.8 (beta 1.25 for the additive/adaptive models).
#[no_mangle]
pub extern "C" fn ap_search_params_default() -> ApSearchParams {
    ApSearchParams {
        initial_paths: 3,
        extensions: 2,
        beam_width: 200,
        cost_model: ApCostModel::Multiplicative,
        alpha: 0.8,
        beta: 1.25,
        max_iterations: 0,
        residue_stop: 0.0,
        live_slot_pruning: 0,
    }
}

/// Builds a problem from a row-major `rows x cols` observation matrix and an
/// observation vector of length `rows`.
///
/// # Safety
/// `phi` must point to `rows * cols` doubles, `y` to `rows` doubles, and
/// `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn ap_problem_create(
    phi: *const f64,
    rows: usize,
    cols: usize,
    y: *const f64,
    sparsity: usize,
    out: *mut *mut ApProblem,
) -> ApStatus {
    if phi.is_null() || y.is_null() || out.is_null() {
        return ApStatus::NullArgument;
    }
    let Some(len) = rows.checked_mul(cols) else {
        return ApStatus::InvalidArgument;
    };
    let phi = std::slice::from_raw_parts(phi, len);
    let y = std::slice::from_raw_parts(y, rows);
    let matrix = match Matrix::from_row_major(rows, cols, phi) {
        Ok(m) => m,
        Err(e) => return status_of(&e),
    };
    let y = match Vector::new(y.to_vec()) {
        Ok(v) => v,
        Err(e) => return status_of(&e),
    };
    match ProblemInstance::new(matrix, y, None, sparsity) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(ApProblem { inner }));
            ApStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Generates a seeded synthetic problem (`K`-sparse signal, observation
/// matrix, optional noise at `snr_db`; pass NaN for a noiseless
/// observation). `stream` selects the trial stream, matching the library's
/// ensemble convention of trial `t` using stream `t + 1`.
///
/// # Safety
/// `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn ap_problem_generate(
    signal_len: usize,
    obs_len: usize,
    sparsity: usize,
    dist: ApCoeffDist,
    matrix: ApMatrixKind,
    seed: u64,
    stream: u64,
    snr_db: f64,
    out: *mut *mut ApProblem,
) -> ApStatus {
    if out.is_null() {
        return ApStatus::NullArgument;
    }
    if !(sparsity < obs_len && obs_len < signal_len) || sparsity == 0 {
        return ApStatus::InvalidArgument;
    }
    let dist = match dist {
        ApCoeffDist::Uniform => CoeffDist::Uniform,
        ApCoeffDist::Gaussian => CoeffDist::Gaussian,
        ApCoeffDist::Binary => CoeffDist::Binary,
    };
    let kind = match matrix {
        ApMatrixKind::Gaussian => MatrixKind::Gaussian,
        ApMatrixKind::Bernoulli => MatrixKind::Bernoulli,
    };
    let mut rng = astar_pursuit::synth::ensemble_rng(seed, stream);
    let phi = gen_matrix(obs_len, signal_len, kind, false, &mut rng);
    let x = gen_sparse_signal(signal_len, sparsity, dist, &mut rng);
    let snr = if snr_db.is_nan() { None } else { Some(snr_db) };
    let y = match observe(&phi, &x, snr, &mut rng) {
        Ok(y) => y,
        Err(e) => return status_of(&e),
    };
    match ProblemInstance::new(phi, y, Some(x), sparsity) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(ApProblem { inner }));
            ApStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `problem` must come from a constructor and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ap_problem_free(problem: *mut ApProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Signal length `N` of a problem.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ap_problem_signal_len(problem: *const ApProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.signal_len())
}

fn result_handle(
    signal: Vec<f64>,
    support: Vec<usize>,
    residue_norm: f64,
    iterations: u64,
    equivalent_prunes: u64,
    termination: ApTermination,
    out: *mut *mut ApResult,
) -> ApStatus {
    let handle = Box::new(ApResult {
        signal,
        support,
        residue_norm,
        iterations,
        equivalent_prunes,
        termination,
    });
    unsafe { *out = Box::into_raw(handle) };
    ApStatus::Ok
}

/// Orthogonal matching pursuit with `K` iterations.
///
/// # Safety
/// `problem` must be a live handle; `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn ap_recover_omp(
    problem: *const ApProblem,
    out: *mut *mut ApResult,
) -> ApStatus {
    let (Some(problem), false) = (problem.as_ref(), out.is_null()) else {
        return ApStatus::NullArgument;
    };
    match recover_omp(&problem.inner, problem.inner.sparsity) {
        Ok(r) => result_handle(
            r.x_hat.into_vec(),
            r.support,
            r.residue_norm,
            r.iterations,
            0,
            ApTermination::FixedIterations,
            out,
        ),
        Err(e) => status_of(&e),
    }
}

/// Subspace pursuit.
///
/// # Safety
/// `problem` must be a live handle; `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn ap_recover_sp(
    problem: *const ApProblem,
    out: *mut *mut ApResult,
) -> ApStatus {
    let (Some(problem), false) = (problem.as_ref(), out.is_null()) else {
        return ApStatus::NullArgument;
    };
    match recover_sp(&problem.inner, problem.inner.sparsity) {
        Ok(r) => result_handle(
            r.x_hat.into_vec(),
            r.support,
            r.residue_norm,
            r.iterations,
            0,
            ApTermination::FixedIterations,
            out,
        ),
        Err(e) => status_of(&e),
    }
}

/// Best-first tree-search recovery.
///
/// # Safety
/// `problem` must be a live handle; `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn ap_recover_astar(
    problem: *const ApProblem,
    params: ApSearchParams,
    out: *mut *mut ApResult,
) -> ApStatus {
    let (Some(problem), false) = (problem.as_ref(), out.is_null()) else {
        return ApStatus::NullArgument;
    };
    let model = match params.cost_model {
        ApCostModel::Additive => CostModel::Additive { beta: params.beta },
        ApCostModel::Adaptive => CostModel::Adaptive { beta: params.beta },
        ApCostModel::Multiplicative => CostModel::Multiplicative { alpha: params.alpha },
    };
    let mut search = SearchParams::new(problem.inner.sparsity, model).with_geometry(
        params.initial_paths,
        params.extensions,
        params.beam_width,
    );
    if params.max_iterations > 0 {
        search.max_iterations = params.max_iterations;
    }
    if params.residue_stop > 0.0 {
        search.residue_stop = Some(params.residue_stop);
    }
    if params.live_slot_pruning != 0 {
        search.prune_scope = PruneScope::LiveSlots;
    }
    match recover_astar_omp(&problem.inner, &search) {
        Ok(r) => {
            let termination = match r.terminated_by {
                Termination::CompletePath => ApTermination::CompletePath,
                Termination::ResidueThreshold => ApTermination::ResidueThreshold,
                Termination::IterationCap => ApTermination::IterationCap,
            };
            result_handle(
                r.x_hat.into_vec(),
                r.support,
                r.residue_norm,
                r.iterations,
                r.equivalent_prunes,
                termination,
                out,
            )
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `result` must come from a recovery call and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ap_result_free(result: *mut ApResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Length of the recovered signal.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ap_result_signal_len(result: *const ApResult) -> usize {
    result.as_ref().map_or(0, |r| r.signal.len())
}

/// Copies the recovered signal into `buf` (length `len >= signal length`).
///
/// # Safety
/// `result` must be a live handle and `buf` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ap_result_copy_signal(
    result: *const ApResult,
    buf: *mut f64,
    len: usize,
) -> ApStatus {
    let (Some(result), false) = (result.as_ref(), buf.is_null()) else {
        return ApStatus::NullArgument;
    };
    if len < result.signal.len() {
        return ApStatus::DimensionMismatch;
    }
    ptr::copy_nonoverlapping(result.signal.as_ptr(), buf, result.signal.len());
    ApStatus::Ok
}

/// Number of selected atoms.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ap_result_support_len(result: *const ApResult) -> usize {
    result.as_ref().map_or(0, |r| r.support.len())
}

/// Copies the selected atom indices (selection order) into `buf`.
///
/// # Safety
/// `result` must be a live handle and `buf` must point to `len` entries.
#[no_mangle]
pub unsafe extern "C" fn ap_result_copy_support(
    result: *const ApResult,
    buf: *mut usize,
    len: usize,
) -> ApStatus {
    let (Some(result), false) = (result.as_ref(), buf.is_null()) else {
        return ApStatus::NullArgument;
    };
    if len < result.support.len() {
        return ApStatus::DimensionMismatch;
    }
    ptr::copy_nonoverlapping(result.support.as_ptr(), buf, result.support.len());
    ApStatus::Ok
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ap_result_residue_norm(result: *const ApResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.residue_norm)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ap_result_iterations(result: *const ApResult) -> u64 {
    result.as_ref().map_or(0, |r| r.iterations)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ap_result_equivalent_prunes(result: *const ApResult) -> u64 {
    result.as_ref().map_or(0, |r| r.equivalent_prunes)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ap_result_termination(result: *const ApResult) -> ApTermination {
    result.as_ref().map_or(ApTermination::IterationCap, |r| r.termination)
}
