//! Best-first tree search over matching-pursuit support expansions.
//!
//! The beam holds up to `P` paths. Each iteration selects the minimum-cost
//! path and considers its `B` strongest extensions in descending correlation
//! order. The selected path always leaves the tree: its first surviving
//! child takes its slot, later children evict the current worst slot only
//! when they beat its cost, and children whose atom set was ever materialized
//! before are dropped without projection.

use crate::cost::{cost, empty_slot_cost, CostModel, PathCostInputs};
use crate::error::{Error, Result};
use crate::linalg::{correlate_abs, norm, QrState, Vector};
use crate::synth::ProblemInstance;
use crate::trie::VisitedTrie;

/// One candidate support under construction.
#[derive(Debug, Clone)]
pub struct Path {
    /// Selected atom indices in selection order.
    pub atoms: Vec<u32>,
    /// Least-squares coefficients over `atoms`.
    pub coeffs: Vec<f64>,
    pub qr: QrState,
    pub residue: Vec<f64>,
    pub r_norm: f64,
    /// Residue norm before the last atom was appended (`||y||` at length 1).
    pub prev_r_norm: f64,
    pub cost: f64,
}

impl Path {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Fixed-capacity collection of path slots. Empty slots cost `||y||` and
/// have length 0.
#[derive(Debug)]
pub struct Beam {
    slots: Vec<Option<Path>>,
    y_norm: f64,
}

impl Beam {
    pub fn new(capacity: usize, y_norm: f64) -> Self {
        Self { slots: (0..capacity).map(|_| None).collect(), y_norm }
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn slot(&self, i: usize) -> Option<&Path> {
        self.slots[i].as_ref()
    }

    pub fn set_slot(&mut self, i: usize, path: Option<Path>) {
        self.slots[i] = path;
    }

    pub fn take_slot(&mut self, i: usize) -> Option<Path> {
        self.slots[i].take()
    }

    pub fn occupied(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn slot_cost(&self, i: usize) -> f64 {
        self.slots[i]
            .as_ref()
            .map_or_else(|| empty_slot_cost(self.y_norm), |p| p.cost)
    }

    pub fn slot_length(&self, i: usize) -> usize {
        self.slots[i].as_ref().map_or(0, Path::len)
    }

    /// Worst slot: maximum cost, ties broken by lower index.
    fn worst_slot(&self) -> usize {
        let mut worst = 0;
        for i in 1..self.slots.len() {
            if self.slot_cost(i) > self.slot_cost(worst) {
                worst = i;
            }
        }
        worst
    }
}

/// How equivalent-path pruning decides a candidate was seen before.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneScope {
    /// Against every path prefix ever materialized (trie membership).
    GlobalTrie,
    /// Against live beam slots only: a candidate is dropped when some live
    /// path's leading prefix of the same length has the same atom set.
    LiveSlots,
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    /// Number of initial single-atom paths (`I`).
    pub initial_paths: usize,
    /// Extensions considered per expansion (`B`).
    pub extensions: usize,
    /// Beam width (`P`).
    pub beam_width: usize,
    /// Target support size (`K`).
    pub sparsity: usize,
    pub model: CostModel,
    pub max_iterations: u64,
    /// Optional early stop on `||r|| <= residue_stop * ||y||` for the
    /// selected path.
    pub residue_stop: Option<f64>,
    pub prune_scope: PruneScope,
    /// Record per-event search history (materializations and prunes).
    pub record_trace: bool,
}

impl SearchParams {
    /// Stock search geometry: `I = 3`, `B = 2`, `P = 200`.
    pub fn new(sparsity: usize, model: CostModel) -> Self {
        let (initial_paths, extensions, beam_width) = (3, 2, 200);
        Self {
            initial_paths,
            extensions,
            beam_width,
            sparsity,
            model,
            max_iterations: Self::default_max_iterations(initial_paths, sparsity, beam_width),
            residue_stop: None,
            prune_scope: PruneScope::GlobalTrie,
            record_trace: false,
        }
    }

    /// Safety cap, far above observed iteration counts.
    pub fn default_max_iterations(initial_paths: usize, sparsity: usize, beam_width: usize) -> u64 {
        10u64
            .saturating_mul(initial_paths.max(1) as u64)
            .saturating_mul(sparsity.max(1) as u64)
            .saturating_mul(beam_width.max(1) as u64)
    }

    pub fn with_geometry(mut self, initial_paths: usize, extensions: usize, beam_width: usize) -> Self {
        self.initial_paths = initial_paths;
        self.extensions = extensions;
        self.beam_width = beam_width;
        self.max_iterations =
            Self::default_max_iterations(initial_paths, self.sparsity, beam_width);
        self
    }

    pub fn validate(&self, problem: &ProblemInstance) -> Result<()> {
        self.model.validate()?;
        let n = problem.signal_len();
        let m = problem.obs_len();
        if self.initial_paths == 0 || self.initial_paths > n {
            return Err(Error::InvalidParams(format!(
                "initial paths must satisfy 1 <= I <= N, got I={} N={n}",
                self.initial_paths
            )));
        }
        if self.initial_paths > self.beam_width {
            return Err(Error::InvalidParams(format!(
                "beam width must be at least the initial path count, got I={} P={}",
                self.initial_paths, self.beam_width
            )));
        }
        if self.extensions == 0 {
            return Err(Error::InvalidParams("extensions per path must be >= 1".into()));
        }
        if self.sparsity == 0 || self.sparsity > m {
            return Err(Error::InvalidParams(format!(
                "sparsity must satisfy 1 <= K <= M, got K={} M={m}",
                self.sparsity
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The selected best path reached length `K`.
    CompletePath,
    /// The selected best path's residue fell under the requested threshold
    /// (or the observation was zero).
    ResidueThreshold,
    /// The iteration cap fired; the best path so far is returned.
    IterationCap,
}

/// Chronological search events, recorded when `record_trace` is set.
#[derive(Debug, Clone)]
pub enum TraceEvent {
    /// A path was materialized (projected and inserted); the canonical key.
    Materialized { key: Vec<u32> },
    /// A candidate was dropped as equivalent, before projection; atoms in
    /// candidate order (parent order plus the new atom).
    EquivalentPrune { atoms: Vec<u32> },
}

#[derive(Debug, Clone, Default)]
pub struct SearchTrace {
    pub events: Vec<TraceEvent>,
}

#[derive(Debug)]
pub struct RecoveryResult {
    /// Recovered signal, zero outside the support.
    pub x_hat: Vector,
    /// Selected atoms in selection order.
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub residue_norm: f64,
    /// Number of expansions performed.
    pub iterations: u64,
    pub equivalent_prunes: u64,
    /// Candidates rejected because their atom added no new direction.
    pub degenerate_candidates: u64,
    /// Expansions in which no child survived and the slot was emptied.
    pub cleared_slots: u64,
    pub terminated_by: Termination,
    pub trace: Option<SearchTrace>,
}

/// Statistics of a single expansion.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExpandStats {
    pub equivalent_prunes: u64,
    pub degenerate_candidates: u64,
    pub materialized: u64,
    pub slot_cleared: bool,
}

/// Builds the initial beam: the `I` atoms with the largest `|<y, v_n>|` as
/// length-1 paths (degenerate atoms skipped), all other slots empty. The
/// singleton keys are inserted into the visited trie.
pub fn initialize(
    problem: &ProblemInstance,
    params: &SearchParams,
) -> Result<(Beam, VisitedTrie)> {
    params.validate(problem)?;
    let y = problem.y.as_slice();
    let y_norm = norm(y);
    if y_norm <= 0.0 {
        return Err(Error::InvalidParams("initialization requires a non-zero observation".into()));
    }
    let mut beam = Beam::new(params.beam_width, y_norm);
    let mut trie = VisitedTrie::new();
    let scan = correlate_abs(&problem.phi, y, &[])?;
    let mut filled = 0;
    for &(atom, _) in scan.iter() {
        if filled == params.initial_paths {
            break;
        }
        let mut qr = QrState::new(problem.obs_len());
        match qr.append(problem.phi.col(atom)) {
            Ok(()) => {}
            Err(Error::DegenerateAtom { .. }) => continue,
            Err(e) => return Err(e),
        }
        let (coeffs, residue) = qr.project(y)?;
        let r_norm = norm(&residue);
        let path_cost = cost(
            params.model,
            &PathCostInputs {
                r_norm,
                prev_r_norm: y_norm,
                y_norm,
                sparsity: params.sparsity,
                length: 1,
            },
        );
        trie.insert(&[atom as u32]);
        beam.set_slot(
            filled,
            Some(Path {
                atoms: vec![atom as u32],
                coeffs,
                qr,
                residue,
                r_norm,
                prev_r_norm: y_norm,
                cost: path_cost,
            }),
        );
        filled += 1;
    }
    Ok((beam, trie))
}

/// Minimum-cost slot; ties prefer the longer path, then the lower index.
pub fn select_best(beam: &Beam) -> usize {
    let mut best = 0;
    for i in 1..beam.capacity() {
        let (ci, cb) = (beam.slot_cost(i), beam.slot_cost(best));
        if ci < cb || (ci == cb && beam.slot_length(i) > beam.slot_length(best)) {
            best = i;
        }
    }
    best
}

fn is_live_slot_equivalent(beam: &Beam, candidate_sorted: &[u32]) -> bool {
    let len = candidate_sorted.len();
    for i in 0..beam.capacity() {
        if let Some(path) = beam.slot(i) {
            if path.len() >= len {
                let mut prefix: Vec<u32> = path.atoms[..len].to_vec();
                prefix.sort_unstable();
                if prefix == candidate_sorted {
                    return true;
                }
            }
        }
    }
    false
}

/// Places a surviving candidate into the beam. The first survivor of an
/// expansion takes the selected path's vacated slot unconditionally; later
/// ones must beat the current worst slot's cost.
fn place_candidate(beam: &mut Beam, first_slot: &mut Option<usize>, candidate: Path) {
    match first_slot.take() {
        Some(slot) => beam.set_slot(slot, Some(candidate)),
        None => {
            let worst = beam.worst_slot();
            if candidate.cost < beam.slot_cost(worst) {
                beam.set_slot(worst, Some(candidate));
            }
        }
    }
}

/// Expands the selected slot by its `B` strongest extensions.
///
/// The selected path is removed from the tree; an expansion in which every
/// child is pruned or degenerate leaves the slot empty so the search moves
/// on. An empty selected slot is expanded from the root (residue `y`).
pub fn expand(
    beam: &mut Beam,
    trie: &mut VisitedTrie,
    problem: &ProblemInstance,
    params: &SearchParams,
    best: usize,
    trace: Option<&mut SearchTrace>,
) -> Result<ExpandStats> {
    let y = problem.y.as_slice();
    let y_norm = norm(y);
    let mut stats = ExpandStats::default();
    let parent = beam.take_slot(best);
    let (parent_atoms, parent_residue, parent_r_norm, parent_qr) = match &parent {
        Some(p) => (p.atoms.clone(), p.residue.as_slice(), p.r_norm, Some(&p.qr)),
        None => (Vec::new(), y, y_norm, None),
    };
    debug_assert!(parent_atoms.len() < params.sparsity, "cannot expand a complete path");

    let excluded: Vec<usize> = parent_atoms.iter().map(|&a| a as usize).collect();
    let scan = correlate_abs(&problem.phi, parent_residue, &excluded)?;

    let mut first_slot = Some(best);
    let mut trace = trace;
    for &(atom, _) in scan.iter().take(params.extensions) {
        let mut candidate_atoms = parent_atoms.clone();
        candidate_atoms.push(atom as u32);
        let key = VisitedTrie::canonical_key(&candidate_atoms);

        let seen = match params.prune_scope {
            PruneScope::GlobalTrie => trie.contains(&key),
            PruneScope::LiveSlots => is_live_slot_equivalent(beam, &key),
        };
        if seen {
            stats.equivalent_prunes += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.events.push(TraceEvent::EquivalentPrune { atoms: candidate_atoms });
            }
            continue;
        }

        let qr = match parent_qr {
            Some(qr) => qr.appended(problem.phi.col(atom)),
            None => QrState::new(problem.obs_len()).appended(problem.phi.col(atom)),
        };
        let qr = match qr {
            Ok(qr) => qr,
            Err(Error::DegenerateAtom { .. }) => {
                stats.degenerate_candidates += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let (coeffs, residue) = qr.project(y)?;
        let r_norm = norm(&residue);
        let candidate_cost = cost(
            params.model,
            &PathCostInputs {
                r_norm,
                prev_r_norm: parent_r_norm,
                y_norm,
                sparsity: params.sparsity,
                length: candidate_atoms.len(),
            },
        );
        trie.insert(&key);
        stats.materialized += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.events.push(TraceEvent::Materialized { key });
        }
        place_candidate(
            beam,
            &mut first_slot,
            Path {
                atoms: candidate_atoms,
                coeffs,
                qr,
                residue,
                r_norm,
                prev_r_norm: parent_r_norm,
                cost: candidate_cost,
            },
        );
    }
    if first_slot.is_some() {
        // No child survived: the selected path is gone and its slot stays
        // empty so the search continues elsewhere.
        stats.slot_cleared = true;
    }
    debug_assert_eq!(beam.capacity(), params.beam_width);
    Ok(stats)
}

fn assemble_result(
    problem: &ProblemInstance,
    path: Option<&Path>,
    iterations: u64,
    stats: (u64, u64, u64),
    terminated_by: Termination,
    trace: Option<SearchTrace>,
) -> RecoveryResult {
    let n = problem.signal_len();
    let mut x = vec![0.0; n];
    let (support, coefficients, residue_norm) = match path {
        Some(p) => {
            for (&atom, &c) in p.atoms.iter().zip(p.coeffs.iter()) {
                x[atom as usize] = c;
            }
            (
                p.atoms.iter().map(|&a| a as usize).collect(),
                p.coeffs.clone(),
                p.r_norm,
            )
        }
        None => (Vec::new(), Vec::new(), norm(problem.y.as_slice())),
    };
    RecoveryResult {
        x_hat: Vector::new(x).expect("coefficients are finite"),
        support,
        coefficients,
        residue_norm,
        iterations,
        equivalent_prunes: stats.0,
        degenerate_candidates: stats.1,
        cleared_slots: stats.2,
        terminated_by,
        trace,
    }
}

/// Runs the full search: initialize, then select-and-expand until the best
/// path is complete, the optional residue threshold fires, or the iteration
/// cap is hit.
pub fn recover_astar_omp(
    problem: &ProblemInstance,
    params: &SearchParams,
) -> Result<RecoveryResult> {
    params.validate(problem)?;
    let y_norm = problem.y.norm();
    let trace = params.record_trace.then(SearchTrace::default);
    if y_norm <= 0.0 {
        return Ok(assemble_result(
            problem,
            None,
            0,
            (0, 0, 0),
            Termination::ResidueThreshold,
            trace,
        ));
    }
    let (mut beam, mut trie) = initialize(problem, params)?;
    let mut trace = trace;
    if let Some(t) = trace.as_mut() {
        for i in 0..beam.capacity() {
            if let Some(p) = beam.slot(i) {
                t.events.push(TraceEvent::Materialized {
                    key: VisitedTrie::canonical_key(&p.atoms),
                });
            }
        }
    }

    let mut iterations = 0u64;
    let mut prunes = 0u64;
    let mut degenerate = 0u64;
    let mut cleared = 0u64;
    loop {
        let best = select_best(&beam);
        if beam.slot_length(best) == params.sparsity {
            return Ok(assemble_result(
                problem,
                beam.slot(best),
                iterations,
                (prunes, degenerate, cleared),
                Termination::CompletePath,
                trace,
            ));
        }
        if let Some(stop) = params.residue_stop {
            if let Some(path) = beam.slot(best) {
                if path.r_norm <= stop * y_norm {
                    return Ok(assemble_result(
                        problem,
                        beam.slot(best),
                        iterations,
                        (prunes, degenerate, cleared),
                        Termination::ResidueThreshold,
                        trace,
                    ));
                }
            }
        }
        if iterations >= params.max_iterations {
            return Ok(assemble_result(
                problem,
                beam.slot(best),
                iterations,
                (prunes, degenerate, cleared),
                Termination::IterationCap,
                trace,
            ));
        }
        let stats = expand(&mut beam, &mut trie, problem, params, best, trace.as_mut())?;
        prunes += stats.equivalent_prunes;
        degenerate += stats.degenerate_candidates;
        cleared += stats.slot_cleared as u64;
        iterations += 1;
    }
}

/// Upper bound on iterations for `B = 2`: `I * (2^(K-1) - 1)`.
pub fn iteration_upper_bound_b2(initial_paths: usize, sparsity: usize) -> u128 {
    let k = sparsity.max(1) as u32;
    (initial_paths as u128) * ((1u128 << (k - 1)) - 1)
}
