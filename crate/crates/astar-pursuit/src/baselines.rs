//! OMP and Subspace Pursuit baselines over the shared dense kernels.

use crate::error::{Error, Result};
use crate::linalg::{correlate_abs, norm, QrState, Vector};
use crate::synth::ProblemInstance;

#[derive(Debug, Clone, Default)]
pub struct OmpOptions {
    /// Optional early stop: terminate once `||r|| <= residue_stop * ||y||`.
    /// Off by default — the baseline runs exactly `K` selections even on a
    /// zero residue.
    pub residue_stop: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub x_hat: Vector,
    /// OMP: atoms in selection order. SP: ascending index.
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub residue_norm: f64,
    pub iterations: u64,
    /// Degenerate atoms skipped during support growth.
    pub degenerate_skips: u64,
}

fn assemble(problem: &ProblemInstance, support: &[usize], coeffs: &[f64]) -> Vector {
    let mut x = vec![0.0; problem.signal_len()];
    for (&atom, &c) in support.iter().zip(coeffs) {
        x[atom] = c;
    }
    Vector::new(x).expect("finite coefficients")
}

pub fn recover_omp(problem: &ProblemInstance, sparsity: usize) -> Result<BaselineResult> {
    recover_omp_with(problem, sparsity, &OmpOptions::default())
}

/// `K` iterations of best-correlation selection, incremental projection and
/// residue update. Degenerate atoms are skipped in favor of the next-best
/// candidate.
pub fn recover_omp_with(
    problem: &ProblemInstance,
    sparsity: usize,
    opts: &OmpOptions,
) -> Result<BaselineResult> {
    if sparsity > problem.obs_len() {
        return Err(Error::InvalidParams(format!(
            "sparsity {sparsity} exceeds observation length {}",
            problem.obs_len()
        )));
    }
    let y = problem.y.as_slice();
    let y_norm = norm(y);
    let mut qr = QrState::new(problem.obs_len());
    let mut support: Vec<usize> = Vec::with_capacity(sparsity);
    let mut coeffs: Vec<f64> = Vec::new();
    let mut residue = y.to_vec();
    let mut r_norm = y_norm;
    let mut skips = 0u64;
    let mut iterations = 0u64;

    while support.len() < sparsity {
        if let Some(stop) = opts.residue_stop {
            if r_norm <= stop * y_norm {
                break;
            }
        }
        let scan = correlate_abs(&problem.phi, &residue, &support)?;
        let mut appended = false;
        for &(atom, _) in scan.iter() {
            match qr.append(problem.phi.col(atom)) {
                Ok(()) => {
                    support.push(atom);
                    appended = true;
                    break;
                }
                Err(Error::DegenerateAtom { .. }) => {
                    skips += 1;
                    continue;
                }
                Err(e) => return Err(e),
            }
        }
        if !appended {
            break; // dictionary exhausted of independent atoms
        }
        let (c, r) = qr.project(y)?;
        coeffs = c;
        residue = r;
        r_norm = norm(&residue);
        iterations += 1;
    }

    Ok(BaselineResult {
        x_hat: assemble(problem, &support, &coeffs),
        support,
        coefficients: coeffs,
        residue_norm: r_norm,
        iterations,
        degenerate_skips: skips,
    })
}

struct SupportFit {
    atoms: Vec<usize>,
    coeffs: Vec<f64>,
    residue: Vec<f64>,
    r_norm: f64,
}

// Projects y onto the given atoms (ascending-index append order), skipping
// degenerate ones.
fn project_support(
    problem: &ProblemInstance,
    atoms: &[usize],
    skips: &mut u64,
) -> Result<SupportFit> {
    let y = problem.y.as_slice();
    let mut qr = QrState::new(problem.obs_len());
    let mut kept = Vec::with_capacity(atoms.len());
    for &atom in atoms {
        match qr.append(problem.phi.col(atom)) {
            Ok(()) => kept.push(atom),
            Err(Error::DegenerateAtom { .. }) => *skips += 1,
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Ok(SupportFit {
            atoms: kept,
            coeffs: Vec::new(),
            residue: y.to_vec(),
            r_norm: norm(y),
        });
    }
    let (coeffs, residue) = qr.project(y)?;
    let r_norm = norm(&residue);
    Ok(SupportFit { atoms: kept, coeffs, residue, r_norm })
}

/// Subspace Pursuit: start from the `K` best-correlated atoms, then repeat
/// {union with the `K` best residue correlations, project, keep the `K`
/// largest coefficients, re-project} while the residue norm strictly
/// decreases, capped at 100 refinement rounds.
pub fn recover_sp(problem: &ProblemInstance, sparsity: usize) -> Result<BaselineResult> {
    if sparsity > problem.obs_len() {
        return Err(Error::InvalidParams(format!(
            "sparsity {sparsity} exceeds observation length {}",
            problem.obs_len()
        )));
    }
    let mut skips = 0u64;

    let scan = correlate_abs(&problem.phi, problem.y.as_slice(), &[])?;
    let mut init: Vec<usize> = scan.iter().take(sparsity).map(|&(a, _)| a).collect();
    init.sort_unstable();
    let mut fit = project_support(problem, &init, &mut skips)?;
    let mut iterations = 1u64;

    for _ in 0..100 {
        let scan = correlate_abs(&problem.phi, &fit.residue, &fit.atoms)?;
        let mut union = fit.atoms.clone();
        union.extend(scan.iter().take(sparsity).map(|&(a, _)| a));
        union.sort_unstable();
        union.dedup();

        let wide = project_support(problem, &union, &mut skips)?;
        // Keep the K largest-magnitude coefficients; ties keep the lower index.
        let mut ranked: Vec<(usize, f64)> =
            wide.atoms.iter().copied().zip(wide.coeffs.iter().copied()).collect();
        ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        let mut pruned: Vec<usize> = ranked.iter().take(sparsity).map(|&(a, _)| a).collect();
        pruned.sort_unstable();

        let refit = project_support(problem, &pruned, &mut skips)?;
        if refit.r_norm < fit.r_norm {
            fit = refit;
            iterations += 1;
        } else {
            break;
        }
    }

    Ok(BaselineResult {
        x_hat: assemble(problem, &fit.atoms, &fit.coeffs),
        support: fit.atoms,
        coefficients: fit.coeffs,
        residue_norm: fit.r_norm,
        iterations,
        degenerate_skips: skips,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, Matrix};
    use crate::synth::{CoeffDist, EnsembleSpec, MatrixKind, MatrixSharing};

    fn identity_problem(y: Vec<f64>, k: usize) -> ProblemInstance {
        let n = y.len();
        ProblemInstance::new(Matrix::identity(n), Vector::new(y).unwrap(), None, k).unwrap()
    }

    fn ensemble(seed: u64, k: usize) -> EnsembleSpec {
        EnsembleSpec {
            signal_len: 64,
            obs_len: 28,
            sparsity: k,
            coeff_dist: CoeffDist::Uniform,
            matrix_kind: MatrixKind::Gaussian,
            matrix_sharing: MatrixSharing::PerSample,
            trials: 1,
            seed,
            snr_db: None,
            normalize_columns: false,
        }
    }

    #[test]
    fn omp_orthonormal_dictionary() {
        let problem = identity_problem(vec![0.0, 5.0, 3.0, 0.0], 2);
        let result = recover_omp(&problem, 2).unwrap();
        assert_eq!(result.support, vec![1, 2]);
        assert_eq!(result.coefficients, vec![5.0, 3.0]);
        assert!(result.residue_norm <= 1e-12);
        assert_eq!(result.iterations, 2);
    }

    #[test]
    fn omp_zero_observation_still_selects_k_atoms() {
        let problem = identity_problem(vec![0.0; 5], 3);
        let result = recover_omp(&problem, 3).unwrap();
        assert_eq!(result.support, vec![0, 1, 2]);
        assert!(result.coefficients.iter().all(|&c| c == 0.0));
        assert_eq!(result.x_hat.as_slice(), &[0.0; 5]);
    }

    #[test]
    fn omp_optional_residue_stop() {
        let problem = identity_problem(vec![0.0, 5.0, 3.0, 0.0], 4);
        let opts = OmpOptions { residue_stop: Some(1e-9) };
        let result = recover_omp_with(&problem, 4, &opts).unwrap();
        assert_eq!(result.support, vec![1, 2]);
        assert_eq!(result.iterations, 2);
    }

    #[test]
    fn omp_skips_degenerate_atoms() {
        // Two copies of e1 and one e2. On a zero observation every
        // correlation ties, so the index-ordered walk reaches the duplicate,
        // which must be skipped in favor of the next independent atom.
        let phi = Matrix::from_row_major(
            2,
            3,
            &[
                1.0, 1.0, 0.0, //
                0.0, 0.0, 1.0,
            ],
        )
        .unwrap();
        let problem =
            ProblemInstance::new(phi, Vector::new(vec![0.0, 0.0]).unwrap(), None, 2).unwrap();
        let result = recover_omp(&problem, 2).unwrap();
        assert_eq!(result.support, vec![0, 2]);
        assert_eq!(result.degenerate_skips, 1);
        assert!(result.coefficients.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn omp_exact_on_easy_ensemble() {
        let spec = ensemble(31, 3);
        for trial in 0..20 {
            let problem = spec.instance(trial, None).unwrap();
            let result = recover_omp(&problem, 3).unwrap();
            // Residue orthogonal to selected atoms.
            let y_norm = problem.y.norm();
            let fitted = problem.phi.mul_vec(result.x_hat.as_slice()).unwrap();
            let r: Vec<f64> =
                problem.y.as_slice().iter().zip(&fitted).map(|(a, b)| a - b).collect();
            for &atom in &result.support {
                assert!(dot(&r, problem.phi.col(atom)).abs() <= 1e-8 * y_norm);
            }
            assert_eq!(result.support.len(), 3);
        }
    }

    #[test]
    fn sp_orthonormal_dictionary() {
        let problem = identity_problem(vec![0.0, 5.0, 3.0, 0.0], 2);
        let result = recover_sp(&problem, 2).unwrap();
        assert_eq!(result.support, vec![1, 2]);
        assert!(result.residue_norm <= 1e-12);
        assert_eq!(result.iterations, 1, "orthonormal case converges immediately");
    }

    #[test]
    fn sp_recovers_k_sparse_orthonormal_signal_in_one_round() {
        let mut y = vec![0.0; 8];
        y[1] = -2.0;
        y[4] = 1.5;
        y[6] = 0.25;
        let problem = identity_problem(y, 3);
        let result = recover_sp(&problem, 3).unwrap();
        assert_eq!(result.support, vec![1, 4, 6]);
        assert_eq!(result.iterations, 1);
        assert!(result.residue_norm <= 1e-12);
    }

    #[test]
    fn sp_improves_over_initial_support_on_random_problems() {
        let spec = ensemble(77, 6);
        for trial in 0..10 {
            let problem = spec.instance(trial, None).unwrap();
            let result = recover_sp(&problem, 6).unwrap();
            assert!(result.support.len() <= 6);
            assert!(result.support.windows(2).all(|w| w[0] < w[1]));
            // Final residue orthogonal to the final support.
            let fitted = problem.phi.mul_vec(result.x_hat.as_slice()).unwrap();
            let r: Vec<f64> =
                problem.y.as_slice().iter().zip(&fitted).map(|(a, b)| a - b).collect();
            for &atom in &result.support {
                assert!(dot(&r, problem.phi.col(atom)).abs() <= 1e-8 * problem.y.norm());
            }
        }
    }

    #[test]
    fn sparsity_above_observation_length_is_rejected() {
        let problem = identity_problem(vec![1.0, 2.0], 2);
        assert!(recover_omp(&problem, 3).is_err());
        assert!(recover_sp(&problem, 3).is_err());
    }
}
