// Not every test binary uses every oracle.
#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

//! Independent oracles for integration tests: least squares through plain
//! normal equations with Gaussian elimination (no shared code with the
//! library's QR path), a from-scratch greedy pursuit and an exhaustive
//! minimum-residue support search.

use astar_pursuit::linalg::Matrix;
use astar_pursuit::synth::ProblemInstance;

/// Solves `(S^T S) c = S^T y` by Gaussian elimination with partial pivoting.
/// Returns None when the system is numerically singular.
pub fn normal_equations(cols: &[&[f64]], y: &[f64]) -> Option<Vec<f64>> {
    let k = cols.len();
    let mut a = vec![vec![0.0f64; k]; k];
    let mut b = vec![0.0f64; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = cols[i].iter().zip(cols[j]).map(|(p, q)| p * q).sum();
        }
        b[i] = cols[i].iter().zip(y).map(|(p, q)| p * q).sum();
    }
    for p in 0..k {
        let pivot = (p..k).max_by(|&x, &z| a[x][p].abs().total_cmp(&a[z][p].abs()))?;
        if a[pivot][p].abs() <= 1e-14 {
            return None;
        }
        a.swap(p, pivot);
        b.swap(p, pivot);
        for r in (p + 1)..k {
            let f = a[r][p] / a[p][p];
            for c in p..k {
                a[r][c] -= f * a[p][c];
            }
            b[r] -= f * b[p];
        }
    }
    let mut c = vec![0.0f64; k];
    for r in (0..k).rev() {
        let mut acc = b[r];
        for j in (r + 1)..k {
            acc -= a[r][j] * c[j];
        }
        c[r] = acc / a[r][r];
    }
    Some(c)
}

/// Residue norm of `y` after least-squares projection onto `cols`.
pub fn residue_norm(cols: &[&[f64]], y: &[f64]) -> Option<f64> {
    let coeffs = normal_equations(cols, y)?;
    let mut residue = y.to_vec();
    for (col, &c) in cols.iter().zip(&coeffs) {
        for (r, v) in residue.iter_mut().zip(*col) {
            *r -= c * v;
        }
    }
    Some(residue.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// From-scratch greedy pursuit: argmax absolute correlation (ties to the
/// lower index), full least-squares re-solve per iteration via normal
/// equations. Returns the selected atoms in selection order.
pub fn naive_omp(phi: &Matrix, y: &[f64], sparsity: usize) -> Vec<usize> {
    let mut support: Vec<usize> = Vec::new();
    let mut residue = y.to_vec();
    for _ in 0..sparsity {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..phi.cols() {
            if support.contains(&j) {
                continue;
            }
            let corr: f64 = phi.col(j).iter().zip(&residue).map(|(p, q)| p * q).sum::<f64>().abs();
            let better = match best {
                None => true,
                Some((_, cur)) => corr > cur,
            };
            if better {
                best = Some((j, corr));
            }
        }
        let Some((atom, _)) = best else { break };
        support.push(atom);
        let cols: Vec<&[f64]> = support.iter().map(|&j| phi.col(j)).collect();
        let Some(coeffs) = normal_equations(&cols, y) else {
            support.pop();
            break;
        };
        residue = y.to_vec();
        for (col, &c) in cols.iter().zip(&coeffs) {
            for (r, v) in residue.iter_mut().zip(*col) {
                *r -= c * v;
            }
        }
    }
    support
}

/// Exhaustive search over all `C(N, 2)` two-atom supports. Returns the
/// support when exactly one has residue norm below `tol`.
pub fn unique_l0_pair(problem: &ProblemInstance, tol: f64) -> Option<Vec<usize>> {
    assert_eq!(problem.sparsity, 2, "exhaustive oracle is sized for K = 2");
    let n = problem.signal_len();
    let y = problem.y.as_slice();
    let mut hit: Option<Vec<usize>> = None;
    for a in 0..n {
        for b in (a + 1)..n {
            let cols = [problem.phi.col(a), problem.phi.col(b)];
            if let Some(rn) = residue_norm(&cols, y) {
                if rn < tol {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some(vec![a, b]);
                }
            }
        }
    }
    hit
}
