//! Deterministic, seeded generation of synthetic sparse-recovery ensembles:
//! sparse signals, observation matrices, observations and noise.
//!
//! Reproducibility contract: every random quantity is drawn from a ChaCha12
//! generator. Trial `t` of an ensemble uses stream `t + 1` of the ensemble
//! seed; stream `0` is reserved for the shared observation matrix. Within a
//! trial stream the draw order is fixed: matrix (per-sample mode only), then
//! support positions, then coefficients, then noise. Same seed and spec give
//! a bit-identical ensemble on any platform and under any worker count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffDist {
    /// Nonzeros drawn from U[-1, 1], resampled on exact zero.
    Uniform,
    /// Nonzeros drawn from the standard normal distribution.
    Gaussian,
    /// Nonzeros set to the constant 1.
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// I.i.d. entries, mean 0, standard deviation 1/N.
    Gaussian,
    /// I.i.d. equiprobable +-1/sqrt(M) entries.
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixSharing {
    /// A fresh observation matrix per trial.
    PerSample,
    /// One observation matrix (stream 0) shared by every trial.
    Shared,
}

/// A single recovery problem: observation matrix, observation, sparsity and
/// (when synthesized) the ground-truth signal.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub phi: Matrix,
    pub y: Vector,
    pub x_true: Option<Vector>,
    pub sparsity: usize,
}

impl ProblemInstance {
    pub fn new(phi: Matrix, y: Vector, x_true: Option<Vector>, sparsity: usize) -> Result<Self> {
        if y.len() != phi.rows() {
            return Err(Error::DimensionMismatch {
                expected: phi.rows(),
                got: y.len(),
                what: "observation length",
            });
        }
        if let Some(x) = &x_true {
            if x.len() != phi.cols() {
                return Err(Error::DimensionMismatch {
                    expected: phi.cols(),
                    got: x.len(),
                    what: "ground-truth length",
                });
            }
        }
        Ok(Self { phi, y, x_true, sparsity })
    }

    pub fn obs_len(&self) -> usize {
        self.phi.rows()
    }

    pub fn signal_len(&self) -> usize {
        self.phi.cols()
    }
}

/// Parameters of a synthetic ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub signal_len: usize,
    pub obs_len: usize,
    pub sparsity: usize,
    pub coeff_dist: CoeffDist,
    pub matrix_kind: MatrixKind,
    pub matrix_sharing: MatrixSharing,
    pub trials: usize,
    pub seed: u64,
    pub snr_db: Option<f64>,
    pub normalize_columns: bool,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sparsity < self.obs_len && self.obs_len < self.signal_len) {
            return Err(Error::InvalidParams(format!(
                "ensemble requires K < M < N, got K={} M={} N={}",
                self.sparsity, self.obs_len, self.signal_len
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be >= 1".into()));
        }
        Ok(())
    }

    /// The matrix used by every trial in shared mode, drawn from stream 0.
    pub fn shared_matrix(&self) -> Matrix {
        let mut rng = ensemble_rng(self.seed, 0);
        gen_matrix(
            self.obs_len,
            self.signal_len,
            self.matrix_kind,
            self.normalize_columns,
            &mut rng,
        )
    }

    /// Generates trial `t`. `shared` must be the stream-0 matrix when the
    /// sharing mode is [`MatrixSharing::Shared`].
    pub fn instance(&self, trial: usize, shared: Option<&Matrix>) -> Result<ProblemInstance> {
        self.validate()?;
        let mut rng = ensemble_rng(self.seed, trial as u64 + 1);
        let phi = match self.matrix_sharing {
            MatrixSharing::PerSample => gen_matrix(
                self.obs_len,
                self.signal_len,
                self.matrix_kind,
                self.normalize_columns,
                &mut rng,
            ),
            MatrixSharing::Shared => shared
                .ok_or_else(|| {
                    Error::InvalidParams("shared matrix mode requires the stream-0 matrix".into())
                })?
                .clone(),
        };
        let x = gen_sparse_signal(self.signal_len, self.sparsity, self.coeff_dist, &mut rng);
        let y = observe(&phi, &x, self.snr_db, &mut rng)?;
        ProblemInstance::new(phi, y, Some(x), self.sparsity)
    }
}

/// ChaCha12 stream for one component of an ensemble.
pub fn ensemble_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// K-sparse signal of length `n`: distinct support positions drawn by
/// rejection in draw order, then one coefficient per position in the same
/// order.
pub fn gen_sparse_signal(n: usize, k: usize, dist: CoeffDist, rng: &mut ChaCha12Rng) -> Vector {
    assert!(k <= n, "sparsity {k} exceeds signal length {n}");
    let mut taken = vec![false; n];
    let mut positions = Vec::with_capacity(k);
    while positions.len() < k {
        let idx = rng.gen_range(0..n);
        if !taken[idx] {
            taken[idx] = true;
            positions.push(idx);
        }
    }
    let mut x = vec![0.0; n];
    for &pos in &positions {
        x[pos] = match dist {
            CoeffDist::Uniform => loop {
                let v: f64 = rng.gen_range(-1.0..=1.0);
                if v != 0.0 {
                    break v;
                }
            },
            CoeffDist::Gaussian => rng.sample(StandardNormal),
            CoeffDist::Binary => 1.0,
        };
    }
    Vector::new(x).expect("generated coefficients are finite")
}

/// M x N observation matrix, filled column by column.
pub fn gen_matrix(
    m: usize,
    n: usize,
    kind: MatrixKind,
    normalize_columns: bool,
    rng: &mut ChaCha12Rng,
) -> Matrix {
    let mut data = vec![0.0; m * n];
    match kind {
        MatrixKind::Gaussian => {
            let std_dev = 1.0 / n as f64;
            for e in data.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *e = std_dev * z;
            }
        }
        MatrixKind::Bernoulli => {
            let mag = 1.0 / (m as f64).sqrt();
            for e in data.iter_mut() {
                *e = if rng.gen_bool(0.5) { mag } else { -mag };
            }
        }
    }
    if normalize_columns {
        for j in 0..n {
            let col = &mut data[j * m..(j + 1) * m];
            let nrm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm > 0.0 {
                for v in col.iter_mut() {
                    *v /= nrm;
                }
            }
        }
    }
    Matrix::from_col_major(m, n, data).expect("generated entries are finite")
}

/// `y = phi * x`, optionally contaminated by white Gaussian noise with
/// variance `||phi x||^2 / (M * 10^(snr_db / 10))`.
pub fn observe(
    phi: &Matrix,
    x: &Vector,
    snr_db: Option<f64>,
    rng: &mut ChaCha12Rng,
) -> Result<Vector> {
    let mut y = phi.mul_vec(x.as_slice())?;
    if let Some(snr) = snr_db {
        let signal_energy: f64 = y.iter().map(|v| v * v).sum();
        if signal_energy > 0.0 {
            let sigma = (signal_energy / (y.len() as f64 * 10f64.powf(snr / 10.0))).sqrt();
            for v in y.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += sigma * z;
            }
        }
    }
    Vector::new(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    fn base_spec() -> EnsembleSpec {
        EnsembleSpec {
            signal_len: 256,
            obs_len: 100,
            sparsity: 30,
            coeff_dist: CoeffDist::Uniform,
            matrix_kind: MatrixKind::Gaussian,
            matrix_sharing: MatrixSharing::PerSample,
            trials: 4,
            seed: 99,
            snr_db: None,
            normalize_columns: false,
        }
    }

    #[test]
    fn full_support_binary_signal_is_all_ones() {
        let mut rng = ensemble_rng(1, 1);
        let x = gen_sparse_signal(8, 8, CoeffDist::Binary, &mut rng);
        assert_eq!(x.as_slice(), &[1.0; 8]);
    }

    #[test]
    fn uniform_signal_support_and_range() {
        let mut rng = ensemble_rng(2, 1);
        let x = gen_sparse_signal(256, 30, CoeffDist::Uniform, &mut rng);
        let nonzeros: Vec<f64> =
            x.as_slice().iter().copied().filter(|&v| v != 0.0).collect();
        assert_eq!(nonzeros.len(), 30);
        assert!(nonzeros.iter().all(|&v| (-1.0..=1.0).contains(&v)));
    }

    #[test]
    fn gaussian_coefficients_have_unit_moments() {
        let mut rng = ensemble_rng(3, 1);
        let mut samples = Vec::with_capacity(10_000);
        while samples.len() < 10_000 {
            let x = gen_sparse_signal(100, 100, CoeffDist::Gaussian, &mut rng);
            samples.extend_from_slice(x.as_slice());
        }
        samples.truncate(10_000);
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var =
            samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / samples.len() as f64;
        assert!(mean.abs() <= 0.05, "mean {mean}");
        assert!((var - 1.0).abs() <= 0.05, "var {var}");
    }

    #[test]
    fn gaussian_matrix_entry_spread_matches_one_over_n() {
        let mut rng = ensemble_rng(4, 0);
        let phi = gen_matrix(100, 256, MatrixKind::Gaussian, false, &mut rng);
        let mut sq = 0.0;
        for j in 0..phi.cols() {
            sq += phi.col(j).iter().map(|v| v * v).sum::<f64>();
        }
        let std = (sq / (phi.rows() * phi.cols()) as f64).sqrt();
        let target = 1.0 / 256.0;
        assert!((std - target).abs() <= 0.1 * target, "std {std} vs {target}");
    }

    #[test]
    fn bernoulli_entries_have_exact_magnitude() {
        let mut rng = ensemble_rng(5, 0);
        let phi = gen_matrix(64, 128, MatrixKind::Bernoulli, false, &mut rng);
        let mag = 1.0 / 8.0;
        for j in 0..phi.cols() {
            assert!(phi.col(j).iter().all(|v| v.abs() == mag));
        }
    }

    #[test]
    fn column_normalization_hits_unit_norm() {
        let mut rng = ensemble_rng(6, 0);
        let phi = gen_matrix(50, 80, MatrixKind::Gaussian, true, &mut rng);
        for j in 0..phi.cols() {
            assert!((norm(phi.col(j)) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn noiseless_observation_is_exact_product() {
        let mut rng = ensemble_rng(7, 1);
        let phi = gen_matrix(10, 32, MatrixKind::Gaussian, false, &mut rng);
        let x = gen_sparse_signal(32, 4, CoeffDist::Uniform, &mut rng);
        let y = observe(&phi, &x, None, &mut rng).unwrap();
        assert_eq!(y.as_slice(), phi.mul_vec(x.as_slice()).unwrap().as_slice());
    }

    #[test]
    fn empirical_snr_tracks_requested_level() {
        let mut spec = base_spec();
        spec.signal_len = 90;
        spec.obs_len = 40;
        spec.sparsity = 8;
        spec.coeff_dist = CoeffDist::Gaussian;
        spec.snr_db = Some(10.0);
        let mut num = 0.0;
        let mut den = 0.0;
        for trial in 0..1000 {
            let inst = spec.instance(trial, None).unwrap();
            let clean = inst.phi.mul_vec(inst.x_true.as_ref().unwrap().as_slice()).unwrap();
            num += clean.iter().map(|v| v * v).sum::<f64>();
            den += inst
                .y
                .as_slice()
                .iter()
                .zip(&clean)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
        let snr = 10.0 * (num / den).log10();
        assert!((snr - 10.0).abs() <= 0.5, "empirical snr {snr}");
    }

    #[test]
    fn same_seed_reproduces_ensemble_bit_for_bit() {
        let spec = base_spec();
        for trial in 0..3 {
            let a = spec.instance(trial, None).unwrap();
            let b = spec.instance(trial, None).unwrap();
            assert_eq!(a.y.as_slice(), b.y.as_slice());
            assert_eq!(a.x_true.as_ref().unwrap(), b.x_true.as_ref().unwrap());
            for j in 0..a.phi.cols() {
                assert_eq!(a.phi.col(j), b.phi.col(j));
            }
        }
    }

    #[test]
    fn per_sample_mode_varies_matrix_shared_mode_does_not() {
        let mut spec = base_spec();
        let a = spec.instance(0, None).unwrap();
        let b = spec.instance(1, None).unwrap();
        assert_ne!(a.phi.col(0), b.phi.col(0));

        spec.matrix_sharing = MatrixSharing::Shared;
        let shared = spec.shared_matrix();
        let c = spec.instance(0, Some(&shared)).unwrap();
        let d = spec.instance(1, Some(&shared)).unwrap();
        for j in 0..shared.cols() {
            assert_eq!(c.phi.col(j), d.phi.col(j));
        }
        // Signals still differ per trial.
        assert_ne!(
            c.x_true.as_ref().unwrap().as_slice(),
            d.x_true.as_ref().unwrap().as_slice()
        );
    }

    #[test]
    fn spec_validation_rejects_bad_shapes() {
        let mut spec = base_spec();
        spec.sparsity = 100;
        assert!(spec.validate().is_err());
        let mut spec = base_spec();
        spec.trials = 0;
        assert!(spec.validate().is_err());
    }
}
