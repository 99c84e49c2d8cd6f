//! Block-image compression pipeline: 8x8 blocks, full-depth separable
//! orthonormal 2D Haar analysis/synthesis, per-block K-sparsification,
//! compressed measurement through a shared observation matrix and per-block
//! recovery against the composite dictionary `V = Phi * Psi`.

use std::io::{Read, Write};
use std::path::Path as FsPath;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, Vector};
use crate::synth::ProblemInstance;

pub const BLOCK: usize = 8;
pub const BLOCK_LEN: usize = BLOCK * BLOCK;

/// Grayscale image with real-valued pixels, dimensions multiples of 8.
/// Pixels are nominally in [0, 255]; intermediate pipeline images may
/// overshoot slightly and are clamped only at PGM write time.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || !width.is_multiple_of(BLOCK) || !height.is_multiple_of(BLOCK) {
            return Err(Error::InvalidParams(format!(
                "image dimensions must be positive multiples of {BLOCK}, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                got: pixels.len(),
                what: "pixel buffer",
            });
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite { what: "pixel" });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn blocks_x(&self) -> usize {
        self.width / BLOCK
    }

    pub fn blocks_y(&self) -> usize {
        self.height / BLOCK
    }

    /// Row-major 64-vector of block (`row`, `col`) in block coordinates.
    pub fn block(&self, row: usize, col: usize) -> [f64; BLOCK_LEN] {
        let mut out = [0.0; BLOCK_LEN];
        for r in 0..BLOCK {
            for c in 0..BLOCK {
                out[r * BLOCK + c] = self.pixels[(row * BLOCK + r) * self.width + col * BLOCK + c];
            }
        }
        out
    }

    fn set_block(&mut self, row: usize, col: usize, data: &[f64]) {
        for r in 0..BLOCK {
            for c in 0..BLOCK {
                self.pixels[(row * BLOCK + r) * self.width + col * BLOCK + c] = data[r * BLOCK + c];
            }
        }
    }

    /// Reads a binary (P5) PGM with maxval 255.
    pub fn read_pgm(path: &FsPath) -> Result<Self> {
        let mut raw = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut raw)?;
        Self::parse_pgm(&raw)
    }

    pub fn parse_pgm(raw: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let mut token = |raw: &[u8]| -> Result<String> {
            // Skip whitespace and '#' comments.
            loop {
                while pos < raw.len() && raw[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < raw.len() && raw[pos] == b'#' {
                    while pos < raw.len() && raw[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    break;
                }
            }
            let start = pos;
            while pos < raw.len() && !raw[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Parse("truncated PGM header".into()));
            }
            Ok(String::from_utf8_lossy(&raw[start..pos]).into_owned())
        };
        if token(raw)? != "P5" {
            return Err(Error::Parse("not a binary PGM (expected magic P5)".into()));
        }
        let width: usize =
            token(raw)?.parse().map_err(|_| Error::Parse("bad PGM width".into()))?;
        let height: usize =
            token(raw)?.parse().map_err(|_| Error::Parse("bad PGM height".into()))?;
        let maxval: usize =
            token(raw)?.parse().map_err(|_| Error::Parse("bad PGM maxval".into()))?;
        if maxval != 255 {
            return Err(Error::Parse(format!("unsupported PGM maxval {maxval}, want 255")));
        }
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let need = width.checked_mul(height).ok_or_else(|| Error::Parse("PGM too large".into()))?;
        if raw.len() < pos || raw.len() - pos < need {
            return Err(Error::Parse("PGM raster shorter than header promises".into()));
        }
        let pixels: Vec<f64> = raw[pos..pos + need].iter().map(|&b| b as f64).collect();
        Self::new(width, height, pixels)
    }

    /// Writes binary PGM; pixels are rounded and clamped to [0, 255].
    pub fn write_pgm(&self, path: &FsPath) -> Result<()> {
        let mut out = Vec::with_capacity(self.pixels.len() + 32);
        out.extend_from_slice(format!("P5\n{} {}\n255\n", self.width, self.height).as_bytes());
        out.extend(self.pixels.iter().map(|&p| p.round().clamp(0.0, 255.0) as u8));
        std::fs::File::create(path)?.write_all(&out)?;
        Ok(())
    }
}

/// Orthonormal synthesis matrix of the full-depth (3-level) separable 2D
/// Haar transform on an 8x8 block.
#[derive(Debug, Clone)]
pub struct HaarBasis {
    synthesis: Matrix,
}

// 1D orthonormal Haar analysis matrix on length 8: three cascade levels of
// pairwise sum/difference over the running approximation, coefficients
// ordered [scaling, level-3 detail, level-2 details, level-1 details].
fn haar_1d_analysis() -> [[f64; BLOCK]; BLOCK] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = [[0.0; BLOCK]; BLOCK];
    for (j, row) in w.iter_mut().enumerate() {
        let mut x = [0.0; BLOCK];
        x[j] = 1.0;
        let mut len = BLOCK;
        while len > 1 {
            let half = len / 2;
            let mut next = [0.0; BLOCK];
            for i in 0..half {
                next[i] = s * (x[2 * i] + x[2 * i + 1]);
                next[half + i] = s * (x[2 * i] - x[2 * i + 1]);
            }
            next[len..].copy_from_slice(&x[len..]);
            x = next;
            len = half;
        }
        // x now holds the transform of e_j, i.e. column j of the analysis map.
        row.copy_from_slice(&x);
    }
    // w[j][i] currently holds (T e_j)[i]; transpose into analysis rows.
    let mut a = [[0.0; BLOCK]; BLOCK];
    for i in 0..BLOCK {
        for j in 0..BLOCK {
            a[i][j] = w[j][i];
        }
    }
    a
}

impl Default for HaarBasis {
    fn default() -> Self {
        Self::new()
    }
}

impl HaarBasis {
    pub fn new() -> Self {
        let w = haar_1d_analysis();
        // Separable 2D analysis operator A = W (x) W on row-major block
        // vectors; the synthesis basis is its transpose.
        let mut data = vec![0.0; BLOCK_LEN * BLOCK_LEN];
        for i in 0..BLOCK {
            for j in 0..BLOCK {
                let coeff_idx = i * BLOCK + j;
                for r in 0..BLOCK {
                    for c in 0..BLOCK {
                        let pixel_idx = r * BLOCK + c;
                        // synthesis[pixel, coeff] = analysis[coeff, pixel]
                        data[coeff_idx * BLOCK_LEN + pixel_idx] = w[i][r] * w[j][c];
                    }
                }
            }
        }
        let synthesis = Matrix::from_col_major(BLOCK_LEN, BLOCK_LEN, data)
            .expect("Haar synthesis matrix is well formed");
        Self { synthesis }
    }

    pub fn synthesis_matrix(&self) -> &Matrix {
        &self.synthesis
    }

    /// Block pixels -> 64 Haar coefficients.
    pub fn analyze(&self, block: &[f64]) -> Result<Vec<f64>> {
        if block.len() != BLOCK_LEN {
            return Err(Error::DimensionMismatch {
                expected: BLOCK_LEN,
                got: block.len(),
                what: "haar analysis",
            });
        }
        Ok((0..BLOCK_LEN).map(|i| dot(self.synthesis.col(i), block)).collect())
    }

    /// 64 Haar coefficients -> block pixels.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != BLOCK_LEN {
            return Err(Error::DimensionMismatch {
                expected: BLOCK_LEN,
                got: coeffs.len(),
                what: "haar synthesis",
            });
        }
        self.synthesis.mul_vec(coeffs)
    }
}

/// Keeps the `k` largest-magnitude coefficients (ties keep the lower index)
/// and zeroes the rest.
pub fn sparsify(coeffs: &[f64], k: usize) -> Vec<f64> {
    if k >= coeffs.len() {
        return coeffs.to_vec();
    }
    let mut ranked: Vec<usize> = (0..coeffs.len()).collect();
    ranked.sort_by(|&a, &b| coeffs[b].abs().total_cmp(&coeffs[a].abs()).then(a.cmp(&b)));
    let mut out = vec![0.0; coeffs.len()];
    for &idx in ranked.iter().take(k) {
        out[idx] = coeffs[idx];
    }
    out
}

/// Peak signal-to-noise ratio in dB with peak 255; equal images give +inf.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch {
            expected: a.pixels.len(),
            got: b.pixels.len(),
            what: "psnr",
        });
    }
    let mse = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.pixels.len() as f64;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (255.0 * 255.0 / mse).log10())
    }
}

/// Outcome of one block's coefficient recovery.
#[derive(Debug, Clone)]
pub struct BlockRecovery {
    /// Recovered coefficient vector of length 64.
    pub coeffs: Vec<f64>,
    pub iterations: u64,
    /// False when the solver gave up (iteration cap) and returned its best
    /// partial answer.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct BlockStat {
    pub row: usize,
    pub col: usize,
    pub iterations: u64,
    pub nmse: f64,
    pub exact: bool,
    pub converged: bool,
}

pub const BLOCK_STATS_CSV_HEADER: &str = "block_row,block_col,iterations,nmse,exact,converged";

pub fn block_stat_csv_row(s: &BlockStat) -> String {
    format!(
        "{},{},{},{:.12e},{},{}",
        s.row, s.col, s.iterations, s.nmse, s.exact as u8, s.converged as u8
    )
}

#[derive(Debug)]
pub struct ImageReconstruction {
    pub reconstructed: GrayImage,
    /// The K-sparsified reference actually measured.
    pub preprocessed: GrayImage,
    pub stats: Vec<BlockStat>,
}

/// Runs the full block pipeline. Each block is sparsified to `k` Haar
/// coefficients, measured as `y = phi * block`, and recovered by `recover`
/// against the composite dictionary `V = phi * synthesis`; one `phi` is
/// shared by the whole image.
pub fn reconstruct_image<F>(
    img: &GrayImage,
    phi: &Matrix,
    k: usize,
    exact_threshold: f64,
    mut recover: F,
) -> Result<ImageReconstruction>
where
    F: FnMut(&ProblemInstance) -> Result<BlockRecovery>,
{
    if phi.cols() != BLOCK_LEN {
        return Err(Error::DimensionMismatch {
            expected: BLOCK_LEN,
            got: phi.cols(),
            what: "observation matrix columns",
        });
    }
    if k > BLOCK_LEN {
        return Err(Error::InvalidParams(format!("block sparsity {k} exceeds {BLOCK_LEN}")));
    }
    let basis = HaarBasis::new();
    let dictionary = phi.mul_mat(basis.synthesis_matrix())?;

    let mut preprocessed = img.clone();
    let mut reconstructed = img.clone();
    let mut stats = Vec::with_capacity(img.blocks_x() * img.blocks_y());
    for row in 0..img.blocks_y() {
        for col in 0..img.blocks_x() {
            let block = img.block(row, col);
            let true_coeffs = sparsify(&basis.analyze(&block)?, k);
            let pre_block = basis.synthesize(&true_coeffs)?;
            preprocessed.set_block(row, col, &pre_block);

            let y = phi.mul_vec(&pre_block)?;
            let problem = ProblemInstance::new(
                dictionary.clone(),
                Vector::new(y)?,
                Some(Vector::new(true_coeffs.clone())?),
                k,
            )?;
            let recovery = recover(&problem)?;
            if recovery.coeffs.len() != BLOCK_LEN {
                return Err(Error::DimensionMismatch {
                    expected: BLOCK_LEN,
                    got: recovery.coeffs.len(),
                    what: "recovered block coefficients",
                });
            }
            reconstructed.set_block(row, col, &basis.synthesize(&recovery.coeffs)?);

            let truth_norm = crate::linalg::norm(&true_coeffs);
            let err_norm: f64 = true_coeffs
                .iter()
                .zip(&recovery.coeffs)
                .map(|(t, h)| (t - h) * (t - h))
                .sum::<f64>()
                .sqrt();
            let block_nmse = if truth_norm > 0.0 {
                err_norm / truth_norm
            } else if err_norm == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            stats.push(BlockStat {
                row,
                col,
                iterations: recovery.iterations,
                nmse: block_nmse,
                exact: block_nmse <= exact_threshold,
                converged: recovery.converged,
            });
        }
    }
    Ok(ImageReconstruction { reconstructed, preprocessed, stats })
}
