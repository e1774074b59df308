//! Dense matrix kernels: exponentials, induced 2-norms, spectra and
//! exponential envelopes.
//!
//! Everything here works on small square matrices (dimension at most
//! [`MAX_DIM`]). The matrix exponential uses scaling-and-squaring with a
//! 13th-order Pade approximant and lower-order short cuts for small norms;
//! the induced 2-norm is the square root of the largest eigenvalue of
//! `A' * A`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 64;

/// Square real matrix with finite entries, dimension 1..=[`MAX_DIM`].
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    inner: DMatrix<f64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidInput("matrix dimension must be positive".into()));
    }
    if dim > MAX_DIM {
        return Err(Error::Unsupported(format!(
            "matrix dimension {dim} exceeds the supported maximum {MAX_DIM}"
        )));
    }
    Ok(())
}

impl Matrix {
    /// Builds a matrix from rows. Fails unless the rows form a square array
    /// of finite numbers.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    dim
                )));
            }
        }
        let inner = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
        Self::from_inner(inner)
    }

    /// Builds a matrix from `dim * dim` entries in row-major order.
    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::from_inner(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// 1x1 matrix, handy for scalar subsystems.
    pub fn scalar(a: f64) -> Result<Self> {
        Self::from_row_slice(1, &[a])
    }

    /// Diagonal matrix with the given diagonal.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        check_dim(diag.len())?;
        Self::from_inner(DMatrix::from_diagonal(&DVector::from_row_slice(diag)))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { inner: DMatrix::identity(dim, dim) })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { inner: DMatrix::zeros(dim, dim) })
    }

    fn from_inner(inner: DMatrix<f64>) -> Result<Self> {
        if inner.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self { inner })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    /// Entries as rows, the inverse of [`Matrix::from_rows`].
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix { inner: self.inner.transpose() }
    }

    /// Matrix-vector product. Panics if `x.len() != self.dim()`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "state dimension mismatch");
        let y = &self.inner * DVector::from_row_slice(x);
        y.iter().copied().collect()
    }

    /// Maximum absolute column sum, used to pick the Pade order.
    fn norm_one(&self) -> f64 {
        (0..self.dim())
            .map(|j| (0..self.dim()).map(|i| self.inner[(i, j)].abs()).sum())
            .fold(0.0, f64::max)
    }

    pub(crate) fn as_inner(&self) -> &DMatrix<f64> {
        &self.inner
    }
}

impl std::ops::Mul for &Matrix {
    type Output = Matrix;

    /// Panics if the dimensions differ.
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix dimension mismatch");
        Matrix { inner: &self.inner * &rhs.inner }
    }
}

/// Euclidean norm of a state vector.
///
/// Scaled by the largest component so entries near 1e-200 do not lose
/// their squares to underflow (long certified simulations get there).
pub fn vec_norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale) * (v / scale)).sum::<f64>().sqrt()
}

// Pade order selection thresholds and numerator coefficients from Higham's
// scaling-and-squaring analysis.
const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_230e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Matrix exponential `exp(A * t)`.
///
/// # Examples
///
/// ```
/// use switched::linalg::{matrix_exp, Matrix};
///
/// let a = Matrix::scalar(-1.0).unwrap();
/// let e = matrix_exp(&a, 2.0).unwrap();
/// assert!((e.entry(0, 0) - (-2.0f64).exp()).abs() < 1e-15);
/// ```
pub fn matrix_exp(a: &Matrix, t: f64) -> Result<Matrix> {
    if !t.is_finite() {
        return Err(Error::InvalidInput("time must be finite".into()));
    }
    let at = a.as_inner() * t;
    let norm = Matrix { inner: at.clone() }.norm_one();
    if !norm.is_finite() {
        return Err(Error::Numerical("overflow while scaling the exponent".into()));
    }

    let (coeffs, squarings): (&[f64], u32) = if norm <= THETA_3 {
        (&B3, 0)
    } else if norm <= THETA_5 {
        (&B5, 0)
    } else if norm <= THETA_7 {
        (&B7, 0)
    } else if norm <= THETA_9 {
        (&B9, 0)
    } else {
        let s = if norm <= THETA_13 {
            0
        } else {
            (norm / THETA_13).log2().ceil() as u32
        };
        (&B13, s)
    };

    let scaled = &at / 2f64.powi(squarings as i32);
    let mut exp = pade(&scaled, coeffs)?;
    for _ in 0..squarings {
        exp = &exp * &exp;
    }
    if exp.inner.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix exponential overflowed".into()));
    }
    Ok(exp)
}

/// Evaluates the diagonal Pade approximant with numerator coefficients `b`
/// at `a`, solving `(V - U) X = V + U` where `U` collects odd powers and `V`
/// even ones.
fn pade(a: &DMatrix<f64>, b: &[f64]) -> Result<Matrix> {
    let dim = a.nrows();
    let id = DMatrix::<f64>::identity(dim, dim);
    let a2 = a * a;

    let (u, v) = if b.len() == 14 {
        // Order 13 splits the polynomials to save multiplications.
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let u_high = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
        let u_low = &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
        let u = a * (u_high + u_low);
        let v_high = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
        let v = v_high + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
        (u, v)
    } else {
        let mut even = id.clone();
        let mut u = &even * b[1];
        let mut v = &even * b[0];
        for k in (2..b.len()).step_by(2) {
            even = &even * &a2;
            v += &even * b[k];
            if k + 1 < b.len() {
                u += &even * b[k + 1];
            }
        }
        (a * u, v)
    };

    let rhs = &v + &u;
    let lhs = &v - &u;
    lhs.lu()
        .solve(&rhs)
        .map(|inner| Matrix { inner })
        .ok_or_else(|| Error::Numerical("singular Pade denominator".into()))
}

/// Induced 2-norm: the square root of the largest eigenvalue of `A' * A`.
///
/// Computed with a symmetric eigensolver rather than power iteration so the
/// result is deterministic.
pub fn induced_norm(a: &Matrix) -> Result<f64> {
    let gram = a.as_inner().transpose() * a.as_inner();
    let eig = nalgebra::SymmetricEigen::try_new(gram, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
    Ok(lambda_max.max(0.0).sqrt())
}

/// Eigenvalue summary of a single subsystem matrix.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SpectralSummary {
    /// Eigenvalues as `[re, im]` pairs, sorted by real part, then imaginary.
    pub eigenvalues: Vec<[f64; 2]>,
    /// Largest real part (spectral abscissa).
    pub abscissa: f64,
    /// Largest modulus (spectral radius).
    pub radius: f64,
    /// Strictly negative abscissa.
    pub hurwitz: bool,
    /// Spectral radius strictly below one.
    pub schur: bool,
    /// An eigenvalue sits within `1e-10` of the relevant stability boundary,
    /// so `hurwitz`/`schur` should not be trusted as strict verdicts.
    pub marginal: bool,
}

/// Eigenvalues, spectral abscissa and radius, and stability classifications.
pub fn spectral_summary(a: &Matrix) -> Result<SpectralSummary> {
    let schur_dec = nalgebra::linalg::Schur::try_new(a.as_inner().clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let mut eigenvalues: Vec<[f64; 2]> = schur_dec
        .complex_eigenvalues()
        .iter()
        .map(|z| [z.re, z.im])
        .collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));

    let abscissa = eigenvalues.iter().map(|z| z[0]).fold(f64::NEG_INFINITY, f64::max);
    let radius = eigenvalues
        .iter()
        .map(|z| z[0].hypot(z[1]))
        .fold(0.0f64, f64::max);
    let marginal = abscissa.abs() <= 1e-10 || (radius - 1.0).abs() <= 1e-10;
    Ok(SpectralSummary {
        eigenvalues,
        abscissa,
        radius,
        hurwitz: abscissa < 0.0,
        schur: radius < 1.0,
        marginal,
    })
}

/// Envelope constant `k` and rate `alpha` with
/// `norm(exp(A t)) <= k * exp(alpha t)` on `[0, t_max]`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EnvelopeBound {
    pub k: f64,
    /// Spectral abscissa of the matrix.
    pub alpha: f64,
    /// Where the envelope ratio peaked.
    pub t_peak: f64,
    /// Horizon the bound was established on.
    pub t_max: f64,
}

const ENVELOPE_GRID: usize = 1024;

/// Bounds the transient envelope of `exp(A t)` over `[0, t_max]`.
///
/// `alpha` is the spectral abscissa; `k` is the maximum of
/// `norm(exp(A t)) * exp(-alpha t)` over a uniform grid, refined around the
/// grid maximum by golden-section search. `k >= 1` always, since the ratio
/// is one at `t = 0`.
pub fn envelope_bound(a: &Matrix, t_max: f64) -> Result<EnvelopeBound> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidInput("envelope horizon must be positive and finite".into()));
    }
    let alpha = spectral_summary(a)?.abscissa;
    let ratio = |t: f64| -> Result<f64> {
        Ok(induced_norm(&matrix_exp(a, t)?)? * (-alpha * t).exp())
    };

    let mut best = (0.0f64, 1.0f64);
    for j in 0..ENVELOPE_GRID {
        let t = t_max * j as f64 / (ENVELOPE_GRID - 1) as f64;
        let g = ratio(t)?;
        if g > best.1 {
            best = (t, g);
        }
    }

    // Refine inside the grid cells adjacent to the coarse maximum.
    let cell = t_max / (ENVELOPE_GRID - 1) as f64;
    let mut lo = (best.0 - cell).max(0.0);
    let mut hi = (best.0 + cell).min(t_max);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut t1 = hi - phi * (hi - lo);
    let mut t2 = lo + phi * (hi - lo);
    let mut g1 = ratio(t1)?;
    let mut g2 = ratio(t2)?;
    for _ in 0..60 {
        if g1 < g2 {
            lo = t1;
            t1 = t2;
            g1 = g2;
            t2 = lo + phi * (hi - lo);
            g2 = ratio(t2)?;
        } else {
            hi = t2;
            t2 = t1;
            g2 = g1;
            t1 = hi - phi * (hi - lo);
            g1 = ratio(t1)?;
        }
    }
    let (t_peak, k) = if g1 > best.1 { (t1, g1) } else { best };

    Ok(EnvelopeBound { k, alpha, t_peak, t_max })
}
