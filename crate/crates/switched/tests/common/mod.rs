//! Oracles and generators shared by the integration suites.
//!
//! The oracles are deliberately independent of the library under test:
//! plain `Vec<Vec<f64>>` arithmetic, no shared kernels.

#![allow(dead_code)]

use rand::Rng;
use switched::linalg::Matrix;

pub fn identity_rows(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = a.len();
    let p = b[0].len();
    let inner = b.len();
    let mut out = vec![vec![0.0; p]; m];
    for i in 0..m {
        for k in 0..inner {
            let aik = a[i][k];
            for j in 0..p {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Truncated Taylor series for `exp(A t)`. With `norm(A) t <= 1` the
/// 30-term tail is below 1/31! ~ 1.2e-34, far inside f64 rounding.
pub fn taylor_exp(rows: &[Vec<f64>], t: f64, terms: usize) -> Vec<Vec<f64>> {
    let m = rows.len();
    let mut sum = identity_rows(m);
    let mut term = identity_rows(m);
    for k in 1..=terms {
        term = mat_mul(&term, rows);
        let factor = t / k as f64;
        for row in &mut term {
            for v in row {
                *v *= factor;
            }
        }
        for i in 0..m {
            for j in 0..m {
                sum[i][j] += term[i][j];
            }
        }
    }
    sum
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        for (va, vb) in ra.iter().zip(rb) {
            worst = worst.max((va - vb).abs());
        }
    }
    worst
}

pub fn frobenius(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn random_rows(rng: &mut impl Rng, m: usize, amplitude: f64) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..m).map(|_| rng.gen_range(-amplitude..amplitude)).collect())
        .collect()
}

pub fn random_matrix(rng: &mut impl Rng, m: usize, amplitude: f64) -> Matrix {
    Matrix::from_rows(&random_rows(rng, m, amplitude)).expect("square rows")
}

pub fn random_vector(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random matrix rescaled so its induced 2-norm is exactly `target`.
pub fn random_with_norm(rng: &mut impl Rng, m: usize, target: f64) -> Matrix {
    loop {
        let rows = random_rows(rng, m, 1.0);
        let a = Matrix::from_rows(&rows).expect("square rows");
        let norm = switched::linalg::induced_norm(&a).expect("finite entries");
        if norm < 1e-6 {
            continue;
        }
        let scaled: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v * target / norm).collect())
            .collect();
        return Matrix::from_rows(&scaled).expect("square rows");
    }
}

/// Random matrix forced Hurwitz by a Gershgorin shift: every eigenvalue's
/// real part ends up at most `-gap`.
pub fn random_hurwitz(rng: &mut impl Rng, m: usize, gap: f64) -> Matrix {
    let mut rows = random_rows(rng, m, 1.0);
    let mut shift = f64::NEG_INFINITY;
    for (i, row) in rows.iter().enumerate() {
        let radius: f64 =
            row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v.abs()).sum();
        shift = shift.max(row[i] + radius);
    }
    let shift = shift + gap;
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] -= shift;
    }
    Matrix::from_rows(&rows).expect("square rows")
}
